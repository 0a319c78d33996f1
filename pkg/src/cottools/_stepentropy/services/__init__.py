# SPDX-License-Identifier: GPL-3.0-or-later
from .backend import BackendService  # noqa: F401
from .config import ConfigService  # noqa: F401
from .io import IoService  # noqa: F401
from .prune import PruneService  # noqa: F401
from .reward import RewardService  # noqa: F401
from .sweep import SweepService  # noqa: F401

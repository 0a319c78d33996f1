# SPDX-License-Identifier: GPL-3.0-or-later
from .base import Backend, get_backend, register_backend  # noqa: F401
from .completions import BackendConfig, CompletionsClient, RetryConfig  # noqa: F401
from .synthetic import (  # noqa: F401
    ExactReader,
    JointDistribution,
    SyntheticLm,
    exact_joint,
    random_lm,
    synth_generate,
)
from .tasks import (  # noqa: F401
    SyntheticReader,
    TaskFamilySpec,
    synthetic_task,
    task_family,
    task_lm,
)

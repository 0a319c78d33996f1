# SPDX-License-Identifier: GPL-3.0-or-later
import logging
from typing import Any, Dict, Mapping, Optional

from attrs import asdict, evolve, field, fields, frozen
from attrs.validators import instance_of

from .backends import BackendConfig
from .errors import ValidationError
from .experiments import DatasetConfig, SweepSpec
from .pruner import PruneConfig
from .reward import RewardConfig
from .utils import config_hash

log = logging.getLogger("cottools.stepentropy")

SECTIONS = {
    "prune": PruneConfig,
    "reward": RewardConfig,
    "backend": BackendConfig,
    "sweep": SweepSpec,
    "dataset": DatasetConfig,
}


def _plain(value: Any) -> Any:
    if isinstance(value, (frozenset, set)):
        return sorted(_plain(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, str):
        return str(value)
    return value


def _section(name: str, values: Mapping[str, Any], base: Optional[Any] = None) -> Any:
    klass = SECTIONS[name]
    if not isinstance(values, Mapping):
        raise ValidationError(f"Config section {name} must be a mapping")
    known = {a.name for a in fields(klass)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValidationError(f"Unknown key(s) in config section {name}: {', '.join(unknown)}")
    try:
        if base is not None:
            return evolve(base, **values)
        return klass(**values)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"Invalid config section {name}: {exc}") from exc


@frozen
class CliConfig:
    """The effective configuration of one command: file values, then flag overrides."""

    prune: PruneConfig = field(factory=PruneConfig, validator=instance_of(PruneConfig))
    reward: RewardConfig = field(factory=RewardConfig, validator=instance_of(RewardConfig))
    backend: BackendConfig = field(factory=BackendConfig, validator=instance_of(BackendConfig))
    sweep: SweepSpec = field(factory=SweepSpec, validator=instance_of(SweepSpec))
    dataset: DatasetConfig = field(factory=DatasetConfig, validator=instance_of(DatasetConfig))

    @classmethod
    def load(
        cls,
        data: Optional[Mapping[str, Any]] = None,
        overrides: Optional[Mapping[str, Mapping[str, Any]]] = None,
    ) -> "CliConfig":
        """
        Build the configuration from a parsed config file and flag overrides.

        Args:
            data (dict, optional)
                The parsed YAML document, keyed by section.
            overrides (dict, optional)
                Flag values keyed by section; None values are ignored.
        Returns:
            The validated configuration.
        Raises:
            ValidationError: on unknown sections or keys, or invalid values.
        """
        data = data or {}
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ValidationError(f"Unknown config section(s): {', '.join(unknown)}")

        sections = {name: _section(name, data.get(name) or {}) for name in SECTIONS}
        for name, values in (overrides or {}).items():
            values = {k: v for k, v in values.items() if v is not None}
            if values:
                sections[name] = _section(name, values, base=sections[name])
        return cls(**sections)

    def effective(self) -> Dict[str, Any]:
        """Return the configuration as plain JSON-compatible data."""
        return _plain(asdict(self, recurse=True))

    @property
    def config_hash(self) -> str:
        """Return the stable digest of the effective configuration."""
        return config_hash(self.effective())

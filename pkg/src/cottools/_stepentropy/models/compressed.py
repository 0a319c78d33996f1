# SPDX-License-Identifier: GPL-3.0-or-later
import math
from typing import Any, Tuple, Union

from attrs import Attribute, field, frozen
from attrs.validators import ge, instance_of

from .enums import Strategy


def unit_interval(instance: Any, attribute: Attribute, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and 0.0 <= value <= 1.0):
        raise ValueError(f"{attribute.name} must be within [0, 1], got {value!r}")


@frozen
class KeptStep:
    """A step preserved verbatim in a compressed chain of thought."""

    index: int = field(validator=[instance_of(int), ge(0)])
    text: str = field(validator=instance_of(str))


@frozen
class Skip:
    """A pruned step, rendered as the skip marker."""

    index: int = field(validator=[instance_of(int), ge(0)])


Element = Union[KeptStep, Skip]


@frozen
class CompressedCot:
    """The compressed think region of one trace and its inference prompt."""

    source_id: str = field(validator=instance_of(str))
    kappa: float = field(converter=float, validator=unit_interval)
    strategy: Strategy = field(converter=Strategy.parse)
    elements: Tuple[Element, ...] = field(converter=tuple)
    inference_prompt: str = field(validator=instance_of(str))
    compressed_think: str = field(validator=instance_of(str))
    skip_markers: int = field(validator=[instance_of(int), ge(0)])
    """Number of skip markers present in ``compressed_think``."""

    @elements.validator
    def _check_elements(self, attribute: Attribute, value: Tuple[Element, ...]) -> None:
        for position, element in enumerate(value):
            if not isinstance(element, (KeptStep, Skip)):
                raise TypeError(f"elements[{position}] must be a KeptStep or a Skip")
            if element.index != position:
                raise ValueError(
                    f"elements must list every step index once in order; "
                    f"found {element.index} at position {position}"
                )

    @property
    def pruned_indices(self) -> Tuple[int, ...]:
        """Return the indices of the pruned steps, ascending."""
        return tuple(e.index for e in self.elements if isinstance(e, Skip))

    @property
    def kept_indices(self) -> Tuple[int, ...]:
        """Return the indices of the kept steps, ascending."""
        return tuple(e.index for e in self.elements if isinstance(e, KeptStep))

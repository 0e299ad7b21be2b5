"""Enums and enum helpers shared between event-cmax modules."""

from __future__ import annotations

from enum import Enum
from typing import Any, TypeVar

TEnum = TypeVar("TEnum", bound=Enum)


def coerce_enum(enum_cls: type[TEnum], value: Any, *, default: TEnum) -> TEnum:
    """Return enum member from the provided value, accepting names/values."""

    if value is None:
        return default
    if isinstance(value, enum_cls):
        return value
    if isinstance(value, str):
        normalized: str = value.strip().upper().replace("-", "_")
        try:
            return enum_cls[normalized]
        except KeyError:
            pass
        return enum_cls(value.strip().lower())
    return enum_cls(value)


class AccumulationMode(str, Enum):
    """What each warped event deposits into the image of warped events."""

    COUNT = "count"
    POLARITY = "polarity"


class SplatKind(str, Enum):
    """How a warped event at a continuous position is spread over pixels."""

    NEAREST = "nearest"
    BILINEAR = "bilinear"
    GAUSSIAN = "gaussian"


class SliceBy(str, Enum):
    """Windowing rule for cutting an event stream into slices."""

    COUNT = "count"
    DURATION = "duration"


class RefTimePolicy(str, Enum):
    """Which time inside a window becomes the slice reference time."""

    FIRST = "first"
    MIDPOINT = "midpoint"


class CGVariant(str, Enum):
    """Direction update used by the conjugate gradient ascent."""

    POLAK_RIBIERE_PLUS = "polak-ribiere-plus"
    FLETCHER_REEVES = "fletcher-reeves"
    STEEPEST = "steepest"


class LineSearchKind(str, Enum):
    """Step-length rule used by the ascent methods."""

    ARMIJO = "armijo"
    PARABOLIC = "parabolic"


class Problem(str, Enum):
    """Estimation problems understood by the synthetic generators and the CLI."""

    FLOW = "flow"
    ROTATION = "rotation"
    DEPTH = "depth"
    HOMOGRAPHY = "homography"

"""Event records and time-ordered event slices."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from ..type_helpers import AccumulationMode
from .base import Validatable, frozen_array


@dataclass(slots=True, frozen=True)
class Event:
    """A single brightness-change record: time (s), column and row (px) and polarity (+1/-1)."""

    t: float
    x: float
    y: float
    p: int

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if self.p not in (-1, 1):
            errors.append(f"{prefix}Event polarity must be -1 or +1, got {self.p}.")
        if not np.isfinite(self.t) or self.t < 0:
            errors.append(f"{prefix}Event time must be finite and non-negative, got {self.t}.")
        return errors


def _empty_float() -> NDArray[np.float64]:
    return frozen_array(np.zeros(0))


def _empty_polarity() -> NDArray[np.int8]:
    return frozen_array(np.zeros(0), dtype=np.int8)


@dataclass(slots=True)
class EventSlice(Validatable):
    """Time-ordered events stored column-wise, plus the reference time used for warping.

    Arrays are copied into read-only storage on construction so slices can be shared
    between threads. `time_offset` records the timestamp subtracted at ingestion (0 when
    the file's own timestamps are kept).
    """

    t: NDArray[np.float64] = field(default_factory=_empty_float)
    x: NDArray[np.float64] = field(default_factory=_empty_float)
    y: NDArray[np.float64] = field(default_factory=_empty_float)
    p: NDArray[np.int8] = field(default_factory=_empty_polarity)
    t_ref: float | None = None
    time_offset: float = 0.0

    def __post_init__(self) -> None:
        self.t = frozen_array(np.ravel(self.t))
        self.x = frozen_array(np.ravel(self.x))
        self.y = frozen_array(np.ravel(self.y))
        self.p = frozen_array(np.ravel(self.p), dtype=np.int8)
        if self.t_ref is None:
            self.t_ref = float(self.t[0]) if self.t.size else 0.0
        else:
            self.t_ref = float(self.t_ref)
        self.assert_valid()

    @classmethod
    def from_events(cls, events: Sequence[Event], t_ref: float | None = None) -> "EventSlice":
        """Build a slice from individual `Event` records (already time-ordered)."""
        return cls(
            t=np.array([event.t for event in events], dtype=np.float64),
            x=np.array([event.x for event in events], dtype=np.float64),
            y=np.array([event.y for event in events], dtype=np.float64),
            p=np.array([event.p for event in events], dtype=np.int8),
            t_ref=t_ref,
        )

    @classmethod
    def concatenate(cls, slices: Sequence["EventSlice"], t_ref: float | None = None) -> "EventSlice":
        """Join consecutive slices; the result must still be time-ordered."""
        if not slices:
            return cls()
        return cls(
            t=np.concatenate([item.t for item in slices]),
            x=np.concatenate([item.x for item in slices]),
            y=np.concatenate([item.y for item in slices]),
            p=np.concatenate([item.p for item in slices]),
            t_ref=t_ref,
            time_offset=slices[0].time_offset,
        )

    def __len__(self) -> int:
        return int(self.t.size)

    def __iter__(self) -> Iterator[Event]:
        for t, x, y, p in zip(self.t.tolist(), self.x.tolist(), self.y.tolist(), self.p.tolist()):
            yield Event(t=t, x=x, y=y, p=p)

    @property
    def is_empty(self) -> bool:
        return self.t.size == 0

    @property
    def reference_time(self) -> float:
        """Reference time as a plain float (always set after construction)."""
        return float(self.t_ref) if self.t_ref is not None else 0.0

    @property
    def t_start(self) -> float:
        return float(self.t[0]) if self.t.size else self.reference_time

    @property
    def t_end(self) -> float:
        return float(self.t[-1]) if self.t.size else self.reference_time

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @property
    def t_mid(self) -> float:
        return 0.5 * (self.t_start + self.t_end)

    def points(self) -> NDArray[np.float64]:
        """Return event positions as an (N, 2) array of (x, y) pixels."""
        return np.column_stack((self.x, self.y))

    def weights(self, mode: AccumulationMode) -> NDArray[np.float64]:
        """Return the value b_k each event deposits: 1 in count mode, its polarity in polarity mode."""
        if mode is AccumulationMode.POLARITY:
            return self.p.astype(np.float64)
        return np.ones(self.t.size, dtype=np.float64)

    def with_t_ref(self, t_ref: float) -> "EventSlice":
        return EventSlice(t=self.t, x=self.x, y=self.y, p=self.p, t_ref=t_ref, time_offset=self.time_offset)

    def select(self, mask: ArrayLike, t_ref: float | None = None) -> "EventSlice":
        """Return the events where `mask` is true (or at the given indices).

        The reference time defaults to the first selected event, like a freshly loaded slice.
        """
        index: NDArray[Any] = np.asarray(mask)
        return EventSlice(
            t=self.t[index],
            x=self.x[index],
            y=self.y[index],
            p=self.p[index],
            t_ref=t_ref,
            time_offset=self.time_offset,
        )

    def prefix(self, count: int) -> "EventSlice":
        """Return the first `count` events with the reference time re-derived from the prefix."""
        count = max(0, min(count, len(self)))
        return EventSlice(
            t=self.t[:count],
            x=self.x[:count],
            y=self.y[:count],
            p=self.p[:count],
            time_offset=self.time_offset,
        )

    def polarity_flipped(self) -> "EventSlice":
        return EventSlice(t=self.t, x=self.x, y=self.y, p=-self.p, t_ref=self.t_ref, time_offset=self.time_offset)

    def time_reversed(self) -> "EventSlice":
        """Play the slice backwards about its temporal midpoint.

        Event times map to t_start + t_end - t, the order is reversed so times stay sorted,
        and polarities flip because a reversed brightness increase is a decrease. The
        reference time is kept, so a slice referenced at its first event stays referenced
        at the first event of the reversed window.
        """
        if self.is_empty:
            return EventSlice(time_offset=self.time_offset)
        span: float = self.t_start + self.t_end
        reversed_t: NDArray[np.float64] = span - self.t[::-1]
        return EventSlice(
            t=reversed_t,
            x=self.x[::-1],
            y=self.y[::-1],
            p=-self.p[::-1],
            t_ref=self.reference_time,
            time_offset=self.time_offset,
        )

    def describe(self) -> str:
        return (
            f"EventSlice(events={len(self)}, t=[{self.t_start:.6f}, {self.t_end:.6f}], "
            f"t_ref={self.reference_time:.6f})"
        )

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        count: int = self.t.size
        if not (self.x.size == self.y.size == self.p.size == count):
            errors.append(f"{prefix}Event columns must have equal length.")
            return errors
        if count == 0:
            return errors
        if not np.all(np.isfinite(self.t)) or float(self.t.min()) < 0.0:
            errors.append(f"{prefix}Event times must be finite and non-negative.")
        if not np.all(np.diff(self.t) >= 0.0):
            errors.append(f"{prefix}Event times must be sorted non-decreasing.")
        if not np.all(np.abs(self.p) == 1):
            errors.append(f"{prefix}Event polarities must be -1 or +1.")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            errors.append(f"{prefix}Event coordinates must be finite.")
        span: float = float(self.t[-1] - self.t[0])
        reference: float = self.reference_time
        if not (float(self.t[0]) - span <= reference <= float(self.t[-1]) + span):
            errors.append(
                f"{prefix}Reference time {reference:.6f} lies outside "
                f"[{float(self.t[0]) - span:.6f}, {float(self.t[-1]) + span:.6f}]."
            )
        if errors:
            logger.debug("EventSlice validation errors: {errors}", errors=errors)
        return errors

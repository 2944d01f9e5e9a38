"""Frames, basic probability assignments, and conjunctive combination.

Focal elements are encoded as uint64 bitmasks over the ordered frame, which
caps the frame at MAX_FRAME_SIZE labels and keeps intersections O(1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._kernels import combine_arrays, conflict_arrays

MAX_FRAME_SIZE = 64

MASS_SUM_TOL = 1e-9
PRUNE_EPS = 1e-12


class FrameMismatchError(ValueError):
    """Two BPAs on different frames were combined."""


class TotalConflictError(ValueError):
    """A conjunctive combination left zero mass on nonempty sets."""


@dataclass(frozen=True)
class Frame:
    """An ordered finite set of hypothesis labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("frame needs at least one label")
        if len(self.labels) > MAX_FRAME_SIZE:
            raise ValueError(f"frame larger than {MAX_FRAME_SIZE} labels")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("frame labels must be unique")
        if any(not lab for lab in self.labels):
            raise ValueError("frame labels must be non-empty strings")
        object.__setattr__(
            self, "_index", {lab: i for i, lab in enumerate(self.labels)}
        )

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def mask(self, labels: Iterable[str]) -> int:
        m = 0
        for lab in labels:
            try:
                m |= 1 << self._index[lab]
            except KeyError:
                raise ValueError(f"label {lab!r} not in frame") from None
        return m

    def labels_of(self, mask: int) -> frozenset[str]:
        return frozenset(
            lab for i, lab in enumerate(self.labels) if mask >> i & 1
        )


@dataclass(frozen=True, eq=False)
class BPA:
    """A basic probability assignment: one piece of evidence.

    ``keys`` are sorted uint64 bitmasks of the focal elements; ``masses`` the
    matching positive masses summing to 1.  Immutable; construct via make_bpa
    or vacuous.
    """

    frame: Frame
    keys: np.ndarray
    masses: np.ndarray
    id: str | None = None

    def __len__(self) -> int:
        return len(self.keys)

    def mass(self, labels: Iterable[str]) -> float:
        key = np.uint64(self.frame.mask(labels))
        idx = np.searchsorted(self.keys, key)
        if idx < len(self.keys) and self.keys[idx] == key:
            return float(self.masses[idx])
        return 0.0

    def as_dict(self) -> dict[frozenset[str], float]:
        return {
            self.frame.labels_of(int(k)): float(m)
            for k, m in zip(self.keys, self.masses)
        }

    def is_vacuous(self) -> bool:
        return len(self.keys) == 1 and int(self.keys[0]) == self.frame.full_mask

    def bel(self, labels: Iterable[str]) -> float:
        a = self.frame.mask(labels)
        return float(
            sum(m for k, m in zip(self.keys, self.masses) if int(k) | a == a)
        )

    def pls(self, labels: Iterable[str]) -> float:
        a = self.frame.mask(labels)
        return float(
            sum(m for k, m in zip(self.keys, self.masses) if int(k) & a)
        )

    def with_id(self, new_id: str) -> "BPA":
        return BPA(self.frame, self.keys, self.masses, new_id)


@dataclass(frozen=True)
class CombinationResult:
    combined: BPA
    conflict: float


def _from_mask_map(frame: Frame, mass_by_key: Mapping[int, float], id=None) -> BPA:
    keys = np.array(sorted(mass_by_key), dtype=np.uint64)
    masses = np.array([mass_by_key[int(k)] for k in keys], dtype=np.float64)
    return BPA(frame, keys, masses, id)


def vacuous(frame: Frame, id: str | None = None) -> BPA:
    return _from_mask_map(frame, {frame.full_mask: 1.0}, id)


def make_bpa(
    frame: Frame,
    entries: Sequence[tuple[Iterable[str], float]],
    id: str | None = None,
) -> BPA:
    """Validate and build a BPA from (label-subset, mass) pairs.

    Duplicate focal elements are merged by summing; zero-mass entries are
    dropped.  Masses must be non-negative and sum to 1 within 1e-9.
    """
    if not entries:
        raise ValueError("entries must be nonempty")
    acc: dict[int, float] = {}
    for labels, mass in entries:
        if mass < 0:
            raise ValueError(f"negative mass {mass}")
        key = frame.mask(labels)
        if key == 0:
            raise ValueError("empty focal element")
        acc[key] = acc.get(key, 0.0) + float(mass)
    total = sum(acc.values())
    if abs(total - 1.0) > MASS_SUM_TOL:
        raise ValueError(f"masses sum to {total}, expected 1")
    acc = {k: v for k, v in acc.items() if v > 0.0}
    if not acc:
        raise ValueError("all masses are zero")
    return _from_mask_map(frame, acc, id)


def _check_same_frame(m1: BPA, m2: BPA) -> None:
    if m1.frame.labels != m2.frame.labels:
        raise FrameMismatchError(
            f"frames differ: {m1.frame.labels} vs {m2.frame.labels}"
        )


def _normalize(frame: Frame, keys, masses, id=None) -> BPA:
    total = masses.sum()
    masses = masses / total
    keep = masses >= PRUNE_EPS
    if not keep.all():
        keys, masses = keys[keep], masses[keep]
        masses = masses / masses.sum()
    return BPA(frame, keys, masses, id)


def conjunctive_combine(m1: BPA, m2: BPA) -> CombinationResult:
    """Dempster's rule for two BPAs; reports the discarded empty-set mass.

    Raises TotalConflictError when the two BPAs are fully contradictory.
    """
    _check_same_frame(m1, m2)
    keys, masses, conflict = combine_arrays(m1.keys, m1.masses, m2.keys, m2.masses)
    if len(keys) == 0 or masses.sum() <= 0.0:
        raise TotalConflictError("total conflict: combination has empty support")
    return CombinationResult(_normalize(m1.frame, keys, masses), min(conflict, 1.0))


def conflict_between(m1: BPA, m2: BPA) -> float:
    """Conflict of combining m1 and m2, without building the combination."""
    _check_same_frame(m1, m2)
    return min(float(conflict_arrays(m1.keys, m1.masses, m2.keys, m2.masses)), 1.0)


def combine_all(evidence: Sequence[BPA], frame: Frame | None = None) -> CombinationResult:
    """Combine a whole subset of evidence, accumulating conflict.

    The reported conflict is 1 - prod(1 - kappa_step) over sequential pairwise
    combination, which equals the unnormalized joint empty-set mass and is
    independent of input order.
    """
    if not evidence:
        if frame is None:
            raise ValueError("empty evidence list needs an explicit frame")
        return CombinationResult(vacuous(frame), 0.0)
    acc = evidence[0]
    survival = 1.0
    for m in evidence[1:]:
        step = conjunctive_combine(acc, m)
        acc = step.combined
        survival *= 1.0 - step.conflict
    return CombinationResult(
        BPA(acc.frame, acc.keys, acc.masses, None), 1.0 - survival
    )


def discount(m: BPA, alpha: float) -> BPA:
    """Scale every focal mass by alpha, moving the balance to the full frame."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"discount factor {alpha} outside [0, 1]")
    if alpha == 0.0:
        return vacuous(m.frame, m.id)
    acc = {int(k): alpha * float(v) for k, v in zip(m.keys, m.masses)}
    slack = 1.0 - alpha
    if slack > 0.0:
        full = m.frame.full_mask
        acc[full] = acc.get(full, 0.0) + slack
    return _from_mask_map(m.frame, acc, m.id)

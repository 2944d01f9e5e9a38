"""Fast classification against a prototype model, with a rejection option.

Per incoming piece of evidence the work is one pairwise conflict computation
per subset (at most M), each bounded by the model's fixed focal counts, so
latency does not depend on how much evidence the model was built from.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .core import BPA, Frame, FrameMismatchError, conflict_between
from .prototypes import PrototypeModel

ASSIGNED = "assigned"
REJECTED = "rejected"


@dataclass(frozen=True)
class Classification:
    evidence_id: str | None
    outcome: str
    subset: int | None  # 0-based, None when rejected
    scores: tuple[float, ...]
    threshold: float
    elapsed: float  # seconds


@dataclass(frozen=True)
class StreamItemError:
    evidence_id: str | None
    message: str


def rejection_threshold(model: PrototypeModel) -> float:
    """Cost of opening a fresh subset under the prior: evidence scoring above
    this against every subset is rejected."""
    m_n = model.prior.mass_of(model.n)
    if m_n == 0.0:
        raise ValueError(
            f"model subset count unsupported by prior: m(E_{model.n}) = 0"
        )
    t = (m_n - model.prior.mass_of(model.n + 1)) / m_n
    if t < 0.0:
        warnings.warn(
            "rejection threshold is negative (prior prefers more subsets); "
            "every input with any conflict will be rejected",
            stacklevel=2,
        )
    return t


def adapt_to_frame(evidence: BPA, frame: Frame) -> BPA:
    """Zero-extend evidence on a sub-frame onto the model frame."""
    if evidence.frame.labels == frame.labels:
        return evidence
    extra = set(evidence.frame.labels) - set(frame.labels)
    if extra:
        raise FrameMismatchError(
            f"evidence labels {sorted(extra)} not in the model frame"
        )
    mapping = {evidence.frame.mask([lab]): frame.mask([lab])
               for lab in evidence.frame.labels}
    keys = []
    for k in evidence.keys:
        k = int(k)
        new = 0
        for old_bit, new_bit in mapping.items():
            if k & old_bit:
                new |= new_bit
        keys.append(new)
    order = np.argsort(np.array(keys, dtype=np.uint64), kind="mergesort")
    return BPA(
        frame,
        np.array(keys, dtype=np.uint64)[order],
        np.asarray(evidence.masses)[order],
        evidence.id,
    )


def classify(model: PrototypeModel, evidence: BPA,
             threshold: float | None = None) -> Classification:
    """Score evidence against every subset's combined prototypes and either
    assign it to the least-conflicting subset or reject it."""
    start = time.perf_counter()
    if threshold is None:
        threshold = rejection_threshold(model)
    evidence = adapt_to_frame(evidence, model.frame)
    scores = []
    for sub in model.subsets:
        if sub.conflict >= 1.0:
            raise ValueError("model subset is fully conflicting")
        # composing the recorded prototype conflict c_j with the pairwise
        # conflict kappa gives (c_j* - c_j)/(1 - c_j) = kappa exactly
        scores.append(conflict_between(evidence, sub.combined))
    best = min(range(len(scores)), key=lambda j: (scores[j], j))
    elapsed = time.perf_counter() - start
    if scores[best] > threshold:
        return Classification(
            evidence.id, REJECTED, None, tuple(scores), threshold, elapsed
        )
    return Classification(
        evidence.id, ASSIGNED, best, tuple(scores), threshold, elapsed
    )


def classify_stream(
    model: PrototypeModel, items: Iterable[BPA]
) -> Iterator[Classification | StreamItemError]:
    """Classify a stream item by item; per-item failures become
    StreamItemError records instead of aborting the stream."""
    threshold = rejection_threshold(model)
    for item in items:
        try:
            yield classify(model, item, threshold)
        except (ValueError, FrameMismatchError) as exc:
            yield StreamItemError(getattr(item, "id", None), str(exc))

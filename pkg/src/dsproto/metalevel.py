"""Metalevel specification: where does each piece of evidence belong?

Conflict changes under hypothetical single-evidence moves become metalevel
evidence on the frame {subset 1, ..., subset n, fresh subset}.  Combining all
of it per evidence yields Bel/Pls of membership in each position and a
credibility used to rank prototype candidates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import BPA, Frame, TotalConflictError, combine_all, make_bpa
from .partition import (
    Corpus,
    DomainPrior,
    Partition,
    domain_conflict,
    leave_one_out_survivals,
    subset_survival,
)
from .core import conflict_between

# deltas this far below zero are float dust from the combination fold
_CLAMP_EPS = 1e-12

CASE_FRESH = "fresh-subset"       # |subset| > 1: mass against opening one more
CASE_AGAINST_OWN = "against-own"  # singleton, prior prefers one subset fewer
CASE_FOR_OWN = "for-own"          # singleton, prior prefers keeping it


class FitsNowhereError(ValueError):
    """All metalevel evidence fully excludes every position."""


@dataclass(frozen=True)
class MetaEvidence:
    """Per-position metalevel masses for one piece of evidence.

    negatives[j] is m(e not in position j); positions 0..n-1 are the real
    subsets, position n the fresh subset.  positive is m(e in own subset),
    nonzero only in the singleton case where shrinking the partition would
    raise the domain conflict.
    """

    evidence_id: str
    own: int
    negatives: tuple[float, ...]
    positive: float = 0.0


@dataclass(frozen=True)
class SpecRow:
    evidence_id: str
    own: int
    bel: tuple[float, ...]
    pls: tuple[float, ...]
    alpha: tuple[float, ...]
    k_q: float
    meta: MetaEvidence


@dataclass(frozen=True)
class SpecificationReport:
    n: int  # real subset count; rows have n+1 positions
    rows: tuple[SpecRow, ...]

    def row(self, evidence_id: str) -> SpecRow:
        for r in self.rows:
            if r.evidence_id == evidence_id:
                return r
        raise KeyError(evidence_id)


def _clamp_delta(value: float) -> float:
    if -_CLAMP_EPS < value < 0.0:
        return 0.0
    if value < 0.0:
        raise ValueError(f"conflict delta {value} below float-noise bound")
    return min(value, 1.0)


def out_delta(partition: Partition, evidence_id: str) -> float:
    """Evidence against its own subset: how much conflict its removal frees."""
    i = partition.subset_of(evidence_id)
    ids = partition.subsets[i]
    if len(ids) == 1:
        return 0.0
    remaining = [eid for eid in ids if eid != evidence_id]
    _, surv_star = subset_survival(partition.corpus, remaining)
    if surv_star == 0.0:
        raise TotalConflictError(
            f"subset {i} remains fully conflicting without {evidence_id!r}"
        )
    c_i = partition.conflicts[i]
    c_star = 1.0 - surv_star
    return _clamp_delta((c_i - c_star) / (1.0 - c_star))


def in_delta(partition: Partition, evidence_id: str, k: int) -> float:
    """Evidence against joining subset k: the relative conflict increase,
    which reduces to the pairwise conflict with subset k's combination."""
    if k == partition.subset_of(evidence_id):
        raise ValueError("in_delta target must differ from the current subset")
    combined, surv = partition.subset_combined(k)
    if combined is None or surv == 0.0:
        raise TotalConflictError(f"subset {k} is fully conflicting already")
    return conflict_between(combined, partition.corpus[evidence_id])


def domain_delta(
    partition: Partition, prior: DomainPrior, evidence_id: str
) -> tuple[str, float]:
    """Metalevel mass from the domain prior's reaction to changing the
    subset count; returns one of the three printed cases."""
    i = partition.subset_of(evidence_id)
    n = partition.r
    c0 = domain_conflict(prior, n)
    if len(partition.subsets[i]) > 1:
        c0_star = domain_conflict(prior, n + 1)
        if c0 >= 1.0:
            raise ValueError(
                f"prior gives no support to {n} subsets; domain delta undefined"
            )
        return CASE_FRESH, max(0.0, min(1.0, (c0_star - c0) / (1.0 - c0)))
    c0_star = domain_conflict(prior, n - 1)
    if c0_star < c0:
        return CASE_AGAINST_OWN, (c0 - c0_star) / (1.0 - c0_star)
    if c0_star > c0:
        if c0_star == 0.0:
            raise ValueError("domain delta undefined: both counts fully supported")
        return CASE_FOR_OWN, c0 / c0_star
    return CASE_AGAINST_OWN, 0.0


def meta_evidence(
    partition: Partition, prior: DomainPrior, evidence_id: str
) -> MetaEvidence:
    i = partition.subset_of(evidence_id)
    n = partition.r
    negatives = [0.0] * (n + 1)
    negatives[i] = out_delta(partition, evidence_id)
    for k in range(n):
        if k != i:
            negatives[k] = in_delta(partition, evidence_id, k)
    case, mass = domain_delta(partition, prior, evidence_id)
    positive = 0.0
    if case == CASE_FRESH:
        negatives[n] = mass
    elif case == CASE_AGAINST_OWN:
        negatives[i] = mass  # singleton: out_delta was 0
    else:
        positive = mass
    return MetaEvidence(evidence_id, i, tuple(negatives), positive)


def _meta_frame(positions: int) -> Frame:
    return Frame(tuple(f"chi{j + 1}" for j in range(positions)))


def combine_meta(meta: MetaEvidence) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Exact Dempster combination of all metalevel items; returns per-position
    (Bel, Pls).  This is the normative path; closed forms are checked against
    it in the tests."""
    positions = len(meta.negatives)
    frame = _meta_frame(positions)
    labels = frame.labels
    items: list[BPA] = []
    for j, a in enumerate(meta.negatives):
        if a > 0.0:
            rest = [labels[x] for x in range(positions) if x != j]
            if a >= 1.0:
                items.append(make_bpa(frame, [(rest, 1.0)]))
            else:
                items.append(make_bpa(frame, [(rest, a), (labels, 1.0 - a)]))
    if meta.positive > 0.0:
        own = [labels[meta.own]]
        if meta.positive >= 1.0:
            items.append(make_bpa(frame, [(own, 1.0)]))
        else:
            items.append(
                make_bpa(frame, [(own, meta.positive), (labels, 1.0 - meta.positive)])
            )
    try:
        combined = combine_all(items, frame=frame).combined
    except TotalConflictError:
        raise FitsNowhereError(
            f"evidence {meta.evidence_id!r} fits nowhere: "
            "metalevel combination is fully conflicting"
        ) from None
    bel = tuple(combined.bel([labels[j]]) for j in range(positions))
    pls = tuple(combined.pls([labels[j]]) for j in range(positions))
    return bel, pls


def closed_form_pls(negatives: tuple[float, ...]) -> tuple[float, ...]:
    """Fast path for the no-positive-mass case: Pls_k = (1-a_k)/(1-prod a_j)."""
    prod = 1.0
    for a in negatives:
        prod *= a
    if prod >= 1.0:
        raise FitsNowhereError("all metalevel masses are 1")
    return tuple((1.0 - a) / (1.0 - prod) for a in negatives)


def credibility(
    bel: tuple[float, ...], pls: tuple[float, ...], own: int
) -> tuple[float, ...]:
    """Per-position credibility: own subset gets its Bel outright, the rest of
    the unit is shared by squared plausibility."""
    k_q = sum(pls)
    if k_q == 0.0:
        raise ValueError("evidence impossible everywhere: sum of Pls is 0")
    bel_own = bel[own]
    out = []
    for j, p in enumerate(pls):
        a = (1.0 - bel_own) * p * p / k_q
        if j == own:
            a += bel_own
        out.append(min(a, 1.0))
    return tuple(out)


def specify(
    partition: Partition, prior: DomainPrior, evidence_id: str
) -> SpecRow:
    """One specification row: Bel/Pls/credibility for every position."""
    meta = meta_evidence(partition, prior, evidence_id)
    return _row_from_meta(meta)


def _row_from_meta(meta: MetaEvidence) -> SpecRow:
    bel, pls = combine_meta(meta)
    alpha = credibility(bel, pls, meta.own)
    return SpecRow(
        meta.evidence_id, meta.own, bel, pls, alpha, float(sum(pls)), meta
    )


def specify_all(partition: Partition, prior: DomainPrior) -> SpecificationReport:
    """Specification rows for the whole corpus.

    Leave-one-out conflicts are batched per subset so the whole report costs
    O(total evidence x subsets) pairwise combinations.
    """
    corpus = partition.corpus
    n = partition.r
    loo = [
        leave_one_out_survivals(corpus, ids) for ids in partition.subsets
    ]
    rows = []
    for i, ids in enumerate(partition.subsets):
        c_i = partition.conflicts[i]
        for k_pos, eid in enumerate(ids):
            negatives = [0.0] * (n + 1)
            if len(ids) > 1:
                surv_star = loo[i][k_pos]
                if surv_star == 0.0:
                    raise TotalConflictError(
                        f"subset {i} remains fully conflicting without {eid!r}"
                    )
                c_star = 1.0 - surv_star
                negatives[i] = _clamp_delta((c_i - c_star) / (1.0 - c_star))
            for k in range(n):
                if k != i:
                    negatives[k] = in_delta(partition, eid, k)
            case, mass = domain_delta(partition, prior, eid)
            positive = 0.0
            if case == CASE_FRESH:
                negatives[n] = mass
            elif case == CASE_AGAINST_OWN:
                negatives[i] = mass
            else:
                positive = mass
            rows.append(
                _row_from_meta(MetaEvidence(eid, i, tuple(negatives), positive))
            )
    rows.sort(key=lambda r: corpus.position(r.evidence_id))
    return SpecificationReport(n, tuple(rows))

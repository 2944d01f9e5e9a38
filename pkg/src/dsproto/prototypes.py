"""Prototype nomination, selection, and classifier model assembly.

Every piece of evidence nominates one subset (its best membership case);
per subset the N most credible nominees become the prototypes, which are
combined into a single BPA per subset with the combination conflict recorded.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .core import BPA, Frame, TotalConflictError, combine_all
from .metalevel import SpecificationReport, specify_all
from .partition import Corpus, DomainPrior, Partition


class SubsetUnrepresentableError(ValueError):
    def __init__(self, subset: int):
        super().__init__(f"subset {subset + 1} has no nominated prototype")
        self.subset = subset


@dataclass(frozen=True)
class PotentialPrototype:
    evidence_id: str
    subset: int
    basis: str  # "positive" | "negative"
    alpha: float


@dataclass(frozen=True)
class SubsetPrototypes:
    prototype_ids: tuple[str, ...]
    combined: BPA
    conflict: float


@dataclass(frozen=True)
class PrototypeModel:
    frame: Frame
    prior: DomainPrior
    n: int
    budget: int
    subsets: tuple[SubsetPrototypes, ...]


def nominate(report: SpecificationReport) -> list[PotentialPrototype]:
    """Decision rule 1: each piece of evidence backs the subset with maximal
    positive membership mass, falling back to minimal negative mass."""
    out = []
    for row in report.rows:
        if row.meta.positive > 0.0:
            j = row.own
            basis = "positive"
        else:
            negatives = row.meta.negatives[: report.n]
            j = min(range(report.n), key=lambda k: (negatives[k], k))
            basis = "negative"
        out.append(PotentialPrototype(row.evidence_id, j, basis, row.alpha[j]))
    return out


def select(
    nominees: list[PotentialPrototype], budget: int, n: int, corpus: Corpus
) -> dict[int, list[str]]:
    """Decision rule 2: per subset keep the `budget` most credible nominees,
    ties toward earlier evidence; every subset must keep at least one."""
    if budget < 1:
        raise ValueError("prototype budget must be >= 1")
    by_subset: dict[int, list[PotentialPrototype]] = {j: [] for j in range(n)}
    for p in nominees:
        by_subset[p.subset].append(p)
    chosen: dict[int, list[str]] = {}
    for j in range(n):
        group = by_subset[j]
        if not group:
            raise SubsetUnrepresentableError(j)
        if all(p.alpha == 0.0 for p in group):
            warnings.warn(
                f"subset {j + 1}: every nominee has zero credibility",
                stacklevel=2,
            )
        group.sort(key=lambda p: (-p.alpha, corpus.position(p.evidence_id)))
        chosen[j] = [p.evidence_id for p in group[:budget]]
    return chosen


def build_model(
    corpus: Corpus,
    partition: Partition,
    prior: DomainPrior,
    budget: int,
    report: SpecificationReport | None = None,
) -> PrototypeModel:
    """Nominate, select, and combine prototypes into a classification model."""
    if report is None:
        report = specify_all(partition, prior)
    chosen = select(nominate(report), budget, partition.r, corpus)
    subsets = []
    for j in range(partition.r):
        ids = chosen[j]
        try:
            result = combine_all([corpus[eid] for eid in ids])
        except TotalConflictError:
            raise TotalConflictError(
                f"prototype set of subset {j + 1} is self-contradictory"
            ) from None
        subsets.append(SubsetPrototypes(tuple(ids), result.combined, result.conflict))
    return PrototypeModel(
        corpus.frame, prior, partition.r, budget, tuple(subsets)
    )

"""Front/back benchmark: prototype classification vs full reclustering.

Holds out part of a corpus, clusters the rest, builds a prototype model, then
classifies each holdout item both ways: through the model (front path) and by
re-running the full metaconflict minimization with the item added (back
path).  The back path's subsets are matched to the training partition by
maximum overlap of training ids.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .classifier import ASSIGNED, classify, rejection_threshold
from .partition import (
    Corpus,
    DomainPrior,
    Partition,
    SearchConfig,
    minimize_metaconflict,
)
from .prototypes import PrototypeModel, build_model

NEW_EVENT = "new"  # back path: item landed in a subset with no training ids


@dataclass(frozen=True)
class HoldoutResult:
    evidence_id: str
    proto_outcome: str          # "assigned" | "rejected"
    proto_subset: int | None    # 0-based
    recluster_subset: int | str | None  # 0-based, or NEW_EVENT
    agree: bool
    proto_seconds: float
    recluster_seconds: float


@dataclass(frozen=True)
class BenchReport:
    n_train: int
    n_holdout: int
    train_mcf: float
    agreement: float
    results: tuple[HoldoutResult, ...]
    model: PrototypeModel


def match_subsets(reference: Partition, candidate: Partition,
                  training_ids: set[str]) -> list[int | str]:
    """For each candidate subset, the reference subset sharing the most
    training ids (ties toward the lower reference index), or NEW_EVENT when
    it holds no training evidence."""
    out: list[int | str] = []
    for ids in candidate.subsets:
        members = set(ids) & training_ids
        if not members:
            out.append(NEW_EVENT)
            continue
        overlaps = [len(members & set(ref)) for ref in reference.subsets]
        out.append(max(range(len(overlaps)), key=lambda i: (overlaps[i], -i)))
    return out


def run_benchmark(
    corpus: Corpus,
    prior: DomainPrior,
    budget: int,
    holdout_fraction: float,
    seed: int = 0,
    restarts: int = 8,
    max_subsets: int | None = None,
    init: str = "random",
) -> BenchReport:
    if not 0.0 < holdout_fraction < 1.0:
        raise ValueError("holdout fraction must be in (0, 1)")
    n_holdout = max(1, round(holdout_fraction * len(corpus)))
    if n_holdout >= len(corpus):
        raise ValueError("degenerate split: nothing left to train on")
    root = np.random.SeedSequence(seed)
    split_seq, train_seq, *item_seqs = root.spawn(2 + n_holdout)
    picks = np.random.default_rng(split_seq).choice(
        len(corpus), size=n_holdout, replace=False
    )
    holdout_pos = sorted(int(p) for p in picks)
    holdout_ids = [corpus.ids[p] for p in holdout_pos]
    train = Corpus([corpus[eid] for eid in corpus.ids if eid not in set(holdout_ids)])
    training_ids = set(train.ids)

    def config(seq):
        return SearchConfig(
            restarts=restarts,
            seed=int(seq.generate_state(1)[0]),
            max_subsets=max_subsets,
            init=init,
        )

    train_partition, train_mcf = minimize_metaconflict(train, prior, config(train_seq))
    model = build_model(train, train_partition, prior, budget)
    threshold = rejection_threshold(model)

    results = []
    agreements = 0
    for eid, seq in zip(holdout_ids, item_seqs):
        item = corpus[eid]
        proto = classify(model, item, threshold)
        extended = Corpus(train.bpas() + [item])
        t0 = time.perf_counter()
        repartition, _ = minimize_metaconflict(extended, prior, config(seq))
        recluster_seconds = time.perf_counter() - t0
        mapping = match_subsets(train_partition, repartition, training_ids)
        back = mapping[repartition.subset_of(eid)]
        if proto.outcome == ASSIGNED:
            agree = back == proto.subset
        else:
            agree = back == NEW_EVENT
        agreements += agree
        results.append(
            HoldoutResult(
                eid,
                proto.outcome,
                proto.subset,
                back,
                agree,
                proto.elapsed,
                recluster_seconds,
            )
        )
    return BenchReport(
        len(train),
        n_holdout,
        train_mcf,
        agreements / n_holdout,
        tuple(results),
        model,
    )

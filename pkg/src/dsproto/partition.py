"""Partitions of evidence into disjoint subsets and metaconflict minimization.

The criterion is Mcf = 1 - (1 - c0) * prod(1 - ci) where ci is the conflict of
combining everything inside subset i and c0 is the conflict between the
subset count and a prior over how many subsets there are.  Minimization is
steepest-descent over single-evidence moves with random restarts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    BPA,
    Frame,
    FrameMismatchError,
    MASS_SUM_TOL,
    combine_all,
    conflict_between,
    conjunctive_combine,
    vacuous,
)
from .core import TotalConflictError

NEW_SUBSET = -1

# minimum log-objective gain for a move to count as an improvement; shields
# the strict-descent termination argument from float noise in incremental
# conflict updates
_IMPROVE_EPS = 1e-12


class Corpus:
    """An ordered collection of identified evidence on one frame."""

    def __init__(self, bpas: Sequence[BPA]):
        if not bpas:
            raise ValueError("corpus must be nonempty")
        frame = bpas[0].frame
        seen: dict[str, BPA] = {}
        for m in bpas:
            if m.frame.labels != frame.labels:
                raise FrameMismatchError("corpus evidence on mismatched frames")
            if m.id is None:
                raise ValueError("corpus evidence needs ids")
            if m.id in seen:
                raise ValueError(f"duplicate evidence id {m.id!r}")
            seen[m.id] = m
        self.frame = frame
        self._by_id = seen
        self.ids: tuple[str, ...] = tuple(seen)
        self._pos = {eid: i for i, eid in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, eid: str) -> BPA:
        return self._by_id[eid]

    def __contains__(self, eid: str) -> bool:
        return eid in self._by_id

    def position(self, eid: str) -> int:
        return self._pos[eid]

    def bpas(self) -> list[BPA]:
        return [self._by_id[eid] for eid in self.ids]


@dataclass(frozen=True)
class DomainPrior:
    """Prior masses m(E_0)..m(E_M) over 'there are exactly i subsets'."""

    masses: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if len(self.masses) < 2:
            raise ValueError("prior needs masses up to at least E_1")
        if any(m < 0 for m in self.masses):
            raise ValueError("prior masses must be non-negative")
        if abs(sum(self.masses) - 1.0) > MASS_SUM_TOL:
            raise ValueError(f"prior masses sum to {sum(self.masses)}, expected 1")

    @property
    def max_subsets(self) -> int:
        return len(self.masses) - 1

    def mass_of(self, r: int) -> float:
        if 0 <= r < len(self.masses):
            return self.masses[r]
        return 0.0

    def support(self) -> list[int]:
        return [i for i, m in enumerate(self.masses) if m > 0.0]


def domain_conflict(prior: DomainPrior, r: int) -> float:
    """Prior mass against 'there are exactly r subsets'."""
    if r < 0:
        raise ValueError("subset count must be non-negative")
    return 1.0 - prior.mass_of(r)


def subset_survival(corpus: Corpus, ids: Sequence[str]) -> tuple[BPA | None, float]:
    """Combined BPA and survival prod(1 - kappa_step) for one subset.

    Unlike combine_all this tolerates total conflict, reporting it as
    (None, 0.0); the search needs that to walk out of bad initializations.
    """
    if not ids:
        return vacuous(corpus.frame), 1.0
    acc = corpus[ids[0]]
    survival = 1.0
    for eid in ids[1:]:
        try:
            step = conjunctive_combine(acc, corpus[eid])
        except TotalConflictError:
            return None, 0.0
        acc = step.combined
        survival *= 1.0 - step.conflict
        if survival == 0.0:
            return None, 0.0
    return acc, survival


def leave_one_out_survivals(corpus: Corpus, ids: Sequence[str]) -> list[float]:
    """Survival of each subset member's removal, via prefix/suffix folds.

    Entry k is the survival of the subset without ids[k]; the whole table
    costs O(len(ids)) pairwise combinations instead of O(len(ids)^2).
    """
    n = len(ids)
    if n == 1:
        return [1.0]
    pre: list[tuple[BPA | None, float]] = [(vacuous(corpus.frame), 1.0)]
    for eid in ids[:-1]:
        pre.append(_fold_step(pre[-1], corpus[eid]))
    suf: list[tuple[BPA | None, float]] = [(vacuous(corpus.frame), 1.0)]
    for eid in reversed(ids[1:]):
        suf.append(_fold_step(suf[-1], corpus[eid]))
    suf.reverse()
    out = []
    for k in range(n):
        left, sl = pre[k]
        right, sr = suf[k]
        if left is None or right is None:
            out.append(0.0)
        else:
            out.append(sl * sr * (1.0 - conflict_between(left, right)))
    return out


class Partition:
    """Disjoint nonempty subsets of a corpus with cached per-subset conflicts.

    Subsets are canonicalized: members in corpus order, subsets ordered by
    their first member's corpus position.
    """

    def __init__(self, corpus: Corpus, subsets: Sequence[Sequence[str]],
                 conflicts: Sequence[float] | None = None):
        assigned: set[str] = set()
        for ids in subsets:
            if not ids:
                raise ValueError("subsets must be nonempty")
            for eid in ids:
                if eid not in corpus:
                    raise ValueError(f"unknown evidence id {eid!r}")
                if eid in assigned:
                    raise ValueError(f"evidence id {eid!r} in two subsets")
                assigned.add(eid)
        if assigned != set(corpus.ids):
            missing = sorted(set(corpus.ids) - assigned)
            raise ValueError(f"unassigned evidence ids: {missing}")
        canon = [tuple(sorted(ids, key=corpus.position)) for ids in subsets]
        order = sorted(range(len(canon)), key=lambda i: corpus.position(canon[i][0]))
        self.corpus = corpus
        self.subsets: tuple[tuple[str, ...], ...] = tuple(canon[i] for i in order)
        if conflicts is None:
            self.conflicts = tuple(
                1.0 - subset_survival(corpus, ids)[1] for ids in self.subsets
            )
        else:
            if len(conflicts) != len(subsets):
                raise ValueError("one cached conflict per subset required")
            self.conflicts = tuple(float(conflicts[i]) for i in order)

    @property
    def r(self) -> int:
        return len(self.subsets)

    def subset_combined(self, i: int) -> tuple[BPA | None, float]:
        """Cached (combined BPA, survival) for subset i; None means the
        subset is fully self-contradictory."""
        cache = getattr(self, "_combined_cache", None)
        if cache is None:
            cache = {}
            self._combined_cache = cache
        if i not in cache:
            cache[i] = subset_survival(self.corpus, self.subsets[i])
        return cache[i]

    def subset_of(self, eid: str) -> int:
        for i, ids in enumerate(self.subsets):
            if eid in ids:
                return i
        raise ValueError(f"evidence id {eid!r} not in partition")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Partition)
            and self.subsets == other.subsets
            and self.corpus is other.corpus
        )


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 8
    seed: int = 0
    max_subsets: int | None = None
    init: str = "random"

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.init not in ("random", "singleton-greedy"):
            raise ValueError(f"unknown init strategy {self.init!r}")


def metaconflict(prior: DomainPrior, partition: Partition) -> float:
    """Mcf = 1 - (1 - c0) * prod over subsets of (1 - ci)."""
    prod = 1.0 - domain_conflict(prior, partition.r)
    for c in partition.conflicts:
        prod *= 1.0 - c
    return 1.0 - prod


@dataclass(frozen=True)
class MoveEval:
    delta: float
    new_source_conflict: float | None  # None when the source subset empties
    new_target_conflict: float
    new_r: int


def evaluate_move(prior: DomainPrior, partition: Partition, evidence_id: str,
                  target: int) -> MoveEval:
    """Metaconflict change if evidence_id moved to subset `target` (or
    NEW_SUBSET for a fresh one), without mutating the partition."""
    src = partition.subset_of(evidence_id)
    if target == src:
        raise ValueError("target equals the current subset")
    if target != NEW_SUBSET and not 0 <= target < partition.r:
        raise ValueError(f"target index {target} out of range")
    corpus = partition.corpus
    remaining = [eid for eid in partition.subsets[src] if eid != evidence_id]
    _, surv_src = subset_survival(corpus, remaining)
    if target == NEW_SUBSET:
        tgt_ids = [evidence_id]
    else:
        tgt_ids = list(partition.subsets[target]) + [evidence_id]
    _, surv_tgt = subset_survival(corpus, tgt_ids)

    new_r = partition.r
    if not remaining:
        new_r -= 1
    if target == NEW_SUBSET:
        new_r += 1

    prod = 1.0 - domain_conflict(prior, new_r)
    for i, c in enumerate(partition.conflicts):
        if i == src:
            prod *= surv_src if remaining else 1.0
        elif i == target:
            prod *= surv_tgt
        else:
            prod *= 1.0 - c
    if target == NEW_SUBSET:
        prod *= surv_tgt
    new_mcf = 1.0 - prod
    return MoveEval(
        delta=new_mcf - metaconflict(prior, partition),
        new_source_conflict=(1.0 - surv_src) if remaining else None,
        new_target_conflict=1.0 - surv_tgt,
        new_r=new_r,
    )


class _SubsetState:
    """Members plus leave-one-out survivals, rebuilt whenever members change."""

    __slots__ = ("members", "combined", "survival", "loo")

    def __init__(self, corpus: Corpus, members: list[int]):
        ids = [corpus.ids[i] for i in members]
        self.members = members  # corpus positions, ascending
        self.combined, self.survival = subset_survival(corpus, ids)
        self.loo = leave_one_out_survivals(corpus, ids)


def _fold_step(acc: tuple[BPA | None, float], m: BPA) -> tuple[BPA | None, float]:
    combined, surv = acc
    if combined is None or surv == 0.0:
        return None, 0.0
    try:
        step = conjunctive_combine(combined, m)
    except TotalConflictError:
        return None, 0.0
    return step.combined, surv * (1.0 - step.conflict)


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


class _SearchState:
    def __init__(self, corpus: Corpus, prior: DomainPrior, max_subsets: int,
                 assignment: list[int]):
        self.corpus = corpus
        self.prior = prior
        self.max_subsets = max_subsets
        groups: dict[int, list[int]] = {}
        for pos, g in enumerate(assignment):
            groups.setdefault(g, []).append(pos)
        ordered = sorted(groups.values(), key=lambda ms: ms[0])
        self.subsets = [_SubsetState(corpus, ms) for ms in ordered]

    @property
    def r(self) -> int:
        return len(self.subsets)

    def objective(self) -> float:
        # log(1 - Mcf); maximize.  Log domain keeps strict comparisons
        # meaningful when survivals underflow the 1 - c representation.
        total = _log(1.0 - domain_conflict(self.prior, self.r))
        for st in self.subsets:
            total += _log(st.survival)
        return total

    def best_move(self) -> tuple[float, int, int] | None:
        """Best (objective, evidence position, target) over all single moves;
        targets use subset indices, NEW_SUBSET for a fresh subset."""
        base_logs = [_log(st.survival) for st in self.subsets]
        log_c0 = {}

        def log_c0_at(r: int) -> float:
            if r not in log_c0:
                log_c0[r] = _log(1.0 - domain_conflict(self.prior, r))
            return log_c0[r]

        total = sum(base_logs)
        best: tuple[float, int, int] | None = None
        current = self.objective()
        where: dict[int, tuple[int, int]] = {}
        for si, st in enumerate(self.subsets):
            for k, pos in enumerate(st.members):
                where[pos] = (si, k)
        # evidence in corpus order, then target index, fresh subset last:
        # ties on the objective keep the first candidate found
        for pos in sorted(where):
            si, k = where[pos]
            st = self.subsets[si]
            ev = self.corpus[self.corpus.ids[pos]]
            lone = len(st.members) == 1
            rest = total - base_logs[si] + _log(st.loo[k])
            r_after_out = self.r - 1 if lone else self.r
            for ti, tgt in enumerate(self.subsets):
                if ti == si:
                    continue
                if tgt.combined is None:
                    continue  # target already dead; move cannot help
                kappa = conflict_between(tgt.combined, ev)
                obj = (
                    rest
                    - base_logs[ti]
                    + _log(tgt.survival * (1.0 - kappa))
                    + log_c0_at(r_after_out)
                )
                if obj > current + _IMPROVE_EPS and (best is None or obj > best[0]):
                    best = (obj, pos, ti)
            if not lone and self.r < self.max_subsets:
                obj = rest + log_c0_at(self.r + 1)
                if obj > current + _IMPROVE_EPS and (best is None or obj > best[0]):
                    best = (obj, pos, NEW_SUBSET)
        return best

    def apply(self, pos: int, target: int) -> None:
        si = next(
            i for i, st in enumerate(self.subsets) if pos in st.members
        )
        src_members = [p for p in self.subsets[si].members if p != pos]
        if target == NEW_SUBSET:
            new_members = [pos]
        else:
            new_members = sorted(self.subsets[target].members + [pos])
            self.subsets[target] = _SubsetState(self.corpus, new_members)
        if src_members:
            self.subsets[si] = _SubsetState(self.corpus, src_members)
        else:
            del self.subsets[si]
        if target == NEW_SUBSET:
            self.subsets.append(_SubsetState(self.corpus, new_members))
        self.subsets.sort(key=lambda st: st.members[0])

    def to_partition(self) -> Partition:
        subsets = [
            [self.corpus.ids[p] for p in st.members] for st in self.subsets
        ]
        conflicts = [1.0 - st.survival for st in self.subsets]
        return Partition(self.corpus, subsets, conflicts)


def _initial_assignment(rng: np.random.Generator, n: int, prior: DomainPrior,
                        max_subsets: int, init: str) -> list[int]:
    if init == "singleton-greedy":
        # capped at max_subsets: starting above the prior's range would strand
        # the strict descent on the c0 = 1 plateau
        return [i % max_subsets for i in range(n)]
    feasible = [r for r in prior.support() if 1 <= r <= min(n, max_subsets)]
    if feasible:
        r = int(rng.choice(feasible))
    else:
        r = min(n, max_subsets)
    return [int(g) for g in rng.integers(0, r, size=n)]


def minimize_metaconflict(
    corpus: Corpus, prior: DomainPrior, config: SearchConfig = SearchConfig()
) -> tuple[Partition, float]:
    """Steepest-descent metaconflict minimization with seeded random restarts.

    Returns the best local minimum of the single-move neighborhood over all
    restarts, deterministic for a fixed seed.
    """
    max_subsets = config.max_subsets or prior.max_subsets
    if max_subsets > prior.max_subsets:
        raise ValueError("max_subsets exceeds the prior's range")
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    best_state: _SearchState | None = None
    best_obj = -math.inf
    for seq in seeds:
        rng = np.random.default_rng(seq)
        assignment = _initial_assignment(
            rng, len(corpus), prior, max_subsets, config.init
        )
        state = _SearchState(corpus, prior, max_subsets, assignment)
        while True:
            move = state.best_move()
            if move is None:
                break
            state.apply(move[1], move[2])
        obj = state.objective()
        if best_state is None or obj > best_obj:
            best_state, best_obj = state, obj
    partition = best_state.to_partition()
    return partition, metaconflict(prior, partition)

import math

import pytest

from dsproto import (
    Corpus,
    DomainPrior,
    FitsNowhereError,
    Partition,
    combine_all,
    credibility,
    domain_delta,
    in_delta,
    make_bpa,
    out_delta,
    specify,
    specify_all,
    vacuous,
)
from dsproto.metalevel import (
    CASE_AGAINST_OWN,
    CASE_FOR_OWN,
    CASE_FRESH,
    MetaEvidence,
    closed_form_pls,
    combine_meta,
)
from conftest import random_bpa
from oracles import brute_conflict, meta_brute


def make_partition(corpus, blocks):
    return Partition(corpus, blocks)


@pytest.fixture
def clustered(abc, rng):
    corpus = Corpus([random_bpa(rng, abc, id=f"e{i}") for i in range(6)])
    return corpus, make_partition(corpus, [["e0", "e1", "e2"], ["e3", "e4"], ["e5"]])


class TestOutDelta:
    def test_formula_against_oracle(self, clustered):
        corpus, part = clustered
        for eid in ("e0", "e1", "e2"):
            members = [corpus[x].as_dict() for x in ("e0", "e1", "e2")]
            rest = [corpus[x].as_dict() for x in ("e0", "e1", "e2") if x != eid]
            c_i = brute_conflict(members)
            c_star = brute_conflict(rest)
            expected = (c_i - c_star) / (1.0 - c_star)
            assert out_delta(part, eid) == pytest.approx(expected, abs=1e-9)

    def test_singleton_is_zero(self, clustered):
        _, part = clustered
        assert out_delta(part, "e5") == 0.0

    def test_removal_changes_nothing(self, abc):
        m = make_bpa(abc, [(["A"], 0.7), (abc.labels, 0.3)], id="m")
        corpus = Corpus([m, vacuous(abc, "v")])
        part = make_partition(corpus, [["m", "v"]])
        assert out_delta(part, "v") == 0.0

    def test_in_unit_interval(self, clustered):
        corpus, part = clustered
        for eid in corpus.ids:
            assert 0.0 <= out_delta(part, eid) <= 1.0


class TestInDelta:
    def test_vacuous_evidence(self, abc, rng):
        corpus = Corpus([random_bpa(rng, abc, id="e0"), vacuous(abc, "e1")])
        part = make_partition(corpus, [["e0"], ["e1"]])
        assert in_delta(part, "e1", 0) == 0.0

    def test_total_clash(self, ab):
        corpus = Corpus([make_bpa(ab, [(["B"], 1.0)], id="b"),
                         make_bpa(ab, [(["A"], 1.0)], id="a")])
        part = make_partition(corpus, [["b"], ["a"]])
        assert in_delta(part, "a", 0) == 1.0

    def test_formula_against_oracle(self, clustered):
        corpus, part = clustered
        for eid in ("e5", "e3"):
            src = part.subset_of(eid)
            for k in range(part.r):
                if k == src:
                    continue
                members = [corpus[x].as_dict() for x in part.subsets[k]]
                c_k = brute_conflict(members)
                c_star = brute_conflict(members + [corpus[eid].as_dict()])
                expected = (c_star - c_k) / (1.0 - c_k)
                assert in_delta(part, eid, k) == pytest.approx(expected, abs=1e-9)
                assert 0.0 <= in_delta(part, eid, k) <= 1.0

    def test_rejects_own_subset(self, clustered):
        _, part = clustered
        with pytest.raises(ValueError):
            in_delta(part, "e5", 2)


class TestDomainDelta:
    def test_fresh_subset_case(self, abc, rng):
        corpus = Corpus([random_bpa(rng, abc, id=f"e{i}") for i in range(4)])
        part = make_partition(corpus, [["e0", "e1"], ["e2", "e3"]])
        prior = DomainPrior((0.0, 0.0, 0.8, 0.2))
        case, mass = domain_delta(part, prior, "e0")
        assert case == CASE_FRESH
        assert mass == pytest.approx((0.8 - 0.2) / (1.0 - 0.2))  # 0.75

    def test_flat_prior_gives_zero(self, abc, rng):
        corpus = Corpus([random_bpa(rng, abc, id=f"e{i}") for i in range(4)])
        part = make_partition(corpus, [["e0", "e1"], ["e2", "e3"]])
        prior = DomainPrior((0.0, 0.0, 0.5, 0.5))
        assert domain_delta(part, prior, "e0") == (CASE_FRESH, 0.0)

    def test_singleton_shrink_preferred(self, abc, rng):
        corpus = Corpus([random_bpa(rng, abc, id=f"e{i}") for i in range(3)])
        part = make_partition(corpus, [["e0", "e1"], ["e2"]])
        prior = DomainPrior((0.0, 0.8, 0.1, 0.1))
        case, mass = domain_delta(part, prior, "e2")
        assert case == CASE_AGAINST_OWN
        # c0 = 0.9, c0* = 0.2
        assert mass == pytest.approx((0.9 - 0.2) / (1.0 - 0.2))

    def test_singleton_keep_preferred(self, abc, rng):
        corpus = Corpus([random_bpa(rng, abc, id=f"e{i}") for i in range(2)])
        part = make_partition(corpus, [["e0"], ["e1"]])
        prior = DomainPrior((0.0, 0.2, 0.8))
        case, mass = domain_delta(part, prior, "e1")
        assert case == CASE_FOR_OWN
        assert mass == pytest.approx(0.2 / 0.8)

    def test_guard_unsupported_count(self, abc, rng):
        corpus = Corpus([random_bpa(rng, abc, id=f"e{i}") for i in range(4)])
        part = make_partition(corpus, [["e0", "e1"], ["e2", "e3"]])
        prior = DomainPrior((0.0, 1.0, 0.0))  # no support for r = 2
        with pytest.raises(ValueError):
            domain_delta(part, prior, "e0")


class TestCombineMeta:
    def test_fixture_vector(self):
        # a = (0.2, 0.5, 0.9): Pls by closed form, Bel by the brute-force
        # lattice oracle (which yields nonzero Bel for this instance)
        meta = MetaEvidence("x", 0, (0.2, 0.5, 0.9))
        bel, pls = combine_meta(meta)
        oracle_bel, oracle_pls = meta_brute((0.2, 0.5, 0.9))
        assert pls == pytest.approx(
            (0.8 / 0.91, 0.5 / 0.91, 0.1 / 0.91), abs=1e-9
        )
        assert pls == pytest.approx(oracle_pls, abs=1e-9)
        assert bel == pytest.approx(oracle_bel, abs=1e-9)

    def test_all_zero_masses(self):
        bel, pls = combine_meta(MetaEvidence("x", 0, (0.0, 0.0, 0.0)))
        assert bel == (0.0, 0.0, 0.0)
        assert pls == (1.0, 1.0, 1.0)

    def test_certain_positive(self):
        bel, pls = combine_meta(MetaEvidence("x", 1, (0.3, 0.0, 0.4), positive=1.0))
        assert bel[1] == pytest.approx(1.0)
        assert pls[1] == pytest.approx(1.0)
        assert pls[0] == pytest.approx(0.0)
        assert pls[2] == pytest.approx(0.0)

    def test_closed_form_matches_brute_force(self, rng):
        for _ in range(100):
            k = int(rng.integers(2, 7))
            a = tuple(float(x) for x in rng.random(k) * 0.98)
            bel, pls = combine_meta(MetaEvidence("x", 0, a))
            assert pls == pytest.approx(closed_form_pls(a), abs=1e-9)
            oracle_bel, oracle_pls = meta_brute(a)
            assert bel == pytest.approx(oracle_bel, abs=1e-9)
            assert pls == pytest.approx(oracle_pls, abs=1e-9)

    def test_fits_nowhere(self):
        with pytest.raises(FitsNowhereError):
            combine_meta(MetaEvidence("x", 0, (1.0, 1.0, 1.0)))

    def test_bel_never_exceeds_pls(self, rng):
        for _ in range(50):
            k = int(rng.integers(2, 6))
            a = tuple(float(x) for x in rng.random(k))
            if math.prod(a) >= 1.0:
                continue
            bel, pls = combine_meta(MetaEvidence("x", 0, a))
            for b, p in zip(bel, pls):
                assert 0.0 <= b <= p <= 1.0 + 1e-12


class TestCredibility:
    def test_fixture(self):
        pls = (0.8 / 0.91, 0.5 / 0.91, 0.1 / 0.91)
        alpha = credibility((0.0, 0.0, 0.0), pls, own=0)
        k_q = sum(pls)
        assert k_q == pytest.approx(1.4 / 0.91)
        assert alpha[0] == pytest.approx(pls[0] ** 2 / k_q)
        assert alpha[0] == pytest.approx(0.502355, abs=1e-6)

    def test_certain_membership(self):
        bel, pls = combine_meta(MetaEvidence("x", 0, (0.0, 0.5, 0.7), positive=1.0))
        alpha = credibility(bel, pls, own=0)
        assert alpha[0] == pytest.approx(1.0, abs=1e-12)

    def test_impossible_membership(self):
        alpha = credibility((0.0, 0.0), (0.7, 0.0), own=0)
        assert alpha[1] == 0.0

    def test_all_impossible_raises(self):
        with pytest.raises(ValueError):
            credibility((0.0, 0.0), (0.0, 0.0), own=0)

    def test_argmax_alpha_is_argmin_negative_when_bel_zero(self, rng):
        for _ in range(100):
            k = int(rng.integers(2, 7))
            a = list(rng.random(k) * 0.9 + 0.05)
            own = int(rng.integers(k))
            # a zero entry away from `own` forces Bel(own) to 0
            z = int((own + 1 + rng.integers(k - 1)) % k)
            a[z] = 0.0
            bel, pls = combine_meta(MetaEvidence("x", own, tuple(a)))
            assert bel[own] == pytest.approx(0.0, abs=1e-12)
            alpha = credibility(bel, pls, own)
            best = max(range(k), key=lambda j: (alpha[j], -j))
            assert best == min(range(k), key=lambda j: (a[j], j))


class TestSpecify:
    def test_row_against_manual_assembly(self, clustered):
        corpus, part = clustered
        prior = DomainPrior((0.0, 0.2, 0.5, 0.3))
        row = specify(part, prior, "e1")
        negatives = [
            out_delta(part, "e1"),
            in_delta(part, "e1", 1),
            in_delta(part, "e1", 2),
            domain_delta(part, prior, "e1")[1],
        ]
        oracle_bel, oracle_pls = meta_brute(tuple(negatives))
        assert row.pls == pytest.approx(oracle_pls, abs=1e-9)
        assert row.bel == pytest.approx(oracle_bel, abs=1e-9)
        assert row.k_q == pytest.approx(sum(oracle_pls), abs=1e-9)

    def test_batch_matches_single(self, clustered):
        corpus, part = clustered
        prior = DomainPrior((0.0, 0.2, 0.5, 0.3))
        report = specify_all(part, prior)
        assert report.n == 3
        assert len(report.rows) == len(corpus)
        for row in report.rows:
            single = specify(part, prior, row.evidence_id)
            assert row.bel == pytest.approx(single.bel, abs=1e-12)
            assert row.pls == pytest.approx(single.pls, abs=1e-12)
            assert row.alpha == pytest.approx(single.alpha, abs=1e-12)

    def test_cells_well_formed(self, clustered):
        corpus, part = clustered
        prior = DomainPrior((0.0, 0.2, 0.5, 0.3))
        for row in specify_all(part, prior).rows:
            assert len(row.bel) == len(row.pls) == len(row.alpha) == part.r + 1
            for b, p, a in zip(row.bel, row.pls, row.alpha):
                assert 0.0 <= b <= p <= 1.0 + 1e-12
                assert 0.0 <= a <= 1.0

    def test_case_c_pipeline_properties(self, abc, rng):
        # singleton subsets under a keep-preferring prior: positive metalevel
        # mass, Pls(own) = 1, and the Bel expansion identity
        prior = DomainPrior((0.0, 0.1, 0.9))
        for _ in range(20):
            corpus = Corpus([random_bpa(rng, abc, id=f"e{i}") for i in range(2)])
            part = make_partition(corpus, [["e0"], ["e1"]])
            report = specify_all(part, prior)
            for row in report.rows:
                meta = row.meta
                assert meta.positive == pytest.approx(0.1 / 0.9)
                assert row.pls[row.own] == pytest.approx(1.0, abs=1e-12)
                if row.bel[row.own] > 0:
                    others = [
                        meta.negatives[j]
                        for j in range(len(meta.negatives))
                        if j != row.own
                    ]
                    expected = meta.positive + (1.0 - meta.positive) * math.prod(others)
                    assert row.bel[row.own] == pytest.approx(expected, abs=1e-9)

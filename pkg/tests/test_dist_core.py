import math
from fractions import Fraction

import numpy as np
import pytest

from cbnvalidity import (
    AffineMap,
    Cbn,
    Dag,
    FamilyMismatchError,
    FiniteDist,
    FiniteKernel,
    GaussianDist,
    IdentityMap,
    LinearGaussianKernel,
    TableMap,
    Tolerances,
    VariableMismatchError,
    ci_test,
    compose,
    conditional,
    conditional_cross_covariance,
    entropy,
    equal,
    expectation,
    is_markov,
    kernel_compatible,
    marginal,
    observational_dist,
    pushforward,
)
from oracles import linear_sem_moments, schur_cross_covariance

F = Fraction


def _cholesterol_action_law():
    # LDL ~ N(1,1), HDL ~ N(0,1), HD = 2 LDL - HDL + N(0,1)
    mean, cov = linear_sem_moments(
        ["LDL", "HDL", "HD"], {"LDL": 1}, {"HD": {"LDL": 2, "HDL": -1}}, {"LDL": 1, "HDL": 1, "HD": 1}
    )
    names = ["LDL", "HDL", "HD"]
    return GaussianDist(names, [float(mean[v]) for v in names],
                        [[float(cov[a, b]) for b in names] for a in names])


def _bernoulli_forward():
    z1 = FiniteKernel.constant([0, 1], [F(1, 2), F(1, 2)])
    z2 = FiniteKernel([0, 1], [[0, 1]], {(0,): [F(3, 5), F(2, 5)], (1,): [F(2, 5), F(3, 5)]})
    return Cbn.from_edges(["Z1", "Z2"], [("Z1", "Z2")], [z1, z2])


DIALOGUE = GaussianDist(["A", "B"], [0, 0], [[1, 1], [1, 2]])
PRODUCT = GaussianDist(["A", "B"], [0, 5], [[1, 0], [0, 0]])


class TestTolerances:
    def test_defaults(self):
        t = Tolerances()
        assert (t.eq_tol, t.rank_tol, t.ci_tol) == (1e-9, 1e-12, 1e-9)

    @pytest.mark.parametrize("field", ["eq_tol", "rank_tol", "ci_tol"])
    def test_nonpositive_rejected(self, field):
        with pytest.raises(ValueError):
            Tolerances(**{field: 0.0})


class TestFiniteDist:
    def test_rejects_bad_total(self):
        with pytest.raises(ValueError):
            FiniteDist(["Z"], [[0, 1]], {(0,): F(1, 3), (1,): F(1, 3)})

    def test_rejects_float_probabilities(self):
        with pytest.raises((TypeError, ValueError)):
            FiniteDist(["Z"], [[0, 1]], {(0,): 0.5, (1,): 0.5})

    def test_rational_strings(self):
        d = FiniteDist(["Z"], [[0, 1]], {(0,): "3/10", (1,): "7/10"})
        assert d.prob({"Z": 1}) == F(7, 10)

    def test_value_outside_domain(self):
        with pytest.raises(Exception):
            FiniteDist(["Z"], [[0, 1]], {(2,): 1})


class TestMarginal:
    def test_all_vars_is_identity_finite(self):
        d = observational_dist(_bernoulli_forward())
        assert marginal(d, d.vars) == d or equal(marginal(d, d.vars), d)

    def test_all_vars_is_identity_gaussian(self):
        assert equal(marginal(DIALOGUE, ["A", "B"]), DIALOGUE)

    def test_cholesterol_action_hd(self):
        hd = marginal(_cholesterol_action_law(), ["HD"])
        assert hd.mean[0] == pytest.approx(2.0, abs=1e-12)
        assert hd.cov[0, 0] == pytest.approx(6.0, abs=1e-12)

    def test_bernoulli_z2_is_fair(self):
        z2 = marginal(observational_dist(_bernoulli_forward()), ["Z2"])
        # oracle: 1/2 * 3/5 + 1/2 * 2/5 for Z2 = 0
        assert z2.prob({"Z2": 0}) == F(1, 2) * F(3, 5) + F(1, 2) * F(2, 5)
        assert isinstance(z2.prob({"Z2": 1}), Fraction)

    def test_unknown_variable(self):
        with pytest.raises(VariableMismatchError):
            marginal(DIALOGUE, ["C"])


class TestPushforward:
    def test_total_cholesterol(self):
        d = GaussianDist(["LDL", "HDL"], [0, 0], np.eye(2))
        tc = pushforward(d, AffineMap(("LDL", "HDL"), ("TC",), ((1, 1),), (0,)))
        assert equal(tc, GaussianDist(["TC"], [0], [[2]]))

    def test_identity(self):
        assert equal(pushforward(DIALOGUE, IdentityMap(("A", "B"))), DIALOGUE)

    def test_dice_indicator(self):
        die = FiniteDist.uniform(["P"], [range(1, 7)])
        h = TableMap.from_function(["P"], [range(1, 7)], ["S"], lambda p: (int(p >= 4),))
        s = pushforward(die, h)
        assert s.prob({"S": 1}) == F(1, 2)

    def test_non_affine_on_gaussian_rejected(self):
        h = TableMap.from_function(["A"], [[0, 1]], ["S"], lambda a: (a,))
        with pytest.raises(Exception):
            pushforward(GaussianDist(["A"], [0], [[1]]), h)

    def test_composition(self):
        d = GaussianDist(["X", "Y", "Z"], [1, 2, 3], [[2, 1, 0], [1, 2, 1], [0, 1, 2]])
        h1 = AffineMap(("X", "Y", "Z"), ("U", "V"), ((1, 1, 0), (0, 2, -1)), (1, 0))
        h2 = AffineMap(("U", "V"), ("W",), ((3, -1),), (2,))
        assert equal(pushforward(pushforward(d, h1), h2), pushforward(d, compose(h2, h1)))

    def test_composition_finite(self):
        d = observational_dist(_bernoulli_forward())
        h1 = TableMap.from_function(["Z1", "Z2"], [[0, 1], [0, 1]], ["S"], lambda a, b: (a + b,))
        h2 = TableMap.from_function(["S"], [[0, 1, 2]], ["T"], lambda s: (int(s > 0),))
        assert pushforward(pushforward(d, h1), h2) == pushforward(d, compose(h2, h1))


class TestEqual:
    def test_same_product(self):
        assert equal(PRODUCT, GaussianDist(["A", "B"], [0, 5], [[1, 0], [0, 0]]))

    def test_point_masses_differ_from_product(self):
        assert not equal(GaussianDist(["A", "B"], [1, 5], np.zeros((2, 2))), PRODUCT)

    def test_round_trip_through_kernels(self):
        # oracle: rebuild the joint from its own factorization A ~ N(0,1), B | A ~ N(A, 1)
        mean, cov = linear_sem_moments(["A", "B"], {}, {"B": {"A": 1}}, {"A": 1, "B": 1})
        rebuilt = GaussianDist(["A", "B"], [float(mean["A"]), float(mean["B"])],
                               [[float(cov[a, b]) for b in "AB"] for a in "AB"])
        assert equal(DIALOGUE, rebuilt)

    def test_family_mismatch(self):
        with pytest.raises(FamilyMismatchError):
            equal(DIALOGUE, observational_dist(_bernoulli_forward()))


class TestCiTest:
    def test_product_independent(self):
        assert ci_test(PRODUCT, ["A"], ["B"])

    def test_dialogue_dependent(self):
        assert not ci_test(DIALOGUE, ["A"], ["B"])

    def test_overlap_rejected(self):
        with pytest.raises(Exception):
            ci_test(DIALOGUE, ["A"], ["A"])

    def test_finite_chain_given_middle(self):
        chain = Cbn.from_edges(
            ["X", "Y", "Z"],
            [("X", "Y"), ("Y", "Z")],
            [
                FiniteKernel.constant([0, 1], [F(1, 3), F(2, 3)]),
                FiniteKernel([0, 1], [[0, 1]], {(0,): [F(1, 4), F(3, 4)], (1,): [F(2, 3), F(1, 3)]}),
                FiniteKernel([0, 1], [[0, 1]], {(0,): [F(1, 5), F(4, 5)], (1,): [F(1, 2), F(1, 2)]}),
            ],
        )
        d = observational_dist(chain)
        assert ci_test(d, ["X"], ["Z"], ["Y"])
        assert not ci_test(d, ["X"], ["Z"])

    @pytest.mark.parametrize(
        "cov,x,y,z",
        [
            ([[2, 1, 1], [1, 2, 1], [1, 1, 2]], [0], [1], [2]),
            ([[4, 2, 2], [2, 2, 1], [2, 1, 1]], [0], [1], [2]),
            ([[1, 1, 0], [1, 2, 1], [0, 1, 2]], [0], [2], [1]),
            ([[1, 0, 1, 1], [0, 1, 1, 1], [1, 1, 2, 2], [1, 1, 2, 2]], [0], [1], [2, 3]),
            ([[2, 1, 0], [1, 1, 0], [0, 0, 0]], [0], [1], [2]),
        ],
    )
    def test_gaussian_matches_rational_schur(self, cov, x, y, z):
        names = ["V0", "V1", "V2", "V3"][: len(cov)]
        d = GaussianDist(names, [0] * len(cov), cov)
        exact = schur_cross_covariance(cov, x, y, z)
        got = conditional_cross_covariance(d, [names[i] for i in x], [names[i] for i in y], [names[i] for i in z])
        assert np.allclose(np.asarray(got, dtype=float), np.array(exact, dtype=float), atol=1e-12)
        expect_indep = all(v == 0 for row in exact for v in row)
        assert ci_test(d, [names[i] for i in x], [names[i] for i in y], [names[i] for i in z]) == expect_indep

    def test_symmetric(self):
        d = GaussianDist(["A", "B", "C"], [0, 0, 0], [[2, 1, 1], [1, 2, 1], [1, 1, 2]])
        for z in ([], ["C"]):
            assert ci_test(d, ["A"], ["B"], z) == ci_test(d, ["B"], ["A"], z)


class TestMarkov:
    def test_product_vs_edgeless(self):
        assert is_markov(PRODUCT, Dag.empty(2))

    def test_dependent_vs_edgeless(self):
        assert not is_markov(DIALOGUE, Dag.empty(2))

    def test_complete_dag_any_order(self):
        d = observational_dist(_bernoulli_forward())
        assert is_markov(d, Dag.complete([0, 1]))
        assert is_markov(d, Dag.complete([1, 0]))
        assert is_markov(DIALOGUE, Dag.complete([1, 0]))

    def test_node_mismatch(self):
        with pytest.raises(VariableMismatchError):
            is_markov(DIALOGUE, Dag.empty(3))


class TestKernelCompatible:
    def test_own_kernels(self):
        c = _bernoulli_forward()
        d = observational_dist(c)
        assert kernel_compatible(d, "Z1", (), c.kernel("Z1"))
        assert kernel_compatible(d, "Z2", ("Z1",), c.kernel("Z2"))

    def test_cholesterol_action_not_compatible(self):
        # TC ~ N(1,2), HD = 2 under the action; observational kernel N(t/2, 11/2)
        law = pushforward(_cholesterol_action_law(),
                          AffineMap(("LDL", "HDL", "HD"), ("TC", "HD"), ((1, 1, 0), (0, 0, 1)), (0, 0)))
        assert not kernel_compatible(law, "HD", ("TC",), LinearGaussianKernel(0.0, (0.5,), 5.5))

    def test_null_rows_unconstrained(self):
        # X is always 0: any row at X = 1 is a valid version
        law = FiniteDist(["X", "Y"], [[0, 1], [0, 1]], {(0, 0): F(3, 5), (0, 1): F(2, 5)})
        k1 = FiniteKernel([0, 1], [[0, 1]], {(0,): [F(3, 5), F(2, 5)], (1,): [F(2, 5), F(3, 5)]})
        k2 = FiniteKernel([0, 1], [[0, 1]], {(0,): [F(3, 5), F(2, 5)], (1,): [1, 0]})
        assert kernel_compatible(law, "Y", ("X",), k1)
        assert kernel_compatible(law, "Y", ("X",), k2)

    def test_gaussian_off_support(self):
        # A is the point 1: the weight on A is unidentified
        law = GaussianDist(["A", "B"], [1, 3], [[0, 0], [0, 1]])
        assert kernel_compatible(law, "B", ("A",), LinearGaussianKernel(2.0, (1.0,), 1.0))
        assert kernel_compatible(law, "B", ("A",), LinearGaussianKernel(0.0, (3.0,), 1.0))
        assert not kernel_compatible(law, "B", ("A",), LinearGaussianKernel(0.0, (3.0,), 2.0))

    def test_extracted_conditional_is_compatible(self):
        d = _cholesterol_action_law()
        k = conditional(d, "HD", ["LDL", "HDL"])
        assert kernel_compatible(d, "HD", ["LDL", "HDL"], k)


class TestEntropy:
    def test_point_mass(self):
        assert entropy(FiniteDist.point(["P"], [range(1, 7)], [3]), "P") == 0

    def test_uniform_six(self):
        assert entropy(FiniteDist.uniform(["P"], [range(1, 7)]), "P") == pytest.approx(math.log(6))

    def test_uniform_three(self):
        d = FiniteDist.uniform(["P"], [range(1, 7)], support=[1, 2, 3])
        assert entropy(d, "P") == pytest.approx(math.log(3))

    def test_gaussian_unsupported(self):
        with pytest.raises(Exception):
            entropy(DIALOGUE, "A")


class TestExpectation:
    def test_hd_under_tc_shift(self):
        # TC ~ N(1,2), HD | TC ~ N(TC/2, 11/2)
        mean, cov = linear_sem_moments(["TC", "HD"], {"TC": 1}, {"HD": {"TC": F(1, 2)}},
                                       {"TC": 2, "HD": F(11, 2)})
        d = GaussianDist(["TC", "HD"], [float(mean["TC"]), float(mean["HD"])],
                         [[float(cov[a, b]) for b in ("TC", "HD")] for a in ("TC", "HD")])
        assert expectation(d, {"HD": 1}) == pytest.approx(0.5, abs=1e-12)

    def test_tc_under_hd_shift(self):
        # HD ~ N(1,6), TC | HD ~ N(HD/6, 11/6)
        mean, _ = linear_sem_moments(["HD", "TC"], {"HD": 1}, {"TC": {"HD": F(1, 6)}},
                                     {"HD": 6, "TC": F(11, 6)})
        d = GaussianDist(["HD", "TC"], [1, float(mean["TC"])], [[6, 1], [1, 2]])
        assert mean["TC"] == F(1, 6)
        assert expectation(d, {"TC": 1}) == pytest.approx(1 / 6, abs=1e-12)

    def test_constant_functional(self):
        assert expectation(DIALOGUE, {}, 7) == pytest.approx(7)

    def test_finite_is_exact(self):
        d = observational_dist(_bernoulli_forward())
        assert expectation(d, {"Z1": 1, "Z2": 2}) == F(3, 2)

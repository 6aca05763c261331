from fractions import Fraction

import pytest

from cbnvalidity import (
    FALSIFIED,
    VALID,
    Cbn,
    Dag,
    Dgp,
    FiniteDist,
    FiniteKernel,
    IntC,
    IntM,
    IntP,
    IntS,
    IntSTilde,
    LinearGaussianKernel,
    PreconditionError,
    build_dgp_from_cbn,
    check_pheno_validity,
    check_validity,
    construct_intM_falsifier,
    construct_intP_falsifier,
    construct_intS_falsifier,
    emulate,
    find_falsifier,
    is_markov,
    marginal,
)
from cbnvalidity.scenarios import find_builtin
from randgen import random_cbn, random_interventions, rngs

F = Fraction
G = LinearGaussianKernel


def setup(sid, cbn, iset=None, dgp=None):
    s = find_builtin(sid)
    entry = s.dgp_entry(dgp)
    I = s.intervention_sets[iset] if iset else None
    return s, entry.dgp, entry.representation, s.cbns[cbn], I


class TestCheckValidity:
    def test_cholesterol_int_p(self):
        s, dgp, h, c, I = setup("cholesterol", "high", "I")
        rep = check_validity(dgp, h, c, I, IntP())
        assert rep.verdict == FALSIFIED
        w = next(w for w in rep.witnesses if w.action == "shift-1-0")
        assert w.intervention is s.intervention_sets["I"][0]
        assert w.action_means["HD"] == pytest.approx(2.0, abs=1e-9)
        assert w.model_means["HD"] == pytest.approx(0.5, abs=1e-9)
        assert w.max_mean_gap == pytest.approx(1.5, abs=1e-9)

    def test_cholesterol_int_c(self):
        _, dgp, h, c, I = setup("cholesterol", "high", "I")
        rep = check_validity(dgp, h, c, I, IntC())
        assert rep.verdict == VALID and rep.witnesses == []

    def test_bernoulli_reversed(self):
        _, dgp, h, c, I = setup("bernoulli-reversal", "reversed", "I-reversed")
        assert check_validity(dgp, h, c, I, IntS()).verdict == VALID

    def test_dice_steps(self):
        s, dgp, h, c, I = setup("dice-reward", "high", "I")
        rep = check_validity(dgp, h, c, I, s.interpretations["K-steps"])
        assert rep.verdict == FALSIFIED
        w = rep.witnesses[0]
        assert w.action == "p2"
        assert w.action_law.prob({"R": -1}) == 1
        assert w.model_law.prob({"R": -1}) == F(1, 3)

    def test_incompatible(self):
        _, dgp, h, c, I = setup("bernoulli-reversal", "forward", "I-forward")
        other = Cbn(c.vars, Dag.empty(2), [FiniteKernel.point([0, 1], 0), FiniteKernel.point([0, 1], 0)])
        rep = check_validity(dgp, h, other, [], IntS())
        assert rep.verdict == FALSIFIED and rep.witnesses[0].flag == "incompatible"

    def test_report_schema(self):
        _, dgp, h, c, I = setup("cholesterol", "high", "I")
        d = check_validity(dgp, h, c, I, IntP()).to_dict()
        assert list(d) == ["verdict", "witnesses", "pairs_checked", "scope_note"]
        assert d["pairs_checked"] == len(dgp.actions) * len(I)
        assert "listed actions" in d["scope_note"]

    def test_finite_witness_first_difference(self):
        _, dgp, h, c, I = setup("bernoulli-reversal", "forward", "I-forward")
        w = check_validity(dgp, h, c, I, IntS()).witnesses[0].to_dict()
        assert "first_difference" in w and "max_table_gap" in w


class TestIntPFalsifier:
    def test_cholesterol_via_emulation(self):
        s, dgp, h, _, _ = setup("cholesterol", "high")
        em = emulate(dgp, h, ["TC", "HD"], prune=True)
        d_star = em.link["shift-1-0"]
        I, law = construct_intP_falsifier(em.cbn, d_star)
        (d,) = I
        assert list(d.targets) == ["TC"]
        k = d.targets["TC"]
        assert (k.intercept, k.variance) == pytest.approx((1.0, 2.0), abs=1e-9)
        dgp2, _ = build_dgp_from_cbn(em.cbn, [d_star], ["a*"])
        assert check_validity(dgp2, None, em.cbn, I, IntP()).verdict == FALSIFIED

    def test_all_dependent_rejected(self):
        c = find_builtin("cholesterol").cbns["high"]
        d = c.intervention({"HD": G(1.0, (0.5,), 5.5)})
        with pytest.raises(PreconditionError):
            construct_intP_falsifier(c, d)


class TestIntSFalsifier:
    def test_bernoulli_first_node(self):
        s, dgp, h, c, _ = setup("bernoulli-reversal", "forward")
        (d,) = construct_intS_falsifier(c, s.interventions["two-node"])
        assert list(d.targets) == ["Z1"]
        assert d.targets["Z1"] == FiniteKernel.constant([0, 1], [F(2, 5), F(3, 5)])
        assert check_validity(dgp, h, c, [d], IntS()).verdict == FALSIFIED

    def test_bernoulli_second_node(self):
        s, dgp, h, c, _ = setup("bernoulli-reversal", "forward")
        I = construct_intS_falsifier(c, s.interventions["two-node"], node="Z2")
        rep = check_validity(dgp, h, c, I, IntS())
        w = next(w for w in rep.witnesses if w.action == "a1")
        assert marginal(w.action_law, ["Z1"]).prob({"Z1": 1}) == F(3, 5)
        assert marginal(w.model_law, ["Z1"]).prob({"Z1": 1}) == F(1, 2)

    def test_single_node_rejected(self):
        s, _, _, c, _ = setup("bernoulli-reversal", "forward")
        with pytest.raises(PreconditionError):
            construct_intS_falsifier(c, s.interventions["f-Z2-1"])


class TestIntMFalsifier:
    def test_dependence_action(self):
        s = find_builtin("interpretation-variants")
        entry = s.dgp_entry("dependence")
        c = s.cbns["xyz"]
        law = entry.dgp.law("a")
        I = construct_intM_falsifier(c, law)
        assert check_validity(entry.dgp, entry.representation, c, I, IntM()).verdict == FALSIFIED

    def test_markov_law_rejected(self):
        s, dgp, _, c, _ = setup("bernoulli-reversal", "forward")
        with pytest.raises(PreconditionError):
            construct_intM_falsifier(c, dgp.law("a1"))

    def test_markov_actions_valid(self):
        for rng in rngs(41, 30):
            c = random_cbn(rng, n_min=2)
            acts = random_interventions(c, rng, 3)
            dgp, _ = build_dgp_from_cbn(c, acts, [f"a{i}" for i in range(len(acts))])
            assert all(is_markov(dgp.law(a), c.dag, c.vars) for a in dgp.actions)
            I = random_interventions(c, rng, 3)
            assert check_validity(dgp, None, c, I, IntM()).valid


class TestFindFalsifier:
    def test_perfect_only_under_int_p(self):
        s, dgp, h, c, _ = setup("confounder-triangle", "c")
        perfect = [s.interventions[k] for k in ("do-T-0", "do-T-1", "do-T-coin")]
        dgp2, _ = build_dgp_from_cbn(c, perfect, ["t0", "t1", "coin"])
        res = find_falsifier(dgp2, None, c, IntP())
        assert not res.found
        assert res.message.startswith("no falsifier")

    def test_bernoulli_under_int_s(self):
        _, dgp, h, c, _ = setup("bernoulli-reversal", "forward")
        res = find_falsifier(dgp, h, c, IntS())
        assert res.found and res.report.verdict == FALSIFIED


class TestPheno:
    def test_confounder(self):
        s, dgp, h, c, I = setup("confounder-triangle", "c", "I")
        rep = check_pheno_validity(dgp, h, c.dag, c.vars)
        assert not rep.valid and rep.markov
        assert rep.partition["Y"] == [] and rep.partition["W"] == []
        for spec in s.interpretations.values():
            assert check_validity(dgp, h, c, I, spec).verdict == VALID

    def test_single_node(self):
        obs = FiniteDist.uniform(["Z"], [[0, 1]])
        dgp = Dgp({"O": obs, "a": FiniteDist.point(["Z"], [[0, 1]], [1])})
        assert check_pheno_validity(dgp, None, Dag.empty(1), ["Z"]).valid

    def test_bernoulli_forward(self):
        _, dgp, h, c, _ = setup("bernoulli-reversal", "forward")
        rep = check_pheno_validity(dgp, h, c.dag, c.vars)
        assert not rep.valid and rep.counterexample is not None


class TestDroppedCondition:
    def test_s_tilde_counterexample(self):
        s, dgp, h, c, I = setup("dropped-condition", "c", "I")
        rep = check_validity(dgp, h, c, I, IntSTilde())
        assert rep.verdict == FALSIFIED
        assert check_validity(dgp, h, c, I, IntS()).verdict == VALID

import math

import pytest

from cbnvalidity import (
    Dgp,
    IntC,
    IntK,
    IntM,
    IntP,
    IntS,
    IntSTilde,
    IntTildeIF,
    PreconditionError,
    build_dgp_from_cbn,
    check_desideratum,
    interpret,
    interventional_dist,
)
from cbnvalidity.scenarios import find_builtin
from oracles import joint_table, law_table
from randgen import random_cbn, random_intervention, random_interventions, rngs


def setup(sid, cbn, iset, dgp=None):
    s = find_builtin(sid)
    entry = s.dgp_entry(dgp)
    return s, entry.dgp, entry.representation, s.cbns[cbn], s.intervention_sets[iset]


class TestExamples:
    def test_int_c_dialogue(self):
        s, dgp, h, c, I = setup("dialogue", "a-to-b", "I-ab")
        res = interpret(IntC(), dgp, h, c, I)
        d = s.interventions["do-B-5"]
        assert res.includes("correct", d)
        assert not res.includes("delta-1-5", d)
        assert res.first_failure("delta-1-5", d) == "non-intervened kernel mismatch at A"

    def test_int_p_cholesterol(self):
        s, dgp, h, c, I = setup("cholesterol", "high", "I")
        res = interpret(IntP(), dgp, h, c, I)
        assert res.includes("shift-1-0", s.interventions["do-TC-1"])

    def test_int_s_bernoulli(self):
        s, dgp, h, c, I = setup("bernoulli-reversal", "forward", "I-forward")
        res = interpret(IntS(), dgp, h, c, I)
        assert res.includes("a1", s.interventions["f-Z2-1"])

    def test_int_k_reverse_entropy(self):
        s, dgp, h, c, I = setup("dice-reward", "high", "I")
        res = interpret(s.interpretations["K-entropy"], dgp, h, c, I)
        d = s.interventions["do-S-0"]
        assert [a for a in dgp.actions if res.includes(a, d)] == ["left-uniform"]

    def test_int_k_rows_within_int_s(self):
        s, dgp, h, c, I = setup("dice-reward", "high", "I")
        rs = interpret(IntS(), dgp, h, c, I)
        for name in ("K-entropy", "K-steps"):
            rk = interpret(s.interpretations[name], dgp, h, c, I)
            assert all(rs.includes(a, d) for a, d in rk.pairs())

    def test_tilde_depends_on_set(self):
        s = find_builtin("interpretation-variants")
        entry = s.dgp_entry("reference")
        c = s.cbns["edgeless"]
        spec = s.interpretations["tilde"]
        d = s.interventions["do-Z1-0"]
        small = interpret(spec, entry.dgp, entry.representation, c, s.intervention_sets["I-small"])
        big = interpret(spec, entry.dgp, entry.representation, c, s.intervention_sets["I-big"])
        assert small.includes("a", d)
        assert not big.includes("a", d)

    def test_int_m_includes_imperfect(self):
        s = find_builtin("interpretation-variants")
        entry = s.dgp_entry("dependence")
        res = interpret(IntM(), entry.dgp, entry.representation, s.cbns["xyz"], s.intervention_sets["I-m"])
        assert res.includes("a", s.interventions["do-Y-half"])

    def test_s_tilde_keeps_observational_kernel(self):
        s, dgp, h, c, I = setup("dropped-condition", "c", "I")
        d = s.interventions["d"]
        assert interpret(IntSTilde(), dgp, h, c, I).includes("x-zero", d)
        assert not interpret(IntS(), dgp, h, c, I).includes("x-zero", d)

    def test_trace_covers_all_conditions(self):
        s, dgp, h, c, I = setup("cholesterol", "high", "I")
        res = interpret(IntP(), dgp, h, c, I)
        trace = res.trace("shift-1-0", s.interventions["do-TC-2"])
        assert len(trace) == 4 and not all(t.passed for t in trace)


class TestErrors:
    def test_k_missing_complexity(self):
        s, dgp, h, c, I = setup("confounder-triangle", "c", "I")
        bare = Dgp(dgp.laws, dgp.observational, {"O": 1})
        with pytest.raises(PreconditionError):
            interpret(IntK(), bare, h, c, I)

    def test_tilde_ranks_injective(self):
        s = find_builtin("interpretation-variants")
        with pytest.raises(ValueError):
            IntTildeIF([s.interventions["do-Z1-0"], s.interventions["do-both"]], [1, 1])

    def test_k_all_infinite_warns(self):
        s, dgp, h, c, I = setup("bernoulli-reversal", "forward", "I-forward")
        res = interpret(IntK(lambda law: math.inf), dgp, h, c, I)
        assert res.warnings
        # every Int_S candidate is a minimizer of +inf
        assert list(res.pairs()) == list(interpret(IntS(), dgp, h, c, I).pairs())


class TestDesiderata:
    @pytest.mark.parametrize("which", ["D0", "D1", "D2", "D3", "D4"])
    def test_int_c_holds(self, which):
        s, dgp, h, c, _ = setup("bernoulli-reversal", "forward", "I-forward")
        fam = [s.intervention_sets["I-forward"], s.intervention_sets["I-d2"]]
        assert check_desideratum(which, IntC(), dgp, h, c, fam).holds

    def test_int_s_violates_d2(self):
        s, dgp, h, c, I = setup("bernoulli-reversal", "forward", "I-d2")
        rep = check_desideratum("D2", IntS(), dgp, h, c, [I])
        assert rep.verdict == "VIOLATED" and rep.witness["action"] == "a1"

    def test_tilde_violates_d3(self):
        s = find_builtin("interpretation-variants")
        entry = s.dgp_entry("reference")
        fam = [s.intervention_sets["I-small"], s.intervention_sets["I-big"]]
        rep = check_desideratum("D3", s.interpretations["tilde"], entry.dgp, entry.representation,
                                s.cbns["edgeless"], fam)
        assert rep.verdict == "VIOLATED"

    def test_empty_family(self):
        s, dgp, h, c, I = setup("bernoulli-reversal", "forward", "I-d2")
        with pytest.raises(PreconditionError):
            check_desideratum("D0", IntS(), dgp, h, c, [])


def _random_instance(rng):
    c = random_cbn(rng, n_min=2)
    acts = random_interventions(c, rng, 3)
    dgp, _ = build_dgp_from_cbn(c, acts, [f"a{i}" for i in range(len(acts))])
    I = random_interventions(c, rng, 2) + acts[:2]
    return c, dgp, I


class TestRandomInvariants:
    def test_d0_all_interpretations(self):
        specs = [IntC(), IntP(), IntS(), IntM(), IntK(lambda law: 1)]
        for rng in rngs(31, 25):
            c, dgp, I = _random_instance(rng)
            if not I:
                continue
            tilde = IntTildeIF(I, list(range(len(I))))
            for spec in specs + [tilde]:
                assert check_desideratum("D0", spec, dgp, None, c, [I]).holds

    def test_int_s_monotone_under_restriction(self):
        checked = 0
        for rng in rngs(32, 40):
            c = random_cbn(rng, n_min=2)
            d = random_intervention(c, rng, size=2)
            if d is None:
                continue
            dgp, _ = build_dgp_from_cbn(c, [d], ["a"])
            subs = []
            for v in d.targets:
                sub = d.restrict([v])
                if law_table(interventional_dist(c, sub)) != joint_table(c):
                    subs.append(sub)
            res = interpret(IntS(), dgp, None, c, [d] + subs)
            if res.includes("a", d):
                checked += 1
                assert all(res.includes("a", sub) for sub in subs)
        assert checked > 0

    def test_cor_int_c_circular(self):
        from cbnvalidity import check_validity

        for rng in rngs(33, 30):
            c, dgp, I = _random_instance(rng)
            assert check_validity(dgp, None, c, I, IntC()).valid

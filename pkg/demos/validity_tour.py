"""Walk through interventional validity on the built-in scenarios.

Run with ``python demos/validity_tour.py``.
"""

from cbnvalidity import IntC, IntP, IntS, check_validity, emulate, find_falsifier, interpret
from cbnvalidity.scenarios import find_builtin


def show(title, rep):
    print(f"{title}: {rep.verdict} ({rep.pairs_checked} pairs)")
    for w in rep.witnesses[:1]:
        print(f"  witness: action {w.action} under {w.intervention.name()}")
        if w.action_means is not None:
            print(f"  action means {w.action_means}, model means {w.model_means}")


def main():
    # A trivially satisfied reading: matching laws are all that Int_C asks for.
    s = find_builtin("dialogue")
    e = s.dgp_entry()
    res = interpret(IntC(), e.dgp, e.representation, s.cbns["a-to-b"], s.intervention_sets["I-ab"])
    print("Int_C row for do(B=5):", [a for a in e.dgp.actions if res.includes(a, s.interventions["do-B-5"])])

    # Total cholesterol: the model is compatible, yet the perfect-intervention
    # reading mistakes a shift in LDL for a shift in total cholesterol.
    s = find_builtin("cholesterol")
    e = s.dgp_entry()
    for name, spec in (("Int_C", IntC()), ("Int_P", IntP())):
        show(f"cholesterol under {name}", check_validity(e.dgp, e.representation, s.cbns["high"],
                                                         s.intervention_sets["I"], spec))

    # A falsifier can be constructed when fine-tuned two-node actions exist.
    s = find_builtin("bernoulli-reversal")
    e = s.dgp_entry()
    res = find_falsifier(e.dgp, e.representation, s.cbns["forward"], IntS())
    print("falsifier for Z1->Z2 under Int_S:", res.message)
    show("  with it", res.report)
    show("Z2->Z1 under Int_S", check_validity(e.dgp, e.representation, s.cbns["reversed"],
                                              s.intervention_sets["I-reversed"], IntS()))

    # Every process can be emulated by a CBN on a complete graph.
    s = find_builtin("dialogue")
    em = emulate(s.dgp_entry().dgp, None, ["B", "A"], prune=True)
    print("emulating CBN edges:", em.cbn.edges())
    for a, d in em.link.items():
        print(f"  {a} intervenes on {sorted(d.targets)}")


if __name__ == "__main__":
    main()

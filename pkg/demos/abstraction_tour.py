"""Show how abstraction can both break and restore validity.

Run with ``python demos/abstraction_tour.py``.
"""

from cbnvalidity import IntP, IntS, check_validity, is_tau_abstraction, omega_tau
from cbnvalidity.scenarios import find_builtin


def verdict(s, dgp, cbn, iset, spec):
    e = s.dgp_entry(dgp)
    return check_validity(e.dgp, e.representation, s.cbns[cbn], s.intervention_sets[iset], spec).verdict


def main():
    # Four values abstracted to two binary digits: an exact abstraction,
    # yet the digit model reads do(X1=1) as a single-digit intervention.
    s = find_builtin("abstraction-invalidates")
    low, high, tau = s.scms["MX"], s.scms["MY"], s.tau_maps["tau"]
    res = is_tau_abstraction(low, s.intervention_sets["I-star"], high, tau)
    print("digits form a tau-abstraction:", res.holds)
    print("  do(X1=2) maps to", dict(omega_tau(tau, low, {"X1": 2}, high.endo_domains)))
    print("  low level under Int_S: ", verdict(s, "low", "low", "I-low", IntS()))
    print("  high level under Int_S:", verdict(s, "high", "high", "I-high", IntS()))

    # Summing two causes removes the fine-tuned two-node interventions.
    s = find_builtin("abstraction-validates")
    print("sum abstraction")
    print("  low level under Int_S: ", verdict(s, "full-low", "low", "I-star", IntS()))
    print("  high level under Int_S:", verdict(s, "full-high", "high", "I-high", IntS()))
    print("  high level under Int_P:", verdict(s, "full-high", "high", "I-high", IntP()))

    # A hard low-level intervention that becomes soft after abstraction.
    s = find_builtin("soft-abstraction")
    print("soft abstraction")
    print("  low level under Int_P: ", verdict(s, "low", "low", "I-low", IntP()))
    print("  high level under Int_P:", verdict(s, "high", "high", "I-high", IntP()))


if __name__ == "__main__":
    main()

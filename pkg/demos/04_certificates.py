"""Stability certificates from coefficient tables.

Each regime k contributes one dissipation row: a damping strength a_k
and terms (b, alpha) splitting into instantaneous and delayed parts.
From such a table the package checks global existence, solves for the
best certified decay rate (exponential when the delayed terms carry a
decaying kernel with floor beta, polynomial otherwise), and produces
asymptotic moment and time-average bounds.  All checks run in exact or
near-exact arithmetic and finish instantly.

Run:  python3 demos/04_certificates.py
"""
from hpsfde import (CertificateData, CertificateRow, certify_epsilon_exponential,
                    check_existence, moment_bound, preset_certificate,
                    solve_epsilon_exponential, solve_epsilon_polynomial,
                    time_average_bound)


def show_existence(name, table):
    verdict = check_existence(table)
    print("%s existence: %s" % (name, "HOLDS" if verdict.holds else "FAILS"))
    for line in verdict.detail:
        print("  " + line)


def main():
    exp_c = preset_certificate("exp_stable")
    show_existence("exp_stable", exp_c)

    sol = solve_epsilon_exponential(exp_c)
    print("\nbest exponential rate:")
    for line in sol.detail:
        print("  " + line)

    # candidate rates: anything below the supremum certifies, anything
    # above fails
    for eps in (0.05, 0.139, 0.15):
        v = certify_epsilon_exponential(exp_c, eps)
        print("  candidate eps=%.3f -> %s" % (eps,
                                              "holds" if v.holds else "fails"))

    # the preset tables have a0 = 0, so their asymptotic levels are 0;
    # with a0 > 0 the bounds are the nontrivial constants a0/eps and
    # a0/(time-average denominator)
    forced = CertificateData(
        a0=0.3, rows=(CertificateRow(a=2.0, b_alpha=((0.4, 0.5),)),),
        theta_lower=0.5, t0=1.0, beta=0.5)
    s = solve_epsilon_exponential(forced)
    print("\ntable with a forcing level a0=0.3:")
    print("  best rate %.4f, moment level %.4f, time-average level %.4f"
          % (s.epsilon, moment_bound(forced, s.epsilon),
             time_average_bound(forced, 1)))

    # kernel-free table: the rate is polynomial in time instead
    po_c = preset_certificate("poly_stable")
    sol_po = solve_epsilon_polynomial(po_c)
    print("\npoly_stable polynomial rate:")
    for line in sol_po.detail:
        print("  " + line)

    # a hand-built failing table: delayed feedback overpowers the damping
    bad = CertificateData(
        a0=1.0, rows=(CertificateRow(a=0.5, b_alpha=((1.0, 0.5),)),),
        theta_lower=0.5, t0=1.0, beta=0.4)
    show_existence("\nhand-built table", bad)


if __name__ == "__main__":
    main()

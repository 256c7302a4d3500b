"""Exact simulation of the switching process.

The regime r(t) is a continuous-time Markov chain given by a generator
matrix: off-diagonal entries are jump rates, rows sum to zero.  Sampling
is exact (exponential sojourns + embedded jump chain), so there is no
time-discretization error at all in the switching layer.

Run:  python3 demos/01_regime_paths.py
"""
import numpy as np

from hpsfde import make_generator, sample_regime_path, stationary_distribution


def main():
    g = make_generator([[-1.0, 1.0],
                        [2.0, -2.0]])
    print("generator rows:", g.rates.tolist())
    pi = stationary_distribution(g)
    print("stationary law: (%.4f, %.4f)" % (pi[0], pi[1]))

    # one trajectory, inspected pointwise
    path = sample_regime_path(g, i0=1, t0=0.0, T=20.0, seed=42)
    print("\none path on [0, 20]: %d jumps" % path.n_jumps)
    for t in (0.0, 5.0, 10.0, 15.0, 20.0):
        print("  r(%4.1f) = %d" % (t, path.state_at(t)))

    # occupation fractions converge to the stationary law as T grows
    print("\noccupation of state 1 vs horizon (stationary value %.4f):"
          % pi[0])
    for T in (10.0, 100.0, 1000.0, 10000.0):
        p = sample_regime_path(g, i0=1, t0=0.0, T=T, seed=7)
        occ = p.occupation_fractions(2)
        print("  T=%7g  occ=%.4f  jumps=%d" % (T, occ[0], p.n_jumps))

    # empirical jump counts against the long-run switching rate
    # (rate 1 out of state 1, rate 2 out of state 2)
    expected = 100.0 * (pi[0] * 1.0 + pi[1] * 2.0)
    counts = [sample_regime_path(g, 1, 0.0, 100.0, seed=s).n_jumps
              for s in range(200)]
    print("\nmean jumps over [0, 100]: %.1f (theory %.1f, sd %.1f)"
          % (np.mean(counts), expected, np.std(counts)))


if __name__ == "__main__":
    main()

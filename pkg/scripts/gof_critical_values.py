"""Simulate upper-tail percentage points of W^2 and A^2 for a fitted GPD.

Draws GPD samples, refits shape and scale by maximum likelihood, and
records the statistics of the probability-integral transform. With large
``n`` the quantiles approximate the asymptotic points tabulated in
``svrisk.evt``.

    python3 scripts/gof_critical_values.py --n 1000 --reps 20000
"""
from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy import stats

from svrisk import evt


def _one_xi(args):
    xi, n, reps, seed = args
    rng = np.random.default_rng(seed)
    w2 = np.empty(reps)
    a2 = np.empty(reps)
    for i in range(reps):
        y = stats.genpareto.rvs(xi, scale=1.0, size=n, random_state=rng)
        z = np.concatenate([[-1.0], y])  # one point below u = 0
        m = evt.fit_gpd(z, 0.0)
        w2[i], a2[i] = evt.gof_statistics(evt.gpd_cdf(y, m.xi, m.beta))
    q = 1.0 - np.asarray(evt.GOF_LEVELS)
    return xi, np.quantile(w2, q), np.quantile(a2, q)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--reps", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=2024)
    a = ap.parse_args()
    jobs = [(xi, a.n, a.reps, a.seed + i) for i, xi in enumerate(evt.GOF_XI)]
    with ProcessPoolExecutor() as ex:
        rows = list(ex.map(_one_xi, jobs))
    print("levels", evt.GOF_LEVELS)
    for xi, w, ad in rows:
        j = evt.GOF_XI.index(xi)
        print(f"xi={xi:5.2f} W2 sim " + " ".join(f"{v:.3f}" for v in w)
              + "  table " + " ".join(f"{v:.3f}" for v in evt.GOF_W2[j]))
        print(f"         A2 sim " + " ".join(f"{v:.3f}" for v in ad)
              + "  table " + " ".join(f"{v:.3f}" for v in evt.GOF_A2[j]))


if __name__ == "__main__":
    main()

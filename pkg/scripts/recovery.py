"""Parameter recovery for one AR(1) truth over seeded replicates.

    python scripts/recovery.py --replicates 10 --threads 4
"""

import argparse
import time

import numpy as np

from misreport_bsl.bsl import MCMCSettings
from misreport_bsl.simstudy import StudyConfig, aggregate, report_text, run_study


def recovery_config(replicates=10, n_iter=20000, n_burn=5000, n_sim=100, seed=2024):
    return StudyConfig(
        structures=("AR1",),
        grid={"alpha": (0.5,), "omega": (0.9,), "q": (0.3,)},
        T=1000,
        replicates=replicates,
        n_cells=None,
        phi0=2.0,
        sigma_eps=1.0,
        m=0.2,
        beta=0.4,
        sampler=MCMCSettings(n_iter=n_iter, n_burn=n_burn, n_sim=n_sim),
        seed=seed,
    )


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--n-iter", type=int, default=20000)
    p.add_argument("--n-burn", type=int, default=5000)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=2024)
    a = p.parse_args()
    start = time.perf_counter()
    cfg = recovery_config(a.replicates, a.n_iter, a.n_burn, seed=a.seed)
    results = run_study(cfg, a.threads)
    for r in results:
        line = " ".join(
            f"{n}:{m['bias']:+.3f}{'*' if m['covered'] else ' '}" for n, m in r.metrics.items()
        )
        print(f"rep {r.replicate} {r.runtime:6.1f}s {line} {r.error}")
    print(report_text(aggregate(results)))
    q_bias = [r.metrics["q"]["abs_bias"] for r in results if not r.failed]
    print(f"median |bias| q = {np.median(q_bias):.4f}; total {time.perf_counter() - start:.0f}s")


if __name__ == "__main__":
    main()

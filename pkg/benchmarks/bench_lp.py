"""Benchmark the feasibility-LP kernels: numba against the numpy fallback.

Instances come from the actual pipeline (SINR rows + per-AP power rows at
a bisection midpoint), so tableau shapes and conditioning are the real
workload. Run:  python benchmarks/bench_lp.py
"""

import time

import numpy as np

from cellfree import channel, power_alloc, precoding, simulate
from cellfree.numerics import (LinearFeasibilityProblem, _simplex_numba,
                               _simplex_py, lp_feasible)


def pipeline_instances(m_aps, u_users, count, seed=0):
    sc = simulate.Scenario(m_aps=m_aps, u_users=u_users)
    problems = []
    for trial in range(count):
        rng = np.random.default_rng((seed, trial))
        geom = channel.place_nodes(m_aps, u_users, 1000.0, rng)
        ls = channel.large_scale_fading(geom, 8.0, rng)
        chset = channel.draw_channel_set(ls, 0.9, rng)
        rho_f = simulate.snr_to_rho_f(100.0, chset.g_hat, sc.sigma_w2, u_users)
        params = precoding.PowerParams.for_network(rho_f, m_aps, u_users,
                                                   sc.sigma_w2)
        pipe = power_alloc.run_pipeline("MMSE", chset.g_hat, ls.beta, 0.9,
                                        params, "UPA")
        t_mid = 0.5 * power_alloc.single_user_bounds(pipe.model).min()
        problems.append(power_alloc._feasibility_problem(t_mid, pipe.model))
    return problems


def bench(problems, backend, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for prob in problems:
            lp_feasible(prob, backend=backend)
        best = min(best, (time.perf_counter() - t0) / len(problems))
    return best


def main():
    print(f"{'shape':>14} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for m_aps, u_users in [(32, 4), (96, 8), (128, 16)]:
        problems = pipeline_instances(m_aps, u_users, count=20)
        lp_feasible(problems[0], backend=_simplex_numba)  # warm the jit
        t_py = bench(problems, _simplex_py)
        t_nb = bench(problems, _simplex_numba)
        shape = f"M={m_aps} U={u_users}"
        print(f"{shape:>14} {t_py * 1e3:>9.3f} ms {t_nb * 1e3:>9.3f} ms "
              f"{t_py / t_nb:>8.1f}x")
    # verdict/witness parity across backends on the last instance set
    for prob in problems:
        r_py = lp_feasible(prob, backend=_simplex_py)
        r_nb = lp_feasible(prob, backend=_simplex_numba)
        assert r_py[0] == r_nb[0]
        if r_py[0]:
            assert np.array_equal(r_py[1], r_nb[1])
    print("backend parity: identical verdicts and witnesses")


if __name__ == "__main__":
    main()

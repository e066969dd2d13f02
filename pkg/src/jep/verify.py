"""Self-check battery behind ``jep verify``.

Each check returns ``(ok, detail)``; :func:`run_all` never raises.
"""

from __future__ import annotations

import itertools
import math
import time
from collections.abc import Callable

import numpy as np

from . import exact, gibbs, related
from .distributions import (
    BoundedUniformFamily,
    GeometricStream,
    MemorylessFamily,
    check_aperiodicity,
    check_noncolliding,
    tail_first_moment,
)
from .harness import convergence_profile, empirical_distribution, empirical_tv
from .sets import (
    ParticleConfig,
    avoiding_shift,
    avoiding_shift_literal,
    count_below,
    delete_min,
    noncolliding_union,
    shift_up,
)


def _small_sets(top: int, max_size: int):
    for k in range(max_size + 1):
        for c in itertools.combinations(range(top + 1), k):
            yield ParticleConfig._trusted(c)


def check_shift_lemmas():
    bad = 0
    for A in _small_sets(8, 3):
        for x in range(11):
            y = avoiding_shift(A, x)
            bad += y != avoiding_shift_literal(A, x)
            bad += avoiding_shift(shift_up(A), x + 1) != y + 1
            if A:
                bad += y != (x if x < A[0] else avoiding_shift(A[1:], x + 1))
                u = noncolliding_union(A, [x])
                bad += u[0] != min(A[0], x)
                bad += delete_min(u) != (A if x < A[0] else noncolliding_union(A[1:], [x + 1]))
            if x not in A:
                bad += avoiding_shift(A, count_below(A, x)) != x
    return bad == 0, f"{bad} failures"


def check_family_structure():
    states = list(_small_sets(8, 3))
    reports = [
        check_noncolliding(MemorylessFamily(0.5), states),
        check_aperiodicity(MemorylessFamily(0.5), states),
        check_noncolliding(BoundedUniformFamily(6), [B for B in _small_sets(5, 2) if len(B) == 2]),
        check_aperiodicity(BoundedUniformFamily(6), [B for B in _small_sets(5, 2) if len(B) == 2]),
    ]
    ui = [tail_first_moment(MemorylessFamily(0.9), K, states[:50]) for K in (10, 20, 40)]
    ok = all(r.ok for r in reports) and ui[0] >= ui[1] >= ui[2]
    return ok, "; ".join(map(str, reports))


def check_renewal():
    a = 0.5
    nu = [(1 - a) * a**x for x in range(80)]
    err = float(np.max(np.abs(exact.renewal_equilibrium(nu) - np.array(nu))))
    return err <= 1e-12, f"max error {err:.2e}"


def check_gibbs_stationary():
    space = exact.enumerate_states(2, 40)
    m = exact.build_matrix(MemorylessFamily(0.5), space)
    pi = exact.stationary_distribution(m)
    err = float(np.max(np.abs(pi - gibbs.gibbs_vector(space, 0.5))))
    return err <= 1e-9, f"max error {err:.2e}"


def check_ultrafast():
    space = exact.enumerate_states(2, 40)
    prof = dict(convergence_profile((0, 5), 0.5, 8, space))
    return prof[6] <= 1e-9 and prof[5] > 1e-3, f"TV(5)={prof[5]:.3e}, TV(6)={prof[6]:.2e}"


def check_warrington():
    worst = 0.0
    for n, M in [(1, 2), (1, 5), (2, 4), (3, 5)]:
        space = exact.enumerate_states(n, M)
        pi = exact.stationary_distribution(exact.build_matrix(BoundedUniformFamily(M), space))
        w = np.array([related.warrington_pmf(n, M, s) for s in space.states])
        worst = max(worst, float(np.max(np.abs(pi - w))))
    return worst <= 1e-10, f"max error {worst:.2e}"


def check_asep():
    params = related.AsepParams(2, 1.0, 2.0)
    space, pi = related.asep_stationary_exact(params, 40)
    err = float(np.max(np.abs(pi - gibbs.gibbs_vector(space, 0.5))))
    db = related.detailed_balance_residual(params, space, pi)
    return err <= 1e-8 and db <= 1e-9, f"max error {err:.2e}, detailed balance {db:.2e}"


def check_drift():
    fam = MemorylessFamily(0.5)
    free = all(exact.drift_statistic(fam, (a, a + 3)) == -1.0 for a in range(1, 20))
    big = max(exact.drift_statistic(fam, (0, m)) for m in range(10, 40))
    return free and big <= -0.5, f"max drift for max A >= 10: {big:.4f}"


def check_neglecting_gibbs():
    A = ParticleConfig((0, 2, 3))
    alpha = 0.5
    law = gibbs.union_law_enumerated(A, 2, alpha, cutoff=25)
    beta = -math.log(alpha)
    err = max(abs(p - gibbs.gibbs_super_pmf(A, 2, beta, B)) for B, p in law.items())
    return err <= 2 * alpha**25, f"max error {err:.2e}"


def check_sampler():
    stream = GeometricStream(2024)
    emp = empirical_distribution(gibbs.sample_gibbs_batch((), 2, 0.5, 200_000, stream))
    tv = empirical_tv(emp, lambda B: gibbs.gibbs_pmf(2, math.log(2), B))
    return tv <= 0.01, f"TV {tv:.4f}"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("shift and union lemmas", check_shift_lemmas),
    ("family structure", check_family_structure),
    ("renewal equilibrium", check_renewal),
    ("gibbs stationarity", check_gibbs_stationary),
    ("ultrafast convergence", check_ultrafast),
    ("warrington equilibrium", check_warrington),
    ("asep equilibrium", check_asep),
    ("drift", check_drift),
    ("set-neglecting gibbs", check_neglecting_gibbs),
    ("gibbs sampler", check_sampler),
]


def run_all(echo: Callable[[str], None] | None = print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        if echo is not None:
            echo(f"{'PASS' if ok else 'FAIL'}  {name}: {detail} ({time.perf_counter() - start:.2f}s)")
    return all_ok

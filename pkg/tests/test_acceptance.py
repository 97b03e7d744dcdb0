"""Acceptance gate: ten end-to-end checks of the boundary-aware emulator.

Each test prints exactly one `[PASS]`/`[FAIL]` line (run pytest with -s to
see them) and then asserts. Tolerances and runtime ceilings are pinned
here as constants; seeds are frozen so every run checks the same cases.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import kstest

from kbemu.cli import ARABIDOPSIS_BETA, ARABIDOPSIS_SIGMA2
from kbemu.design import (
    CriterionGrid,
    greedy_v_optimal,
    latin_hypercube,
    maximin_lhc,
    v_criterion,
    warp_design,
)
from kbemu.diagnostics import rmse, standardized_errors
from kbemu.emulator import (
    AxisBoundary,
    PriorSpec,
    SingleBoundary,
    TrainingSet,
    TwoParallelBoundaries,
    TwoPerpendicularBoundaries,
    blackbox_augmented_data,
    brute_force_update,
    build_adjusted,
)
from kbemu.kernel import KernelSpec, corr_1d, warp_integral
from kbemu.models import (
    VARIED_HI,
    VARIED_RATES,
    arabidopsis_boundary_k6,
    arabidopsis_boundary_k8,
    default_arabidopsis_spec,
    make_plsp_simulator,
    plsp_boundary_k6,
    plsp_boundary_k8,
    plsp_output,
    toy_boundary_K,
    toy_boundary_L,
    toy_f,
)
from oracle_cases import ORACLE_JITTER, make_case, rel_gap

TOL_CLOSED_FORM = 1e-12
TOL_ORACLE_REL = 1e-8
TOL_LIMIT_FINAL = 1e-3
TOL_FACTORIZATION = 1e-12
TOL_MIDPOINT = 1e-10
TOL_CROSSTALK_REL = 1e-6
TOL_KS = 0.05
TOL_MAX_ABS_S = 3.0

UNIT2 = np.array([[0.0, 1.0], [0.0, 1.0]])
CUBE6 = np.array([[-1.0, 1.0]] * 6)


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")


def _toy_prior(theta=0.4, d=2):
    return PriorSpec(beta=0.0, sigma2=1.0, kernel=KernelSpec.isotropic(theta, d))


def _mesh101():
    g = np.linspace(0.0, 1.0, 101)
    G1, G2 = np.meshgrid(g, g, indexing="ij")
    return np.column_stack([G1.ravel(), G2.ravel()])


def test_criterion_01_closed_form_reproduction():
    start = time.perf_counter()
    em = build_adjusted(_toy_prior(), SingleBoundary(toy_boundary_K()), TrainingSet.empty(2))
    pts = _mesh101()
    mean = np.atleast_1d(em.mean(pts))
    var = np.atleast_1d(em.var(pts))
    expect_mean = -1.9 * np.exp(-(pts[:, 0] ** 2) / 0.4 ** 2) * np.sin(2.0 * np.pi * pts[:, 1])
    expect_var = 1.0 - np.exp(-2.0 * pts[:, 0] ** 2 / 0.4 ** 2)
    gap = max(
        float(np.max(np.abs(mean - expect_mean))),
        float(np.max(np.abs(var - expect_var))),
    )
    elapsed = time.perf_counter() - start
    ok = gap <= TOL_CLOSED_FORM and elapsed < 1.0
    _report(1, ok, f"closed-form surface gap {gap:.3e} (tol {TOL_CLOSED_FORM:.0e}), "
                   f"{elapsed:.2f} s on a 101x101 grid")
    assert gap <= TOL_CLOSED_FORM
    assert elapsed < 1.0


def test_criterion_02_oracle_equivalence():
    start = time.perf_counter()
    worst = 0.0
    n_cases = 0
    for kind in ("single", "perp", "parallel"):
        for case_index in range(67):
            case = make_case(kind, case_index)
            em = build_adjusted(
                case.prior, case.boundaries, case.training, jitter=ORACLE_JITTER
            )
            aug = []
            for q in case.queries:
                pts, vals = blackbox_augmented_data(case.training, q, case.boundaries)
                aug.append((pts, vals))
                bm, bv, _ = brute_force_update(pts, vals, case.prior, q, jitter=ORACLE_JITTER)
                worst = max(worst, rel_gap(em.mean(q), bm), rel_gap(em.var(q), bv))
            upts = np.vstack([aug[0][0], aug[1][0]])
            uvals = np.concatenate([aug[0][1], aug[1][1]])
            keep = []
            for i in range(upts.shape[0]):
                if not any(np.max(np.abs(upts[i] - upts[j])) <= 1e-12 for j in keep):
                    keep.append(i)
            _, _, bc = brute_force_update(
                upts[keep], uvals[keep], case.prior,
                case.queries[0], x2=case.queries[1], jitter=ORACLE_JITTER,
            )
            worst = max(worst, rel_gap(em.cov(case.queries[0], case.queries[1]), bc))
            n_cases += 1
    elapsed = time.perf_counter() - start
    ok = worst <= TOL_ORACLE_REL and n_cases >= 200 and elapsed < 30.0
    _report(2, ok, f"worst relative gap {worst:.3e} over {n_cases} randomized cases "
                   f"(tol {TOL_ORACLE_REL:.0e}), {elapsed:.1f} s")
    assert n_cases >= 200
    assert worst <= TOL_ORACLE_REL
    assert elapsed < 30.0


def test_criterion_03_discrete_limit_convergence():
    start = time.perf_counter()
    theta = 0.4
    prior = _toy_prior(theta)
    em = build_adjusted(prior, SingleBoundary(toy_boundary_K()), TrainingSet.empty(2))
    rng = np.random.default_rng(20260819)
    queries = rng.uniform(0.05, 0.95, size=(20, 2))
    cmean = np.atleast_1d(em.mean(queries))
    cvar = np.atleast_1d(em.var(queries))

    gaps = []
    for m in (5, 20, 80, 320):
        x2 = np.linspace(0.0, 1.0, m)
        pts = np.column_stack([np.zeros(m), x2])
        vals = -1.9 * np.sin(2.0 * np.pi * x2)
        worst = 0.0
        for k, q in enumerate(queries):
            bm, bv, _ = brute_force_update(pts, vals, prior, q)
            worst = max(worst, abs(bm - cmean[k]), abs(bv - cvar[k]))
        gaps.append(worst)
    elapsed = time.perf_counter() - start
    monotone = all(a > b for a, b in zip(gaps, gaps[1:]))
    ok = monotone and gaps[-1] < TOL_LIMIT_FINAL and elapsed < 30.0
    _report(3, ok, "discretized-boundary gaps " +
            " > ".join(f"{g:.3e}" for g in gaps) +
            f" (final tol {TOL_LIMIT_FINAL:.0e}), {elapsed:.1f} s")
    assert monotone, f"gaps not monotone: {gaps}"
    assert gaps[-1] < TOL_LIMIT_FINAL
    assert elapsed < 30.0


def test_criterion_04_perpendicular_factorization_and_symmetry():
    theta = 0.4
    prior = _toy_prior(theta)
    K, L = toy_boundary_K(), toy_boundary_L()
    em_kl = build_adjusted(prior, TwoPerpendicularBoundaries(K, L), TrainingSet.empty(2))
    em_lk = build_adjusted(prior, TwoPerpendicularBoundaries(L, K), TrainingSet.empty(2))
    rng = np.random.default_rng(44)
    pts = rng.uniform(0.0, 1.0, size=(1000, 2))
    var = np.atleast_1d(em_kl.var(pts))
    r1 = corr_1d(pts[:, 0], theta)
    r2 = corr_1d(pts[:, 1], theta)
    factorized = (1.0 - r1 ** 2) * (1.0 - r2 ** 2)
    gap_factor = float(np.max(np.abs(var - factorized)))
    gap_swap = max(
        float(np.max(np.abs(np.atleast_1d(em_kl.mean(pts)) - np.atleast_1d(em_lk.mean(pts))))),
        float(np.max(np.abs(var - np.atleast_1d(em_lk.var(pts))))),
        abs(em_kl.cov(pts[0], pts[1]) - em_lk.cov(pts[0], pts[1])),
    )
    ok = gap_factor <= TOL_FACTORIZATION and gap_swap <= TOL_FACTORIZATION
    _report(4, ok, f"variance factorization gap {gap_factor:.3e}, boundary-swap gap "
                   f"{gap_swap:.3e} over 1000 points (tol {TOL_FACTORIZATION:.0e})")
    assert gap_factor <= TOL_FACTORIZATION
    assert gap_swap <= TOL_FACTORIZATION


def test_criterion_05_parallel_midpoint_maximum():
    flat = lambda p: 0.0  # noqa: E731
    sigma2 = 1.3
    worst_pos = 0.0
    worst_val = 0.0
    for c in (0.5, 1.0, 2.0):
        for theta in (0.3, 0.7):
            prior = PriorSpec(beta=0.0, sigma2=sigma2, kernel=KernelSpec.isotropic(theta, 2))
            bb = TwoParallelBoundaries(
                AxisBoundary(axis=0, location=0.0, evaluator=flat),
                AxisBoundary(axis=0, location=c, evaluator=flat),
            )
            em = build_adjusted(prior, bb, TrainingSet.empty(2))
            a = np.linspace(0.0, c, 1001)
            pts = np.column_stack([a, np.full(1001, 0.37)])
            var = np.atleast_1d(em.var(pts))
            i_max = int(np.argmax(var))
            step = c / 1000.0
            worst_pos = max(worst_pos, abs(a[i_max] - c / 2.0) / step)
            r_half = math.exp(-((c / 2.0) / theta) ** 2)
            r_c = math.exp(-((c / theta) ** 2))
            expect = sigma2 * (1.0 - 2.0 * r_half ** 2 / (1.0 + r_c))
            worst_val = max(worst_val, abs(var[i_max] - expect))
    ok = worst_pos <= 1.0 and worst_val <= TOL_MIDPOINT
    _report(5, ok, f"midpoint location off by {worst_pos:.1f} grid steps, "
                   f"peak value gap {worst_val:.3e} (tol {TOL_MIDPOINT:.0e})")
    assert worst_pos <= 1.0
    assert worst_val <= TOL_MIDPOINT


def test_criterion_06_crosstalk_boundary_cross_check():
    start = time.perf_counter()
    spec = default_arabidopsis_spec()
    rng = np.random.default_rng(606)
    worst = 0.0
    for zero_rate, closed_form in (("k8", plsp_boundary_k8), ("k6", plsp_boundary_k6)):
        for _ in range(50):
            draws = {
                name: float(rng.uniform(0.0, hi))
                for name, hi in zip(VARIED_RATES, VARIED_HI)
            }
            draws[zero_rate] = 0.0
            case = spec.with_rates(draws)
            a = closed_form(case)
            b = plsp_output(case)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    elapsed = time.perf_counter() - start
    ok = worst <= TOL_CROSSTALK_REL and elapsed < 120.0
    _report(6, ok, f"worst closed-form vs integration relative gap {worst:.3e} "
                   f"over 100 rate draws (tol {TOL_CROSSTALK_REL:.0e}), {elapsed:.1f} s")
    assert worst <= TOL_CROSSTALK_REL
    assert elapsed < 120.0


def test_criterion_07_crosstalk_rmse_ordering():
    start = time.perf_counter()
    prior = PriorSpec(
        beta=ARABIDOPSIS_BETA, sigma2=ARABIDOPSIS_SIGMA2,
        kernel=KernelSpec.isotropic(0.7, 6),
    )
    simulate = make_plsp_simulator()
    train = maximin_lhc(60, 6, seed=2711, box=CUBE6, num_candidates=10000)
    y_train = np.array([simulate(p) for p in train.points])
    diag = maximin_lhc(500, 6, seed=9041, box=CUBE6, num_candidates=200)
    y_diag = np.array([simulate(p) for p in diag.points])

    one = SingleBoundary(arabidopsis_boundary_k6())
    two = TwoPerpendicularBoundaries(arabidopsis_boundary_k6(), arabidopsis_boundary_k8())
    warped = warp_design(train, two, prior.kernel)
    y_warped = np.array([simulate(p) for p in warped.points])

    def score(design_pts, values, bconfig):
        em = build_adjusted(
            prior, bconfig, TrainingSet(points=design_pts, values=values, box=CUBE6)
        )
        return rmse(em, diag.points, y_diag)

    r_none = score(train.points, y_train, None)
    r_one = score(train.points, y_train, one)
    r_two = score(train.points, y_train, two)
    r_warp = score(warped.points, y_warped, two)
    elapsed = time.perf_counter() - start
    ok = r_two < r_one < r_none and r_warp < r_two and elapsed < 600.0
    _report(7, ok, f"RMSE none {r_none:.6f} > one {r_one:.6f} > two {r_two:.6f} > "
                   f"warped+two {r_warp:.6f}, {elapsed:.1f} s")
    assert r_two < r_one < r_none
    assert r_warp < r_two
    assert elapsed < 600.0


def test_criterion_08_design_criterion_ordering():
    start = time.perf_counter()
    prior = _toy_prior()
    bb = SingleBoundary(toy_boundary_K())
    grid = CriterionGrid.tensor(UNIT2, 30)
    aware = greedy_v_optimal(10, grid, prior, bb, seed=5)
    blind = greedy_v_optimal(10, grid, prior, None, seed=5)
    v_aware = aware.criterion_path[-1]
    v_blind = v_criterion(blind.design, grid, prior, bb)
    cap = grid.m * prior.sigma2
    elapsed = time.perf_counter() - start
    ok = v_aware <= v_blind <= cap and elapsed < 60.0
    _report(8, ok, f"total-variance criterion {v_aware:.4f} (boundary-aware) <= "
                   f"{v_blind:.4f} (boundary-blind) <= {cap:.0f} cap, {elapsed:.1f} s")
    assert v_aware <= v_blind
    assert v_blind <= cap
    assert elapsed < 60.0


def test_criterion_09_warp_marginal_law():
    theta = 0.4
    kernel = KernelSpec.isotropic(theta, 2)
    des = latin_hypercube(10_000, 2, seed=909)
    warped = warp_design(des, SingleBoundary(toy_boundary_K()), kernel)
    total = warp_integral(1.0, theta)

    def cdf(t):
        return warp_integral(np.asarray(t, dtype=float), theta) / total

    stat = kstest(warped.points[:, 0], cdf).statistic
    ok = stat < TOL_KS
    _report(9, ok, f"KS distance {stat:.5f} between warped marginal and the "
                   f"unresolved-variance law (tol {TOL_KS})")
    assert stat < TOL_KS


def test_criterion_10_diagnostics_sanity():
    em = build_adjusted(_toy_prior(), SingleBoundary(toy_boundary_K()), TrainingSet.empty(2))
    pts = _mesh101()
    truth = np.array([toy_f(p) for p in pts])
    report = standardized_errors(em, pts, truth)
    observed = report.max_abs_s
    n_exact = int(report.exact.sum())
    ok = observed <= TOL_MAX_ABS_S
    _report(10, ok, f"max |S| {observed:.4f} over the 101x101 grid "
                    f"(bound {TOL_MAX_ABS_S}), {n_exact} exact boundary points")
    assert observed <= TOL_MAX_ABS_S
    assert n_exact == 101

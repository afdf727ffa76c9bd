"""Acceptance criteria 1-10, one test each; every test prints a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from greedynewton import (
    ArmijoConfig,
    ConvergenceBounds,
    ExactSearchConfig,
    Method,
    QuadraticProblem,
    Regime,
    ScalarRestriction,
    SolverConfig,
    SyntheticSpec,
    analytic_bounds,
    armijo_search,
    check_arbitrary_step,
    check_global_rate,
    cubic_subproblem,
    estimate_bounds,
    exact_search,
    generate,
    reference_optimum,
    solve,
    step_cubic_linesearch,
    step_greedy_lm,
)
from greedynewton.linesearch import Termination
from greedynewton.solvers import step_greedy_newton, step_hybrid, step_pure_newton
from greedynewton.verify import Provenance, superlinear_ratios, trajectory_pairs

from conftest import ACCEPTANCE_LINES, random_logistic

REGULARIZED = 1.0


def verdict(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def regularized_runs():
    """Greedy Newton traces, certified optima and analytic bounds for each regime at reg = 1."""
    runs = {}
    for regime in Regime:
        p = generate(SyntheticSpec(regime), reg=REGULARIZED)
        trace = solve(p, SolverConfig(Method.GREEDY_NEWTON, max_iter=25))
        ref = reference_optimum(p)
        runs[regime] = (p, trace, ref, analytic_bounds(p))
    return runs


def test_criterion_01_one_step_quadratic_exactness():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst_err, worst_alpha = 0.0, 0.0
    for _ in range(50):
        n = int(rng.integers(1, 51))
        cond = 10.0 ** rng.uniform(0, 4)
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        H = (Q * np.geomspace(1.0, cond, n)) @ Q.T
        p = QuadraticProblem.centered(H, rng.standard_normal(n))
        x0 = 10 * rng.standard_normal(n)
        cfg = SolverConfig()
        for step in (step_greedy_newton, step_pure_newton, step_hybrid):
            x1, info = step(p, x0, cfg)
            worst_err = max(worst_err, float(np.linalg.norm(x1 - p.minimizer())))
            if step is step_greedy_newton:
                worst_alpha = max(worst_alpha, abs(info.step - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst_err < 1e-8 and worst_alpha < 1e-6 and elapsed < 5.0
    verdict(1, ok, f"max |x1 - x*| = {worst_err:.2e}, max |alpha - 1| = {worst_alpha:.2e}, {elapsed:.2f} s")


def test_criterion_02_global_rate(regularized_runs):
    details, ok = [], True
    for regime, (p, trace, ref, bounds) in regularized_runs.items():
        assert bounds.mu == 1.0
        report = check_global_rate(trace, bounds, ref, slack=1e-8, floor=1e-12)
        ok &= report.passed and len(report.checked) > 0
        details.append(f"{regime.value} worst {report.worst_ratio:.3g}")
    verdict(2, ok, "; ".join(details))


def test_criterion_03_arbitrary_step_estimated_M(regularized_runs):
    details, ok = [], True
    for regime, (p, trace, ref, analytic) in regularized_runs.items():
        sampled = estimate_bounds(p, [ref.x], trajectory_pairs(trace, ref))
        bounds = ConvergenceBounds(analytic.mu, analytic.L, sampled.M, Provenance.ESTIMATED)
        report = check_arbitrary_step(trace, bounds, ref, slack=1e-6)
        ok &= report.passed and len(report.checked) > 0
        details.append(f"{regime.value} M~{sampled.M:.3g} worst {report.worst_ratio:.3g} {report.verdict}")
    verdict(3, ok, "; ".join(details))


def test_criterion_04_superlinear(regularized_runs):
    p, trace, ref, b = regularized_runs[Regime.STRONGLY_CONVEX]
    certified = ref.grad_norm < 1e-13
    ratios = superlinear_ratios(trace, ref)[-3:]
    cap = math.sqrt(b.L / b.mu) * b.M / (2 * b.mu)
    # bounded by the analytic constant, and no growth trend: a linearly
    # converging tail would inflate the ratio by orders of magnitude per step
    ok = certified and len(ratios) == 3 and bool(np.all(ratios <= cap)) and ratios[-1] <= 10 * ratios[0]
    verdict(4, ok, f"|grad f(x*)| = {ref.grad_norm:.1e}, ratios {np.array2string(ratios, precision=3)} vs cap {cap:.3g}")


def test_criterion_05_separable_speedup():
    details, ok = [], True
    for regime in (Regime.STRICTLY_CONVEX_SEPARABLE, Regime.CONVEX_SEPARABLE):
        p = generate(SyntheticSpec(regime), reg=0.0)
        gn = solve(p, SolverConfig(Method.GREEDY_NEWTON, max_iter=25))
        hit = np.nonzero(gn.f_values < 1e-10)[0]
        gn_ok = hit.size > 0 and hit[0] <= 10 and bool(np.any(gn.steps > 2))
        ar = solve(p, SolverConfig(Method.ARMIJO_NEWTON, max_iter=25, armijo=ArmijoConfig(init_step=1.0)))
        f25 = ar.f_values[min(25, len(ar.f_values) - 1)]
        ar_ok = len(ar.records) == 26 and f25 > 1e-3
        ok &= gn_ok and ar_ok
        details.append(
            f"{regime.value}: greedy f<1e-10 at k={hit[0] if hit.size else None}, max step {gn.steps.max():.3g}; "
            f"armijo f_25 = {f25:.2e}"
        )
    verdict(5, ok, "; ".join(details))


def test_criterion_06_steps_tend_to_one(regularized_runs):
    details, ok = [], True
    for regime in (Regime.STRONGLY_CONVEX, Regime.REPEATED_FEATURES):
        _, trace, _, _ = regularized_runs[regime]
        alphas = trace.steps  # alpha_k moves x_k to x_{k+1}
        tail = alphas[5:]
        ok &= bool(np.all(np.abs(tail - 1.0) < 0.1))
        details.append(
            f"{regime.value}: {len(alphas)} steps to |grad| <= 1e-10, k>=5 steps {np.array2string(tail, precision=4)}, "
            f"k>=1 max |alpha - 1| = {np.abs(alphas[1:] - 1).max():.3g}"
        )
    verdict(6, ok, "; ".join(details))


def test_criterion_07_dominance(comparison, plane_comparison):
    checked, bad = 0, []
    for c in comparison[1] + plane_comparison[1]:
        for rec in c.trace.records[1:]:
            e = rec.extras
            if c.label == "greedy-newton":
                good = rec.f <= e["f_newton"]
            elif c.label == "hybrid":
                good = rec.f <= min(e["f_gradient"], e["f_newton"])
            elif c.label == "plane-newton":
                good = rec.f <= e["f_greedy"]
            else:
                continue
            checked += 1
            if not good:
                bad.append((c.dataset, c.reg, c.label, rec.k))
    verdict(7, checked > 0 and not bad, f"{checked} iterations checked, {len(bad)} violations {bad[:3]}")


def test_criterion_08_oracles():
    rng = np.random.default_rng(8)
    worst_g = worst_h = worst_r = 0.0
    h = 1e-6
    for inst in range(5):
        p = random_logistic(rng, m=40, n=6, reg=[0.0, 1.0][inst % 2])
        for _ in range(20):
            x, v = rng.standard_normal(p.n), rng.standard_normal(p.n)
            g = p.gradient(x)
            fd = np.array([(p.value(x + h * e) - p.value(x - h * e)) / (2 * h) for e in np.eye(p.n)])
            worst_g = max(worst_g, np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1e-3))
            hv = p.hessian(x) @ v
            fdh = (p.gradient(x + h * v) - p.gradient(x - h * v)) / (2 * h)
            worst_h = max(worst_h, np.linalg.norm(fdh - hv) / np.linalg.norm(hv))
            r = p.restrict(x, v)
            for a in (0.0, 0.37, 1.9):
                worst_r = max(worst_r, abs(r.phi(a) - p.value(x + a * v)) / abs(p.value(x + a * v)))
    ok = worst_g < 1e-5 and worst_h < 1e-4 and worst_r < 1e-12
    verdict(8, ok, f"gradient {worst_g:.1e}, Hessian-vector {worst_h:.1e}, restriction {worst_r:.1e}")


def test_criterion_09_cubic():
    rng = np.random.default_rng(9)
    lm_ok = cubic_ok = True
    for _ in range(20):
        p = random_logistic(rng, m=40, n=5, reg=1.0, scale=2.0)
        x = 3 * rng.standard_normal(5)
        _, lm = step_greedy_lm(p, x)
        _, newton = step_pure_newton(p, x, SolverConfig())
        lm_ok &= lm.f <= newton.f
        y, _ = cubic_subproblem(p, x, 1.0)
        _, cl = step_cubic_linesearch(p, x, 1.0)
        cubic_ok &= cl.f <= p.value(y)
    quad_ok = True
    for _ in range(5):
        n = int(rng.integers(2, 10))
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        q = QuadraticProblem.centered((Q * np.geomspace(1, 100, n)) @ Q.T, rng.standard_normal(n))
        x1, info = step_greedy_lm(q, rng.standard_normal(n))
        quad_ok &= info.extras["lam"] < 1e-8 and np.linalg.norm(x1 - q.minimizer()) < 1e-8
    verdict(9, lm_ok and cubic_ok and quad_ok,
            f"LM <= Newton {lm_ok}, lambda=0 on quadratics {quad_ok}, cubic search <= cubic step {cubic_ok}")


def test_criterion_10_line_search():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(50):
        a, c = 10 ** rng.uniform(-2, 2), 10 ** rng.uniform(-2, 3)
        r = ScalarRestriction(lambda t: 0.5 * a * (t - c) ** 2, lambda t: a * (t - c))
        worst = max(worst, abs(exact_search(r).step - c))
    r = ScalarRestriction(lambda t: 2 * (1 - t) ** 2, lambda t: -4 * (1 - t))
    arm = armijo_search(r, ArmijoConfig(init_step=8.0))
    mono = ScalarRestriction(lambda t: -math.log1p(t), lambda t: -1 / (1 + t))
    cap = exact_search(mono, ExactSearchConfig(max_doublings=20))
    ok = (
        worst < 1e-7
        and arm.backtracks == 3 and arm.step == 1.0
        and cap.termination is Termination.DOUBLING_CAP and math.isfinite(cap.step) and mono.phi(cap.step) < mono.phi(0.0)
    )
    verdict(10, ok, f"quadratic error {worst:.1e}, Armijo backtracks {arm.backtracks}, doubling cap step {cap.step:g}")

"""
End-to-end convergence studies on the standard problems.

Each test runs the harness the way the CLI does and checks orders,
frequency uniformity and the behaviour of the baselines.
"""

from typing import Dict, List, Optional

import pytest

from discretization.grid import l2_distance
from harness.experiments import (
    ExperimentConfig,
    ReferenceCache,
    build_problem,
    compute_reference,
    run_convergence,
    run_omega_sweep,
)
from harness.records import RunRecord, fit_slope
from integrators.reference import ReferenceSpec

pytestmark = [pytest.mark.integration, pytest.mark.slow]

STEPS = [20, 40, 80, 160, 320]


def errors(records: List[RunRecord], method: str, omega: Optional[float] = None) -> Dict[int, float]:
    return {
        r.K: r.error_l2 for r in records
        if r.method == method and (omega is None or r.omega_max == omega)
    }


def slope(by_k: Dict[int, float], T: float = 1.0) -> float:
    ks = sorted(by_k)
    return fit_slope([T / k for k in ks], [by_k[k] for k in ks])


def config(**fields) -> ExperimentConfig:
    fields.setdefault("repeats", 1)
    return ExperimentConfig(**fields)


def test_third_order_on_example1():
    records = run_convergence(config(omega=10.0, steps_list=STEPS, methods=["xi3-filon"]))
    assert 2.7 <= slope(errors(records, "xi3-filon")) <= 3.3
    assert all(r.slope_estimate == pytest.approx(slope(errors(records, "xi3-filon"))) for r in records)


def test_error_constant_uniform_in_frequency():
    omegas = [1e3, 1e4, 1e5]
    records = run_omega_sweep(config(steps_list=[100, 200, 400], methods=["xi3-filon"]), omegas)
    err = {(r.omega_max, r.K): r.error_l2 for r in records}

    # omega h >= 100 for both: the same h^3 floor
    assert max(err[1e4, 100], err[1e5, 100]) <= 3.0 * min(err[1e4, 100], err[1e5, 100])

    # the worst error over the step sweep does not grow with omega
    worst = {w: max(err[w, K] for K in (100, 200, 400)) for w in omegas}
    assert worst[1e4] <= 2.0 * worst[1e3]
    assert worst[1e5] <= 2.0 * worst[1e3]


def test_filon_against_gauss_legendre_at_high_frequency():
    methods = ["xi3-filon", "xi3-gl4", "xi3-gl6", "xi3-gl8"]
    records = run_convergence(config(omega=1e4, steps_list=STEPS, methods=methods))
    filon = errors(records, "xi3-filon")
    assert 2.7 <= slope(filon) <= 3.3
    for method in methods[1:]:
        gl = errors(records, method)
        assert slope(gl) <= 2.5, method
        for K in (160, 320):
            assert gl[K] >= 100.0 * filon[K], (method, K)


def test_gauss_legendre_degrades_as_frequency_grows():
    cfg = config(steps_list=[160, 320], methods=["xi3-filon", "xi3-gl8"])
    records = run_omega_sweep(cfg, [10.0, 1e4])
    err = {(r.method, r.omega_max, r.K): r.error_l2 for r in records}
    for K in (160, 320):
        resolved = err["xi3-gl8", 10.0, K] / err["xi3-filon", 10.0, K]
        aliased = err["xi3-gl8", 1e4, K] / err["xi3-filon", 1e4, K]
        assert aliased >= 10.0 * resolved, K


def test_runge_kutta_needs_small_steps_at_high_frequency():
    methods = ["rk2", "rk4", "xi3-filon"]
    fast = run_convergence(config(omega=1500.0, steps_list=[100], methods=methods))
    slow = run_convergence(config(omega=10.0, steps_list=[100], methods=methods))
    fast_err = {r.method: r.error_l2 for r in fast}
    slow_err = {r.method: r.error_l2 for r in slow}

    assert fast_err["rk2"] >= 100.0 * fast_err["xi3-filon"]
    assert fast_err["rk4"] >= 50.0 * fast_err["xi3-filon"]
    assert fast_err["xi3-filon"] <= 10.0 * slow_err["xi3-filon"]


def test_all_methods_resolve_the_slow_regime():
    cfg = config(omega=10.0, steps_list=[320], methods=["rk2", "rk4", "xi3-filon"])
    cache = ReferenceCache()
    records = run_convergence(cfg, cache=cache)
    problem = build_problem(cfg)
    reference = cache.get(problem, cfg.resolved_reference())
    scale = l2_distance(reference.psi)
    assert all(r.error_l2 < 1e-3 * scale for r in records)


def test_multi_frequency_example2():
    steps = [40, 80, 160, 320]
    example2 = run_convergence(config(problem="example2", steps_list=steps, methods=["xi3-filon"]))
    example1 = run_convergence(config(omega=1e5, steps_list=steps, methods=["xi3-filon"]))
    e2, e1 = errors(example2, "xi3-filon"), errors(example1, "xi3-filon")
    assert 2.7 <= slope(e2) <= 3.3
    # six times the static mass plus the resolved omega = 10^2 pair
    assert all(e2[K] <= 200.0 * e1[K] for K in steps)


def test_free_problem_is_exact():
    records = run_convergence(config(problem="free", steps_list=[7, 37], methods=["xi3-filon"]))
    problem = build_problem(config(problem="free"))
    scale = l2_distance(problem.exact().psi)
    assert all(r.error_l2 <= 1e-12 * scale for r in records)


def test_constant_mass_third_order():
    cfg = config(problem="constant_mass", steps_list=[20, 40, 80, 160], methods=["xi3-filon"])
    records = run_convergence(cfg)
    assert 2.7 <= slope(errors(records, "xi3-filon")) <= 3.3


def test_rk4_fourth_order_without_oscillation():
    records = run_convergence(config(omega=0.0, steps_list=[20, 40, 80, 160], methods=["rk4"]))
    assert 3.7 <= slope(errors(records, "rk4")) <= 4.3


def test_reference_agrees_with_coarser_reference():
    cfg = config(omega=10.0, steps_list=[40])
    problem = build_problem(cfg)
    fine = compute_reference(problem, ReferenceSpec(steps=16000), cross_check=False)
    coarse = compute_reference(problem, ReferenceSpec(steps=4000), cross_check=False)
    assert l2_distance(fine.psi, coarse.psi) <= 1e-8 * l2_distance(fine.psi)

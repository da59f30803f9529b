import json

import numpy as np
import pytest

from cocycle_rectifier.cochain import Cochain, CochainError, coboundary, defect, evaluation_set
from cocycle_rectifier.groups import build_cyclic, build_quaternion8, build_symmetric, direct_product
from cocycle_rectifier.linalg import logm, op_norm
from cocycle_rectifier.rectify import (
    FIT_FLOOR,
    RectifyReport,
    RectifySettings,
    Status,
    _classify,
    fit_contraction,
    gate_check,
    is_quadratic,
    rectify,
    rectify_abelian,
    rectify_step,
    report_to_json,
    trace_csv,
)
from cocycle_rectifier.scenarios import (
    build_input,
    load_scenario,
    perturb,
    representation,
    run_scenario,
    template,
)
from cocycle_rectifier.selftest import regular_action
from cocycle_rectifier.target import GAction, TargetGroup

C2 = build_cyclic(2)
GL1 = TargetGroup.matrix(1)
GL2 = TargetGroup.matrix(2)
U2 = TargetGroup.matrix(2, "complex", "unitary")
TRIVIAL = GAction.trivial()


def s3_standard():
    g = build_symmetric(3)
    return Cochain.from_function(g, GL2, TRIVIAL, 1, representation(g, "standard"))


def scenario(name, **pert):
    doc = template(name)
    doc["perturbation"].update(pert)
    return load_scenario(doc)


# -------------------------------------------------------------------- gate

def test_gate_passes_exact_unitary_rep():
    g = build_quaternion8()
    rho = Cochain.from_function(g, U2, TRIVIAL, 1, representation(g, "quaternion"))
    res = gate_check(rho, RectifySettings(), g.haar_scheme())
    assert res
    assert res.value <= 1e-15


def test_gate_rejects_large_adjoint():
    rho = Cochain(C2, GL2, TRIVIAL, 1, table=[np.eye(2), np.diag([1e4, 1e-4])])
    res = gate_check(rho, RectifySettings(), C2.haar_scheme())
    assert not res
    assert res.reason == "Ad bound"
    assert res.value == pytest.approx(1e8, rel=1e-12)
    assert res.witness == 1


def test_gate_rejects_large_defect():
    rho = Cochain(C2, GL1, TRIVIAL, 1, table=[[[1.0]], [[-np.exp(0.1)]]])
    res = gate_check(rho, RectifySettings(), C2.haar_scheme())
    assert not res
    assert res.reason == "defect"
    assert res.value == pytest.approx(0.2, abs=1e-14)


def test_settings_validation():
    with pytest.raises(ValueError):
        RectifySettings(tol=0.0)
    with pytest.raises(ValueError):
        RectifySettings(input_defect_max=0.3)
    with pytest.raises(ValueError):
        RectifySettings(max_iter=0)


# -------------------------------------------------------------------- step

def test_step_fixes_exact_cocycle():
    rho = s3_standard()
    new, diag = rectify_step(rho, rho.group.haar_scheme())
    assert diag.alpha_sup <= 1e-15
    np.testing.assert_allclose(new.table, rho.table, atol=1e-15)


def test_step_sign_example_hand_values():
    rho = Cochain(C2, GL1, TRIVIAL, 1, table=[[[1.0]], [[-np.exp(0.1)]]])
    new, diag = rectify_step(rho, C2.haar_scheme())
    np.testing.assert_allclose(new.table[:, 0, 0], [1.0, -1.0], atol=1e-14)
    assert diag.pre_defect == pytest.approx(0.2, abs=1e-14)
    assert diag.post_defect <= 1e-14


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("eps", [1e-2, 3e-3, 1e-3])
def test_step_squares_the_defect(seed, eps):
    _, rho = build_input(scenario("s3-gl2", epsilon=eps, seed=seed))
    _, diag = rectify_step(rho, rho.group.haar_scheme())
    assert diag.post_defect <= 10 * diag.pre_defect ** 2


def test_step_rejects_abelian():
    rho = Cochain.constant(C2, TargetGroup.abelian(1), TRIVIAL, 1, np.zeros(1))
    with pytest.raises(CochainError):
        rectify_step(rho, C2.haar_scheme())


# ----------------------------------------------------------------- rectify

def test_rectify_exact_input():
    rho = s3_standard()
    out, rep = rectify(rho)
    assert rep.status is Status.CONVERGED
    assert rep.iterations == 0
    assert rep.distance <= 1e-15
    assert out is rho


def test_rectify_s3_reference_run():
    _, out, rep = run_scenario(scenario("s3-gl2"))
    tr = rep.defect_trace
    assert rep.status is Status.CONVERGED
    assert rep.final_defect <= 1e-12
    assert all(b < a for a, b in zip(tr, tr[1:]))
    # the last step lands on the roundoff floor, below which squaring is meaningless
    assert all(b <= 10 * a * a for a, b in zip(tr, tr[1:]) if b > FIT_FLOOR)
    assert is_quadratic(rep.fitted_order)


@pytest.mark.parametrize("name", ["s3-gl2", "q8-u2", "c4-twisted-r2"])
def test_converged_output_is_exact(name):
    sc = scenario(name)
    _, out, rep = run_scenario(sc)
    assert rep.status is Status.CONVERGED
    g = sc.group
    s, t = np.indices((g.order, g.order)).reshape(2, -1)
    d = coboundary(out)(s, t)
    assert np.max(op_norm(d - np.eye(2))) <= 1e-12
    if sc.action.is_trivial:
        assert np.max(op_norm(out(s) @ out(t) - out(g.mul(s, t)))) <= 1e-12


def test_accumulated_correction_is_recomputable():
    sc = scenario("s3-gl2")
    rho, out, rep = run_scenario(sc)
    g = sc.group
    e = g.elements()
    alpha = logm(out(e) @ np.linalg.inv(rho(e)))
    assert np.max(op_norm(alpha)) == pytest.approx(rep.distance, rel=1e-12)
    assert rep.hyers_ulam_ratio == pytest.approx(rep.distance / rep.defect_trace[0])


def test_near_coboundary_diagnostic():
    _, _, rep = run_scenario(scenario("s3-gl2"))
    assert rep.near_coboundary <= 10 * rep.defect_trace[0] ** 2


def test_fixed_point_for_tiny_defect():
    sc = scenario("s3-gl2", epsilon=1e-15)
    rho, out, rep = run_scenario(sc)
    assert rep.defect_trace[0] <= 1e-13
    e = sc.group.elements()
    assert np.max(op_norm(out(e) - rho(e))) <= 1e-12


def test_lipschitz_in_the_input():
    sc = scenario("s3-gl2", epsilon=5e-3, seed=7)
    _, rho = build_input(sc)
    eta = 1e-5
    nudged = perturb(rho, eta, seed=99)
    e = sc.group.elements()
    gap = np.max(op_norm(logm(nudged(e) @ np.linalg.inv(rho(e)))))
    assert gap <= 1e-4
    out1, _ = rectify(rho, sc.settings)
    out2, _ = rectify(nudged, sc.settings)
    assert np.max(op_norm(out1(e) - out2(e))) <= 100 * gap


def test_gate_rejected_report():
    _, _, rep = run_scenario(scenario("s3-gl2", epsilon=0.5))
    assert rep.status is Status.GATE_REJECTED
    assert rep.iterations == 0
    assert "defect" in rep.message


def test_rectify_rejects_degree_two():
    rho = Cochain.constant(C2, GL2, TRIVIAL, 2, np.eye(2))
    with pytest.raises(CochainError):
        rectify(rho)


def test_u1_coarse_grid_hits_quadrature_floor():
    doc = template("u1-u2")
    doc["group"]["nodes"] = 16
    _, _, rep = run_scenario(load_scenario(doc))
    assert rep.status is Status.QUADRATURE_FLOOR
    assert 1e-7 < rep.final_defect < 1e-4


# ------------------------------------------------------------ classification

@pytest.mark.parametrize("trace, expected", [
    ([1e-2, 1e-13], Status.CONVERGED),
    ([1e-2, 1e-4], None),
    ([1e-2, 2e-2, 4e-2], Status.DIVERGED),
    ([1e-2, 1e-6, 0.9e-6, 0.8e-6], Status.QUADRATURE_FLOOR),
    ([1e-2, 1e-3, 1e-4, 1e-5], None),
])
def test_classify(trace, expected):
    assert _classify(trace, RectifySettings()) is expected


# -------------------------------------------------------------- abelian path

def test_abelian_exact_input_untouched():
    rho = Cochain.constant(C2, TargetGroup.abelian(1), TRIVIAL, 1, np.zeros(1))
    out, rep = rectify_abelian(rho)
    assert rep.iterations == 0
    np.testing.assert_array_equal(out.table, rho.table)


def test_abelian_c2_hand_example():
    rho = Cochain(C2, TargetGroup.abelian(1), TRIVIAL, 1, table=[[0.1], [0.3]])
    out, rep = rectify_abelian(rho)
    np.testing.assert_allclose(out.table, 0.0, atol=1e-14)
    assert rep.status is Status.CONVERGED
    assert rep.iterations == 1


def test_abelian_product_swap_degree_two():
    sc = load_scenario(template("c2c2-abelian-n2"))
    _, out, rep = run_scenario(sc)
    assert rep.iterations == 1
    d = coboundary(out).table
    assert d.shape[:3] == (4, 4, 4)
    assert np.max(np.abs(d)) <= 1e-13


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("group", [build_cyclic(3), direct_product(C2, C2), build_symmetric(3)],
                         ids=lambda g: g.name)
def test_abelian_one_shot_twisted(n, group, rng):
    act = regular_action(group)
    d = group.order
    rho = Cochain(group, TargetGroup.abelian(d), act, n,
                  table=1e-2 * rng.standard_normal((group.order,) * n + (d,)))
    out, rep = rectify_abelian(rho)
    assert rep.iterations == 1
    assert rep.final_defect <= 1e-12
    assert np.max(np.abs(coboundary(out).table)) <= 1e-12


def test_rectify_dispatches_abelian():
    rho = Cochain(C2, TargetGroup.abelian(1), TRIVIAL, 1, table=[[0.1], [0.3]])
    _, rep = rectify(rho)
    assert rep.iterations == 1


# -------------------------------------------------------- contraction fit

def test_fit_exact_quadratic():
    k, order = fit_contraction([1e-2, 1e-4, 1e-8])
    assert order == pytest.approx(2.0, abs=1e-12)
    assert k == pytest.approx(1.0, rel=1e-12)


def test_fit_consistent_half_constant():
    k, order = fit_contraction([1e-1, 5e-3, 1.25e-5])
    assert order == pytest.approx(2.0, abs=1e-12)
    assert k == pytest.approx(0.5, rel=1e-12)


def test_fit_varying_constant():
    # K changes from 0.5 to 1.0 between the two steps, so the slope is pulled off 2
    _, order = fit_contraction([1e-1, 5e-3, 2.5e-5])
    assert order == pytest.approx(1.7686217868, abs=1e-9)


def test_fit_flat_trace():
    k, order = fit_contraction([0.3, 0.3, 0.3])
    assert order == 0.0
    assert k == pytest.approx(0.3)
    assert not is_quadratic(order)


def test_fit_drops_roundoff_pairs():
    _, order = fit_contraction([1e-2, 1e-4, 1e-8, 3e-16], floor=1e-14)
    assert order == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("trace", [[1e-2, 1e-4], [1e-2, 0.0, 1e-8], [1e-2, -1e-4, 1e-8]])
def test_fit_errors(trace):
    with pytest.raises(ValueError):
        fit_contraction(trace)


# ------------------------------------------------------------ serialization

def test_report_json_fields_and_csv():
    sc = scenario("s3-gl2")
    _, _, rep = run_scenario(sc)
    doc = report_to_json(rep, sc.settings, 42)
    for key in ("status", "iterations", "defect_trace", "fitted_K", "fitted_order",
                "final_defect", "distance", "seed", "settings"):
        assert key in doc
    assert doc["schema"] == 1
    json.dumps(doc, allow_nan=False)
    lines = trace_csv(rep).splitlines()
    assert lines[0] == "iteration,defect"
    assert len(lines) == len(rep.defect_trace) + 1


def test_report_json_nonfinite_becomes_null():
    rep = RectifyReport(Status.GATE_REJECTED, [], 0, float("inf"))
    doc = report_to_json(rep, RectifySettings(), None)
    assert doc["final_defect"] is None
    json.dumps(doc, allow_nan=False)


def test_same_seed_same_report():
    a = report_to_json(run_scenario(scenario("q8-u2", seed=5))[2], RectifySettings(), 5)
    b = report_to_json(run_scenario(scenario("q8-u2", seed=5))[2], RectifySettings(), 5)
    assert json.dumps(a) == json.dumps(b)

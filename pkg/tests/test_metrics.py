import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from geomgate import harness as hs
from geomgate.metrics import (FidelityKind, FidelityReport, images_from_unitary,
                              input_operators, project, state_averaged_fidelity,
                              state_averaged_values, theta_grid, trace_fidelity,
                              trace_fidelity_values)
from geomgate.pathdesign import not_gate
from geomgate.qlinalg import I2, SX

seeds = st.integers(0, 2**31)


def test_trace_fidelity_basics():
    u = unitary_group.rvs(3, random_state=1)
    assert trace_fidelity(u, u).value == pytest.approx(1.0, abs=1e-14)
    r = trace_fidelity(SX, 1j * SX)
    assert r.value == pytest.approx(1.0) and r.kind is FidelityKind.TRACE
    assert trace_fidelity(I2, SX).value == pytest.approx(0.0)


def test_trace_fidelity_rejects_bad_input():
    with pytest.raises(ValueError):
        trace_fidelity(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        trace_fidelity(np.array([[1, 1], [0, 1]]), np.eye(2))


@given(seeds, st.floats(-10, 10), st.floats(-10, 10))
def test_trace_fidelity_ignores_global_phase(seed, a, b):
    u = unitary_group.rvs(4, random_state=seed % 2**32)
    v = unitary_group.rvs(4, random_state=(seed + 1) % 2**32)
    base = trace_fidelity_values(u, v)
    assert trace_fidelity_values(np.exp(1j * a) * u, np.exp(1j * b) * v) == pytest.approx(base, abs=1e-14)
    assert base <= 1 + 1e-12


def test_theta_grid():
    th = theta_grid()
    assert len(th) == 1001 and th[0] == 0.0 and th[-1] < 2 * math.pi


def test_identity_against_not_is_one_half():
    images = images_from_unitary(I2, (0, 1))
    fid, leak = state_averaged_values(images, SX, (0, 1))
    # mean of sin^2(2 theta) over one period
    assert fid == pytest.approx(0.5, abs=1e-12)
    assert leak == pytest.approx(0.0, abs=1e-15)


@given(seeds)
def test_exact_evolution_scores_one(seed):
    u = unitary_group.rvs(2, random_state=seed % 2**32)
    r = state_averaged_fidelity(images_from_unitary(u, (0, 1)), u)
    assert abs(r.value - 1) < 1e-9


@pytest.mark.parametrize("lam", [0.0, 0.3, 1.0])
def test_dephased_identity(lam):
    # coherences scaled by lam: F = 3/4 + lam/4 against the identity target
    ops = input_operators(2, (0, 1))
    ops[1] *= lam
    ops[2] *= lam
    fid, _ = state_averaged_values(ops, I2, (0, 1))
    assert fid == pytest.approx(0.75 + 0.25 * lam, abs=1e-12)


def test_leakage_lowers_fidelity_without_renormalising():
    # |b> leaks half its population to level 2
    u = np.eye(3, dtype=complex)
    c = 1 / math.sqrt(2)
    u[:, 1] = [0, c, c]
    u[:, 2] = [0, -c, c]
    fid, leak = state_averaged_values(images_from_unitary(u, (0, 1)), I2, (0, 1))
    assert leak == pytest.approx(0.25, abs=1e-12)
    assert fid < 1 - 0.2


def test_project_and_embedding():
    u = np.arange(16).reshape(4, 4)
    assert np.array_equal(project(u, [1, 3]), [[5, 7], [13, 15]])
    ops = input_operators(4, (3, 1))
    assert ops[1, 3, 1] == 1 and ops[2, 1, 3] == 1


def test_report_validation():
    with pytest.raises(ValueError):
        FidelityReport(1.01, "StateAveraged")
    r = FidelityReport(1 + 5e-10, FidelityKind.TRACE)
    assert r.infidelity == pytest.approx(-5e-10)


def test_ideal_not_averaged_fidelity():
    cfg = hs.ideal_config(not_gate("geoB"), metric="averaged")
    r = hs.run_point(cfg, 0.0, 0.0)
    assert r.kind is FidelityKind.STATE_AVERAGED
    assert 1 - r.value < 1e-8


def test_dynamical_not_at_tenth_drift():
    r = hs.run_point(hs.ideal_config(not_gate("dyn")), 0.1, 0.0)
    assert r.kind is FidelityKind.TRACE
    assert r.value == pytest.approx(1 - (math.pi / 6) * 0.01, abs=3e-4)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.3))
def test_dynamical_infidelity_is_even_in_drift(d):
    cfg = hs.ideal_config(not_gate("dyn"))
    fid, _, _ = hs.evaluate_grid(cfg, [d, -d])
    assert abs(fid[0, 0] - fid[0, 1]) < 1e-9


def test_iswap_effective_noise_free():
    r = hs.run_point(hs.iswap_config("geoB", hs.Mode.EFFECTIVE), 0.0, 0.0)
    assert r.kind is FidelityKind.STATE_AVERAGED
    assert 1 - r.value < 1e-6
    assert 1 - r.metadata["trace_fidelity_subspace"] < 1e-6

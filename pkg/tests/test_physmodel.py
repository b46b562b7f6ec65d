import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

from geomgate import evolve as ev
from geomgate import harness as hs
from geomgate.metrics import trace_fidelity_values
from geomgate.pathdesign import PulseSegment, ShapeKind, design, not_gate
from geomgate.physmodel import (J1_PEAK, CoupledLabModel, CouplerParams, EffectiveModel,
                                InteractionFrameModel, NoiseModel, TransmonModel,
                                TransmonParams, TwoLevelModel, bessel_j, coupled_interaction_h,
                                coupled_lab_h, drift_profile, effective_two_qubit_h,
                                solve_beta, transmon_h, two_level_h)
from geomgate.qlinalg import SX, is_hermitian

TP = 2 * math.pi
Q1 = TransmonParams(TP * 5000, TP * 320, 3)
Q2 = TransmonParams(TP * 4500, TP * 300, 3)


def idx(n1, n2, q2=Q2):
    return n1 * q2.levels + n2


def coupler(g12=TP * 10, beta=1.0, phi=0.0, m_max=10):
    return CouplerParams(g12, TP * 500, beta * TP * 500, TP * 500, phi_mod=phi, m_max=m_max)


# --- single qubit ---------------------------------------------------------------

def test_two_level_resonant_drive():
    seg = PulseSegment(1.0, 2.0, 0.0)
    h = two_level_h(0.3, seg, NoiseModel(), 2.0, 1.0)
    assert np.allclose(h, SX)


def test_two_level_static_drift_entry():
    seg = PulseSegment(1.0, 2.0, 0.4)
    base = two_level_h(0.3, seg, NoiseModel(), 2.0, 1.0)
    h = two_level_h(0.3, seg, NoiseModel("static", 0.1), 2.0, 1.0)
    diff = h - base
    assert diff[1, 1] == pytest.approx(0.2)
    assert np.count_nonzero(np.abs(diff) > 1e-15) == 1


def test_two_level_rejects_time_outside_segment():
    seg = PulseSegment(1.0, 2.0, 0.0)
    with pytest.raises(ValueError):
        two_level_h(1.5, seg, NoiseModel(), 2.0, 1.0)


def test_sinusoidal_drift_vanishes_at_gate_edges():
    assert drift_profile("sin", [0.0, 6.0], 6.0) == pytest.approx([0.0, 0.0], abs=1e-15)
    assert drift_profile("sin", 3.0, 6.0) == pytest.approx(1.0)
    m = TwoLevelModel(design(not_gate("geoB", 3)), deltas=0.1, drift="sin")
    h = m(np.array([0.0, m.gate_duration]))
    assert abs(h[0, 1, 1]) < 1e-15 and abs(h[1, 1, 1]) < 1e-15


def test_noise_rejects_negative_rates():
    with pytest.raises(ValueError):
        NoiseModel(kappa_minus=-1e-3)


def test_transmon_params_validation():
    with pytest.raises(ValueError):
        TransmonParams(1.0, 0.0)
    with pytest.raises(ValueError):
        TransmonParams(1.0, 0.3, levels=2)


def _drag_segment(omega=TP * 60, dur=0.05, alpha=TP * 320):
    return PulseSegment(dur, omega, 0.7, shape=ShapeKind.SIN_SQUARED, drag_alpha=alpha)


def test_transmon_drive_vanishes_at_endpoints():
    p = TransmonParams(TP * 5000, TP * 320, 4)
    seg = _drag_segment()
    for t in (0.0, seg.duration):
        h = transmon_h(t, p, seg, p.omega)
        assert np.allclose(h - np.diag(np.diag(h)), 0, atol=1e-9)


def test_transmon_level_structure():
    p = TransmonParams(TP * 5000, TP * 320, 4)
    seg = _drag_segment()
    h = transmon_h(0.3 * seg.duration, p, seg, p.omega)
    assert h[2, 2].real == pytest.approx(0.5 * (4 * p.omega - 2 * p.alpha))
    assert abs(h[1, 2]) / abs(h[0, 1]) == pytest.approx(math.sqrt(2))
    assert is_hermitian(h)


def test_transmon_needs_drag():
    p = TransmonParams(TP * 5000, TP * 320, 4)
    with pytest.raises(ValueError):
        transmon_h(0.0, p, PulseSegment(0.05, 1.0, 0.0), p.omega)
    with pytest.raises(ValueError):
        TransmonModel(design(not_gate("geoB"), omega=1.0), p)


def test_transmon_truncation_converged():
    states = []
    for levels in (4, 5):
        cfg = hs.transmon_config(not_gate("geoB", 2), levels=levels)
        seq = hs.build_sequence(cfg)
        u = ev.propagate_unitary(TransmonModel(seq, cfg.transmon), seq.breakpoints,
                                 ev.EvolutionConfig(dt_div=4000))
        states.append(u[:, :2])
    for j in range(2):
        small = np.pad(states[0][:, j], (0, 1))
        assert 1 - abs(np.vdot(small, states[1][:, j])) < 1e-6


# --- two transmons ---------------------------------------------------------------

def test_coupled_lab_matrix_elements():
    c = coupler()
    h = coupled_lab_h(0.0123, Q1, Q2, c)
    g = c.g12
    assert h[idx(1, 0), idx(0, 1)] == pytest.approx(g)
    assert h[idx(2, 0), idx(1, 1)] == pytest.approx(math.sqrt(2) * g)
    assert is_hermitian(h)
    free = coupled_lab_h(0.3, Q1, Q2, CouplerParams(0.0, TP * 500, 0.0, TP * 500))
    assert np.allclose(free, np.diag(np.diag(free)))


def test_interaction_frame_without_modulation():
    c = CouplerParams(TP * 10, TP * 500, 0.0, TP * 500)
    t = 0.0371
    h = coupled_interaction_h(t, Q1, Q2, c)
    assert h[idx(1, 0), idx(0, 1)] == pytest.approx(c.g12 * np.exp(1j * TP * 500 * t))


def _period_average(h, element, period, n=4000):
    ts = np.arange(n) * period / n
    return np.mean(h(ts)[:, element[0], element[1]])


def test_resonant_sideband_is_static_part():
    phi = 0.37
    c = coupler(beta=0.9, phi=phi)
    avg = _period_average(InteractionFrameModel(Q1, Q2, c), (idx(1, 0), idx(0, 1)), TP / c.nu)
    assert avg == pytest.approx(bessel_j(1, c.beta) * c.g12 * np.exp(-1j * (phi + math.pi / 2)),
                                abs=1e-9)


def test_leakage_element_averages_out():
    c = coupler(beta=0.9)
    # all retained frequencies are multiples of 2 pi x 100 MHz
    avg = _period_average(InteractionFrameModel(Q1, Q2, c), (idx(1, 1), idx(0, 2)), TP / (TP * 100))
    assert abs(avg) < 1e-10 * c.g12


def test_effective_hamiltonian():
    assert np.allclose(effective_two_qubit_h(CouplerParams(TP * 10, TP * 500, 0.0, TP * 500)), 0)
    c = coupler(phi=math.pi / 2)
    assert np.allclose(effective_two_qubit_h(c), -c.g_eff * SX)
    with pytest.raises(ValueError):
        effective_two_qubit_h(CouplerParams(TP * 10, TP * 500, 1.0, TP * 400))


def test_coupler_validation():
    with pytest.raises(ValueError):
        CouplerParams(1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        CouplerParams(1.0, 1.0, 1.0, 1.0, m_max=0)
    with pytest.raises(ValueError):
        solve_beta(0.6, 1.0)


def test_resonant_coupler_reaches_requested_coupling():
    c = CouplerParams.resonant(TP * 10, TP * 500, TP * 4)
    assert c.g_eff == pytest.approx(TP * 4, rel=1e-12)
    assert c.nu == c.delta1 and c.beta < J1_PEAK


@pytest.mark.parametrize("model", ["interaction", "effective", "lab"])
def test_models_are_hermitian(model):
    c = CouplerParams.resonant(TP * 10, TP * 500, TP * 4)
    seq = hs.build_sequence(hs.iswap_config("geoB"))
    cls = {"interaction": InteractionFrameModel, "effective": EffectiveModel,
           "lab": CoupledLabModel}[model]
    m = cls(Q1, Q2, c, seq, deltas=np.array([0.0, TP * 1.5]))
    ts = np.random.default_rng(5).uniform(0, seq.total_duration, 1000)
    h = m(ts)
    scale = np.max(np.abs(h))
    assert np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))) <= 1e-12 * scale


def test_single_qubit_models_are_hermitian():
    ts = np.random.default_rng(6).uniform(0, 2 * math.pi, 1000)
    h = TwoLevelModel(design(not_gate("geoB")), deltas=np.array([0.1, -0.05]))(ts)
    assert np.array_equal(h, np.conj(np.swapaxes(h, -1, -2)))
    cfg = hs.transmon_config(not_gate("geoB", 2))
    seq = hs.build_sequence(cfg)
    h = TransmonModel(seq, cfg.transmon, deltas=TP * 0.2)(ts * seq.total_duration / (2 * math.pi))
    assert np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))) <= 1e-12 * np.max(np.abs(h))


def test_frame_equivalence():
    c = CouplerParams.resonant(TP * 10, TP * 500, TP * 4)
    seq = hs.build_sequence(hs.iswap_config("geoB"))
    cfg = ev.EvolutionConfig(dt_div=20000)
    ui = ev.propagate_unitary(InteractionFrameModel(Q1, Q2, c, seq), seq.breakpoints, cfg)
    lab = CoupledLabModel(Q1, Q2, c, seq)
    ul = ev.propagate_unitary(lab, seq.breakpoints, cfg, kicks=lab.boundary_kicks())
    t_end = seq.total_duration
    moved = np.conj(lab.frame(t_end, len(seq.segments) - 1)).T @ ul @ lab.frame(0.0, 0)
    assert trace_fidelity_values(ui, moved) >= 1 - 1e-4


def test_rwa_improves_with_weaker_coupling():
    spec = hs.iswap_gate("geoB")
    cfg = ev.EvolutionConfig(dt_div=20000)
    errors = []
    for g in (10.0, 5.0, 2.5):
        c = coupler(g12=TP * g)
        seq = design(spec, omega=2 * c.g_eff)
        ui = ev.propagate_unitary(InteractionFrameModel(Q1, Q2, c, seq), seq.breakpoints, cfg)
        ue = ev.propagate_unitary(EffectiveModel(Q1, Q2, c, seq), seq.breakpoints, cfg)
        errors.append(1 - trace_fidelity_values(ue, ui))
    assert errors[0] > errors[1] > errors[2]


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_sideband_truncation(beta):
    spec = hs.iswap_gate("geoB")
    cfg = ev.EvolutionConfig(dt_div=20000)
    us = []
    for m_max in (5, 10):
        c = coupler(beta=beta, m_max=m_max)
        seq = design(spec, omega=2 * c.g_eff)
        us.append(ev.propagate_unitary(InteractionFrameModel(Q1, Q2, c, seq), seq.breakpoints, cfg))
    assert np.max(np.abs(us[0] - us[1])) < 1e-6


# --- Bessel functions -------------------------------------------------------------

def test_bessel_small_argument_and_origin():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0
    for b in (1e-4, 3e-5, 1e-6):
        assert abs(bessel_j(1, b) / (b / 2) - 1) < 1e-8


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_bessel_normalisation(beta):
    total = sum(bessel_j(m, beta) ** 2 for m in range(-20, 21))
    assert abs(total - 1) < 1e-10


def test_bessel_first_peak():
    assert J1_PEAK == pytest.approx(1.8412, abs=1e-4)
    assert bessel_j(1, 1.8412) == pytest.approx(0.5819, abs=5e-5)


@settings(max_examples=200)
@given(st.integers(-20, 20), st.floats(-20, 20))
def test_bessel_matches_scipy(m, beta):
    assert abs(bessel_j(m, beta) - scipy.special.jv(m, beta)) < 1e-12


@given(st.integers(1, 20), st.floats(-20, 20))
def test_bessel_negative_order(m, beta):
    assert bessel_j(-m, beta) == (-1) ** m * bessel_j(m, beta)


def test_bessel_range_checks():
    with pytest.raises(ValueError):
        bessel_j(21, 1.0)
    with pytest.raises(ValueError):
        bessel_j(1, 25.0)
    with pytest.raises(ValueError):
        bessel_j(1.5, 1.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import Y
from spinladder.experiment import (
    CoherenceWarning,
    DensityMatrix,
    all_oracles,
    classify,
    dephase,
    detect_spectrum,
    equilibrium_state,
    evolve,
    expected_inverted,
    linear_readout,
    pps_000,
    pure_state,
    reference_spectrum,
    run_all,
    run_dj,
    small_angle_readout,
    spectrum_ascii,
    spectrum_csv,
    superposition_state,
)
from spinladder.operators import spin_operators
from spinladder.pulses import hard_pulse_propagator
from spinladder.synth import DiagonalGateSpec, InvalidOracleError

SQ = np.sqrt([1, 7, 21, 35, 35, 21, 7, 1])


def ratios(lines):
    v = np.array([ln.intensity for ln in lines])
    return v / v[0]


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(2), "deviation")
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]), "full")
    assert DensityMatrix(np.eye(2) / 2, "full").dim == 2


def test_equilibrium(sys72):
    rho = equilibrium_state(sys72)
    assert np.allclose(rho.matrix, np.diag([3.5, 2.5, 1.5, 0.5, -0.5, -1.5, -2.5, -3.5]))
    assert abs(np.trace(rho.matrix)) < 1e-15


def test_equilibrium_after_pi_half_is_ix(sys72):
    ix, _, _ = spin_operators(3.5)
    rho = evolve(equilibrium_state(sys72), hard_pulse_propagator(8, math.pi / 2, Y))
    assert np.allclose(rho.matrix, ix, atol=1e-13)
    assert np.allclose(ratios(detect_spectrum(rho, sys72)) * 7, [7, 12, 15, 16, 15, 12, 7], rtol=1e-12)


def test_pps(sys72):
    rho = pps_000(sys72)
    assert np.allclose(rho.matrix, np.diag([3.5] + [-0.5] * 7))
    assert np.array_equal(dephase(rho).matrix, rho.matrix)


def test_pure_superposition_matches_printed_density(sys72):
    psi = np.zeros(8)
    psi[0] = 1
    sigma = evolve(pure_state(psi), hard_pulse_propagator(8, math.pi / 2, Y))
    assert np.allclose(sigma.matrix, np.outer(SQ, SQ) / 128, atol=1e-14)
    assert np.allclose(np.diag(dephase(sigma).matrix), np.array([1, 7, 21, 35, 35, 21, 7, 1]) / 128)
    assert sigma.matrix[0, 1] == pytest.approx(math.sqrt(7) / 128)
    assert sigma.matrix[3, 4] == pytest.approx(35 / 128)


def hermitian(n=8):
    return arrays(np.float64, (2, n, n), elements=st.floats(-5, 5)).map(lambda a: a[0] + 1j * a[1]).map(
        lambda m: m + m.conj().T)


@settings(max_examples=100, deadline=None)
@given(hermitian())
def test_dephase_and_evolve_preserve_trace(m):
    m = m - np.trace(m) / 8 * np.eye(8)
    rho = DensityMatrix(m)
    d = dephase(rho)
    assert abs(np.trace(d.matrix) - np.trace(m)) < 1e-12
    assert np.allclose(np.diag(d.matrix), np.diag(m))
    u = hard_pulse_propagator(8, 1.234, 0.3)
    e = evolve(rho, u)
    assert abs(np.trace(e.matrix)) < 1e-10
    assert np.allclose(e.matrix, e.matrix.conj().T, atol=1e-12)


def test_evolve_identity_and_rejects_nonunitary(sys72):
    rho = equilibrium_state(sys72)
    assert np.allclose(evolve(rho, np.eye(8)).matrix, rho.matrix)
    with pytest.raises(ValueError):
        evolve(rho, 1.01 * np.eye(8))


def test_superposition_spectrum(sys72):
    assert np.allclose(ratios(reference_spectrum(sys72)) * 7, [7, 42, 105, 140, 105, 42, 7], rtol=1e-12)


def test_diagonal_state_no_signal(sys72):
    assert all(ln.intensity == 0 for ln in detect_spectrum(equilibrium_state(sys72), sys72))


def test_detection_is_linear(sys72, rng):
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    r1 = DensityMatrix(a + a.conj().T - np.trace(a + a.conj().T) / 8 * np.eye(8))
    r2 = DensityMatrix(b + b.conj().T - np.trace(b + b.conj().T) / 8 * np.eye(8))
    al, be = 0.7, -2.3
    mix = DensityMatrix(al * r1.matrix + be * r2.matrix)
    for lm, l1, l2 in zip(detect_spectrum(mix, sys72), detect_spectrum(r1, sys72), detect_spectrum(r2, sys72)):
        assert lm.amplitude == pytest.approx(al * l1.amplitude + be * l2.amplitude, abs=1e-12)


def test_small_angle_readout_equilibrium(sys72):
    theta = math.radians(5)
    lines = small_angle_readout(equilibrium_state(sys72), theta, sys72)
    assert np.allclose(ratios(lines) * 7, [7, 12, 15, 16, 15, 12, 7], rtol=0.02)
    lin = linear_readout(equilibrium_state(sys72), theta, sys72)
    assert np.allclose([ln.intensity for ln in lines], lin, rtol=0.02)


def test_small_angle_readout_pps_second_order(sys72):
    # exact ratio b/a for a pseudo-pure |1> after a rotation theta: 6 tan^2(theta/2)
    for deg in (1, 5, 10):
        theta = math.radians(deg)
        lines = small_angle_readout(pps_000(sys72), theta, sys72)
        assert lines[1].intensity / lines[0].intensity == pytest.approx(6 * math.tan(theta / 2) ** 2, rel=1e-9)
        assert all(ln.intensity <= lines[1].intensity for ln in lines[2:])


def test_small_angle_zero_and_warning(sys72):
    assert all(ln.intensity < 1e-14 for ln in small_angle_readout(equilibrium_state(sys72), 0.0, sys72))
    with pytest.warns(CoherenceWarning):
        small_angle_readout(superposition_state(sys72), 0.1, sys72)


def test_classify_reference_vs_itself(sys72):
    ref = reference_spectrum(sys72)
    assert classify(ref, ref) == ("constant", frozenset())
    with pytest.raises(ValueError):
        classify(ref[:-1], ref)


def test_run_dj_constant_and_1234(sys72):
    c = run_dj("constant", sys72)
    assert c.classification == "constant" and c.inverted == frozenset()
    assert [ln.amplitude for ln in c.spectrum] == pytest.approx([ln.amplitude for ln in reference_spectrum(sys72)])
    b = run_dj("U(1,2,3,4)", sys72)
    assert b.classification == "balanced" and b.inverted == {"d"}
    assert b.fidelity >= 1 - 1e-9


def brute_force_inverted(klm):
    d = [-1 if i in (1, *klm) else 1 for i in range(1, 9)]
    return {"abcdefg"[m] for m in range(7) if d[m] * d[m + 1] == -1}


def test_1458_fingerprint():
    assert brute_force_inverted((4, 5, 8)) == {"a", "c", "e", "g"}
    assert run_dj("U(1,4,5,8)").inverted == {"a", "c", "e", "g"}


def test_all_fingerprints_against_brute_force():
    res = run_all()
    assert len(res) == 37
    for out, o in zip(res, all_oracles()):
        assert out.correct
        if isinstance(o, tuple):
            assert out.inverted == brute_force_inverted(o)
            assert out.inverted == expected_inverted(DiagonalGateSpec.oracle(*o).phases)
    fps = [r.inverted for r in res[2:]]
    # with level 1 pinned to -1 the sign pattern is recoverable from its flips
    assert len(set(fps)) == 35


def test_models_agree():
    ideal = run_all(model="ideal")
    refoc = run_all(model="refocused_ideal")
    assert [(r.classification, r.inverted) for r in ideal] == [(r.classification, r.inverted) for r in refoc]


@pytest.mark.parametrize("oracle", ["U(1,2,3,4)", "U(1,4,5,8)", "U(1,6,7,8)"])
def test_time_domain_model_fingerprints(oracle):
    assert run_dj(oracle, model="time_domain").inverted == run_dj(oracle).inverted


@pytest.mark.parametrize("bad", ["U(1,1,2,3)", "U(2,3,4,5)", "nonsense", "U(1,5,4,3)"])
def test_run_dj_invalid(bad):
    with pytest.raises(InvalidOracleError):
        run_dj(bad)


def test_spectrum_renderers(sys72):
    lines = run_dj("U(1,2,3,4)").spectrum
    csv_text = spectrum_csv(lines)
    rows = csv_text.strip().splitlines()
    assert rows[0] == "label,frequency_hz,intensity,phase_deg"
    assert rows[4].startswith("d,0.000000,") and rows[4].endswith(",180.000000")
    art = spectrum_ascii(lines).splitlines()
    assert len(art) == 7 and "#|" in art[3] and "|#" in art[0]

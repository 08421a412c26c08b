"""Density-matrix pipeline for the three-qubit phase-oracle algorithm.

States are deviation matrices unless marked ``full``. The readout signal
of line (m, m+1) is rho[m, m+1] * Ix[m+1, m]; a line counts as inverted
when its phase sits within INVERSION_BAND_DEG of 180 degrees from the
matching line of the reference (constant-oracle) spectrum.
"""
from __future__ import annotations

import csv
import io
import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .operators import SpinSystem, is_hermitian, spin_operators, transition_frequencies, transition_label
from .pulses import hard_pulse_propagator, sequence_propagator
from .synth import (
    DiagonalGateSpec,
    GatePlan,
    InvalidOracleError,
    enumerate_balanced_oracles,
    merge_plan,
    plan_sequence,
    synth_diagonal,
    synth_dj_oracle,
    verify_plan,
)

INVERSION_BAND_DEG = 15.0
MIN_RELATIVE_INTENSITY = 1e-6
UNITARY_CHECK_TOL = 1e-8


class CoherenceWarning(UserWarning):
    """Small-angle readout applied to a state that already carries coherences."""


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    kind: str = "deviation"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if self.kind not in ("full", "deviation"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if not is_hermitian(m):
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        scale = max(1.0, float(np.max(np.abs(m))))
        if self.kind == "full":
            if abs(tr - 1) > 1e-10:
                raise ValueError(f"full density matrix has trace {tr}")
            if np.min(np.linalg.eigvalsh(m)) < -1e-12:
                raise ValueError("full density matrix is not positive semidefinite")
        elif abs(tr) > 1e-10 * scale:
            raise ValueError(f"deviation matrix has trace {tr}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectralLine:
    label: str
    transition: tuple[int, int]
    frequency_hz: float
    amplitude: complex

    @property
    def intensity(self) -> float:
        return abs(self.amplitude)

    @property
    def phase_deg(self) -> float:
        return math.degrees(math.atan2(self.amplitude.imag, self.amplitude.real))


@dataclass
class DJOutcome:
    oracle: str
    spectrum: list[SpectralLine]
    inverted: frozenset[str]
    classification: str
    expected: str
    fidelity: float
    program: list[str] = field(default_factory=list)

    @property
    def correct(self) -> bool:
        return self.classification == self.expected


def equilibrium_state(sys: SpinSystem) -> DensityMatrix:
    """High-field deviation matrix, normalised as Iz."""
    _, _, iz = spin_operators(sys.spin)
    return DensityMatrix(iz)


def pps_000(sys: SpinSystem) -> DensityMatrix:
    """Level 1 keeps its equilibrium population; the rest share their mean."""
    p = np.real(np.diag(equilibrium_state(sys).matrix)).copy()
    p[1:] = p[1:].mean()
    return DensityMatrix(np.diag(p))


def dephase(rho: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.diag(np.diag(rho.matrix)), rho.kind)


def evolve(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    u = np.asarray(u, dtype=complex)
    if u.shape != rho.matrix.shape:
        raise ValueError(f"propagator shape {u.shape} does not match state {rho.matrix.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > UNITARY_CHECK_TOL:
        raise ValueError("propagator is not unitary")
    out = u @ rho.matrix @ u.conj().T
    return DensityMatrix((out + out.conj().T) / 2, rho.kind)


def pure_state(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()), "full")


def superposition_state(sys: SpinSystem) -> DensityMatrix:
    return evolve(pps_000(sys), hard_pulse_propagator(sys.dim, math.pi / 2, math.pi / 2))


def detect_spectrum(rho: DensityMatrix, sys: SpinSystem) -> list[SpectralLine]:
    if rho.dim != sys.dim:
        raise ValueError(f"state dim {rho.dim} does not match system dim {sys.dim}")
    ix, _, _ = spin_operators(sys.spin)
    lines = []
    for (r, s), freq in transition_frequencies(sys):
        amp = complex(rho.matrix[r - 1, s - 1] * ix[s - 1, r - 1])
        lines.append(SpectralLine(transition_label(r), (r, s), freq, amp))
    return lines


def small_angle_readout(rho: DensityMatrix, theta: float, sys: SpinSystem) -> list[SpectralLine]:
    """Spectrum after a small (pi/2-phase) pulse.

    To first order the line (m, m+1) reads theta * (p_m - p_{m+1}) * |Ix_{m,m+1}|^2.
    The exact propagation is returned, not the linearisation.
    """
    off = rho.matrix - np.diag(np.diag(rho.matrix))
    if np.max(np.abs(off), initial=0.0) > 1e-12 * max(1.0, float(np.max(np.abs(rho.matrix)))):
        warnings.warn("readout state has coherences; populations are not cleanly resolved",
                      CoherenceWarning, stacklevel=2)
    return detect_spectrum(evolve(rho, hard_pulse_propagator(sys.dim, theta, math.pi / 2)), sys)


def linear_readout(rho: DensityMatrix, theta: float, sys: SpinSystem) -> list[float]:
    ix, _, _ = spin_operators(sys.spin)
    p = np.real(np.diag(rho.matrix))
    return [theta * (p[m] - p[m + 1]) * abs(ix[m, m + 1]) ** 2 for m in range(sys.dim - 1)]


def _phase_diff(a: float, b: float) -> float:
    return (a - b + 180.0) % 360.0 - 180.0


def classify(spectrum, reference) -> tuple[str, frozenset[str]]:
    """Return ("constant" | "balanced", inverted labels)."""
    if [ln.label for ln in spectrum] != [ln.label for ln in reference]:
        raise ValueError("spectrum and reference have different line sets")
    peak = max((ln.intensity for ln in spectrum), default=0.0)
    inverted = set()
    for line, ref in zip(spectrum, reference):
        if peak == 0 or line.intensity < MIN_RELATIVE_INTENSITY * peak:
            continue
        if abs(abs(_phase_diff(line.phase_deg, ref.phase_deg)) - 180.0) <= INVERSION_BAND_DEG:
            inverted.add(line.label)
    return ("balanced" if inverted else "constant"), frozenset(inverted)


_ORACLE_RE = re.compile(r"^\s*U?\s*\(\s*1\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$", re.I)


def parse_oracle(expr) -> str | tuple[int, int, int]:
    """'constant', 'constant-2', 'Uc1', 'U(1,k,l,m)' or a (k, l, m) tuple."""
    if isinstance(expr, tuple):
        k, l, m = expr
        DiagonalGateSpec.oracle(k, l, m)
        return (k, l, m)
    text = str(expr).strip().lower()
    if text in ("constant", "constant-1", "c1", "uc1"):
        return "constant-1"
    if text in ("constant-2", "c2", "uc2"):
        return "constant-2"
    m = _ORACLE_RE.match(text)
    if not m:
        raise InvalidOracleError(f"cannot parse oracle {expr!r}")
    klm = tuple(int(g) for g in m.groups())
    DiagonalGateSpec.oracle(*klm)
    return klm


def oracle_name(oracle) -> str:
    return oracle if isinstance(oracle, str) else "U(1,{},{},{})".format(*oracle)


def oracle_spec_and_plan(oracle) -> tuple[DiagonalGateSpec, GatePlan]:
    if oracle == "constant-1":
        spec = DiagonalGateSpec.constant(1)
        return spec, merge_plan(synth_diagonal(spec))
    if oracle == "constant-2":
        spec = DiagonalGateSpec.constant(2)
        return spec, merge_plan(synth_diagonal(spec))
    return DiagonalGateSpec.oracle(*oracle), synth_dj_oracle(*oracle)


def reference_spectrum(sys: SpinSystem) -> list[SpectralLine]:
    return detect_spectrum(superposition_state(sys), sys)


def run_dj(oracle="constant", sys: SpinSystem | None = None, model: str = "ideal",
           reference: list[SpectralLine] | None = None) -> DJOutcome:
    """PPS -> (pi/2)_y -> compiled oracle -> spectrum -> classification.

    The closing pseudo-Hadamard and the readout pulse cancel, so the
    spectrum is taken straight after the oracle.
    """
    sys = sys or SpinSystem()
    if sys.dim != 8:
        raise InvalidOracleError("the oracle pipeline runs on the 8-level ladder")
    oracle = parse_oracle(oracle)
    spec, plan = oracle_spec_and_plan(oracle)
    reference = reference if reference is not None else reference_spectrum(sys)
    seq = plan_sequence(plan, sys, model=model)
    rho = evolve(superposition_state(sys), sequence_propagator(seq, model))
    spectrum = detect_spectrum(rho, sys)
    cls, inverted = classify(spectrum, reference)
    expected = "constant" if isinstance(oracle, str) else "balanced"
    return DJOutcome(
        oracle=oracle_name(oracle),
        spectrum=spectrum,
        inverted=inverted,
        classification=cls,
        expected=expected,
        fidelity=verify_plan(plan, spec, sys),
        program=program_text(plan),
    )


def all_oracles() -> list:
    return ["constant-1", "constant-2"] + enumerate_balanced_oracles()


def run_all(sys: SpinSystem | None = None, model: str = "ideal") -> list[DJOutcome]:
    sys = sys or SpinSystem()
    ref = reference_spectrum(sys)
    return [run_dj(o, sys, model, ref) for o in all_oracles()]


def expected_inverted(phases) -> frozenset[str]:
    """Lines whose two levels carry opposite signs in a +-1 diagonal."""
    d = np.exp(1j * np.asarray(phases))
    return frozenset(
        transition_label(m + 1) for m in range(len(d) - 1) if (d[m] * d[m + 1].conjugate()).real < 0
    )


def program_text(plan: GatePlan) -> list[str]:
    out = []
    for layer, labels in zip(plan.layers, plan.layer_labels()):
        lab = ",".join(labels)
        if all(p.is_full_turn for p in layer):
            out.append(f"(2pi)^{{{lab}}}")
        else:
            first = ",".join(_fmt_deg(p.pulse_phases[0]) for p in sorted(layer, key=lambda p: p.r))
            second = ",".join(_fmt_deg(p.pulse_phases[1]) for p in sorted(layer, key=lambda p: p.r))
            out.append(f"(pi)_{{{first}}}^{{{lab}}}")
            out.append(f"(pi)_{{{second}}}^{{{lab}}}")
    return out


def _fmt_deg(rad: float) -> str:
    d = round(math.degrees(rad) % 360.0, 4) % 360.0
    return "y" if d == 90.0 else f"{d:g}"


def spectrum_csv(lines) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "frequency_hz", "intensity", "phase_deg"])
    for ln in lines:
        w.writerow([ln.label, f"{ln.frequency_hz:.6f}", f"{ln.intensity:.12g}", f"{_clean_deg(ln.phase_deg):.6f}"])
    return buf.getvalue()


def _clean_deg(d: float) -> float:
    d = round(d, 6)
    if d == -180.0:
        d = 180.0
    return 0.0 if d == 0 else d


def spectrum_ascii(lines, width: int = 40) -> str:
    """Stick plot, one row per line; bars point left for negative lines."""
    peak = max((ln.intensity for ln in lines), default=0.0) or 1.0
    rows = []
    for ln in lines:
        n = round(width * ln.intensity / peak)
        sign = -1 if abs(_clean_deg(ln.phase_deg)) > 90 else 1
        bar = ("#" * n).rjust(width) + "|" + " " * width if sign < 0 else " " * width + "|" + "#" * n
        rows.append(f"{ln.label} {ln.frequency_hz:+10.1f} Hz {bar.rstrip()}  {ln.intensity / peak:7.4f} {_clean_deg(ln.phase_deg):+8.2f} deg")
    return "\n".join(rows) + "\n"

"""Spin operators and the first-order quadrupolar Hamiltonian.

Basis convention: index 1 (row 0) is M = +I, descending to M = -I. For
spin 7/2 this gives the eight three-qubit labels |000>, |001>, ..., |111>.
Hamiltonians are angular frequencies (rad/s); durations are seconds.
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


class InvalidSpinError(ValueError):
    """Spin quantum number is not a non-negative half-integer."""


class DomainError(ValueError):
    """Operator lies outside the domain an operation accepts."""


def parse_spin(value) -> Fraction:
    """Accept 3.5, "7/2", Fraction(7, 2) ... and return an exact Fraction."""
    try:
        frac = Fraction(value.strip() if isinstance(value, str) else value)
    except (TypeError, ValueError) as exc:
        raise InvalidSpinError(f"invalid spin {value!r}") from exc
    if (2 * frac).denominator != 1 or frac < Fraction(1, 2):
        raise InvalidSpinError(f"spin {value!r} is not a half-integer >= 1/2")
    return frac


def spin_dim(spin) -> int:
    return int(2 * parse_spin(spin)) + 1


def spin_from_dim(dim: int) -> Fraction:
    if dim < 2:
        raise InvalidSpinError(f"dimension {dim} too small for a spin ladder")
    return Fraction(dim - 1, 2)


@dataclass(frozen=True)
class SpinSystem:
    """An isolated quadrupolar spin in a strong field.

    ``line_spacing_hz`` is the observed spacing between adjacent
    single-quantum lines. The coupling constant that multiplies
    ``3Iz^2 - I(I+1)`` is derived from it (see :attr:`coupling_hz`).
    """

    spin: Fraction = Fraction(7, 2)
    larmor_hz: float = 0.0
    line_spacing_hz: float = 6856.0

    def __post_init__(self):
        object.__setattr__(self, "spin", parse_spin(self.spin))
        if not math.isfinite(self.line_spacing_hz) or self.line_spacing_hz < 0:
            raise ValueError("line_spacing_hz must be finite and non-negative")

    @property
    def dim(self) -> int:
        return int(2 * self.spin) + 1

    @property
    def coupling_hz(self) -> float:
        # adjacent lines of 3Iz^2 are 6 units apart
        return self.line_spacing_hz / 6.0

    @property
    def n_transitions(self) -> int:
        return self.dim - 1


@dataclass(frozen=True)
class LevelLabel:
    index: int
    dim: int

    def __post_init__(self):
        if not 1 <= self.index <= self.dim:
            raise ValueError(f"level {self.index} outside 1..{self.dim}")

    @property
    def m_quantum(self) -> Fraction:
        return spin_from_dim(self.dim) - (self.index - 1)

    @property
    def bit_string(self) -> str:
        """Binary label, e.g. index 1 -> '000'. Only defined when dim is a power of 2."""
        n = self.dim.bit_length() - 1
        if 1 << n != self.dim:
            raise ValueError(f"dimension {self.dim} is not a power of two")
        return format(self.index - 1, f"0{n}b")

    @classmethod
    def from_bits(cls, bits: str) -> "LevelLabel":
        return cls(int(bits, 2) + 1, 1 << len(bits))

    @classmethod
    def from_m(cls, m, dim: int) -> "LevelLabel":
        idx = spin_from_dim(dim) - Fraction(m) + 1
        if idx.denominator != 1:
            raise ValueError(f"M={m} not a level of a {dim}-level ladder")
        return cls(int(idx), dim)


def transition_label(r: int) -> str:
    """Letter for transition (r, r+1): 1 -> 'a', 2 -> 'b', ..."""
    if not 1 <= r <= 26:
        raise ValueError(f"no letter for transition starting at level {r}")
    return string.ascii_lowercase[r - 1]


def transition_from_label(label: str) -> tuple[int, int]:
    label = label.strip().lower()
    if len(label) != 1 or label not in string.ascii_lowercase:
        raise ValueError(f"bad transition label {label!r}")
    r = string.ascii_lowercase.index(label) + 1
    return r, r + 1


def ladder_operators(spin) -> tuple[np.ndarray, np.ndarray]:
    """Raising and lowering operators in the descending-M basis."""
    I = parse_spin(spin)
    dim = int(2 * I) + 1
    m = np.array([float(I - k) for k in range(dim)])
    j = float(I)
    iplus = np.zeros((dim, dim), dtype=complex)
    # I+ |M> = sqrt((I-M)(I+M+1)) |M+1>; |M+1> sits one row above |M>
    for col in range(1, dim):
        mm = m[col]
        iplus[col - 1, col] = math.sqrt((j - mm) * (j + mm + 1))
    return iplus, iplus.conj().T.copy()


def spin_operators(spin) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    iplus, iminus = ladder_operators(spin)
    I = parse_spin(spin)
    ix = (iplus + iminus) / 2
    iy = (iplus - iminus) / 2j
    iz = np.diag([float(I - k) for k in range(int(2 * I) + 1)]).astype(complex)
    return ix, iy, iz


def _quadrupolar_pattern(spin) -> np.ndarray:
    """Diagonal of 3Iz^2 - I(I+1), as exact multiples of 1/4."""
    I = parse_spin(spin)
    ms = [I - k for k in range(int(2 * I) + 1)]
    return np.array([float(3 * m * m - I * (I + 1)) for m in ms])


def quadrupolar_hamiltonian(sys: SpinSystem) -> np.ndarray:
    diag = 2 * math.pi * sys.coupling_hz * _quadrupolar_pattern(sys.spin)
    return np.diag(diag).astype(complex)


def rotating_frame_hamiltonian(sys: SpinSystem) -> np.ndarray:
    # the reference sits on the central transition, so the Zeeman term drops out
    return quadrupolar_hamiltonian(sys)


def lab_frame_hamiltonian(sys: SpinSystem) -> np.ndarray:
    _, _, iz = spin_operators(sys.spin)
    return 2 * math.pi * sys.larmor_hz * iz + quadrupolar_hamiltonian(sys)


def transition_frequencies(sys: SpinSystem) -> list[tuple[tuple[int, int], float]]:
    """Single-quantum transitions (r, r+1) with their rotating-frame offsets in Hz.

    The offset is (E_r - E_{r+1}) / 2pi, so an RF component at this offset is
    resonant with the transition.
    """
    energies = sys.coupling_hz * _quadrupolar_pattern(sys.spin)
    return [((r, r + 1), float(energies[r - 1] - energies[r])) for r in range(1, sys.dim)]


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= tol * scale)


def unitarity_error(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def hermitian_propagator(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) by eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError("Hamiltonian must be square")
    if not is_hermitian(h):
        raise DomainError("Hamiltonian is not Hermitian")
    h = (h + h.conj().T) / 2
    if not np.any(h - np.diag(np.diag(h))):
        return np.diag(np.exp(-1j * np.real(np.diag(h)) * t))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def quadrupolar_gcd(spin) -> Fraction:
    """GCD of all pairwise eigenvalue gaps of 3Iz^2 - I(I+1) (0 if degenerate)."""
    I = parse_spin(spin)
    vals = sorted({3 * (I - k) ** 2 for k in range(int(2 * I) + 1)})
    gaps = [int((v - vals[0]) * 4) for v in vals[1:]]
    g = reduce(math.gcd, gaps, 0)
    return Fraction(g, 4)

"""Pulse primitives and their propagators.

Selective pulses act on the fictitious spin-1/2 of one single-quantum
transition (r, r+1). A multi-frequency (MF) pulse drives several such
transitions at once; that is only a product of independent rotations
when no two transitions share a level, which is enforced here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    DomainError,
    SpinSystem,
    hermitian_propagator,
    quadrupolar_gcd,
    quadrupolar_hamiltonian,
    spin_from_dim,
    spin_operators,
    transition_frequencies,
)

KINDS = ("selective", "multi_frequency", "hard", "delay")
MODELS = ("ideal", "refocused_ideal", "time_domain")

# soft pulses default to this many refocusing periods
DEFAULT_REFOCUS_PERIODS = 40
MAX_STEP_ROTATION = 0.1


class InvalidTransitionError(ValueError):
    pass


class MergeConflictError(ValueError):
    """Two driven transitions share a level, so their generators do not commute."""


class NoRefocusError(ValueError):
    pass


class ResolutionError(ValueError):
    """Time step too coarse for the piecewise-constant integrator."""


def _check_transition(dim: int, r: int, s: int) -> None:
    if not (1 <= r < s <= dim):
        raise InvalidTransitionError(f"transition ({r},{s}) invalid for dim {dim}")


def shares_level(transitions) -> bool:
    levels = [lvl for t in transitions for lvl in t]
    return len(levels) != len(set(levels))


@dataclass(frozen=True)
class PulseEvent:
    """One pulse (or delay) in a sequence.

    ``flip_angles`` and ``phases`` are radians, one entry per transition.
    Hard pulses carry a single flip/phase and no transitions; delays carry
    neither. ``duration`` is in seconds and may be 0 for ideal pulses.
    """

    kind: str
    transitions: tuple[tuple[int, int], ...] = ()
    flip_angles: tuple[float, ...] = ()
    phases: tuple[float, ...] = ()
    duration: float = 0.0
    model: str = "ideal"

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple((int(r), int(s)) for r, s in self.transitions))
        object.__setattr__(self, "flip_angles", tuple(float(f) for f in self.flip_angles))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if self.kind not in KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.model not in MODELS:
            raise ValueError(f"unknown pulse model {self.model!r}")
        if self.duration < 0:
            raise ValueError("negative duration")
        n = len(self.transitions)
        if self.kind == "selective" and n != 1:
            raise ValueError("selective pulse needs exactly one transition")
        if self.kind == "multi_frequency" and n < 1:
            raise ValueError("multi-frequency pulse needs at least one transition")
        if self.kind in ("hard", "delay") and n:
            raise ValueError(f"{self.kind} event takes no transitions")
        if self.kind == "hard":
            if len(self.flip_angles) != 1 or len(self.phases) != 1:
                raise ValueError("hard pulse needs one flip angle and one phase")
        elif self.kind == "delay":
            if self.flip_angles or self.phases:
                raise ValueError("delay takes no flip angle or phase")
        else:
            if len(self.flip_angles) != n or len(self.phases) != n:
                raise ValueError("need one flip angle and one phase per transition")
            for r, s in self.transitions:
                if s != r + 1 or r < 1:
                    raise InvalidTransitionError(f"({r},{s}) is not a single-quantum transition")
            if shares_level(self.transitions):
                raise MergeConflictError(f"transitions {self.transitions} share a level")

    @classmethod
    def selective(cls, r: int, flip: float, phase: float, duration: float = 0.0, model: str = "ideal"):
        return cls("selective", ((r, r + 1),), (flip,), (phase,), duration, model)

    @classmethod
    def multi(cls, rs, flips, phases, duration: float = 0.0, model: str = "ideal"):
        rs = list(rs)
        if np.isscalar(flips):
            flips = [flips] * len(rs)
        if np.isscalar(phases):
            phases = [phases] * len(rs)
        kind = "selective" if len(rs) == 1 else "multi_frequency"
        return cls(kind, tuple((r, r + 1) for r in rs), tuple(flips), tuple(phases), duration, model)

    @classmethod
    def hard(cls, flip: float, phase: float = math.pi / 2):
        return cls("hard", (), (flip,), (phase,))

    @classmethod
    def delay(cls, duration: float):
        return cls("delay", duration=duration)

    def with_model(self, model: str) -> "PulseEvent":
        return PulseEvent(self.kind, self.transitions, self.flip_angles, self.phases, self.duration, model)


@dataclass(frozen=True)
class PulseSequence:
    events: tuple[PulseEvent, ...] = ()
    system: SpinSystem = field(default_factory=SpinSystem)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        for ev in self.events:
            for _, s in ev.transitions:
                if s > self.system.dim:
                    raise InvalidTransitionError(f"transition to level {s} beyond dim {self.system.dim}")

    def __len__(self):
        return len(self.events)


@dataclass(frozen=True)
class RfWaveform:
    """Piecewise-constant RF: ``amplitudes`` and ``phases`` have shape
    (n_steps, n_components); component k rotates at ``carriers_hz[k]``."""

    amplitudes: np.ndarray
    phases: np.ndarray
    carriers_hz: tuple[float, ...]
    dt: float

    def __post_init__(self):
        amps = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        phs = np.atleast_2d(np.asarray(self.phases, dtype=float))
        if amps.shape != phs.shape or amps.shape[1] != len(self.carriers_hz):
            raise ValueError("amplitude/phase arrays must be (n_steps, n_components)")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "phases", phs)
        object.__setattr__(self, "carriers_hz", tuple(float(f) for f in self.carriers_hz))

    @property
    def n_steps(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt


def subspace_generator(dim: int, r: int, s: int, phase: float) -> np.ndarray:
    """cos(phase) Ix^(r,s) + sin(phase) Iy^(r,s) for the fictitious spin-1/2 on (r, s)."""
    _check_transition(dim, r, s)
    g = np.zeros((dim, dim), dtype=complex)
    g[r - 1, s - 1] = 0.5 * np.exp(-1j * phase)
    g[s - 1, r - 1] = 0.5 * np.exp(1j * phase)
    return g


def ideal_selective_propagator(ev: PulseEvent, dim: int) -> np.ndarray:
    if ev.kind not in ("selective", "multi_frequency"):
        raise ValueError(f"{ev.kind} is not a selective pulse")
    if shares_level(ev.transitions):
        raise MergeConflictError(f"transitions {ev.transitions} share a level")
    gen = np.zeros((dim, dim), dtype=complex)
    for (r, s), flip, phase in zip(ev.transitions, ev.flip_angles, ev.phases):
        gen += flip * subspace_generator(dim, r, s, phase)
    return hermitian_propagator(gen, 1.0)


def hard_pulse_propagator(dim: int, flip: float, phase: float) -> np.ndarray:
    ix, iy, _ = spin_operators(spin_from_dim(dim))
    return hermitian_propagator(math.cos(phase) * ix + math.sin(phase) * iy, flip)


def refocus_period(sys: SpinSystem) -> float:
    """Shortest t > 0 with exp(-i H_Q t) proportional to identity (0 if H_Q vanishes)."""
    g = quadrupolar_gcd(sys.spin)
    if g == 0:
        return 0.0
    if sys.line_spacing_hz == 0:
        raise NoRefocusError("zero quadrupolar coupling has no refocusing period")
    return 1.0 / (sys.coupling_hz * float(g))


def refocus_duration(sys: SpinSystem, n: int = 1) -> float:
    if n < 1:
        raise ValueError("n must be a positive integer")
    return n * refocus_period(sys)


def merge_unconnected(events) -> PulseEvent:
    """Fuse pulses on pairwise-unconnected transitions into one MF pulse."""
    events = list(events)
    if not events:
        raise ValueError("nothing to merge")
    if len(events) == 1:
        return events[0]
    for ev in events:
        if ev.kind not in ("selective", "multi_frequency"):
            raise ValueError(f"cannot merge a {ev.kind} event")
    models = {ev.model for ev in events}
    if len(models) > 1:
        raise ValueError(f"cannot merge events with different models {sorted(models)}")
    transitions, flips, phases = [], [], []
    for ev in events:
        transitions += ev.transitions
        flips += ev.flip_angles
        phases += ev.phases
    if shares_level(transitions):
        raise MergeConflictError(f"transitions {transitions} share a level")
    duration = max(ev.duration for ev in events)
    return PulseEvent("multi_frequency", tuple(transitions), tuple(flips), tuple(phases), duration, models.pop())


def soft_pulse_waveform(sys: SpinSystem, ev: PulseEvent, duration: float | None = None,
                        max_step_rotation: float = 0.05) -> RfWaveform:
    """Rectangular soft pulse realising ``ev``, one carrier per transition.

    Amplitudes are scaled by the transition moment 2(Ix)_{r,r+1}, so each
    transition nutates through its own flip angle.
    """
    if ev.kind not in ("selective", "multi_frequency"):
        raise ValueError(f"no soft waveform for a {ev.kind} event")
    if duration is None:
        duration = ev.duration or refocus_duration(sys, DEFAULT_REFOCUS_PERIODS)
    if duration <= 0:
        raise ValueError("soft pulse needs a positive duration")
    ix, _, _ = spin_operators(sys.spin)
    offsets = dict(transition_frequencies(sys))
    amps, carriers = [], []
    for (r, s), flip in zip(ev.transitions, ev.flip_angles):
        moment = 2 * ix[r - 1, s - 1].real
        amps.append(flip / (moment * duration))
        carriers.append(offsets[(r, s)])
    bound = _norm_bound(sys, amps)
    n_steps = max(1, math.ceil(duration * bound / max_step_rotation))
    dt = duration / n_steps
    return RfWaveform(
        np.tile(amps, (n_steps, 1)),
        np.tile(ev.phases, (n_steps, 1)),
        tuple(carriers),
        dt,
    )


def _norm_bound(sys: SpinSystem, amps) -> float:
    hq = np.max(np.abs(np.diag(quadrupolar_hamiltonian(sys)).real))
    return float(hq + float(sys.spin) * float(np.sum(np.abs(amps))))


def time_domain_propagator(wave: RfWaveform, sys: SpinSystem) -> np.ndarray:
    """Piecewise-constant integration of H_Q + RF in the central-transition frame.

    Each step uses the exact exponential of the Hamiltonian sampled at the
    step midpoint. The step products are reduced pairwise.
    """
    dim = sys.dim
    bound = _norm_bound(sys, np.max(np.abs(wave.amplitudes), axis=0))
    if bound * wave.dt >= MAX_STEP_ROTATION:
        raise ResolutionError(
            f"step rotation {bound * wave.dt:.3g} rad exceeds {MAX_STEP_ROTATION} rad; reduce dt"
        )
    ix, iy, _ = spin_operators(sys.spin)
    hq = np.diag(quadrupolar_hamiltonian(sys)).real
    t = (np.arange(wave.n_steps) + 0.5) * wave.dt
    arg = 2 * math.pi * np.outer(t, wave.carriers_hz) + wave.phases
    cx = np.sum(wave.amplitudes * np.cos(arg), axis=1)
    cy = np.sum(wave.amplitudes * np.sin(arg), axis=1)
    h = cx[:, None, None] * ix + cy[:, None, None] * iy
    h[:, np.arange(dim), np.arange(dim)] += hq
    w, v = np.linalg.eigh(h)
    steps = (v * np.exp(-1j * w * wave.dt)[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))
    while steps.shape[0] > 1:
        tail = steps[-1:] if steps.shape[0] % 2 else steps[:0]
        steps = steps[: steps.shape[0] - tail.shape[0]]
        steps = np.concatenate([steps[1::2] @ steps[0::2], tail])
    return steps[0]


def subspace_metrics(u: np.ndarray, u_ideal: np.ndarray, r: int, s: int | None = None) -> tuple[float, float]:
    """Fidelity and leakage of ``u`` restricted to the levels (r, s).

    Fidelity is |Tr(A^dag B)|/2 over the 2x2 block; leakage is the worst
    population lost from the block by either basis state.
    """
    s = r + 1 if s is None else s
    idx = [r - 1, s - 1]
    sub = u[np.ix_(idx, idx)]
    fid = abs(np.trace(u_ideal[np.ix_(idx, idx)].conj().T @ sub)) / 2
    leak = 1 - float(np.min(np.sum(np.abs(sub) ** 2, axis=0)))
    return float(fid), leak


def event_propagator(ev: PulseEvent, sys: SpinSystem, model: str | None = None) -> np.ndarray:
    model = model or ev.model
    if model not in MODELS:
        raise ValueError(f"unknown pulse model {model!r}")
    dim = sys.dim
    hq = quadrupolar_hamiltonian(sys)
    if ev.kind == "delay":
        return hermitian_propagator(hq, ev.duration)
    if ev.kind == "hard":
        # hard pulses are short against 1/spacing and stay ideal in every model
        return hard_pulse_propagator(dim, ev.flip_angles[0], ev.phases[0])
    if model == "time_domain":
        return time_domain_propagator(soft_pulse_waveform(sys, ev), sys)
    u = ideal_selective_propagator(ev, dim)
    if model == "refocused_ideal":
        t = ev.duration or refocus_duration(sys, DEFAULT_REFOCUS_PERIODS)
        u = hermitian_propagator(hq, t) @ u
    return u


def sequence_propagator(seq: PulseSequence, model: str | None = None) -> np.ndarray:
    """Ordered product of event propagators; later events multiply from the left.

    ``model`` overrides the per-event model when given.
    """
    u = np.eye(seq.system.dim, dtype=complex)
    for ev in seq.events:
        u = event_propagator(ev, seq.system, model) @ u
    return u


__all__ = [
    "DEFAULT_REFOCUS_PERIODS",
    "DomainError",
    "InvalidTransitionError",
    "MergeConflictError",
    "NoRefocusError",
    "PulseEvent",
    "PulseSequence",
    "ResolutionError",
    "RfWaveform",
    "event_propagator",
    "hard_pulse_propagator",
    "ideal_selective_propagator",
    "merge_unconnected",
    "refocus_duration",
    "refocus_period",
    "sequence_propagator",
    "shares_level",
    "soft_pulse_waveform",
    "subspace_generator",
    "time_domain_propagator",
]

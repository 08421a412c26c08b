"""Pulse-sequence files.

One JSON document per sequence::

    {
      "format": "spinladder.pulse-sequence",
      "version": 1,
      "system": {"spin": "7/2", "spacing_hz": 6856.0, "larmor_hz": 0.0},
      "events": [
        {"kind": "multi_frequency", "transitions": ["a", "c"],
         "flip_pi": [2.0, 2.0], "phase_deg": [90.0, 90.0],
         "duration_ms": 0.0, "model": "ideal"}
      ]
    }

``transitions`` entries are letters (a = levels 1-2) or index pairs
``[r, r+1]``. Hard pulses carry one-element ``flip_pi``/``phase_deg`` and
no transitions; delays carry only ``duration_ms``. Emission is canonical
(letters, phases in [0, 360), rounded), so emit -> parse -> emit is a
fixed point.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from .operators import SpinSystem, parse_spin, transition_from_label, transition_label
from .pulses import PulseEvent, PulseSequence

FORMAT = "spinladder.pulse-sequence"
VERSION = 1
MODEL_NAMES = {"ideal": "ideal", "refocused_ideal": "refocused_ideal", "refocused": "refocused_ideal",
               "time_domain": "time_domain", "timedomain": "time_domain"}


class SequenceFormatError(ValueError):
    pass


def _clean(x: float, digits: int) -> float:
    x = round(x, digits)
    return 0.0 if x == 0 else x


def _deg(rad: float) -> float:
    d = _clean(math.degrees(rad) % 360.0, 10)
    return 0.0 if d == 360.0 else d


def _spin_text(spin) -> str:
    spin = parse_spin(spin)
    return str(spin.numerator) if spin.denominator == 1 else f"{spin.numerator}/{spin.denominator}"


def event_to_dict(ev: PulseEvent, dim: int) -> dict:
    d: dict = {"kind": ev.kind}
    if ev.transitions:
        if dim <= 27:
            d["transitions"] = [transition_label(r) for r, _ in ev.transitions]
        else:
            d["transitions"] = [[r, s] for r, s in ev.transitions]
    if ev.kind != "delay":
        d["flip_pi"] = [_clean(f / math.pi, 12) for f in ev.flip_angles]
        d["phase_deg"] = [_deg(p) for p in ev.phases]
    d["duration_ms"] = _clean(ev.duration * 1e3, 12)
    d["model"] = ev.model
    return d


def sequence_to_dict(seq: PulseSequence) -> dict:
    sys = seq.system
    return {
        "format": FORMAT,
        "version": VERSION,
        "system": {
            "spin": _spin_text(sys.spin),
            "spacing_hz": float(sys.line_spacing_hz),
            "larmor_hz": float(sys.larmor_hz),
        },
        "events": [event_to_dict(ev, sys.dim) for ev in seq.events],
    }


def dumps(seq: PulseSequence) -> str:
    return json.dumps(sequence_to_dict(seq), indent=2) + "\n"


def _transition(item) -> tuple[int, int]:
    if isinstance(item, str):
        return transition_from_label(item)
    if isinstance(item, (list, tuple)) and len(item) == 2:
        return int(item[0]), int(item[1])
    raise SequenceFormatError(f"bad transition {item!r}")


def _floats(value, n: int, name: str) -> list[float]:
    if not isinstance(value, list):
        value = [value] * max(n, 1)
    if len(value) != max(n, 1):
        raise SequenceFormatError(f"{name} needs {max(n, 1)} entries, got {len(value)}")
    return [float(v) for v in value]


def event_from_dict(d: dict) -> PulseEvent:
    try:
        kind = d["kind"]
        model = MODEL_NAMES[d.get("model", "ideal")]
        duration = float(d.get("duration_ms", 0.0)) * 1e-3
        trans = tuple(_transition(t) for t in d.get("transitions", []))
        if kind == "delay":
            return PulseEvent("delay", duration=duration, model=model)
        flips = _floats(d["flip_pi"], len(trans), "flip_pi")
        phases = _floats(d["phase_deg"], len(trans), "phase_deg")
        return PulseEvent(
            kind,
            trans,
            tuple(f * math.pi for f in flips),
            tuple(math.radians(p) for p in phases),
            duration,
            model,
        )
    except (KeyError, TypeError) as exc:
        raise SequenceFormatError(f"malformed event {d!r}: {exc}") from exc


def sequence_from_dict(doc: dict) -> PulseSequence:
    if doc.get("format") != FORMAT:
        raise SequenceFormatError(f"not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise SequenceFormatError(f"unsupported version {doc.get('version')!r}")
    s = doc.get("system", {})
    system = SpinSystem(
        spin=parse_spin(s.get("spin", "7/2")),
        larmor_hz=float(s.get("larmor_hz", 0.0)),
        line_spacing_hz=float(s.get("spacing_hz", 6856.0)),
    )
    return PulseSequence(tuple(event_from_dict(e) for e in doc.get("events", [])), system)


def loads(text: str) -> PulseSequence:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SequenceFormatError(str(exc)) from exc
    return sequence_from_dict(doc)


def save(seq: PulseSequence, path) -> None:
    Path(path).write_text(dumps(seq))


def load(path) -> PulseSequence:
    return loads(Path(path).read_text())

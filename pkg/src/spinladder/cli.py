"""Command-line entry point: ``spinladder {spectrum,synth,verify,dj,table,check}``.

Exit codes: 0 success, 1 I/O or batch failure, 2 usage or parse error,
3 synthesis verification failure.
"""
from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import seqfile
from .experiment import (
    all_oracles,
    program_text,
    detect_spectrum,
    equilibrium_state,
    evolve,
    oracle_name,
    parse_oracle,
    pps_000,
    reference_spectrum,
    run_dj,
    small_angle_readout,
    spectrum_ascii,
    spectrum_csv,
    superposition_state,
)
from .operators import InvalidSpinError, SpinSystem, parse_spin
from .pulses import PulseSequence, hard_pulse_propagator, sequence_propagator
from .synth import (
    DiagonalGateSpec,
    GatePlan,
    InvalidOracleError,
    PhasePair,
    global_phase_fidelity,
    merge_plan,
    phase_pair_sequence,
    plan_sequence,
    reconcile_phase_gate_table,
    synth_diagonal,
    synth_dj_oracle,
    synth_single_level_phase,
    verify_plan,
    verify_sequence,
)

FIDELITY_TOL = 1e-9
MODEL_CHOICES = {"ideal": "ideal", "refocused": "refocused_ideal", "timedomain": "time_domain"}


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    spin: str = "7/2"
    spacing_hz: float = 6856.0
    larmor_hz: float = 0.0
    model: str = "ideal"
    fmt: str = "csv"
    out: str | None = None
    seed: int = 0

    def system(self) -> SpinSystem:
        return SpinSystem(spin=parse_spin(self.spin), larmor_hz=self.larmor_hz, line_spacing_hz=self.spacing_hz)


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_angle(text: str) -> float:
    """Evaluate an angle such as 'pi/2', '-3pi/8', '0.25*pi' or '1.2' (radians)."""
    src = re.sub(r"(\d)\s*(pi)", r"\1*\2", text.strip().lower())
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise CliError(f"bad angle {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in ("pi", "π"):
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise CliError(f"bad angle {text!r}")

    try:
        return ev(tree)
    except ZeroDivisionError as exc:
        raise CliError(f"bad angle {text!r}") from exc


_UK_RE = re.compile(r"^U(\d+)\s*\((.+)\)$", re.I)


def parse_gate(expr: str, dim: int) -> tuple[DiagonalGateSpec, GatePlan]:
    """Gate grammar: ``Uk(angle)``, ``U(1,k,l,m)``, ``Uc1``/``Uc2`` or a phase
    list in units of pi such as ``[0, 0.5, 1, 0, 0, 0, 0, 0]``."""
    text = expr.strip()
    if text.lower() in ("uc1", "uc2", "constant", "constant-1", "constant-2"):
        which = 2 if text.lower() in ("uc2", "constant-2") else 1
        spec = DiagonalGateSpec.constant(which, dim)
        return spec, merge_plan(synth_diagonal(spec))
    if text.lower().startswith("u(1"):
        try:
            klm = parse_oracle(text)
        except InvalidOracleError as exc:
            raise CliError(str(exc)) from exc
        if dim != 8:
            raise CliError("U(1,k,l,m) oracles need the 8-level ladder")
        return DiagonalGateSpec.oracle(*klm), synth_dj_oracle(*klm)
    m = _UK_RE.match(text)
    if m:
        k, phi = int(m.group(1)), parse_angle(m.group(2))
        if not 1 <= k <= dim:
            raise CliError(f"level {k} outside 1..{dim}")
        spec = DiagonalGateSpec(DiagonalGateSpec.single_level(k, phi, dim).phases, text)
        return spec, merge_plan(synth_single_level_phase(k, phi, dim))
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(f"bad phase list {expr!r}") from exc
        return _spec_from_phases(values, dim)
    raise CliError(f"cannot parse gate {expr!r}")


def _spec_from_phases(values, dim: int) -> tuple[DiagonalGateSpec, GatePlan]:
    if not isinstance(values, list) or len(values) != dim:
        raise CliError(f"phase list must have {dim} entries")
    try:
        spec = DiagonalGateSpec(tuple(float(v) * math.pi for v in values))
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad phase list: {exc}") from exc
    return spec, merge_plan(synth_diagonal(spec))


def load_spec_file(path: str, dim: int) -> tuple[DiagonalGateSpec, GatePlan]:
    """Spec file: ``{"dim": 8, "phases": [...]}`` with phases in units of pi."""
    doc = json.loads(Path(path).read_text())
    if int(doc.get("dim", dim)) != dim:
        raise CliError(f"spec file dim {doc.get('dim')} does not match system dim {dim}")
    return _spec_from_phases(doc.get("phases"), dim)


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        try:
            Path(cfg.out).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write {cfg.out}: {exc}", 1) from exc
    else:
        sys.stdout.write(text)


def _spectrum_text(lines, cfg: RunConfig, extra: dict | None = None) -> str:
    if cfg.fmt == "csv":
        return spectrum_csv(lines)
    if cfg.fmt == "ascii":
        return spectrum_ascii(lines)
    doc = dict(extra or {})
    doc["lines"] = [
        {"label": ln.label, "transition": list(ln.transition), "frequency_hz": ln.frequency_hz,
         "intensity": round(ln.intensity, 15), "phase_deg": round(ln.phase_deg, 9)}
        for ln in lines
    ]
    return json.dumps(doc, indent=2) + "\n"


def cmd_spectrum(args, cfg: RunConfig) -> int:
    system = cfg.system()
    if args.state == "equilibrium":
        u = hard_pulse_propagator(system.dim, math.pi / 2, math.pi / 2)
        lines = detect_spectrum(evolve(equilibrium_state(system), u), system)
    elif args.state == "pps":
        lines = small_angle_readout(pps_000(system), math.radians(args.readout_deg), system)
    else:
        lines = detect_spectrum(superposition_state(system), system)
    _emit(_spectrum_text(lines, cfg, {"state": args.state}), cfg)
    return 0


def _report(spec: DiagonalGateSpec, plan: GatePlan, seq: PulseSequence, fidelity: float) -> dict:
    return {
        "gate": spec.name or "diagonal",
        "phases_pi": [round(p / math.pi, 12) for p in spec.phases],
        "layers": plan.layer_labels(),
        "program": program_text(plan),
        "pulses": len(seq.events),
        "fidelity": round(fidelity, 12),
        "ok": fidelity >= 1 - FIDELITY_TOL,
    }


def cmd_synth(args, cfg: RunConfig) -> int:
    system = cfg.system()
    if args.spec_file:
        spec, plan = load_spec_file(args.spec_file, system.dim)
    elif args.gate:
        spec, plan = parse_gate(args.gate, system.dim)
    else:
        raise CliError("synth needs a gate expression or --spec-file")
    seq = plan_sequence(plan, system)
    fidelity = verify_plan(plan, spec, system)
    rep = _report(spec, plan, seq, fidelity)
    if args.sequence_out:
        try:
            seqfile.save(seq, args.sequence_out)
        except OSError as exc:
            raise CliError(f"cannot write {args.sequence_out}: {exc}", 1) from exc
    if cfg.fmt == "report":
        rep["sequence"] = seqfile.sequence_to_dict(seq)
        text = json.dumps(rep, indent=2) + "\n"
    else:
        text = (
            f"gate: {rep['gate']}\n"
            f"program: {' . '.join(rep['program']) or '(empty)'}\n"
            f"pulses: {rep['pulses']}\n"
            f"fidelity: {fidelity:.12f}\n"
        )
    _emit(text, cfg)
    return 0 if rep["ok"] else 3


def cmd_verify(args, cfg: RunConfig) -> int:
    try:
        seq = seqfile.load(args.sequence)
    except OSError as exc:
        raise CliError(f"cannot read {args.sequence}: {exc}", 1) from exc
    except seqfile.SequenceFormatError as exc:
        raise CliError(str(exc)) from exc
    spec, _ = parse_gate(args.gate, seq.system.dim)
    model = MODEL_CHOICES[args.model] if args.model else None
    fidelity = verify_sequence(seq, spec, model)
    _emit(f"fidelity: {fidelity:.12f}\n", cfg)
    return 0 if fidelity >= 1 - FIDELITY_TOL else 3


def _dj_row(o) -> dict:
    return {
        "oracle": o.oracle,
        "program": " - ".join(o.program) or "(none)",
        "inverted": sorted(o.inverted),
        "classification": o.classification,
        "expected": o.expected,
        "fidelity": round(o.fidelity, 12),
        "correct": o.correct,
    }


def cmd_dj(args, cfg: RunConfig) -> int:
    system = cfg.system()
    if system.dim != 8:
        raise CliError("the oracle pipeline needs spin 7/2")
    model = MODEL_CHOICES[cfg.model]
    if args.all:
        oracles = all_oracles()
    elif args.oracle:
        try:
            oracles = [parse_oracle(args.oracle)]
        except InvalidOracleError as exc:
            raise CliError(str(exc)) from exc
    else:
        raise CliError("dj needs an oracle expression or --all")
    ref = reference_spectrum(system)
    outcomes = [run_dj(o, system, model, ref) for o in oracles]
    if cfg.fmt == "report" or (cfg.fmt == "csv" and args.all):
        if cfg.fmt == "report":
            text = json.dumps({"model": cfg.model, "results": [_dj_row(o) for o in outcomes]}, indent=2) + "\n"
        else:
            text = "oracle,program,inverted,classification,correct\n" + "".join(
                f"{r['oracle']},{r['program']},{' '.join(r['inverted']) or '-'},{r['classification']},{r['correct']}\n"
                for r in map(_dj_row, outcomes))
    elif cfg.fmt == "ascii":
        text = "".join(
            f"{o.oracle}: {o.classification} inverted={{{','.join(sorted(o.inverted))}}}\n{spectrum_ascii(o.spectrum)}"
            for o in outcomes)
    else:
        o = outcomes[0]
        text = (f"# oracle={o.oracle} classification={o.classification} "
                f"inverted={{{','.join(sorted(o.inverted))}}}\n") + spectrum_csv(o.spectrum)
    _emit(text, cfg)
    return 0 if all(o.correct for o in outcomes) else 1


def cmd_table(args, cfg: RunConfig) -> int:
    issues = reconcile_phase_gate_table()
    text = "".join(f"U{i.k}\t{i.kind}\t{i.detail}\n" for i in issues) or "no discrepancies\n"
    _emit(text, cfg)
    return 0


def cmd_check(args, cfg: RunConfig) -> int:
    """Randomised self-check of pair phases and plan merging."""
    rng = np.random.default_rng(cfg.seed)
    system = cfg.system()
    dim = system.dim
    worst_pair = worst_merge = 0.0
    for _ in range(args.trials):
        r = int(rng.integers(1, dim))
        phi, theta = rng.uniform(-math.pi, math.pi, 2)
        u = sequence_propagator(phase_pair_sequence(PhasePair(r, phi, theta), system))
        target = np.ones(dim, dtype=complex)
        target[r - 1], target[r] = np.exp(1j * phi), np.exp(-1j * phi)
        worst_pair = max(worst_pair, 1 - global_phase_fidelity(np.diag(target), u))
        spec = DiagonalGateSpec(tuple(rng.uniform(-math.pi, math.pi, dim)))
        plan = synth_diagonal(spec)
        worst_merge = max(worst_merge, 1 - verify_plan(merge_plan(plan), spec, system))
    ok = worst_pair < FIDELITY_TOL and worst_merge < FIDELITY_TOL
    _emit(f"seed: {cfg.seed}\ntrials: {args.trials}\npair_infidelity_max: {worst_pair:.3e}\n"
          f"merge_infidelity_max: {worst_merge:.3e}\nok: {ok}\n", cfg)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spin", default="7/2", help="spin quantum number, e.g. 7/2")
    common.add_argument("--spacing-hz", type=float, default=6856.0, help="adjacent line spacing in Hz")
    common.add_argument("--larmor-hz", type=float, default=0.0)
    common.add_argument("--model", choices=sorted(MODEL_CHOICES), default="ideal")
    common.add_argument("--format", dest="fmt", choices=("csv", "report", "ascii"), default="csv")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="spinladder", description="Compile phase gates to selective pulses and simulate spin-ladder spectra.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="simulated stick spectrum of a state")
    p.add_argument("--state", choices=("equilibrium", "pps", "superposition"), default="equilibrium")
    p.add_argument("--readout-deg", type=float, default=5.0, help="small-angle readout for --state pps")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("synth", parents=[common], help="compile a diagonal gate to pulses")
    p.add_argument("gate", nargs="?", help='e.g. "U1(pi/2)", "U(1,4,5,8)", "[0,0.5,0,0,0,0,0,1]"')
    p.add_argument("--spec-file", help='JSON {"dim": N, "phases": [...]} in units of pi')
    p.add_argument("--sequence-out", help="write the pulse-sequence file here")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", parents=[common], help="re-verify a pulse-sequence file against a gate")
    p.add_argument("sequence")
    p.add_argument("gate")
    p.set_defaults(func=cmd_verify, model=None)

    p = sub.add_parser("dj", parents=[common], help="run the phase-oracle algorithm")
    p.add_argument("oracle", nargs="?", help='"constant", "constant-2" or "U(1,k,l,m)"')
    p.add_argument("--all", action="store_true", help="run both constant and all 35 balanced oracles")
    p.set_defaults(func=cmd_dj)

    p = sub.add_parser("table", parents=[common], help="reconcile the printed single-level phase-gate rows")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("check", parents=[common], help="randomised self-check (uses --seed)")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.spin, args.spacing_hz, args.larmor_hz, args.model or "ideal", args.fmt, args.out, args.seed)
        cfg.system()
        return args.func(args, cfg)
    except CliError as exc:
        print(f"spinladder: error: {exc}", file=sys.stderr)
        return exc.code
    except (InvalidSpinError, ValueError) as exc:
        print(f"spinladder: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

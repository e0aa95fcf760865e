"""Command-line front end.

Reports are JSON documents with sorted keys written to stdout. Exit codes:
0 success, 2 input or validation error, 3 degenerate acceptance probability.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import channels as ch
from .fidelity import (
    DegenerateAcceptanceError,
    SubspaceSelector,
    asymptotic_register_fidelity,
    avg_kraus,
    avg_quadratic_form,
    avg_subspace,
    avg_unitary,
    composite_bruteforce_check,
    composite_fidelity,
    conditional_fidelity,
    worst_case_unitary,
)
from .haar import DEFAULT_SAMPLES, mc_channel_fidelity, mc_quadratic_form_average
from .linalg import random_unitary
from .pulses import ErrorGrid, PulseSequence, optimize

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3


class InputError(ValueError):
    pass


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _read_json(path: str):
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    return doc, {"path": path, "sha256": hashlib.sha256(raw).hexdigest()}


def load_matrix(path: str):
    doc, digest = _read_json(path)
    return ch.matrix_from_dict(doc, path), digest


def load_channel(spec: str):
    """A channel file, or a built-in ``depolarizing-P`` / ``amplitude_damping-GT``."""
    name, _, arg = spec.rpartition("-")
    builders = {
        "depolarizing": ch.depolarizing_channel,
        "amplitude_damping": ch.amplitude_damping_channel,
        "decay": ch.amplitude_damping_channel,
    }
    if name in builders and not Path(spec).exists():
        try:
            value = float(arg)
        except ValueError as exc:
            raise InputError(f"bad parameter in channel spec {spec!r}") from exc
        return builders[name](value), {"builtin": spec}
    doc, digest = _read_json(spec)
    return ch.channel_from_dict(doc), digest


def parse_indices(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise InputError(f"subspace must be a comma list of integers, got {text!r}") from exc


def parse_grid(text: str) -> ErrorGrid:
    """``"s1,s2,...[:d1,d2,...]"``: amplitude scales, then optional detunings."""
    scales, _, dets = text.partition(":")
    try:
        s = tuple(float(v) for v in scales.split(","))
        d = tuple(float(v) for v in dets.split(",")) if dets else (0.0,)
    except ValueError as exc:
        raise InputError(f"malformed grid spec {text!r}") from exc
    return ErrorGrid(s, d)


def cmd_unitary(args) -> dict:
    target, dt = load_matrix(args.target)
    actual, da = load_matrix(args.actual)
    if args.conditional and not args.subspace:
        raise InputError("--conditional requires --subspace")
    if args.subspace:
        if args.worst_case:
            raise InputError("--worst-case is defined for the full space only")
        sel = SubspaceSelector(target.shape[0], parse_indices(args.subspace))
        if args.conditional:
            rep = conditional_fidelity(target, actual, sel)
        else:
            rep = avg_subspace(target, actual, sel)
        m = sel.block(target.conj().T @ actual)
    else:
        rep = avg_unitary(target, actual)
        if args.worst_case:
            rep = replace(rep, worst_case=worst_case_unitary(target, actual))
        m = target.conj().T @ actual
    if args.mc:
        rep = rep.with_mc(mc_quadratic_form_average(m, args.mc, args.seed))
    return {"inputs": {"target": dt, "actual": da}, "report": rep.as_dict()}


def cmd_kraus(args) -> dict:
    target, dt = load_matrix(args.target)
    channel, dc = load_channel(args.channel)
    rep = avg_kraus(target, channel)
    if args.mc:
        rep = rep.with_mc(mc_channel_fidelity(target, channel, args.mc, args.seed))
    doc = {"inputs": {"target": dt, "channel": dc}, "report": rep.as_dict()}
    if args.remix_check:
        v = random_unitary(len(channel), np.random.default_rng(args.seed))
        remixed = avg_kraus(target, ch.remix(channel, v)).mean_fidelity
        doc["remix_check"] = {
            "seed": args.seed,
            "remixed_fidelity": remixed,
            "difference": abs(remixed - rep.mean_fidelity),
        }
    return doc


def sweep_csv(n: int, k_max: int, f1: float) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["K", "register_fidelity", "f1_pow_3K_over_2"])
    for k in range(1, k_max + 1):
        w.writerow([k, repr(composite_fidelity(n, k, f1)), repr(asymptotic_register_fidelity(f1, k))])
    return buf.getvalue()


def cmd_scale(args):
    inputs = {}
    if args.channel:
        channel, inputs["channel"] = load_channel(args.channel)
        n = channel.dim
        f1 = avg_kraus(np.eye(n), channel).mean_fidelity
    else:
        if args.n is None or args.f1 is None:
            raise InputError("give either --channel or both --n and --f1")
        n, f1 = args.n, args.f1
    if args.sweep:
        return sweep_csv(n, args.K, f1)
    doc = {
        "inputs": inputs,
        "report": {
            "kind": "composite",
            "n": n,
            "K": args.K,
            "f_single": f1,
            "mean_fidelity": composite_fidelity(n, args.K, f1),
            "asymptotic_f_pow_3K_over_2": asymptotic_register_fidelity(f1, args.K),
        },
    }
    if args.check:
        if not args.channel:
            raise InputError("--check needs --channel")
        brute, law = composite_bruteforce_check(channel, args.K)
        doc["check"] = {"bruteforce": brute, "composite_law": law, "difference": abs(brute - law)}
    return doc


def initial_sequence(pulses: int, rng: np.random.Generator) -> PulseSequence:
    thetas = rng.uniform(0, 2 * np.pi, pulses)
    phis = rng.uniform(-np.pi, np.pi, pulses)
    return PulseSequence(tuple(zip(thetas, phis)))


def cmd_optimize(args) -> dict:
    target, dt = load_matrix(args.target)
    grid = parse_grid(args.grid)
    if args.pulses < 1 or args.starts < 1:
        raise InputError("--pulses and --starts must be positive")
    rng = np.random.default_rng(args.seed)
    best = None
    for i in range(args.starts):
        seq0 = initial_sequence(args.pulses, rng)
        res = optimize(seq0, target, grid, max_evaluations=args.max_evals, seed=args.seed + i)
        if best is None or res.best_objective > best.best_objective:
            best = res
    return {
        "inputs": {"target": dt},
        "grid": {"amplitude_scales": list(grid.amplitude_scales), "detunings": list(grid.detunings)},
        "report": {
            "best_params": [list(p) for p in best.best_params.pulses],
            "best_objective": best.best_objective,
            "evaluations": best.evaluations,
            "converged": best.converged,
        },
    }


def cmd_mc(args) -> dict:
    m, dm = load_matrix(args.matrix)
    est = mc_quadratic_form_average(m, args.samples, args.seed, args.workers)
    closed = avg_quadratic_form(m)
    return {
        "inputs": {"matrix": dm},
        "report": {
            "closed_form": closed,
            "mc": est.as_dict(),
            "deviation_in_stderr": abs(est.mean - closed) / est.stderr if est.stderr > 0 else 0.0,
        },
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="avgfid", description="Average fidelity of quantum operations.")
    p.add_argument("--timing", action="store_true", help="add wall time to the report")
    sub = p.add_subparsers(dest="command", required=True)

    u = sub.add_parser("unitary", help="fidelity of an actual unitary against a target")
    u.add_argument("target")
    u.add_argument("actual")
    u.add_argument("--subspace", help="comma list of relevant basis indices")
    u.add_argument("--worst-case", action="store_true")
    u.add_argument("--conditional", action="store_true")
    u.add_argument("--mc", type=int, default=0, metavar="N")
    u.add_argument("--seed", type=int, default=0)
    u.set_defaults(func=cmd_unitary)

    k = sub.add_parser("kraus", help="fidelity of a Kraus channel against a target unitary")
    k.add_argument("target")
    k.add_argument("channel", help="channel file, or depolarizing-P / amplitude_damping-GT")
    k.add_argument("--mc", type=int, default=0, metavar="N")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--remix-check", action="store_true")
    k.set_defaults(func=cmd_kraus)

    s = sub.add_parser("scale", help="register fidelity for K copies of a one-qudit map")
    s.add_argument("--n", type=int)
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--f1", type=float)
    s.add_argument("--channel")
    s.add_argument("--check", action="store_true")
    s.add_argument("--sweep", action="store_true", help="CSV table for K = 1..K")
    s.set_defaults(func=cmd_scale)

    o = sub.add_parser("optimize", help="composite-pulse design for a qubit target")
    o.add_argument("target")
    o.add_argument("--pulses", type=int, default=1)
    o.add_argument("--grid", default="1:0", help="scales[:detunings], comma separated")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--starts", type=int, default=3)
    o.add_argument("--max-evals", type=int, default=10_000)
    o.set_defaults(func=cmd_optimize)

    m = sub.add_parser("mc", help="Monte Carlo check of the quadratic-form average")
    m.add_argument("matrix")
    m.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--workers", type=int, default=1)
    m.set_defaults(func=cmd_mc)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        out = args.func(args)
    except DegenerateAcceptanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if isinstance(out, str):
        sys.stdout.write(out)
        return EXIT_OK
    out = {"command": args.command, "argv": argv, **out}
    if args.timing:
        out["wall_time_s"] = time.perf_counter() - start
    sys.stdout.write(dumps(out))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

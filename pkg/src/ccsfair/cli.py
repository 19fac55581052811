"""Command-line front end.

Exit codes: 0 success, 1 violation found, 2 inconclusive or truncated,
64 usage error, 65 spec or witness parse error, 66 unreadable input.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time

from . import serialize as ser
from .corpus import random_specs
from .embellish import embellish_to_complete, extend_to_complete, incompleteness
from .lts import reachable_lts
from .net import (
    check_bisim,
    check_dec_injective,
    check_safe,
    check_structural_conflict,
)
from .paths import Lasso, enabled_actions, from_labels, is_complete, replay
from .scheduler import Bounds, SchedulerSignature, build_hat, check_all
from .syntax import CCSError, ParseError, Relabelling, Spec, SpecError, parse, pretty_spec
from .verdict import Verdict

EX_USAGE, EX_DATAERR, EX_NOINPUT = 64, 65, 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _nonneg(s: str) -> int:
    n = int(s)
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def _pos(s: str) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def load_spec(path: str) -> Spec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FileNotFoundError(f"{path}: {exc.strerror}") from None
    try:
        return parse(text)
    except ParseError as exc:
        raise CCSError(f"{path}:{exc}") from None


def _fmt(args) -> str:
    return args.format


# --------------------------------------------------------------------------
# commands


def cmd_lts(args) -> tuple[str, int]:
    spec = load_spec(args.file)
    g = reachable_lts(spec, args.bound, args.depth)
    out = {"json": lambda: ser.dumps(ser.lts_json(g)), "dot": lambda: ser.lts_dot(g),
           "text": lambda: ser.lts_text(g)}[_fmt(args)]()
    return out, 2 if g.state_limited else 0


def cmd_net(args) -> tuple[str, int]:
    spec = load_spec(args.file)
    f = _fmt(args)
    if f == "json":
        data = ser.net_json(spec, args.bound)
        return ser.dumps(data), 2 if data["truncated"] else 0
    out = ser.net_dot(spec, args.bound) if f == "dot" else ser.net_text(spec, args.bound)
    return out, 2 if ser.net_graph(spec, args.bound)["truncated"] else 0


def _targets(args) -> list[tuple[str, Spec]]:
    specs = []
    if args.file:
        specs.append((args.file, load_spec(args.file)))
    if args.random:
        specs += [(f"random[{args.seed}:{i}]", s) for i, s in enumerate(random_specs(args.seed, args.random))]
    if not specs:
        raise UsageError("give a spec file or --random K")
    return specs


def _combine(codes) -> int:
    codes = list(codes)
    return 1 if 1 in codes else (2 if 2 in codes else 0)


def _check_one(which: str, spec: Spec, args) -> Verdict:
    if which == "bisim":
        return check_bisim(spec, args.bound, args.depth)
    if which == "safe":
        return check_safe(spec, args.bound)
    if which == "conflict":
        return check_structural_conflict(spec, args.bound)
    if which == "injective":
        g = reachable_lts(spec, args.bound, args.depth)
        v = check_dec_injective(g.states)
        if g.state_limited and v.ok:
            return Verdict(v.status, v.ok, v.witness, v.detail, v.explored, True)
        return v
    raise UsageError(f"unknown check {which}")


def _bounds(args) -> Bounds:
    return Bounds(args.prefix_bound, args.cycle_bound, args.depth or 12, args.balance_cap)


def cmd_check(args) -> tuple[str, int]:
    started = time.perf_counter()
    if args.which == "scheduler":
        if not args.file:
            raise UsageError("check scheduler needs a spec file")
        spec = load_spec(args.file)
        sig = SchedulerSignature.of(spec, args.r1, args.r2, args.t1, args.t2, args.e)
        bounds = _bounds(args)
        rep = check_all(spec, sig, bounds)
        verdicts = {f"requirement{i}": ser.verdict_json(v) for i, v in sorted(rep.verdicts.items())}
        report = {
            "command": ["check", "scheduler", args.file],
            "bounds": {"prefix": bounds.prefix, "cycle": bounds.cycle, "depth": bounds.depth,
                       "balance_cap": bounds.balance_cap},
            "signature": {"r1": args.r1, "r2": args.r2, "t1": args.t1, "t2": args.t2, "e": args.e},
            "verdicts": verdicts,
            "violated": rep.violated(),
            "truncated": any(v.truncated for v in rep.verdicts.values()),
        }
        code = rep.exit_code
    else:
        verdicts = {}
        for label, spec in _targets(args):
            verdicts[label] = _check_one(args.which, spec, args)
        report = {
            "command": ["check", args.which] + ([args.file] if args.file else []),
            "bounds": {"bound": args.bound, "depth": args.depth},
            "seed": args.seed if args.random else None,
            "verdicts": {k: ser.verdict_json(v) for k, v in verdicts.items()},
            "truncated": any(v.truncated for v in verdicts.values()),
        }
        code = _combine(v.exit_code for v in verdicts.values())
        if code == 0 and report["truncated"]:
            code = 2
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - started, 3)
    if _fmt(args) == "text":
        return _report_text(report), code
    return ser.dumps(report), code


def _report_text(report: dict) -> str:
    lines = [" ".join(report["command"])]
    for k, v in report["verdicts"].items():
        line = f"{k}: {v['status']}"
        if "witness_labels" in v:
            line += f"  witness: {v['witness_labels']}"
        elif "witness" in v:
            line += f"  witness: {v['witness']}"
        if v.get("detail"):
            line += f"  ({v['detail']})"
        lines.append(line)
    if "timing_seconds" in report:
        lines.append(f"time: {report['timing_seconds']}s")
    return "\n".join(lines) + "\n"


def _relabelling(args) -> Relabelling:
    pairs = {args.r1: args.c1, args.r2: args.c2}
    if args.relabel:
        for item in args.relabel.split(","):
            m = re.fullmatch(r"\s*([A-Za-z_]\w*)\s*/\s*([A-Za-z_]\w*)\s*", item)
            if not m:
                raise UsageError(f"bad relabelling item {item!r}; expected new/old")
            new, old = m.groups()
            if old in pairs and pairs[old] != new:
                raise UsageError(f"{old} is relabelled twice")
            pairs[old] = new
    return Relabelling.of(pairs)


def cmd_hat(args) -> tuple[str, int]:
    spec = load_spec(args.file)
    hat = build_hat(spec, _relabelling(args), args.r1, args.r2)
    text = pretty_spec(hat)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        return "", 0
    return text, 0


def parse_descriptor(spec: Spec, prefix: str, cycle: str):
    try:
        return from_labels(spec, prefix, cycle)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_embellish(args) -> tuple[str, int]:
    spec = load_spec(args.file)
    path = parse_descriptor(spec, args.prefix, args.cycle)
    before = incompleteness(path)
    if isinstance(path, Lasso):
        res = embellish_to_complete(path, args.rounds)
    else:
        res = extend_to_complete(path, args.rounds)
    after = incompleteness(res.path)
    report = {
        "command": ["embellish", args.file],
        "input": ser.checked_path_json(path),
        "input_labels": ser.path_text(path),
        "incompleteness_before": _inc_json(before),
        "status": res.status,
        "rounds": res.rounds,
        "result": ser.checked_path_json(res.path),
        "result_labels": ser.path_text(res.path),
        "incompleteness_after": _inc_json(after),
        "enabled_actions": sorted(str(a) for a in enabled_actions(res.path)),
    }
    code = 0 if res.complete else 2
    if _fmt(args) == "text":
        text = (f"input:  {report['input_labels']}  k={report['incompleteness_before']['k']}\n"
                f"result: {report['result_labels']}  ({res.status} after {res.rounds} round{'' if res.rounds == 1 else 's'})\n")
        return text, code
    return ser.dumps(report), code


def _inc_json(inc) -> dict:
    return {"k": None if inc.complete else int(inc.k), "n": inc.n,
            "witnesses": [ser.transition_json(u) for u in inc.witnesses]}


def _find_paths(data):
    if isinstance(data, dict):
        if data.get("kind") in ("finite", "lasso") and "prefix" in data and isinstance(data.get("start"), list):
            yield data
            return
        for k in sorted(data):
            yield from _find_paths(data[k])
    elif isinstance(data, list):
        for x in data:
            yield from _find_paths(x)


def cmd_replay(args) -> tuple[str, int]:
    spec = load_spec(args.file)
    try:
        with open(args.witness, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise FileNotFoundError(f"{args.witness}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{args.witness}: {exc.msg}", exc.lineno, exc.colno) from None
    results = []
    for item in _find_paths(data):
        try:
            path = ser.path_from_json(spec, item)
            ok = replay(path)
            results.append({"ok": ok, "labels": ser.path_text(path), "complete": is_complete(path)})
        except ser.ReplayError as exc:
            results.append({"ok": False, "error": str(exc)})
    if not results:
        raise ParseError(f"{args.witness}: no serialized path found", 1, 1)
    code = 0 if all(r["ok"] for r in results) else 1
    if _fmt(args) == "text":
        lines = [f"{'ok' if r['ok'] else 'FAIL'}: {r.get('labels', r.get('error'))}" for r in results]
        return "\n".join(lines) + "\n", code
    return ser.dumps({"command": ["replay", args.file, args.witness], "paths": results}), code


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ccsfair", description="Net and LTS semantics of CCS with outputs; fair scheduler checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt="text", depth=None):
        sp.add_argument("--format", choices=("json", "dot", "text"), default=fmt)
        sp.add_argument("--depth", type=_nonneg, default=depth, help="exploration depth bound")
        sp.add_argument("--bound", type=_pos, default=500, help="state/marking bound (default %(default)s)")

    sp = sub.add_parser("lts", help="reachable labelled transition system")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(func=cmd_lts, bound=10_000)

    sp = sub.add_parser("net", help="reachable markings and derived net transitions")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(func=cmd_net)

    sp = sub.add_parser("check", help="run a semantic check")
    sp.add_argument("which", choices=("bisim", "safe", "conflict", "injective", "scheduler"))
    sp.add_argument("file", nargs="?")
    common(sp, fmt="json")
    sp.add_argument("--prefix-bound", type=_pos, default=8)
    sp.add_argument("--cycle-bound", type=_pos, default=8)
    sp.add_argument("--balance-cap", type=_nonneg, default=8)
    sp.add_argument("--seed", type=int, default=0, help="seed for --random")
    sp.add_argument("--random", type=_nonneg, default=0, metavar="K", help="also check K random specs")
    for flag, default in (("r1", "r1"), ("r2", "r2"), ("t1", "t1"), ("t2", "t2"), ("e", "e")):
        sp.add_argument(f"--{flag}", default=default)
    sp.add_argument("--timing", action="store_true", help="add wall-clock time to the report")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("hat", help="wrap a scheduler with the interface agents")
    sp.add_argument("file")
    sp.add_argument("--r1", default="r1")
    sp.add_argument("--r2", default="r2")
    sp.add_argument("--c1", default="c1")
    sp.add_argument("--c2", default="c2")
    sp.add_argument("--relabel", help="extra items new/old,... for the relabelling")
    sp.add_argument("-o", "--output", help="write the spec here instead of stdout")
    sp.set_defaults(func=cmd_hat)

    sp = sub.add_parser("embellish", help="complete a lasso or finite path by inserting non-blocking steps")
    sp.add_argument("file")
    sp.add_argument("--prefix", default="", help="space-separated labels, optional #i index")
    sp.add_argument("--cycle", default="", help="labels of the cycle; empty for a finite path")
    sp.add_argument("--rounds", type=_pos, default=16)
    sp.add_argument("--format", choices=("json", "text"), default="json")
    sp.set_defaults(func=cmd_embellish)

    sp = sub.add_parser("replay", help="re-validate serialized paths against a spec")
    sp.add_argument("file")
    sp.add_argument("witness", help="JSON path or report containing paths")
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out, code = args.func(args)
    except UsageError as exc:
        print(f"ccsfair: {exc}", file=sys.stderr)
        return EX_USAGE
    except FileNotFoundError as exc:
        print(f"ccsfair: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except (ParseError, SpecError) as exc:
        print(f"ccsfair: {exc}", file=sys.stderr)
        return EX_DATAERR
    except CCSError as exc:
        print(f"ccsfair: {exc}", file=sys.stderr)
        return EX_DATAERR
    sys.stdout.write(out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

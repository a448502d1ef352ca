"""Command line front end: ``sgq list`` and ``sgq verify``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .complexes import FAIL, INCONCLUSIVE, PASS, CheckReport
from .errors import BadParameter, SGQError, UnknownScenario
from .scenarios import REGISTRY, Context, get, list_scenarios

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    names: list
    params: dict = field(default_factory=dict)
    context: Context = field(default_factory=Context)
    fmt: str = "text"
    jobs: int = 1
    timings: bool = False


def exit_code(reports: Sequence[CheckReport]) -> int:
    verdicts = {r.verdict for r in reports}
    if FAIL in verdicts:
        return EXIT_FAIL
    if INCONCLUSIVE in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def summary(reports: Sequence[CheckReport], wall_millis: int = 0) -> dict:
    out = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0}
    for r in reports:
        out[r.verdict] += 1
    out["wall_millis"] = wall_millis
    return out


def _window_text(r: CheckReport) -> str:
    W = r.window
    if W is None:
        return "-"
    return f"deg {W.dmin}..{W.dmax}, wt {W.wmin}..{W.wmax}, N={W.N}"


def emit_report(reports: Sequence[CheckReport], fmt: str = "text", wall_millis: int = 0,
                timings: bool = False) -> bytes:
    reports = sorted(reports, key=lambda r: r.scenario)
    if fmt == "json":
        doc = {"reports": [r.to_dict(timings) for r in reports],
               "summary": summary(reports, wall_millis)}
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()
    lines = []
    for r in reports:
        line = f"[{r.verdict.upper()}] {r.scenario} ({_window_text(r)}) — {r.anchor}"
        if timings:
            line += f" [{r.millis} ms]"
        lines.append(line)
    s = summary(reports, wall_millis)
    lines.append(f"{s[PASS]} pass, {s[FAIL]} fail, {s[INCONCLUSIVE]} inconclusive")
    return ("\n".join(lines) + "\n").encode()


def _run_one(name: str, params: dict, ctx: Context) -> CheckReport:
    sc = get(name)
    try:
        return sc.run(params, ctx)
    except SGQError as exc:
        return CheckReport(name, FAIL, witness=f"{type(exc).__name__}: {exc}",
                           window=ctx.window(sc.window), anchor=sc.anchor,
                           details={"error": type(exc).__name__})


def scoped_params(config: RunConfig) -> dict:
    """Per-scenario raw parameters; every given key must belong to some selected scenario."""
    out = {n: {} for n in config.names}
    for key, value in config.params.items():
        used = False
        for n in config.names:
            if any(p.name == key for p in get(n).params):
                out[n][key] = value
                used = True
        if not used:
            raise BadParameter(f"no selected scenario takes parameter {key!r}")
    for n, raw in out.items():
        get(n).resolve(raw)
    return out


def run(config: RunConfig) -> tuple:
    """Run the selected scenarios; returns ``(reports sorted by name, wall_millis)``."""
    for n in config.names:
        get(n)
    per = scoped_params(config)
    t0 = time.perf_counter()
    names = sorted(set(config.names))
    if config.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futs = [pool.submit(_run_one, n, per[n], config.context) for n in names]
            reports = [f.result() for f in futs]
    else:
        reports = [_run_one(n, per[n], config.context) for n in names]
    wall = int((time.perf_counter() - t0) * 1000)
    return sorted(reports, key=lambda r: r.scenario), wall


def _parse_params(items: Sequence[str], extra: Sequence[str]) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects key=value, got {item!r}")
        out[key] = value
    # scenario parameters may also be given as --key value
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--") or len(tok) < 3:
            raise UsageError(f"unexpected argument {tok!r}")
        key, sep, value = tok[2:].partition("=")
        if not sep:
            value = next(it, None)
            if value is None:
                raise UsageError(f"{tok} needs a value")
        out[key] = value
    return out


def _env_max_degree() -> int | None:
    raw = os.environ.get("SGQ_MAX_DEGREE")
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SGQ_MAX_DEGREE must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sgq", description="Exact verification of shifted symplectic "
                 "and quantization statements on finite windows.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    ls = sub.add_parser("list", help="list scenarios")
    ls.add_argument("--format", choices=("text", "json"), default="text")
    v = sub.add_parser("verify", help="run scenarios",
                       epilog="Unrecognised --key value pairs are read as scenario parameters.")
    v.add_argument("names", nargs="*", metavar="scenario")
    v.add_argument("--all", action="store_true", help="run every scenario")
    v.add_argument("--param", action="append", default=[], metavar="k=v")
    v.add_argument("--max-degree", type=int, metavar="N",
                   help="filtration bound N (default: $SGQ_MAX_DEGREE or per scenario)")
    v.add_argument("--dmin", type=int, help="lowest cohomological degree")
    v.add_argument("--dmax", type=int, help="highest cohomological degree")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--jobs", type=int, default=1, metavar="K")
    v.add_argument("--moment-sign", choices=("plus", "minus"), default="plus")
    v.add_argument("--timings", action="store_true", help="include per-scenario millis")
    return ap


def config_from_args(argv: Sequence[str]) -> tuple:
    ap = build_parser()
    args, extra = ap.parse_known_args(argv)
    if args.command == "list":
        if extra:
            raise UsageError(f"unexpected arguments {' '.join(extra)}")
        return args, None
    names = list(args.names)
    if args.all:
        names = sorted(set(names) | set(REGISTRY))
    if not names:
        raise UsageError("give scenario names or --all")
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")
    N = args.max_degree if args.max_degree is not None else _env_max_degree()
    if N is not None and N < 0:
        raise UsageError("--max-degree must be non-negative")
    ctx = Context(max_degree=N, moment_sign=1 if args.moment_sign == "plus" else -1,
                  dmin=args.dmin, dmax=args.dmax)
    cfg = RunConfig(names, _parse_params(args.param, extra), ctx, args.format, args.jobs,
                    args.timings)
    return args, cfg


def _list(fmt: str) -> bytes:
    rows = list_scenarios()
    if fmt == "json":
        doc = [{"name": n, "description": d, "anchor": a,
                "params": [p.describe() for p in REGISTRY[n].params]} for n, d, a in rows]
        return (json.dumps(doc, indent=2) + "\n").encode()
    lines = []
    for n, d, a in rows:
        lines.append(f"{n}\n    {d}\n    anchor: {a}")
        for p in REGISTRY[n].params:
            lines.append(f"    param {p.describe()}")
    return ("\n".join(lines) + "\n").encode()


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    out = sys.stdout.buffer
    try:
        args, cfg = config_from_args(argv)
        if cfg is None:
            out.write(_list(args.format))
            out.flush()
            return EXIT_PASS
        reports, wall = run(cfg)
    except (UsageError, UnknownScenario, BadParameter) as exc:
        sys.stderr.write(f"sgq: error: {exc}\n")
        return EXIT_USAGE
    out.write(emit_report(reports, cfg.fmt, wall, cfg.timings))
    out.flush()
    return exit_code(reports)


if __name__ == "__main__":
    sys.exit(main())

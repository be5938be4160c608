"""Command-line experiment runner.

Builds shear-family surfaces, sweeps parameters, runs the extremal-length
solvers and emits CSV/JSON artifacts for plotting and scripted checks.
Outputs are deterministic for a fixed resolved configuration: the only
run-dependent field is a timestamp isolated in a header comment, and every
artifact embeds the resolved configuration and the package version.

Exit codes: 0 success (and ``distinct`` verdicts), 2 for an
``indistinguishable`` certificate verdict, 64 for usage errors, 1 for
internal failures.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import time
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import __version__
from .curves import (NAMED_CURVES, apply_multitwist, curve_from_name,
                     intersection_number, ivanov_bounds)
from .errors import PillowcaseError
from .gm import (DEFAULT_WITNESS, ExtremalEvaluator, divergence_certificate,
                 horosphere_check, kerckhoff_lower_bound,
                 twist_convergence_table)
from .modulus import SolverOptions, extremal_density_field, extremal_length

EXIT_OK = 0
EXIT_INDISTINGUISHABLE = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 1


class UsageError(Exception):
    """Bad arguments or configuration; maps to exit code 64."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 64
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Configuration handling
# ---------------------------------------------------------------------------


def _read_config_file(path: str) -> Dict[str, str]:
    """Parse a plain ``key=value`` config file; '#' starts a comment."""
    out: Dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(
                        f"{path}:{lineno}: expected key=value, got {line!r}")
                key, val = line.split("=", 1)
                out[key.strip()] = val.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    return out


def _dyadic(text: str) -> Fraction:
    try:
        s = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}")
    if s.denominator & (s.denominator - 1):
        raise UsageError(f"shear {text!r} is not dyadic")
    return s


def _dyadic_list(text: str) -> List[Fraction]:
    return [_dyadic(p) for p in text.split(",") if p.strip()]


def _check_level(level: int) -> int:
    if not 2 <= level <= 8:
        raise UsageError(f"level {level} outside [2, 8]")
    return level


def _curve_names(text: str) -> List[str]:
    names = [p.strip() for p in text.split(",") if p.strip()]
    for n in names:
        if n not in NAMED_CURVES:
            raise UsageError(
                f"unknown curve {n!r}; choose from {sorted(NAMED_CURVES)}")
    if not names:
        raise UsageError("empty curve list")
    return names


def resolve_config(args: argparse.Namespace,
                   fields: Sequence[str]) -> Dict[str, str]:
    """Merge the config file with flag overrides into a flat string map.

    Flags explicitly given on the command line win over file entries; a
    file entry wins over a flag's default.
    """
    file_cfg = _read_config_file(args.config) if args.config else {}
    unknown = set(file_cfg) - set(fields)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    resolved: Dict[str, str] = {}
    for name in fields:
        val = getattr(args, name)
        from_flag = name in getattr(args, "_explicit", set())
        if not from_flag and name in file_cfg:
            resolved[name] = file_cfg[name]
        elif val is not None:
            resolved[name] = str(val)
    resolved["command"] = args.cmd
    resolved["version"] = __version__
    return resolved


class _TrackedStore(argparse.Action):
    """Store action that records which flags were given explicitly."""

    def __call__(self, parser, ns, values, option_string=None):
        setattr(ns, self.dest, values)
        if not hasattr(ns, "_explicit"):
            ns._explicit = set()
        ns._explicit.add(self.dest)


def _solver_options(cfg: Dict[str, str]) -> SolverOptions:
    lo = _check_level(int(cfg.get("level_min", "3")))
    hi = _check_level(int(cfg.get("level_max", "4")))
    if hi < lo:
        raise UsageError("level_max below level_min")
    opts = SolverOptions(levels=(lo, hi))
    if "oracle_tol" in cfg:
        opts = opts.replace(oracle_tol=float(cfg["oracle_tol"]))
    return opts


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------


def _open_out(cfg: Dict[str, str]):
    path = cfg.get("output")
    if path and path != "-":
        return open(path, "w", encoding="utf-8", newline="")
    return None


def _config_comment(cfg: Dict[str, str]) -> List[str]:
    stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    lines = [f"# generated: {stamp}"]
    for key in sorted(cfg):
        lines.append(f"# config {key}={cfg[key]}")
    return lines


def _emit_csv(cfg: Dict[str, str], header: List[str],
              rows: List[List], stdout) -> None:
    buf = io.StringIO()
    for line in _config_comment(cfg):
        buf.write(line + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(c) for c in row) + "\n")
    _write_out(cfg, buf.getvalue(), stdout)


def _emit_json(cfg: Dict[str, str], payload: dict, stdout) -> None:
    doc = {"_comment": _config_comment(cfg)[0].lstrip("# "),
           "config": cfg}
    doc.update(payload)
    _write_out(cfg, json.dumps(doc, sort_keys=True, indent=2,
                               ensure_ascii=False) + "\n", stdout)


def _write_out(cfg: Dict[str, str], text: str, stdout) -> None:
    fh = _open_out(cfg)
    if fh is None:
        stdout.write(text)
    else:
        with fh:
            fh.write(text)


def _fmt(cell) -> str:
    if isinstance(cell, float):
        return repr(cell)
    if isinstance(cell, Fraction):
        return str(cell)
    return str(cell)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_ext_alpha(args, stdout) -> int:
    fields = ("s_values", "level_min", "level_max", "oracle_tol", "output")
    cfg = resolve_config(args, fields)
    s_values = sorted(set(_dyadic_list(cfg.get("s_values",
                                               "0,1/8,-1/8,1/4,-1/4"))))
    opts = _solver_options(cfg)
    header = ["s", "value", "lo", "hi", "levels"]
    rows: List[List] = []
    failed = False
    for s in s_values:
        try:
            rep = extremal_length(s, "alpha", opts)
            lo, hi = rep.interval
            rows.append([s, rep.value, lo, hi,
                         ";".join(str(x) for x in rep.levels)])
        except PillowcaseError as exc:
            rows.append([s, "FAILED", "", "", type(exc).__name__])
            failed = True
    # Local-maximum summary at s=0 against the |s| <= 1/4 grid points.
    by_s = {row[0]: row for row in rows if row[1] != "FAILED"}
    summary = ""
    if Fraction(0) in by_s:
        lo0 = by_s[Fraction(0)][2]
        others = [r for s, r in by_s.items()
                  if s != 0 and abs(s) <= Fraction(1, 4)]
        if others:
            strict = all(lo0 > r[3] for r in others)
            summary = "strict_max_at_zero=" + ("true" if strict else "false")
    for row in rows:
        row.append(summary if row is rows[0] else "")
    header.append("summary")
    _emit_csv(cfg, header, rows, stdout)
    return EXIT_INTERNAL if failed else EXIT_OK


def cmd_certificate(args, stdout) -> int:
    fields = ("s_pair", "witness", "level_min", "level_max", "oracle_tol",
              "output")
    cfg = resolve_config(args, fields)
    pair = _dyadic_list(cfg.get("s_pair", ""))
    if len(pair) != 2:
        raise UsageError("certificate needs exactly two s values")
    witness = _curve_names(cfg.get("witness", "eta,nu"))
    if "nu" not in witness:
        raise UsageError("witness set must include nu")
    ev = ExtremalEvaluator(_solver_options(cfg))
    cert = divergence_certificate(pair[0], pair[1], witness, ev)
    _emit_json(cfg, {"certificate": cert.to_dict()}, stdout)
    return EXIT_OK if cert.verdict == "distinct" else EXIT_INDISTINGUISHABLE


def cmd_intersections(args, stdout) -> int:
    fields = ("curves", "twist", "output")
    cfg = resolve_config(args, fields)
    names = _curve_names(cfg.get("curves", "alpha,beta,eta,nu"))
    twist = int(cfg.get("twist", "-1"))
    rows: List[List] = []
    if twist < 0:
        header = ["gamma", "delta", "i"]
        for g in names:
            for d in names:
                rows.append([g, d, intersection_number(
                    curve_from_name(g), curve_from_name(d))])
    else:
        header = ["gamma", "delta", "n", "lower", "actual", "upper"]
        for g in names:
            for d in names:
                cg, cd = curve_from_name(g), curve_from_name(d)
                lo, hi = ivanov_bounds(cg, cd, twist)
                actual = intersection_number(apply_multitwist(cg, twist), cd)
                rows.append([g, d, twist, lo, actual, hi])
    _emit_csv(cfg, header, rows, stdout)
    return EXIT_OK


def cmd_density_field(args, stdout) -> int:
    fields = ("s", "target", "level", "output")
    cfg = resolve_config(args, fields)
    s = _dyadic(cfg.get("s", "0"))
    target = cfg.get("target", "alpha")
    if target not in NAMED_CURVES:
        raise UsageError(f"unknown curve {target!r}")
    level = _check_level(int(cfg.get("level", "3")))
    xs, ys, rho = extremal_density_field(s, target, level)
    rows = sorted([float(x), float(y), float(r)]
                  for x, y, r in zip(xs, ys, rho))
    _emit_csv(cfg, ["x", "y", "rho"], rows, stdout)
    return EXIT_OK


def cmd_horosphere(args, stdout) -> int:
    fields = ("s_values", "tolerance", "level_min", "level_max",
              "oracle_tol", "output")
    cfg = resolve_config(args, fields)
    s_values = sorted(set(_dyadic_list(cfg.get("s_values", "0,1/8,1/4,1/2"))))
    tolerance = float(cfg.get("tolerance", "0.02"))
    ev = ExtremalEvaluator(_solver_options(cfg))
    result = horosphere_check(s_values, tolerance, ev)
    _emit_json(cfg, {"horosphere": result}, stdout)
    return EXIT_OK if result["passed"] else EXIT_INTERNAL


def cmd_twist_table(args, stdout) -> int:
    fields = ("gamma", "s", "n_max", "level_min", "level_max", "oracle_tol",
              "output")
    cfg = resolve_config(args, fields)
    gamma = cfg.get("gamma", "eta")
    if gamma not in NAMED_CURVES:
        raise UsageError(f"unknown curve {gamma!r}")
    s = _dyadic(cfg.get("s", "0"))
    n_max = int(cfg.get("n_max", "4"))
    if not 1 <= n_max <= 8:
        raise UsageError("n_max must lie in [1, 8]")
    ev = ExtremalEvaluator(_solver_options(cfg))
    table = twist_convergence_table(gamma, s, n_max, ev)
    _emit_json(cfg, {"gamma": gamma, "s": str(s), "table": table}, stdout)
    return EXIT_OK


def cmd_kerckhoff(args, stdout) -> int:
    fields = ("s_pair", "witness", "level_min", "level_max", "oracle_tol",
              "output")
    cfg = resolve_config(args, fields)
    pair = _dyadic_list(cfg.get("s_pair", ""))
    if len(pair) != 2:
        raise UsageError("kerckhoff needs exactly two s values")
    witness = _curve_names(cfg.get("witness", ",".join(DEFAULT_WITNESS)))
    ev = ExtremalEvaluator(_solver_options(cfg))
    bound = kerckhoff_lower_bound(pair[0], pair[1], witness, ev)
    _emit_json(cfg, {"s_pair": [str(s) for s in pair],
                     "witness": witness,
                     "distance_lower_bound": bound}, stdout)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def _add(sub, name, func, flags) -> None:
    p = sub.add_parser(name)
    p.set_defaults(func=func, cmd=name)
    p.add_argument("--config", default=None)
    p.add_argument("--output", action=_TrackedStore, default=None)
    for flag in flags:
        p.add_argument("--" + flag.replace("_", "-"), dest=flag,
                       action=_TrackedStore, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="pillowcase")
    parser.add_argument("--version", action="version",
                        version=f"pillowcase {__version__}")
    sub = parser.add_subparsers(dest="cmd")
    _add(sub, "ext-alpha", cmd_ext_alpha,
         ["s_values", "level_min", "level_max", "oracle_tol"])
    _add(sub, "certificate", cmd_certificate,
         ["s_pair", "witness", "level_min", "level_max", "oracle_tol"])
    _add(sub, "intersections", cmd_intersections, ["curves", "twist"])
    _add(sub, "density-field", cmd_density_field, ["s", "target", "level"])
    _add(sub, "horosphere", cmd_horosphere,
         ["s_values", "tolerance", "level_min", "level_max", "oracle_tol"])
    _add(sub, "twist-table", cmd_twist_table,
         ["gamma", "s", "n_max", "level_min", "level_max", "oracle_tol"])
    _add(sub, "kerckhoff", cmd_kerckhoff,
         ["s_pair", "witness", "level_min", "level_max", "oracle_tol"])
    return parser


def main(argv: Optional[Sequence[str]] = None,
         stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "cmd", None):
            raise UsageError("a subcommand is required")
        if not hasattr(args, "_explicit"):
            args._explicit = set()
        return args.func(args, stdout)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except PillowcaseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every command resolves its configuration (built-in defaults, then a
key=value config file, then a named preset, then explicit flags), writes
``manifest.json`` into the output directory, and only then starts the
numerical work.  Exit codes: 0 success, 2 bad or forbidden input, 3 a
computation failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .boxsys import EnergyBasis, SystemConfig
from .dynamics import (
    EvolvingState,
    carpet,
    default_tgrid,
    transition_law,
    transition_series,
    adjacent_pairs,
    variance_series,
    write_carpet_csv,
    write_transition_csv,
    write_variance_csv,
)
from .errors import (
    DegenerateSpectrum,
    DomainError,
    FormUnavailable,
    InvalidParam,
    SingularGamma,
    TempusError,
)
from .spectra import (
    CanonicalTrialVector,
    ccr_residual,
    diagonalize,
    has_parity,
    match_routes,
    route_b,
    write_spectrum_csv,
)
from .symmetry import check_relations, classify, write_report_csv
from .timeops import AlphaSequence, ArrivalTime, Characteristic, OperatorSpec, build_matrix

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 2, 3
USAGE_ERRORS = (InvalidParam, DomainError, SingularGamma, DegenerateSpectrum, FormUnavailable)

DEFAULTS = {
    "gamma": "pi/2",
    "family": "arrival",
    "s": "0",
    "alpha": "zero",
    "N": 50,
    "mass": 1.0,
    "half_length": 1.0,
    "hbar": 1.0,
    "route": "A",
    "count": 5,
    "sector": "auto",
    "branch": "auto",
    "variant": "corrected",
    "n": 1,
    "pair": 0,
    "q_points": 401,
    "t_points": 0,
    "trials": 20,
    "seed": 0,
    "jobs": 1,
    "arrival_tol": 0.05,
    "slope_low": 0.9,
    "slope_high": 1.1,
    "min_height": 0.9,
    "law_count": 10,
}
CASTS = {k: type(v) for k, v in DEFAULTS.items()}

_S_VALUES = {"a": "0", "b": "5", "c": "10", "d": "15"}
_ALPHA_RULES = {"a": "zero", "b": "power:50,1", "c": "power:50,20", "d": "power:50,25"}


def _presets() -> dict:
    out = {}
    for letter, s in _S_VALUES.items():
        odd = {"gamma": "pi/2", "family": "arrival", "s": s, "sector": "odd", "branch": "+", "n": 1}
        even = {"gamma": "0", "family": "arrival", "s": s, "sector": "even", "branch": "+", "n": 1}
        out[f"fig1{letter}"] = ("carpet", odd)
        out[f"fig2{letter}"] = ("variance", odd)
        out[f"fig3{letter}"] = ("carpet", even)
        out[f"fig4{letter}"] = ("variance", even)
    for letter, rule in _ALPHA_RULES.items():
        # the boundary phase pi/2 is degenerate for this family; pi/4 stands in
        fam = "cto" if rule == "zero" else "gto"
        base = {"gamma": "pi/4", "family": fam, "alpha": rule}
        out[f"fig5{letter}"] = ("transition", dict(base, pair=1))
        out[f"fig6{letter}"] = ("transition", dict(base, pair=0))
    return out


PRESETS = _presets()


def parse_gamma(text) -> float:
    """Decimal radians or a rational multiple of pi such as "pi/2", "-3pi/4"."""
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().replace(" ", "").lower()
    m = re.fullmatch(r"([+-]?\d*\.?\d*)\*?pi(?:/(\d+\.?\d*))?", t)
    if m:
        coef = m.group(1)
        c = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef)
        c = float(coef) if c is None else c
        return c * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    try:
        return float(t)
    except ValueError:
        raise InvalidParam(f"cannot parse gamma {text!r}") from None


def parse_floats(text) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise InvalidParam(f"cannot parse number list {text!r}") from None


def read_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in DEFAULTS:
            raise InvalidParam(f"{path}:{lineno}: unknown or malformed entry {raw!r}")
        out[key] = value.strip()
    return out


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    path = args.config or os.environ.get("TEMPUS_CONFIG")
    if path:
        cfg.update(read_config_file(path))
    if args.preset:
        if args.preset not in PRESETS:
            raise InvalidParam(f"unknown preset {args.preset!r}")
        target, values = PRESETS[args.preset]
        if target != command:
            raise InvalidParam(f"preset {args.preset} belongs to the {target} command")
        cfg.update(values)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    try:
        for key, cast in CASTS.items():
            cfg[key] = cast(cfg[key])
    except ValueError as exc:
        raise InvalidParam(str(exc)) from None
    cfg["gamma_value"] = parse_gamma(cfg["gamma"])
    if cfg["N"] < 1 or cfg["jobs"] < 1:
        raise InvalidParam("N and jobs must be positive")
    return cfg


def make_spec(cfg: dict, s: float | None = None) -> OperatorSpec:
    g = cfg["gamma_value"]
    fam = cfg["family"]
    if fam == "arrival":
        return OperatorSpec(ArrivalTime(cfg["s_values"][0] if s is None else s), g)
    alpha = AlphaSequence() if fam == "cto" else AlphaSequence.parse(cfg["alpha"])
    if fam == "gto" and alpha.rule == "zero":
        raise InvalidParam("family gto needs a non-zero --alpha rule")
    return OperatorSpec(Characteristic(alpha), g)


def system(cfg: dict) -> SystemConfig:
    return SystemConfig(cfg["mass"], cfg["half_length"], cfg["hbar"], cfg["gamma_value"])


def write_manifest(out_dir: Path, command: str, cfg: dict, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": {k: cfg[k] for k in sorted(cfg)},
        "outputs": outputs,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _parallel(jobs: int, fn, items):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _sectors(cfg: dict) -> list[str]:
    if cfg["sector"] != "auto":
        return [cfg["sector"]]
    g = cfg["gamma_value"]
    return ["even", "odd"] if g in (0.0, math.pi / 2) else ["general"]


def select_eigenpair(pairs, cfg: dict):
    """The n-th eigenpair (1-based, largest |tau| first) of one sector and sign."""
    sector = cfg["sector"]
    if sector == "auto":
        sector = "general"
        if has_parity(cfg["gamma_value"]):
            sector = "even" if cfg["gamma_value"] == 0.0 else "odd"
    signs = {"auto": (1,), "+": (1,), "-": (-1,), "both": (1, -1)}[cfg["branch"]]
    pool = [p for p in pairs
            if (sector == "general" or p.sector == sector) and any(p.tau * sg > 0 for sg in signs)]
    pool.sort(key=lambda p: -abs(p.tau))
    n = cfg["n"]
    if not 1 <= n <= len(pool):
        raise InvalidParam(f"--n {n} out of range: {len(pool)} eigenpairs in the selection")
    return pool[n - 1]


def _route_a(cfg: dict, spec: OperatorSpec, reference: bool = False):
    basis = EnergyBasis(system(cfg), cfg["N"])
    matrix = build_matrix(spec, basis)
    ref = build_matrix(spec, basis.with_cutoff(2 * cfg["N"])) if reference else None
    return diagonalize(matrix, ref)


# ---------------------------------------------------------------- commands

def cmd_spectrum(cfg: dict, out: Path) -> int:
    routes = {"A": ("A",), "B": ("B",), "both": ("A", "B")}.get(cfg["route"])
    if routes is None:
        raise InvalidParam("--route must be A, B or both")
    if cfg["family"] == "arrival":
        specs = [make_spec(cfg, s) for s in cfg["s_values"]]
    else:
        specs = [make_spec(cfg)]
    if "B" in routes and not specs[0].is_arrival:
        raise FormUnavailable("the closed-form route exists only for the arrival family")
    branch = "both" if cfg["branch"] == "auto" else cfg["branch"]
    sectors = _sectors(cfg)
    write_manifest(out, "spectrum", cfg, ["spectrum.csv"])

    def run(spec):
        a_pairs = _route_a(cfg, spec, reference=True) if "A" in routes else []
        b_pairs = []
        if "B" in routes:
            for sec in sectors:
                b_pairs += route_b(spec, sec, cfg["count"], system(cfg), branch=branch,
                                   variant=cfg["variant"])
        notes = []
        if a_pairs and b_pairs:
            for m in match_routes(b_pairs, a_pairs):
                status = f"rel_error={m.rel_error:.3e}" if m.matched else "UNMATCHED"
                notes.append(f"{spec.label} {m.route_b.sector} tau={m.route_b.tau:.10g} {status}")
        return spec.label, a_pairs + b_pairs, notes

    groups = []
    for label, pairs, notes in _parallel(cfg["jobs"], run, specs):
        groups.append((label, pairs))
        for line in notes:
            print(line)
    write_spectrum_csv(out / "spectrum.csv", groups, cfg["N"])
    return EXIT_OK


def _single_s(cfg: dict) -> None:
    if len(cfg["s_values"]) != 1:
        raise InvalidParam("this command takes a single --s value")


def cmd_carpet(cfg: dict, out: Path) -> int:
    _single_s(cfg)
    spec = make_spec(cfg)
    write_manifest(out, "carpet", cfg, ["carpet.csv"])
    pair = select_eigenpair(_route_a(cfg, spec), cfg)
    l = cfg["half_length"]
    q = np.linspace(-l, l, cfg["q_points"])
    t = default_tgrid(pair.tau, cfg["t_points"] or 201)
    grid = carpet(EvolvingState.from_eigenpair(pair), q, t)
    write_carpet_csv(out / "carpet.csv", grid)
    print(f"tau={pair.tau:.10g} sector={pair.sector}")
    return EXIT_OK


def cmd_variance(cfg: dict, out: Path) -> int:
    _single_s(cfg)
    spec = make_spec(cfg)
    write_manifest(out, "variance", cfg, ["variance.csv"])
    pair = select_eigenpair(_route_a(cfg, spec), cfg)
    t = default_tgrid(pair.tau, cfg["t_points"] or 2001)
    series = variance_series(EvolvingState.from_eigenpair(pair), t, tau=pair.tau)
    write_variance_csv(out / "variance.csv", series)
    offset = series.arrival_offset / abs(pair.tau)
    verdict = "within" if offset <= cfg["arrival_tol"] else "outside"
    print(f"tau={pair.tau:.10g} t_min={series.t_min:.10g} |t_min-tau|/tau={offset:.4f} "
          f"({verdict} {cfg['arrival_tol']:g})")
    return EXIT_OK


def cmd_transition(cfg: dict, out: Path) -> int:
    _single_s(cfg)
    spec = make_spec(cfg)
    single = cfg["pair"] > 0
    name = "transition.csv" if single else "transition_law.csv"
    write_manifest(out, "transition", cfg, [name])
    pairs = _route_a(cfg, spec)
    band = (cfg["slope_low"], cfg["slope_high"])
    if single:
        adj = adjacent_pairs(pairs, cfg["law_count"])
        if cfg["pair"] > len(adj):
            raise InvalidParam(f"--pair {cfg['pair']} out of range (1..{len(adj)})")
        a, b = adj[cfg["pair"] - 1]
        series = transition_series(a, b, default_tgrid(b.tau - a.tau, cfg["t_points"] or 2001))
        write_transition_csv(out / name, series)
        print(f"tau_diff={series.tau_diff:.10g} t_max={series.t_max:.10g} p_max={series.p_max:.6f}")
        return EXIT_OK
    law = transition_law(pairs, cfg["law_count"], band, cfg["min_height"], cfg["t_points"] or 2001)
    with open(out / name, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau_diff", "t_max", "p_max"])
        for x, y, h in zip(law.tau_diff, law.t_max, law.heights):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(h))])
        w.writerow(["slope", repr(law.slope), ""])
        w.writerow(["min_height", repr(float(law.heights.min())), ""])
    print(f"slope={law.slope:.6f} (band {band[0]:g}..{band[1]:g}: {'ok' if law.slope_ok else 'fails'}) "
          f"min peak={law.heights.min():.4f} (> {cfg['min_height']:g}: {'ok' if law.heights_ok else 'fails'})")
    return EXIT_OK


def cmd_symmetry(cfg: dict, out: Path) -> int:
    if cfg["family"] == "arrival":
        specs = [make_spec(cfg, s) for s in cfg["s_values"]]
    else:
        specs = [make_spec(cfg)]
    write_manifest(out, "symmetry", cfg, ["symmetry.csv"])
    basis = EnergyBasis(system(cfg), cfg["N"])
    results = _parallel(cfg["jobs"], lambda sp: check_relations(sp, basis), specs)
    reports = [r for rs in results for r in rs]
    write_report_csv(out / "symmetry.csv", reports)
    for spec, rs in zip(specs, results):
        print(f"{spec.family_name} {spec.label}: {classify(rs)}; "
              + ", ".join(f"{r.relation}={r.verdict}" for r in rs))
    return EXIT_OK


def cmd_verify_ccr(cfg: dict, out: Path) -> int:
    _single_s(cfg)
    spec = make_spec(cfg)
    write_manifest(out, "verify-ccr", cfg, ["ccr.csv"])
    basis = EnergyBasis(system(cfg), cfg["N"])
    matrix = build_matrix(spec, basis)
    rng = np.random.default_rng(cfg["seed"])
    worst = 0.0
    with open(out / "ccr.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "residual"])
        for i in range(cfg["trials"]):
            res = ccr_residual(matrix, CanonicalTrialVector.random(basis, rng), +1)
            worst = max(worst, res)
            w.writerow([i, repr(res)])
    print(f"{spec.family_name} {spec.label}: worst residual {worst:.3e} over {cfg['trials']} trials (sign +)")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "carpet": cmd_carpet,
    "variance": cmd_variance,
    "transition": cmd_transition,
    "symmetry": cmd_symmetry,
    "verify-ccr": cmd_verify_ccr,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", help='boundary phase: radians or a multiple of pi, e.g. "pi/2"')
    common.add_argument("--family", choices=["arrival", "cto", "gto"])
    common.add_argument("--s", help="ordering parameter; a comma list sweeps spectrum/symmetry")
    common.add_argument("--alpha", help='diagonal rule: "zero", "power:C,P" or "explicit:k=v;k=v"')
    common.add_argument("--N", type=int, help="basis cutoff (states k=-N..N)")
    common.add_argument("--out-dir", default=".", help="directory for CSV files and manifest")
    common.add_argument("--jobs", type=int, help="worker threads for parameter sweeps")
    common.add_argument("--preset", help="named figure bundle, fig1a..fig6d")
    common.add_argument("--config", help="key=value file (default: $TEMPUS_CONFIG)")
    common.add_argument("--mass", type=float)
    common.add_argument("--half-length", dest="half_length", type=float)
    common.add_argument("--hbar", type=float)

    select = argparse.ArgumentParser(add_help=False)
    select.add_argument("--n", type=int, help="eigenvalue index, 1 = largest |tau| in the selection")
    select.add_argument("--sector", choices=["auto", "even", "odd", "general"])
    select.add_argument("--branch", choices=["auto", "+", "-", "both"],
                        help="sign of tau; auto means + for dynamics and both for spectra")

    p = argparse.ArgumentParser(prog="tempus", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common, select], help="eigenvalues by one or both routes")
    sp.add_argument("--route", choices=["A", "B", "both"])
    sp.add_argument("--count", type=int, help="closed-form roots per sector")
    sp.add_argument("--variant", choices=["corrected", "printed", "half"])

    for name, helptext in (("carpet", "density |psi(q,t)|^2 of an evolved eigenfunction"),
                           ("variance", "position variance of an evolved eigenfunction")):
        c = sub.add_parser(name, parents=[common, select], help=helptext)
        c.add_argument("--t-points", dest="t_points", type=int)
        if name == "carpet":
            c.add_argument("--q-points", dest="q_points", type=int)
        else:
            c.add_argument("--arrival-tol", dest="arrival_tol", type=float)

    tr = sub.add_parser("transition", parents=[common], help="transition probabilities between eigenvectors")
    tr.add_argument("--pair", type=int, help="adjacent pair index (1-based); 0 fits the peak-time law")
    tr.add_argument("--law-count", dest="law_count", type=int, help="eigenvalues entering the law")
    tr.add_argument("--t-points", dest="t_points", type=int)
    tr.add_argument("--slope-low", dest="slope_low", type=float)
    tr.add_argument("--slope-high", dest="slope_high", type=float)
    tr.add_argument("--min-height", dest="min_height", type=float)

    sub.add_parser("symmetry", parents=[common], help="parity and time-reversal relations")

    cc = sub.add_parser("verify-ccr", parents=[common], help="commutator residuals on random trial vectors")
    cc.add_argument("--trials", type=int)
    cc.add_argument("--seed", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        cfg["s_values"] = parse_floats(cfg["s"])
        if not cfg["s_values"]:
            raise InvalidParam("--s needs at least one value")
        return COMMANDS[args.command](cfg, Path(args.out_dir))
    except USAGE_ERRORS as exc:
        print(f"tempus {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TempusError as exc:
        print(f"tempus {args.command}: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())

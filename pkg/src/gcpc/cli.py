"""Command-line driver: ``gcpc <command> ...``.

Every command except ``sample`` and ``grid`` (without ``--output``) prints a
JSON document.  Exit codes: 0 success, 1 data error, 2 convergence failure,
64 usage error, 65 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .core import GcpcParams, canonical_angle, classify_unimodality, delta_to_gamma, interval_probability, pdf_polar, sample
from .errors import ConvergenceError, DegenerateError, GcpcError, ParameterError
from .inference import (
    FitOptions,
    _lrt,
    fit_cipc,
    fit_gcpc,
    location_ci,
    lrt_gcpc_vs_cipc,
    lrt_one_location,
    lrt_two_locations,
)
from .regression import build_design, compare_regressions, fit_regression, parse_predictor
from .simulation import ConfigError, campaign_from_dict, load_campaign, run_campaign
from .summaries import circular_summary

RESULT_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_DATA = 1
EXIT_CONVERGENCE = 2
EXIT_USAGE = 64
EXIT_CONFIG = 65


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# -- serialization ----------------------------------------------------------------------


def _plain(obj):
    """Reduce numpy scalars/arrays, tuples and dataclass-ish objects to JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, float):
        # JSON has no inf/nan; null keeps the document valid
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(_plain(obj), indent, 0)


@dataclass
class CommandResult:
    command: str
    argv: list
    inputs_digest: str | None
    outputs: dict
    warnings: list = field(default_factory=list)
    status: str = "ok"
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict:
        return {
            "schema_version": RESULT_SCHEMA_VERSION,
            "command": self.command,
            "argv": list(self.argv),
            "status": self.status,
            "exit_code": self.exit_code,
            "inputs_digest": self.inputs_digest,
            "outputs": self.outputs,
            "warnings": list(self.warnings),
            "version": __version__,
        }


def result_schema() -> dict:
    text = resources.files("gcpc").joinpath("data/result.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


# -- input --------------------------------------------------------------------------------


@dataclass(frozen=True)
class AngleColumnSpec:
    column: str | int = 0
    unit: str = "radians"
    range: str = "pm-pi"

    def __post_init__(self):
        if self.unit not in ("radians", "degrees"):
            raise UsageError(f"unit must be radians or degrees (got {self.unit!r})")
        if self.range not in ("pm-pi", "0-2pi"):
            raise UsageError(f"range must be pm-pi or 0-2pi (got {self.range!r})")

    def to_radians(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        if self.unit == "degrees":
            v = np.deg2rad(v)
        return canonical_angle(np.atleast_1d(v))

    def from_radians(self, x: float) -> float:
        x = float(canonical_angle(x))
        if self.range == "0-2pi" and x < 0:
            x += 2 * math.pi
        return math.degrees(x) if self.unit == "degrees" else x


def _digest(*blobs: bytes) -> str:
    h = hashlib.sha256()
    for b in blobs:
        h.update(b)
    return h.hexdigest()


def read_table(path) -> tuple[list, dict, bytes]:
    """Header-required, comma-separated UTF-8 CSV; returns (header, columns, raw bytes)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError:
        raise DataError(f"{path} is not UTF-8") from None
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path} has a header but no data rows")
    cols = {h: [] for h in header}
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, found {len(r)}")
        for h, c in zip(header, r):
            cols[h].append(c.strip())
    return header, cols, raw


def numeric_column(cols: dict, header: list, key, path) -> np.ndarray:
    if isinstance(key, int) or (isinstance(key, str) and key.isdigit() and key not in cols):
        idx = int(key)
        if not 0 <= idx < len(header):
            raise DataError(f"{path}: no column with index {idx}")
        key = header[idx]
    if key not in cols:
        raise DataError(f"{path}: unknown column {key!r} (have {', '.join(header)})")
    try:
        v = np.array([float(c) for c in cols[key]], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: column {key!r} is not numeric ({exc})") from None
    if not np.all(np.isfinite(v)):
        raise DataError(f"{path}: column {key!r} has non-finite values")
    return v


def read_angles(path, spec: AngleColumnSpec) -> tuple[np.ndarray, bytes]:
    header, cols, raw = read_table(path)
    return spec.to_radians(numeric_column(cols, header, spec.column, path)), raw


def _params_from_args(args) -> GcpcParams:
    gamma = args.gamma
    if getattr(args, "delta", None) is not None:
        if gamma is not None:
            raise UsageError("give either --gamma or --delta, not both")
        if not 0 <= args.delta < 1:
            raise UsageError("delta must lie in [0, 1)")
        gamma = delta_to_gamma(args.delta)
    if gamma is None:
        raise UsageError("one of --gamma or --delta is required")
    unit = AngleColumnSpec(unit=args.unit)
    try:
        return GcpcParams(float(unit.to_radians(args.omega)[0]), gamma, args.lam)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None


def _params_dict(p: GcpcParams, spec: AngleColumnSpec | None = None) -> dict:
    om = spec.from_radians(p.omega) if spec else p.omega
    return {"omega": om, "gamma": p.gamma, "lambda": p.lam, "delta": p.delta}


def _param_digest(p: GcpcParams) -> str:
    return _digest(np.array(p.as_tuple(), dtype=float).tobytes())


# -- commands -----------------------------------------------------------------------------


def _fit_options(args) -> FitOptions:
    return FitOptions(compute_se=not args.no_se)


def _fit_dict(fit, spec: AngleColumnSpec) -> dict:
    d = fit.to_dict()
    d["omega"] = spec.from_radians(fit.params.omega)
    d["unit"] = spec.unit
    if d.get("std_errors") and spec.unit == "degrees" and "omega" in d["std_errors"]:
        d["std_errors"] = dict(d["std_errors"], omega=math.degrees(d["std_errors"]["omega"]))
    return d


def cmd_fit(args):
    spec = AngleColumnSpec(args.column, args.unit, args.range)
    x, raw = read_angles(args.input, spec)
    opts = _fit_options(args)
    if args.family == "cipc":
        fit = fit_cipc(x, options=opts)
    else:
        fit = fit_gcpc(x, n_starts=args.starts, options=opts)
    out = {"fit": _fit_dict(fit, spec)}
    if args.ci is not None:
        ci = location_ci(x, args.ci, fit=fit if fit.family == "gcpc" else None, profile=args.profile_ci)
        lo, hi = ci.lower, ci.upper
        if spec.unit == "degrees":
            lo, hi = math.degrees(lo), math.degrees(hi)
        out["location_ci"] = {"level": ci.level, "lower": lo, "upper": hi, "profile": ci.profile}
    warnings = list(fit.diagnostics)
    return CommandResult("fit", [], _digest(raw), out, warnings)


def cmd_test(args):
    spec = AngleColumnSpec(args.column, args.unit, args.range)
    files = args.inputs
    if len(files) > 2:
        raise UsageError("test takes one or two input files")
    if len(files) == 2 and args.omega0 is not None:
        raise UsageError("--omega0 applies to the one-sample test only")
    if len(files) == 1 and args.omega0 is None and not args.against_cipc:
        raise UsageError("one-sample test needs --omega0 (or --against-cipc)")
    opts = _fit_options(args)
    data = [read_angles(f, spec) for f in files]
    raws = [r for _, r in data]
    if len(files) == 2:
        res = lrt_two_locations(data[0][0], data[1][0], family=args.family, options=opts)
        kind = "two_locations"
    elif args.against_cipc:
        res = lrt_gcpc_vs_cipc(data[0][0], options=opts)
        kind = "gcpc_vs_cipc"
    else:
        omega0 = float(spec.to_radians(args.omega0)[0])
        x = data[0][0]
        if args.family == "cipc":
            f1 = fit_cipc(x, options=opts)
            f0 = fit_cipc(x, options=opts, omega=omega0)
            res = _lrt(f0.loglik, f1.loglik, 1, f0, f1)
        else:
            res = lrt_one_location(x, omega0, options=opts)
        kind = "one_location"
    out = {"test": kind, "family": args.family, **res.to_dict()}
    return CommandResult("test", [], _digest(*raws), out)


def _write_csv(header, rows, dest):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(v, ".17g") for v in r])
    text = buf.getvalue()
    if dest is None:
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")
    return text


def cmd_sample(args):
    p = _params_from_args(args)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    spec = AngleColumnSpec(unit=args.unit)
    x = sample(p, args.n, seed=args.seed)
    vals = np.rad2deg(x) if args.unit == "degrees" else x
    text = _write_csv(["theta"], ([v] for v in vals), args.output)
    if args.output is None:
        return None
    outputs = {"path": str(args.output), "rows": int(args.n), "params": _params_dict(p, spec), "seed": args.seed,
               "sha256": _digest(text.encode())}
    return CommandResult("sample", [], _param_digest(p), outputs)


def cmd_grid(args):
    p = _params_from_args(args)
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    th = -np.pi + 2 * np.pi * np.arange(args.points) / args.points
    f = pdf_polar(th, p)
    col = np.rad2deg(th) if args.unit == "degrees" else th
    text = _write_csv(["theta", "density"], zip(col, f), args.output)
    if args.output is None:
        return None
    # local maxima on the periodic grid
    peaks = int(np.sum((f > np.roll(f, 1)) & (f >= np.roll(f, -1))))
    outputs = {"path": str(args.output), "rows": int(args.points), "params": _params_dict(p), "grid_maxima": peaks,
               "sha256": _digest(text.encode())}
    return CommandResult("grid", [], _param_digest(p), outputs)


def cmd_summary(args):
    p = _params_from_args(args)
    s = circular_summary(p, with_kl=not args.no_kl)
    v = classify_unimodality(p)
    out = {
        "params": _params_dict(p),
        "rho": s.rho,
        "circular_variance": s.circ_variance,
        "circular_sd": None if s.sd_infinite else s.circ_sd,
        "circular_sd_infinite": s.sd_infinite,
        "entropy": s.entropy,
        "kl_from_cipc": s.kl_from_cipc,
        "unimodality": {
            "unimodal": v.unimodal,
            "case": v.case_label,
            "modes": list(v.mode_angles),
            "antimodes": list(v.antimode_angles),
            "critical_roots": list(v.critical_roots),
        },
    }
    return CommandResult("summary", [], _param_digest(p), out)


def cmd_prob(args):
    p = _params_from_args(args)
    spec = AngleColumnSpec(unit=args.unit)
    a = float(np.deg2rad(args.a)) if args.unit == "degrees" else args.a
    b = float(np.deg2rad(args.b)) if args.unit == "degrees" else args.b
    try:
        prob = interval_probability(a, b, p)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    out = {"params": _params_dict(p, spec), "from": args.a, "to": args.b, "unit": args.unit, "probability": prob}
    return CommandResult("prob", [], _param_digest(p), out)


def cmd_regress(args):
    try:
        preds = [parse_predictor(s) for s in args.pred]
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    header, cols, raw = read_table(args.input)
    spec = AngleColumnSpec(args.response, args.unit)
    y = spec.to_radians(numeric_column(cols, header, args.response, args.input))
    rows = {}
    for pr in preds:
        for c in pr.columns:
            v = numeric_column(cols, header, c, args.input)
            if pr.kind == "circular" and args.unit == "degrees":
                v = np.deg2rad(v)
            rows[c] = v
    try:
        design = build_design(preds, rows, n=y.size)
    except (ParameterError, DegenerateError) as exc:
        raise DataError(str(exc)) from None
    families = ["gcpc", "cipc"] if args.family == "both" else [args.family]
    fits = {fam: fit_regression(design, y, family=fam) for fam in families}
    out = {"columns": list(design.names), "fits": {k: f.to_dict() for k, f in fits.items()}}
    if len(fits) == 2:
        out["comparison"] = compare_regressions(fits["gcpc"], fits["cipc"]).to_dict()
        for k in ("fit_h0", "fit_h1"):
            out["comparison"].pop(k)
    warnings = [d for f in fits.values() for d in f.diagnostics]
    return CommandResult("regress", [], _digest(raw), out, warnings)


def bundled_configs() -> list:
    base = resources.files("gcpc").joinpath("data/configs")
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".toml"))


def _resolve_config(name: str):
    if Path(name).exists():
        return load_campaign(name)
    base = resources.files("gcpc").joinpath("data/configs")
    cand = base.joinpath(name if name.endswith(".toml") else name + ".toml")
    if not cand.is_file():
        raise ConfigError(f"no config file {name!r} (bundled: {', '.join(bundled_configs())})")
    with resources.as_file(cand) as path:
        return load_campaign(path)


def cmd_simulate(args):
    campaign = _resolve_config(args.config)
    overrides = {}
    if args.replicates is not None:
        overrides["replicates"] = args.replicates
    if args.seed is not None:
        overrides["seed"] = args.seed
    overrides["parallelism"] = args.jobs
    raw = {"schema_version": 1, **campaign.to_dict(), **overrides}
    campaign = campaign_from_dict(raw)
    report = run_campaign(campaign)
    outputs = {"report": report.to_dict()}
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps(report.to_dict()) + "\n", encoding="utf-8")
        (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
        outputs["files"] = [str(out / "report.json"), str(out / "report.csv")]
    digest = _digest(json.dumps(campaign.to_dict(), sort_keys=True).encode())
    return CommandResult("simulate", [], digest, outputs, list(report.warnings))


# -- parser -------------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _angle_opts(p):
    p.add_argument("--column", default="0", help="angle column name or 0-based index (default 0)")
    p.add_argument("--unit", choices=("radians", "degrees"), default="radians")
    p.add_argument("--range", choices=("pm-pi", "0-2pi"), default="pm-pi", help="range convention for reported angles")


def _param_opts(p):
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--gamma", type=float)
    p.add_argument("--delta", type=float, help="wrapped Cauchy concentration instead of --gamma")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--unit", choices=("radians", "degrees"), default="radians")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gcpc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"gcpc {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="maximum likelihood fit")
    p.add_argument("input")
    p.add_argument("--family", choices=("gcpc", "cipc"), default="gcpc")
    p.add_argument("--starts", type=int, help="number of multi-start points (GCPC)")
    p.add_argument("--ci", type=float, metavar="LEVEL", help="also report a location interval")
    p.add_argument("--profile-ci", action="store_true", help="re-maximise nuisances along the interval scan")
    p.add_argument("--no-se", action="store_true")
    _angle_opts(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("test", help="likelihood ratio tests for location")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--omega0", type=float)
    p.add_argument("--against-cipc", action="store_true", help="test lam = 1 instead of a location")
    p.add_argument("--family", choices=("gcpc", "cipc"), default="gcpc")
    _angle_opts(p)
    p.set_defaults(func=cmd_test, no_se=True)

    p = sub.add_parser("sample", help="draw angles as CSV")
    _param_opts(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("summary", help="rho, spread, entropy, KL and unimodality")
    _param_opts(p)
    p.add_argument("--no-kl", action="store_true")
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("prob", help="probability of an arc")
    _param_opts(p)
    p.add_argument("--from", dest="a", type=float, required=True)
    p.add_argument("--to", dest="b", type=float, required=True)
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("grid", help="density on an equispaced grid, as CSV")
    _param_opts(p)
    p.add_argument("--points", type=int, default=360)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("regress", help="GCPC regression of an angle on predictors")
    p.add_argument("input")
    p.add_argument("--response", required=True)
    p.add_argument("--pred", action="append", default=[], help="continuous:COL, circular:COL or simplex:C1,C2,...")
    p.add_argument("--family", choices=("gcpc", "cipc", "both"), default="gcpc")
    p.add_argument("--unit", choices=("radians", "degrees"), default="radians")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("simulate", help="run a simulation campaign")
    p.add_argument("config", help="TOML file or bundled name")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for report.json and report.csv")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    captured = _WarningCapture()
    logging.getLogger("gcpc").addHandler(captured)
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"gcpc {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        return _fail(args, argv, EXIT_CONFIG, f"configuration error: {exc}")
    except ConvergenceError as exc:
        return _fail(args, argv, EXIT_CONVERGENCE, f"no convergence: {exc}")
    except (DataError, GcpcError) as exc:
        return _fail(args, argv, EXIT_DATA, f"data error: {exc}")
    finally:
        logging.getLogger("gcpc").removeHandler(captured)
    if result is None:
        return EXIT_OK
    result.argv = argv
    result.warnings = list(dict.fromkeys(result.warnings + captured.messages))
    print(dumps(result.to_dict()))
    return EXIT_OK


def _fail(args, argv, code, message):
    print(f"gcpc {args.command}: {message}", file=sys.stderr)
    res = CommandResult(args.command, argv, None, {"error": message}, status="error", exit_code=code)
    print(dumps(res.to_dict()))
    return code


class _WarningCapture(logging.Handler):
    def __init__(self):
        super().__init__(logging.WARNING)
        self.messages = []

    def emit(self, record):
        self.messages.append(record.getMessage())


if __name__ == "__main__":
    sys.exit(main())

"""Monte Carlo studies: type I error of the location tests and regression rates.

Every replicate draws from its own generator seeded by
``SeedSequence([seed, cell, replicate])``, so results do not depend on how
replicates are spread over worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .core import GcpcParams, sample_array
from .errors import GcpcError, ParameterError
from .inference import lrt_one_location, lrt_two_locations
from .regression import Design, fit_regression

log = logging.getLogger(__name__)

__all__ = [
    "BETAS",
    "CONFIG_SCHEMA_VERSION",
    "ConfigError",
    "SimCampaign",
    "SimReport",
    "load_campaign",
    "run_campaign",
    "run_convergence_rate",
    "run_type1_one_sample",
    "run_type1_two_sample",
    "sample_von_mises",
]

CONFIG_SCHEMA_VERSION = 1
STUDIES = ("type1_one_sample", "type1_two_sample", "convergence_rate")
FAILURE_TOLERANCE = 0.01

# true coefficient matrices (rows: intercept, then predictor columns)
BETAS = {
    "circular": np.array([[1.874, 2.550], [-1.473, -2.023], [-1.157, -1.554]]),
    "continuous": np.array([[1.641, 1.949], [-0.101, -0.119]]),
    "both": np.array([[1.859, 3.508], [-1.500, -2.914], [-0.960, -1.855], [-0.246, -0.181]]),
}
VM_COVARIATE = (2.0, 5.0)  # location, concentration kappa
EXP_COVARIATE_MEAN = 0.5


class ConfigError(GcpcError, ValueError):
    """Invalid campaign configuration."""


@dataclass
class SimCampaign:
    """Configuration of one simulation study.

    ``sample_sizes`` holds ints for the one-sample and rate studies and
    ``(n1, n2)`` pairs for the two-sample study.  ``true_params`` is keyed by
    study: ``{"omega", "gamma", "lambda"}`` for one sample, ``{"small", "large"}``
    each of those for two samples, and ``{"scenario", "lambda"}`` for rates.
    """

    study: str
    replicates: int = 500
    sample_sizes: list = field(default_factory=list)
    true_params: dict = field(default_factory=dict)
    alpha: float = 0.05
    seed: int = 20240601
    parallelism: int = 1
    families: tuple = ("gcpc", "cipc")

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ConfigError(f"study must be one of {STUDIES} (got {self.study!r})")
        if int(self.replicates) < 1:
            raise ConfigError("replicates must be >= 1")
        if not (0 < float(self.alpha) <= 1):
            raise ConfigError("alpha must lie in (0, 1]")
        if int(self.parallelism) < 1:
            raise ConfigError("parallelism must be >= 1")
        if not self.sample_sizes:
            raise ConfigError("sample_sizes must be non-empty")
        self.replicates = int(self.replicates)
        self.parallelism = int(self.parallelism)
        self.seed = int(self.seed)
        if self.study == "type1_two_sample":
            try:
                self.sample_sizes = [tuple(int(v) for v in pair) for pair in self.sample_sizes]
            except TypeError:
                raise ConfigError("two-sample sizes must be pairs") from None
            if any(len(p) != 2 for p in self.sample_sizes):
                raise ConfigError("two-sample sizes must be pairs")
        else:
            self.sample_sizes = [int(v) for v in self.sample_sizes]
        if any(min(np.atleast_1d(s)) < 4 for s in self.sample_sizes):
            raise ConfigError("every sample size must be >= 4")
        self.true_params = _default_truth(self.study, dict(self.true_params))
        self.families = tuple(self.families)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["families"] = list(self.families)
        d["sample_sizes"] = [list(s) if isinstance(s, tuple) else s for s in self.sample_sizes]
        return d


def _default_truth(study, tp):
    if study == "type1_one_sample":
        out = {"omega": 2.0, "gamma": 3.0, "lambda": 2.0}
        out.update(tp)
        GcpcParams(out["omega"], out["gamma"], out["lambda"])
    elif study == "type1_two_sample":
        out = {
            "small": {"omega": 2.0, "gamma": 4.0, "lambda": 1.0},
            "large": {"omega": 2.0, "gamma": 2.0, "lambda": 3.0},
        }
        for k in ("small", "large"):
            out[k] = {**out[k], **tp.get(k, {})}
    else:
        out = {"scenario": "continuous", "lambda": 5.0}
        out.update(tp)
        if out["scenario"] not in BETAS:
            raise ConfigError(f"scenario must be one of {tuple(BETAS)}")
        if "coef" in out:
            out["coef"] = np.asarray(out["coef"], dtype=float).tolist()
    return out


def load_campaign(path) -> SimCampaign:
    """Read a TOML campaign file (``schema_version = 1``)."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read campaign {path}: {exc}") from None
    return campaign_from_dict(raw)


def campaign_from_dict(raw: dict) -> SimCampaign:
    raw = dict(raw)
    version = raw.pop("schema_version", None)
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {CONFIG_SCHEMA_VERSION} (got {version!r})")
    known = {"study", "replicates", "sample_sizes", "true_params", "alpha", "seed", "parallelism", "families"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown campaign keys: {sorted(unknown)}")
    if "study" not in raw:
        raise ConfigError("campaign needs a 'study'")
    try:
        return SimCampaign(**raw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


@dataclass
class SimReport:
    study: str
    cells: list
    config: dict
    runtime_s: float
    slope: float | None = None
    slope_se: float | None = None
    intercept: float | None = None
    warnings: list = field(default_factory=list)
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "study": self.study,
            "cells": self.cells,
            "slope": self.slope,
            "slope_se": self.slope_se,
            "intercept": self.intercept,
            "runtime_s": self.runtime_s,
            "warnings": self.warnings,
            "config": self.config,
            "version": self.version,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)

    def to_csv(self) -> str:
        buf = io.StringIO()
        keys = []
        for c in self.cells:
            keys += [k for k in c if k not in keys]
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for c in self.cells:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in c.items()})
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def replicate_rng(seed: int, cell: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, cell, rep]))


def sample_von_mises(mu: float, kappa: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Best-Fisher rejection sampler for the von Mises distribution."""
    if kappa < 0:
        raise ParameterError("kappa must be >= 0")
    if kappa < 1e-8:
        return rng.uniform(-np.pi, np.pi, n)
    tau = 1 + math.sqrt(1 + 4 * kappa * kappa)
    rho = (tau - math.sqrt(2 * tau)) / (2 * kappa)
    r = (1 + rho * rho) / (2 * rho)
    out = np.empty(0)
    while out.size < n:
        m = 2 * (n - out.size) + 16
        u1, u2, u3 = rng.random(m), rng.random(m), rng.random(m)
        z = np.cos(np.pi * u1)
        f = (1 + r * z) / (r + z)
        c = kappa * (r - f)
        ok = (c * (2 - c) - u2 > 0) | (np.log(c / np.maximum(u2, 1e-300)) + 1 - c >= 0)
        th = np.sign(u3[ok] - 0.5) * np.arccos(np.clip(f[ok], -1, 1))
        out = np.concatenate([out, th])
    return np.remainder(out[:n] + mu + np.pi, 2 * np.pi) - np.pi


# -- replicate workers (module level so they pickle) -----------------------------------


def _one_sample_rep(args):
    seed, cell, rep, n, truth, alpha = args
    rng = replicate_rng(seed, cell, rep)
    x = sample_array(truth["omega"], truth["gamma"], truth["lambda"], n, rng)
    try:
        res = lrt_one_location(x, truth["omega"])
    except GcpcError as exc:
        return {"ok": False, "error": str(exc)}
    return {"ok": True, "reject": res.p_value <= alpha, "stat": res.statistic}


def _two_sample_rep(args):
    seed, cell, rep, (n1, n2), truth, alpha, families = args
    rng = replicate_rng(seed, cell, rep)
    p1 = truth["small"] if n1 <= n2 else truth["large"]
    p2 = truth["large"] if n1 <= n2 else truth["small"]
    x1 = sample_array(p1["omega"], p1["gamma"], p1["lambda"], n1, rng)
    x2 = sample_array(p2["omega"], p2["gamma"], p2["lambda"], n2, rng)
    out = {"ok": True}
    for fam in families:
        try:
            res = lrt_two_locations(x1, x2, family=fam)
        except GcpcError as exc:
            return {"ok": False, "error": f"{fam}: {exc}"}
        out[fam] = res.p_value <= alpha
    return out


def rate_design(scenario: str, n: int, rng: np.random.Generator) -> Design:
    cols = [np.ones(n)]
    names = ["(intercept)"]
    if scenario in ("circular", "both"):
        u = sample_von_mises(*VM_COVARIATE, n, rng)
        cols += [np.cos(u), np.sin(u)]
        names += ["cos(u)", "sin(u)"]
    if scenario in ("continuous", "both"):
        cols.append(rng.exponential(EXP_COVARIATE_MEAN, n))
        names.append("x")
    return Design(tuple(names), (), np.column_stack(cols))


def simulate_regression(coef, lam, design: Design, rng):
    mu = design.matrix @ coef
    om = np.arctan2(mu[:, 1], mu[:, 0])
    gam = np.hypot(mu[:, 0], mu[:, 1])
    return sample_array(om, gam, lam, design.n, rng)


def _rate_rep(args):
    seed, cell, rep, n, truth = args
    rng = replicate_rng(seed, cell, rep)
    coef = np.asarray(truth.get("coef", BETAS[truth["scenario"]]), dtype=float)
    design = rate_design(truth["scenario"], n, rng)
    y = simulate_regression(coef, truth["lambda"], design, rng)
    try:
        fit = fit_regression(design, y, compute_se=False)
    except GcpcError as exc:
        return {"ok": False, "error": str(exc)}
    return {"ok": True, "frob2": float(np.sum((fit.coef - coef) ** 2))}


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    jobs = min(jobs, os.cpu_count() or 1, len(tasks))
    if jobs <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (8 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks, chunksize=chunk))


def _failures(results, label, warnings):
    bad = [r for r in results if not r["ok"]]
    frac = len(bad) / len(results)
    if bad:
        msg = f"{label}: {len(bad)} of {len(results)} replicates failed ({bad[0]['error']})"
        if frac >= FAILURE_TOLERANCE:
            msg += "; failure rate not negligible, estimate unreliable"
        warnings.append(msg)
        log.warning(msg)
    return [r for r in results if r["ok"]], len(bad), frac < FAILURE_TOLERANCE


def _rate_cell(k, R):
    p = k / R if R else float("nan")
    return p, math.sqrt(p * (1 - p) / R) if R else float("nan")


def run_type1_one_sample(campaign: SimCampaign) -> SimReport:
    if campaign.study != "type1_one_sample":
        raise ConfigError("campaign is not a one-sample type I error study")
    t0 = time.perf_counter()
    truth = campaign.true_params
    tasks = [
        (campaign.seed, ci, r, n, truth, campaign.alpha)
        for ci, n in enumerate(campaign.sample_sizes)
        for r in range(campaign.replicates)
    ]
    results = _map(_one_sample_rep, tasks, campaign.parallelism)
    cells, warnings = [], []
    R = campaign.replicates
    for ci, n in enumerate(campaign.sample_sizes):
        res = results[ci * R : (ci + 1) * R]
        good, nfail, reliable = _failures(res, f"n={n}", warnings)
        p, se = _rate_cell(sum(r["reject"] for r in good), len(good))
        cells.append(
            {"n": n, "rejection_rate": p, "mc_se": se, "replicates": len(good), "failures": nfail, "reliable": reliable}
        )
    return SimReport(campaign.study, cells, campaign.to_dict(), time.perf_counter() - t0, warnings=warnings)


def run_type1_two_sample(campaign: SimCampaign) -> SimReport:
    if campaign.study != "type1_two_sample":
        raise ConfigError("campaign is not a two-sample type I error study")
    t0 = time.perf_counter()
    fams = campaign.families
    tasks = [
        (campaign.seed, ci, r, pair, campaign.true_params, campaign.alpha, fams)
        for ci, pair in enumerate(campaign.sample_sizes)
        for r in range(campaign.replicates)
    ]
    results = _map(_two_sample_rep, tasks, campaign.parallelism)
    cells, warnings = [], []
    R = campaign.replicates
    for ci, pair in enumerate(campaign.sample_sizes):
        res = results[ci * R : (ci + 1) * R]
        good, nfail, reliable = _failures(res, f"n={pair}", warnings)
        cell = {"n1": pair[0], "n2": pair[1]}
        for fam in fams:
            p, se = _rate_cell(sum(r[fam] for r in good), len(good))
            cell[f"rejection_rate_{fam}"] = p
            cell[f"mc_se_{fam}"] = se
        cell.update(replicates=len(good), failures=nfail, reliable=reliable)
        cells.append(cell)
    return SimReport(campaign.study, cells, campaign.to_dict(), time.perf_counter() - t0, warnings=warnings)


def run_convergence_rate(campaign: SimCampaign) -> SimReport:
    """Average squared Frobenius error of B per n and the slope of log F2 on log n."""
    if campaign.study != "convergence_rate":
        raise ConfigError("campaign is not a convergence-rate study")
    t0 = time.perf_counter()
    truth = campaign.true_params
    tasks = [
        (campaign.seed, ci, r, n, truth)
        for ci, n in enumerate(campaign.sample_sizes)
        for r in range(campaign.replicates)
    ]
    results = _map(_rate_rep, tasks, campaign.parallelism)
    cells, warnings = [], []
    R = campaign.replicates
    for ci, n in enumerate(campaign.sample_sizes):
        res = results[ci * R : (ci + 1) * R]
        good, nfail, reliable = _failures(res, f"n={n}", warnings)
        f2 = [r["frob2"] for r in good]
        cells.append(
            {
                "n": n,
                "mean_frob2": float(np.mean(f2)) if f2 else float("nan"),
                "median_frob2": float(np.median(f2)) if f2 else float("nan"),
                "replicates": len(good),
                "failures": nfail,
                "reliable": reliable,
            }
        )
    slope = slope_se = intercept = None
    ns = np.array([c["n"] for c in cells], dtype=float)
    f2 = np.array([c["mean_frob2"] for c in cells])
    ok = np.isfinite(f2) & (f2 > 0)
    if ok.sum() >= 2:
        slope, intercept, slope_se = loglog_slope(ns[ok], f2[ok])
    return SimReport(
        campaign.study,
        cells,
        campaign.to_dict(),
        time.perf_counter() - t0,
        slope=slope,
        slope_se=slope_se,
        intercept=intercept,
        warnings=warnings,
    )


def loglog_slope(n, f2):
    """Least squares of log f2 = a + b log n; returns (b, a, se(b))."""
    X = np.column_stack([np.ones(len(n)), np.log(n)])
    yv = np.log(f2)
    coef, *_ = np.linalg.lstsq(X, yv, rcond=None)
    dof = len(n) - 2
    if dof > 0:
        resid = yv - X @ coef
        s2 = float(resid @ resid) / dof
        se = math.sqrt(s2 * np.linalg.inv(X.T @ X)[1, 1])
    else:
        se = float("nan")
    return float(coef[1]), float(coef[0]), se


def run_campaign(campaign: SimCampaign) -> SimReport:
    runner = {
        "type1_one_sample": run_type1_one_sample,
        "type1_two_sample": run_type1_two_sample,
        "convergence_rate": run_convergence_rate,
    }[campaign.study]
    return runner(campaign)

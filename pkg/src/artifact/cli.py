"""Batch front end: read an INI config, run a suite, write CSV tables and a gnuplot script.

Exit codes: 0 all checks passed, 1 a suite check failed, 2 invalid config,
3 numerical failure (partial CSVs are still written).
"""
import argparse
import configparser
import csv
import logging
import math
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import comparator as cmp
from .classical_singular import BoundaryEvaluationWarning
from .numerics import QuadratureError, QuadratureSpec, l2_distance
from .oracle import BoxTooSmallError, crank_nicolson_delta
from .quantum_delta import DeltaCoupling, quantum_evolve
from .states import CoherentParams, ParameterDomainError, SampleGrid

log = logging.getLogger("artifact.cli")

SUITES = ("scenario", "theorem1", "theorem2", "dirichlet", "lemmas", "oracle", "all")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

# acceptance windows checked by the suites
SLOPE_T1 = (1.3, 1.7)
SLOPE_DIR = (0.85, 1.15)
R2_MIN = 0.98
LEMMA_C_MAX = 10.0
ORACLE_TOL = 1e-3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    hbar: float = 0.1
    mass: float = 1.0
    alpha: float = 1.0
    sigma0: float = 1.0
    q: float = -2.0
    p: float = 1.0
    times: tuple = (4.0,)
    hbar_list: tuple = (0.2, 0.1, 0.05, 0.025, 0.0125)
    lam: float = cmp.LAMBDA_DEFAULT
    c0: float = cmp.C0_DEFAULT
    draws: int = 20
    seed: int = 20240601
    rel_tol: float = 1e-8
    n_sd: float = 14.0
    dx: float = 2e-3
    dt: float = 2e-4
    box: float = 20.0
    suite: str = "scenario"
    source: str = "<defaults>"
    lines: dict = field(default_factory=dict, compare=False)

    @property
    def spec(self):
        return QuadratureSpec(relative_tol=self.rel_tol)

    def params(self, hbar=None):
        return CoherentParams.standard(self.hbar if hbar is None else hbar, self.sigma0, self.q, self.p, self.mass)


# config --------------------------------------------------------------------

_FIELDS = {
    "physics": {"hbar": "hbar", "mass": "mass", "alpha": "alpha", "sigma0": "sigma0", "beta": None},
    "state": {"q": "q", "p": "p"},
    "time": {"t_list": None, "t_range": None},
    "sweep": {"hbar_list": None, "lambda": "lam", "c0": "c0", "draws": "draws", "seed": "seed"},
    "numerics": {"rel_tol": "rel_tol", "n_sd": "n_sd", "dx": "dx", "dt": "dt", "box": "box"},
    "suite": {"name": None},
}


def _line_index(text):
    """(section, key) -> 1-based line number, for error messages."""
    where, section = {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
        elif section and ("=" in line or ":" in line) and not line.startswith(("#", ";")):
            key = line.split("=", 1)[0].split(":", 1)[0].strip()
            where[(section, key)] = no
    return where


def _floats(text):
    parts = [s for s in text.replace(",", " ").split() if s]
    return tuple(float(s) for s in parts)


def load_config(path, suite_override=None):
    values = {}
    lines = {}
    source = "<defaults>"
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
        source = path
        lines = _line_index(text)
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read_string(text, source=path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        values = _collect(parser, path, lines)
    if suite_override:
        values["suite"] = suite_override
    beta = values.pop("_beta", None)
    try:
        cfg = RunConfig(source=source, lines=lines, **values)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    _validate(cfg, beta)
    return cfg


def _collect(parser, path, lines):
    out = {}

    def where(section, key):
        no = lines.get((section, key))
        return f"{path}:{no}" if no else path

    for section in parser.sections():
        if section not in _FIELDS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _FIELDS[section]:
                raise ConfigError(f"{where(section, key)}: unknown key '{key}' in [{section}]")
            try:
                if section == "time" and key == "t_list":
                    out["times"] = _floats(raw)
                elif section == "time" and key == "t_range":
                    start, stop, n = _floats(raw)
                    if n < 1 or n != int(n):
                        raise ValueError("t_range count must be a positive integer")
                    out["times"] = tuple(np.linspace(start, stop, int(n)).tolist())
                elif section == "sweep" and key == "hbar_list":
                    out["hbar_list"] = _floats(raw)
                elif section == "suite":
                    out["suite"] = raw.strip()
                elif section == "physics" and key == "beta":
                    out["_beta"] = (float(raw), where(section, key))
                elif key in ("draws", "seed"):
                    out[_FIELDS[section][key]] = int(raw)
                else:
                    out[_FIELDS[section][key]] = float(raw)
            except ValueError as exc:
                raise ConfigError(f"{where(section, key)}: [{section}] {key} = {raw!r}: {exc}") from exc
    return out


def _validate(cfg, beta):
    def at(section, key):
        no = cfg.lines.get((section, key))
        return f"{cfg.source}:{no}" if no else cfg.source

    if cfg.suite not in SUITES:
        raise ConfigError(f"{at('suite', 'name')}: unknown suite '{cfg.suite}' (choose from {', '.join(SUITES)})")
    if cfg.q == 0 or cfg.p == 0:
        key = "q" if cfg.q == 0 else "p"
        raise ConfigError(
            f"{at('state', key)}: {key} = 0 violates the standing assumption qp != 0 "
            f"(phase points with q = 0 or p = 0 are excluded)"
        )
    for name in ("hbar", "mass", "sigma0", "rel_tol", "n_sd", "dx", "dt", "box"):
        if not getattr(cfg, name) > 0:
            section = "physics" if name in ("hbar", "mass", "sigma0") else "numerics"
            raise ConfigError(f"{at(section, name)}: {name} must be positive")
    if cfg.alpha == 0 or not math.isfinite(cfg.alpha):
        raise ConfigError(f"{at('physics', 'alpha')}: alpha must be finite and nonzero")
    if not cfg.times:
        raise ConfigError(f"{cfg.source}: [time] needs t_list or t_range")
    if any(h <= 0 for h in cfg.hbar_list):
        raise ConfigError(f"{at('sweep', 'hbar_list')}: hbar values must be positive")
    if not 0 < cfg.lam < 1.5:
        raise ConfigError(f"{at('sweep', 'lambda')}: lambda must lie in (0, 3/2)")
    if beta is not None:
        value, loc = beta
        expect = 2.0 * cfg.alpha / cfg.hbar
        if not math.isclose(value, expect, rel_tol=1e-12):
            raise ConfigError(f"{loc}: beta = {value} does not equal 2 alpha / hbar = {expect!r}")


# output --------------------------------------------------------------------

def fmt(x):
    if isinstance(x, str):
        return x
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


ERROR_HEAD = ["quantity", "hbar", "m", "alpha", "sigma0", "q", "p", "t", "lhs"]
SUMMARY_HEAD = ["suite", "quantity", "alpha", "t", "slope", "intercept", "r2", "C", "n_used", "n_excluded", "passed"]


class Tables:
    def __init__(self):
        self.rows = []
        self.summary = []

    def add(self, quantity, params, alpha, t, lhs, terms, flag):
        self.rows.append(({
            "quantity": quantity, "hbar": params.hbar, "m": params.mass, "alpha": alpha,
            "sigma0": params.sigma0, "q": params.q, "p": params.p, "t": t, "lhs": lhs,
            "fitted_C_flag": flag,
        }, dict(terms)))

    def add_summary(self, **kw):
        self.summary.append(kw)

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        term_names = []
        for _, terms in self.rows:
            for k in terms:
                if k not in term_names:
                    term_names.append(k)
        head = ERROR_HEAD + [f"rhs_{k}" for k in term_names] + ["fitted_C_flag"]
        with open(os.path.join(out_dir, "errors.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(head)
            for base, terms in self.rows:
                row = [fmt(base[k]) for k in ERROR_HEAD]
                row += [fmt(terms.get(k, math.nan)) for k in term_names]
                row.append(base["fitted_C_flag"])
                w.writerow(row)
        with open(os.path.join(out_dir, "sweep_summary.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(SUMMARY_HEAD)
            for s in self.summary:
                w.writerow([fmt(s.get(k, math.nan)) for k in SUMMARY_HEAD])
        with open(os.path.join(out_dir, "plots.gp"), "w", encoding="utf-8") as fh:
            fh.write(plot_script())


def plot_script():
    return """# gnuplot script; run from the output directory: gnuplot plots.gp
set datafile separator ','
set terminal pngcairo size 900,600
set logscale xy
set key left top
set xlabel 'hbar'
set ylabel 'L2 error'
set output 'errors.png'
plot for [Q in 'theorem1 dirichlet wave scattering oracle'] \\
    'errors.csv' using (strcol(1) eq Q ? $2 : 1/0):9 with linespoints title Q
set output 'rhs.png'
set ylabel 'lhs / rhs_sum'
unset logscale y
plot 'errors.csv' using 2:9 with points title 'lhs'
"""


# suites --------------------------------------------------------------------

def _flag(report):
    return "excluded" if report.excluded else "included"


def _within(x, window):
    return window[0] <= x <= window[1]


def _fit_summary(tables, suite, quantity, alpha, t, sweep, window, r2_min=None):
    fit = sweep.fit
    if isinstance(fit, cmp.ScalingFit):
        ok = _within(fit.slope, window) and (r2_min is None or fit.r2 >= r2_min)
        tables.add_summary(suite=suite, quantity=quantity, alpha=alpha, t=t, slope=fit.slope,
                           intercept=fit.intercept, r2=fit.r2, C=sweep.fitted_C, n_used=fit.used,
                           n_excluded=len(sweep.excluded), passed=int(ok))
    else:
        ok = False
        tables.add_summary(suite=suite, quantity=quantity, alpha=alpha, t=t, C=sweep.fitted_C,
                           n_used=len(sweep.reports) - len(sweep.excluded),
                           n_excluded=len(sweep.excluded), passed=0)
        log.warning("%s/%s: %s", suite, quantity, fit)
    return ok


def run_scenario(cfg, tables, threads):
    params = cfg.params()
    coupling = DeltaCoupling.for_params(cfg.alpha, params)

    def one(t):
        return cmp.theorem1_report(params, t, coupling, cfg.lam, cfg.c0, cfg.spec, cfg.n_sd)

    reports = cmp.ordered_map(one, cfg.times, threads)
    for r in reports:
        tables.add("theorem1", params, cfg.alpha, r.t, r.lhs, r.rhs_terms, _flag(r))
    return True


def run_theorem1(cfg, tables, threads):
    ok = True
    for t in cfg.times:
        sweep = cmp.theorem1_sweep(cfg.hbar_list, t, cfg.alpha, cfg.q, cfg.p, cfg.sigma0, cfg.mass,
                                   cfg.lam, cfg.c0, threads, cfg.spec, n_sd=cfg.n_sd)
        for r in sweep.reports:
            tables.add("theorem1", cfg.params(r.hbar), cfg.alpha, t, r.lhs, r.rhs_terms, _flag(r))
        ok &= _fit_summary(tables, "theorem1", "theorem1", cfg.alpha, t, sweep, SLOPE_T1, R2_MIN)
    return ok


def run_dirichlet(cfg, tables, threads):
    ok = True
    for t in cfg.times:
        sweep = cmp.dirichlet_sweep(cfg.hbar_list, t, cfg.alpha, cfg.q, cfg.p, cfg.sigma0, cfg.mass,
                                    threads, cfg.spec, n_sd=cfg.n_sd)
        for r in sweep.reports:
            tables.add("dirichlet", cfg.params(r.hbar), cfg.alpha, t, r.lhs, r.rhs_terms, "included")
        ok &= _fit_summary(tables, "dirichlet", "dirichlet", cfg.alpha, t, sweep, SLOPE_DIR)
    return ok


def run_theorem2(cfg, tables, threads):
    ok = True
    constants = {}
    for alpha in (abs(cfg.alpha), -abs(cfg.alpha)):
        for which in ("wave", "scattering"):
            sweep = cmp.theorem2_sweep(cfg.hbar_list, alpha, cfg.q, cfg.p, which, cfg.sigma0, cfg.mass,
                                       cfg.lam, threads, cfg.spec, n_sd=cfg.n_sd)
            for r in sweep.reports:
                tables.add(which, cfg.params(r.hbar), alpha, "", r.lhs, r.rhs_terms, "included")
            ok &= _fit_summary(tables, "theorem2", which, alpha, "", sweep, SLOPE_T1)
            constants.setdefault(which, []).append(sweep.fitted_C)
    for which, cs in constants.items():
        spread = max(cs) / min(cs) if min(cs) > 0 else math.inf
        stable = spread <= 3.0
        tables.add_summary(suite="theorem2", quantity=f"{which}_C_spread", C=spread, passed=int(stable))
        ok &= stable
    return ok


def lemma_draws(cfg):
    """Admissible random parameter points around the configured ones."""
    rng = np.random.default_rng(cfg.seed)
    out = []
    for _ in range(cfg.draws):
        hbar = rng.uniform(0.03, 0.2)
        sigma0 = rng.uniform(0.7, 1.4)
        q = rng.choice([-1.0, 1.0]) * rng.uniform(1.0, 3.0)
        p = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.5)
        alpha = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        t = rng.uniform(0.0, 5.0)
        mass = rng.uniform(0.7, 1.5)
        out.append((CoherentParams.standard(hbar, sigma0, q, p, mass), alpha, t))
    return out


def run_lemmas(cfg, tables, threads):
    draws = lemma_draws(cfg)

    def one(item):
        params, alpha, t = item
        return cmp.lemma_bounds(params, t, DeltaCoupling.for_params(alpha, params), cfg.lam, cfg.spec, cfg.n_sd)

    results = cmp.ordered_map(one, draws, threads)
    checks = [c for res in results for c in res]
    c_fit = cmp.fit_constant(checks)
    for (params, alpha, t), res in zip(draws, results):
        for c in res:
            tables.add(f"lemma_{c.name}", params, alpha, t, c.lhs, (("bound", c.rhs),), "included")
    ok = c_fit <= LEMMA_C_MAX
    tables.add_summary(suite="lemmas", quantity="all", C=c_fit, n_used=len(checks), passed=int(ok))
    return ok


def run_oracle(cfg, tables, threads):
    params = cfg.params()
    n_half = int(round(cfg.box / cfg.dx))
    n_half += n_half % 2
    grid = SampleGrid.from_nodes(n_half, cfg.dx)
    tasks = [(alpha, t) for alpha in (abs(cfg.alpha), -abs(cfg.alpha)) for t in cfg.times]

    def one(task):
        alpha, t = task
        coupling = DeltaCoupling.for_params(alpha, params)
        # the delta's algebraic tail reaches the walls at ~1e-7; see oracle docs
        ref = crank_nicolson_delta(params, t, coupling, cfg.dx, cfg.dt, cfg.box, boundary_tol=1e-5)
        return l2_distance(quantum_evolve(params, t, coupling, grid, cfg.spec), ref)

    dists = cmp.ordered_map(one, tasks, threads)
    ok = True
    for (alpha, t), d in zip(tasks, dists):
        tables.add("oracle", params, alpha, t, d, (("tolerance", ORACLE_TOL),), "included")
        ok &= d <= ORACLE_TOL
    tables.add_summary(suite="oracle", quantity="max_distance", C=max(dists), passed=int(ok))
    return ok


RUNNERS = {
    "scenario": run_scenario,
    "theorem1": run_theorem1,
    "dirichlet": run_dirichlet,
    "theorem2": run_theorem2,
    "lemmas": run_lemmas,
    "oracle": run_oracle,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="deltasc", description=__doc__.splitlines()[0])
    ap.add_argument("--config", metavar="PATH", help="INI file; built-in acceptance defaults if omitted")
    ap.add_argument("--suite", choices=SUITES, help="overrides [suite] name")
    ap.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
    ap.add_argument("--threads", metavar="N", type=int, default=1, help="worker threads for sweeps")
    ap.add_argument("--strict", action="store_true", help="treat tolerance and boundary warnings as failures")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("deltasc: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.suite)
    except (ConfigError, ParameterDomainError) as exc:
        print(f"deltasc: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    suites = [s for s in SUITES if s not in ("scenario", "all")] if cfg.suite == "all" else [cfg.suite]
    tables = Tables()
    status = EXIT_OK
    with warnings.catch_warnings():
        if args.strict:
            warnings.simplefilter("error", BoundaryEvaluationWarning)
            warnings.simplefilter("error", RuntimeWarning)
        try:
            for name in suites:
                log.info("running suite %s", name)
                if not RUNNERS[name](cfg, tables, args.threads):
                    status = EXIT_FAIL
                    print(f"deltasc: suite {name} failed its checks", file=sys.stderr)
        except (QuadratureError, BoxTooSmallError, ParameterDomainError, ArithmeticError,
                BoundaryEvaluationWarning, RuntimeWarning) as exc:
            print(f"deltasc: numerical failure: {exc}", file=sys.stderr)
            status = EXIT_NUMERIC
        finally:
            tables.write(args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())

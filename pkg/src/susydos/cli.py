"""Command-line front end: ``susydos {dos,verify,compare,residuals,plot}``.

Settings resolve as flags > ``--config`` JSON file > per-command defaults.
Environment variables are never read.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 for invalid configuration, 3 for quadrature failure, 4 for I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from functools import partial
from pathlib import Path

import numpy as np

from . import asymptotics, contours, grassmann, oracle, plotting
from .ensemble import EnsembleSpec, Family
from .susy_integrals import QuadratureError, evaluate

SCHEMA_VERSION = 1
FORMATS = ("csv", "json", "svg")
COMMANDS = ("dos", "verify", "compare", "residuals", "plot")
GRID_EDGE = contours.DEFAULT_EDGE

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_QUADRATURE, EXIT_IO = 0, 1, 2, 3, 4

COLUMNS = {
    "dos": ["E", "rho_exact", "rho_expansion", "rho_sc", "quad_error"],
    "verify": ["check", "family", "N", "E", "epsilon", "deviation", "tolerance", "passed"],
    "compare": ["E", "exact", "mc_mean", "mc_stderr", "z_score"],
    "residuals": ["E", "N", "exact", "expansion", "residual", "scaled_residual"],
    "plot": ["E", "rho_exact", "rho_expansion", "rho_sc", "inset_exact", "inset_expansion"],
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str | None = None
    n: int | None = None
    r: float | None = None
    e: tuple[float, float, int] | None = None
    epsilon: float | None = None
    samples: int = 200_000
    seed: int = 0
    tol: float | None = None
    out: str | None = None
    format: str = "csv"
    ns: tuple[int, ...] | None = None
    figure: str | None = None
    workers: int = 1

    @property
    def energies(self) -> np.ndarray:
        lo, hi, count = self.e
        return np.linspace(lo, hi, count) if count > 1 else np.array([float(lo)])

    @property
    def spec(self) -> EnsembleSpec:
        return EnsembleSpec(Family(self.family), self.n,
                            self.r if self.family == Family.INTERPOLATING.value else None)


COMMAND_DEFAULTS = {
    "dos": dict(family="gue", n=10, e=(-1.5, 1.5, 21), epsilon=0.0),
    "verify": dict(e=(-1.5, 1.5, 5), tol=1e-7),
    "compare": dict(family="goe", n=8, e=(-1.5, 1.5, 21), epsilon=0.05),
    "residuals": dict(family="gue", e=(0.5, 0.5, 1), ns=(16, 32, 64, 128), tol=2.0),
    "plot": dict(family="gue", n=20, e=(-1.9, 1.9, 101), epsilon=0.0, format="svg",
                 out="susydos_plot.svg"),
}

_CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


def _normalize(values: dict) -> dict:
    out = dict(values)
    if out.get("e") is not None:
        lo, hi, count = out["e"]
        if float(count) != int(float(count)):
            raise ConfigError("grid count must be an integer")
        out["e"] = (float(lo), float(hi), int(float(count)))
    if out.get("ns") is not None:
        out["ns"] = tuple(int(x) for x in out["ns"])
    return out


def load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def resolve_config(command: str, flags: dict, file_values: dict | None = None) -> RunConfig:
    """Merge defaults, config-file values and explicit flags, then validate."""
    merged = dict(COMMAND_DEFAULTS[command])
    merged.update(_normalize(file_values or {}))
    merged.update(_normalize(flags))
    try:
        config = RunConfig(command=command, **merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    validate(config)
    return config


def validate(config: RunConfig) -> None:
    if config.format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    if config.family is not None:
        try:
            family = Family(config.family)
        except ValueError:
            raise ConfigError(f"unknown family {config.family!r}") from None
        if family is Family.INTERPOLATING and config.command != "verify" and config.r is None:
            raise ConfigError("--r is required for the interp family")
        if family is not Family.INTERPOLATING and config.r is not None:
            fixed = 1.0 if family is Family.GUE else 0.0
            if config.r != fixed:
                raise ConfigError(f"{family.value} fixes r = {fixed:g}")
    if config.r is not None and not 0.0 <= config.r <= 1.0:
        raise ConfigError("r must lie in [0, 1]")
    if config.n is not None and config.n < 1:
        raise ConfigError("--n must be positive")
    if config.e is not None:
        lo, hi, count = config.e
        if count < 1:
            raise ConfigError("grid count must be at least 1")
        if lo > hi:
            raise ConfigError("grid minimum exceeds maximum")
        if max(abs(lo), abs(hi)) >= GRID_EDGE:
            raise ConfigError(f"energy grid must lie inside (-{GRID_EDGE}, {GRID_EDGE})")
    if config.epsilon is not None and config.epsilon < 0:
        raise ConfigError("epsilon must be non-negative")
    if config.samples < 2:
        raise ConfigError("--samples must be at least 2")
    if config.workers < 1:
        raise ConfigError("--workers must be positive")
    if config.ns is not None and (not config.ns or min(config.ns) < 1):
        raise ConfigError("--ns needs positive sizes")
    if config.command == "compare" and config.epsilon < oracle.MIN_EPSILON:
        raise ConfigError(f"compare needs epsilon >= {oracle.MIN_EPSILON}")
    if config.format == "svg" and config.command == "verify":
        raise ConfigError("verify has no figure; use csv or json")
    if config.format == "svg" and config.out is None:
        raise ConfigError("--format svg needs --out")


# -- shared helpers ---------------------------------------------------------------

def _map(func, items, workers: int):
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def _coupling(config: RunConfig) -> float:
    return config.spec.coupling


def _exact_point(family: str, N: int, r: float | None, epsilon: float, E: float):
    """(density, quadrature error in density units, method tag)."""
    fam = Family(family)
    if fam is not Family.GUE and N == 1:
        # the four-fold representation needs N >= 2; one entry is just a Gaussian
        var = 2.0 - (0.0 if fam is Family.GOE else r)
        if epsilon == 0:
            return math.exp(-E * E / (2 * var)) / math.sqrt(2 * math.pi * var), 0.0, "gaussian"
        return oracle.gaussian_scalar_dos(E, epsilon, var), 0.0, "gaussian"
    res = evaluate(fam, N, E, epsilon, r=r)
    return res.dos, res.quad_error / math.pi, "integral"


# -- commands -----------------------------------------------------------------------

@dataclass
class Report:
    rows: list[dict]
    summary: dict
    passed: bool
    figure: object | None = None


def cmd_dos(config: RunConfig) -> Report:
    E = config.energies
    points = _map(partial(_exact_point, config.family, config.n, config.r, config.epsilon),
                  E, config.workers)
    rows = []
    for e, (rho, err, _) in zip(E, points):
        exp = asymptotics.expansion(config.family, config.n, float(e), config.r)
        rows.append({"E": float(e), "rho_exact": rho, "rho_expansion": exp.total,
                     "rho_sc": exp.rho_sc, "quad_error": err})
    summary = {"exact_method": points[0][2],
               "max_quad_error": max(row["quad_error"] for row in rows)}
    return Report(rows, summary, True)


def _dos_curves(config: RunConfig, rows) -> plotting.DosCurves:
    col = lambda key: np.array([row[key] for row in rows])  # noqa: E731
    return plotting.DosCurves(config.family, config.n, col("E"), col("rho_exact"),
                              col("rho_expansion"), col("rho_sc"))


def _normalization_row(family: str, N: int, E: float, epsilon: float, r: float | None, tol: float):
    res = evaluate(family, N, E, epsilon, r=r)
    dev = abs(res.normalization - 1j)
    return {"check": "normalization", "family": family, "N": N, "E": E, "epsilon": epsilon,
            "deviation": dev, "tolerance": tol, "passed": bool(dev < tol)}


def verify_rows(config: RunConfig) -> list[dict]:
    families = [config.family] if config.family else [f.value for f in Family]
    tol = config.tol
    rows = []
    energies = config.energies
    for family in families:
        r = (config.r if config.r is not None else 0.5) if family == "interp" else None
        if config.n is not None:
            sizes = [config.n]
        else:
            sizes = [1, 2, 3, 5, 8] if family == "gue" else [2, 3, 5, 8]
        jobs = [(N, float(E), eps) for N in sizes for E in energies for eps in (0.0, 0.1)]
        rows += _map(_NormalizationJob(family, r, tol), jobs, config.workers)

    for E in (0.0, 1.0, -1.0, 1.9, -1.9):
        for family in ("gue", "goe"):
            rep = contours.verify_claim_f(E, family)
            rows.append(_claim_row("claim_f", family, rep))
        rows.append(_claim_row("claim_g", "", contours.verify_claim_g(E)))
        rows.append(_claim_row("claim_alpha", "goe",
                               contours.verify_claim_alpha_on_contour(E, pairs_per_axis=12)))

    rng = np.random.default_rng(config.seed)
    for N in range(1, 7):
        worst = 0.0
        for _ in range(5):
            deg = int(rng.integers(0, 2 * N + 1))
            coeffs = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
            worst = max(worst, grassmann.verify_phipolar(N, coeffs).difference)
        rows.append({"check": "grassmann_phipolar", "family": "", "N": N, "E": math.nan,
                     "epsilon": math.nan, "deviation": worst, "tolerance": 1e-10,
                     "passed": bool(worst <= 1e-10)})
    for E in (0.0, 0.7, -1.3):
        for rep in grassmann.verify_fermionic_blocks(E, 0.1):
            rows.append({"check": f"grassmann_{rep.name}", "family": "", "N": 5, "E": E,
                         "epsilon": 0.1, "deviation": rep.max_difference, "tolerance": 1e-12,
                         "passed": rep.passed})
    return rows


@dataclass(frozen=True)
class _NormalizationJob:
    family: str
    r: float | None
    tol: float

    def __call__(self, job):
        N, E, eps = job
        return _normalization_row(self.family, N, E, eps, self.r, self.tol)


def _claim_row(check: str, family: str, rep: contours.ClaimReport) -> dict:
    return {"check": check, "family": family, "N": "", "E": rep.E, "epsilon": math.nan,
            "deviation": 0.0 if rep.passed else 1.0, "tolerance": 0.0, "passed": rep.passed}


def cmd_verify(config: RunConfig) -> Report:
    rows = verify_rows(config)
    norm = [row["deviation"] for row in rows if row["check"] == "normalization"]
    failed = [row for row in rows if not row["passed"]]
    summary = {"max_normalization_deviation": max(norm) if norm else math.nan,
               "checks": len(rows), "failures": len(failed)}
    return Report(rows, summary, not failed)


def cmd_compare(config: RunConfig) -> Report:
    E = config.energies
    points = _map(partial(_exact_point, config.family, config.n, config.r, config.epsilon),
                  E, config.workers)
    estimates = oracle.smoothed_dos_mc_grid(config.spec, E, config.epsilon, config.samples,
                                            config.seed, workers=config.workers)
    rows = []
    for e, (exact, _, _), est in zip(E, points, estimates):
        rows.append({"E": float(e), "exact": exact, "mc_mean": est.mean,
                     "mc_stderr": est.std_error, "z_score": est.z_score(exact)})
    within = sum(abs(row["z_score"]) <= 3 for row in rows) / len(rows)
    summary = {"fraction_within_3sigma": within, "exact_method": points[0][2],
               "required_fraction": 0.95}
    return Report(rows, summary, within >= 0.95)


def cmd_residuals(config: RunConfig) -> Report:
    rows = []
    per_energy = {}
    passed = True
    for e in config.energies:
        table = asymptotics.residual_scaling(
            config.family, float(e), config.ns, config.r,
            exact=lambda n, e=float(e): _exact_point(config.family, n, config.r, 0.0, e)[0])
        for row in table:
            rows.append({"E": float(e), "N": row.N, "exact": row.exact, "expansion": row.expansion,
                         "residual": row.residual, "scaled_residual": row.scaled_residual})
        scaled = [row.scaled_residual for row in table]
        ratio = max(scaled) / scaled[0] if scaled[0] > 0 else math.inf
        growth = asymptotics.growth_flag(table)
        per_energy[f"{float(e):.17g}"] = {"growth_flag": growth, "max_over_first": ratio,
                                          "bounded": bool(ratio <= config.tol)}
        passed &= (not growth) and ratio <= config.tol
    return Report(rows, {"per_energy": per_energy, "bound_factor": config.tol}, passed)


def cmd_plot(config: RunConfig) -> Report:
    base = cmd_dos(replace(config, command="dos"))
    curves = _dos_curves(config, base.rows)
    rows = [{"E": float(e), "rho_exact": a, "rho_expansion": b, "rho_sc": c,
             "inset_exact": d, "inset_expansion": f}
            for e, a, b, c, d, f in zip(curves.energies, curves.exact, curves.expansion,
                                        curves.semicircle, curves.exact_inset,
                                        curves.expansion_inset)]
    return Report(rows, base.summary, True, plotting.dos_figure(curves))


HANDLERS = {"dos": cmd_dos, "verify": cmd_verify, "compare": cmd_compare,
            "residuals": cmd_residuals, "plot": cmd_plot}


def build_figure(config: RunConfig, report: Report):
    if report.figure is not None:
        return report.figure
    rows = report.rows
    if config.command == "dos":
        return plotting.dos_figure(_dos_curves(config, rows))
    if config.command == "compare":
        return plotting.compare_figure(config.family, config.n, config.epsilon,
                                       [r["E"] for r in rows], [r["exact"] for r in rows],
                                       [r["mc_mean"] for r in rows], [r["mc_stderr"] for r in rows])
    if config.command == "residuals":
        table = {}
        for row in rows:
            table.setdefault(row["E"], []).append((row["N"], row["scaled_residual"]))
        return plotting.residual_figure(config.family, table)
    raise ConfigError(f"{config.command} has no figure")


# -- output ---------------------------------------------------------------------------

def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue()


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def render_json(config: RunConfig, report: Report) -> str:
    from . import __version__

    doc = {
        "schema_version": SCHEMA_VERSION,
        "metadata": {"command": config.command, "package_version": __version__,
                     "config": asdict(config), "columns": COLUMNS[config.command],
                     "passed": report.passed, "summary": report.summary},
        "rows": report.rows,
    }
    return json.dumps(_json_safe(doc), indent=2, sort_keys=False) + "\n"


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def emit(config: RunConfig, report: Report) -> None:
    columns = COLUMNS[config.command]
    if config.command == "plot":
        plotting.save_svg(build_figure(config, report), config.out)
        if config.format == "csv":
            _write_text(render_csv(columns, report.rows), None)
        elif config.format == "json":
            _write_text(render_json(config, report), None)
        return
    if config.format == "svg":
        plotting.save_svg(build_figure(config, report), config.out)
    elif config.format == "json":
        _write_text(render_json(config, report), config.out)
    else:
        _write_text(render_csv(columns, report.rows), config.out)
    if config.figure is not None:
        plotting.save_svg(build_figure(config, report), config.figure)


# -- argument parsing -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    shared.add_argument("--family", choices=[f.value for f in Family])
    shared.add_argument("--r", type=float, help="coupling of the interpolating family")
    shared.add_argument("--n", type=int, help="matrix size N")
    shared.add_argument("--e", nargs=3, metavar=("MIN", "MAX", "COUNT"),
                        help="energy grid, inclusive of both ends")
    shared.add_argument("--epsilon", type=float, help="imaginary shift of the energy")
    shared.add_argument("--samples", type=int, help="Monte Carlo sample count")
    shared.add_argument("--seed", type=int, help="RNG seed")
    shared.add_argument("--tol", type=float,
                        help="tolerance (verify: normalization; residuals: growth bound)")
    shared.add_argument("--out", help="output path (default: stdout; plot: SVG path)")
    shared.add_argument("--format", choices=FORMATS)
    shared.add_argument("--ns", type=int, nargs="+", help="matrix sizes for residuals")
    shared.add_argument("--figure", help="also write an SVG figure to this path")
    shared.add_argument("--workers", type=int, help="worker processes (default 1)")
    shared.add_argument("--config", dest="config_file", help="JSON file of default settings")

    parser = argparse.ArgumentParser(
        prog="susydos", description="Exact and asymptotic densities of states for Gaussian "
        "random matrix ensembles.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"dos": "exact density, 1/N expansion and semicircle on an energy grid",
             "verify": "normalization identities, contour claims and Grassmann checks",
             "compare": "exact smoothed density against Monte Carlo sampling",
             "residuals": "scaled residuals of the 1/N expansion",
             "plot": "SVG figure of the density with a correction inset"}
    for name in COMMANDS:
        sub.add_parser(name, parents=[shared], help=helps[name])
    return parser


def parse_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_file = args.pop("config_file", None)
    file_values = load_config_file(config_file) if config_file else {}
    return resolve_config(command, args, file_values)


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"susydos: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = HANDLERS[config.command](config)
        emit(config, report)
    except (ConfigError, contours.EnergyRangeError) as exc:
        print(f"susydos: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"susydos: quadrature failure: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except OSError as exc:
        print(f"susydos: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    summary = ", ".join(f"{k}={format_value(v)}" for k, v in report.summary.items()
                        if not isinstance(v, dict))
    status = "pass" if report.passed else "FAIL"
    print(f"susydos {config.command}: {status}" + (f" ({summary})" if summary else ""),
          file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line experiments.

Every command writes one artifact (CSV by default, or a JSON document with
``--format json``) that embeds the full run configuration. ``rerun`` reads
that configuration back and reproduces the data byte for byte.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import degenerate as dg
from . import distributions as dist
from . import stochastic as st
from .errors import DegeneracyError, DomainError, QuadratureError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("pdf-grid", "marginal", "limit-scan", "delta-demo", "sample", "estimate", "diversity")
# Only sampler-based paths may take rho_c = 1.
UNITY_OK = {"sample", "estimate", "diversity"}
SINGLE_RHO = {"pdf-grid", "sample", "estimate"}
CONFIG_PREFIX = "# config: "


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    k_factor: float = 1.0
    beta: float = 1.0
    rho: list = field(default_factory=lambda: [0.5])
    format: str = "csv"
    seed: int = 0
    n: int = 100_000
    tol: float = dist.DEFAULT_TOL
    options: dict = field(default_factory=dict)
    output_path: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ConfigError("tol must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n must be a positive integer")
        if not -(2**63) <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        rho = list(self.rho)
        if not rho:
            raise ConfigError("at least one rho value is required")
        if any(not 0.0 <= r <= 1.0 for r in rho) or any(b <= a for a, b in zip(rho, rho[1:])):
            raise ConfigError("rho values must be strictly increasing within [0, 1]")
        if self.command not in UNITY_OK and rho[-1] == 1.0:
            raise ConfigError(
                f"{self.command} cannot evaluate rho_c = 1 (the bivariate density is undefined "
                "there); use limit-scan to approach the limit"
            )
        if self.command in SINGLE_RHO and len(rho) != 1:
            raise ConfigError(f"{self.command} takes a single rho value")

    def embedded(self) -> dict:
        data = asdict(self)
        data.pop("output_path")
        return data


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return "" if value is None else str(value)


def _parse_range(text: str) -> list[float]:
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError as exc:
        raise ConfigError(f"range must be start:stop:count, got {text!r}") from exc
    if count < 1 or (count > 1 and not stop > start):
        raise ConfigError(f"invalid range {text!r}")
    return np.linspace(start, stop, count).tolist()


def _parse_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


# --- commands ---------------------------------------------------------------
# Each returns (columns, rows) or, for pdf-grid, a dict for the JSON layout.


def _params(cfg: RunConfig) -> dist.RiceParams:
    return dist.RiceParams(cfg.k_factor, cfg.beta)


def _pdf_grid(cfg: RunConfig):
    opts = cfg.options
    grid = dist.bivariate_rice_grid(
        _params(cfg), cfg.rho[0], _parse_range(opts.get("x", "0:6:64")),
        _parse_range(opts.get("y", "0:6:64")), cfg.tol,
    )
    columns = ["x\\y"] + [_fmt(v) for v in grid.y_values]
    rows = [[x] + list(row) for x, row in zip(grid.x_values, grid.density)]
    return columns, rows


def _marginal(cfg: RunConfig):
    params = _params(cfg)
    xs = np.asarray(_parse_range(cfg.options.get("x", "0:6:61")))
    cdf = dist.rice_cdf(params, xs)
    log_pdf = dist.rice_log_pdf_array(params, xs)
    rows = [[x, math.exp(lp), lp, c] for x, lp, c in zip(xs, log_pdf, cdf)]
    return ["x", "pdf", "log_pdf", "cdf"], rows


def _limit_scan(cfg: RunConfig):
    params = _params(cfg)
    x0 = float(cfg.options.get("x0", 1.0))
    half_width = float(cfg.options.get("half_width", 0.2))
    reference = dist.rice_pdf(params, x0)
    rows = []
    for rho in cfg.rho:
        metrics = dg.concentration_metrics(params, rho, x0, half_width, cfg.tol)
        peak = dg.peak_ratio(params, rho, x0, cfg.tol)
        rows.append([
            rho, metrics.mass_in_window, metrics.effective_width,
            dg.effective_width(params, rho), peak, reference, peak / reference - 1.0,
        ])
    columns = ["rho_c", "mass_in_window", "effective_width", "eps_eff",
               "peak_ratio", "rice_pdf_x0", "peak_rel_error"]
    return columns, rows


def _delta_demo(cfg: RunConfig):
    params = _params(cfg)
    eps_list = _parse_list(cfg.options.get("eps", "1,0.1,0.01"))
    x = float(cfg.options.get("x", 1.0))
    y = float(cfg.options.get("y", 1.0))
    rows = []
    for eps in eps_list:
        rows.append(["nascent", eps, 0.0, None, dg.nascent_delta_integral(eps), dg.nascent_delta(0.0, eps)])
    rows.append(["G1", None, 0.0, dg.g1_weight(params), None, None])
    for term in dg.g2_terms(params, x, y):
        rows.append(["G2", None, term.location, term.weight, None, dg.g2_weight(params, x, y)])
    rows.append(["limit", None, x, dg.assembled_limit_factor(params, x), None, dist.rice_pdf(params, x)])
    return ["term", "eps", "location", "weight", "integral", "reference"], rows


def _sample(cfg: RunConfig):
    batch = st.sample_pairs(_params(cfg), cfg.rho[0], cfg.n, cfg.seed)
    return ["x", "y"], [[a, b] for a, b in zip(batch.x.tolist(), batch.y.tolist())]


def _estimate(cfg: RunConfig):
    params = _params(cfg)
    z1, z2 = st.complex_pairs(params, cfg.rho[0], cfg.n, cfg.seed)
    x, y = np.abs(z1), np.abs(z2)
    summary = st.summarize(x, y)
    cc = st.complex_corr(z1, z2)
    try:
        k = str(dg.solve_k(summary))
    except DegeneracyError:
        k = "n/a"
    rows = [[key, value] for key, value in summary.to_dict().items()]
    rows += [["rho", st.pearson_corr((x, y))], ["rho_c", cc.rho],
             ["rho_c_imag_residual", cc.imag_residual], ["k", k]]
    return ["quantity", "value"], rows


def _diversity(cfg: RunConfig):
    params = _params(cfg)
    opts = cfg.options
    if opts.get("threshold") is not None:
        threshold = float(opts["threshold"])
    else:
        threshold = dist.rice_quantile(params, float(opts.get("threshold_quantile", 0.5)))
    single = dist.rice_cdf(params, threshold)
    outages = st.outage_sweep(params, cfg.rho, threshold, cfg.n, cfg.seed)
    rows = [[rho, threshold, out, single, single * single] for rho, out in zip(cfg.rho, outages)]
    return ["rho_c", "threshold", "outage", "single_branch_cdf", "independent_outage"], rows


HANDLERS = {
    "pdf-grid": _pdf_grid,
    "marginal": _marginal,
    "limit-scan": _limit_scan,
    "delta-demo": _delta_demo,
    "sample": _sample,
    "estimate": _estimate,
    "diversity": _diversity,
}


def render(cfg: RunConfig) -> str:
    """Run the experiment and return the artifact text."""
    cfg.validate()
    columns, rows = HANDLERS[cfg.command](cfg)
    header = json.dumps(cfg.embedded(), sort_keys=True)
    if cfg.format == "json":
        doc = {
            "config": cfg.embedded(),
            "columns": columns,
            "rows": [[_json_value(v) for v in row] for row in rows],
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(CONFIG_PREFIX + header + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([[_fmt(v) for v in row] for row in rows])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def run(cfg: RunConfig) -> int:
    try:
        text = render(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, DegeneracyError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        if cfg.output_path in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(cfg.output_path).write_text(text)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def read_config(path: str) -> RunConfig:
    """Recover the configuration embedded in an artifact written by :func:`run`."""
    text = Path(path).read_text()
    if text.startswith(CONFIG_PREFIX):
        data = json.loads(text.splitlines()[0][len(CONFIG_PREFIX):])
    else:
        data = json.loads(text)["config"]
    return RunConfig(**data)


def data_section(text: str) -> str:
    """Artifact text without its embedded configuration."""
    if text.startswith(CONFIG_PREFIX):
        return text.split("\n", 1)[1]
    doc = json.loads(text)
    doc.pop("config")
    return json.dumps(doc, sort_keys=True)


# --- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rice-delta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, rho_default, n_default=100_000):
        p.add_argument("--K", dest="k_factor", type=float, default=1.0, help="Rice K-factor")
        p.add_argument("--beta", type=float, default=1.0, help="half the mean power E[X^2]/2")
        p.add_argument("--rho", default=rho_default, help="rho_c, or a comma-separated sweep")
        p.add_argument("--tol", type=float, default=dist.DEFAULT_TOL)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--n", type=int, default=n_default)
        p.add_argument("-o", "--output", dest="output_path", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        return p

    p = common(sub.add_parser("pdf-grid", help="bivariate Rice density on a grid"), "0.5")
    p.add_argument("--x", default="0:6:64", help="start:stop:count, inclusive")
    p.add_argument("--y", default="0:6:64")

    p = common(sub.add_parser("marginal", help="Rice pdf and cdf"), "0")
    p.add_argument("--x", default="0:6:61")

    p = common(sub.add_parser("limit-scan", help="concentration as rho_c -> 1"), "0.9,0.99,0.999,0.9999")
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--half-width", dest="half_width", type=float, default=0.2)

    p = common(sub.add_parser("delta-demo", help="nascent delta and composition weights"), "0")
    p.add_argument("--eps", default="1,0.1,0.01")
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--y", type=float, default=1.0)

    common(sub.add_parser("sample", help="correlated envelope pairs"), "0.5")
    common(sub.add_parser("estimate", help="moments and correlation estimates"), "0.5")

    p = common(sub.add_parser("diversity", help="selection-combining outage vs rho_c"), "0,0.5,0.9,1")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--threshold", type=float, default=None)
    group.add_argument("--threshold-quantile", dest="threshold_quantile", type=float, default=None)

    p = sub.add_parser("rerun", help="reproduce an artifact from its embedded config")
    p.add_argument("artifact")
    p.add_argument("-o", "--output", dest="output_path", default=None)
    return parser


_OPTION_KEYS = ("x", "y", "x0", "half_width", "eps", "threshold", "threshold_quantile")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    options = {key: getattr(args, key) for key in _OPTION_KEYS if getattr(args, key, None) is not None}
    return RunConfig(
        command=args.command,
        k_factor=args.k_factor,
        beta=args.beta,
        rho=_parse_list(args.rho),
        format=args.format,
        seed=args.seed,
        n=args.n,
        tol=args.tol,
        options=options,
        output_path=args.output_path,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            cfg = read_config(args.artifact)
            cfg.output_path = args.output_path
        else:
            cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError, KeyError) as exc:
        print(f"config error: unreadable embedded config ({exc})", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

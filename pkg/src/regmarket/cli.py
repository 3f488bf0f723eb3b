"""Command line entry point: ``regmarket {stationary,sweep,spne,validate}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import analysis, egt, export, mc
from .config import ConfigError, RunConfig

log = logging.getLogger("regmarket")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_TOLERANCE = 3


class ToleranceBreach(Exception):
    pass


def _meta(cfg: RunConfig, **extra) -> list:
    return export.metadata_lines(cfg.to_items(), extra)


def run_stationary(cfg: RunConfig) -> list:
    P = egt.build_transition_matrix(cfg.params, cfg.variant, cfg.scheme)
    v = egt.gth_stationary(P)
    out = Path(cfg.output_dir)
    meta = _meta(cfg)
    written = []
    if "csv" in cfg.formats:
        written.append(export.write_text(out / "chain.csv", export.chain_csv(P, v, meta)))
    if "dot" in cfg.formats:
        written.append(export.write_text(out / "chain.dot", export.chain_dot(P, v, meta)))
    for st in v.labels:
        print(f"{st}\t{100 * v[st]:.2f}%")
    return written


def run_sweep(cfg: RunConfig) -> list:
    grid = analysis.sweep(
        cfg.params,
        cfg.variant,
        cfg.welfare,
        cfg.scheme,
        cfg.axis1,
        cfg.axis2,
        n_jobs=cfg.n_jobs,
        government=cfg.regulator == "government",
    )
    out = Path(cfg.output_dir)
    meta = _meta(cfg)
    written = []
    if "csv" in cfg.formats:
        written.append(export.write_text(out / "sweep.csv", export.sweep_csv(grid, cfg.metrics, meta)))
    if "svg" in cfg.formats:
        for metric in cfg.metrics:
            written.append(
                export.write_text(out / f"sweep_{metric}.svg", export.heatmap_svg(grid, metric, meta))
            )
    return written


def spne_report(cfg: RunConfig) -> str:
    outcome = analysis.spne(cfg.params, cfg.variant, cfg.scheme)
    g_star = analysis.critical_vigilant_g(cfg.params)
    response = ", ".join(f"{r.value}->{f.value}" for r, f in outcome.firm_response.items())
    firm = outcome.firm_strategy.value if outcome.firm_strategy else "none"
    clears = "yes" if cfg.params.g > g_star else "no"
    return "\n".join(
        [
            f"regulator: {outcome.regulator_choice.value}; threshold g*: {export.num(g_star)}",
            f"scheme: {cfg.scheme.value}",
            f"firm response: {response} (strategy {firm})",
            "regulator payoffs: "
            + ", ".join(f"{r.value}={export.num(p)}" for r, p in outcome.regulator_payoffs.items()),
            f"g = {export.num(cfg.params.g)} clears g*: {clears}",
        ]
    )


def run_spne(cfg: RunConfig) -> str:
    report = spne_report(cfg)
    print(report)
    return report


def run_validate(cfg: RunConfig) -> float:
    """Compare Monte Carlo occupancy with the analytic stationary vector.

    Raises
    ------
    ToleranceBreach
        If the total-variation distance exceeds ``cfg.tolerance``.
    """
    v = egt.stationary_distribution(cfg.params, cfg.variant, cfg.scheme)
    report = mc.simulate_replicas(
        cfg.params, cfg.variant, cfg.scheme, cfg.sim,
        replicas=cfg.sim_replicas, beta=cfg.sim_beta, n_jobs=cfg.n_jobs,
    )
    empirical = report.vector()
    tv = mc.total_variation(v.vector, empirical)
    rows = [
        [str(st), export.num(v[st]), export.num(e), export.num(abs(v[st] - e))]
        for st, e in zip(v.labels, empirical)
    ]
    rows.append(["TV", "", "", export.num(tv)])
    meta = _meta(
        cfg,
        rng=report.rng,
        total_steps=report.steps,
        unclassified_fraction=export.num(report.unclassified_fraction),
        non_monomorphic_fraction=export.num(report.non_monomorphic_fraction),
    )
    text = export._csv_text(["state", "analytic", "empirical", "abs_diff"], rows, meta)
    export.write_text(Path(cfg.output_dir) / "validate.csv", text)
    print(f"TV distance {tv:.4f} (tolerance {cfg.tolerance})")
    if tv > cfg.tolerance:
        raise ToleranceBreach(f"TV distance {tv:.4f} exceeds {cfg.tolerance}")
    return tv


COMMANDS = {
    "stationary": run_stationary,
    "sweep": run_sweep,
    "spne": run_spne,
    "validate": run_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regmarket", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="key = value configuration file")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="override a configuration key (repeatable, applied after --config)",
        )
        p.add_argument("--dump-config", action="store_true", help="print the effective configuration and exit")
    return parser


def load_config(path: Path | None, overrides) -> RunConfig:
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return RunConfig.loads(text, overrides)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args.config, args.overrides)
        if args.dump_config:
            sys.stdout.write(cfg.dumps())
            return EXIT_OK
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ToleranceBreach as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (ArithmeticError, analysis.SweepCellError, analysis.NoCrossing) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

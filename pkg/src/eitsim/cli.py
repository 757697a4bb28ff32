"""``eitsim`` command-line front end.

    eitsim {spectra,steady,g2tau,sweep,blockade,check} CONFIG
           [--out PATH] [--nmax K] [--grid lo:hi:steps]

Flags override config keys, which override defaults.  Every run writes its
CSV plus ``<out stem>.manifest.json``.  Exit codes: 0 success, 1 config
error, 2 numerical failure, 3 truncation not converged.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import spectra
from .checks import run_checks
from .config import ConfigError, RunConfig, load_config, parse_grid, parse_mapping
from .dynamics import NumericalError, UndefinedStatisticError, build_liouvillian, g2_tau, g2_zero, steady_state
from .hilbert import DimensionError
from .io import manifest_path, write_csv, write_manifest
from .krylov import PropagationError
from .model import ParameterError
from .sweeps import convergence_check, default_delta_grid, sweep_delta

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CONVERGENCE = 0, 1, 2, 3
DEFAULT_TAU_MAX = 20.0
DEFAULT_TAU_STEPS = 201


class ConvergenceFlag(Exception):
    pass


def cmd_spectra(cfg: RunConfig, out: Path) -> dict:
    rows = spectra.spectrum_rows(cfg.params)
    write_csv(rows, out, ["n", "index", "re_eps", "im_eps", "overlap_eit"])
    return {"rows": len(rows)}


def cmd_steady(cfg: RunConfig, out: Path) -> dict:
    p = cfg.params
    lv = build_liouvillian(p, p.space())
    rho = steady_state(lv)
    report = convergence_check(p)
    row = dict(
        n_max=p.cutoff,
        g2_zero=g2_zero(rho),
        mean_photon=rho.mean_photon(),
        residual=float(np.linalg.norm(lv.matrix @ rho.data.reshape(-1, order="F"))),
        min_eigenvalue=rho.min_eigenvalue(),
        truncation_delta=max(report.rel_g2, report.rel_eps0),
    )
    write_csv([row], out, list(row))
    result = dict(row, converged=not report.flagged)
    if report.flagged:
        raise ConvergenceFlag(result)
    return result


def cmd_g2tau(cfg: RunConfig, out: Path) -> dict:
    grid = cfg.grid()
    if grid is None:
        tau_max = cfg.options.get("tau_max", DEFAULT_TAU_MAX)
        steps = cfg.options.get("tau_steps", DEFAULT_TAU_STEPS)
        grid = np.linspace(0.0, tau_max, steps)
    series = g2_tau(cfg.params, grid)
    write_csv(series.rows(), out, ["tau", "g2"])
    return {"mean_photon": series.mean_photon, "g2_zero": float(series.g2[0]), "points": len(grid)}


def cmd_sweep(cfg: RunConfig, out: Path) -> dict:
    grid = cfg.grid()
    if grid is None:
        grid = default_delta_grid(cfg.params)
    result = sweep_delta(cfg.params, grid)
    write_csv(result.rows(), out, result.header())
    failed = len(result.failed)
    summary = {"points": len(grid), "failed": failed}
    if failed:
        raise NumericalError(f"{failed} of {len(grid)} sweep points failed")
    return summary


def cmd_blockade(cfg: RunConfig, out: Path) -> dict:
    report = spectra.blockade_figure(cfg.params)
    res = spectra.analyze(cfg.params)
    rows = [
        dict(index=f, re_eps=res.n2.eigenvalues[f].real, im_eps=res.n2.eigenvalues[f].imag, rate=w)
        for f, w in report.rates
    ]
    write_csv(rows, out, ["index", "re_eps", "im_eps", "rate"])
    print(f"P = {report.P:.6g}  W01 = {report.w01:.6g}  anharmonicity = {report.anharmonicity:.6g}")
    return {"P": report.P, "w01": report.w01, "anharmonicity": report.anharmonicity, "eps0": report.eps0}


def cmd_check(cfg: RunConfig, out: Path) -> dict:
    results = run_checks(cfg.params)
    for r in results:
        print(r.line())
    rows = [dict(name=r.name, passed=r.passed, value=r.value, limit=r.limit) for r in results]
    write_csv(rows, out, ["name", "passed", "value", "limit"])
    failed = [r.name for r in results if not r.passed]
    summary = {"checks": len(results), "failed": failed}
    if failed == ["truncation delta g2(0)"]:
        raise ConvergenceFlag(summary)
    if failed:
        raise NumericalError(f"failed checks: {', '.join(failed)}")
    return summary


COMMANDS = {
    "spectra": cmd_spectra,
    "steady": cmd_steady,
    "g2tau": cmd_g2tau,
    "sweep": cmd_sweep,
    "blockade": cmd_blockade,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eitsim", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", help="key = value parameter file or a run manifest")
    parser.add_argument("--out", help="output CSV path (default: <command>.csv)")
    parser.add_argument("--nmax", type=int, help="Fock cutoff, overrides n_max")
    parser.add_argument("--grid", help="lo:hi:steps grid for sweep (delta) or g2tau (tau)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    values = cfg.flat()
    if args.nmax is not None:
        values["n_max"] = args.nmax
    if args.grid is not None:
        parse_grid(args.grid)
        values["grid"] = args.grid
    if args.out is not None:
        values["out"] = args.out
    return parse_mapping(values, cfg.source or args.config)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = resolve(args)
        out = Path(cfg.options.get("out", f"{args.command}.csv"))
    except (ConfigError, ParameterError, DimensionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    start = time.perf_counter()
    status, results = EXIT_OK, {}
    try:
        results = COMMANDS[args.command](cfg, out)
    except ConvergenceFlag as flag:
        results = flag.args[0]
        status = EXIT_CONVERGENCE
        print("truncation not converged: increase n_max", file=sys.stderr)
    except (ConfigError, ParameterError, DimensionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, PropagationError, UndefinedStatisticError, spectra.SpectrumError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        status = EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    wall = time.perf_counter() - start
    config = cfg.flat()
    config.pop("out", None)
    outputs = [out] if out.exists() else []
    write_manifest(manifest_path(out), args.command, config, outputs, wall, dict(results, exit_status=status))
    return status


if __name__ == "__main__":
    sys.exit(main())

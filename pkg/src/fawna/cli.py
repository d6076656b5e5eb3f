"""Command-line front end.

    fawna capacity --power-over-n0 25e6 --bandwidth-hz 1e6 --interfaces 5 --fiber-bps 1e9
    fawna sweep --preset fig3 --power-over-n0 200e6
    fawna optimize --preset fig4
    fawna simulate --power-over-n0 10e6 --bandwidth-hz 1e6 --interfaces 2 --fiber-bps 32e6

Exit codes: 0 success, 2 usage error, 3 admissibility error, 4 numerics error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .linksim import SimRun, simulate_link
from .model import (AdmissibilityError, LinkConfig, NumericsError, ParameterError,
                    QuantizerModel, capacity_lower_bound)
from .optimize import SweepRow, SweepTable, optimal_bandwidth, optimal_interfaces, sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ADMISSIBILITY = 3
EXIT_NUMERICS = 4

PRESETS = {
    "fig2": dict(power_over_n0=25e6, bandwidth_hz=1e6, interfaces=5, mb_product=1.0,
                 variable="fiber_rate", lo=5e6, hi=1e9, points=200, scale="log"),
    "fig3": dict(power_over_n0=20e6, bandwidth_hz=5e6, fiber_bps=100e6, mb_product=1.0,
                 variable="interfaces", lo=1, hi=20, points=20, scale="linear",
                 target="interfaces"),
    "fig4": dict(power_over_n0=100e6, interfaces=2, fiber_bps=200e6, mb_product=1.0,
                 variable="bandwidth", lo=0.1e6, hi=100e6, points=1000, scale="linear",
                 target="bandwidth"),
}


class UsageError(Exception):
    pass


def read_gains(path) -> tuple[complex, ...]:
    """One complex gain per line as ``re im`` or ``re,im``; ``#`` starts a comment."""
    gains = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise UsageError(f"{path}:{lineno}: expected 're im', got {line!r}")
            try:
                gains.append(complex(float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from exc
    if not gains:
        raise UsageError(f"{path}: no gains found")
    return tuple(gains)


def _link_flags(p: argparse.ArgumentParser, fiber=True):
    g = p.add_argument_group("link")
    g.add_argument("--power-over-n0", type=float, metavar="S^-1",
                   help="P/N0 in 1/s (exclusive with --power/--noise-density)")
    g.add_argument("--power", type=float, help="transmit power P in W")
    g.add_argument("--noise-density", type=float, help="noise density N0 in W/Hz")
    g.add_argument("--bandwidth-hz", type=float, help="wireless bandwidth W in Hz")
    g.add_argument("--interfaces", type=int, help="number of interfaces r (unit gains)")
    g.add_argument("--gains", metavar="PATH", help="file of complex gains, one 're im' per line")
    if fiber:
        g.add_argument("--fiber-bps", type=float, help="fiber rate C_f in bits/s")
    qg = p.add_mutually_exclusive_group()
    qg.add_argument("--mb-product", type=float, help="Zador-Gersho product M_m beta_m in [1, 2.7207]")
    qg.add_argument("--quantizer", choices=("scalar", "asymptotic"),
                    help="shorthand for mb-product pi*sqrt(3)/2 or 1")
    p.add_argument("--preset", help="figure preset: fig2, fig3 or fig4")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fawna",
        description="Capacity bounds and Monte Carlo checks for quantize-and-forward SIMO fiber links.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="evaluate the upper and lower capacity bounds")
    _link_flags(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("sweep", help="sweep one parameter and emit a table")
    _link_flags(p)
    p.add_argument("--variable", choices=("fiber_rate", "interfaces", "bandwidth", "power"))
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--scale", choices=("linear", "log"))
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("optimize", help="find the optimal interface count or bandwidth")
    _link_flags(p)
    p.add_argument("--target", choices=("interfaces", "bandwidth"))
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("simulate", help="Monte Carlo simulation of the quantized link")
    _link_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10 ** 6)
    p.add_argument("--format", choices=("json",), default="json")
    return parser


def _merged(args) -> dict:
    """Flags given on the command line override the preset."""
    values = {}
    if args.preset is not None:
        if args.preset not in PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}; choose from {', '.join(PRESETS)}")
        values.update(PRESETS[args.preset])
    for k, v in vars(args).items():
        if v is not None and k != "preset":
            values[k] = v
    return values


def _require(values, *names):
    missing = [n for n in names if values.get(n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required flag(s): {flags}")


def _power(values) -> tuple[float, float]:
    ratio = values.get("power_over_n0")
    p, n0 = values.get("power"), values.get("noise_density")
    if ratio is not None and (p is not None or n0 is not None):
        # A preset ratio yields to explicit P and N0.
        if "power_over_n0" in values.get("_explicit", ()):
            raise UsageError("--power-over-n0 is exclusive with --power/--noise-density")
        ratio = None
    if ratio is not None:
        return ratio, 1.0
    if p is None or n0 is None:
        raise UsageError("give --power-over-n0, or both --power and --noise-density")
    return p, n0


def _quantizer(values) -> QuantizerModel:
    if values.get("quantizer") == "asymptotic":
        return QuantizerModel.asymptotic()
    if values.get("quantizer") == "scalar":
        return QuantizerModel.scalar()
    if "mb_product" in values:
        return QuantizerModel(1, values["mb_product"])
    raise UsageError("missing required flag: --mb-product or --quantizer")


def _gains(values) -> tuple[complex, ...]:
    if values.get("gains") is not None:
        gains = read_gains(values["gains"])
        if values.get("interfaces") is not None and "interfaces" in values.get("_explicit", ()) \
                and values["interfaces"] != len(gains):
            raise UsageError(f"--interfaces {values['interfaces']} disagrees with {len(gains)} gains")
        return gains
    _require(values, "interfaces")
    if values["interfaces"] < 1:
        raise UsageError("--interfaces must be >= 1")
    return (1.0,) * int(values["interfaces"])


def _config(values) -> LinkConfig:
    power, n0 = _power(values)
    _require(values, "bandwidth_hz", "fiber_bps")
    return LinkConfig(power=power, noise_density=n0, bandwidth=values["bandwidth_hz"],
                      gains=_gains(values), fiber_rate=values["fiber_bps"])


def _emit(obj, fmt, out):
    if fmt == "json":
        out.write(json.dumps(obj.to_dict() if hasattr(obj, "to_dict") else obj) + "\n")
    else:
        out.write(obj.to_csv())


def cmd_capacity(values, out):
    cfg = _config(values)
    report = capacity_lower_bound(cfg, _quantizer(values))
    if values["format"] == "csv":
        _emit(SweepTable("fiber_rate", (SweepRow(cfg.fiber_rate, report),)), "csv", out)
    else:
        _emit(report, "json", out)


def _sweep_config(values) -> LinkConfig:
    # The swept quantity only needs a placeholder value.
    var = values["variable"]
    filled = dict(values)
    placeholder = {"fiber_rate": "fiber_bps", "bandwidth": "bandwidth_hz"}
    if var in placeholder and filled.get(placeholder[var]) is None:
        filled[placeholder[var]] = values["lo"]
    if var == "interfaces" and filled.get("interfaces") is None and filled.get("gains") is None:
        filled["interfaces"] = 1
    if var == "power" and filled.get("power_over_n0") is None and filled.get("power") is None:
        filled["power_over_n0"] = values["lo"]
    return _config(filled)


def cmd_sweep(values, out):
    _require(values, "variable", "lo", "hi", "points")
    cfg = _sweep_config(values)
    table = sweep(values["variable"], values["lo"], values["hi"], values["points"], cfg,
                  _quantizer(values), scale=values.get("scale") or "linear",
                  threads=values.get("threads", 1))
    _emit(table, values["format"], out)


def cmd_optimize(values, out):
    _require(values, "target")
    q = _quantizer(values)
    power, n0 = _power(values)
    if values.get("gains") is not None:
        raise UsageError("optimization assumes unit gains; drop --gains")
    _require(values, "fiber_bps")
    if values["target"] == "interfaces":
        _require(values, "bandwidth_hz")
        result = optimal_interfaces(power, n0, values["bandwidth_hz"], values["fiber_bps"], q)
    else:
        _require(values, "interfaces")
        result = optimal_bandwidth(power, n0, values["interfaces"], values["fiber_bps"], q)
    if values["format"] == "csv":
        _emit(result.profile, "csv", out)
    else:
        _emit(result, "json", out)


def cmd_simulate(values, out):
    cfg = _config(values)
    run = SimRun(cfg, trials=values["trials"], seed=values["seed"],
                 threads=values.get("threads", 1))
    _emit(simulate_link(run), "json", out)


COMMANDS = {
    "capacity": cmd_capacity,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    explicit = {k for k, v in vars(args).items() if v is not None}
    try:
        values = _merged(args)
        values["_explicit"] = explicit
        if values.get("threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        COMMANDS[args.command](values, out)
    except (UsageError, ParameterError) as exc:
        print(f"fawna {args.command}: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except AdmissibilityError as exc:
        print(f"fawna {args.command}: inadmissible: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except NumericsError as exc:
        print(f"fawna {args.command}: numerics error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

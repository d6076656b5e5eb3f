"""Write the three design-curve CSVs and print the optima they imply.

    python scripts/reproduce_figures.py --out results/
"""
import argparse
from pathlib import Path

from fawna.model import LinkConfig, QuantizerModel
from fawna.optimize import optimal_bandwidth, optimal_interfaces, sweep

MB1 = QuantizerModel(1, 1.0)


def fiber_curve(out: Path):
    cfg = LinkConfig.from_ratio(25e6, 1e6, 1e9, interfaces=5)
    table = sweep("fiber_rate", 5e6, 1e9, 200, cfg, MB1, scale="log")
    (out / "fiber_sweep.csv").write_text(table.to_csv())
    last = table.rows[-1].report
    print(f"fiber sweep: C_LB at 1 Gbps = {last.lower_bound:.1f} bps "
          f"(upper bound {last.upper_bound:.1f} bps)")


def interface_curves(out: Path):
    for p_n0 in (20e6, 200e6, 2000e6):
        res = optimal_interfaces(p_n0, 1.0, 5e6, 100e6, MB1)
        (out / f"interfaces_p{p_n0:.0e}.csv").write_text(res.profile.to_csv())
        print(f"interfaces: P/N0 = {p_n0:.0e}  r* = {res.argmax}  C_LB = {res.value:.1f} bps")


def bandwidth_curve(out: Path):
    res = optimal_bandwidth(100e6, 1.0, 2, 200e6, MB1)
    cfg = LinkConfig.from_ratio(100e6, 1e6, 200e6, interfaces=2)
    table = sweep("bandwidth", 0.1e6, 100e6, 1000, cfg, MB1)
    (out / "bandwidth_sweep.csv").write_text(table.to_csv())
    print(f"bandwidth: W* = {res.argmax / 1e6:.3f} MHz  C_LB = {res.value:.1f} bps")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    fiber_curve(args.out)
    interface_curves(args.out)
    bandwidth_curve(args.out)


if __name__ == "__main__":
    main()

"""Compare trained Lloyd-Max distortion against the high-rate formula and
run the end-to-end link simulation at a few interface counts."""
import argparse

from fawna.linksim import SimRun, simulate_link
from fawna.model import MB_MAX, LinkConfig
from fawna.quantizer import held_out_distortion, train_gaussian_quantizer


def distortion_table(max_bits):
    print("bits  measured/predicted")
    for bits in range(1, max_bits + 1):
        tq = train_gaussian_quantizer(bits, 1.0)
        ratio = held_out_distortion(tq) / (MB_MAX * 4.0 ** -bits)
        print(f"{bits:4d}  {ratio:.4f}")


def link_table(trials, seed, l):
    print(f"\nr  empirical_bps  C_LB_bps  upper_bps  se_bps   (l={l}, P/N0=1e7, W=1 MHz)")
    for r in (1, 2, 5):
        cfg = LinkConfig.from_ratio(10e6, 1e6, l * r * 1e6, interfaces=r)
        rep = simulate_link(SimRun(cfg, trials=trials, seed=seed))
        print(f"{r}  {rep.empirical_rate:.0f}  {rep.analytical_lower_bound:.0f}  "
              f"{rep.upper_bound:.0f}  {rep.rate_se:.0f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-bits", type=int, default=10)
    ap.add_argument("--trials", type=int, default=10 ** 6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rate", type=int, default=16, help="bits per complex sample")
    args = ap.parse_args()
    distortion_table(args.max_bits)
    link_table(args.trials, args.seed, args.rate)


if __name__ == "__main__":
    main()

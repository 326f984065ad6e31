"""Invariance order of Daubechies scaling functions: fraction of cells failing the rank test per n."""
import argparse

from sis_invariance.invariance import invariance_order
from sis_invariance.spectrum import Daubechies, FrequencyGrid, evaluate, tail_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--taps", type=int, nargs="+", default=[2, 4, 6, 8])
    ap.add_argument("--grid", default="256,32", help="M,K")
    ap.add_argument("--depth", type=int, default=20)
    ap.add_argument("--n-max", type=int, default=8)
    args = ap.parse_args()

    M, K = (int(x) for x in args.grid.split(","))
    grid = FrequencyGrid(M, K)
    ns = list(range(2, args.n_max + 1))
    print("taps  order  tail      " + " ".join(f"n={n:<4}" for n in ns))
    for taps in args.taps:
        spec = Daubechies.standard(taps, depth=args.depth)
        order = invariance_order([evaluate(spec, grid)], args.n_max)
        fracs = " ".join(f"{order.verdicts[n].failing_fraction:<6.3f}" for n in ns)
        print(f"{taps:<5} {str(order.declared):<6} {tail_energy(spec, grid):<9.2e} {fracs}")


if __name__ == "__main__":
    main()

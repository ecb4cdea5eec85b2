"""Scaling study: selected unstable coordinate vs perturbation size.

Repeats the center-hypersurface bisection at several perturbation
magnitudes and fits the log-log slope of |a*| against the weighted norm.
The graph-curvature tangency makes the measured slope sit near 2; the
one-sided bound |a*| <= C eps^((p+1)/2) holds with small C either way,
and both numbers are printed for the record.
"""
import argparse

import numpy as np

from nlkglab import refined
from nlkglab.evolution import EvolutionConfig, shooting_slope
from nlkglab.fields import make_grid, state_pair
from nlkglab.refined import ProfileConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--t-final", type=float, default=6.0)
    ap.add_argument("--mags", type=float, nargs="+",
                    default=[0.003, 0.01, 0.03])
    args = ap.parse_args()

    g = make_grid(L=100.0, n=4096)
    prof = refined.build_profile(g, args.p)
    shape = state_pair(g, prof.phi2.values.copy(), np.zeros(g.n))
    config = EvolutionConfig(t_final=args.t_final, record_stride=20)
    slope, results = shooting_slope(shape, tuple(args.mags), config, prof,
                                    ProfileConfig(delta_ball=0.15))
    half = 0.5 * (args.p + 1.0)
    print(f"p = {args.p}   exponent (p+1)/2 = {half}")
    for r in results:
        print(f"  eps_norm {r.eps_norm:.6e}  a* {r.a_star: .6e}  "
              f"C = |a*|/eps^{half:g} = {r.bound_constant:.3e}  "
              f"({r.evaluations} shots)")
    print(f"fitted log-log slope: {slope:.4f}")
    print(f"one-sided constant: C <= {max(r.bound_constant for r in results):.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

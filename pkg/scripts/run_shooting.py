"""Bisect the unstable coordinate onto the center hypersurface.

Perturbs the standing profile along the even bound state, shoots on the
sign of the outgoing unstable coordinate, and reports the selected a*
together with the one-sided size bound |a*| <= C eps^((p+1)/2).
"""
import sys

from nlkglab.cli import main

if __name__ == "__main__":
    args = ["shoot", "--p", "2.0", "--pert-mag", "0.01",
            "--a-min=-1e-3", "--a-max", "1e-3", "--tol", "1e-10",
            "--t-final", "8", "--stride", "20", "--out", "runs/shoot"]
    raise SystemExit(main(args + sys.argv[1:]))

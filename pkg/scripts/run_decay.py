"""Long internal-mode run: radiation damping of the even mode.

Starts on the center hypersurface with z2 = 0.1 (unstable coordinate
suppressed), integrates to t = 3000, and records the trajectory plus
periodic state checkpoints for the functional post-processor.  The decay
exponent fitted from |z2| lands near the -1/2 radiation-damping law; the
checkpoint series feeds scripts/run_virial_series.py.

Takes a few minutes at the default resolution.
"""
import sys

from nlkglab.cli import main

if __name__ == "__main__":
    args = ["evolve", "--p", "2.0", "--re-z2", "0.1", "--suppress", "1",
            "--t-final", "3000", "--stride", "20", "--delta", "0.15",
            "--checkpoint-stride", "200", "--out", "runs/decay"]
    raise SystemExit(main(args + sys.argv[1:]))

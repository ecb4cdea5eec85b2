"""Sweep the resonance coefficient across the exponent range.

Thin shell over the command line interface; extra arguments pass through,
e.g.  python3 scripts/run_fgr_scan.py --p-count 100 --workers 4
"""
import sys

from nlkglab.cli import main

if __name__ == "__main__":
    args = ["fgr-scan", "--p-min", "1.7", "--p-max", "2.0",
            "--p-count", "50", "--out", "runs/fgr"]
    raise SystemExit(main(args + sys.argv[1:]))

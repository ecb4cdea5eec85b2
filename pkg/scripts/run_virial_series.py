"""Evaluate the monitoring functionals along a checkpointed run.

Two stages: a short internal-mode run writing state checkpoints, then the
functional pass over that series (localized virial forms, resonance flux,
analytic rates and cumulative budgets in the CSV trailer).  Point --series
at an existing checkpoint directory to skip the first stage.
"""
import pathlib
import sys

from nlkglab.cli import main

if __name__ == "__main__":
    extra = sys.argv[1:]
    series = "runs/functionals/states"
    if "--series" not in " ".join(extra):
        rc = main(["evolve", "--p", "2.0", "--re-z1", "0.003",
                   "--re-z2", "0.03", "--suppress", "1", "--t-final", "60",
                   "--stride", "10", "--delta", "0.15",
                   "--checkpoint-stride", "2", "--out", series])
        if rc != 0:
            raise SystemExit(rc)
    else:
        series = ""
    args = ["virial", "--p", "2.0", "--delta", "0.15",
            "--out", "runs/functionals"]
    if series:
        args += ["--series", series]
    raise SystemExit(main(args + extra))

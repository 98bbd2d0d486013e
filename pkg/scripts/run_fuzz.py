"""Run every fuzz suite for a few seeds and print one summary line each.

    python3 scripts/run_fuzz.py --trials 200 --seeds 0 1 2
"""

import argparse
import contextlib
import io

from polyreg.cli import SUITES, run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    args = ap.parse_args()
    worst = 0
    for suite in sorted(SUITES):
        for seed in args.seeds:
            buf = io.StringIO()
            # stderr only carries timings
            with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
                code = run(["fuzz", "--suite", suite, "--seed", str(seed), "--trials", str(args.trials)])
            print(buf.getvalue().strip().splitlines()[-1])
            worst = max(worst, code)
    raise SystemExit(worst)


if __name__ == "__main__":
    main()

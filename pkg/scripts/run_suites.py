"""Run every verification suite at acceptance size and write JSON reports.

    python scripts/run_suites.py --out reports --seed 0
"""
import argparse
import os
import sys
import time

from asmkit.cosim import suites

RUNS = {
    "separation": lambda seed: _both(suites.separation_suite(seed, 500, 20),
                                     suites.separation_hand_cases()),
    "normalization": lambda seed: _both(suites.normalization_suite(seed, 500, 50),
                                        suites.merge_example_report()),
    "serialization": lambda seed: suites.serialization_suite(seed, 200, 10),
    "pruning": lambda seed: _both(suites.pruning_suite(), suites.relativized_suite()),
    "roundtrip": lambda seed: suites.roundtrip_suite(seed, 1000),
    "uninformative": lambda seed: suites.uninformative_suite(seed, 100, 100),
}


def _both(rep, extra):
    rep.absorb(extra)
    return rep


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="reports")
    p.add_argument("--only", choices=sorted(RUNS), action="append")
    args = p.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    failed = 0
    for name in args.only or RUNS:
        t0 = time.perf_counter()
        rep = RUNS[name](args.seed)
        path = os.path.join(args.out, f"{name}.json")
        with open(path, "w") as fh:
            fh.write(rep.dumps() + "\n")
        failed += not rep.passed
        print(f"{name:14s} {rep.status:4s} cases={rep.cases:5d} "
              f"{time.perf_counter() - t0:6.1f}s -> {path}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

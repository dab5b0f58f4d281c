#!/usr/bin/env python3
"""Generate a random battery, solve it with and without cuts, print gap-closed tables.

    python3 scripts/run_battery.py --seed 1 --count 200 --work /tmp/battery
"""

import argparse
import sys
from pathlib import Path

from exactcuts.cli import main as cli


def run(argv):
    print("$ exactcuts " + " ".join(argv))
    code = cli(argv)
    if code not in (0, 2):
        sys.exit(code)
    return code


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--mixed-share", type=float, default=0.3)
    ap.add_argument("--max-denom", type=int, default=2 ** 17)
    ap.add_argument("--work", default="battery_run")
    ap.add_argument("--certificates", action="store_true")
    args = ap.parse_args()

    work = Path(args.work)
    inst = work / "instances"
    run(["generate", "--seed", str(args.seed), "--count", str(args.count),
         "--mixed-share", str(args.mixed_share), "--out", str(inst)])

    # the cut-free run gives the reference objectives
    run(["batch", str(inst), "--out", str(work / "nocuts"), "--cuts", "off"])
    reference = str(work / "nocuts" / "reference.csv")
    for tag, flags in (("gmi", ["--max-denom", str(args.max_denom)]), ("gmi_nolimit", ["--max-denom", "0"])):
        extra = ["--certificates"] if args.certificates else []
        run(["batch", str(inst), "--out", str(work / tag), "--cuts", "gmi", *flags, *extra])
        print(f"\n== {tag} ==")
        run(["report", str(work / tag), "--reference", reference, "--csv", str(work / f"{tag}.csv")])


if __name__ == "__main__":
    main()

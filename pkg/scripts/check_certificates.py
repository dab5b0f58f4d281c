#!/usr/bin/env python3
"""Complete and check every pre-certificate in a directory.

    python3 scripts/check_certificates.py battery_run/gmi/certificates [--exact-lp]
"""

import argparse
import sys
from pathlib import Path

from exactcuts.certificate import BOUNDS, EXACT_LP, CompletionError, check_certificate, complete_certificate, parse_certificate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dir")
    ap.add_argument("--exact-lp", action="store_true")
    args = ap.parse_args()
    mode = EXACT_LP if args.exact_lp else BOUNDS

    paths = sorted(Path(args.dir).glob("*.vipr"))
    bad = 0
    for path in paths:
        try:
            done = complete_certificate(parse_certificate(path.read_text()), mode)
            verdict = check_certificate(done)
            msg = "accepted" if verdict else f"rejected at DER {verdict.index}: {verdict.reason}"
        except CompletionError as exc:
            verdict, msg = False, f"completion failed: {exc}"
        if not verdict:
            bad += 1
        print(f"{path.name:24s} {msg}")
    print(f"{len(paths) - bad} of {len(paths)} accepted")
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()

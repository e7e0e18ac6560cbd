"""Download the cylindrical-shell test matrices used for the T5k pairing.

Opt-in only; the test suite never calls this.  Files land in ``data/``
(override with ``--dest``) and are picked up by the network-optional test
when present.

    python3 scripts/fetch_matrices.py
"""

import argparse
import sys
import urllib.request
from pathlib import Path

BASE = "https://math.nist.gov/pub/MatrixMarket2/Harwell-Boeing/cylshell"
FILES = ("s1rmq4m1.mtx.gz", "s2rmq4m1.mtx.gz")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default=str(Path(__file__).resolve().parents[1] / "data"))
    parser.add_argument("--base-url", default=BASE)
    args = parser.parse_args(argv)
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    for name in FILES:
        target = dest / name
        if target.exists():
            print(f"{target} already present")
            continue
        url = f"{args.base_url}/{name}"
        print(f"fetching {url}")
        try:
            with urllib.request.urlopen(url, timeout=60) as resp:
                target.write_bytes(resp.read())
        except OSError as exc:
            print(f"failed: {exc}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

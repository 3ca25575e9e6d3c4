"""Regenerate the committed Mertens golden file.

Values come from the factorization route, not the sieve, so the file
stays an independent reference for the sieve tests.
"""

import json
import os

import numpy as np

from nilseqlab.mobius import mobius_by_factorization

CHECKPOINTS = [100, 10**4, 10**6]

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "data",
                   "mertens_golden.json")


def main() -> None:
    limit = max(CHECKPOINTS)
    mu = mobius_by_factorization(limit)  # index 0 present, holds 0
    partial = np.cumsum(mu.astype(np.int64))
    golden = {str(n): int(partial[n]) for n in CHECKPOINTS}
    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w") as fh:
        json.dump({"method": "trial-division", "mertens": golden}, fh,
                  indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(golden))


if __name__ == "__main__":
    main()

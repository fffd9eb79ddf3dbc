"""Time the compiled kernels against the pure-Python fallback.

Each backend runs in its own interpreter (the backend is chosen at import
time), over the bundled corpus:

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from importlib import resources
from chemsandbox import _kernels
from chemsandbox.molgraph import canonical_smiles, mol_from_smiles
from chemsandbox.descriptors import morgan_fingerprint
from chemsandbox.patterns import functional_group_counts

smiles = [s for s in resources.files("chemsandbox").joinpath("data/corpus.smi").read_text().split() if s]
repeat = int(sys.argv[1])
tasks = {
    "canonical_smiles": canonical_smiles,
    "morgan_fingerprint": morgan_fingerprint,
    "functional_group_counts": functional_group_counts,
}
out = {"backend": _kernels.BACKEND, "molecules": len(smiles), "seconds": {}}
for name, fn in tasks.items():
    best = float("inf")
    for _ in range(repeat):
        mols = [mol_from_smiles(s) for s in smiles]  # fresh objects defeat per-molecule caches
        start = time.perf_counter()
        for m in mols:
            fn(m)
        best = min(best, time.perf_counter() - start)
    out["seconds"][name] = best
print(json.dumps(out))
"""


def measure(pure: bool, repeat: int) -> dict:
    env = dict(os.environ, CHEMSANDBOX_PURE_PYTHON="1" if pure else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="best-of-N timing")
    args = parser.parse_args(argv)
    pure = measure(True, args.repeat)
    fast = measure(False, args.repeat)
    if fast["backend"] != "cython":
        print("compiled extension not built; only the fallback is available", file=sys.stderr)
    print(f"{pure['molecules']} molecules, best of {args.repeat}")
    print(f"{'operation':<26}{'python (s)':>12}{fast['backend'] + ' (s)':>14}{'speedup':>10}")
    for name, slow in pure["seconds"].items():
        quick = fast["seconds"][name]
        print(f"{name:<26}{slow:>12.4f}{quick:>14.4f}{slow / quick:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

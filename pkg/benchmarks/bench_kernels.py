"""Compiled vs pure-Python prime-field kernels.

Each backend runs in its own interpreter so that QUIVERREP_PURE is seen at
import time.  Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, random, sys, timeit
from quiverrep import linalg
from quiverrep.linalg import Field, Matrix, nullspace
from quiverrep.classify import decompose
from quiverrep.linrep import direct_sum, rep_P, rep_I
sys.path.insert(0, sys.argv[2])
from conftest import random_acyclic

repeat = int(sys.argv[1])
F = Field(101)
rng = random.Random(0)
out = {"backend": linalg.BACKEND}
for n in (20, 60, 120):
    A = Matrix.random(F, n, n, rng)
    B = Matrix.random(F, n, n, rng)
    rows = [[rng.randrange(101) for _ in range(n + 10)] for _ in range(n)]
    out[f"matmul_{n}"] = min(timeit.repeat(lambda: A @ B, number=1, repeat=repeat))
    out[f"nullspace_{n}"] = min(timeit.repeat(lambda: nullspace(F, rows, n + 10), number=1, repeat=repeat))
q = random_acyclic(random.Random(3), 6, 9)
M = direct_sum([rep_P(q, v, F) for v in q.vertices[:3]] + [rep_I(q, v, F) for v in q.vertices[3:]])
out["decompose"] = min(timeit.repeat(lambda: decompose(M, 0), number=1, repeat=repeat))
print(json.dumps(out))
"""


def run(pure, repeat):
    env = dict(os.environ)
    env.pop("QUIVERREP_PURE", None)
    if pure:
        env["QUIVERREP_PURE"] = "1"
    tests = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests")
    r = subprocess.run([sys.executable, "-c", CHILD, str(repeat), tests], env=env, capture_output=True,
                       text=True, check=True)
    return json.loads(r.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    if fast["backend"] != "cython":
        print("compiled extension not built; both columns use the pure kernels")
    print(f"{'case':<14}{'compiled s':>12}{'pure s':>12}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:<14}{fast[key]:>12.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>10.1f}")


if __name__ == "__main__":
    main()

"""Cost split and per-solve scaling of the shared factorization on random grammars.

    python3 scripts/lu_scaling.py --sizes 50 100 200 400 --words 100
"""

import argparse
import time

import numpy as np

from scfg_ngram.ngrams import build_table
from scfg_ngram.pipeline import Diagnostics, make_engine
from scfg_ngram.random_grammar import random_cnf


def run(n: int, words: int, max_binary: int, seed: int) -> dict:
    g = random_cnf(n, words, max_binary=max_binary, seed=seed)
    diag = Diagnostics()
    engine = make_engine(g, diag)
    with diag.stage("ngram_solves"):
        build_table(g, 2, engine)
    solves = diag.counters["solves.order2"]
    return {
        "n": n,
        "factorizations": diag.counters["factorizations.coefficient"],
        "corner_s": diag.timings["corner_factorization"],
        "factor_s": diag.timings["coefficient_factorization"],
        "solve_s": diag.timings["ngram_solves"],
        "bigram_solves": solves,
        "per_solve_us": 1e6 * diag.timings["ngram_solves"] / max(solves, 1),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--words", type=int, default=100)
    ap.add_argument("--max-binary", type=int, default=5)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    rows = [run(n, args.words, args.max_binary, args.seed) for n in args.sizes]
    print(f"{'N':>5} {'corner s':>9} {'factor s':>9} {'solves s':>9} {'solves':>7} {'us/solve':>9}")
    for r in rows:
        print(
            f"{r['n']:>5} {r['corner_s']:>9.4f} {r['factor_s']:>9.4f} {r['solve_s']:>9.3f}"
            f" {r['bigram_solves']:>7} {r['per_solve_us']:>9.1f}"
        )
    if len(rows) > 1:
        slope = np.polyfit(np.log([r["n"] for r in rows]), np.log([r["per_solve_us"] for r in rows]), 1)[0]
        print(f"per-solve time exponent in N: {slope:.2f}")


if __name__ == "__main__":
    t0 = time.perf_counter()
    main()
    print(f"total {time.perf_counter() - t0:.1f} s")

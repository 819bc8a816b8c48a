"""Compare the compiled and pure-numpy kernel backends.

Times the two hot paths (walk sampling and one training epoch) on the same
inputs and prints a per-backend table with speedups.  The compiled backend
is warmed up once before timing so JIT compilation is not charged to the
measurement.

Usage:
    python3 benchmarks/backend_bench.py --nodes 2000 --samples 256 --repeats 3
"""

import argparse
import os
import time

import numpy as np

from hawe import backend
from hawe.corpus import build_corpus
from hawe.graph import gen_er
from hawe.model import TrainConfig, train


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(name: str, graph, args) -> dict:
    os.environ[backend.ENV_VAR] = name
    kern = backend.get_kernels()
    starts = np.flatnonzero(graph.degrees() > 0).astype(np.int32)

    def sample():
        kern.sample_walks(graph.indptr, graph.indices, starts,
                          args.samples, args.walk_length, args.seed)

    sample()  # warm-up: triggers compilation on the jit path
    sample_s = _time(sample, args.repeats)

    corp, lex = build_corpus(graph, args.samples, args.walk_length, "haw",
                             args.seed)
    cfg = TrainConfig(dim=args.dim, window=args.window, epochs=1,
                      seed=args.seed)
    train(corp, lex, cfg)  # warm-up
    train_s = _time(lambda: train(corp, lex, cfg), args.repeats)
    return {"backend": kern.NAME, "sample_s": sample_s, "train_s": train_s}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=2000)
    parser.add_argument("--edge-prob", type=float, default=None,
                        help="default keeps mean degree near 10")
    parser.add_argument("--samples", type=int, default=256)
    parser.add_argument("--walk-length", type=int, default=6)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--window", type=int, default=5)
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repetitions; best of N is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    p = args.edge_prob if args.edge_prob is not None else min(1.0, 10.0 / args.nodes)
    graph = gen_er(args.nodes, p, num_types=2, seed=args.seed)
    print(f"graph: {graph.num_nodes} nodes, {graph.num_edges} edges, "
          f"{args.samples} walks/node x length {args.walk_length}")

    names = ["numpy"]
    if backend.numba_available():
        names.append("numba")
    else:
        print("numba not importable; timing the fallback only")

    rows = [bench_backend(name, graph, args) for name in names]
    os.environ.pop(backend.ENV_VAR, None)

    print(f"\n{'backend':<10}{'sample walks':>14}{'train epoch':>14}")
    for row in rows:
        print(f"{row['backend']:<10}{row['sample_s']:>13.4f}s"
              f"{row['train_s']:>13.4f}s")
    if len(rows) == 2:
        walk_x = rows[0]["sample_s"] / rows[1]["sample_s"]
        train_x = rows[0]["train_s"] / rows[1]["train_s"]
        print(f"\ncompiled speedup: {walk_x:.1f}x sampling, {train_x:.1f}x training")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

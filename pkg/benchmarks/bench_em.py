"""Time IBM Model 1 training with the numba and pure-numpy kernels.

    python benchmarks/bench_em.py [--pairs 10000] [--iterations 20]

The synthetic bitext mimics the shape of an emoji-translation corpus:
a few hundred emoji types, tens of thousands of word types, emoji
sentences about half as long as text sentences.
"""
import argparse
import random
import time

import numpy as np

from bitext_lens.align import TrainingConfig, train
from bitext_lens.align.kernels import available_backends
from bitext_lens.corpus import AlignedCorpus


def synthetic_bitext(n_pairs: int, seed: int = 0) -> AlignedCorpus:
    rng = random.Random(seed)
    emoji = [chr(0x1F300 + i) for i in range(470)]
    words = [f"w{i}" for i in range(16000)]
    pairs = []
    for _ in range(n_pairs):
        # cubing a uniform draw skews towards low indices, roughly Zipf-like
        text = [words[int(len(words) * rng.random() ** 3)] for _ in range(rng.randint(3, 20))]
        em = [emoji[int(len(emoji) * rng.random() ** 3)] for _ in range(rng.randint(1, 10))]
        pairs.append((text, em))
    return AlignedCorpus.from_token_pairs(pairs)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=10000)
    parser.add_argument("--iterations", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    corpus = synthetic_bitext(args.pairs)
    config = TrainingConfig(iterations=args.iterations)
    results = {}
    for backend in available_backends():
        train(corpus, TrainingConfig(iterations=1), backend)  # compile / warm up
        times = []
        for _ in range(args.repeats):
            start = time.perf_counter()
            table, diag = train(corpus, config, backend)
            times.append(time.perf_counter() - start)
        results[backend] = (table, diag)
        print(f"{backend:>6}: best {min(times):.3f} s, median {np.median(times):.3f} s "
              f"({args.pairs} pairs, {args.iterations} iterations, {len(table)} entries)")

    if len(results) == 2:
        (a, da), (b, db) = results["numba"], results["numpy"]
        print(f"max |tau difference|: {np.abs(a.prob - b.prob).max():.3g}")
        print(f"final log-likelihood: {da.per_iteration_log_likelihood[-1]:.6f} vs "
              f"{db.per_iteration_log_likelihood[-1]:.6f}")


if __name__ == "__main__":
    main()

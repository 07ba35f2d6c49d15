"""Compare the compiled and numpy Jacobi eigensolvers.

Usage: python benchmarks/bench_jacobi.py [--repeat N]
"""

import argparse
import time

import numpy as np

from inlbound import attacks, kernels


def random_hermitian_stack(rng, batch, n):
    g = rng.normal(size=(batch, n, n)) + 1j * rng.normal(size=(batch, n, n))
    return (g + np.conj(np.swapaxes(g, 1, 2))) / 2


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    cases = [
        ("eigh 8x8", lambda m: m.eigh(random_hermitian_stack(rng, 1, 8)[0])),
        ("eigh 64x64", lambda m: m.eigh(random_hermitian_stack(rng, 1, 64)[0])),
        ("batch 512 x 2x2", lambda m: m.eigvalsh_batch(random_hermitian_stack(rng, 512, 2))),
        ("batch 256 x 4x4", lambda m: m.eigvalsh_batch(random_hermitian_stack(rng, 256, 4))),
    ]
    backends = kernels.available_backends()
    print(f"{'case':<22}" + "".join(f"{b:>14}" for b in backends))
    for name, fn in cases:
        row = [best_of(lambda: fn(kernels.get_module(b)), args.repeat) for b in backends]
        print(f"{name:<22}" + "".join(f"{t * 1e3:>12.2f}ms" for t in row))

    # end-to-end: one dephasing-attack bound (many small E blocks)
    row = []
    for b in backends:
        prev = kernels.set_backend(b)
        try:
            row.append(best_of(lambda: attacks.dephasing_attack_bound(1.2), args.repeat))
        finally:
            kernels.set_backend(prev)
    print(f"{'dephasing bound':<22}" + "".join(f"{t * 1e3:>12.2f}ms" for t in row))


if __name__ == "__main__":
    main()

"""Time the compiled and NumPy kernels side by side.

Run with ``python3 benchmarks/bench_kernels.py``. The gain kernel is timed
for both backends at several (K, L) sizes; the BRPC kernel on a fixed
instance. The crossover in the gain timings is what sets
``uwbgame._kernels.DIRECT_MAX_WORK``.
"""
import argparse
import timeit

import numpy as np

from uwbgame import _kernels
from uwbgame.channel import ChannelModel, draw_realization
from uwbgame.game import PacketExp, gains_target_sinrs
from uwbgame.params import GameParams
from uwbgame.rake import ARAKE, compute_gains


def best_of(fn, repeat=5):
    number, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench_gains(sizes, backends):
    print(f"{'K':>4} {'L':>5} " + " ".join(f"{name + ' us':>12}" for name in backends) + f" {'dispatch':>9}")
    rng = np.random.default_rng(0)
    for K, L in sizes:
        a = rng.standard_normal((K, L))
        times = [best_of(lambda m=m: m.correlation_gains(a, a, 10 * L, L)) * 1e6 for m in backends.values()]
        direct = "cython" in backends and K * K * L * L <= _kernels.DIRECT_MAX_WORK
        print(f"{K:>4} {L:>5} " + " ".join(f"{t:12.1f}" for t in times) + f" {'direct' if direct else 'fft':>9}")


def bench_brpc(K, L, backends):
    params = GameParams(K=K, N_f=10, N_c=L, L=L)
    gains = compute_gains(draw_realization(ChannelModel(pathloss_exponent=2), params, 1), ARAKE, params)
    targets = gains_target_sinrs(PacketExp(params.M), gains)
    start = np.full(K, 1e-3 * params.noise_var / gains.h_sp.max())
    args = (np.ascontiguousarray(gains.h_sp), np.ascontiguousarray(gains.h_si),
            np.ascontiguousarray(gains.h_mai), targets, params.noise_var, params.p_max)
    print(f"\nBRPC K={K} L={L}")
    for name, m in backends.items():
        sweeps = m.brpc_iterate(*args, start.copy(), 10_000, 1e-9, 1e-30, 0)[0]
        t = best_of(lambda m=m: m.brpc_iterate(*args, start.copy(), 10_000, 1e-9, 1e-30, 0))
        print(f"  {name:>7}: {t * 1e6:10.1f} us  ({sweeps} sweeps)")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="fewer sizes")
    args = parser.parse_args()
    backends = _kernels.available_backends()
    print(f"active backend: {_kernels.BACKEND}\n")
    sizes = [(8, 20), (8, 50), (16, 50)] if args.quick else [(8, 20), (8, 48), (16, 50), (16, 100), (32, 100), (32, 200)]
    bench_gains(sizes, backends)
    bench_brpc(32, 100, backends)


if __name__ == "__main__":
    main()

"""Time the numba kernels against their pure-numpy twins.

Run `python3 benchmarks/bench_backends.py`; it reports per-kernel timings
and speedups on desk-scale shapes.  The numpy path is the one selected by
KAL_DISABLE_NUMBA=1 at import time; here both tables are timed directly.
"""

import time

import numpy as np

from kavlab import _accel

RNG = np.random.default_rng(0)


def timeit(fn, *args, repeat=5, warmup=1):
    for _ in range(warmup):
        fn(*args)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba backend unavailable; unset KAL_DISABLE_NUMBA to benchmark both")
    nb, pure = _accel.impls("numba"), _accel.impls("numpy")

    nk, nx, nt = 16, 17, 1025
    cw = RNG.normal(size=(nk, nx)) + 1j * RNG.normal(size=(nk, nx))
    freq = RNG.normal(size=(nk, nx)) * 8.0
    times = np.linspace(0.0, 6.9, nt)
    b = np.concatenate([[0.0], np.cumsum(RNG.normal(size=nt - 1) * np.sqrt(np.diff(times)))])
    kv = np.arange(1.0, nk + 1.0)
    gw = RNG.normal(size=(nk, nx, nt)) + 1j * RNG.normal(size=(nk, nx, nt))
    rho = RNG.normal(size=(nk, nt)) + 1j * RNG.normal(size=(nk, nt))
    cw1 = np.ascontiguousarray(RNG.normal(size=513) + 1j * RNG.normal(size=513))
    ka1 = RNG.normal(size=513) * 8.0
    u1 = RNG.normal(size=1025) + 1j * RNG.normal(size=1025)
    t1 = np.linspace(0.0, 6.9, 1025)
    gw2 = np.ascontiguousarray(RNG.normal(size=(129, 513)) + 1j * RNG.normal(size=(129, 513)))
    wts = np.full(129, 2.0 / 128)
    t2 = np.linspace(0.0, 4.0, 513)
    ka2 = RNG.normal(size=129) * 8.0

    cases = [
        ("trace_g0_generic", (cw, freq, b)),
        ("trace_g0_uniform", (cw, kv, -1.0, 0.125, b)),
        ("trace_source_generic", (gw, freq, b, float(times[1] - times[0]))),
        ("trace_div_extra", (gw, freq, kv, b, float(times[1] - times[0]))),
        ("damped_energy", (rho, times, 1.0)),
        ("gagliardo_direct", (u1, t1, 0.25)),
        ("stoch_double_sum", (cw1, ka1, 0.5)),
        ("stoch_double_sum_horizon", (cw1, ka1, 0.0, 4.0)),
        ("det_double_sum", (cw1, ka1, 0.5)),
        ("f0zero_oracle", (gw2, wts, t2, ka2, 1.0, True)),
        ("gagliardo_expectation", (cw1[:33], ka1[:33], t1, 1.0, 0.25)),
    ]
    print(f"{'kernel':26s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, args in cases:
        t_nb = timeit(nb[name], *args)
        t_np = timeit(pure[name], *args)
        print(f"{name:26s} {t_nb * 1e3:9.2f}ms {t_np * 1e3:9.2f}ms {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()

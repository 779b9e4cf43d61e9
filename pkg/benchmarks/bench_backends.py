#!/usr/bin/env python3
"""Head-to-head timing of the compiled integration kernels vs. the numpy
reference implementation.

Usage, from the repository root::

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --repeat 9 --steps 5000

Both backends are imported side by side, so one run produces the
comparison no matter which backend the package itself selected.  To see
the end-to-end effect of the selection, run the script twice::

    python3 benchmarks/bench_backends.py            # extension, if built
    DMPKIT_PURE=1 python3 benchmarks/bench_backends.py
"""

import argparse
import time

import numpy as np

from dmpkit import _fast
from dmpkit._fast import ref
from dmpkit.discrete import rollout, train_discrete
from dmpkit.synth import reach_demo

try:
    from dmpkit._fast import _core
except ImportError:
    _core = None


def _best(fn, repeat, loops):
    """Best per-call time over ``repeat`` trials of ``loops`` calls each."""
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(loops):
            fn()
        times.append((time.perf_counter() - t0) / loops)
    return min(times)


def _model(n_kernels, n_dims):
    y0 = np.zeros(n_dims)
    goal = np.linspace(1.0, 2.0, n_dims)
    demo = reach_demo(y0, goal, 1.0, 0.01)
    return train_discrete(demo, n_kernels=n_kernels)


def _fmt(seconds):
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    return f"{seconds * 1e3:8.2f} ms"


def bench_rollout_kernel(n_kernels, n_dims, n_steps, repeat):
    dmp = _model(n_kernels, n_dims)
    lay = dmp.forcing.layout
    args = (np.zeros(n_dims), np.linspace(1.0, 2.0, n_dims), lay.centers,
            lay.widths, dmp.forcing.weights, dmp.alpha_z, dmp.beta_z,
            dmp.phase_variant.alpha_x, 1.0, 1.0 / n_steps, n_steps,
            _fast.VARIANT_CODES["classical"])
    loops = max(1, 2000 // n_steps)
    t_ref = _best(lambda: ref.discrete_rollout(*args), repeat, loops)
    t_ext = (None if _core is None
             else _best(lambda: _core.discrete_rollout(*args), repeat, loops))
    return t_ref, t_ext


def bench_forcing_kernel(n_kernels, n_dims, repeat):
    dmp = _model(n_kernels, n_dims)
    lay = dmp.forcing.layout
    xs = np.exp(-6.9 * np.linspace(0.0, 1.0, 200))

    def sweep(impl):
        for x in xs:
            impl.forcing_value(lay.centers, lay.widths, dmp.forcing.weights, x)

    t_ref = _best(lambda: sweep(ref), repeat, 5) / len(xs)
    t_ext = (None if _core is None
             else _best(lambda: sweep(_core), repeat, 5) / len(xs))
    return t_ref, t_ext


def bench_end_to_end(repeat):
    """Whole rollout() call: vectorized fast path vs. the python driver loop.

    Passing a ``stop_fn`` forces the generic step-by-step driver, so the
    difference is what the dedicated kernel buys including bookkeeping.
    """
    dmp = _model(20, 3)
    t_fast = _best(lambda: rollout(dmp, dt=1e-3), repeat, 3)
    t_loop = _best(lambda: rollout(dmp, dt=1e-3, stop_fn=lambda s: None),
                   repeat, 1)
    return t_fast, t_loop


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5,
                    help="trials per measurement (best is kept)")
    ap.add_argument("--steps", type=int, default=1000,
                    help="integration steps per rollout-kernel call")
    args = ap.parse_args()

    print(f"selected backend: {_fast.BACKEND}"
          + ("" if _core is not None else "  (extension not built)"))
    print()
    print(f"integration kernel, {args.steps} steps "
          f"(best of {args.repeat}, per call)")
    for n_kernels, n_dims in [(10, 1), (20, 3), (50, 7)]:
        t_ref, t_ext = bench_rollout_kernel(n_kernels, n_dims, args.steps,
                                            args.repeat)
        line = f"  n={n_kernels:3d} dims={n_dims}   reference {_fmt(t_ref)}"
        if t_ext is not None:
            line += f"   compiled {_fmt(t_ext)}   speedup {t_ref / t_ext:5.1f}x"
        print(line)

    print()
    print(f"forcing-term kernel (best of {args.repeat}, per evaluation)")
    for n_kernels, n_dims in [(10, 1), (50, 7)]:
        t_ref, t_ext = bench_forcing_kernel(n_kernels, n_dims, args.repeat)
        line = f"  n={n_kernels:3d} dims={n_dims}   reference {_fmt(t_ref)}"
        if t_ext is not None:
            line += f"   compiled {_fmt(t_ext)}   speedup {t_ref / t_ext:5.1f}x"
        print(line)

    print()
    t_fast, t_loop = bench_end_to_end(args.repeat)
    print("whole rollout() at dt=1e-3 (n=20, dims=3)")
    print(f"  dedicated path {_fmt(t_fast)}   python driver {_fmt(t_loop)}"
          f"   ratio {t_loop / t_fast:5.1f}x")


if __name__ == "__main__":
    main()

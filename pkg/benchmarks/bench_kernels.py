#!/usr/bin/env python3
"""Time the compiled recurrence kernel against the pure-numpy fallback.

Runs the forward and backward layer kernels on identical inputs and
reports per-call time plus the speedup.  Useful for checking that the
compiled extension actually pays off on a given machine.

    python3 benchmarks/bench_kernels.py --cells 32 --steps 400
"""

import argparse
import statistics
import time

import numpy as np

from quenchwatch.engine import _kernel_py
from quenchwatch.engine.activations import GateConfig

try:
    from quenchwatch.engine import _kernel as _kernel_c
except ImportError:
    _kernel_c = None

WEIGHT_NAMES = (
    "W_gx", "W_gh", "b_g", "W_ix", "W_ih", "b_i",
    "W_fx", "W_fh", "b_f", "W_ox", "W_oh", "b_o",
)


def build_case(rng: np.random.Generator, cells: int, inputs: int, steps: int):
    def draw(*shape):
        return np.ascontiguousarray(rng.uniform(-0.7, 0.7, shape))

    weights = {}
    for name in WEIGHT_NAMES:
        if name.endswith("x"):
            weights[name] = draw(cells, inputs)
        elif name.startswith("W"):
            weights[name] = draw(cells, cells)
        else:
            weights[name] = draw(cells)
    xs = draw(steps, inputs)
    h0 = draw(cells)
    s0 = draw(cells)
    cfg = GateConfig()
    forward_args = (xs, *(weights[n] for n in WEIGHT_NAMES), h0, s0,
                    cfg.t_l, cfg.t_h, cfg.a, cfg.b)
    return weights, xs, h0, s0, cfg, forward_args


def backward_args(kernel, weights, xs, h0, s0, cfg, forward_args, dH):
    H, S, P, G, I, F, O, ZI, ZF, ZO = kernel.layer_forward(*forward_args)
    return (xs, dH, H, S, P, G, I, F, O, ZI, ZF, ZO,
            weights["W_gx"], weights["W_gh"], weights["W_ix"], weights["W_ih"],
            weights["W_fx"], weights["W_fh"], weights["W_ox"], weights["W_oh"],
            h0, s0, cfg.t_l, cfg.t_h, cfg.a)


def time_call(fn, args, repeats: int) -> float:
    for _ in range(2):
        fn(*args)
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cells", type=int, default=32)
    parser.add_argument("--inputs", type=int, default=8)
    parser.add_argument("--steps", type=int, default=400)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    weights, xs, h0, s0, cfg, forward_args = build_case(
        rng, args.cells, args.inputs, args.steps
    )
    dH = np.ascontiguousarray(rng.uniform(-1, 1, (args.steps, args.cells)))

    print(f"cells={args.cells} inputs={args.inputs} steps={args.steps} "
          f"(median of {args.repeats} runs)")

    rows = []
    py_fwd = time_call(_kernel_py.layer_forward, forward_args, args.repeats)
    rows.append(("forward", "python", py_fwd, 1.0))
    if _kernel_c is not None:
        c_fwd = time_call(_kernel_c.layer_forward, forward_args, args.repeats)
        rows.append(("forward", "compiled", c_fwd, py_fwd / c_fwd))

    py_bwd_args = backward_args(_kernel_py, weights, xs, h0, s0, cfg, forward_args, dH)
    py_bwd = time_call(_kernel_py.layer_backward, py_bwd_args, args.repeats)
    rows.append(("backward", "python", py_bwd, 1.0))
    if _kernel_c is not None:
        c_bwd_args = backward_args(_kernel_c, weights, xs, h0, s0, cfg, forward_args, dH)
        c_bwd = time_call(_kernel_c.layer_backward, c_bwd_args, args.repeats)
        rows.append(("backward", "compiled", c_bwd, py_bwd / c_bwd))

    print(f"{'pass':<10} {'kernel':<10} {'per call':>12} {'speedup':>9}")
    for name, kind, seconds, speedup in rows:
        print(f"{name:<10} {kind:<10} {seconds * 1e3:>10.3f}ms {speedup:>8.1f}x")

    if _kernel_c is None:
        print("\ncompiled extension not built; showing the fallback only")


if __name__ == "__main__":
    main()

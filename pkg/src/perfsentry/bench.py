"""Benchmark of the split-statistic series implementations.

Compares, per series length: the from-scratch cubic evaluation, the
incremental NumPy fallback, and the compiled kernel (when built). Absolute
times are hardware-bound; the quantity of interest is the ratio between the
naive and incremental implementations, and all implementations are checked
for elementwise agreement while timing.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from perfsentry.cpd import _qhat_py
from perfsentry.cpd.series import min_side, qhat_values_naive

try:
    from perfsentry.cpd import _qhat_cy
except ImportError:
    _qhat_cy = None


@dataclass
class BenchRow:
    length: int
    naive_s: float
    python_s: float
    native_s: float | None
    outputs_equal: bool

    @property
    def incremental_s(self) -> float:
        return self.native_s if self.native_s is not None else self.python_s

    @property
    def speedup(self) -> float:
        return self.naive_s / self.incremental_s

    def to_doc(self) -> dict:
        return {
            "length": self.length,
            "naive_s": self.naive_s,
            "incremental_python_s": self.python_s,
            "incremental_native_s": self.native_s,
            "speedup_naive_over_incremental": self.speedup,
            "outputs_equal": self.outputs_equal,
        }


def bench_series(length: int, seed: int) -> np.ndarray:
    """A noisy step series, the shape the detector sees in practice."""
    rng = np.random.default_rng(seed)
    half = length // 2
    z = rng.normal(100.0, 5.0, length)
    z[half:] += 20.0
    return z


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def run_bench(
    lengths: list[int],
    repeat: int = 3,
    seed: int = 0,
    alpha: float = 1.0,
    min_cluster_size: int = 3,
) -> list[BenchRow]:
    rows = []
    for length in lengths:
        z = bench_series(length, seed)
        side = min_side(min_cluster_size)

        naive_out = qhat_values_naive(z, alpha, min_cluster_size)
        python_out = _qhat_py.qhat_values(z, alpha, side)
        equal = bool(np.allclose(naive_out, python_out, rtol=0.0, atol=1e-9))
        native_s = None
        if _qhat_cy is not None:
            native_out = _qhat_cy.qhat_values(z, alpha, side)
            equal = equal and bool(
                np.allclose(naive_out, native_out, rtol=0.0, atol=1e-9)
            )
            native_s = _time(lambda: _qhat_cy.qhat_values(z, alpha, side), repeat)

        rows.append(
            BenchRow(
                length=length,
                naive_s=_time(lambda: qhat_values_naive(z, alpha, min_cluster_size), repeat),
                python_s=_time(lambda: _qhat_py.qhat_values(z, alpha, side), repeat),
                native_s=native_s,
                outputs_equal=equal,
            )
        )
    return rows


def format_table(rows: list[BenchRow]) -> str:
    header = (
        f"{'length':>8} {'naive (s)':>12} {'incr py (s)':>12} "
        f"{'incr native (s)':>16} {'speedup':>9} {'equal':>6}"
    )
    lines = [header, "-" * len(header)]
    for r in rows:
        native = f"{r.native_s:.6f}" if r.native_s is not None else "n/a"
        lines.append(
            f"{r.length:>8} {r.naive_s:>12.6f} {r.python_s:>12.6f} "
            f"{native:>16} {r.speedup:>8.1f}x {str(r.outputs_equal):>6}"
        )
    return "\n".join(lines)

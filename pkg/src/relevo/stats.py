"""Robust distribution statistics used to place automatic control points.

Quantiles use linear interpolation between order statistics (numpy's default).
The medcouple is the median of the pairwise skewness kernel around the sample
median; fences follow the skewness-adjusted boxplot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Kernel values held in memory at once; larger problems are narrowed by
# repeated histogram passes over row chunks.
_SELECT_CAP = 4_000_000
_ROW_CHUNK = 256
_BINS = 4096


class Sample:
    """Sorted, finite, one-dimensional sample of target values (n >= 3)."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample contains non-finite values")
        if arr.size < 3:
            raise ValueError(f"sample needs at least 3 values, got {arr.size}")
        arr = np.sort(arr)
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return self._values.size

    def __repr__(self) -> str:
        return f"Sample(n={len(self)}, min={self._values[0]!r}, max={self._values[-1]!r})"

    def median(self) -> float:
        return _sorted_median(self._values)

    def std(self) -> float:
        """Sample standard deviation (n - 1 denominator)."""
        return float(np.std(self._values, ddof=1))


def as_sample(values) -> Sample:
    return values if isinstance(values, Sample) else Sample(values)


@dataclass(frozen=True)
class Fences:
    lower: float
    upper: float
    medcouple: float
    q1: float
    q3: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def _sorted_median(x: np.ndarray) -> float:
    n = x.size
    if n % 2:
        return float(x[n // 2])
    return float((x[n // 2 - 1] + x[n // 2]) / 2)


def quantile(sample, p: float) -> float:
    """Linear-interpolation quantile: ``quantile(k/(n-1))`` is the (k+1)-th order statistic."""
    x = np.asarray(sample.values if isinstance(sample, Sample) else sample, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"quantile level must lie in [0, 1], got {p}")
    return float(np.quantile(x, p, method="linear"))


def _kernel_parts(x: np.ndarray):
    """Split a sorted sample into the two arms of the medcouple kernel.

    Returns ``(lower, upper, median, n_ties)`` where ``lower`` holds values <= m in
    descending order and ``upper`` values >= m in descending order, so that the
    median-equal values sit at the tail of ``upper`` and the head of ``lower``.
    """
    m = _sorted_median(x)
    desc = x[::-1]
    upper = desc[desc >= m]
    lower = desc[desc <= m]
    n_ties = int(np.count_nonzero(x == m))
    return lower, upper, m, n_ties


def _kernel_rows(lower, upper, m, n_ties, start, stop):
    """Kernel values for upper-arm rows ``start:stop`` against every lower-arm value.

    For two points both equal to the median the kernel is -1, 0 or +1 by the
    sign of ``(p - 1) - i - j`` (p = len(upper), i/j the arm positions), which
    is the tie rule of Hubert and Vandervieren (2008).
    """
    xj = upper[start:stop, None]
    xi = lower[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        h = ((xj - m) - (m - xi)) / (xj - xi)
    if n_ties:
        p = upper.size
        tie_rows = np.arange(max(start, p - n_ties), stop)
        if tie_rows.size:
            cols = np.arange(n_ties)
            signs = np.sign((p - 1) - tie_rows[:, None] - cols[None, :]).astype(float)
            h[tie_rows[:, None] - start, cols[None, :]] = signs
    return h


def _select_kernels(lower, upper, m, n_ties, ranks, lo=-np.inf, hi=np.inf, below=0) -> list[float]:
    """Exact kernel values at sorted-order positions ``ranks`` (0-based, adjacent).

    Each pass streams the kernel matrix in row chunks, keeping only the values
    inside the current bracket; once few enough remain they are partitioned
    directly, otherwise a histogram narrows the bracket for the next pass.
    """
    p = upper.size
    # ``below`` counts kernel values strictly below ``lo``; the histogram spans
    # [a, b] with out-of-span values falling in the end bins
    a, b = (-1.0, 1.0) if np.isinf(lo) else (lo, hi)
    while True:
        edges = np.linspace(a, b, _BINS + 1)
        counts = np.zeros(_BINS, dtype=np.int64)
        kept = []
        n_in = 0
        vmin, vmax = np.inf, -np.inf
        for start in range(0, p, _ROW_CHUNK):
            h = _kernel_rows(lower, upper, m, n_ties, start, min(p, start + _ROW_CHUNK)).ravel()
            h = h[(h >= lo) & (h <= hi)]
            if h.size == 0:
                continue
            n_in += h.size
            vmin = min(vmin, float(h.min()))
            vmax = max(vmax, float(h.max()))
            if n_in <= _SELECT_CAP:
                kept.append(h)
            idx = np.clip(np.searchsorted(edges, h, side="right") - 1, 0, _BINS - 1)
            counts += np.bincount(idx, minlength=_BINS)
        rel = [r - below for r in ranks]
        if n_in <= _SELECT_CAP:
            part = np.partition(np.concatenate(kept), rel)
            return [float(part[r]) for r in rel]
        if vmin == vmax:
            return [vmin] * len(ranks)
        cum = np.cumsum(counts)
        b0 = int(np.searchsorted(cum, rel[0], side="right"))
        b1 = int(np.searchsorted(cum, rel[-1], side="right"))
        if b0 != b1:
            return [_select_kernels(lower, upper, m, n_ties, [r], lo, hi, below)[0] for r in ranks]
        below += int(cum[b0 - 1]) if b0 else 0
        lo = float(edges[b0]) if b0 else vmin
        hi = float(np.nextafter(edges[b1 + 1], -np.inf)) if b1 < _BINS - 1 else vmax
        a, b = lo, hi


def medcouple(sample) -> float:
    """Medcouple of a sample: median of the pairwise kernel around the sample median.

    Pairs are all ``x_i <= m <= x_j``; for ``x_i == x_j == m`` the kernel follows the
    signed tie convention. Raises ``ValueError("degenerate sample")`` for a
    constant sample.
    """
    s = as_sample(sample)
    x = s.values
    if x[0] == x[-1]:
        raise ValueError("degenerate sample")
    lower, upper, m, n_ties = _kernel_parts(x)
    total = lower.size * upper.size
    if total % 2:
        return _select_kernels(lower, upper, m, n_ties, [total // 2])[0]
    a, b = _select_kernels(lower, upper, m, n_ties, [total // 2 - 1, total // 2])
    return (a + b) / 2


def adjusted_fences(sample, whisker: float = 1.5) -> Fences:
    """Skewness-adjusted boxplot fences.

    With ``mc >= 0`` the fences are ``q1 - w*exp(-4 mc)*IQR`` and
    ``q3 + w*exp(3 mc)*IQR``; for ``mc < 0`` the exponents become ``-3 mc`` and
    ``4 mc``. ``mc == 0`` gives the classic Tukey fences.
    """
    s = as_sample(sample)
    mc = medcouple(s)
    q1 = quantile(s, 0.25)
    q3 = quantile(s, 0.75)
    iqr = q3 - q1
    if mc >= 0:
        lower = q1 - whisker * np.exp(-4.0 * mc) * iqr
        upper = q3 + whisker * np.exp(3.0 * mc) * iqr
    else:
        lower = q1 - whisker * np.exp(-3.0 * mc) * iqr
        upper = q3 + whisker * np.exp(4.0 * mc) * iqr
    return Fences(lower=float(lower), upper=float(upper), medcouple=float(mc), q1=q1, q3=q3)

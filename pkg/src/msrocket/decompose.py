"""Multi-scale decomposition: centered moving average and high-pass residual.

The low-pass component at scale s is the length-s moving average with the
window centered via a shift of floor(s/2); samples outside the input are
treated as zero. The high-pass component is the residual, so the two always
reconstruct the input exactly. A per-epoch ScaleCache memoizes both
components per scale for reuse across many kernels.
"""

import numpy as np
from numba import njit

from .errors import InvalidArgumentError


@njit(cache=True)
def _moving_average(x, s):
    """Centered moving average with zero extension at both ends.

    out[i] = (1/s) * sum of x[i + s//2 - s + 1 .. i + s//2], indices
    outside [0, n) contributing zero.
    """
    n = x.shape[0]
    out = np.empty(n)
    if s == 1:
        for i in range(n):
            out[i] = x[i]
        return out
    half = s // 2
    for i in range(n):
        hi = i + half
        lo = hi - s + 1
        if lo < 0:
            lo = 0
        if hi > n - 1:
            hi = n - 1
        acc = 0.0
        for j in range(lo, hi + 1):
            acc += x[j]
        out[i] = acc / s
    return out


def moving_average(x, s):
    """Low-pass component of x at scale s; same length as x.

    Parameters
    ----------
    x : 1-D real array, length >= 1
    s : int scale >= 1 (s == 1 returns an exact copy of x)
    """
    s = int(s)
    if s <= 0:
        raise InvalidArgumentError(f"scale must be >= 1, got {s}")
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 1:
        raise InvalidArgumentError("input must be a non-empty 1-D vector")
    return _moving_average(x, s)


def high_pass(x, y_low):
    """High-pass residual x - y_low, element-wise."""
    x = np.asarray(x, dtype=np.float64)
    y_low = np.asarray(y_low, dtype=np.float64)
    if x.shape != y_low.shape:
        raise InvalidArgumentError(
            f"length mismatch: {x.shape} vs {y_low.shape}"
        )
    return x - y_low


class ScaleCache:
    """Memoized low/high components of one epoch, keyed by scale.

    Owned by the worker processing the epoch; not safe to share while
    being populated. Returned vectors are cached objects and must not be
    mutated. `compute_count` counts actual filtering passes, so tests can
    assert that repeated requests do no work.
    """

    def __init__(self, source):
        source = np.ascontiguousarray(source, dtype=np.float64)
        if source.ndim != 1 or source.shape[0] < 1:
            raise InvalidArgumentError("epoch must be a non-empty 1-D vector")
        self.source = source
        self._low = {}
        self._high = {}
        self.compute_count = 0

    def low(self, s):
        """Cached moving_average(source, s)."""
        s = int(s)
        got = self._low.get(s)
        if got is None:
            got = moving_average(self.source, s)
            self.compute_count += 1
            self._low[s] = got
        return got

    def high(self, s):
        """Cached high_pass(source, low(s)); all zeros at s == 1."""
        s = int(s)
        got = self._high.get(s)
        if got is None:
            got = high_pass(self.source, self.low(s))
            self._high[s] = got
        return got

    def get_component(self, s, high):
        """Low (high=False) or high (high=True) component at scale s."""
        if s < 1:
            raise InvalidArgumentError(f"scale must be >= 1, got {s}")
        return self.high(s) if high else self.low(s)

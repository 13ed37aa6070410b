"""Convolution of epochs with kernel populations and feature extraction.

The convolution is the correlation-oriented form

    z[n] = sum_m w[m] * y[n + m*s],   n = 0 .. len(y)-1

with y treated as zero beyond its end, so an identity kernel reproduces the
input. Two features are taken per kernel from the biased output z + b: the
maximum, and the proportion of strictly positive values (PPV). The four
variants select which component of the multi-scale decomposition is
convolved; the dilation variant's low branch convolves y_low[n*s]
(length floor(N/s)) and normalizes PPV by that length.

transform_dataset distributes epochs across numba threads; every row is
computed independently by one thread, so results do not depend on the
worker count.
"""

import struct
from dataclasses import dataclass

import numpy as np
import numba
from numba import njit, prange

from .decompose import ScaleCache, _moving_average
from .errors import InvalidArgumentError, InvalidConfigurationError
from .kernels import KernelSet
from .variants import Variant, VARIANT_CODES, parse_variant

_MAGIC = b"MSRFEAT\n"
_FORMAT_VERSION = 1


@dataclass
class FeatureMatrix:
    """Epochs x (2 * kernel count) feature table.

    Column 2i holds kernel i's MAX feature, column 2i+1 its PPV.
    """

    values: np.ndarray
    kernel_set_ref: str
    variant: Variant

    @property
    def n_epochs(self):
        return self.values.shape[0]

    @property
    def n_kernels(self):
        return self.values.shape[1] // 2

    def save(self, path):
        """Write the versioned binary layout (row-major float64 LE)."""
        values = np.ascontiguousarray(self.values, dtype="<f8")
        ref = self.kernel_set_ref.encode("utf-8")
        tag = self.variant.value.encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<I", _FORMAT_VERSION))
            fh.write(struct.pack("<QQ", values.shape[0], values.shape[1]))
            fh.write(struct.pack("<I", len(tag)))
            fh.write(tag)
            fh.write(struct.pack("<I", len(ref)))
            fh.write(ref)
            fh.write(values.tobytes(order="C"))

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            magic = fh.read(len(_MAGIC))
            if magic != _MAGIC:
                raise InvalidArgumentError(f"{path}: not a feature-matrix file")
            (version,) = struct.unpack("<I", fh.read(4))
            if version != _FORMAT_VERSION:
                raise InvalidArgumentError(
                    f"{path}: unsupported feature-matrix version {version}"
                )
            rows, cols = struct.unpack("<QQ", fh.read(16))
            (tag_len,) = struct.unpack("<I", fh.read(4))
            tag = fh.read(tag_len).decode("utf-8")
            (ref_len,) = struct.unpack("<I", fh.read(4))
            ref = fh.read(ref_len).decode("utf-8")
            data = np.frombuffer(fh.read(rows * cols * 8), dtype="<f8")
        values = data.reshape(rows, cols).astype(np.float64)
        return cls(values=values, kernel_set_ref=ref, variant=parse_variant(tag))

    def to_csv(self, path):
        """Plain-text dump for inspection; the binary file is authoritative."""
        cols = []
        for k in range(self.n_kernels):
            cols.append(f"max_{k}")
            cols.append(f"ppv_{k}")
        np.savetxt(path, self.values, delimiter=",", header=",".join(cols),
                   comments="")


@njit(cache=True)
def _convolve_into(y, n, w, step, out):
    """out[i] = sum_q w[q] * y[i + q*step] for i < n; y zero beyond n.

    Tap-outer/sample-inner loop order: each out[i] still accumulates its
    taps in ascending q order, but the inner loop carries no bounds branch
    and vectorizes.
    """
    m = w.shape[0]
    for i in range(n):
        out[i] = 0.0
    for q in range(m):
        off = q * step
        if off >= n:
            break
        wq = w[q]
        for i in range(n - off):
            out[i] += wq * y[i + off]
    return out


def convolve(y, weights, s=1):
    """Convolve y with a kernel at step s; output has len(y) samples."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    s = int(s)
    if y.ndim != 1 or y.shape[0] < 1:
        raise InvalidArgumentError("signal must be a non-empty 1-D vector")
    if weights.ndim != 1 or weights.shape[0] < 1:
        raise InvalidArgumentError("kernel must be a non-empty 1-D vector")
    if s < 1:
        raise InvalidArgumentError(f"step must be >= 1, got {s}")
    out = np.empty(y.shape[0])
    _convolve_into(y, y.shape[0], weights, s, out)
    return out


def extract_features(z, bias):
    """(MAX, PPV) of the biased sequence z + bias; PPV counts strict > 0."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] < 1:
        raise InvalidArgumentError("feature input must be a non-empty vector")
    biased = z + float(bias)
    mx = float(biased.max())
    ppv = float(np.count_nonzero(biased > 0.0)) / biased.shape[0]
    return mx, ppv


def apply_variant(epoch, kernel, cache, variant):
    """Features of one kernel applied to one epoch under a variant.

    `cache` must be a ScaleCache built over `epoch`.
    """
    if not isinstance(variant, Variant):
        variant = parse_variant(variant)
    if cache is None:
        cache = ScaleCache(epoch)
    s = kernel.scale
    if variant is Variant.NO_SCALE:
        y = cache.source
    elif variant is Variant.MULTI_SCALE:
        y = cache.low(s)
    elif variant is Variant.MS_HLF:
        y = cache.high(s) if (kernel.use_high_freq and s > 1) else cache.low(s)
    else:  # MS_HLF_DILATION
        if kernel.use_high_freq and s > 1:
            y = cache.high(s)
        else:
            y_low = cache.low(s)
            n_down = y_low.shape[0] // s
            y = y_low[: n_down * s : s]
    z = convolve(y, kernel.weights, 1)
    return extract_features(z, kernel.bias)


@njit(parallel=True, cache=True)
def _transform_batch(X, wflat, offsets, biases, scales, high_flags,
                     uscales, scale_idx, vcode, out):
    n_epochs, n = X.shape
    n_kernels = biases.shape[0]
    n_scales = uscales.shape[0]
    need_high = vcode >= 2
    for e in prange(n_epochs):
        x = X[e]
        lows = np.empty((n_scales, n))
        for u in range(n_scales):
            lows[u, :] = _moving_average(x, uscales[u])
        if need_high:
            highs = np.empty((n_scales, n))
            for u in range(n_scales):
                for t in range(n):
                    highs[u, t] = x[t] - lows[u, t]
        else:
            highs = np.empty((0, n))
        zbuf = np.empty(n)
        ybuf = np.empty(n)
        for k in range(n_kernels):
            w = wflat[offsets[k]:offsets[k + 1]]
            s = scales[k]
            u = scale_idx[k]
            length = n
            if vcode == 0:
                y = x
            elif vcode == 1:
                y = lows[u]
            elif vcode == 2:
                if high_flags[k] == 1 and s > 1:
                    y = highs[u]
                else:
                    y = lows[u]
            else:
                if high_flags[k] == 1 and s > 1:
                    y = highs[u]
                else:
                    length = n // s
                    for t in range(length):
                        ybuf[t] = lows[u, t * s]
                    y = ybuf
            _convolve_into(y, length, w, 1, zbuf)
            bias = biases[k]
            mx = -np.inf
            pos = 0
            for t in range(length):
                v = zbuf[t] + bias
                if v > mx:
                    mx = v
                if v > 0.0:
                    pos += 1
            out[e, 2 * k] = mx
            out[e, 2 * k + 1] = pos / length
    return out


def transform_dataset(dataset, kernel_set, variant, workers=None):
    """Transform every epoch with every kernel under one variant.

    Parameters
    ----------
    dataset : EpochedDataset or 2-D array of epochs (rows)
    kernel_set : KernelSet generated against the epoch length
    variant : Variant or its string tag
    workers : thread count for the epoch loop; None keeps the current
        numba setting. Output is identical for any worker count.

    Returns
    -------
    FeatureMatrix with one row per epoch, 2 columns per kernel.
    """
    if not isinstance(variant, Variant):
        variant = parse_variant(variant)
    if not isinstance(kernel_set, KernelSet):
        raise InvalidArgumentError("kernel_set must be a KernelSet")
    epochs = getattr(dataset, "epochs", dataset)
    epochs = np.ascontiguousarray(epochs, dtype=np.float64)
    if epochs.ndim != 2:
        raise InvalidArgumentError("epochs must form a 2-D matrix")
    if epochs.shape[1] != kernel_set.epoch_length:
        raise InvalidConfigurationError(
            f"epoch length {epochs.shape[1]} does not match the kernel "
            f"set's epoch length {kernel_set.epoch_length}"
        )

    wflat, offsets, lengths, biases, scales, high_flags = kernel_set.packed()
    scale_caps = np.maximum(1, epochs.shape[1] // lengths)
    if len(kernel_set) and (scales.min() < 1
                            or np.any(scales > scale_caps)):
        raise InvalidConfigurationError(
            "kernel scales violate 1 <= scale <= max(1, floor(N/M)) for "
            f"epoch length {epochs.shape[1]}"
        )
    uscales, scale_idx = np.unique(scales, return_inverse=True)
    uscales = uscales.astype(np.int64)
    scale_idx = scale_idx.astype(np.int64)
    out = np.empty((epochs.shape[0], 2 * len(kernel_set)))

    vcode = VARIANT_CODES[variant]
    if workers is None:
        _transform_batch(epochs, wflat, offsets, biases, scales, high_flags,
                         uscales, scale_idx, vcode, out)
    else:
        workers = max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS))
        previous = numba.get_num_threads()
        numba.set_num_threads(workers)
        try:
            _transform_batch(epochs, wflat, offsets, biases, scales,
                             high_flags, uscales, scale_idx, vcode, out)
        finally:
            numba.set_num_threads(previous)

    return FeatureMatrix(values=out, kernel_set_ref=kernel_set.fingerprint(),
                         variant=variant)

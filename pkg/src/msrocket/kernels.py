"""Random kernel generation.

Each kernel has five random parameters: length, zero-mean weights, bias,
scale, and a coin deciding whether the high- or low-frequency component is
convolved. Draws come from a single seeded Philox stream in a fixed order
(length, weights, bias, scale, branch), so a (count, epoch_length, seed,
variant) tuple always regenerates a bit-identical KernelSet. Variants that
force a parameter still consume its draw, which keeps weights and biases
paired across variants under one seed.
"""

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidConfigurationError
from .variants import Variant, parse_variant

#: Candidate kernel lengths, drawn with equal probability.
KERNEL_LENGTHS = (7, 9, 11)

_FORMAT_NAME = "msrocket-kernels"
_FORMAT_VERSION = 1


@dataclass
class Kernel:
    """One random convolution kernel."""

    length: int
    weights: np.ndarray
    bias: float
    scale: int
    use_high_freq: bool


@dataclass
class KernelSet:
    """An ordered population of kernels generated against one epoch length."""

    kernels: list
    epoch_length: int
    seed: int
    variant: Variant

    def __len__(self):
        return len(self.kernels)

    def __iter__(self):
        return iter(self.kernels)

    def packed(self):
        """Flatten to plain arrays for the compiled transform path.

        Returns (weights_flat, offsets, lengths, biases, scales, high_flags)
        where kernel k's weights live in weights_flat[offsets[k]:offsets[k+1]].
        """
        lengths = np.array([k.length for k in self.kernels], dtype=np.int64)
        offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        weights_flat = np.empty(int(offsets[-1]), dtype=np.float64)
        for k, kern in enumerate(self.kernels):
            weights_flat[offsets[k]:offsets[k + 1]] = kern.weights
        biases = np.array([k.bias for k in self.kernels], dtype=np.float64)
        scales = np.array([k.scale for k in self.kernels], dtype=np.int64)
        high = np.array(
            [1 if k.use_high_freq else 0 for k in self.kernels], dtype=np.uint8
        )
        return weights_flat, offsets, lengths, biases, scales, high

    def fingerprint(self):
        """Short stable identifier of this set (used as kernel_set_ref)."""
        digest = hashlib.sha256(self.to_json().encode("ascii")).hexdigest()
        return digest[:16]

    def to_json(self):
        records = [
            {
                "length": k.length,
                "weights": [float(w) for w in k.weights],
                "bias": float(k.bias),
                "scale": k.scale,
                "use_high_freq": k.use_high_freq,
            }
            for k in self.kernels
        ]
        doc = {
            "format": _FORMAT_NAME,
            "version": _FORMAT_VERSION,
            "count": len(self.kernels),
            "epoch_length": self.epoch_length,
            "seed": self.seed,
            "variant": self.variant.value,
            "kernels": records,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("format") != _FORMAT_NAME:
            raise InvalidArgumentError("not a kernel-set file")
        if doc.get("version") != _FORMAT_VERSION:
            raise InvalidArgumentError(
                f"unsupported kernel-set version {doc.get('version')!r}"
            )
        kernels = [
            Kernel(
                length=int(rec["length"]),
                weights=np.array(rec["weights"], dtype=np.float64),
                bias=float(rec["bias"]),
                scale=int(rec["scale"]),
                use_high_freq=bool(rec["use_high_freq"]),
            )
            for rec in doc["kernels"]
        ]
        return cls(
            kernels=kernels,
            epoch_length=int(doc["epoch_length"]),
            seed=int(doc["seed"]),
            variant=parse_variant(doc["variant"]),
        )

    def save(self, path):
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_json(fh.read())


def sample_scale(epoch_length, kernel_length, rng):
    """Draw one scale: floor(2**a), a ~ U(0, log2(1 + floor(N/M))).

    Always consumes exactly one uniform draw so callers stay stream-aligned.
    Returns 1 when floor(N/M) <= 1; otherwise the result lies in
    [1, floor(N/M)].
    """
    if epoch_length < 1 or kernel_length < 1:
        raise InvalidArgumentError("epoch_length and kernel_length must be >= 1")
    bound = epoch_length // kernel_length
    upper = math.log2(1 + bound)
    a = rng.uniform(0.0, upper)
    if bound <= 1:
        return 1
    # 2**a can round up to 1+bound when a sits within one ulp of the
    # open upper limit; the scale invariant is strict, so clamp.
    return min(int(2.0 ** a), bound)


def generate_kernels(count, epoch_length, seed, variant):
    """Generate `count` kernels against epochs of `epoch_length` samples.

    Parameters
    ----------
    count: int >= 0
    epoch_length: int, at least the largest candidate kernel length
    seed: unsigned int feeding the Philox stream
    variant: Variant; NO_SCALE forces scale=1 and the low branch,
        MULTI_SCALE forces the low branch

    Returns
    -------
    KernelSet
    """
    if not isinstance(variant, Variant):
        variant = parse_variant(variant)
    if count < 0:
        raise InvalidConfigurationError(f"kernel count must be >= 0, got {count}")
    if epoch_length < max(KERNEL_LENGTHS):
        raise InvalidConfigurationError(
            f"epoch_length {epoch_length} is shorter than the largest "
            f"kernel length {max(KERNEL_LENGTHS)}"
        )

    rng = np.random.Generator(np.random.Philox(seed))
    kernels = []
    for _ in range(count):
        length = KERNEL_LENGTHS[rng.integers(0, len(KERNEL_LENGTHS))]
        weights = rng.standard_normal(length)
        weights -= weights.mean()
        bias = rng.uniform(-1.0, 1.0)
        scale = sample_scale(epoch_length, length, rng)
        use_high = bool(rng.integers(0, 2))
        if variant is Variant.NO_SCALE:
            scale = 1
            use_high = False
        elif variant is Variant.MULTI_SCALE:
            use_high = False
        kernels.append(
            Kernel(
                length=length,
                weights=weights,
                bias=float(bias),
                scale=int(scale),
                use_high_freq=use_high,
            )
        )
    return KernelSet(
        kernels=kernels, epoch_length=int(epoch_length), seed=int(seed),
        variant=variant,
    )

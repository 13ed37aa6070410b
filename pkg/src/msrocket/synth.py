"""Synthetic burst-suppression-like cohort generator.

Each subject is an alternating sequence of burst and inter-burst segments.
Segment durations are log-normal around the configured means; within a
segment the signal is 1/f^beta colored noise normalized to unit RMS and
scaled by the segment class amplitude, so the burst/inter-burst RMS ratio
equals the configured amplitude ratio. Per-sample annotations follow the
generating segment exactly. Subjects draw from independent Philox streams
derived from the cohort seed, so generation is order-independent and
bit-reproducible.
"""

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import InvalidConfigurationError
from .pipeline import BURST, INTER_BURST, AnnotatedRecord


@dataclass
class SynthConfig:
    n_subjects: int = 36
    duration_s: float = 600.0
    sample_rate: float = 256.0
    burst_amp: float = 50.0
    interburst_amp: float = 10.0
    burst_dur_mean_s: float = 2.0
    interburst_dur_mean_s: float = 4.0
    noise_exponent: float = 1.0
    duration_log_sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_subjects < 0:
            raise InvalidConfigurationError("n_subjects must be >= 0")
        if self.duration_s <= 0:
            raise InvalidConfigurationError("duration_s must be > 0")
        if self.sample_rate <= 0:
            raise InvalidConfigurationError("sample_rate must be > 0")
        if self.burst_amp <= 0 or self.interburst_amp <= 0:
            raise InvalidConfigurationError("amplitudes must be > 0")
        if self.burst_amp <= self.interburst_amp:
            raise InvalidConfigurationError(
                "burst_amp must exceed interburst_amp"
            )
        if self.burst_dur_mean_s <= 0 or self.interburst_dur_mean_s <= 0:
            raise InvalidConfigurationError("segment durations must be > 0")
        if self.duration_log_sigma <= 0:
            raise InvalidConfigurationError("duration_log_sigma must be > 0")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise InvalidConfigurationError(
                f"unknown synth config fields: {sorted(unknown)}"
            )
        return cls(**doc)

    @classmethod
    def from_json_file(cls, path):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfigurationError(f"{path}: invalid JSON: {exc}")
        if not isinstance(doc, dict):
            raise InvalidConfigurationError(f"{path}: expected a JSON object")
        return cls.from_dict(doc)


def colored_noise(n, beta, rng):
    """Unit-RMS 1/f^beta noise of length n via spectral shaping.

    The DC bin is zeroed, so the output is exactly zero-mean. Segments too
    short to shape spectrally fall back to white noise.
    """
    if n < 1:
        return np.empty(0)
    white = rng.standard_normal(n)
    if n < 4:
        rms = math.sqrt(float(np.mean(white ** 2)))
        return white / rms if rms > 0 else white
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    spectrum[0] = 0.0
    spectrum[1:] *= freqs[1:] ** (-beta / 2.0)
    x = np.fft.irfft(spectrum, n)
    rms = math.sqrt(float(np.mean(x ** 2)))
    if rms == 0.0:
        return x
    return x / rms


def _segment_samples(rng, mean_s, log_sigma, sample_rate):
    """Log-normal segment duration, in samples (at least one)."""
    mu = math.log(mean_s) - 0.5 * log_sigma ** 2
    duration = rng.lognormal(mean=mu, sigma=log_sigma)
    return max(1, int(round(duration * sample_rate)))


def generate_record(config, subject_index):
    """One subject's record, deterministic in (config.seed, subject_index)."""
    seq = np.random.SeedSequence(entropy=config.seed,
                                 spawn_key=(subject_index,))
    rng = np.random.Generator(np.random.Philox(seq))
    n_total = int(round(config.duration_s * config.sample_rate))
    samples = np.empty(n_total)
    annotations = np.empty(n_total, dtype=np.int8)

    is_burst = bool(rng.integers(0, 2))
    pos = 0
    while pos < n_total:
        if is_burst:
            mean_s, amp, code = (config.burst_dur_mean_s, config.burst_amp,
                                 BURST)
        else:
            mean_s, amp, code = (config.interburst_dur_mean_s,
                                 config.interburst_amp, INTER_BURST)
        length = _segment_samples(rng, mean_s, config.duration_log_sigma,
                                  config.sample_rate)
        length = min(length, n_total - pos)
        samples[pos:pos + length] = amp * colored_noise(
            length, config.noise_exponent, rng
        )
        annotations[pos:pos + length] = code
        pos += length
        is_burst = not is_burst

    return AnnotatedRecord(
        subject_id=f"s{subject_index:03d}",
        samples=samples,
        sample_rate=config.sample_rate,
        annotations=annotations,
    )


def generate_cohort(config):
    """All subjects of a synthetic cohort."""
    return [generate_record(config, i) for i in range(config.n_subjects)]

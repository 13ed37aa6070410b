"""Run configuration: every protocol parameter in one place.

Defaults reproduce the reference protocol: 10,000 kernels, 2-second epochs
at 64 Hz, 0.5 s training hop, 0.125 s testing hop, 90% training label
threshold, ridge alpha 1. The training hop is exposed so the alternative
1.5 s reading of the protocol can be selected without code changes.
"""

import json
from dataclasses import dataclass, asdict

from .errors import InvalidConfigurationError
from .variants import Variant, parse_variant


@dataclass
class RunConfig:
    variant: Variant = Variant.MS_HLF
    n_kernels: int = 10000
    seed: int = 0
    epoch_seconds: float = 2.0
    train_hop_s: float = 0.5
    test_hop_s: float = 0.125
    label_threshold: float = 0.9
    alpha: float = 1.0
    workers: int | None = None
    cohort_dir: str | None = None
    out_dir: str | None = None

    def __post_init__(self):
        if not isinstance(self.variant, Variant):
            self.variant = parse_variant(self.variant)
        if self.n_kernels < 0:
            raise InvalidConfigurationError("n_kernels must be >= 0")
        if self.epoch_seconds != 2.0:
            raise InvalidConfigurationError(
                "epoch_seconds is fixed at 2.0 in this release"
            )
        for name in ("train_hop_s", "test_hop_s"):
            if getattr(self, name) <= 0:
                raise InvalidConfigurationError(f"{name} must be > 0")
        if not (0.5 < self.label_threshold <= 1.0):
            raise InvalidConfigurationError(
                "label_threshold must lie in (0.5, 1]"
            )
        if self.alpha <= 0:
            raise InvalidConfigurationError("alpha must be > 0")
        if self.workers is not None and self.workers < 1:
            raise InvalidConfigurationError("workers must be >= 1")

    def to_dict(self):
        doc = asdict(self)
        doc["variant"] = self.variant.value
        return doc

    @classmethod
    def from_dict(cls, doc):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise InvalidConfigurationError(
                f"unknown config fields: {sorted(unknown)}"
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

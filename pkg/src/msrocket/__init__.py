"""Multi-scale random convolution kernel toolkit for time-series
classification: kernel generation, multi-scale decomposition, the four
transform variants, a ridge classifier, a subject-wise evaluation harness,
and a synthetic burst-suppression data generator."""

from .classifier import RidgeModel, fit_ridge, predict
from .config import RunConfig
from .decompose import ScaleCache, high_pass, moving_average
from .evaluate import (
    ComparisonResult,
    ConfusionCounts,
    CvReport,
    compare_variants,
    leave_one_out,
    mcc,
    summarize_mcc,
    wilcoxon_signed_rank,
)
from .kernels import Kernel, KernelSet, generate_kernels, sample_scale
from .pipeline import (
    AnnotatedRecord,
    EpochedDataset,
    NormStats,
    compute_norm_stats,
    concatenate_datasets,
    epoch_signal,
    label_epochs,
    normalize,
    normalize_record,
    read_cohort,
    read_record,
    resample_to_64hz,
    write_record,
)
from .synth import SynthConfig, colored_noise, generate_cohort, generate_record
from .transform import (
    FeatureMatrix,
    apply_variant,
    convolve,
    extract_features,
    transform_dataset,
)
from .variants import Variant, parse_variant

__version__ = "0.1.0"

__all__ = [
    "AnnotatedRecord",
    "ComparisonResult",
    "ConfusionCounts",
    "CvReport",
    "EpochedDataset",
    "FeatureMatrix",
    "Kernel",
    "KernelSet",
    "NormStats",
    "RidgeModel",
    "RunConfig",
    "ScaleCache",
    "SynthConfig",
    "Variant",
    "apply_variant",
    "colored_noise",
    "compare_variants",
    "compute_norm_stats",
    "concatenate_datasets",
    "convolve",
    "epoch_signal",
    "extract_features",
    "fit_ridge",
    "generate_cohort",
    "generate_kernels",
    "generate_record",
    "high_pass",
    "label_epochs",
    "leave_one_out",
    "mcc",
    "moving_average",
    "normalize",
    "normalize_record",
    "parse_variant",
    "predict",
    "read_cohort",
    "read_record",
    "resample_to_64hz",
    "sample_scale",
    "summarize_mcc",
    "transform_dataset",
    "wilcoxon_signed_rank",
    "write_record",
    "__version__",
]

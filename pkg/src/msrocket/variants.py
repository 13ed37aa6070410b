"""The four convolution variants applied to each kernel/epoch pair."""

import enum

from .errors import InvalidConfigurationError


class Variant(enum.Enum):
    """Which components of the multi-scale decomposition feed the convolution.

    NO_SCALE         raw epoch, scale forced to 1 at kernel generation
    MULTI_SCALE      low-frequency component at the kernel's scale
    MS_HLF           high- or low-frequency component, per-kernel coin
    MS_HLF_DILATION  as MS_HLF, but the low branch is downsampled by the scale
    """

    NO_SCALE = "no_scale"
    MULTI_SCALE = "multi_scale"
    MS_HLF = "ms_hlf"
    MS_HLF_DILATION = "ms_hlf_dilation"


#: Stable integer codes used by the compiled transform kernels.
VARIANT_CODES = {
    Variant.NO_SCALE: 0,
    Variant.MULTI_SCALE: 1,
    Variant.MS_HLF: 2,
    Variant.MS_HLF_DILATION: 3,
}


def parse_variant(name):
    """Map a CLI/JSON string such as ``"ms_hlf"`` to a Variant."""
    try:
        return Variant(str(name).strip().lower())
    except ValueError:
        valid = ", ".join(v.value for v in Variant)
        raise InvalidConfigurationError(
            f"unknown variant {name!r}; expected one of: {valid}"
        ) from None

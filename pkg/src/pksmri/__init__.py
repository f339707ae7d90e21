"""Calibrationless multi-coil MRI reconstruction with SAKE and PKS.

PKS (partition-based k-space synthesis) completes an under-sampled target
contrast by splicing blocks of fully-sampled auxiliary contrasts of the same
slice into its k-space before low-rank Hankel completion.
"""

from ._kernels import BACKEND
from .errors import (
    MaskGenerationError,
    NumericalDivergenceError,
    RawFormatError,
    RawHeaderError,
    RawSizeMismatchError,
    RawTruncatedError,
    ValidationError,
)
from .hankel import HankelConfig, hankel_adjoint_avg, hankel_forward, lowrank_project
from .kspace import SamplingMask, apply_mask, fft2c, ifft2c, rss_combine, zero_filled_recon
from .masks import MaskSpec, generate_mask, measured_R
from .metrics import MetricPair, psnr, ssim
from .phantom import PhantomSpec, gen_coil_maps, gen_phantom, simulate_acquisition
from .pks import ContrastSet, HybridObject, PartitionSpec, decompose, pks_inverse_transform, pks_transform, sake_pks
from .sake import SakeConfig, SolveReport, sake_reconstruct

__version__ = "0.1.0"

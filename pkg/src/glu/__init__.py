"""Guided linear upsampling: run an image operator at low resolution and
upsample its output by two-pixel interpolation fitted on the source image."""
import warnings

# numba probes TBB first and complains about old versions before falling back
warnings.filterwarnings("ignore", message="The TBB threading layer")

from .baseline import JbuParams, bilinear_upsample, jbu_upsample, nearest_upsample
from .core import GluConfig, GridSpec, footprint, grid_downsample, neighborhood
from .glu import (
    ParamField,
    PixelParams,
    apply_field,
    error_map,
    fit_field,
    optimize_field,
    optimize_pixel_exact,
    optimize_pixel_fast,
    weight_exact,
    weight_fast,
)
from .io import GlupFormatError, load_image, read_glup, save_image, write_glup
from .jointopt import find_large_error, joint_optimize, trial_update_component
from .metrics import psnr, ssim

__version__ = "0.1.0"

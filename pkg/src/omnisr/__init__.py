"""Quality math and benchmarking for omnidirectional (ERP) image super-resolution."""

from .erp import ViewportSpec, WeightMap, pixel_to_direction, row_weights, viewport_sample_grid
from .imageio import ImageFormatError, load_image, save_image
from .losses import (LossWeights, adversarial_loss, d_360ss, feature_loss, grad_360ss,
                     loss_360ss, patch_score_average, total_objective)
from .metrics import DegenerateMetricError, SsimParams, psnr, ssim, ssim_map, ws_psnr, ws_ssim
from .raster import (decimate, degrade, gaussian_blur, render_viewport, to_luma,
                     upsample_bicubic, upsample_nn)

__version__ = "0.1.0"

"""Local-smoothness tools for natural image matting.

Foreground re-estimation (:mod:`matteforge.fgrefine`), augmentation and
trimaps (:mod:`matteforge.augment`), backpropagating refinement
(:mod:`matteforge.brefine`) and evaluation (:mod:`matteforge.metrics`).
"""
from ._backend import BACKEND
from .augment import AugmentConfig, color_augment, gen_trimap, sample_training_patch, tta_plan
from .brefine import BrConfig, br_forward, br_gradients, br_refine, loss_c1, loss_c2
from .core import (
    BG,
    FG,
    UNKNOWN,
    ConfigError,
    DiagnosticWarning,
    ShapeError,
    assumption2_violation,
    composite,
    neighbors4,
    region_boundary,
)
from .fgrefine import RefineConfig, fg_cost, jacobi_sweep, multiscale_refine, simple_refine, solve_dense_oracle
from .metrics import MetricReport, evaluate

__version__ = "0.1.0"

"""Adaptive multi-element surrogate models over d-dimensional random spaces.

The pipeline: spanning-tree driven adaptive sampling of a black-box model,
jump-based sample classification, SVM domain decomposition along the detected
discontinuities, and stable local polynomial interpolation per element.
"""

from . import classify, density, geometry, interp, metrics, models, mst, sampler, surrogate, svm, weights
from .density import DensityModel, Marginal, beta_box, uniform_box
from .sampler import ModelAdapter, SampleSet, SamplerConfig
from .surrogate import Surrogate, SvmConfig, build, evaluate, load, save

__version__ = "0.1.0"

# Noise package
from src.noise.convolution import discrete_second_moment, stochastic_convolution
from src.noise.covariance import CovarianceSpec, hs_norm
from src.noise.increments import NoisePath, sample_increments

__all__ = [
    "CovarianceSpec",
    "NoisePath",
    "discrete_second_moment",
    "hs_norm",
    "sample_increments",
    "stochastic_convolution",
]

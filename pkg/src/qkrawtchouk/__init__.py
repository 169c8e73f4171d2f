"""Random Young diagrams in a box, q-Krawtchouk ensembles and their limits."""
from .asymptotics import LimitParams, SupportInterval
from .ensemble import KernelMatrix, QKParams, spectral_kernel
from .measures import ModelParams, Spec, distribution, prob, prob_determinantal
from .sampler import SampleBatch, sample_dpp, sample_exact

__version__ = "0.1.0"

__all__ = [
    "KernelMatrix",
    "LimitParams",
    "ModelParams",
    "QKParams",
    "SampleBatch",
    "Spec",
    "SupportInterval",
    "distribution",
    "prob",
    "prob_determinantal",
    "sample_dpp",
    "sample_exact",
    "spectral_kernel",
]

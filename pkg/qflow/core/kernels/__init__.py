from qflow.core.kernels.base import RegularizerKernel
from qflow.core.kernels.euclidean import EuclideanKernel
from qflow.core.kernels.vonneumann import VonNeumannKernel
from qflow.core.kernels.tsallis import TsallisKernel

__all__ = ["RegularizerKernel", "EuclideanKernel", "VonNeumannKernel", "TsallisKernel"]

"""
Registry of the built-in regularizer kernels.

Run configs select kernels by name string: "euclidean", "vonneumann" or
"tsallis:<q>", plus the aliases listed in the settings module.
"""
from dataclasses import dataclass
from typing import Dict, Optional

from qflow.config import KERNEL_ALIASES, SUPPORTED_KERNELS
from qflow.core.errors import DomainError, SpecValidationError
from qflow.core.kernels import EuclideanKernel, RegularizerKernel, TsallisKernel, VonNeumannKernel


@dataclass
class KernelDefinition:
    """Definition of a single built-in kernel"""
    kernel_id: str
    display_name: str
    description: str
    parameterized: bool = False

    def usage(self) -> str:
        name = f"{self.kernel_id}:<q>" if self.parameterized else self.kernel_id
        return f"{name} ({self.display_name}: {self.description})"


KERNELS_REGISTRY: Dict[str, KernelDefinition] = {
    "euclidean": KernelDefinition(
        kernel_id="euclidean",
        display_name="Euclidean",
        description="squared Frobenius norm, projection dynamics",
    ),
    "vonneumann": KernelDefinition(
        kernel_id="vonneumann",
        display_name="Von Neumann",
        description="negative von Neumann entropy, matrix multiplicative weights",
    ),
    "tsallis": KernelDefinition(
        kernel_id="tsallis",
        display_name="Tsallis",
        description="Tsallis entropy with exponent q in (0,1) or (1,2], steep for q < 1",
        parameterized=True,
    ),
}


def describe_kernels() -> str:
    return "; ".join(KERNELS_REGISTRY[kernel_id].usage() for kernel_id in SUPPORTED_KERNELS)


def normalize_kernel_name(name: str) -> str:
    """Map aliases onto canonical kernel ids, leaving any ':<q>' suffix untouched."""
    base, sep, param = name.strip().lower().partition(":")
    base = KERNEL_ALIASES.get(base, base)
    return f"{base}{sep}{param}"


def builtin_kernel(name: str, q: Optional[float] = None) -> RegularizerKernel:
    canonical = normalize_kernel_name(name)
    base, _, param = canonical.partition(":")

    if base == "euclidean":
        return EuclideanKernel()
    if base == "vonneumann":
        return VonNeumannKernel()
    if base == "tsallis":
        if param:
            try:
                q = float(param)
            except ValueError:
                raise DomainError(f"Invalid Tsallis exponent in kernel name {name!r}")
        if q is None:
            raise DomainError("Tsallis kernel requires an exponent, e.g. 'tsallis:0.5'")
        # (x - x^q)/(1 - q) tends to x log x as q -> 1
        if q == 1.0:
            return VonNeumannKernel()
        return TsallisKernel(q)

    raise SpecValidationError(
        f"Unsupported kernel: {name!r}. Supported kernels: {describe_kernels()}"
    )

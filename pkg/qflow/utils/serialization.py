"""
JSON codec for complex matrices.

Complex scalars are written as [re, im] pairs and matrices as row-major nested
lists. Decoding also accepts plain real nested lists.
"""
from typing import Any, List

import numpy as np

from qflow.core.errors import SpecValidationError


def encode_matrix(M) -> List[List[List[float]]]:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def encode_matrices(stack) -> List[Any]:
    return [encode_matrix(M) for M in stack]


def decode_matrix(obj: Any) -> np.ndarray:
    if isinstance(obj, np.ndarray):
        arr = obj
        if arr.ndim == 2:
            return arr.astype(complex)
    else:
        try:
            arr = np.asarray(obj, dtype=float)
        except (TypeError, ValueError) as e:
            raise SpecValidationError(f"Matrix must be a rectangular nested list of numbers or [re, im] pairs: {e}")
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise SpecValidationError(f"Cannot decode a matrix from an array of shape {arr.shape}")


def decode_matrices(obj: Any) -> np.ndarray:
    return np.array([decode_matrix(M) for M in obj], dtype=complex)


def format_real(value: float, digits: int = 17) -> str:
    return f"{float(value):.{digits}g}"

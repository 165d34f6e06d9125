"""STO-3G hydrogen s orbital: primitive exponents and contraction."""

from __future__ import annotations

import numpy as np

# STO-3G for H, zeta = 1.24: exponents and contraction coefficients of
# three normalized s primitives.
H_EXPONENTS = np.array([3.42525091, 0.62391373, 0.16885540])
H_COEFFS = np.array([0.15432897, 0.53532814, 0.44463454])


def primitive_norm(alpha: float) -> float:
    """L2 norm constant of exp(-alpha r^2)."""
    return (2.0 * alpha / np.pi) ** 0.75


def contracted_h() -> tuple[np.ndarray, np.ndarray]:
    """(exponents, contraction weights) with the contraction renormalized.

    Weights already fold in the primitive norms, so a basis function is
    phi(r) = sum_i w_i exp(-a_i r^2) with <phi|phi> = 1 exactly.
    """
    alphas = H_EXPONENTS.copy()
    weights = H_COEFFS * primitive_norm(alphas)
    norm2 = 0.0
    for i, (ai, wi) in enumerate(zip(alphas, weights)):
        for aj, wj in zip(alphas, weights):
            norm2 += wi * wj * (np.pi / (ai + aj)) ** 1.5
    return alphas, weights / np.sqrt(norm2)

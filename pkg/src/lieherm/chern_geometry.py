"""Chern connection geometry of a left-invariant Hermitian structure.

Everything here is computed from :class:`~lieherm.lie_structure.CDTensors`.
Index layouts (all 0-based):

* ``T[j, i, k]``         torsion component ``T^j_{ik}``
* ``Td[j, i, k, l]``     ``T^j_{ik,l}`` (derivative along ``e_l``)
* ``Tdbar[j, i, k, l]``  ``T^j_{ik,lbar}`` (derivative along ``conj(e_l)``)
* ``R[i, j, k, l]``      ``R_{i jbar k lbar}``

In the frame ``e``, the connection is ``nabla_{e_k} e_i = sum_r D[r, i, k] e_r``
and ``nabla_{conj(e_j)} e_i = -sum_r conj(D[i, r, j]) e_r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lie_structure import DEFAULT_TOL, CDTensors

__all__ = [
    "TorsionTensor",
    "CurvatureTensor",
    "ConstantHFit",
    "GeometryFlags",
    "torsion",
    "torsion_derivatives",
    "torsion_tensor",
    "chern_curvature",
    "curvature_tensor",
    "diagonal_h",
    "symmetrize",
    "rhat_diagonal_pair",
    "holomorphic_sectional",
    "constant_h_pattern",
    "constant_h_fit",
    "classify",
]


@dataclass(frozen=True)
class TorsionTensor:
    T: np.ndarray
    Td: Optional[np.ndarray] = None
    Tdbar: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.T.shape[0]


@dataclass(frozen=True)
class CurvatureTensor:
    R: np.ndarray
    Rhat: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.R.shape[0]


@dataclass(frozen=True)
class ConstantHFit:
    """Least-squares fit of a constant holomorphic sectional curvature.

    ``residual`` is the max-norm deviation, ``frobenius`` the Frobenius norm of
    the same deviation tensor.
    """

    c_fit: float
    residual: float
    is_constant: bool
    frobenius: float = 0.0


@dataclass(frozen=True)
class GeometryFlags:
    kahler: bool
    chern_flat: bool
    complex_group: bool


def torsion(cd: CDTensors) -> np.ndarray:
    T = -cd.C - cd.D + cd.D.transpose(0, 2, 1)
    # exact antisymmetry in the lower pair
    return (T - T.transpose(0, 2, 1)) / 2


def torsion_derivatives(cd: CDTensors, T: np.ndarray):
    """Chern covariant derivatives ``(Td, Tdbar)`` of the torsion."""
    D = cd.D
    cD = np.conj(D)
    Td = (
        -np.einsum("jrk,ril->jikl", T, D)
        - np.einsum("jir,rkl->jikl", T, D)
        + np.einsum("rik,jrl->jikl", T, D)
    )
    Tdbar = (
        np.einsum("jrk,irl->jikl", T, cD)
        + np.einsum("jir,krl->jikl", T, cD)
        - np.einsum("rik,rjl->jikl", T, cD)
    )
    return Td, Tdbar


def torsion_tensor(cd: CDTensors) -> TorsionTensor:
    T = torsion(cd)
    Td, Tdbar = torsion_derivatives(cd, T)
    return TorsionTensor(T, Td, Tdbar)


def chern_curvature(cd: CDTensors) -> np.ndarray:
    """Chern curvature ``R[i, j, k, l]``, quadratic in ``D`` and independent of ``C``."""
    D = cd.D
    cD = np.conj(D)
    return (
        np.einsum("rki,rlj->ijkl", D, cD)
        - np.einsum("lri,krj->ijkl", D, cD)
        - np.einsum("jri,klr->ijkl", D, cD)
        - np.einsum("irj,lkr->ijkl", cD, D)
    )


def symmetrize(R: np.ndarray) -> np.ndarray:
    """Average of ``R`` over swapping the two holomorphic and the two antiholomorphic slots."""
    return (R + R.transpose(2, 1, 0, 3) + R.transpose(0, 3, 2, 1) + R.transpose(2, 3, 0, 1)) / 4


def curvature_tensor(cd: CDTensors) -> CurvatureTensor:
    R = chern_curvature(cd)
    return CurvatureTensor(R, symmetrize(R))


def diagonal_h(cd: CDTensors, i: int) -> float:
    """Closed form of ``R[i, i, i, i]``."""
    n = cd.n
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for n = {n}")
    D = cd.D
    total = 0.0
    for r in range(n):
        total += abs(D[r, i, i]) ** 2 - abs(D[i, r, i]) ** 2
        total -= 2 * (D[i, r, i] * np.conj(D[i, i, r])).real
    return float(total)


def rhat_diagonal_pair(cd: CDTensors, i: int, k: int) -> float:
    """Closed form of ``Rhat[i, i, k, k]``.

    The bracketed sum equals four times the symmetrized entry, hence the
    final division.
    """
    D = cd.D
    cD = np.conj(D)
    total = 0.0
    for r in range(cd.n):
        total += abs(D[r, k, i] + D[r, i, k]) ** 2 - abs(D[k, r, i]) ** 2 - abs(D[i, r, k]) ** 2
        total -= 2 * (
            D[k, r, k] * cD[i, r, i]
            + D[i, r, i] * cD[k, k, r]
            + D[k, r, k] * cD[i, i, r]
            + D[i, r, k] * cD[i, k, r]
            + D[k, r, i] * cD[k, i, r]
        ).real
    return float(total) / 4


def holomorphic_sectional(R: np.ndarray, X, tol: float = 1e-12) -> float:
    """``H(X) = R(X, conj X, X, conj X) / |X|^4``.

    Raises if the value has an imaginary part above ``tol`` (relative to its
    size), which would mean ``R`` lacks Hermitian symmetry.
    """
    X = np.asarray(X, dtype=complex)
    norm2 = float(np.vdot(X, X).real)
    if norm2 == 0.0:
        raise ValueError("holomorphic sectional curvature needs a nonzero direction")
    cX = np.conj(X)
    value = np.einsum("ijkl,i,j,k,l->", R, X, cX, X, cX) / norm2**2
    if abs(value.imag) > tol * max(1.0, abs(value)):
        raise ArithmeticError(f"H has imaginary part {value.imag:.3e}; curvature is not Hermitian")
    return float(value.real)


def constant_h_pattern(n: int) -> np.ndarray:
    """``(delta_ij delta_kl + delta_il delta_kj) / 2`` indexed ``[i, j, k, l]``."""
    eye = np.eye(n)
    return (np.einsum("ij,kl->ijkl", eye, eye) + np.einsum("il,kj->ijkl", eye, eye)) / 2


def constant_h_fit(Rhat: np.ndarray, tol: float = DEFAULT_TOL) -> ConstantHFit:
    P = constant_h_pattern(Rhat.shape[0])
    c = float(np.sum(P * Rhat).real / np.sum(P * P))
    dev = Rhat - c * P
    residual = float(np.max(np.abs(dev)))
    return ConstantHFit(c, residual, residual <= tol, float(np.linalg.norm(dev)))


def classify(cd: CDTensors, tol: float = DEFAULT_TOL) -> GeometryFlags:
    kahler = float(np.max(np.abs(torsion(cd)))) <= tol
    chern_flat = float(np.max(np.abs(chern_curvature(cd)))) <= tol
    complex_group = float(np.max(np.abs(cd.D))) <= tol
    if complex_group and not chern_flat:
        # R is quadratic in D, so this only happens when tol is far too loose
        raise ArithmeticError("D vanishes within tolerance but R does not")
    return GeometryFlags(kahler, chern_flat, complex_group)

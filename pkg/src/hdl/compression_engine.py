"""Compressing a unitary to a subspace.

Given a unitary ``U`` on ``C^n`` and a subspace ``K`` we form ``T = P_K U``,
``S = (I - P_K) U`` and the unitary identification ``U~ : U^H(K) -> K``.
Then for ``k`` in ``K``

    <(U + z)(U - z)^{-1} k | k> = <(U~ + Theta_S(z))(U~ - Theta_S(z))^{-1} k | k>,

where ``Theta_S`` is the characteristic function of ``S`` (it maps
``U^H(K)`` into ``K``).  Both sides are evaluated independently here, and
the compressed measure ``P_K E(.)|_K`` is certified against the right-hand
side on a fixed z-grid.

Vectors on the right-hand side are given in ``K``-coordinates (length
``k``); the left-hand side takes ambient vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map as _grid_map
from .config import CLUSTER_TOL, DEFAULT_TOLERANCES, DEFAULT_Z_GRID, MAX_CONDITION, ZGrid
from .contractions import DefectData, characteristic_function, defect_data
from .errors import ConstructionInconsistencyError, DimensionMismatchError, DomainError
from .linalg_core import Frame, as_vector, check_unitary, orthonormal_columns, solve, unitarity_residual
from .ov_measures import (
    DiscreteOVMeasure, compress_measure, herglotz_transform, spectral_measure_of_unitary,
)

__all__ = [
    "CompressionTriple", "Certificate", "split", "herglotz_lhs", "herglotz_lhs_matrix",
    "herglotz_rhs", "herglotz_rhs_matrix", "theta_s", "generalized_measure",
    "identity_residual", "check_triple",
]


@dataclass(frozen=True, eq=False)
class CompressionTriple:
    U: np.ndarray
    K: Frame
    T: np.ndarray
    S: np.ndarray
    ustar_k: Frame
    u_tilde: np.ndarray
    defect: DefectData  # defect data of S with frames pinned to (ustar_k, K)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def k(self) -> int:
        return self.K.dim


@dataclass(frozen=True)
class Certificate:
    max_identity_residual: float
    grid: dict
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_identity_residual < self.tolerance)

    def to_dict(self) -> dict:
        return {"max_identity_residual": self.max_identity_residual, "grid": self.grid,
                "pass": self.passed}


def split(U, K: Frame, tol: float = 1e-10) -> CompressionTriple:
    """Decompose ``U`` against ``K`` into ``T = P_K U`` and ``S = (I - P_K) U``."""
    U = check_unitary(U)
    n = U.shape[0]
    if K.ambient_dim != n:
        raise DimensionMismatchError(f"frame lives in C^{K.ambient_dim}, U acts on C^{n}")
    if not 1 <= K.dim <= n:
        raise DimensionMismatchError(f"subspace dimension must be in 1..{n}, got {K.dim}")
    P = K.projector()
    T = P @ U
    S = U - T
    ustar_k = orthonormal_columns(U.conj().T @ K.basis)
    if ustar_k.dim != K.dim:
        raise ConstructionInconsistencyError("U^H(K) basis", abs(ustar_k.dim - K.dim))
    u_tilde = K.basis.conj().T @ U @ ustar_k.basis
    # U~^* P_K = T^* as maps into U^H(K), tested on the standard basis
    res = float(np.linalg.norm(ustar_k.basis @ u_tilde.conj().T @ K.basis.conj().T - T.conj().T))
    if res > tol:
        raise ConstructionInconsistencyError("U~^* P_K = T^*", res)
    if unitarity_residual(u_tilde) > tol:
        raise ConstructionInconsistencyError("unitarity of U~", unitarity_residual(u_tilde))
    dd = defect_data(S, frame_dt=ustar_k, frame_dts=K)
    return CompressionTriple(U, K, T, S, ustar_k, u_tilde, dd)


def theta_s(ct: CompressionTriple, z: complex) -> np.ndarray:
    """``Theta_S(z)`` as a ``k x k`` matrix from ``U^H(K)``- to ``K``-coordinates."""
    return characteristic_function(ct.defect, z).theta


def _check_disc(z):
    z = complex(z)
    if not abs(z) < 1:
        raise DomainError(f"need |z| < 1, got |z| = {abs(z)}")
    return z


def herglotz_lhs_matrix(U, z, frame: Frame | None = None,
                        max_condition: float = MAX_CONDITION) -> np.ndarray:
    """``(U + z)(U - z)^{-1}``, optionally compressed to ``frame``."""
    z = _check_disc(z)
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    I = np.eye(n)
    rhs = I if frame is None else frame.basis
    X = solve(U - z * I, rhs, max_condition)
    M = (U + z * I) @ X
    return M if frame is None else frame.basis.conj().T @ M


def herglotz_lhs(U, k1, k2, z: complex) -> complex:
    """``<(U + z)(U - z)^{-1} k1 | k2>`` with one linear solve; ambient vectors."""
    z = _check_disc(z)
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    k1 = as_vector(k1, n, "k1")
    k2 = as_vector(k2, n, "k2")
    x = solve(U - z * np.eye(n), k1, MAX_CONDITION)
    return complex(np.vdot(k2, U @ x + z * x))


def herglotz_rhs_matrix(ct: CompressionTriple, z: complex,
                        max_condition: float = MAX_CONDITION) -> np.ndarray:
    """``(U~ + Theta_S(z))(U~ - Theta_S(z))^{-1}`` on ``K``-coordinates."""
    z = _check_disc(z)
    th = theta_s(ct, z)
    X = solve(ct.u_tilde - th, np.eye(ct.k), max_condition)
    return (ct.u_tilde + th) @ X


def herglotz_rhs(ct: CompressionTriple, k1, k2, z: complex) -> complex:
    """``<(U~ + Theta_S(z))(U~ - Theta_S(z))^{-1} k1 | k2>`` for ``K``-coordinate vectors."""
    k1 = as_vector(k1, ct.k, "k1")
    k2 = as_vector(k2, ct.k, "k2")
    z = _check_disc(z)
    th = theta_s(ct, z)
    x = solve(ct.u_tilde - th, k1, MAX_CONDITION)
    return complex(np.vdot(k2, (ct.u_tilde + th) @ x))


def identity_residual(ct: CompressionTriple, grid: ZGrid = DEFAULT_Z_GRID) -> float:
    """Max over the grid of ``||K^H (U+z)(U-z)^{-1} K - rhs matrix||_2``."""
    def one(z):
        lhs = herglotz_lhs_matrix(ct.U, z, ct.K)
        return float(np.linalg.norm(lhs - herglotz_rhs_matrix(ct, z), 2))

    return max(_grid_map(one, grid.points()))


def generalized_measure(ct: CompressionTriple, grid: ZGrid = DEFAULT_Z_GRID,
                        cluster_tol: float = CLUSTER_TOL,
                        tol: float = DEFAULT_TOLERANCES["identity"]) -> DiscreteOVMeasure:
    """The compressed measure ``B = P_K E(.)|_K`` with a Herglotz certificate.

    The certificate records the largest deviation, over the grid, between
    ``herglotz_transform(B, z)`` and the characteristic-function side
    ``(U~ + Theta_S(z))(U~ - Theta_S(z))^{-1}``.
    """
    E = spectral_measure_of_unitary(ct.U, cluster_tol)
    B = compress_measure(E, ct.K)

    def one(z):
        return float(np.linalg.norm(herglotz_rhs_matrix(ct, z) - herglotz_transform(B, z), 2))

    resid = max(_grid_map(one, grid.points()))
    cert = Certificate(resid, grid.to_dict(), tol)
    return DiscreteOVMeasure(B.dim, B.thetas, B.weights, B.kind, certificate=cert)


def check_triple(ct: CompressionTriple, tol: float = 1e-10) -> dict:
    """Residuals of the structural invariants of a triple (all should be tiny)."""
    return {
        "T+S=U": float(np.linalg.norm(ct.T + ct.S - ct.U)),
        "T partial isometry": float(np.linalg.norm(ct.T @ ct.T.conj().T @ ct.T - ct.T)),
        "S partial isometry": float(np.linalg.norm(ct.S @ ct.S.conj().T @ ct.S - ct.S)),
        "U~ unitary": unitarity_residual(ct.u_tilde),
        "Theta_S(0)": float(np.linalg.norm(theta_s(ct, 0.0))),
    }

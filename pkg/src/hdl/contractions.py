"""Defect operators and characteristic functions of contractions.

For a contraction ``T`` the defect operators are ``D_T = (I - T^H T)^{1/2}``
and ``D_{T*} = (I - T T^H)^{1/2}``; the characteristic function

    Theta_T(z) = -T + z D_{T*} (I - z T^H)^{-1} D_T

maps the closed range of ``D_T`` into that of ``D_{T*}``.  Samples are
returned as small matrices in fixed defect-space bases, so two samples of
one :class:`DefectData` at different ``z`` share coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import MAX_CONDITION, RANK_TOL
from .errors import (
    BoundarySingularityError, DimensionMismatchError, InvalidInputError, NotContractionError,
)
from .linalg_core import Frame, as_cmatrix, orthonormal_columns, psd_sqrt, solve

__all__ = [
    "DefectData", "CharFnSample", "defect_data", "characteristic_function",
    "characteristic_matrix", "is_partial_isometry", "purity_margin", "is_pure", "cnu_split",
    "spectral_radius",
]


@dataclass(frozen=True, eq=False)
class DefectData:
    T: np.ndarray
    d_t: np.ndarray
    d_ts: np.ndarray
    frame_dt: Frame
    frame_dts: Frame

    @property
    def index_t(self) -> int:
        return self.frame_dt.dim

    @property
    def index_ts(self) -> int:
        return self.frame_dts.dim

    @property
    def n(self) -> int:
        return self.T.shape[0]


@dataclass(frozen=True, eq=False)
class CharFnSample:
    z: complex
    theta: np.ndarray  # (index_ts, index_t)


def _spans_same(F: Frame, G: Frame, tol=1e-9) -> bool:
    if F.dim != G.dim:
        return False
    return np.linalg.norm(F.projector() - G.projector()) < tol


def defect_data(T, frame_dt: Frame | None = None, frame_dts: Frame | None = None,
                contraction_tol: float = 1e-8, rank_tol: float = RANK_TOL) -> DefectData:
    """Defect operators, defect-space frames and defect indices of ``T``.

    The defect frames default to orthonormal bases of the ranges of
    ``D_T`` and ``D_{T*}``.  Callers that need a specific basis (for instance
    one shared with another operator) may pass their own frames; these are
    checked to span the right spaces.
    """
    T = as_cmatrix(T, "T")
    n = T.shape[0]
    if T.shape != (n, n):
        raise DimensionMismatchError(f"T must be square, got shape {T.shape}")
    norm = float(np.linalg.norm(T, 2)) if n else 0.0
    if norm > 1 + contraction_tol:
        raise NotContractionError(norm)
    I = np.eye(n)
    d_t = psd_sqrt(I - T.conj().T @ T)
    d_ts = psd_sqrt(I - T @ T.conj().T)
    own_dt = orthonormal_columns(d_t, rank_tol)
    own_dts = orthonormal_columns(d_ts, rank_tol)
    for given, own, name in ((frame_dt, own_dt, "D_T"), (frame_dts, own_dts, "D_T*")):
        if given is not None and not _spans_same(given, own):
            raise InvalidInputError(f"supplied frame does not span the defect space {name}")
    return DefectData(T, d_t, d_ts, frame_dt or own_dt, frame_dts or own_dts)


def characteristic_matrix(dd: DefectData, z: complex, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """Full ``n x n`` matrix ``-T + z D_{T*} (I - z T^H)^{-1} D_T``."""
    z = complex(z)
    n = dd.n
    R = solve(np.eye(n) - z * dd.T.conj().T, dd.d_t, max_condition, BoundarySingularityError)
    return -dd.T + z * dd.d_ts @ R


def characteristic_function(dd: DefectData, z: complex, max_condition: float = MAX_CONDITION) -> CharFnSample:
    """Sample ``Theta_T(z)`` in defect-frame coordinates.

    Evaluation on the unit circle is allowed whenever ``I - z T^H`` is
    invertible; a condition number above ``max_condition`` raises
    :class:`~hdl.errors.BoundarySingularityError`.
    """
    M = characteristic_matrix(dd, z, max_condition)
    theta = dd.frame_dts.basis.conj().T @ M @ dd.frame_dt.basis
    return CharFnSample(complex(z), theta)


def is_partial_isometry(T, tol: float = 1e-9) -> bool:
    """``T T^H T == T``, equivalent to ``Theta_T(0) = 0``."""
    T = as_cmatrix(T, "T")
    return float(np.linalg.norm(T @ T.conj().T @ T - T)) < tol


def purity_margin(dd: DefectData) -> float:
    """``1 - ||Theta_T(0)||_2``; positive for a pure characteristic function."""
    th0 = characteristic_function(dd, 0.0).theta
    return 1.0 - (float(np.linalg.norm(th0, 2)) if th0.size else 0.0)


def is_pure(dd: DefectData, tol: float = 1e-9):
    """Purity test with a grey zone.

    Returns ``True`` when ``||Theta(0)||_2 < 1 - tol``, ``False`` when it
    exceeds ``1 + tol``, and ``None`` when the norm is within ``tol`` of one,
    where strict inequality cannot be decided in floating point.
    """
    margin = purity_margin(dd)
    if margin > tol:
        return True
    if margin < -tol:
        return False
    return None


def spectral_radius(T) -> float:
    T = as_cmatrix(T, "T")
    return float(np.max(np.abs(np.linalg.eigvals(T)))) if T.size else 0.0


def cnu_split(T, tol: float = 1e-9):
    """Split ``C^n`` into the unitary part and the completely nonunitary part of ``T``.

    The unitary part is the largest reducing subspace on which ``T`` is
    unitary: the common kernel of ``D_T^2 T^m`` and ``D_{T*}^2 (T^H)^m`` for
    ``0 <= m < n``.  Squared defect operators have the same kernels and avoid
    the square-root amplification of rounding noise.

    Returns
    -------
    (Frame, Frame)
        ``(unitary_part, cnu_part)``, orthogonal complements of each other.
    """
    T = as_cmatrix(T, "T")
    n = T.shape[0]
    if n == 0:
        return Frame.empty(0), Frame.empty(0)
    I = np.eye(n)
    dt2 = I - T.conj().T @ T
    dts2 = I - T @ T.conj().T
    blocks = []
    Tm, Tsm = I.astype(complex), I.astype(complex)
    for _ in range(n):
        blocks.append(dt2 @ Tm)
        blocks.append(dts2 @ Tsm)
        Tm = T @ Tm
        Tsm = T.conj().T @ Tsm
    stack = np.vstack(blocks)
    _, s, vh = np.linalg.svd(stack)
    rank = int(np.sum(s > tol))
    cnu = Frame(vh[:rank].conj().T)
    unitary = Frame(vh[rank:].conj().T)
    return unitary, cnu

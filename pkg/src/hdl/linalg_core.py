"""Dense complex linear algebra shared by the rest of the package.

Operators are plain ``numpy`` complex arrays.  Subspaces are carried as
:class:`Frame` objects, i.e. matrices with orthonormal columns, so that a
subspace always comes together with an ordered basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import CLUSTER_TOL, RANK_TOL
from .errors import (
    DimensionMismatchError, InvalidInputError, NotPSDError, NotUnitaryError, NumericalSingularityError,
)

__all__ = [
    "Frame", "as_cmatrix", "as_vector", "orthonormal_columns", "unitary_eig",
    "psd_sqrt", "unitarity_residual", "check_unitary", "random_unitary",
    "random_frame", "krylov_dim", "solve", "arc_distance", "wrap_angle", "matrix_to_json",
    "matrix_from_json", "vector_to_json", "vector_from_json", "inner",
]

FRAME_TOL = 1e-10

_getrf, _gecon = scipy.linalg.lapack.get_lapack_funcs(("getrf", "gecon"), (np.zeros(1, complex),))


def as_cmatrix(M, name="matrix") -> np.ndarray:
    """Validate and convert ``M`` to a 2-d complex array."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def as_vector(v, dim=None, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if dim is not None and v.size != dim:
        raise DimensionMismatchError(f"{name} has length {v.size}, expected {dim}")
    return v


def inner(x, y) -> complex:
    """``<x | y>``, linear in the first argument."""
    return complex(np.vdot(y, x))


@dataclass(frozen=True, eq=False)
class Frame:
    """A subspace of ``C^n`` together with an orthonormal basis.

    Parameters
    ----------
    basis : array, shape (n, k)
        Orthonormal columns.  ``k`` may be zero.
    """

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if B.ndim != 2 or not np.all(np.isfinite(B)):
            raise InvalidInputError("frame basis must be a finite 2-d array")
        err = np.linalg.norm(B.conj().T @ B - np.eye(B.shape[1]))
        if err > FRAME_TOL:
            raise InvalidInputError(f"frame columns are not orthonormal: ||F^H F - I||_F = {err:.3e}")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def embed(self, coords) -> np.ndarray:
        """Map coordinates (length ``dim``) to an ambient vector."""
        return self.basis @ as_vector(coords, self.dim, "coordinates")

    def coords(self, vec) -> np.ndarray:
        """Coordinates of the orthogonal projection of ``vec`` onto the frame."""
        return self.basis.conj().T @ as_vector(vec, self.ambient_dim)

    def complement(self) -> "Frame":
        """Orthonormal basis of the orthogonal complement."""
        n, k = self.basis.shape
        if k == 0:
            return Frame(np.eye(n, dtype=complex))
        return Frame(scipy.linalg.null_space(self.basis.conj().T, rcond=RANK_TOL))

    @classmethod
    def full(cls, n: int) -> "Frame":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def empty(cls, n: int) -> "Frame":
        return cls(np.zeros((n, 0), dtype=complex))


def orthonormal_columns(M, tol: float = RANK_TOL) -> Frame:
    """Orthonormal basis of the column space of ``M``.

    The rank counts singular values larger than ``tol`` times the largest
    one, so the result does not depend on the scale of ``M``.
    """
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    M = as_cmatrix(M)
    n = M.shape[0]
    if M.size == 0:
        return Frame.empty(n)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return Frame.empty(n)
    rank = int(np.sum(s > tol * s[0]))
    return Frame(_canonical_phases(u[:, :rank]))


def _canonical_phases(B: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-modulus entry is real positive."""
    if B.shape[1] == 0:
        return B
    idx = np.argmax(np.abs(B) - 1e-12 * np.arange(B.shape[0])[:, None], axis=0)
    lead = B[idx, np.arange(B.shape[1])]
    return B * (np.abs(lead) / lead)


def unitarity_residual(U) -> float:
    U = as_cmatrix(U)
    if U.shape[0] != U.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {U.shape}")
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])))


def check_unitary(U, tol: float = 1e-8) -> np.ndarray:
    """Return ``U`` as an array, raising :class:`NotUnitaryError` if it is not unitary."""
    U = as_cmatrix(U)
    res = unitarity_residual(U)
    if res >= tol:
        raise NotUnitaryError(res)
    return U


def wrap_angle(theta):
    """Reduce angles to ``[0, 2*pi)``."""
    t = np.mod(theta, 2 * np.pi)
    # np.mod rounds tiny negative inputs up to exactly 2*pi
    t = np.where(t >= 2 * np.pi, 0.0, t)
    return float(t) if t.ndim == 0 else t


def arc_distance(a, b):
    """Arc-length distance between circle points given by their angles."""
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b) + np.pi, 2 * np.pi) - np.pi)
    return d


def _cluster_angles(theta: np.ndarray, tol: float) -> list:
    """Group indices of ``theta`` whose angles chain together within ``tol``."""
    order = np.argsort(theta)
    groups = [[order[0]]]
    for prev, cur in zip(order[:-1], order[1:]):
        if theta[cur] - theta[prev] < tol:
            groups[-1].append(cur)
        else:
            groups.append([cur])
    if len(groups) > 1 and theta[order[0]] + 2 * np.pi - theta[order[-1]] < tol:
        groups[0] = groups.pop() + groups[0]
    return groups


def unitary_eig(U, cluster_tol: float = CLUSTER_TOL):
    """Eigenvalues and eigenspaces of a unitary matrix.

    Uses the complex Schur form, which for a normal matrix is diagonal up to
    rounding; the Schur vectors are then an orthonormal eigenbasis.

    Returns
    -------
    list of (complex, Frame)
        Distinct eigenvalues (on the unit circle, sorted by angle in
        ``[0, 2*pi)``) with orthonormal bases of their eigenspaces.

    Raises
    ------
    NotUnitaryError
        If ``||U^H U - I||_F >= 1e-8``.
    """
    U = check_unitary(U)
    n = U.shape[0]
    if n == 0:
        return []
    T, Z = scipy.linalg.schur(U, output="complex")
    lam = np.diag(T)
    theta = wrap_angle(np.angle(lam))
    pairs = []
    for idx in _cluster_angles(theta, cluster_tol):
        mean = np.mean(lam[idx] / np.abs(lam[idx]))
        ev = mean / abs(mean)
        pairs.append((wrap_angle(np.angle(ev)), ev, Frame(Z[:, idx])))
    # ordering after wrap-around merges
    pairs.sort(key=lambda p: p[0])
    return [(ev, fr) for _, ev, fr in pairs]


def psd_sqrt(P, herm_tol: float = 1e-10, neg_tol: float = 1e-8) -> np.ndarray:
    """Positive square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-neg_tol, 0)`` and eigenvalues at rounding level are
    set to zero before taking roots, so exact projections come back as exact
    projections instead of acquiring ``1e-8``-sized noise.
    """
    P = as_cmatrix(P)
    if P.shape[0] != P.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {P.shape}")
    scale = max(1.0, float(np.linalg.norm(P, 2))) if P.size else 1.0
    asym = float(np.linalg.norm(P - P.conj().T)) if P.size else 0.0
    if asym > herm_tol * scale * max(1, P.shape[0]):
        raise InvalidInputError(f"matrix is not Hermitian: ||P - P^H||_F = {asym:.3e}")
    w, v = np.linalg.eigh(0.5 * (P + P.conj().T))
    if w.size and w[0] < -neg_tol * scale:
        raise NotPSDError(float(w[0]))
    floor = 64 * np.finfo(float).eps * scale * max(1, P.shape[0])
    w = np.where(w > floor, w, 0.0)
    Q = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (Q + Q.conj().T)


def solve(A, b, max_condition: float, error=None):
    """Pivoted LU solve of ``A x = b`` refusing ill-conditioned systems.

    The condition number is the LAPACK 1-norm estimate taken from the LU
    factors, so the check costs no more than the solve.  ``error`` is the
    exception class raised (called as ``error(cond)``).
    """
    error = error or NumericalSingularityError
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return np.asarray(b, dtype=complex)
    anorm = np.linalg.norm(A, 1)
    lu, piv, info = _getrf(A)
    if info > 0 or anorm == 0:
        raise error(float("inf"))
    rcond, _ = _gecon(lu, anorm, norm="1")
    cond = 1.0 / rcond if rcond > 0 else float("inf")
    if not np.isfinite(cond) or cond > max_condition:
        raise error(float(cond))
    return scipy.linalg.lu_solve((lu, piv), b)


def krylov_dim(U, basis, tol: float = RANK_TOL) -> int:
    """Dimension of ``span{U^m x : x in cols(basis), m in Z}`` for unitary ``U``.

    Powers ``-N..N`` with ``N`` the dimension always suffice.
    """
    U = as_cmatrix(U)
    B = basis.basis if isinstance(basis, Frame) else as_cmatrix(basis)
    cols, X, Y = [B], B, B
    for _ in range(U.shape[0]):
        X = U @ X
        Y = U.conj().T @ Y
        cols += [X, Y]
    return orthonormal_columns(np.hstack(cols), tol).dim


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from QR of a complex Gaussian matrix."""
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_frame(n: int, k: int, rng: np.random.Generator) -> Frame:
    G = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    Q, _ = np.linalg.qr(G)
    return Frame(Q)


# -- JSON encoding -----------------------------------------------------------

def matrix_to_json(M) -> dict:
    M = as_cmatrix(M)
    flat = M.reshape(-1)
    return {"rows": M.shape[0], "cols": M.shape[1],
            "data": [[float(x.real), float(x.imag)] for x in flat]}


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed matrix JSON: {exc!r}") from None
    if len(data) != rows * cols:
        raise InvalidInputError(f"matrix JSON has {len(data)} entries, expected {rows}x{cols}")
    try:
        arr = np.array([complex(re, im) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed matrix entry: {exc}") from None
    return as_cmatrix(arr.reshape(rows, cols))


def vector_to_json(v) -> list:
    return [[float(x.real), float(x.imag)] for x in as_vector(v)]


def vector_from_json(data) -> np.ndarray:
    try:
        return as_vector([complex(re, im) for re, im in data])
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed vector JSON: {exc}") from None

"""Unitary perturbations of c.n.u. partial isometries and their spectra.

Let ``S`` be a completely nonunitary partial isometry with equal defect
indices ``d``.  ``K`` (orthocomplement of the final space) is the range of
``D_{S*}`` and ``K~`` (orthocomplement of the initial space, i.e. the
kernel of ``S``) the range of ``D_S``.  For a unitary ``A : K~ -> K``

    U_A = S + K A K~^H

is unitary, and its eigenvalues are exactly the points ``zeta`` of the
circle where ``Theta_S(zeta) - A`` is singular.  For ``d = 1`` and
``A = [alpha]`` the spectral measure of ``U_alpha`` at ``k`` is the Clark
measure of the scalar characteristic function ``phi``.

Two independent spectrum computations are provided: a direct eigensolve of
``U_A``, and root finding for ``det(Theta_S(z) - A) det(I - z S^H)``, a
polynomial of degree at most ``n`` recovered by interpolation.

In finite dimension the spectral radius of ``S`` is below one, so
``Theta_S`` continues analytically across the whole circle; the spectrum is
exactly the zero set above.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .compression_engine import Certificate
from ._parallel import parallel_map as _grid_map
from .config import CLUSTER_TOL, DEFAULT_TOLERANCES, DEFAULT_Z_GRID, MAX_CONDITION, RANK_TOL, ZGrid
from .contractions import DefectData, characteristic_function, cnu_split, defect_data, is_partial_isometry
from .errors import ConstructionInconsistencyError, DimensionMismatchError, InvalidInputError
from .linalg_core import (
    Frame, arc_distance, as_cmatrix, as_vector, check_unitary, krylov_dim, random_unitary,
    unitarity_residual, unitary_eig, wrap_angle,
)
from .ov_measures import ScalarMeasure, matrix_element_measure, spectral_measure_of_unitary

log = logging.getLogger(__name__)

__all__ = [
    "PerturbationSetup", "SpectrumReport", "perturbation_setup", "unitary_perturbation",
    "char_theta", "scalar_char_function", "clark_measure", "spectrum_via_char",
    "cyclicity_check", "arc_hausdorff", "random_cnu_partial_isometry", "companion_roots",
    "shift_operator",
]

UNIT_ROOT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PerturbationSetup:
    S: np.ndarray
    K: Frame
    K_tilde: Frame
    defect: DefectData  # frames pinned to (K_tilde -> K)

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @property
    def index(self) -> int:
        return self.K.dim

    @property
    def k(self) -> np.ndarray:
        return self.K.basis[:, 0]

    @property
    def k_tilde(self) -> np.ndarray:
        return self.K_tilde.basis[:, 0]


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigen_direct: np.ndarray
    roots_via_char: np.ndarray
    hausdorff_gap: float
    det_at_eigen: float
    method: str
    atoms: Optional[ScalarMeasure] = None

    def to_dict(self) -> dict:
        out = {
            "eigen_direct": [float(t) for t in self.eigen_direct],
            "roots_via_char": [float(t) for t in self.roots_via_char],
            "hausdorff_gap": float(self.hausdorff_gap),
            "det_at_eigen": float(self.det_at_eigen),
            "method": self.method,
        }
        if self.atoms is not None:
            out["atoms"] = [{"theta": float(t), "mass": float(m.real)}
                            for t, m in zip(self.atoms.thetas, self.atoms.masses)]
        return out


def _frame_led_by(v, F: Frame, name: str) -> Frame:
    """Basis of ``F`` whose first column is the unit vector ``v`` (which must lie in ``F``)."""
    v = as_vector(v, F.ambient_dim, name)
    if abs(np.linalg.norm(v) - 1) > 1e-10:
        raise InvalidInputError(f"{name} must be a unit vector")
    if np.linalg.norm(v - F.projector() @ v) > 1e-9:
        raise InvalidInputError(f"{name} does not lie in its defect space")
    c = F.coords(v)
    # complete c to an orthonormal basis of C^d
    Q, _ = np.linalg.qr(np.column_stack([c, np.eye(F.dim)]))
    Q = Q[:, :F.dim]
    Q[:, 0] = c  # QR may flip the phase of the first column
    return Frame(F.basis @ Q)


def perturbation_setup(S, k=None, k_tilde=None, require_cnu: bool = True) -> PerturbationSetup:
    """Validate a partial isometry and fix the defect bases used by its perturbations.

    ``k`` and ``k_tilde`` default to the first columns of the defect frames.
    ``require_cnu=False`` skips the c.n.u. check; only meant for building
    counterexamples.
    """
    S = as_cmatrix(S, "S")
    if S.shape[0] != S.shape[1]:
        raise DimensionMismatchError(f"S must be square, got shape {S.shape}")
    if not is_partial_isometry(S):
        raise InvalidInputError("S is not a partial isometry")
    dd = defect_data(S)
    if dd.index_t != dd.index_ts:
        raise InvalidInputError(f"defect indices differ: {dd.index_t} != {dd.index_ts}")
    if dd.index_t == 0:
        raise InvalidInputError("S is unitary; there is nothing to perturb")
    if require_cnu:
        unitary_part, _ = cnu_split(S)
        if unitary_part.dim:
            raise InvalidInputError(f"S has a unitary part of dimension {unitary_part.dim}")
    K, Kt = dd.frame_dts, dd.frame_dt
    if k is not None:
        K = _frame_led_by(k, K, "k")
    if k_tilde is not None:
        Kt = _frame_led_by(k_tilde, Kt, "k_tilde")
    pinned = defect_data(S, frame_dt=Kt, frame_dts=K)
    return PerturbationSetup(S, K, Kt, pinned)


def _as_A(setup: PerturbationSetup, A) -> np.ndarray:
    if np.isscalar(A):
        if setup.index != 1:
            raise DimensionMismatchError(f"scalar alpha needs defect index 1, have {setup.index}")
        A = np.array([[A]], dtype=complex)
    A = as_cmatrix(A, "A")
    if A.shape != (setup.index, setup.index):
        raise DimensionMismatchError(f"A must be {setup.index}x{setup.index}, got {A.shape}")
    return check_unitary(A, 1e-10)


def unitary_perturbation(setup: PerturbationSetup, A) -> np.ndarray:
    """``U_A``: equal to ``S`` on the initial space and to ``A`` from ``K~`` to ``K``.

    ``A`` is a unitary in ``(K~, K)`` coordinates, or a unimodular scalar
    ``alpha`` when the defect index is one.
    """
    A = _as_A(setup, A)
    U = setup.S + setup.K.basis @ A @ setup.K_tilde.basis.conj().T
    res = unitarity_residual(U)
    if res > 1e-10:
        raise ConstructionInconsistencyError("unitarity of U_A", res)
    return U


def char_theta(setup: PerturbationSetup, z: complex, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """``Theta_S(z)`` as a ``d x d`` matrix in ``(K~, K)`` coordinates; ``|z| <= 1`` allowed."""
    return characteristic_function(setup.defect, z, max_condition).theta


def scalar_char_function(setup: PerturbationSetup, z: complex) -> complex:
    """``phi(z)`` with ``Theta_S(z) k~ = phi(z) k``."""
    if setup.index != 1:
        raise DimensionMismatchError(f"scalar characteristic function needs defect index 1, have {setup.index}")
    return complex(char_theta(setup, z)[0, 0])


def clark_measure(setup: PerturbationSetup, alpha: complex, grid: ZGrid = DEFAULT_Z_GRID,
                  cluster_tol: float = CLUSTER_TOL,
                  tol: float = DEFAULT_TOLERANCES["clark"]) -> ScalarMeasure:
    """Clark measure ``sigma_alpha`` of ``phi``: spectral measure of ``U_alpha`` at ``k``.

    The attached certificate is the largest deviation on the grid between
    ``(alpha + phi(z))/(alpha - phi(z))`` and the Herglotz integral of
    ``sigma_alpha``.
    """
    alpha = complex(alpha)
    U = unitary_perturbation(setup, alpha)
    E = spectral_measure_of_unitary(U, cluster_tol)
    sigma = matrix_element_measure(E, setup.k, setup.k)

    def one(z):
        phi = scalar_char_function(setup, z)
        return abs((alpha + phi) / (alpha - phi) - sigma.herglotz(z))

    resid = max(_grid_map(one, grid.points()))
    return ScalarMeasure(sigma.thetas, sigma.masses, Certificate(float(resid), grid.to_dict(), tol))


def arc_hausdorff(a, b) -> float:
    """Hausdorff distance between two finite sets of circle points (angles), arc metric."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return float("inf")
    D = arc_distance(a[:, None], b[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def companion_roots(coeffs) -> np.ndarray:
    """Roots of ``sum_m c_m z^m`` (ascending coefficients) via the companion matrix."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    if c.size == 0:
        raise InvalidInputError("zero polynomial has no isolated roots")
    # drop leading coefficients at rounding level relative to the largest one
    scale = np.max(np.abs(c))
    while c.size > 1 and abs(c[-1]) < 1e-13 * scale:
        c = c[:-1]
    deg = c.size - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    C = np.zeros((deg, deg), dtype=complex)
    C[1:, :-1] = np.eye(deg - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return np.linalg.eigvals(C)


def _char_polynomial_value(setup: PerturbationSetup, A: np.ndarray, z: complex) -> complex:
    q = np.linalg.det(np.eye(setup.n) - z * setup.S.conj().T)
    return complex(np.linalg.det(char_theta(setup, z) - A) * q)


def _interpolated_roots(setup: PerturbationSetup, A: np.ndarray, max_condition: float):
    n = setup.n
    nodes = 0.9 * np.exp(2j * np.pi * np.arange(n + 1) / (n + 1))
    V = np.vander(nodes, n + 1, increasing=True)
    if np.linalg.cond(V) > max_condition:
        return None
    vals = np.array([_char_polynomial_value(setup, A, z) for z in nodes])
    coeffs = np.linalg.solve(V, vals)
    roots = companion_roots(coeffs)
    roots = roots[np.abs(np.abs(roots) - 1) < UNIT_ROOT_TOL]
    # Newton polish on the recovered polynomial
    p = coeffs[::-1]
    dp = np.polyder(p)
    for _ in range(3):
        step = np.polyval(p, roots) / np.polyval(dp, roots)
        roots = roots - np.where(np.isfinite(step), step, 0)
    return wrap_angle(np.angle(roots))


def _boundary_newton_roots(setup: PerturbationSetup, A: np.ndarray, samples: int | None = None):
    """Roots of ``theta -> det(Theta_S(e^{i theta}) - A)`` by grid search and Newton in ``theta``."""
    samples = samples or 64 * setup.n

    def g(t):
        return np.linalg.det(char_theta(setup, np.exp(1j * t)) - A)

    grid = 2 * np.pi * np.arange(samples) / samples
    mags = np.array([abs(g(t)) for t in grid])
    local = [i for i in range(samples)
             if mags[i] <= mags[i - 1] and mags[i] <= mags[(i + 1) % samples]]
    found = []
    h = 1e-7
    for i in local:
        t = grid[i]
        for _ in range(50):
            gt = g(t)
            deriv = (g(t + h) - g(t - h)) / (2 * h)
            if deriv == 0:
                break
            step = (gt / deriv).real
            t -= step
            if abs(step) < 1e-15:
                break
        if abs(g(t)) < 1e-9:
            found.append(wrap_angle(t))
    return _dedupe(np.array(found))


def _dedupe(thetas: np.ndarray, tol: float = CLUSTER_TOL) -> np.ndarray:
    out = []
    for t in np.sort(np.asarray(thetas, dtype=float)):
        if not out or arc_distance(t, out[-1]) > tol:
            out.append(t)
    if len(out) > 1 and arc_distance(out[0], out[-1]) <= tol:
        out.pop()
    return np.array(out)


def spectrum_via_char(setup: PerturbationSetup, A, cluster_tol: float = CLUSTER_TOL,
                      max_condition: float = MAX_CONDITION, method: str = "auto") -> SpectrumReport:
    """Cross-validate the spectrum of ``U_A`` against the characteristic-function criterion.

    ``method`` is ``"auto"`` (interpolation, falling back to boundary Newton
    if the Vandermonde system is ill-conditioned), ``"interpolation"`` or
    ``"newton"``.  The report records the path taken.
    """
    A = _as_A(setup, A)
    U = unitary_perturbation(setup, A)
    eig = np.sort(np.array([wrap_angle(np.angle(ev)) for ev, _ in unitary_eig(U, cluster_tol)]))

    roots = None
    used = method
    if method in ("auto", "interpolation"):
        roots = _interpolated_roots(setup, A, max_condition)
        used = "interpolation"
        if roots is None:
            if method == "interpolation":
                raise InvalidInputError("interpolation system is ill-conditioned")
            log.warning("Vandermonde interpolation ill-conditioned; using boundary Newton")
    if roots is None:
        roots = _boundary_newton_roots(setup, A)
        used = "newton"
    roots = _dedupe(roots, cluster_tol)

    det_at = max((abs(np.linalg.det(char_theta(setup, np.exp(1j * t)) - A)) for t in eig), default=0.0)
    atoms = None
    if setup.index == 1:
        sigma = matrix_element_measure(spectral_measure_of_unitary(U, cluster_tol), setup.k, setup.k)
        atoms = sigma
    return SpectrumReport(eig, np.sort(roots), arc_hausdorff(eig, roots), float(det_at), used, atoms)


def cyclicity_check(setup: PerturbationSetup, A, tol: float = RANK_TOL) -> bool:
    """Whether ``{U_A^m k : k in K, m in Z}`` spans the whole space."""
    U = unitary_perturbation(setup, A)
    return krylov_dim(U, setup.K, tol) == setup.n


def shift_operator(n: int) -> np.ndarray:
    """Truncated shift ``e_1 -> e_2 -> ... -> e_n -> 0``: the basic c.n.u. partial isometry."""
    return np.eye(n, k=-1, dtype=complex)


def random_cnu_partial_isometry(n: int, d: int, rng: np.random.Generator,
                                margin: float = 1e-6, max_tries: int = 100) -> np.ndarray:
    """Seeded c.n.u. partial isometry with both defect indices ``d``.

    ``W diag(1, ..., 1, 0, ..., 0)`` for a Haar unitary ``W``; redrawn until
    the spectral radius is below ``1 - margin``.
    """
    if not 1 <= d <= n:
        raise InvalidInputError(f"need 1 <= d <= n, got d={d}, n={n}")
    mask = np.r_[np.ones(n - d), np.zeros(d)]
    for _ in range(max_tries):
        S = random_unitary(n, rng) * mask
        if np.max(np.abs(np.linalg.eigvals(S))) < 1 - margin:
            return S
    raise RuntimeError("could not draw a c.n.u. partial isometry")

"""Naimark dilation of finite POVMs.

A POVM ``B`` on ``C^k`` with atoms ``(xi_j, B_j)`` is dilated to the block
space ``C^{m*k}``: the isometry ``V k = (B_1^{1/2} k, ..., B_m^{1/2} k)``
embeds ``C^k``, the block coordinate projections ``E_j`` form a PVM, and
``V^H E_j V = B_j``.  The unitary of the dilation is ``sum_j xi_j E_j``.

The Cayley picture is used to *verify* the construction: the Herglotz
transform ``F(z)`` of ``B`` must agree with both the compressed resolvent of
the dilating unitary and with ``(U~ + Theta_S)(U~ - Theta_S)^{-1}`` built from
the compression of that unitary to ``ran V``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .compression_engine import herglotz_lhs_matrix, herglotz_rhs_matrix, split
from ._parallel import parallel_map as _grid_map
from .config import CLUSTER_TOL, DEFAULT_TOLERANCES, DEFAULT_Z_GRID, MAX_CONDITION, RANK_TOL, ZGrid
from .errors import InvalidMeasureError, NumericalSingularityError
from .linalg_core import Frame, krylov_dim, matrix_to_json, orthonormal_columns, psd_sqrt, solve
from .ov_measures import (
    PVM, DiscreteOVMeasure, align_atoms, herglotz_transform, measure_to_json, validate,
)

__all__ = [
    "Dilation", "DilationReport", "cayley_theta", "inverse_cayley", "block_dilation",
    "minimalize", "verify_dilation", "krylov_dim", "perturb_projector", "dilation_to_json",
]


@dataclass(frozen=True, eq=False)
class Dilation:
    big_dim: int
    U: np.ndarray
    embed: Frame
    E: DiscreteOVMeasure
    minimal: bool = False


@dataclass(frozen=True)
class DilationReport:
    compression_residual: float
    herglotz_residual: float
    cayley_residual: float
    spectral_residual: float
    unmatched_atoms: int
    tolerance: float
    grid: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.compression_residual, self.herglotz_residual,
                   self.cayley_residual, self.spectral_residual)

    @property
    def passed(self) -> bool:
        return self.unmatched_atoms == 0 and self.max_residual < self.tolerance

    def to_dict(self) -> dict:
        return {
            "compression_residual": self.compression_residual,
            "herglotz_residual": self.herglotz_residual,
            "cayley_residual": self.cayley_residual,
            "spectral_residual": self.spectral_residual,
            "unmatched_atoms": self.unmatched_atoms,
            "tolerance": self.tolerance,
            "grid": self.grid,
            "pass": self.passed,
        }


class _InvalidCayleyInput(NumericalSingularityError):
    def __init__(self, condition):
        super().__init__(condition, f"F(z) + I is numerically singular (condition {condition:.3e}); "
                                    "this cannot happen for a valid POVM")


def cayley_theta(povm: DiscreteOVMeasure, z: complex, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """``Theta(z) = (F(z) - I)(F(z) + I)^{-1}`` with ``F`` the Herglotz transform.

    ``F(z)`` and ``F(z) + I`` commute, so a single left solve suffices.
    """
    F = herglotz_transform(povm, z)
    I = np.eye(povm.dim)
    return solve(F + I, F - I, max_condition, _InvalidCayleyInput)


def inverse_cayley(theta: np.ndarray, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """``F = (I + Theta)(I - Theta)^{-1}``."""
    I = np.eye(theta.shape[0])
    return solve(I - theta, I + theta, max_condition)


def block_dilation(povm: DiscreteOVMeasure) -> Dilation:
    """Block-diagonal Naimark dilation on ``C^{m*k}`` (not minimal in general)."""
    report = validate(povm)
    if not report.ok:
        raise InvalidMeasureError(report)
    k, m = povm.dim, len(povm)
    roots = [psd_sqrt(W) for W in povm.weights]
    V = np.vstack(roots)
    G = V.conj().T @ V
    if np.linalg.norm(G - np.eye(k)) > 1e-12:
        # weights summing to I only approximately; polar-correct V
        w, v = np.linalg.eigh(G)
        V = V @ ((v / np.sqrt(w)) @ v.conj().T)
    embed = Frame(V)
    big = m * k
    blocks = np.zeros((m, big, big), dtype=complex)
    for j in range(m):
        blocks[j, j * k:(j + 1) * k, j * k:(j + 1) * k] = np.eye(k)
    E = DiscreteOVMeasure(big, povm.thetas, blocks, PVM)
    U = np.diag(np.repeat(povm.points, k))
    return Dilation(big, U, embed, E, minimal=False)


def minimalize(d: Dilation, tol: float = RANK_TOL) -> Dilation:
    """Restrict a dilation to the span of ``{E_j K}``.

    The span is reducing for every ``E_j``, hence for ``U``.  Atoms whose
    restricted projection vanishes are dropped.  A dilation that is already
    minimal is returned unchanged (apart from the flag).
    """
    cols = np.hstack([W @ d.embed.basis for W in d.E.weights])
    Q = orthonormal_columns(cols, tol)
    if Q.dim == d.big_dim:
        return replace(d, minimal=True)
    B = Q.basis
    W = np.einsum("ai,jab,bk->jik", B.conj(), d.E.weights, B)
    keep = np.linalg.norm(W, axis=(1, 2)) > 1e-12
    E = DiscreteOVMeasure(Q.dim, d.E.thetas[keep], W[keep], PVM)
    U = B.conj().T @ d.U @ B
    embed = Frame(B.conj().T @ d.embed.basis)
    return Dilation(Q.dim, U, embed, E, minimal=True)


def verify_dilation(d: Dilation, povm: DiscreteOVMeasure, grid: ZGrid = DEFAULT_Z_GRID,
                    tol: float = DEFAULT_TOLERANCES["compression"],
                    cluster_tol: float = CLUSTER_TOL) -> DilationReport:
    """Certify a dilation against the POVM it claims to dilate.

    Residuals reported:

    * compression: ``max_j ||embed^H E_j embed - B_j||_F`` after matching
      atoms by circle point (unmatched non-null atoms are counted);
    * herglotz: ``max_z ||F(z) - embed^H (U+z)(U-z)^{-1} embed||_2``;
    * cayley: ``max_z ||F(z) - (U~ + Theta_S(z))(U~ - Theta_S(z))^{-1}||_2``,
      with ``U~`` and ``Theta_S`` from compressing ``U`` to ``embed``;
    * spectral: ``||U - sum_j xi_j E_j||_F``.
    """
    Vb = d.embed.basis
    compressed = DiscreteOVMeasure(
        povm.dim, d.E.thetas, np.einsum("ai,jab,bk->jik", Vb.conj(), d.E.weights, Vb))
    pairs, unmatched = align_atoms(povm, compressed, cluster_tol)
    comp = 0.0
    for i, j in pairs:
        comp = max(comp, float(np.linalg.norm(compressed.weights[j] - povm.weights[i])))
    for side, idx in unmatched:
        w = povm.weights[idx] if side == "a" else compressed.weights[idx]
        comp = max(comp, float(np.linalg.norm(w)))

    spec = float(np.linalg.norm(d.U - np.tensordot(d.E.points, d.E.weights, axes=1)))

    ct = split(d.U, d.embed)

    def one(z):
        F = herglotz_transform(povm, z)
        lhs = herglotz_lhs_matrix(d.U, z, d.embed)
        rhs = herglotz_rhs_matrix(ct, z)
        return float(np.linalg.norm(F - lhs, 2)), float(np.linalg.norm(F - rhs, 2))

    vals = _grid_map(one, grid.points())
    herg = max(v[0] for v in vals)
    cay = max(v[1] for v in vals)
    return DilationReport(comp, herg, cay, spec, len(unmatched), tol, grid.to_dict())


def perturb_projector(d: Dilation, eps: float, atom: int = 0) -> Dilation:
    """Fault injection: add ``eps * v v^H`` to one projection, ``v`` the first embedded basis vector.

    ``U`` is left alone, so only the compression and spectral residuals see
    the fault; both move by exactly ``eps``.
    """
    v = d.embed.basis[:, 0]
    W = np.array(d.E.weights)
    W[atom] = W[atom] + eps * np.outer(v, v.conj())
    E = DiscreteOVMeasure(d.E.dim, d.E.thetas, W, d.E.kind)
    return replace(d, E=E)


def dilation_to_json(d: Dilation, report: DilationReport | None = None) -> dict:
    out = {"big_dim": d.big_dim, "minimal": d.minimal, "U": matrix_to_json(d.U),
           "embed": matrix_to_json(d.embed.basis), "E": measure_to_json(d.E)}
    if report is not None:
        out["report"] = report.to_dict()
    return out

"""Finite atomic operator-valued measures on the unit circle.

A measure is a list of circle points ``exp(i*theta_j)`` carrying positive
matrix weights ``W_j``.  The weights of a generalized spectral measure
(POVM) sum to the identity; for an ordinary spectral measure (PVM) they are
also mutually orthogonal projections.

Inner products are linear in the first slot: ``<x | y> = y^H x``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import ATOM_DROP_TOL, CLUSTER_TOL
from .errors import DimensionMismatchError, DomainError, InvalidInputError
from .linalg_core import (
    Frame, arc_distance, as_cmatrix, as_vector, matrix_from_json, matrix_to_json,
    unitary_eig, wrap_angle,
)

__all__ = [
    "PVM", "POVM", "DiscreteOVMeasure", "ScalarMeasure", "Violation", "ValidationReport",
    "validate", "spectral_measure_of_unitary", "compress_measure", "herglotz_transform",
    "herglotz_kernel", "matrix_element_measure", "random_povm", "measure_to_json",
    "measure_from_json", "align_atoms",
]

PVM = "pvm"
POVM = "povm"


@dataclass(frozen=True, eq=False)
class DiscreteOVMeasure:
    """Operator-valued measure with finitely many atoms.

    ``thetas`` has shape ``(m,)`` and ``weights`` shape ``(m, dim, dim)``.
    ``certificate`` is an optional verification record attached by the
    constructor that produced the measure.
    """

    dim: int
    thetas: np.ndarray
    weights: np.ndarray
    kind: str = POVM
    certificate: Optional[object] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in (PVM, POVM):
            raise InvalidInputError(f"kind must be 'pvm' or 'povm', got {self.kind!r}")
        if self.dim < 1:
            raise InvalidInputError("measure dimension must be at least 1")
        th = wrap_angle(np.asarray(self.thetas, dtype=float).reshape(-1))
        th = np.atleast_1d(th)
        W = np.asarray(self.weights, dtype=complex).reshape(-1, self.dim, self.dim)
        if W.shape[0] != th.shape[0]:
            raise InvalidInputError(f"{th.shape[0]} points but {W.shape[0]} weights")
        if not (np.all(np.isfinite(th)) and np.all(np.isfinite(W))):
            raise InvalidInputError("measure has non-finite entries")
        th.setflags(write=False)
        W.setflags(write=False)
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "weights", W)

    @property
    def points(self) -> np.ndarray:
        return np.exp(1j * self.thetas)

    @property
    def atoms(self):
        return list(zip(self.thetas, self.weights))

    def __len__(self):
        return len(self.thetas)

    def total(self) -> np.ndarray:
        return self.weights.sum(axis=0)


@dataclass(frozen=True, eq=False)
class ScalarMeasure:
    """Complex scalar atomic measure, e.g. ``Delta -> <E(Delta) h1 | h2>``."""

    thetas: np.ndarray
    masses: np.ndarray
    certificate: Optional[object] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "thetas", np.atleast_1d(wrap_angle(np.asarray(self.thetas, float))))
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=complex).reshape(-1))

    def total(self) -> complex:
        return complex(self.masses.sum())

    def support(self, tol: float = 1e-12) -> np.ndarray:
        """Angles of atoms with ``|mass| > tol``, sorted."""
        return np.sort(self.thetas[np.abs(self.masses) > tol])

    def herglotz(self, z) -> complex:
        return complex(np.sum(herglotz_kernel(self.thetas, z) * self.masses))


@dataclass(frozen=True)
class Violation:
    invariant: str
    magnitude: float
    atom: Optional[int] = None

    def __str__(self):
        where = "" if self.atom is None else f" (atom {self.atom})"
        return f"{self.invariant}{where}: {self.magnitude:.3e}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "valid" if self.ok else "; ".join(map(str, self.violations))

    def names(self) -> set:
        return {v.invariant for v in self.violations}


def validate(m: DiscreteOVMeasure, psd_tol: float = 1e-10, sum_tol: float = 1e-9,
             pvm_tol: float = 1e-9, cluster_tol: float = CLUSTER_TOL) -> ValidationReport:
    """Check the defining properties of a generalized (or ordinary) spectral measure.

    Never raises; every violated invariant is listed with its magnitude.
    PVM checks (idempotence, mutual orthogonality) only run for ``kind='pvm'``.
    """
    out = []
    I = np.eye(m.dim)
    for j, W in enumerate(m.weights):
        herm = float(np.linalg.norm(W - W.conj().T))
        if herm > psd_tol:
            out.append(Violation("hermitian", herm, j))
        lo = float(np.linalg.eigvalsh(0.5 * (W + W.conj().T))[0])
        if lo < -psd_tol:
            out.append(Violation("positive", -lo, j))
    total = float(np.linalg.norm(m.total() - I)) if len(m) else float(np.linalg.norm(I))
    if total > sum_tol:
        out.append(Violation("sum_to_identity", total))
    th = m.thetas
    for i in range(len(th)):
        for j in range(i + 1, len(th)):
            gap = float(arc_distance(th[i], th[j]))
            if gap <= cluster_tol:
                out.append(Violation("distinct_points", gap, j))
    if m.kind == PVM:
        for j, W in enumerate(m.weights):
            idem = float(np.linalg.norm(W @ W - W))
            if idem > pvm_tol:
                out.append(Violation("idempotent", idem, j))
        for i in range(len(m)):
            for j in range(i + 1, len(m)):
                orth = float(np.linalg.norm(m.weights[i] @ m.weights[j]))
                if orth > pvm_tol:
                    out.append(Violation("orthogonal", orth, j))
    return ValidationReport(tuple(out))


def spectral_measure_of_unitary(U, cluster_tol: float = CLUSTER_TOL) -> DiscreteOVMeasure:
    """Eigenprojection measure of a unitary: one atom per distinct eigenvalue."""
    U = as_cmatrix(U, "U")
    pairs = unitary_eig(U, cluster_tol)
    thetas = np.array([np.angle(ev) for ev, _ in pairs])
    weights = np.array([fr.projector() for _, fr in pairs])
    return DiscreteOVMeasure(U.shape[0], thetas, weights, PVM)


def compress_measure(m: DiscreteOVMeasure, K: Frame, drop_tol: float = ATOM_DROP_TOL) -> DiscreteOVMeasure:
    """Compression ``Delta -> P_K m(Delta)|_K`` written in the basis of ``K``."""
    if K.ambient_dim != m.dim:
        raise DimensionMismatchError(f"frame lives in C^{K.ambient_dim}, measure in C^{m.dim}")
    if K.dim == 0:
        raise DimensionMismatchError("cannot compress to the zero subspace")
    B = K.basis
    W = np.einsum("ai,jab,bk->jik", B.conj(), m.weights, B)
    W = 0.5 * (W + np.conj(np.swapaxes(W, 1, 2)))
    keep = np.linalg.norm(W, axis=(1, 2)) >= drop_tol
    return DiscreteOVMeasure(K.dim, m.thetas[keep], W[keep], POVM)


def herglotz_kernel(thetas, z):
    xi = np.exp(1j * np.asarray(thetas))
    return (xi + z) / (xi - z)


def herglotz_transform(m: DiscreteOVMeasure, z: complex) -> np.ndarray:
    """``F(z) = sum_j (xi_j + z)/(xi_j - z) W_j`` for ``|z| < 1``."""
    z = complex(z)
    if not abs(z) < 1 - 1e-9:
        raise DomainError(f"Herglotz transform needs |z| < 1, got |z| = {abs(z)}")
    return np.tensordot(herglotz_kernel(m.thetas, z), m.weights, axes=1)


def matrix_element_measure(m: DiscreteOVMeasure, h1, h2) -> ScalarMeasure:
    """Scalar measure ``Delta -> <m(Delta) h1 | h2>``.

    Hermitian symmetric: swapping ``h1`` and ``h2`` conjugates the masses.
    """
    h1 = as_vector(h1, m.dim, "h1")
    h2 = as_vector(h2, m.dim, "h2")
    masses = np.einsum("a,jab,b->j", h2.conj(), m.weights, h1)
    if np.array_equal(h1, h2):
        masses = masses.real.astype(complex)
    return ScalarMeasure(m.thetas.copy(), masses)


def align_atoms(a: DiscreteOVMeasure, b: DiscreteOVMeasure, cluster_tol: float = CLUSTER_TOL,
                null_tol: float = ATOM_DROP_TOL):
    """Pair atoms of two measures by circle point.

    Returns ``(pairs, unmatched)`` where ``pairs`` lists ``(i, j)`` index
    pairs and ``unmatched`` lists ``("a"|"b", index)`` for atoms without a
    partner whose weight norm exceeds ``null_tol``.
    """
    pairs, used, unmatched = [], set(), []
    for i, ta in enumerate(a.thetas):
        d = arc_distance(ta, b.thetas)
        j = int(np.argmin(d)) if d.size else -1
        if j >= 0 and d[j] <= cluster_tol and j not in used:
            pairs.append((i, j))
            used.add(j)
        elif np.linalg.norm(a.weights[i]) > null_tol:
            unmatched.append(("a", i))
    for j in range(len(b)):
        if j not in used and np.linalg.norm(b.weights[j]) > null_tol:
            unmatched.append(("b", j))
    return pairs, unmatched


def random_povm(dim: int, atoms: int, rng: np.random.Generator, rank=None) -> DiscreteOVMeasure:
    """Seeded random POVM.

    Each atom starts as ``G^H G`` with ``G`` a complex Gaussian of shape
    ``(rank_j, dim)``; the family is then conjugated by ``S^{-1/2}`` with
    ``S`` the sum, so the weights sum to the identity.  ``rank`` may be an
    int or a sequence of per-atom ranks (rank-deficient atoms when
    ``rank < dim``).  Points are ``atoms`` random distinct angles.
    """
    if atoms < 1 or dim < 1:
        raise InvalidInputError("need dim >= 1 and atoms >= 1")
    ranks = [dim] * atoms if rank is None else (
        [int(rank)] * atoms if np.isscalar(rank) else [int(r) for r in rank])
    if len(ranks) != atoms or sum(ranks) < dim or min(ranks) < 1:
        raise InvalidInputError(f"atom ranks {ranks} cannot produce a POVM on C^{dim}")
    raw = []
    for r in ranks:
        G = rng.standard_normal((r, dim)) + 1j * rng.standard_normal((r, dim))
        raw.append(G.conj().T @ G)
    total = sum(raw)
    w, v = np.linalg.eigh(total)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    weights = np.array([inv_sqrt @ A @ inv_sqrt for A in raw])
    weights = 0.5 * (weights + np.conj(np.swapaxes(weights, 1, 2)))
    # equally spaced base points with jitter keep atoms well separated
    base = 2 * np.pi * np.arange(atoms) / atoms
    thetas = base + rng.uniform(0, 2 * np.pi / atoms * 0.8, size=atoms)
    return DiscreteOVMeasure(dim, thetas, weights, POVM)


def measure_to_json(m: DiscreteOVMeasure) -> dict:
    return {"dim": m.dim, "kind": m.kind,
            "atoms": [{"theta": float(t), "weight": matrix_to_json(W)} for t, W in m.atoms]}


def measure_from_json(obj) -> DiscreteOVMeasure:
    try:
        dim, kind, atoms = int(obj["dim"]), obj.get("kind", POVM), obj["atoms"]
        thetas = [float(a["theta"]) for a in atoms]
        weights = [matrix_from_json(a["weight"]) for a in atoms]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"malformed measure JSON: {exc!r}") from None
    for W in weights:
        if W.shape != (dim, dim):
            raise InvalidInputError(f"atom weight has shape {W.shape}, expected ({dim}, {dim})")
    return DiscreteOVMeasure(dim, np.array(thetas), np.array(weights).reshape(-1, dim, dim), kind)

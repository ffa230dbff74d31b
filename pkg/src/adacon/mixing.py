"""Metropolis-Hastings mixing matrices and their spectral/ergodic diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import Graph

STOCHASTIC_TOL = 1e-12


def _as_array(m: "MixingMatrix | np.ndarray") -> np.ndarray:
    if isinstance(m, MixingMatrix):
        return m.q
    return np.asarray(m, dtype=float)


@dataclass(frozen=True)
class MixingMatrix:
    """Dense doubly stochastic weight matrix aligned with a graph's edges."""

    n: int
    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float)
        if q.shape != (self.n, self.n):
            raise ValueError(f"expected shape ({self.n},{self.n}), got {q.shape}")
        row_err = np.abs(q.sum(axis=1) - 1.0).max()
        col_err = np.abs(q.sum(axis=0) - 1.0).max()
        if row_err > STOCHASTIC_TOL or col_err > STOCHASTIC_TOL:
            raise ValueError(
                f"matrix is not doubly stochastic: row err {row_err:.3e}, col err {col_err:.3e}"
            )
        if q.min() < -STOCHASTIC_TOL:
            raise ValueError(f"negative weight {q.min():.3e}")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def min_positive_entry(self) -> float:
        positive = self.q[self.q > 0]
        return float(positive.min()) if positive.size else 0.0


@dataclass(frozen=True)
class SpectralReport:
    spectral_gap: float
    ergodicity: float
    row_dissimilarity: float
    min_positive_entry: float


def metropolis_hastings(g: Graph) -> MixingMatrix:
    """Weights q_ij = 1/(1 + max(deg_i, deg_j)) on edges, diagonal fills the row."""
    deg = g.degrees
    q = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w = 1.0 / (1.0 + max(deg[i], deg[j]))
        q[i, j] = w
        q[j, i] = w
    np.fill_diagonal(q, 1.0 - q.sum(axis=1))
    return MixingMatrix(g.n, q)


def spectral_gap(m: "MixingMatrix | np.ndarray") -> float:
    """1 - max(|lambda_2|, |lambda_n|) for a symmetric stochastic matrix."""
    q = _as_array(m)
    if not np.allclose(q, q.T, atol=1e-10):
        raise ValueError("spectral_gap expects a symmetric matrix")
    lam = np.sort(np.linalg.eigvalsh(q))
    second = max(abs(lam[-2]), abs(lam[0])) if len(lam) > 1 else 0.0
    return float(1.0 - second)


def ergodicity_coefficient(m: "MixingMatrix | np.ndarray") -> float:
    """1 - min over row pairs of their overlapping probability mass."""
    q = _as_array(m)
    row_err = np.abs(q.sum(axis=1) - 1.0).max()
    if row_err > 1e-9:
        raise ValueError(f"rows must sum to 1, max error {row_err:.3e}")
    n = q.shape[0]
    min_overlap = 1.0
    for a in range(n):
        overlaps = np.minimum(q[a + 1 :], q[a]).sum(axis=1)
        if overlaps.size:
            min_overlap = min(min_overlap, float(overlaps.min()))
    return 1.0 - min_overlap


def row_dissimilarity(m: "MixingMatrix | np.ndarray") -> float:
    """max over columns of the spread between the largest and smallest entry."""
    q = _as_array(m)
    return float((q.max(axis=0) - q.min(axis=0)).max())


def product_range(ms: Sequence["MixingMatrix | np.ndarray"], r: int, s: int) -> np.ndarray:
    """Q[r:s] = Q_{s-1} x ... x Q_r; the empty product is the identity."""
    if not 0 <= r <= s <= len(ms):
        raise IndexError(f"invalid range [{r}:{s}] for sequence of length {len(ms)}")
    if r == s:
        n = _as_array(ms[0]).shape[0] if ms else 0
        return np.eye(n)
    out = _as_array(ms[r]).copy()
    for idx in range(r + 1, s):
        out = _as_array(ms[idx]) @ out
    return out


def power_iteration_norm(m: np.ndarray, max_iters: int = 10_000, rel_tol: float = 1e-10) -> float:
    """Spectral norm via power iteration on M^T M.

    Starts from the all-ones vector; if that stagnates (it can lie in the
    kernel, e.g. for mean-deviation matrices whose rows sum to zero) the
    iteration restarts from a seeded random vector.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[1]
    gram = m.T @ m

    def run(v: np.ndarray) -> float:
        est = 0.0
        for _ in range(max_iters):
            w = gram @ v
            norm = float(np.linalg.norm(w))
            if norm == 0.0:
                return 0.0
            v = w / norm
            if abs(norm - est) <= rel_tol * max(norm, 1e-300):
                return norm
            est = norm
        return est

    v0 = np.ones(n) / np.sqrt(n)
    first = run(v0)
    fallback = run(np.random.default_rng(0).standard_normal(n))
    return float(np.sqrt(max(first, fallback)))


def deviation_norm(m: "MixingMatrix | np.ndarray") -> float:
    """Spectral norm of m - (1/n) * ones, the distance from perfect averaging."""
    q = _as_array(m)
    n = q.shape[0]
    return power_iteration_norm(q - np.full((n, n), 1.0 / n))


def spectral_report(m: MixingMatrix) -> SpectralReport:
    return SpectralReport(
        spectral_gap=spectral_gap(m),
        ergodicity=ergodicity_coefficient(m),
        row_dissimilarity=row_dissimilarity(m),
        min_positive_entry=m.min_positive_entry,
    )


def cyclic_jacobi(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Kept as an implementation-language-neutral cross-check for the LAPACK
    path; production code calls np.linalg.eigh for speed.

    Returns (eigenvalues ascending, column eigenvectors).
    """
    a = np.asarray(a, dtype=float)
    if not np.allclose(a, a.T, atol=1e-10):
        raise ValueError("cyclic_jacobi expects a symmetric matrix")
    n = a.shape[0]
    d = a.copy()
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(d, -1) ** 2) * 2.0)
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(d[p, q]) <= tol / (n * n):
                    continue
                theta = (d[q, q] - d[p, p]) / (2.0 * d[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # Rotate rows/columns p and q in place: d <- R^T d R.
                row_p, row_q = d[p].copy(), d[q].copy()
                d[p] = c * row_p - s * row_q
                d[q] = s * row_p + c * row_q
                col_p, col_q = d[:, p].copy(), d[:, q].copy()
                d[:, p] = c * col_p - s * col_q
                d[:, q] = s * col_p + c * col_q
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    order = np.argsort(np.diag(d))
    return np.diag(d)[order], v[:, order]


def save_matrix_csv(m: "MixingMatrix | np.ndarray", path: str) -> None:
    q = _as_array(m)
    with open(path, "w", encoding="utf-8") as fh:
        for row in q:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def load_matrix_csv(path: str) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(x) for x in line.split(",")])
    return np.array(rows)

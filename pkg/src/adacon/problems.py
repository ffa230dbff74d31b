"""Regression objectives split across nodes, plus data generation and loading.

The network objective is F(x) = (1/n) sum_i f_i(x), where each node's
f_i averages its own data partition. All reference solutions and
optimality errors are computed against F, so unequal partitions remain
consistent with what the algorithms optimize.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class ObjectiveKind(enum.Enum):
    LINEAR = "linear"
    LOGISTIC = "logistic"


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=float)
        if features.ndim != 2 or labels.ndim != 1:
            raise ValueError("features must be N x d, labels a length-N vector")
        if features.shape[0] != labels.shape[0]:
            raise ValueError("feature and label counts disagree")
        if features.shape[0] < 1:
            raise ValueError("dataset must contain at least one sample")
        if not (np.isfinite(features).all() and np.isfinite(labels).all()):
            raise ValueError("dataset contains non-finite entries")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: ObjectiveKind
    partitions: tuple[tuple[int, ...], ...]
    lam: float = 0.0
    L: float = math.nan
    mu: float = math.nan

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError("regularization must be >= 0")
        seen: set[int] = set()
        for block in self.partitions:
            if not block:
                raise ValueError("every node needs at least one sample")
            for idx in block:
                if idx in seen:
                    raise ValueError(f"sample {idx} assigned to two partitions")
                seen.add(idx)

    @property
    def n_nodes(self) -> int:
        return len(self.partitions)


def partition_uniform(n_samples: int, n_nodes: int, seed: int) -> tuple[tuple[int, ...], ...]:
    """Seeded shuffle of the sample indices split into n contiguous blocks."""
    if n_samples < n_nodes:
        raise ValueError(f"cannot split {n_samples} samples across {n_nodes} nodes")
    perm = np.random.default_rng(seed).permutation(n_samples)
    return tuple(tuple(sorted(int(v) for v in block)) for block in np.array_split(perm, n_nodes))


def gen_linear_synthetic(n_samples: int, dim: int, noise_sigma: float, seed: int) -> Dataset:
    if n_samples < dim:
        raise ValueError("need at least as many samples as dimensions")
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n_samples, dim))
    x_true = rng.standard_normal(dim)
    labels = features @ x_true + noise_sigma * rng.standard_normal(n_samples)
    return Dataset(features, labels)


def gen_logistic_synthetic(n_samples: int, dim: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n_samples, dim))
    x_true = rng.standard_normal(dim)
    probs = _sigmoid(features @ x_true)
    labels = (rng.random(n_samples) < probs).astype(float)
    return Dataset(features, labels)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _block(data: Dataset, spec: ObjectiveSpec, i: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.asarray(spec.partitions[i], dtype=int)
    return data.features[idx], data.labels[idx]


def local_value(spec: ObjectiveSpec, data: Dataset, i: int, x: np.ndarray) -> float:
    a, b = _block(data, spec, i)
    if spec.kind is ObjectiveKind.LINEAR:
        resid = a @ x - b
        return float(resid @ resid / len(b) + spec.lam * (x @ x))
    z = a @ x
    return float((_softplus(z) - b * z).mean() + 0.5 * spec.lam * (x @ x))


def local_gradient(spec: ObjectiveSpec, data: Dataset, i: int, x: np.ndarray) -> np.ndarray:
    a, b = _block(data, spec, i)
    if spec.kind is ObjectiveKind.LINEAR:
        return 2.0 * (a.T @ (a @ x - b)) / len(b) + 2.0 * spec.lam * x
    return a.T @ (_sigmoid(a @ x) - b) / len(b) + spec.lam * x


def global_value(spec: ObjectiveSpec, data: Dataset, x: np.ndarray) -> float:
    n = spec.n_nodes
    return sum(local_value(spec, data, i, x) for i in range(n)) / n


def global_gradient(spec: ObjectiveSpec, data: Dataset, x: np.ndarray) -> np.ndarray:
    n = spec.n_nodes
    out = np.zeros_like(np.asarray(x, dtype=float))
    for i in range(n):
        out += local_gradient(spec, data, i, x)
    return out / n


def smoothness_constants(spec: ObjectiveSpec, data: Dataset) -> tuple[float, float]:
    """(L, mu) for the network objective: L covers every local f_i as well."""
    n = spec.n_nodes
    dim = data.dim
    if spec.kind is ObjectiveKind.LINEAR:
        global_hess = np.zeros((dim, dim))
        local_l = []
        for i in range(n):
            a, b = _block(data, spec, i)
            block_hess = 2.0 * (a.T @ a) / len(b)
            global_hess += block_hess
            local_l.append(float(np.linalg.eigvalsh(block_hess)[-1]) + 2.0 * spec.lam)
        global_hess = global_hess / n + 2.0 * spec.lam * np.eye(dim)
        eigs = np.linalg.eigvalsh(global_hess)
        return max(float(eigs[-1]), max(local_l)), float(eigs[0])
    # Logistic: the sigmoid derivative is at most 1/4, so the Gram bound
    # lambda_max(A^T A)/(4m) + lam dominates every Hessian.
    bound = 0.0
    global_gram = np.zeros((dim, dim))
    for i in range(n):
        a, b = _block(data, spec, i)
        gram = a.T @ a
        global_gram += gram / len(b)
        bound = max(bound, float(np.linalg.eigvalsh(gram)[-1]) / (4.0 * len(b)))
    bound = max(bound, float(np.linalg.eigvalsh(global_gram / n)[-1]) / 4.0)
    return bound + spec.lam, spec.lam


def _sample_weights(spec: ObjectiveSpec, n_samples: int) -> np.ndarray:
    # F(x) weights sample j by 1/(n * |partition containing j|).
    w = np.zeros(n_samples)
    n = spec.n_nodes
    for block in spec.partitions:
        w[list(block)] = 1.0 / (n * len(block))
    return w


def solve_reference(spec: ObjectiveSpec, data: Dataset) -> tuple[np.ndarray, float]:
    """Minimizer and optimum of the network objective.

    LINEAR solves the weighted normal equations through a Cholesky
    factorization; LOGISTIC runs damped Newton to gradient norm 1e-12.
    """
    w = _sample_weights(spec, data.n_samples)
    a = data.features
    b = data.labels
    if spec.kind is ObjectiveKind.LINEAR:
        lhs = 2.0 * (a.T * w) @ a + 2.0 * spec.lam * np.eye(data.dim)
        rhs = 2.0 * (a.T * w) @ b
        chol = np.linalg.cholesky(lhs)
        x_star = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
        return x_star, global_value(spec, data, x_star)
    if spec.lam <= 0:
        raise ValueError("logistic reference solve needs lam > 0 for strong convexity")

    def grad_at(v: np.ndarray) -> np.ndarray:
        return a.T @ (w * (_sigmoid(a @ v) - b)) + spec.lam * v

    x = np.zeros(data.dim)
    for _ in range(200):
        s = _sigmoid(a @ x)
        grad = grad_at(x)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= 1e-12:
            return x, global_value(spec, data, x)
        hess = (a.T * (w * s * (1.0 - s))) @ a + spec.lam * np.eye(data.dim)
        step = np.linalg.solve(hess, grad)
        value = global_value(spec, data, x)
        t = 1.0
        candidate = x - step
        for _ in range(60):
            candidate = x - t * step
            # Near the optimum value differences fall below float
            # resolution; a shrinking gradient still certifies progress.
            if (
                global_value(spec, data, candidate) < value
                or float(np.linalg.norm(grad_at(candidate))) < grad_norm
            ):
                break
            t /= 2.0
        x = candidate
    raise RuntimeError(f"Newton did not reach gradient norm 1e-12 (last {grad_norm:.3e})")


def load_csv_dataset(path: str, label_column: str, normalize: bool = False) -> Dataset:
    """Numeric CSV with a header row; one column holds the labels."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ValueError(f"{path}: no column named {label_column!r} in header {header}")
        label_idx = header.index(label_column)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric field ({exc})") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    table = np.array(rows)
    labels = table[:, label_idx]
    features = np.delete(table, label_idx, axis=1)
    if normalize:
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        std[std == 0.0] = 1.0
        features = (features - mean) / std
    return Dataset(features, labels)


@dataclass(frozen=True)
class NetworkObjective:
    """Bundles an objective with its data and reference solution.

    Satisfies the engines' objective protocol: per-node gradients, the
    network objective value, and f_star for optimality errors.
    """

    spec: ObjectiveSpec
    data: Dataset
    x_star: np.ndarray
    f_star: float

    @property
    def n_nodes(self) -> int:
        return self.spec.n_nodes

    def local_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        return local_gradient(self.spec, self.data, i, x)

    def global_value(self, x: np.ndarray) -> float:
        return global_value(self.spec, self.data, x)


def make_network_objective(
    kind: ObjectiveKind,
    data: Dataset,
    n_nodes: int,
    seed: int,
    lam: float = 0.0,
    partitions: Optional[Sequence[Sequence[int]]] = None,
) -> NetworkObjective:
    if partitions is None:
        partitions = partition_uniform(data.n_samples, n_nodes, seed)
    covered = {int(i) for block in partitions for i in block}
    if covered != set(range(data.n_samples)):
        raise ValueError("partitions must cover every sample exactly once")
    spec = ObjectiveSpec(
        kind=kind,
        partitions=tuple(tuple(int(i) for i in block) for block in partitions),
        lam=lam,
    )
    if kind is ObjectiveKind.LOGISTIC and not set(np.unique(data.labels)) <= {0.0, 1.0}:
        raise ValueError("logistic labels must be in {0, 1}")
    l_const, mu = smoothness_constants(spec, data)
    spec = ObjectiveSpec(kind=kind, partitions=spec.partitions, lam=lam, L=l_const, mu=mu)
    x_star, f_star = solve_reference(spec, data)
    return NetworkObjective(spec=spec, data=data, x_star=x_star, f_star=f_star)

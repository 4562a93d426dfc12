"""Core data types for pairwise binary Ising models and their graph topologies."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ConnectivityMatrix:
    """Symmetric coupling matrix with a zero diagonal."""

    weights: np.ndarray

    def __post_init__(self):
        W = np.array(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"weights must be square, got shape {W.shape}")
        if not np.array_equal(W, W.T):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(W) != 0):
            raise ValueError("weights must have a zero diagonal")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def zeros(cls, p: int) -> "ConnectivityMatrix":
        return cls(np.zeros((p, p)))

    @classmethod
    def from_edges(cls, p: int, edges) -> "ConnectivityMatrix":
        W = np.zeros((p, p))
        for i, j, w in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            W[i, j] = W[j, i] = float(w)
        return cls(W)

    def edges(self) -> list[tuple[int, int, float]]:
        iu, ju = np.nonzero(np.triu(self.weights, k=1))
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(iu, ju)]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _ in self.edges()}

    def degrees(self) -> np.ndarray:
        return np.count_nonzero(self.weights, axis=1)

    def to_dict(self) -> dict:
        return {"p": self.p, "edges": [[i, j, w] for i, j, w in self.edges()]}

    @classmethod
    def from_dict(cls, d: dict) -> "ConnectivityMatrix":
        return cls.from_edges(int(d["p"]), d["edges"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "ConnectivityMatrix":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class GraphStats:
    max_degree: int
    min_edge_weight: float | None
    width: float
    edge_set: list[tuple[int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class SampleSet:
    """n x p matrix of spins in {-1, +1}; one row per sample."""

    data: np.ndarray

    def __post_init__(self):
        Z = np.asarray(self.data)
        if Z.ndim != 2:
            raise ValueError(f"samples must be a 2-d array, got shape {Z.shape}")
        if not np.all((Z == 1) | (Z == -1)):
            raise ValueError("samples must only contain -1 and +1")
        Z = Z.astype(np.int8)
        Z.setflags(write=False)
        object.__setattr__(self, "data", Z)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    def save_csv(self, path, header: bool = False) -> None:
        with open(path, "w") as fh:
            if header:
                fh.write(",".join(f"z{j}" for j in range(self.p)) + "\n")
            np.savetxt(fh, self.data, fmt="%d", delimiter=",")

    @classmethod
    def load_csv(cls, path) -> "SampleSet":
        with open(path) as fh:
            first = fh.readline()
        skip = 1 if first.strip().startswith("z") else 0
        Z = np.loadtxt(path, delimiter=",", skiprows=skip, dtype=np.int64, ndmin=2)
        return cls(Z)


@dataclass(frozen=True)
class NodeProblem:
    """Per-node regression problem: predict spin ``node`` from all the others."""

    node: int
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y must have the same number of rows")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @cached_property
    def yX(self) -> np.ndarray:
        # rows y_i * x_i; every loss only depends on these margins
        return self.y[:, None] * self.X

    @cached_property
    def gram_norm(self) -> float:
        """Largest eigenvalue of X X^T."""
        from .losses import max_eigenvalue
        return max_eigenvalue(self.X)


def node_problem(samples: SampleSet, j: int) -> NodeProblem:
    if not 0 <= j < samples.p:
        raise IndexError(f"node index {j} out of range for p={samples.p}")
    Z = samples.data.astype(float)
    X = np.delete(Z, j, axis=1)
    return NodeProblem(node=j, X=X, y=Z[:, j].copy())


def lattice_topology(side: int, coupling: float) -> ConnectivityMatrix:
    """Periodic four-neighbour square lattice, nodes numbered row-major."""
    if side < 2:
        raise ValueError(f"lattice side must be >= 2, got {side}")
    if coupling <= 0:
        raise ValueError(f"coupling must be positive, got {coupling}")
    p = side * side
    W = np.zeros((p, p))
    for r in range(side):
        for c in range(side):
            i = r * side + c
            for j in (r * side + (c + 1) % side, ((r + 1) % side) * side + c):
                if i != j:
                    W[i, j] = W[j, i] = coupling
    return ConnectivityMatrix(W)


def random_regular_topology(p: int, degree: int, weight_low: float, weight_high: float,
                            rng_seed: int, max_retries: int = 1000) -> ConnectivityMatrix:
    """Random ``degree``-regular graph from the pairing model, uniform couplings."""
    if degree < 0 or degree >= p or (p * degree) % 2:
        raise ValueError(f"no {degree}-regular graph on {p} nodes")
    rng = np.random.default_rng(rng_seed)
    stubs = np.repeat(np.arange(p), degree)
    for _ in range(max_retries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keys = np.sort(pairs, axis=1)
        if len(np.unique(keys, axis=0)) != len(keys):
            continue
        W = np.zeros((p, p))
        w = rng.uniform(weight_low, weight_high, size=len(keys))
        W[keys[:, 0], keys[:, 1]] = w
        W[keys[:, 1], keys[:, 0]] = w
        return ConnectivityMatrix(W)
    raise RuntimeError(f"pairing model failed to produce a simple graph in {max_retries} tries")


def graph_stats(W: ConnectivityMatrix) -> GraphStats:
    A = W.weights
    k = int(W.degrees().max()) if W.p else 0
    nz = np.abs(A[A != 0])
    eta = float(nz.min()) if nz.size else None
    width = float(np.sqrt(k) * np.linalg.norm(A, axis=1).max()) if W.p else 0.0
    return GraphStats(max_degree=k, min_edge_weight=eta, width=width,
                      edge_set=sorted(W.edge_set()))

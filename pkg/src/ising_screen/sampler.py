"""Drawing i.i.d. spin configurations from an Ising model.

Small models (p <= 20) are sampled exactly by enumerating all 2**p states.
Larger ones use independent Gibbs chains, one chain per emitted sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.special import expit, logsumexp

from .model import ConnectivityMatrix, SampleSet

MAX_EXACT_P = 20


@dataclass(frozen=True)
class SamplerConfig:
    method: str = "auto"  # "exact", "gibbs" or "auto" (exact when p <= 16)
    gibbs_sweeps: int = 1000
    rng_seed: int = 0

    def __post_init__(self):
        if self.method not in ("exact", "gibbs", "auto"):
            raise ValueError(f"unknown sampler method {self.method!r}")
        if self.gibbs_sweeps < 1:
            raise ValueError("gibbs_sweeps must be >= 1")

    def resolve(self, p: int) -> str:
        if self.method == "auto":
            return "exact" if p <= 16 else "gibbs"
        return self.method


def all_states(p: int) -> np.ndarray:
    """All 2**p spin vectors, state index read as binary with z_0 the most significant bit."""
    bits = (np.arange(2 ** p)[:, None] >> np.arange(p - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(np.int8)


def _check_enumerable(p: int) -> None:
    if p > MAX_EXACT_P:
        raise ValueError(f"exact enumeration limited to p <= {MAX_EXACT_P}, got p={p}")


def log_weights(W: ConnectivityMatrix) -> np.ndarray:
    """Unnormalised log-probabilities 0.5 z^T W z of every state."""
    _check_enumerable(W.p)
    S = all_states(W.p).astype(float)
    return 0.5 * np.einsum("si,ij,sj->s", S, W.weights, S)


def log_partition(W: ConnectivityMatrix) -> float:
    return float(logsumexp(log_weights(W)))


def state_probabilities(W: ConnectivityMatrix) -> np.ndarray:
    lw = log_weights(W)
    return np.exp(lw - logsumexp(lw))


def exact_sample(W: ConnectivityMatrix, n: int, seed) -> SampleSet:
    probs = state_probabilities(W)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return SampleSet(all_states(W.p)[idx])


def conditional_prob(w_row, z_rest) -> float:
    """P(z_j = +1 | z_{-j}) for coupling row ``w_row`` (diagonal removed)."""
    w_row = np.asarray(w_row, dtype=float)
    z_rest = np.asarray(z_rest, dtype=float)
    if w_row.shape != z_rest.shape:
        raise ValueError("w_row and z_rest must have the same length")
    return float(expit(2.0 * w_row @ z_rest))


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@numba.njit(cache=True)
def _splitmix64(x):
    x = x + _GOLDEN
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _gibbs_chains(Z, nbr_ptr, nbr_idx, tab_ptr, table, sweeps, seed):
    # every chain owns a xorshift64* stream keyed by (seed, chain index);
    # table[tab_ptr[j] + b] is P(z_j = +1) when neighbour spin bits read b
    n, p = Z.shape
    scale = 1.0 / 9007199254740992.0  # 2**-53
    for i in range(n):
        s = _splitmix64(seed ^ _splitmix64(np.uint64(i)))
        if s == np.uint64(0):
            s = _GOLDEN
        for _ in range(sweeps):
            for j in range(p):
                b = 0
                for t in range(nbr_ptr[j], nbr_ptr[j + 1]):
                    b = 2 * b + (Z[i, nbr_idx[t]] > 0)
                s ^= s >> np.uint64(12)
                s ^= s << np.uint64(25)
                s ^= s >> np.uint64(27)
                u = ((s * np.uint64(0x2545F4914F6CDD1D)) >> np.uint64(11)) * scale
                Z[i, j] = 1 if u < table[tab_ptr[j] + b] else -1


def _conditional_tables(A: np.ndarray):
    """Per-node lookup of P(z_j = +1) over all neighbour configurations."""
    p = A.shape[0]
    nbr_ptr, nbr_idx, tab_ptr, tables = [0], [], [0], []
    for j in range(p):
        nb = np.flatnonzero(A[j])
        if len(nb) > 20:
            raise ValueError(f"node {j} has degree {len(nb)}; Gibbs tables support <= 20")
        spins = 2.0 * ((np.arange(2 ** len(nb))[:, None] >> np.arange(len(nb) - 1, -1, -1)) & 1) - 1
        tables.append(expit(2.0 * spins @ A[j, nb]))
        nbr_idx.extend(nb)
        nbr_ptr.append(len(nbr_idx))
        tab_ptr.append(tab_ptr[-1] + 2 ** len(nb))
    return (np.array(nbr_ptr, dtype=np.int64), np.array(nbr_idx, dtype=np.int64),
            np.array(tab_ptr, dtype=np.int64), np.concatenate(tables))


def gibbs_sample(W: ConnectivityMatrix, n: int, sweeps: int, seed) -> SampleSet:
    """Run ``n`` independent sequential-scan chains for ``sweeps`` sweeps each.

    Chains start uniformly on {-1, +1}^p. Initial states come from a numpy
    Generator seeded with ``seed``; inside the compiled kernel each chain
    draws from its own stream keyed by (seed, chain index), so the output is
    a pure function of ``seed`` and chains could be split across workers.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    rng = np.random.default_rng(seed)
    Z = np.where(rng.random((n, W.p)) < 0.5, -1, 1).astype(np.int8)
    nbr_ptr, nbr_idx, tab_ptr, table = _conditional_tables(W.weights)
    kernel_seed = np.uint64(rng.integers(0, 2**63 - 1))
    _gibbs_chains(Z, nbr_ptr, nbr_idx, tab_ptr, table, int(sweeps), kernel_seed)
    return SampleSet(Z)


def draw_samples(W: ConnectivityMatrix, n: int, config: SamplerConfig, seed=None) -> SampleSet:
    seed = config.rng_seed if seed is None else seed
    if config.resolve(W.p) == "exact":
        return exact_sample(W, n, seed)
    return gibbs_sample(W, n, config.gibbs_sweeps, seed)


def empirical_state_distribution(samples: SampleSet) -> np.ndarray:
    """Frequencies over the 2**p states, indexed like :func:`all_states`."""
    _check_enumerable(samples.p)
    bits = (samples.data > 0).astype(np.int64)
    idx = bits @ (1 << np.arange(samples.p - 1, -1, -1))
    return np.bincount(idx, minlength=2 ** samples.p) / samples.n


def total_variation(P, Q) -> float:
    return 0.5 * float(np.abs(np.asarray(P) - np.asarray(Q)).sum())

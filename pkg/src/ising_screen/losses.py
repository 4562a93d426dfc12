"""Node-wise smooth losses: logistic pseudo-likelihood and interaction screening."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .model import NodeProblem

LOGISTIC = "logistic"
ISE = "ise"
LOSS_KINDS = (LOGISTIC, ISE)


@dataclass(frozen=True)
class LossEval:
    value: float
    gradient: np.ndarray


def _check(prob: NodeProblem, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (prob.dim,):
        raise ValueError(f"w has shape {w.shape}, expected ({prob.dim},)")
    return w


def logistic_value(prob: NodeProblem, w) -> float:
    m = prob.yX @ w
    # log(1 + exp(-2m)) without overflow
    return float(np.logaddexp(0.0, -2.0 * m).mean())


def ise_value(prob: NodeProblem, w) -> float:
    return float(np.exp(-(prob.yX @ w)).mean())


def eval_logistic(prob: NodeProblem, w) -> LossEval:
    w = _check(prob, w)
    m = prob.yX @ w
    value = float(np.logaddexp(0.0, -2.0 * m).mean())
    grad = -(2.0 / prob.n) * (prob.yX.T @ expit(-2.0 * m))
    return LossEval(value, grad)


def eval_ise(prob: NodeProblem, w) -> LossEval:
    w = _check(prob, w)
    e = np.exp(-(prob.yX @ w))
    return LossEval(float(e.mean()), -(prob.yX.T @ e) / prob.n)


def evaluate(prob: NodeProblem, kind: str, w) -> LossEval:
    if kind == LOGISTIC:
        return eval_logistic(prob, w)
    if kind == ISE:
        return eval_ise(prob, w)
    raise ValueError(f"unknown loss kind {kind!r}")


def loss_value(prob: NodeProblem, kind: str, w) -> float:
    w = _check(prob, w)
    if kind == LOGISTIC:
        return logistic_value(prob, w)
    if kind == ISE:
        return ise_value(prob, w)
    raise ValueError(f"unknown loss kind {kind!r}")


def max_eigenvalue(X: np.ndarray, max_iter: int = 200, rtol: float = 1e-6, seed: int = 0) -> float:
    """Largest eigenvalue of X^T X (equivalently of X X^T) by power iteration."""
    d = X.shape[1]
    if d == 0 or X.shape[0] == 0:
        return 0.0
    v = np.random.default_rng(seed).standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        u = X.T @ (X @ v)
        lam_new = float(np.linalg.norm(u))
        if lam_new == 0.0:
            return 0.0
        v = u / lam_new
        if abs(lam_new - lam) <= rtol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    # Rayleigh quotient at the final vector is the sharper estimate
    return float(max(lam, np.linalg.norm(X @ v) ** 2))


def lipschitz_constant(prob: NodeProblem, kind: str, lam: float = 0.0) -> float:
    """Gradient Lipschitz constant of the loss.

    For the interaction screening loss the bound is only valid on the set
    ``||w||_1 <= lam``.
    """
    if kind == ISE and lam < 0:
        raise ValueError("lam must be non-negative for the ISE constant")
    sigma = prob.gram_norm
    if kind == LOGISTIC:
        return sigma / prob.n
    if kind == ISE:
        return float(np.exp(lam)) * sigma / prob.n
    raise ValueError(f"unknown loss kind {kind!r}")


"""Graph estimation pipelines for the five node-wise estimators.

L1 family (``l1-lr``, ``l1constr-lr``, ``l1-ise``): a regularisation path per
node, each candidate refitted on its support, the best one picked on a
validation set, then symmetrised and hard-thresholded at eta/2.

L0-L2 family (``l0l2-lr``, ``l0l2-ise``): continuation over k started from the
validation-selected L1 solution, a global k picked by BIC, then symmetrised.
No threshold is applied.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import losses
from .losses import ISE, LOGISTIC
from .model import ConnectivityMatrix, NodeProblem, SampleSet, node_problem
from .solver import (SolverError, SolverOptions, continuation_path, fista_solve,
                     refit_support)

L1_LR = "l1-lr"
L1CONSTR_LR = "l1constr-lr"
L1_ISE = "l1-ise"
L0L2_LR = "l0l2-lr"
L0L2_ISE = "l0l2-ise"
METHODS = (L1_LR, L1CONSTR_LR, L1_ISE, L0L2_LR, L0L2_ISE)
L1_METHODS = (L1_LR, L1CONSTR_LR, L1_ISE)
L0_METHODS = (L0L2_LR, L0L2_ISE)

LOSS_OF = {L1_LR: LOGISTIC, L1CONSTR_LR: LOGISTIC, L1_ISE: ISE, L0L2_LR: LOGISTIC, L0L2_ISE: ISE}
# which L1 path initialises each L0-L2 estimator
L1_INIT_OF = {L0L2_LR: L1_LR, L0L2_ISE: L1_ISE}

VALIDATION = "validation"
BIC = "bic"


@dataclass(frozen=True)
class MethodSpec:
    method: str
    tuning: str | None = None
    lambda_grid: tuple | None = None  # penalties (l1-lr, l1-ise) or radii (l1constr-lr)
    k_grid: tuple | None = None
    opts: SolverOptions = SolverOptions()

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.tuning is None:
            object.__setattr__(self, "tuning", BIC if self.method in L0_METHODS else VALIDATION)
        if self.tuning not in (VALIDATION, BIC):
            raise ValueError(f"unknown tuning {self.tuning!r}")
        if self.lambda_grid is not None:
            object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        if self.k_grid is not None:
            object.__setattr__(self, "k_grid", tuple(int(v) for v in self.k_grid))

    @property
    def loss(self) -> str:
        return LOSS_OF[self.method]

    @property
    def is_l0(self) -> bool:
        return self.method in L0_METHODS


@dataclass
class NodeFit:
    """All candidates of one node: ``raw`` solver outputs and their support refits."""

    node: int
    params: list
    raw: np.ndarray
    refit: np.ndarray
    train_loss: np.ndarray  # logistic loss of each refit candidate
    val_score: np.ndarray | None = None
    init_param: float | None = None

    def best_index(self) -> int:
        if self.val_score is None:
            raise ValueError("no validation scores to select from")
        # first maximiser: the most regularised among equally good candidates
        return int(np.argmax(self.val_score))


@dataclass
class GraphEstimate:
    W_hat: ConnectivityMatrix
    W_raw: ConnectivityMatrix
    method: str
    selected_params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = self.W_hat.to_dict()
        d["method"] = self.method
        d["params"] = {str(k): v for k, v in self.selected_params.items()}
        return d

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))


def default_lambda_grid(prob: NodeProblem, method: str, size: int = 20) -> tuple:
    if method == L1CONSTR_LR:
        # L1-ball radii, descending from p - 1
        return tuple(max(prob.dim, 1) * 0.8 ** np.arange(size))
    # the zero vector is optimal once lam >= ||X^T y||_inf / n
    head = 2.0 * np.abs(prob.X.T @ prob.y).max() / prob.n
    head = head if head > 0 else 1.0
    return tuple(head * 0.5 ** np.arange(size))


def default_k_grid(p: int) -> tuple:
    if p <= 16:
        return tuple(range(p - 1, 0, -1))
    ks = [p - 1] + [k for k in (16, 12, 10, 8, 6, 5, 4, 3, 2, 1) if k < p - 1]
    return tuple(ks)


def validation_conditional_likelihood(w, prob: NodeProblem) -> float:
    """Mean log P(y_i | x_i, w) on held-out data; higher is better."""
    return -losses.eval_logistic(prob, w).value


class _RefitCache:
    def __init__(self, prob: NodeProblem, kind: str):
        self.prob, self.kind = prob, kind
        self._cache: dict = {}

    def __call__(self, w) -> np.ndarray:
        key = tuple(np.flatnonzero(w))
        if key not in self._cache:
            self._cache[key] = refit_support(self.prob, self.kind, w)
        return self._cache[key]


def _l1_node_fit(prob: NodeProblem, spec: MethodSpec, validation: NodeProblem | None) -> NodeFit:
    kind = spec.loss
    penalty = "l1-ball" if spec.method == L1CONSTR_LR else "l1"
    grid = spec.lambda_grid or default_lambda_grid(prob, spec.method)
    refit = _RefitCache(prob, kind)
    w = np.zeros(prob.dim)
    raws, refits = [], []
    for lam in grid:
        w = fista_solve(prob, kind, penalty, lam, w, spec.opts).w
        raws.append(w)
        refits.append(refit(w))
    refits = np.array(refits)
    fit = NodeFit(node=prob.node, params=list(grid), raw=np.array(raws), refit=refits,
                  train_loss=np.array([losses.logistic_value(prob, r) for r in refits]))
    if validation is not None:
        fit.val_score = np.array([validation_conditional_likelihood(r, validation) for r in refits])
    return fit


def _l1_initialiser(fit: NodeFit, n: int) -> int:
    if fit.val_score is not None:
        return fit.best_index()
    # no validation data: per-node BIC along the path
    bic = math.log(n) * np.count_nonzero(fit.refit, axis=1) + 2 * n * fit.train_loss
    return int(np.argmin(bic))


def fit_node(prob: NodeProblem, spec: MethodSpec, validation: NodeProblem | None = None,
             l1_fit: NodeFit | None = None) -> NodeFit:
    """Candidate weight vectors for one node, each refitted on its support.

    For L0-L2 methods ``l1_fit`` may carry a precomputed path of the matching
    L1 estimator; otherwise it is computed here.
    """
    if spec.tuning == VALIDATION and validation is None:
        raise ValueError(f"{spec.method} with validation tuning needs a validation problem")
    try:
        if not spec.is_l0:
            return _l1_node_fit(prob, spec, validation)
        if l1_fit is None:
            l1_fit = _l1_node_fit(prob, MethodSpec(L1_INIT_OF[spec.method], opts=spec.opts),
                                  validation)
        idx = _l1_initialiser(l1_fit, prob.n)
        k_grid = spec.k_grid or default_k_grid(prob.dim + 1)
        path = continuation_path(prob, spec.loss, k_grid, l1_fit.raw[idx], spec.opts)
    except SolverError as err:
        raise SolverError(f"node {prob.node}: {err}", iteration=err.iteration, k=err.k) from err

    refit = _RefitCache(prob, spec.loss)
    raws, refits = [], []
    for i, (k, res) in enumerate(path.items()):
        raws.append(res.w_unrefit)
        refits.append(refit(res.w) if i == 0 else res.w)
    refits = np.array(refits)
    fit = NodeFit(node=prob.node, params=list(path), raw=np.array(raws), refit=refits,
                  train_loss=np.array([losses.logistic_value(prob, r) for r in refits]),
                  init_param=l1_fit.params[idx])
    if validation is not None:
        fit.val_score = np.array([validation_conditional_likelihood(r, validation) for r in refits])
    return fit


def assemble_graph(node_solutions) -> ConnectivityMatrix:
    """Scatter per-node vectors (own index skipped) into rows and average with the transpose."""
    vecs = [np.asarray(v, dtype=float) for v in node_solutions]
    p = len(vecs)
    Wt = np.zeros((p, p))
    for j, v in enumerate(vecs):
        if v.shape != (p - 1,):
            raise ValueError(f"node {j}: expected length {p - 1}, got {v.shape}")
        Wt[j, np.arange(p) != j] = v
    return ConnectivityMatrix(0.5 * (Wt + Wt.T))


def hard_threshold(W: ConnectivityMatrix, tau: float) -> ConnectivityMatrix:
    """Zero every coupling with |W_ij| < tau."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    A = W.weights.copy()
    A[np.abs(A) < tau] = 0.0
    return ConnectivityMatrix(A)


def bic_scores(node_fits: list[NodeFit], n: int) -> dict:
    """BIC(k) = log(n) S(k) - 2 log L for every k shared by all nodes."""
    if not node_fits:
        raise ValueError("no candidates to select from")
    ks = node_fits[0].params
    if any(f.params != ks for f in node_fits):
        raise ValueError("all nodes must share the same k grid")
    scores = {}
    for i, k in enumerate(ks):
        W = assemble_graph([f.refit[i] for f in node_fits])
        S = len(W.edges())
        neg2loglik = 2.0 * n * sum(f.train_loss[i] for f in node_fits)
        scores[k] = math.log(n) * S + neg2loglik
    return scores


def bic_select(node_fits: list[NodeFit], n: int) -> int:
    scores = bic_scores(node_fits, n)
    return min(scores, key=lambda k: (scores[k], k))


def _node_problems(samples: SampleSet) -> list[NodeProblem]:
    return [node_problem(samples, j) for j in range(samples.p)]


def fit_methods(train: SampleSet, specs, validation: SampleSet | None = None,
                eta: float | None = None) -> dict[str, GraphEstimate]:
    """Fit several methods on the same data, sharing the L1 paths that
    initialise the L0-L2 estimators."""
    specs = [s if isinstance(s, MethodSpec) else MethodSpec(s) for s in specs]
    probs = _node_problems(train)
    vals = _node_problems(validation) if validation is not None else [None] * train.p
    l1_cache: dict[str, list[NodeFit]] = {}

    def l1_fits(method: str, opts: SolverOptions) -> list[NodeFit]:
        if method not in l1_cache:
            # without validation data the initialiser falls back to per-node BIC
            default = MethodSpec(method, tuning=VALIDATION if validation is not None else BIC,
                                 opts=opts)
            l1spec = next((s for s in specs if s.method == method), default)
            l1_cache[method] = [fit_node(pr, l1spec, va) for pr, va in zip(probs, vals)]
        return l1_cache[method]

    out = {}
    for spec in specs:
        if not spec.is_l0:
            fits = l1_fits(spec.method, spec.opts)
            if spec.tuning == BIC:
                chosen = [_l1_initialiser(NodeFit(f.node, f.params, f.raw, f.refit, f.train_loss),
                                          train.n) for f in fits]
            else:
                chosen = [f.best_index() for f in fits]
            W_raw = assemble_graph([f.refit[i] for f, i in zip(fits, chosen)])
            W_hat = hard_threshold(W_raw, eta / 2.0) if eta is not None else W_raw
            params = {f.node: f.params[i] for f, i in zip(fits, chosen)}
        else:
            init = l1_fits(L1_INIT_OF[spec.method], spec.opts)
            fits = [fit_node(pr, spec, va, l1_fit=l1) for pr, va, l1 in zip(probs, vals, init)]
            if spec.tuning == BIC:
                k = bic_select(fits, train.n)
                chosen = [fits[0].params.index(k)] * len(fits)
                params = {"k": k}
            else:
                chosen = [f.best_index() for f in fits]
                params = {f.node: f.params[i] for f, i in zip(fits, chosen)}
            W_raw = assemble_graph([f.refit[i] for f, i in zip(fits, chosen)])
            W_hat = W_raw
        out[spec.method] = GraphEstimate(W_hat=W_hat, W_raw=W_raw, method=spec.method,
                                         selected_params=params)
    return out


def fit_graph(train: SampleSet, spec, validation: SampleSet | None = None,
              eta: float | None = None) -> GraphEstimate:
    spec = spec if isinstance(spec, MethodSpec) else MethodSpec(spec)
    return fit_methods(train, [spec], validation, eta)[spec.method]

"""First-order solvers for the node-wise problems.

* ``prox_l0l2`` / ``dfo_solve``: projected gradient over the set
  {||w||_0 <= k, ||w||_2 <= theta}, followed by an unconstrained refit on the
  selected support.
* ``continuation_path``: warm-started DFO runs over a decreasing list of k.
* ``fista_solve``: accelerated proximal gradient for the convex L1 baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import losses
from .losses import ISE, LOGISTIC
from .model import NodeProblem

REFIT_BOUND = 10.0


class SolverError(RuntimeError):
    def __init__(self, message: str, iteration: int | None = None, k: int | None = None):
        super().__init__(message)
        self.iteration = iteration
        self.k = k


@dataclass(frozen=True)
class L0L2Constraint:
    k: int
    theta: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.theta >= 0:
            raise ValueError("theta must be >= 0")


@dataclass(frozen=True)
class SolverOptions:
    epsilon: float = 1e-3
    t_max: int = 300
    step_scale: float = 1.01

    def __post_init__(self):
        if self.epsilon <= 0 or self.t_max < 1 or self.step_scale <= 1:
            raise ValueError("need epsilon > 0, t_max >= 1 and step_scale > 1")


@dataclass
class SolverResult:
    w: np.ndarray
    loss_trace: np.ndarray
    iterations: int
    converged: bool
    # DFO only: iterate before the support refit, and the constants used
    w_unrefit: np.ndarray | None = None
    lipschitz: float | None = None
    step_constant: float | None = None
    step_norms: np.ndarray = field(default_factory=lambda: np.zeros(0))


def top_k_indices(v: np.ndarray, k: int) -> np.ndarray:
    # stable sort keeps the lowest index first among equal magnitudes
    return np.argsort(-np.abs(v), kind="stable")[:k]


def prox_l0l2(v, k: int, theta: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto {||w||_0 <= k, ||w||_2 <= theta}."""
    v = np.asarray(v, dtype=float)
    if k < 1:
        raise ValueError("k must be >= 1")
    if theta < 0:
        raise ValueError("theta must be >= 0")
    k = min(k, v.size)
    idx = top_k_indices(v, k)
    out = np.zeros_like(v)
    tau = float(np.linalg.norm(v[idx]))
    if tau == 0.0:
        return out
    out[idx] = min(1.0, theta / tau) * v[idx]
    return out


def project_l1_ball(v, radius: float) -> np.ndarray:
    """Euclidean projection onto {||w||_1 <= radius} by the sort-based simplex reduction."""
    v = np.asarray(v, dtype=float)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    ranks = np.arange(1, u.size + 1)
    active = u * ranks > css - radius
    active[0] = True  # holds exactly; can round away for subnormal radii
    rho = np.nonzero(active)[0][-1]
    shift = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - shift, 0.0)


def soft_threshold(v, t: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def refit_support(prob: NodeProblem, kind: str, w, bound: float = REFIT_BOUND,
                  tol: float = 1e-8, max_iter: int = 500) -> np.ndarray:
    """Minimise the unpenalised loss over the non-zero coordinates of ``w``.

    Coefficients are boxed to ``[-bound, bound]`` since the loss has no
    finite minimiser when the support separates the data.
    """
    w = np.asarray(w, dtype=float)
    support = np.flatnonzero(w)
    out = np.zeros_like(w)
    if support.size == 0:
        return out
    A = prob.yX[:, support]
    n = prob.n

    if kind == LOGISTIC:
        def fg(u):
            m = A @ u
            s = np.exp(-np.logaddexp(0.0, 2.0 * m))  # sigmoid(-2m)
            return np.logaddexp(0.0, -2.0 * m).mean(), -(2.0 / n) * (A.T @ s)
    elif kind == ISE:
        def fg(u):
            e = np.exp(-(A @ u))
            return e.mean(), -(A.T @ e) / n
    else:
        raise ValueError(f"unknown loss kind {kind!r}")

    u0 = np.clip(w[support], -bound, bound)
    res = minimize(fg, u0, jac=True, method="L-BFGS-B",
                   bounds=[(-bound, bound)] * support.size,
                   options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-15})
    u = res.x
    if not np.all(np.isfinite(u)):
        raise SolverError("non-finite coefficients in support refit")
    # never hand back something worse than the starting point
    if fg(u)[0] > fg(u0)[0]:
        u = u0
    out[support] = u
    return out


def dfo_lipschitz(prob: NodeProblem, kind: str, constraint: L0L2Constraint) -> float:
    if kind == LOGISTIC:
        return losses.lipschitz_constant(prob, LOGISTIC)
    if not math.isfinite(constraint.theta):
        raise ValueError("the ISE step size needs a finite theta")
    # k-sparse iterates with ||w||_2 <= theta satisfy ||w||_1 <= sqrt(k) * theta
    k = min(constraint.k, prob.dim)
    return losses.lipschitz_constant(prob, ISE, math.sqrt(k) * constraint.theta)


def dfo_solve(prob: NodeProblem, kind: str, constraint: L0L2Constraint, w_init,
              opts: SolverOptions = SolverOptions(), refit: bool = True) -> SolverResult:
    """Discrete first-order method for min f(w) s.t. ||w||_0 <= k, ||w||_2 <= theta.

    ``loss_trace`` starts at the first projected iterate, the first point
    guaranteed to be feasible; it is non-increasing whenever the step constant
    exceeds the gradient Lipschitz constant.
    """
    k, theta = constraint.k, constraint.theta
    C = dfo_lipschitz(prob, kind, constraint)
    D = opts.step_scale * C
    if D <= 0:
        # degenerate design (all-zero columns): the gradient is constant zero
        D = 1.0
    w = np.asarray(w_init, dtype=float).copy()
    if w.shape != (prob.dim,):
        raise ValueError(f"w_init has shape {w.shape}, expected ({prob.dim},)")

    g = losses.evaluate(prob, kind, w).gradient
    trace, steps = [], []
    converged = False
    t = 0
    for t in range(1, opts.t_max + 1):
        w_new = prox_l0l2(w - g / D, k, theta)
        ev = losses.evaluate(prob, kind, w_new)
        if not (math.isfinite(ev.value) and np.all(np.isfinite(ev.gradient))):
            raise SolverError(f"non-finite loss at DFO iteration {t}", iteration=t, k=k)
        step = float(np.sum((w_new - w) ** 2))
        if trace:
            steps.append(step)
        trace.append(ev.value)
        w, g = w_new, ev.gradient
        if step <= opts.epsilon:
            converged = True
            break

    w_final = refit_support(prob, kind, w) if refit else w.copy()
    return SolverResult(w=w_final, loss_trace=np.array(trace), iterations=t,
                        converged=converged, w_unrefit=w, lipschitz=C,
                        step_constant=D, step_norms=np.array(steps))


def continuation_path(prob: NodeProblem, kind: str, k_list, w_full_init,
                      opts: SolverOptions = SolverOptions()) -> dict[int, SolverResult]:
    """Warm-started DFO over a decreasing list of sparsity levels.

    The head of ``k_list`` is the unconstrained level and returns
    ``w_full_init`` untouched. Each later level uses theta = 2 ||w_prev||_1 and
    starts from the previous level's (refitted) solution.
    """
    k_list = [int(k) for k in k_list]
    if any(b >= a for a, b in zip(k_list, k_list[1:])):
        raise ValueError("k_list must be strictly decreasing")
    w_prev = np.asarray(w_full_init, dtype=float).copy()
    head = SolverResult(w=w_prev, loss_trace=np.array([losses.loss_value(prob, kind, w_prev)]),
                        iterations=0, converged=True, w_unrefit=w_prev)
    path = {k_list[0]: head}
    for k in k_list[1:]:
        theta = 2.0 * float(np.abs(w_prev).sum())
        try:
            res = dfo_solve(prob, kind, L0L2Constraint(k, theta), w_prev, opts)
        except SolverError as err:
            raise SolverError(f"k={k}: {err}", iteration=err.iteration, k=k) from err
        path[k] = res
        w_prev = res.w
    return path


def fista_solve(prob: NodeProblem, kind: str, penalty: str, lam: float, w_init=None,
                opts: SolverOptions = SolverOptions()) -> SolverResult:
    """Accelerated proximal gradient for the L1-penalised or L1-ball-constrained loss.

    ``penalty="l1"`` minimises f(w) + lam ||w||_1; ``penalty="l1-ball"``
    minimises f(w) subject to ||w||_1 <= lam. The logistic loss uses the fixed
    step 1/C; the penalised ISE has no global constant and backtracks from the
    logistic one.
    """
    if penalty not in ("l1", "l1-ball"):
        raise ValueError(f"unknown penalty {penalty!r}")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    x = np.zeros(prob.dim) if w_init is None else np.asarray(w_init, dtype=float).copy()
    if penalty == "l1-ball":
        x = project_l1_ball(x, lam)

    backtrack = kind == ISE and penalty == "l1"
    if kind == ISE and penalty == "l1-ball":
        L = losses.lipschitz_constant(prob, ISE, lam)
    else:
        L = losses.lipschitz_constant(prob, LOGISTIC)
    L = max(L, 1e-12)

    def prox(v, step):
        if penalty == "l1":
            return soft_threshold(v, lam * step)
        return project_l1_ball(v, lam)

    def objective(f, w):
        return f + lam * float(np.abs(w).sum()) if penalty == "l1" else f

    y, t_mom = x.copy(), 1.0
    best_w, best_obj = None, math.inf
    trace = []
    converged = False
    it = 0
    for it in range(1, opts.t_max + 1):
        ev = losses.evaluate(prob, kind, y)
        if not math.isfinite(ev.value):
            raise SolverError(f"non-finite loss at FISTA iteration {it}", iteration=it)
        while True:
            x_new = prox(y - ev.gradient / L, 1.0 / L)
            f_new = losses.loss_value(prob, kind, x_new)
            if not backtrack:
                break
            d = x_new - y
            if f_new <= ev.value + ev.gradient @ d + 0.5 * L * (d @ d) + 1e-12 * abs(ev.value):
                break
            L *= 2.0
        if not math.isfinite(f_new):
            raise SolverError(f"non-finite loss at FISTA iteration {it}", iteration=it)
        obj = objective(f_new, x_new)
        trace.append(obj)
        if obj <= best_obj:
            best_w, best_obj = x_new, obj
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
        y = x_new + ((t_mom - 1.0) / t_next) * (x_new - x)
        step = float(np.sum((x_new - x) ** 2))
        x, t_mom = x_new, t_next
        if step <= opts.epsilon:
            converged = True
            break
    return SolverResult(w=best_w, loss_trace=np.array(trace), iterations=it,
                        converged=converged, lipschitz=L, step_constant=L)


def loss_trace_csv(result: SolverResult, path) -> None:
    with open(path, "w") as fh:
        fh.write("iteration,loss\n")
        for i, v in enumerate(result.loss_trace, start=1):
            fh.write(f"{i},{v!r}\n")

"""Trajectory prediction: weighted epsilon-SVR with an RBF kernel.

Fits time -> x and time -> y regressions over the recent track history
with exponentially increasing sample weights (the newest samples count
most, realized by re-scaling the penalty C per sample), then extrapolates
ahead. A degree-3 polynomial baseline is included for comparison.

The SVR dual is solved by pairwise coordinate optimization (SMO) with
working-set selection by maximal KKT violation. Deterministic: no
randomized steps, no external solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import accel


class InsufficientDataError(ValueError):
    """Too few samples for the requested fit."""


class ConvergenceError(RuntimeError):
    """Dual solver failed to reach the KKT tolerance."""

    def __init__(self, msg: str, residual: float):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class SvrParams:
    C: float = 1000.0
    epsilon: float = 0.01
    gamma: float = 1.0

    def __post_init__(self):
        if self.C <= 0.0 or self.gamma <= 0.0 or self.epsilon < 0.0:
            raise ValueError("C and gamma must be positive, epsilon non-negative")


@dataclass
class SvrModel:
    """Fitted regressor: kernel expansion coefficients over the inputs."""

    support_inputs: np.ndarray   # (n,) training inputs
    dual_coeffs: np.ndarray      # (n,) alpha_i - alpha*_i
    bias: float
    params: SvrParams
    box: np.ndarray = None       # (n,) per-sample bound w_i * C

    def __post_init__(self):
        if len(self.support_inputs) != len(self.dual_coeffs):
            raise ValueError("coefficient/input length mismatch")


@dataclass
class TrackHistory:
    """Timestamped 2D positions; weights optional (derived when absent)."""

    samples: list[tuple[float, float, float]]
    weights: list[float] | None = None

    def __post_init__(self):
        ts = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("sample timestamps must be strictly increasing")
        if self.weights is not None and len(self.weights) != len(self.samples):
            raise ValueError("weights/samples length mismatch")

    def span(self) -> float:
        if len(self.samples) < 2:
            return 0.0
        return self.samples[-1][0] - self.samples[0][0]

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a = np.asarray(self.samples, np.float64)
        return a[:, 0], a[:, 1], a[:, 2]


@dataclass
class TrajectoryPrediction:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    valid: np.ndarray  # bool per point: inside the trusted horizon

    def points(self) -> list[tuple[float, float, float, bool]]:
        return [
            (float(t), float(x), float(y), bool(v))
            for t, x, y, v in zip(self.t, self.x, self.y, self.valid)
        ]


def rbf_kernel(a, b, gamma: float) -> np.ndarray:
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    return np.exp(-gamma * (a[:, None] - b[None, :]) ** 2)


def svr_fit(inputs, targets, weights=None, params: SvrParams | None = None,
            tol: float = 1e-8, max_iter: int = 200_000) -> SvrModel:
    """Solve the weighted epsilon-insensitive SVR dual to KKT tolerance.

    Per-sample box constraints 0 <= alpha_i, alpha*_i <= w_i * C. The bias
    comes from the free (strictly inside the box) support vectors, or from
    the midpoint of the feasible bias interval when none are free.
    """
    params = params or SvrParams()
    x = np.asarray(inputs, np.float64).ravel()
    y = np.asarray(targets, np.float64).ravel()
    n = len(x)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    if len(y) != n:
        raise ValueError("inputs/targets length mismatch")
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, np.float64).ravel()
        if len(w) != n or (w <= 0.0).any():
            raise ValueError("weights must be positive, one per sample")
    U = w * params.C
    K = rbf_kernel(x, x, params.gamma)
    eps = params.epsilon

    alpha, alpha_star, viol, _ = accel.smo_solve(
        K, y, U, eps, tol, max_iter
    )
    if viol > tol:
        raise ConvergenceError("SVR dual did not converge", float(viol))

    theta = alpha - alpha_star
    kt = K @ theta
    base = y - kt
    s_a, s_s = base - eps, base + eps
    free = ((alpha > 1e-10) & (alpha < U - 1e-10)) | (
        (alpha_star > 1e-10) & (alpha_star < U - 1e-10)
    )
    if free.any():
        vals = np.where(
            (alpha > 1e-10) & (alpha < U - 1e-10), s_a, s_s
        )
        bias = float(vals[free].mean())
    else:
        up = np.maximum(
            np.where(alpha < U - 1e-14, s_a, -np.inf),
            np.where(alpha_star > 1e-14, s_s, -np.inf),
        )
        dn = np.minimum(
            np.where(alpha > 1e-14, s_a, np.inf),
            np.where(alpha_star < U - 1e-14, s_s, np.inf),
        )
        lo = float(np.max(up))
        hi = float(np.min(dn))
        bias = (lo + hi) / 2.0
    return SvrModel(
        support_inputs=x.copy(),
        dual_coeffs=theta,
        bias=bias,
        params=params,
        box=U,
    )


def svr_predict(model: SvrModel, t) -> np.ndarray | float:
    """Kernel-expansion evaluation at t (scalar or array)."""
    scalar = np.isscalar(t)
    tt = np.atleast_1d(np.asarray(t, np.float64))
    k = rbf_kernel(model.support_inputs, tt, model.params.gamma)
    out = model.dual_coeffs @ k + model.bias
    return float(out[0]) if scalar else out


def dual_objective(model: SvrModel, targets) -> float:
    """Minimization-form dual value of the fitted coefficients."""
    y = np.asarray(targets, np.float64)
    theta = model.dual_coeffs
    K = rbf_kernel(model.support_inputs, model.support_inputs, model.params.gamma)
    return float(
        0.5 * theta @ K @ theta
        - y @ theta
        + model.params.epsilon * np.abs(theta).sum()
    )


def primal_objective(model: SvrModel, targets, weights=None) -> float:
    """Primal value 0.5*||w||^2 + C * sum(w_i * xi_i) at the fitted model."""
    y = np.asarray(targets, np.float64)
    theta = model.dual_coeffs
    K = rbf_kernel(model.support_inputs, model.support_inputs, model.params.gamma)
    f = K @ theta + model.bias
    xi = np.maximum(np.abs(y - f) - model.params.epsilon, 0.0)
    if weights is None:
        weights = np.ones(len(y))
    return float(0.5 * theta @ K @ theta + model.params.C * np.sum(weights * xi))


def duality_gap(model: SvrModel, targets, weights=None) -> float:
    """primal - dual (maximization form); ~0 at the exact optimum."""
    return primal_objective(model, targets, weights) - (
        -dual_objective(model, targets)
    )


def polyfit3(inputs, targets) -> np.ndarray:
    """Least-squares cubic, normal equations with column scaling.

    Returns coefficients [c0, c1, c2, c3] for c0 + c1 t + c2 t^2 + c3 t^3.
    """
    t = np.asarray(inputs, np.float64).ravel()
    y = np.asarray(targets, np.float64).ravel()
    if len(t) < 4:
        raise InsufficientDataError(f"need at least 4 samples, got {len(t)}")
    A = np.stack([np.ones_like(t), t, t ** 2, t ** 3], axis=1)
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0.0] = 1.0
    B = A / scale
    G = B.T @ B
    rhs = B.T @ y
    try:
        c = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        c = np.linalg.lstsq(B, y, rcond=None)[0]
    return c / scale


def poly_predict(coeffs, t) -> np.ndarray | float:
    scalar = np.isscalar(t)
    tt = np.atleast_1d(np.asarray(t, np.float64))
    out = coeffs[0] + coeffs[1] * tt + coeffs[2] * tt ** 2 + coeffs[3] * tt ** 3
    return float(out[0]) if scalar else out


@dataclass
class PredictorParams:
    svr: SvrParams = field(default_factory=SvrParams)
    tau_w: float = 1.0          # recency weight time constant, s
    history_window: float = 3.0  # fit window, s
    valid_horizon: float = 1.5   # how far ahead points stay trusted, s
    min_span: float = 1.0        # required history span, s
    time_scale: float = 4.0     # input scaling: kernel sees t / time_scale
    fit_tol: float = 1e-4       # KKT tolerance for online fits (model units)


def recency_weights(times, tau_w: float = 1.0) -> np.ndarray:
    """w_i = exp((t_i - t_last) / tau_w); newest sample gets weight 1."""
    t = np.asarray(times, np.float64)
    return np.exp((t - t[-1]) / tau_w)


def predict_trajectory(history: TrackHistory, horizon: float, step: float,
                       params: PredictorParams | None = None) -> TrajectoryPrediction:
    """Extrapolate the track with two independent SVRs (t->x, t->y).

    Inputs enter the kernel scaled by 1/time_scale (standard feature
    scaling; the kernel width then spans a useful fraction of the fit
    window). Points past the trusted horizon are still returned but
    flagged invalid; extrapolation quality degrades quickly with lead
    time.
    """
    params = params or PredictorParams()
    if horizon <= 0.0 or step <= 0.0:
        raise ValueError("horizon and step must be positive")
    if history.span() < params.min_span:
        raise InsufficientDataError(
            f"history spans {history.span():.2f}s < {params.min_span:.2f}s"
        )
    t, x, y = history.arrays()
    keep = t >= t[-1] - params.history_window
    t, x, y = t[keep], x[keep], y[keep]
    if history.weights is not None:
        w = np.asarray(history.weights, np.float64)[keep]
    else:
        w = recency_weights(t, params.tau_w)
    tau = (t - t[-1]) / params.time_scale
    mx = svr_fit(tau, x, w, params.svr, tol=params.fit_tol)
    my = svr_fit(tau, y, w, params.svr, tol=params.fit_tol)
    k = max(int(round(horizon / step)), 1)
    tau_out = step * np.arange(1, k + 1)
    return TrajectoryPrediction(
        t=t[-1] + tau_out,
        x=svr_predict(mx, tau_out / params.time_scale),
        y=svr_predict(my, tau_out / params.time_scale),
        valid=tau_out <= params.valid_horizon + 1e-9,
    )


def grid_search(history: TrackHistory, c_values, eps_values, gamma_values,
                folds: int = 3) -> SvrParams:
    """Pick SVR parameters by mean absolute error on time-ordered suffix folds.

    Fold k trains on the prefix and validates on the next block of
    samples; ties resolve to the first combination in grid order
    (C outermost, then epsilon, then gamma).
    """
    if not (len(c_values) and len(eps_values) and len(gamma_values)):
        raise ValueError("parameter grid must be non-empty")
    t, x, y = history.arrays()
    n = len(t)
    block = n // (folds + 2)
    if block < 1 or n - folds * block < 2:
        raise InsufficientDataError(
            f"{n} samples cannot form {folds} suffix folds"
        )
    best = None
    best_err = math.inf
    for C in c_values:
        for eps in eps_values:
            for gamma in gamma_values:
                params = SvrParams(C=C, epsilon=eps, gamma=gamma)
                err = 0.0
                count = 0
                for k in range(folds, 0, -1):
                    cut = n - k * block
                    hi = cut + block
                    tau = t[:cut] - t[cut - 1]
                    w = recency_weights(t[:cut])
                    try:
                        mx = svr_fit(tau, x[:cut], w, params)
                        my = svr_fit(tau, y[:cut], w, params)
                    except ConvergenceError:
                        err = math.inf
                        break
                    tv = t[cut:hi] - t[cut - 1]
                    err += float(
                        np.abs(svr_predict(mx, tv) - x[cut:hi]).sum()
                        + np.abs(svr_predict(my, tv) - y[cut:hi]).sum()
                    )
                    count += 2 * (hi - cut)
                mean_err = err / count if count else math.inf
                if mean_err < best_err - 1e-15:
                    best_err = mean_err
                    best = params
    return best


DEFAULT_GRID = {
    "C": [100.0, 1000.0, 10000.0],
    "epsilon": [0.001, 0.01, 0.1],
    "gamma": [0.1, 1.0, 10.0],
}

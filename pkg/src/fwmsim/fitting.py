"""Nonlinear least squares for the five curve shapes used by the analysis.

Models (external parameter order as documented):

* ``lorentzian``  : A / (1 + (2 (x - x0) / fwhm)^2) + c      -> (A, x0, fwhm, c)
* ``exponential`` : A * exp(k x) + c                          -> (A, k, c)
* ``linear``      : a x + b                                   -> (a, b)
* ``sqrt_law``    : s * sqrt(x) + z                           -> (s, z)
* ``inv_sqrt_law``: 1 / (s * sqrt(x) + z)                     -> (s, z)

The solver is a damped Gauss-Newton iteration (Levenberg-style additive
damping on the scaled normal matrix) with central-difference Jacobians,
step max(1e-6 |theta|, 1e-9). Width- and sensitivity-like parameters
(fwhm, s) are fitted as logs internally, keeping them positive without
constraints; reported values and uncertainties are transformed back.
Uncertainties come from the residual covariance
sigma^2 (J^T W J)^-1 with sigma^2 = SSE / (n - p).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import FittingError, RankDeficiencyError, SeedingError

__all__ = ["FitModel", "FitResult", "MODELS", "fit", "auto_seed", "fit_report"]

MAX_ITERATIONS = 200
RESIDUAL_RTOL = 1e-10
GRADIENT_ATOL = 1e-10
JACOBIAN_REL_STEP = 1e-6
JACOBIAN_ABS_STEP = 1e-9


@dataclass(frozen=True)
class FitModel:
    """A named model shape with its internal reparameterization."""

    name: str
    param_names: tuple[str, ...]
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    # indices of parameters fitted as log(theta) internally
    log_params: tuple[int, ...] = ()
    x_min: float | None = None

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def __call__(self, x, theta):
        return self.func(np.asarray(x, dtype=float), np.asarray(theta, dtype=float))

    def to_internal(self, theta: np.ndarray) -> np.ndarray:
        t = np.array(theta, dtype=float)
        for i in self.log_params:
            if t[i] <= 0:
                raise FittingError(
                    f"{self.name}: parameter {self.param_names[i]} must be > 0")
            t[i] = math.log(t[i])
        return t

    def from_internal(self, internal: np.ndarray) -> np.ndarray:
        t = np.array(internal, dtype=float)
        for i in self.log_params:
            t[i] = math.exp(t[i])
        return t

    def check_domain(self, xs: np.ndarray) -> None:
        if self.x_min is not None and np.any(xs < self.x_min):
            raise FittingError(
                f"{self.name} is defined for x >= {self.x_min}")


def _lorentzian(x, th):
    a, x0, fwhm, c = th
    u = 2.0 * (x - x0) / fwhm
    return a / (1.0 + u * u) + c


def _exponential(x, th):
    a, k, c = th
    return a * np.exp(k * x) + c


def _linear(x, th):
    a, b = th
    return a * x + b


def _sqrt_law(x, th):
    s, z = th
    return s * np.sqrt(x) + z


def _inv_sqrt_law(x, th):
    s, z = th
    return 1.0 / (s * np.sqrt(x) + z)


MODELS: dict[str, FitModel] = {
    "lorentzian": FitModel("lorentzian", ("amplitude", "center", "fwhm", "offset"),
                           _lorentzian, log_params=(2,)),
    "exponential": FitModel("exponential", ("amplitude", "rate", "offset"),
                            _exponential),
    "linear": FitModel("linear", ("slope", "intercept"), _linear),
    "sqrt_law": FitModel("sqrt_law", ("s", "z"), _sqrt_law,
                         log_params=(0,), x_min=0.0),
    "inv_sqrt_law": FitModel("inv_sqrt_law", ("s", "z"), _inv_sqrt_law,
                             log_params=(0,), x_min=0.0),
}


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters with 1-sigma uncertainties and diagnostics."""

    model: str
    theta: np.ndarray
    sigma: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    param_names: tuple[str, ...] = field(default=())

    def __getitem__(self, name: str) -> float:
        return float(self.theta[self.param_names.index(name)])

    def sigma_of(self, name: str) -> float:
        return float(self.sigma[self.param_names.index(name)])


def _resolve(model: FitModel | str) -> FitModel:
    if isinstance(model, str):
        try:
            return MODELS[model]
        except KeyError:
            raise FittingError(
                f"unknown model {model!r}; known: {sorted(MODELS)}") from None
    return model


def _polyfit1(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Degree-1 polyfit; degenerate grids are diagnosed later by fit()."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a, b = np.polyfit(x, y, 1)
    return float(a), float(b)


def auto_seed(model: FitModel | str, xs: Sequence[float],
              ys: Sequence[float]) -> np.ndarray:
    """Deterministic starting guess from the data.

    lorentzian: center at the extremum, width from the half-max crossings,
    offset at the minimum. exponential: log-linear regression after offset
    removal. linear/sqrt laws: closed-form linear regression (on sqrt(x)
    for the square-root laws, on 1/y for the inverse law).
    """
    m = _resolve(model)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.ptp(ys) == 0.0:
        raise SeedingError(f"{m.name}: constant data cannot seed a fit")
    m.check_domain(xs)

    if m.name == "lorentzian":
        offset = float(ys.min())
        i_pk = int(np.argmax(ys))
        amp = float(ys[i_pk]) - offset
        half = offset + 0.5 * amp
        above = ys > half
        idx = np.flatnonzero(above)
        if idx.size >= 2 and np.all(np.diff(np.argsort(xs)) == 1):
            lo, hi = int(idx[0]), int(idx[-1])
            x_lo = xs[lo]
            if lo > 0 and ys[lo] != ys[lo - 1]:
                frac = (half - ys[lo - 1]) / (ys[lo] - ys[lo - 1])
                x_lo = xs[lo - 1] + frac * (xs[lo] - xs[lo - 1])
            x_hi = xs[hi]
            if hi < xs.size - 1 and ys[hi + 1] != ys[hi]:
                frac = (half - ys[hi]) / (ys[hi + 1] - ys[hi])
                x_hi = xs[hi] + frac * (xs[hi + 1] - xs[hi])
            width = abs(x_hi - x_lo)
        else:
            width = np.ptp(xs) / 4.0
        if width <= 0:
            width = max(abs(xs[i_pk]), 1.0) * 0.1
        return np.array([amp, float(xs[i_pk]), width, offset])

    if m.name == "exponential":
        base = 0.0 if np.all(ys > 0) else float(ys.min()) - 0.05 * np.ptp(ys)
        shifted = ys - base
        good = shifted > 0
        if good.sum() < 2:
            raise SeedingError("exponential: not enough positive points")
        k, log_a = _polyfit1(xs[good], np.log(shifted[good]))
        return np.array([math.exp(log_a), k, base])

    if m.name == "linear":
        a, b = _polyfit1(xs, ys)
        return np.array([a, b])

    if m.name == "sqrt_law":
        s, z = _polyfit1(np.sqrt(xs), ys)
        if s <= 0:
            raise SeedingError("sqrt_law: data do not increase with sqrt(x)")
        return np.array([s, z])

    if m.name == "inv_sqrt_law":
        if np.any(ys == 0):
            raise SeedingError("inv_sqrt_law: zero values cannot be inverted")
        s, z = _polyfit1(np.sqrt(xs), 1.0 / ys)
        if s <= 0:
            raise SeedingError("inv_sqrt_law: 1/y does not increase with sqrt(x)")
        return np.array([s, z])

    raise SeedingError(f"no seeding heuristic for model {m.name!r}")


def _jacobian(m: FitModel, xs: np.ndarray, internal: np.ndarray) -> np.ndarray:
    n, p = xs.size, internal.size
    jac = np.empty((n, p))
    for j in range(p):
        step = max(JACOBIAN_REL_STEP * abs(internal[j]), JACOBIAN_ABS_STEP)
        hi = internal.copy()
        lo = internal.copy()
        hi[j] += step
        lo[j] -= step
        jac[:, j] = (m(xs, m.from_internal(hi))
                     - m(xs, m.from_internal(lo))) / (2.0 * step)
    return jac


def _describe_null_direction(m: FitModel, jac_w: np.ndarray) -> str:
    _, _, vt = np.linalg.svd(jac_w)
    v = vt[-1]
    if abs(v.min()) > abs(v.max()):
        v = -v
    terms = [f"{c:+.3f}*{name}" for c, name in zip(v, m.param_names)
             if abs(c) > 1e-3]
    return " ".join(terms)


def fit(model: FitModel | str, xs: Sequence[float], ys: Sequence[float],
        weights: Sequence[float] | None = None,
        theta0: Sequence[float] | None = None) -> FitResult:
    """Weighted least squares: minimize sum w_i (y_i - f(x_i; theta))^2.

    ``weights`` default to 1. ``theta0`` defaults to :func:`auto_seed`.
    Non-convergence within the iteration budget returns the best iterate
    flagged ``converged=False`` rather than raising. A singular normal
    matrix raises :class:`RankDeficiencyError` naming the flat direction.
    """
    m = _resolve(model)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise FittingError("xs and ys must be 1-D arrays of equal length")
    if xs.size < m.n_params + 1:
        raise FittingError(
            f"{m.name} needs at least {m.n_params + 1} points, got {xs.size}")
    m.check_domain(xs)
    if weights is None:
        w = np.ones_like(ys)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != ys.shape or np.any(w < 0):
            raise FittingError("weights must be non-negative, one per point")
    sqrt_w = np.sqrt(w)

    theta = np.asarray(theta0, dtype=float) if theta0 is not None \
        else auto_seed(m, xs, ys)
    if theta.size != m.n_params:
        raise FittingError(
            f"{m.name} expects {m.n_params} parameters, got {theta.size}")
    internal = m.to_internal(theta)

    def sse_of(vec: np.ndarray) -> float:
        res = sqrt_w * (ys - m(xs, m.from_internal(vec)))
        return float(res @ res)

    lam = 1e-3
    sse = sse_of(internal)
    converged = False
    iterations = 0
    jac_w = None
    for iterations in range(1, MAX_ITERATIONS + 1):
        jac = _jacobian(m, xs, internal)
        jac_w = jac * sqrt_w[:, None]
        if iterations == 1:
            sv = np.linalg.svd(jac_w, compute_uv=False)
            if sv[0] == 0.0 or sv[-1] < 1e-12 * sv[0]:
                raise RankDeficiencyError(
                    f"{m.name}: normal matrix is singular; unidentifiable "
                    f"direction {_describe_null_direction(m, jac_w)}")
        residual = sqrt_w * (ys - m(xs, m.from_internal(internal)))
        gradient = jac_w.T @ residual
        if np.max(np.abs(gradient)) < GRADIENT_ATOL:
            converged = True
            break
        jtj = jac_w.T @ jac_w
        diag = np.diag(jtj).copy()
        if np.all(diag == 0.0):
            raise RankDeficiencyError(
                f"{m.name}: model is flat in every parameter direction")
        diag[diag == 0.0] = diag[diag > 0.0].min()
        accepted = False
        for _ in range(60):
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), gradient)
            except np.linalg.LinAlgError:
                raise RankDeficiencyError(
                    f"{m.name}: normal matrix is singular; unidentifiable "
                    f"direction {_describe_null_direction(m, jac_w)}") from None
            if not np.all(np.isfinite(step)):
                raise RankDeficiencyError(
                    f"{m.name}: normal matrix is singular; unidentifiable "
                    f"direction {_describe_null_direction(m, jac_w)}")
            candidate = internal + step
            sse_new = sse_of(candidate)
            if np.isfinite(sse_new) and sse_new <= sse:
                improvement = sse - sse_new
                internal = candidate
                lam = max(lam / 10.0, 1e-12)
                accepted = True
                if improvement <= RESIDUAL_RTOL * max(sse, 1e-300):
                    converged = True
                sse = sse_new
                break
            lam *= 10.0
            if lam > 1e12:
                break
        if converged or not accepted:
            break

    theta_hat = m.from_internal(internal)
    if jac_w is None:  # pragma: no cover - loop always runs once
        jac_w = _jacobian(m, xs, internal) * sqrt_w[:, None]
    # covariance of the external parameters: chain rule through the
    # log reparameterization (d theta / d internal = theta on log params)
    jtj = jac_w.T @ jac_w
    dof = max(xs.size - m.n_params, 1)
    res_var = sse / dof
    scale = np.ones(m.n_params)
    for i in m.log_params:
        scale[i] = theta_hat[i]
    try:
        cov_internal = np.linalg.inv(jtj) * res_var
        covariance = cov_internal * np.outer(scale, scale)
        sigma = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    except np.linalg.LinAlgError:
        covariance = np.full((m.n_params, m.n_params), np.nan)
        sigma = np.full(m.n_params, np.nan)
    return FitResult(model=m.name, theta=theta_hat, sigma=sigma,
                     covariance=covariance, residual_norm=math.sqrt(sse),
                     iterations=iterations, converged=converged,
                     param_names=m.param_names)


def fit_report(result: FitResult) -> str:
    """Human-readable fit summary (model, theta +/- sigma, diagnostics)."""
    lines = [f"model: {result.model}"]
    for name, value, err in zip(result.param_names, result.theta, result.sigma):
        lines.append(f"  {name} = {value:.10g} +/- {err:.4g}")
    lines.append(f"  residual_norm = {result.residual_norm:.10g}")
    lines.append(f"  iterations = {result.iterations}")
    lines.append(f"  converged = {result.converged}")
    return "\n".join(lines)

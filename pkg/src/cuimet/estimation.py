"""Per-endpoint marginal dose-response estimation.

Five estimators are available: the empirical per-dose rates and four
parametric dose-response curves (logit linear, logit quadratic, Emax,
exponential).  Logit models maximize a Bernoulli likelihood directly;
monotone logit-linear fits exponentiate the slope, monotone quadratic
fits add a quadratic penalty on derivative sign violations over a dose
grid.  The Emax and exponential curves are fit in two stages: saturated
per-dose log-odds (with covariance) first, then generalized least
squares on the log-odds scale.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import expit

from .errors import (
    EmpiricalHasNoCurve,
    InvalidFitConfig,
    TooFewDoseLevels,
)
from .trial_data import TrialDataset


class ModelVariant(enum.Enum):
    EMPIRICAL = "empirical"
    LOGIT_LINEAR = "logit_linear"
    LOGIT_QUADRATIC = "logit_quadratic"
    EMAX = "emax"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class ModelKind:
    """An estimator choice plus the optional monotonicity flag.

    The flag only matters for the logit models; Emax and exponential
    curves are monotone by construction.
    """

    variant: ModelVariant
    monotone: bool = False

    @classmethod
    def from_string(cls, text: str) -> "ModelKind":
        name = text.strip().lower().replace("-", "_").replace(" ", "_")
        monotone = False
        if ":" in name:
            name, _, suffix = name.partition(":")
            monotone = suffix in ("mono", "monotone", "true", "1")
        try:
            variant = ModelVariant(name)
        except ValueError:
            valid = ", ".join(v.value for v in ModelVariant)
            raise InvalidFitConfig(f"unknown model '{text}', expected one of: {valid}") from None
        return cls(variant=variant, monotone=monotone)

    def to_string(self) -> str:
        return self.variant.value + (":mono" if self.monotone else "")


@dataclass(frozen=True)
class FitConfig:
    """Numerical controls for the fitting routines.

    ``ed50_bounds`` and ``sigma_bounds`` default to data-dependent
    ranges (resolved at fit time) when left as None.  ``ridge`` only
    stabilizes the degenerate all-identical-outcome fallback.
    """

    max_iterations: int = 500
    convergence_tol: float = 1e-8
    penalty_weight: float = 1e4
    derivative_grid_points: int = 101
    continuity_correction: float = 0.5
    ed50_bounds: tuple[float, float] | None = None
    sigma_bounds: tuple[float, float] | None = None
    ridge: float = 1e-6

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidFitConfig("max_iterations must be >= 1")
        for name in ("convergence_tol", "penalty_weight", "continuity_correction", "ridge"):
            if getattr(self, name) <= 0:
                raise InvalidFitConfig(f"{name} must be > 0")
        if self.derivative_grid_points < 2:
            raise InvalidFitConfig("derivative_grid_points must be >= 2")
        for name in ("ed50_bounds", "sigma_bounds"):
            bounds = getattr(self, name)
            if bounds is not None and not bounds[0] < bounds[1]:
                raise InvalidFitConfig(f"{name} lower bound must be < upper bound")


DEFAULT_FIT_CONFIG = FitConfig()


@dataclass(eq=False)
class StageOneEstimates:
    """Saturated per-dose log-odds and their covariance."""

    doses: np.ndarray
    logits: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.doses = np.asarray(self.doses, dtype=float)
        self.logits = np.asarray(self.logits, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float)
        if not np.allclose(self.covariance, self.covariance.T):
            raise InvalidFitConfig("stage-one covariance must be symmetric")
        if np.any(np.diag(self.covariance) <= 0):
            raise InvalidFitConfig("stage-one covariance diagonal must be positive")


@dataclass(frozen=True)
class MarginalFit:
    """Result of one endpoint estimation.

    ``fitted_probs`` are positive-outcome probabilities at the observed
    dose levels.  ``fallback_used`` flags the degenerate intercept-only
    fallback taken when all outcomes are identical.
    """

    model: ModelKind
    params: dict[str, float]
    fitted_probs: tuple[float, ...]
    converged: bool
    objective: float
    fallback_used: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)


def _validate_probs(probs: np.ndarray) -> tuple[float, ...]:
    if not np.all(np.isfinite(probs)):
        raise InvalidFitConfig("fit produced non-finite probabilities")
    return tuple(float(p) for p in np.clip(probs, 0.0, 1.0))


# --------------------------------------------------------------------------
# Empirical estimator
# --------------------------------------------------------------------------

def estimate_empirical(dataset: TrialDataset, endpoint: int) -> MarginalFit:
    """Observed mean positive-outcome rate per dose, no pooling."""
    rates = dataset.empirical_rates(endpoint)
    return MarginalFit(
        model=ModelKind(ModelVariant.EMPIRICAL),
        params={},
        fitted_probs=_validate_probs(rates),
        converged=True,
        objective=0.0,
    )


# --------------------------------------------------------------------------
# Damped Newton minimizer (shared by the logit fits)
# --------------------------------------------------------------------------

def _newton_minimize(value, grad, hess, x0, max_iter, f_tol):
    """Minimize a smooth objective by damped Newton with backtracking.

    Returns (x, f, converged, iterations).  Convergence is declared on a
    scaled gradient norm or on objective change below ``f_tol``.
    """
    x = np.array(x0, dtype=float)
    f = value(x)
    g_tol = 1e-9
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        g = grad(x)
        if np.max(np.abs(g)) <= g_tol * max(1.0, abs(f)):
            converged = True
            break
        H = hess(x)
        lam = 0.0
        step = None
        for _ in range(60):
            try:
                step = np.linalg.solve(H + lam * np.eye(len(x)), -g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.isfinite(step).all() and g @ step < 0:
                break
            lam = 1e-8 if lam == 0.0 else lam * 10.0
            step = None
        if step is None:
            break
        t = 1.0
        slope = g @ step
        f_new = f
        accepted = False
        for _ in range(60):
            candidate = x + t * step
            f_new = value(candidate)
            if np.isfinite(f_new) and f_new <= f + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        decrease = f - f_new
        x = x + t * step
        f = f_new
        if decrease <= f_tol:
            converged = True
            break
    return x, float(f), converged, iterations


# --------------------------------------------------------------------------
# Logit likelihood problems
# --------------------------------------------------------------------------

class LogitProblem:
    """Penalized Bernoulli negative log-likelihood on aggregated dose cells.

    Free parameters are the logit coefficients, except for monotone
    linear fits where the slope is carried as ``direction * exp(gamma)``
    and the free parameters are (intercept, gamma).
    """

    def __init__(self, doses, successes, totals, quadratic: bool,
                 monotone: bool, direction: int, config: FitConfig):
        if direction not in (1, -1):
            raise InvalidFitConfig(f"direction must be +1 or -1, got {direction}")
        self.d = np.asarray(doses, dtype=float)
        self.y = np.asarray(successes, dtype=float)
        self.n = np.asarray(totals, dtype=float)
        self.quadratic = quadratic
        self.monotone = monotone
        self.direction = direction
        self.config = config
        self.exp_slope = monotone and not quadratic
        if quadratic and monotone:
            self.pen_grid = np.linspace(self.d.min(), self.d.max(),
                                        config.derivative_grid_points)
        else:
            self.pen_grid = None

    @property
    def n_free(self) -> int:
        return 3 if self.quadratic else 2

    def start(self) -> np.ndarray:
        rate = self.y.sum() / self.n.sum()
        intercept = math.log(rate / (1.0 - rate))
        if self.quadratic:
            return np.array([intercept, 0.0, 0.0])
        if self.exp_slope:
            return np.array([intercept, 0.0])  # gamma = 0 -> |slope| = 1
        return np.array([intercept, 0.0])

    def coefficients(self, theta) -> np.ndarray:
        """Map free parameters to logit coefficients (b0, b1[, b2])."""
        theta = np.asarray(theta, dtype=float)
        if self.exp_slope:
            return np.array([theta[0], self.direction * math.exp(theta[1])])
        return theta.copy()

    def _eta(self, beta):
        eta = beta[0] + beta[1] * self.d
        if self.quadratic:
            eta = eta + beta[2] * self.d ** 2
        return eta

    def value(self, theta) -> float:
        beta = self.coefficients(theta)
        eta = self._eta(beta)
        nll = float(np.sum(self.n * np.logaddexp(0.0, eta) - self.y * eta))
        return nll + self._penalty(beta)

    def _penalty(self, beta) -> float:
        if self.pen_grid is None:
            return 0.0
        u = -self.direction * (beta[1] + 2.0 * beta[2] * self.pen_grid)
        viol = np.maximum(u, 0.0)
        return float(self.config.penalty_weight * np.sum(viol ** 2))

    def grad(self, theta) -> np.ndarray:
        beta = self.coefficients(theta)
        eta = self._eta(beta)
        g_eta = self.n * expit(eta) - self.y
        g_beta = np.empty(len(beta))
        g_beta[0] = g_eta.sum()
        g_beta[1] = (g_eta * self.d).sum()
        if self.quadratic:
            g_beta[2] = (g_eta * self.d ** 2).sum()
        if self.pen_grid is not None:
            u = -self.direction * (beta[1] + 2.0 * beta[2] * self.pen_grid)
            viol = np.maximum(u, 0.0)
            w2 = 2.0 * self.config.penalty_weight
            g_beta[1] += w2 * np.sum(viol) * (-self.direction)
            g_beta[2] += w2 * np.sum(viol * 2.0 * self.pen_grid) * (-self.direction)
        if self.exp_slope:
            # chain rule: d(beta1)/d(gamma) = beta1
            return np.array([g_beta[0], g_beta[1] * beta[1]])
        return g_beta

    def hess(self, theta) -> np.ndarray:
        beta = self.coefficients(theta)
        eta = self._eta(beta)
        p = expit(eta)
        w = self.n * p * (1.0 - p)
        cols = [np.ones_like(self.d), self.d]
        if self.quadratic:
            cols.append(self.d ** 2)
        X = np.column_stack(cols)
        H = X.T @ (X * w[:, None])
        if self.pen_grid is not None:
            u = -self.direction * (beta[1] + 2.0 * beta[2] * self.pen_grid)
            active = u > 0.0
            if np.any(active):
                gx = self.pen_grid[active]
                du = np.column_stack([np.full(gx.shape, -self.direction),
                                      -self.direction * 2.0 * gx])
                Hp = 2.0 * self.config.penalty_weight * du.T @ du
                H[1:, 1:] += Hp
        if self.exp_slope:
            g_eta = self.n * p - self.y
            b1 = beta[1]
            Hg = np.empty((2, 2))
            Hg[0, 0] = H[0, 0]
            Hg[0, 1] = Hg[1, 0] = H[0, 1] * b1
            Hg[1, 1] = H[1, 1] * b1 * b1 + (g_eta * self.d).sum() * b1
            return Hg
        return H


def _degenerate_intercept_fit(dataset, endpoint, kind, config, n_coeffs):
    """Intercept-only ridge fit used when all outcomes are identical."""
    y = float(dataset.positive_counts(endpoint).sum())
    n = float(dataset.counts().sum())

    def value(x):
        b0 = x[0]
        return n * np.logaddexp(0.0, b0) - y * b0 + config.ridge * b0 ** 2

    def grad(x):
        b0 = x[0]
        return np.array([n * expit(b0) - y + 2.0 * config.ridge * b0])

    def hess(x):
        b0 = x[0]
        p = expit(b0)
        return np.array([[n * p * (1.0 - p) + 2.0 * config.ridge]])

    x, f, converged, iters = _newton_minimize(
        value, grad, hess, np.array([0.0]), config.max_iterations, config.convergence_tol
    )
    params = {"beta0": float(x[0]), "beta1": 0.0}
    if n_coeffs == 3:
        params["beta2"] = 0.0
    fit = MarginalFit(
        model=kind,
        params=params,
        fitted_probs=(),  # filled below via the shared prediction path
        converged=converged,
        objective=f,
        fallback_used=True,
        diagnostics={"degenerate": True, "iterations": iters, "free_params": tuple(x)},
    )
    probs = predict_curve(fit, dataset.doses())
    return MarginalFit(
        model=fit.model, params=fit.params, fitted_probs=probs,
        converged=fit.converged, objective=fit.objective,
        fallback_used=True, diagnostics=fit.diagnostics,
    )


def _fit_logit(dataset, endpoint, quadratic, monotone, direction, config):
    kind = ModelKind(
        ModelVariant.LOGIT_QUADRATIC if quadratic else ModelVariant.LOGIT_LINEAR,
        monotone=monotone,
    )
    doses = dataset.doses()
    if quadratic and len(doses) < 3:
        raise TooFewDoseLevels(
            f"logit quadratic needs >= 3 distinct dose levels, got {len(doses)}"
        )
    y = dataset.positive_counts(endpoint)
    n = dataset.counts()
    if y.sum() == 0 or y.sum() == n.sum():
        return _degenerate_intercept_fit(dataset, endpoint, kind, config, 3 if quadratic else 2)

    problem = LogitProblem(doses, y, n, quadratic, monotone, direction, config)
    x, f, converged, iters = _newton_minimize(
        problem.value, problem.grad, problem.hess, problem.start(),
        config.max_iterations, config.convergence_tol,
    )
    beta = problem.coefficients(x)
    params = {"beta0": float(beta[0]), "beta1": float(beta[1])}
    if quadratic:
        params["beta2"] = float(beta[2])
    fit = MarginalFit(
        model=kind, params=params, fitted_probs=(), converged=converged,
        objective=f, fallback_used=False,
        diagnostics={"iterations": iters, "free_params": tuple(float(v) for v in x),
                     "direction": direction},
    )
    probs = predict_curve(fit, doses)
    return MarginalFit(
        model=fit.model, params=fit.params, fitted_probs=probs,
        converged=fit.converged, objective=fit.objective,
        fallback_used=False, diagnostics=fit.diagnostics,
    )


def fit_logit_linear(dataset: TrialDataset, endpoint: int, monotone: bool = False,
                     direction: int = 1, config: FitConfig = DEFAULT_FIT_CONFIG) -> MarginalFit:
    """Fit logit(P) = b0 + b1*dose by maximum likelihood.

    With ``monotone`` the slope is parameterized as direction*exp(gamma)
    so predictions cannot violate the requested direction.
    """
    return _fit_logit(dataset, endpoint, False, monotone, direction, config)


def fit_logit_quadratic(dataset: TrialDataset, endpoint: int, monotone: bool = False,
                        direction: int = 1, config: FitConfig = DEFAULT_FIT_CONFIG) -> MarginalFit:
    """Fit logit(P) = b0 + b1*dose + b2*dose^2 by maximum likelihood.

    With ``monotone`` the likelihood is penalized for derivative sign
    violations on an equally spaced grid across the observed dose range.
    """
    return _fit_logit(dataset, endpoint, True, monotone, direction, config)


# --------------------------------------------------------------------------
# Two-stage fitting (Emax, exponential)
# --------------------------------------------------------------------------

def stage_one_logodds(dataset: TrialDataset, endpoint: int,
                      config: FitConfig = DEFAULT_FIT_CONFIG) -> StageOneEstimates:
    """Saturated per-dose log-odds with a diagonal binomial covariance.

    A continuity correction is added only to boundary cells (0 or all
    events) so the log-odds and their variances stay finite.
    """
    y = dataset.positive_counts(endpoint).astype(float)
    n = dataset.counts().astype(float)
    c = np.where((y == 0) | (y == n), config.continuity_correction, 0.0)
    logits = np.log((y + c) / (n - y + c))
    variances = 1.0 / (y + c) + 1.0 / (n - y + c)
    return StageOneEstimates(
        doses=dataset.doses(),
        logits=logits,
        covariance=np.diag(variances),
    )


def _whitener(covariance: np.ndarray) -> np.ndarray:
    """Matrix T with T^T T = covariance^{-1}; maps GLS to ordinary LS."""
    w = np.linalg.inv(covariance)
    w = 0.5 * (w + w.T)
    return np.linalg.cholesky(w).T


def _emax_regressor(doses, ed50):
    return doses / (ed50 + doses)


def _exponential_regressor(doses, sigma):
    return np.exp(np.minimum(doses / sigma, 600.0)) - 1.0


def _profile_gls(stage_one: StageOneEstimates, regressor, bounds, config):
    """Minimize the GLS criterion by profiling the two linear parameters.

    For a fixed nonlinear parameter the curve is linear in (E0, effect),
    so the weighted least-squares solution is exact; the scalar search
    runs on a log-spaced grid followed by local refinement.
    """
    T = _whitener(stage_one.covariance)
    l_w = T @ stage_one.logits
    ones_w = T @ np.ones_like(stage_one.doses)

    def objective(t):
        g_w = T @ regressor(stage_one.doses, t)
        X = np.column_stack([ones_w, g_w])
        theta, residual, rank, _ = np.linalg.lstsq(X, l_w, rcond=None)
        r = l_w - X @ theta
        return float(r @ r), theta

    lo, hi = bounds
    grid = np.geomspace(lo, hi, 160)
    values = np.array([objective(t)[0] for t in grid])
    i = int(np.argmin(values))
    ref_lo = grid[max(i - 1, 0)]
    ref_hi = grid[min(i + 1, len(grid) - 1)]
    if ref_lo == ref_hi:  # single-point bracket at a boundary
        ref_lo, ref_hi = max(lo, ref_lo * 0.5), min(hi, ref_hi * 2.0)
    res = minimize_scalar(
        lambda t: objective(t)[0],
        bounds=(ref_lo, ref_hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    t_best = float(np.clip(res.x, lo, hi))
    if objective(t_best)[0] > values[i]:
        t_best = float(grid[i])
    obj, theta = objective(t_best)
    return t_best, theta, obj, bool(np.isfinite(obj))


def fit_emax(stage_one: StageOneEstimates, config: FitConfig = DEFAULT_FIT_CONFIG) -> MarginalFit:
    """Second-stage GLS fit of E0 + Emax*d/(ED50+d) on the log-odds scale."""
    doses = stage_one.doses
    if len(doses) < 3:
        raise TooFewDoseLevels("Emax needs >= 3 distinct dose levels (3 parameters)")
    bounds = config.ed50_bounds or (1e-3, 1.5 * float(doses.max()))
    ed50, theta, obj, converged = _profile_gls(stage_one, _emax_regressor, bounds, config)
    params = {"e0": float(theta[0]), "emax": float(theta[1]), "ed50": ed50}
    fit = MarginalFit(
        model=ModelKind(ModelVariant.EMAX), params=params, fitted_probs=(),
        converged=converged, objective=obj,
        diagnostics={"free_params": (params["e0"], params["emax"], params["ed50"])},
    )
    probs = predict_curve(fit, doses)
    return MarginalFit(
        model=fit.model, params=params, fitted_probs=probs,
        converged=converged, objective=obj, diagnostics=fit.diagnostics,
    )


def fit_exponential(stage_one: StageOneEstimates,
                    config: FitConfig = DEFAULT_FIT_CONFIG) -> MarginalFit:
    """Second-stage GLS fit of E0 + E1*(exp(d/sigma)-1) on the log-odds scale."""
    doses = stage_one.doses
    if len(doses) < 3:
        raise TooFewDoseLevels("exponential needs >= 3 distinct dose levels (3 parameters)")
    if config.sigma_bounds is not None:
        bounds = config.sigma_bounds
    else:
        spacing = float(np.max(np.diff(np.sort(doses))))
        bounds = (0.1 * spacing, 10.0 * float(doses.max()))
    sigma, theta, obj, converged = _profile_gls(
        stage_one, _exponential_regressor, bounds, config
    )
    params = {"e0": float(theta[0]), "e1": float(theta[1]), "sigma": sigma}
    fit = MarginalFit(
        model=ModelKind(ModelVariant.EXPONENTIAL), params=params, fitted_probs=(),
        converged=converged, objective=obj,
        diagnostics={"free_params": (params["e0"], params["e1"], params["sigma"])},
    )
    probs = predict_curve(fit, doses)
    return MarginalFit(
        model=fit.model, params=params, fitted_probs=probs,
        converged=converged, objective=obj, diagnostics=fit.diagnostics,
    )


def gls_objective(stage_one: StageOneEstimates, variant: ModelVariant):
    """Return the GLS criterion as a callable of the 3 curve parameters.

    Used for stationarity diagnostics; parameter order matches the fit's
    ``free_params`` (baseline, effect, nonlinear parameter).
    """
    T = _whitener(stage_one.covariance)
    regressor = {
        ModelVariant.EMAX: _emax_regressor,
        ModelVariant.EXPONENTIAL: _exponential_regressor,
    }[variant]

    def criterion(params):
        base, effect, nonlinear = params
        f = base + effect * regressor(stage_one.doses, nonlinear)
        r = T @ (stage_one.logits - f)
        return float(r @ r)

    return criterion


# --------------------------------------------------------------------------
# Prediction and dispatch
# --------------------------------------------------------------------------

def predict_curve(fit: MarginalFit, dose_grid) -> tuple[float, ...]:
    """Evaluate a parametric fit's probability curve on a dose grid."""
    variant = fit.model.variant
    if variant is ModelVariant.EMPIRICAL:
        raise EmpiricalHasNoCurve("the empirical estimator has no dose-response curve")
    d = np.asarray(dose_grid, dtype=float)
    p = fit.params
    if variant is ModelVariant.LOGIT_LINEAR:
        eta = p["beta0"] + p["beta1"] * d
    elif variant is ModelVariant.LOGIT_QUADRATIC:
        eta = p["beta0"] + p["beta1"] * d + p["beta2"] * d ** 2
    elif variant is ModelVariant.EMAX:
        eta = p["e0"] + p["emax"] * _emax_regressor(d, p["ed50"])
    elif variant is ModelVariant.EXPONENTIAL:
        eta = p["e0"] + p["e1"] * _exponential_regressor(d, p["sigma"])
    else:  # pragma: no cover - enum is exhaustive
        raise EmpiricalHasNoCurve(f"no curve for {variant}")
    return _validate_probs(expit(eta))


def fit_endpoint(dataset: TrialDataset, endpoint: int, kind: ModelKind,
                 config: FitConfig = DEFAULT_FIT_CONFIG) -> MarginalFit:
    """Fit one endpoint with the requested model, applying direction policy.

    The toxicity endpoint is modeled on the flipped (no-event) scale and
    its logit fits are always monotone non-increasing; other endpoints
    honor the caller's monotone flag with a non-decreasing direction.
    """
    spec = dataset.endpoints[endpoint]
    variant = kind.variant
    if variant is ModelVariant.EMPIRICAL:
        return estimate_empirical(dataset, endpoint)
    monotone = True if spec.is_toxicity else kind.monotone
    direction = -1 if spec.is_toxicity else 1
    if variant is ModelVariant.LOGIT_LINEAR:
        return fit_logit_linear(dataset, endpoint, monotone, direction, config)
    if variant is ModelVariant.LOGIT_QUADRATIC:
        return fit_logit_quadratic(dataset, endpoint, monotone, direction, config)
    stage_one = stage_one_logodds(dataset, endpoint, config)
    if variant is ModelVariant.EMAX:
        return fit_emax(stage_one, config)
    return fit_exponential(stage_one, config)

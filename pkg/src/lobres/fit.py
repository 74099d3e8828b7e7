"""Duration regressions: OLS on ln(tau) and multi-link maximum likelihood.

Each distribution parameter has its own linear predictor. In single-link
mode only `mu` depends on covariates while `sigma` (and `nu`) are free
scalars; two-link adds covariates to `sigma`; three-link also to the
generalised gamma `nu`. All linked parameters share one covariate set.

Coefficients are estimated on standardised covariates and reported on the
original scale. Columns that are constant or linearly dependent on earlier
ones are dropped; their coefficients are reported as 0 with NaN errors.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
from loguru import logger
from scipy import linalg, special, stats

from .config import LinkMode
from .dist import ParamSet, ResponseFamily, get_family
from .errors import DistributionError, FitError, SchemaError

NU_BOUNDS = (0.05, 20.0)
REL_TOL = 1e-10
SCORE_TOL = 1e-6
MAX_ITER = 200
BLOCKS = ("mu", "sigma", "nu")


# ============================================
# Links
# ============================================

class IdentityLink:
    name = "identity"

    def inverse(self, eta):
        return eta

    def derivative(self, eta):
        return np.ones_like(eta)


class LogLink:
    name = "log"

    def inverse(self, eta):
        return np.exp(eta)

    def derivative(self, eta):
        return np.exp(eta)


class BoundedLink:
    """Logistic map of the real line onto (lo, hi)."""

    name = "bounded"

    def __init__(self, lo: float, hi: float):
        self.lo, self.hi = lo, hi

    def inverse(self, eta):
        return self.lo + (self.hi - self.lo) * special.expit(eta)

    def derivative(self, eta):
        e = special.expit(eta)
        return (self.hi - self.lo) * e * (1 - e)

    def link(self, value: float) -> float:
        return float(special.logit((value - self.lo) / (self.hi - self.lo)))


LINKS = {"identity": IdentityLink(), "log": LogLink()}


@dataclass(frozen=True)
class LinkSpec:
    family: str
    mode: LinkMode = "single"

    def __post_init__(self):
        get_family(self.family)
        if self.mode not in ("single", "two-link", "three-link"):
            raise FitError(f"Unknown link mode '{self.mode}'")

    @property
    def dist(self) -> ResponseFamily:
        return get_family(self.family)

    @property
    def blocks(self) -> tuple[str, ...]:
        return BLOCKS if self.dist.has_nu else BLOCKS[:2]

    @property
    def links(self) -> dict[str, str]:
        return {"mu": self.dist.mu_link, "sigma": "log", "nu": "identity"}

    @property
    def active(self) -> dict[str, bool]:
        return {
            "mu": True,
            "sigma": self.mode != "single",
            "nu": self.mode == "three-link" and self.dist.has_nu,
        }


# ============================================
# Fitted model
# ============================================

@dataclass(frozen=True, eq=False)
class FittedModel:
    family: str
    link_mode: LinkMode
    covariates: tuple[str, ...]
    coefs: dict[str, np.ndarray]
    ses: dict[str, np.ndarray]
    loglik: float
    pseudo_r2: float
    converged: bool
    iterations: int
    n_obs: int
    method: str = "ml"
    df_resid: int = 0
    aliased: tuple[str, ...] = ()
    message: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def spec(self) -> LinkSpec:
        return LinkSpec(self.family, self.link_mode)

    @property
    def deviance(self) -> float:
        return -2.0 * self.loglik

    @property
    def n_covariates(self) -> int:
        return len(self.covariates) - len(self.aliased)

    def linear_predictor(self, block: str, X) -> np.ndarray:
        coef = self.coefs[block]
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if len(coef) == 1:
            return np.full(X.shape[0], coef[0])
        return coef[0] + X @ coef[1:]

    def params(self, X) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
        """(mu, sigma, nu) at each row of X."""
        links = self.spec.links
        mu = LINKS[links["mu"]].inverse(self.linear_predictor("mu", X))
        sigma = np.exp(self.linear_predictor("sigma", X))
        nu = self.linear_predictor("nu", X) if "nu" in self.coefs else None
        return mu, sigma, nu

    def param_set(self, X) -> ParamSet:
        mu, sigma, nu = self.params(X)
        return ParamSet(self.family, mu, sigma, nu)

    def to_dict(self) -> dict:
        def clean(a):
            return [None if not np.isfinite(v) else float(v) for v in np.asarray(a, dtype=float)]

        return {
            "schema_version": 1,
            "family": self.family,
            "link_mode": self.link_mode,
            "links": {b: self.spec.links[b] for b in self.coefs},
            "method": self.method,
            "covariates": list(self.covariates),
            "coefficients": {b: clean(c) for b, c in self.coefs.items()},
            "standard_errors": {b: clean(s) for b, s in self.ses.items()},
            "loglik": float(self.loglik),
            "deviance": float(self.deviance),
            "pseudo_r2": float(self.pseudo_r2),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "n_obs": int(self.n_obs),
            "df_resid": int(self.df_resid),
            "aliased": list(self.aliased),
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FittedModel":
        for key in ("family", "link_mode", "covariates", "coefficients", "standard_errors",
                    "loglik", "pseudo_r2", "converged", "iterations", "n_obs"):
            if key not in data:
                raise SchemaError(f"model JSON missing field '{key}'", column=key)

        def arr(values):
            return np.array([np.nan if v is None else v for v in values], dtype=np.float64)

        return cls(
            family=data["family"],
            link_mode=data["link_mode"],
            covariates=tuple(data["covariates"]),
            coefs={b: arr(v) for b, v in data["coefficients"].items()},
            ses={b: arr(v) for b, v in data["standard_errors"].items()},
            loglik=float(data["loglik"]),
            pseudo_r2=float(data["pseudo_r2"]),
            converged=bool(data["converged"]),
            iterations=int(data["iterations"]),
            n_obs=int(data["n_obs"]),
            method=data.get("method", "ml"),
            df_resid=int(data.get("df_resid", 0)),
            aliased=tuple(data.get("aliased", ())),
            message=data.get("message", ""),
        )

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "FittedModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


# ============================================
# Design handling
# ============================================

def _check_inputs(X, tau, names):
    tau = np.asarray(tau, dtype=np.float64).ravel()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(len(tau), -1) if X.size else np.zeros((len(tau), 0))
    n, p = X.shape
    if len(tau) != n:
        raise FitError(f"design has {n} rows but {len(tau)} responses")
    if n <= p + 1:
        raise FitError(f"need more observations ({n}) than covariates + 1 ({p + 1})")
    if np.any(~(tau > 0)) or np.any(~np.isfinite(tau)):
        raise FitError("responses must be positive and finite")
    if np.any(~np.isfinite(X)):
        raise FitError("design contains non-finite values")
    names = tuple(names) if names is not None else tuple(f"x{j + 1}" for j in range(p))
    if len(names) != p:
        raise FitError(f"{len(names)} names for {p} covariates")
    return X, tau, names


def aliased_columns(X: np.ndarray, tol: float = 1e-9) -> list[int]:
    """Indices of columns that are constant or in the span of other columns."""
    n, p = X.shape
    if p == 0:
        return []
    Xc = X - X.mean(axis=0)
    norms = np.linalg.norm(Xc, axis=0)
    scale = np.where(norms > tol * max(1.0, np.sqrt(n)), norms, np.inf)
    _, R, piv = linalg.qr(Xc / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * max(diag[0], tol))) if len(diag) else 0
    kept = set(piv[:rank].tolist()) & set(np.flatnonzero(np.isfinite(scale)).tolist())
    return [j for j in range(p) if j not in kept]


def _drop_aliased(X, names):
    dropped = aliased_columns(X)
    if dropped:
        logger.warning("dropping aliased covariates: {}", [names[j] for j in dropped])
    kept = [j for j in range(X.shape[1]) if j not in dropped]
    return kept, tuple(names[j] for j in dropped)


def _expand(values, kept, p, fill):
    """Place intercept + kept-slope values into an array of length p + 1."""
    out = np.full(p + 1, fill, dtype=np.float64)
    out[0] = values[0]
    out[1 + np.asarray(kept, dtype=int)] = values[1:]
    return out


# ============================================
# OLS
# ============================================

def fit_loglinear(X, tau, names=None) -> FittedModel:
    """Least squares of ln(tau) on X with intercept, through QR."""
    X, tau, names = _check_inputs(X, tau, names)
    n, p = X.shape
    kept, aliased = _drop_aliased(X, names)
    D = np.column_stack([np.ones(n), X[:, kept]])
    y = np.log(tau)

    Q, R = np.linalg.qr(D)
    beta = linalg.solve_triangular(R, Q.T @ y)
    resid = y - D @ beta
    rss = float(resid @ resid)
    df = n - D.shape[1]
    r_inv = linalg.solve_triangular(R, np.eye(D.shape[1]))
    se = np.sqrt(np.diag(rss / df * (r_inv @ r_inv.T)))

    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    adj = 1.0 - (1.0 - r2) * (n - 1) / df

    sigma_ml = max(np.sqrt(rss / n), np.sqrt(np.finfo(float).tiny))
    loglik = float(np.sum(-0.5 * resid**2 / sigma_ml**2) - n * np.log(sigma_ml)
                   - np.sum(y) - 0.5 * n * np.log(2 * np.pi))
    return FittedModel(
        family="lognormal",
        link_mode="single",
        covariates=names,
        coefs={"mu": _expand(beta, kept, p, 0.0), "sigma": np.array([np.log(sigma_ml)])},
        ses={"mu": _expand(se, kept, p, np.nan), "sigma": np.array([np.nan])},
        loglik=loglik,
        pseudo_r2=float(adj),
        converged=True,
        iterations=0,
        n_obs=n,
        method="ols",
        df_resid=df,
        aliased=aliased,
        extras={"r2": r2, "rss": rss, "sigma_classical": float(np.sqrt(rss / df))},
    )


# ============================================
# Maximum likelihood
# ============================================

class _Problem:
    """Log-likelihood and score of one family on a standardised design."""

    def __init__(self, spec: LinkSpec, D: np.ndarray, tau: np.ndarray):
        self.spec = spec
        self.dist = spec.dist
        self.D = D
        self.tau = tau
        self.ones = D[:, :1]
        self.slices: dict[str, slice] = {}
        self.links: dict[str, object] = {}
        start = 0
        for block in spec.blocks:
            width = D.shape[1] if spec.active[block] else 1
            self.slices[block] = slice(start, start + width)
            start += width
            if block == "nu" and not spec.active["nu"]:
                self.links[block] = BoundedLink(*NU_BOUNDS)
            else:
                self.links[block] = LINKS[spec.links[block]]
        self.size = start

    def design(self, block: str) -> np.ndarray:
        return self.D if self.spec.active[block] else self.ones

    def predictors(self, x):
        return {b: self.design(b) @ x[s] for b, s in self.slices.items()}

    def evaluate(self, x) -> tuple[float, np.ndarray | None]:
        with np.errstate(all="ignore"):
            etas = self.predictors(x)
            values = {b: self.links[b].inverse(etas[b]) for b in etas}
            args = (values["mu"], values["sigma"], values.get("nu"))
            try:
                loglik = float(np.sum(self.dist.log_pdf(self.tau, *args)))
                scores = self.dist.score(self.tau, *args)
            except DistributionError:
                return -np.inf, None
            if not np.isfinite(loglik):
                return -np.inf, None
            grad = np.empty(self.size)
            for block, s_block in zip(self.spec.blocks, scores):
                chain = s_block * self.links[block].derivative(etas[block])
                grad[self.slices[block]] = self.design(block).T @ chain
            if not np.all(np.isfinite(grad)):
                return -np.inf, None
        return loglik, grad

    def hessian(self, x) -> np.ndarray:
        """Central differences of the analytic score."""
        H = np.empty((self.size, self.size))
        for i in range(self.size):
            h = 1e-5 * max(1.0, abs(x[i]))
            up, down = x.copy(), x.copy()
            up[i] += h
            down[i] -= h
            g_up, g_down = self.evaluate(up)[1], self.evaluate(down)[1]
            if g_up is None or g_down is None:
                raise FitError("score not finite near the optimum")
            H[:, i] = (g_up - g_down) / (2 * h)
        return 0.5 * (H + H.T)


class _Outcome(NamedTuple):
    x: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    message: str


def _newton_direction(problem: _Problem, x, g):
    try:
        H = problem.hessian(x)
        L = linalg.cholesky(-H, lower=True)
    except (FitError, linalg.LinAlgError):
        return None
    return linalg.cho_solve((L, True), g)


def _maximise(problem: _Problem, x0: np.ndarray, max_iter: int) -> _Outcome:
    """BFGS ascent with Armijo backtracking, switching to Newton steps near the optimum."""
    x = x0.copy()
    f, g = problem.evaluate(x)
    if g is None:
        raise FitError("log-likelihood is not finite at the starting values")
    if np.max(np.abs(g), initial=0.0) < SCORE_TOL:
        return _Outcome(x, f, 0, True, "converged")

    n_obs = len(problem.tau)
    eye = np.eye(problem.size)
    H = eye / n_obs
    rel = np.inf
    for it in range(1, max_iter + 1):
        direction = None
        if rel < 1e-6:
            direction = _newton_direction(problem, x, g)
        if direction is None or g @ direction <= 0:
            direction = H @ g
            if g @ direction <= 0:
                H = eye / n_obs
                direction = H @ g

        slope = g @ direction
        step = 1.0
        for _ in range(60):
            x_new = x + step * direction
            f_new, g_new = problem.evaluate(x_new)
            if g_new is not None and f_new >= f + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            converged = np.max(np.abs(g)) < SCORE_TOL
            return _Outcome(x, f, it - 1, converged, "converged" if converged else "line search failed")

        s = x_new - x
        y = g - g_new
        sy = s @ y
        if sy > 1e-12:
            rho = 1.0 / sy
            V = eye - rho * np.outer(s, y)
            H = V @ H @ V.T + rho * np.outer(s, s)
        rel = abs(f_new - f) / max(1.0, abs(f))
        x, f, g = x_new, f_new, g_new
        logger.debug("iter {}: loglik={:.10g} max|score|={:.3g}", it, f, np.max(np.abs(g)))
        if rel < REL_TOL and np.max(np.abs(g)) < SCORE_TOL:
            return _Outcome(x, f, it, True, "converged")
    return _Outcome(x, f, max_iter, False, "iteration limit reached")


def _start_values(problem: _Problem, y: np.ndarray, init: FittedModel | None, centre, scale, kept):
    x = np.zeros(problem.size)
    D = problem.D
    if init is not None:
        # raw-scale coefficients onto the standardised design
        for block, s in problem.slices.items():
            coef = init.coefs.get(block)
            if coef is None:
                continue
            if s.stop - s.start == 1:
                value = coef[0] if len(coef) == 1 else coef[0] + centre @ coef[1:][kept]
                if isinstance(problem.links[block], BoundedLink):
                    lo, hi = NU_BOUNDS
                    value = problem.links[block].link(float(np.clip(value, lo * 1.01, hi * 0.99)))
                x[s.start] = value
            elif len(coef) > 1:
                slopes = coef[1:][kept]
                x[s] = np.concatenate(([coef[0] + centre @ slopes], slopes * scale))
            else:
                x[s.start] = coef[0]
        return x

    b, *_ = np.linalg.lstsq(D, y, rcond=None)
    sd = max(float(np.sqrt(np.mean((y - D @ b) ** 2))), 1e-3)
    dist = problem.dist
    sigma0 = dist.sigma_from_log_sd(sd, nu=1.0)
    nu0 = 1.0 if dist.has_nu else None
    if dist.mu_link == "log":
        b = b.copy()
        b[0] -= float(dist.mean_log(1.0, sigma0, nu0))
    x[problem.slices["mu"]] = b
    x[problem.slices["sigma"].start] = np.log(sigma0)
    if dist.has_nu:
        link = problem.links["nu"]
        x[problem.slices["nu"].start] = link.link(nu0) if isinstance(link, BoundedLink) else nu0
    return x


def fit_ml(
    family: str,
    X,
    tau,
    link_mode: LinkMode = "single",
    names=None,
    init: FittedModel | None = None,
    max_iter: int = MAX_ITER,
) -> FittedModel:
    """Maximum-likelihood fit of `family` with parameters mapped through their links.

    A fit that does not converge is returned with converged=False and the
    best parameters found; it does not raise.
    """
    spec = LinkSpec(family, link_mode)
    if link_mode == "three-link" and not spec.dist.has_nu:
        logger.info("{} has no shape parameter; three-link fits as two-link", family)
    X, tau, names = _check_inputs(X, tau, names)
    n, p = X.shape
    kept, aliased = _drop_aliased(X, names)
    Xk = X[:, kept]
    centre = Xk.mean(axis=0)
    scale = Xk.std(axis=0)
    D = np.column_stack([np.ones(n), (Xk - centre) / scale])

    problem = _Problem(spec, D, tau)
    x0 = _start_values(problem, np.log(tau), init, centre, scale, kept)
    outcome = _maximise(problem, x0, max_iter)
    converged, message = outcome.converged, outcome.message

    try:
        cov = linalg.inv(-problem.hessian(outcome.x))
        if np.any(np.diag(cov) < 0) or not np.all(np.isfinite(cov)):
            raise linalg.LinAlgError("negative variance")
    except (FitError, linalg.LinAlgError, ValueError):
        cov = np.full((problem.size, problem.size), np.nan)
        if converged:
            converged, message = False, "information matrix not positive definite"

    coefs: dict[str, np.ndarray] = {}
    ses: dict[str, np.ndarray] = {}
    for block, s in problem.slices.items():
        est = outcome.x[s]
        block_cov = cov[s, s]
        if s.stop - s.start == 1:
            link = problem.links[block]
            if isinstance(link, BoundedLink):
                value = float(link.inverse(est[0]))
                se = abs(float(link.derivative(est[0]))) * np.sqrt(block_cov[0, 0])
                lo, hi = NU_BOUNDS
                if min(value - lo, hi - value) < 1e-6 * (hi - lo):
                    converged, message = False, f"nu at bound ({value:.6g})"
            else:
                value, se = float(est[0]), float(np.sqrt(block_cov[0, 0]))
            coefs[block], ses[block] = np.array([value]), np.array([se])
            continue
        # back to the raw covariate scale: slope/scale, intercept - sum(slope*centre/scale)
        A = np.eye(len(est))
        A[0, 1:] = -centre / scale
        A[np.arange(1, len(est)), np.arange(1, len(est))] = 1.0 / scale
        raw = A @ est
        raw_se = np.sqrt(np.diag(A @ block_cov @ A.T))
        coefs[block] = _expand(raw, kept, p, 0.0)
        ses[block] = _expand(raw_se, kept, p, np.nan)

    model = FittedModel(
        family=family,
        link_mode=link_mode,
        covariates=names,
        coefs=coefs,
        ses=ses,
        loglik=float(outcome.loglik),
        pseudo_r2=np.nan,
        converged=converged,
        iterations=outcome.iterations,
        n_obs=n,
        method="ml",
        df_resid=n - problem.size,
        aliased=aliased,
        message=message,
    )
    if spec.active["nu"]:
        nu = model.linear_predictor("nu", X)
        if np.any(nu <= NU_BOUNDS[0]) or np.any(nu >= NU_BOUNDS[1]):
            model = replace(model, converged=False, message="fitted nu outside (0.05, 20)")
    if not model.converged:
        logger.warning("{} {} fit did not converge: {}", family, link_mode, model.message)
    return replace(model, pseudo_r2=_pseudo_r2(model, X, tau))


# ============================================
# Inference and diagnostics
# ============================================

class WaldTest(NamedTuple):
    block: str
    name: str
    estimate: float
    se: float
    statistic: float
    p_value: float
    significant: bool
    testable: bool


def wald_tests(model: FittedModel, level: float = 0.05) -> list[WaldTest]:
    """Two-sided tests of each coefficient against zero."""
    if not model.converged:
        raise FitError("Wald tests need a converged model")
    ref = stats.t(model.df_resid) if model.method == "ols" else stats.norm()
    out = []
    for block, coef in model.coefs.items():
        labels = ("(intercept)",) + model.covariates if len(coef) > 1 else ("(scalar)",)
        for name, est, se in zip(labels, coef, model.ses[block]):
            if not (np.isfinite(se) and se > 0):
                out.append(WaldTest(block, name, float(est), float(se), np.nan, np.nan, False, False))
                continue
            t = est / se
            p = float(2 * ref.sf(abs(t)))
            out.append(WaldTest(block, name, float(est), float(se), float(t), p, p < level, True))
    return out


def _pseudo_r2(model: FittedModel, X, tau) -> float:
    y = np.log(tau)
    n = len(y)
    fitted = model.spec.dist.mean_log(*model.params(X))
    fitted = np.broadcast_to(fitted, y.shape)
    if np.ptp(fitted) == 0 or np.ptp(y) == 0:
        r2 = 0.0
    else:
        r2 = float(np.corrcoef(y, fitted)[0, 1] ** 2)
    p = model.n_covariates
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


def pseudo_r2(model: FittedModel, X, tau) -> float:
    """Adjusted R^2 between ln(tau) and the model's conditional mean of ln(tau)."""
    if not model.converged:
        raise FitError("pseudo R^2 needs a converged model")
    X, tau, _ = _check_inputs(X, tau, model.covariates)
    return _pseudo_r2(model, X, tau)


class UnitEffect(NamedTuple):
    name: str
    d_mean: float
    d_variance: float
    direction: int
    total_loading: float


def unit_change_effects(model: FittedModel, x0) -> list[UnitEffect]:
    """Partial derivatives of the conditional mean and variance at x0."""
    if not model.converged:
        raise FitError("unit-change effects need a converged model")
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    if len(x0) != len(model.covariates):
        raise FitError(f"x0 has {len(x0)} entries for {len(model.covariates)} covariates")
    beta = model.coefs["mu"][1:]
    sigma_coef = model.coefs["sigma"]
    alpha = sigma_coef[1:] if len(sigma_coef) > 1 else np.zeros_like(beta)
    dist = model.spec.dist
    mu, sigma, nu = (np.asarray(v)[0] if v is not None else None for v in model.params(x0[None, :]))

    out = []
    for j, name in enumerate(model.covariates):
        if model.family == "lognormal":
            s2 = sigma**2
            mean = np.exp(mu + s2 / 2)
            var = np.expm1(s2) * np.exp(2 * mu + s2)
            d_mean = mean * (beta[j] + s2 * alpha[j])
            d_var = (
                np.exp(s2) * 2 * s2 * alpha[j] * np.exp(2 * mu + s2)
                + var * (2 * beta[j] + 2 * s2 * alpha[j])
            )
        elif model.family == "gamma":
            var = sigma**2 * mu**2
            d_mean = beta[j] * mu
            d_var = var * (2 * beta[j] + 2 * alpha[j])
        else:
            h = 1e-5 * max(1.0, abs(x0[j]))
            up, down = x0.copy(), x0.copy()
            up[j] += h
            down[j] -= h
            m_up, v_up = dist.mean_variance(*model.params(up[None, :]))
            m_dn, v_dn = dist.mean_variance(*model.params(down[None, :]))
            d_mean = float((m_up - m_dn)[0] / (2 * h))
            d_var = float((v_up - v_dn)[0] / (2 * h))
        loading = beta[j] + alpha[j] if len(sigma_coef) > 1 else beta[j]
        out.append(UnitEffect(name, float(d_mean), float(d_var), int(np.sign(beta[j])), float(loading)))
    return out


def conditional_mean(model: FittedModel, X) -> np.ndarray:
    return model.spec.dist.mean_variance(*model.params(X))[0]

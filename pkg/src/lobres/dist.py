"""Response distributions for duration regression.

Every family is parameterised by a location `mu`, a scale `sigma` and, for the
generalised gamma only, a shape `nu`:

- lognormal: ln(tau) ~ Normal(mu, sigma)
- gamma: mean mu, variance sigma^2 mu^2
- weibull: mean mu, shape sigma (scale mu / Gamma(1/sigma + 1))
- gengamma: theta = 1/(sigma^2 nu^2) and theta (tau/mu)^nu ~ Gamma(theta, 1)

The generalised gamma also has a natural form (b, a, k) with
(tau/a)^b ~ Gamma(k, 1). All functions are vectorised over numpy arrays.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DistributionError

EULER_GAMMA = float(np.euler_gamma)


def _as_arrays(*xs):
    return [np.asarray(x, dtype=np.float64) for x in xs]


def _check_tau(tau):
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(~(tau > 0)):
        raise DistributionError("durations must be positive")
    return tau


def _check_level(u):
    u = np.asarray(u, dtype=np.float64)
    if np.any(~((u > 0) & (u < 1))):
        raise DistributionError("quantile level must lie in (0, 1)")
    return u


class ResponseFamily(ABC):
    """One response family in the (mu, sigma[, nu]) parameterisation."""

    name: str
    mu_link: str = "log"
    has_nu: bool = False

    def validate(self, mu, sigma, nu=None):
        mu, sigma = _as_arrays(mu, sigma)
        if np.any(~np.isfinite(mu)) or np.any(~(sigma > 0)) or np.any(~np.isfinite(sigma)):
            raise DistributionError(f"{self.name}: mu must be finite and sigma positive")
        if self.mu_link == "log" and np.any(~(mu > 0)):
            raise DistributionError(f"{self.name}: mu must be positive")
        if self.has_nu:
            nu = np.asarray(nu, dtype=np.float64)
            if np.any(~np.isfinite(nu)) or np.any(nu == 0):
                raise DistributionError(f"{self.name}: nu must be finite and non-zero")
        return mu, sigma, nu

    @abstractmethod
    def log_pdf(self, tau, mu, sigma, nu=None) -> np.ndarray: ...

    @abstractmethod
    def score(self, tau, mu, sigma, nu=None) -> tuple[np.ndarray, ...]:
        """Partial derivatives of log_pdf in (mu, sigma[, nu])."""

    @abstractmethod
    def cdf(self, tau, mu, sigma, nu=None) -> np.ndarray: ...

    @abstractmethod
    def quantile(self, u, mu, sigma, nu=None) -> np.ndarray: ...

    @abstractmethod
    def mean_variance(self, mu, sigma, nu=None) -> tuple[np.ndarray, np.ndarray]: ...

    @abstractmethod
    def mean_log(self, mu, sigma, nu=None) -> np.ndarray:
        """E[ln tau]."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, mu, sigma, nu=None, size=None) -> np.ndarray: ...

    @abstractmethod
    def sigma_from_log_sd(self, sd_log: float, nu: float = 1.0) -> float:
        """Scale whose implied SD of ln tau is roughly `sd_log`."""

    def n_params(self) -> int:
        return 3 if self.has_nu else 2


class Lognormal(ResponseFamily):
    name = "lognormal"
    mu_link = "identity"

    def log_pdf(self, tau, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        tau = _check_tau(tau)
        z = (np.log(tau) - mu) / sigma
        return -0.5 * z**2 - np.log(sigma) - np.log(tau) - 0.5 * np.log(2 * np.pi)

    def score(self, tau, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        r = np.log(_check_tau(tau)) - mu
        return r / sigma**2, -1.0 / sigma + r**2 / sigma**3

    def cdf(self, tau, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        return special.ndtr((np.log(_check_tau(tau)) - mu) / sigma)

    def quantile(self, u, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        return np.exp(mu + sigma * special.ndtri(_check_level(u)))

    def mean_variance(self, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        mean = np.exp(mu + sigma**2 / 2)
        return mean, np.expm1(sigma**2) * np.exp(2 * mu + sigma**2)

    def mean_log(self, mu, sigma, nu=None):
        mu, _, _ = self.validate(mu, sigma)
        return mu

    def sample(self, rng, mu, sigma, nu=None, size=None):
        mu, sigma, _ = self.validate(mu, sigma)
        return np.exp(mu + sigma * rng.standard_normal(size=size or np.broadcast(mu, sigma).shape))

    def sigma_from_log_sd(self, sd_log, nu=1.0):
        return sd_log


class Gamma(ResponseFamily):
    name = "gamma"

    @staticmethod
    def _shape_scale(mu, sigma):
        return 1.0 / sigma**2, sigma**2 * mu

    def log_pdf(self, tau, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        tau = _check_tau(tau)
        k, s = self._shape_scale(mu, sigma)
        return -k * np.log(s) - special.gammaln(k) + (k - 1) * np.log(tau) - tau / s

    def score(self, tau, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        tau = _check_tau(tau)
        k, s = self._shape_scale(mu, sigma)
        d_mu = (tau - mu) / (sigma**2 * mu**2)
        d_sigma = (2 / sigma**3) * (np.log(s) + special.digamma(k) - np.log(tau) - 1 + tau / mu)
        return d_mu, d_sigma

    def cdf(self, tau, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        k, s = self._shape_scale(mu, sigma)
        return special.gammainc(k, _check_tau(tau) / s)

    def quantile(self, u, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        k, s = self._shape_scale(mu, sigma)
        return _finite_quantile(s * special.gammaincinv(k, _check_level(u)), self.name)

    def mean_variance(self, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        return mu * np.ones_like(sigma), sigma**2 * mu**2

    def mean_log(self, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        k, s = self._shape_scale(mu, sigma)
        return special.digamma(k) + np.log(s)

    def sample(self, rng, mu, sigma, nu=None, size=None):
        mu, sigma, _ = self.validate(mu, sigma)
        k, s = self._shape_scale(mu, sigma)
        return rng.gamma(k, s, size=size or np.broadcast(k, s).shape)

    def sigma_from_log_sd(self, sd_log, nu=1.0):
        return sd_log


class Weibull(ResponseFamily):
    name = "weibull"

    @staticmethod
    def _scale(mu, sigma):
        return mu / special.gamma(1.0 / sigma + 1.0)

    def log_pdf(self, tau, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        tau = _check_tau(tau)
        beta = self._scale(mu, sigma)
        return np.log(sigma) - sigma * np.log(beta) + (sigma - 1) * np.log(tau) - (tau / beta) ** sigma

    def score(self, tau, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        tau = _check_tau(tau)
        beta = self._scale(mu, sigma)
        r = (tau / beta) ** sigma
        d_mu = sigma * (r - 1) / mu
        d_sigma = (
            1 / sigma
            + np.log(tau / beta) * (1 - r)
            + (r - 1) * special.digamma(1 / sigma + 1) / sigma
        )
        return d_mu, d_sigma

    def cdf(self, tau, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        return -np.expm1(-((_check_tau(tau) / self._scale(mu, sigma)) ** sigma))

    def quantile(self, u, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        u = _check_level(u)
        return self._scale(mu, sigma) * (-np.log1p(-u)) ** (1 / sigma)

    def mean_variance(self, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        ratio = np.exp(special.gammaln(2 / sigma + 1) - 2 * special.gammaln(1 / sigma + 1))
        return mu * np.ones_like(sigma), mu**2 * (ratio - 1)

    def mean_log(self, mu, sigma, nu=None):
        mu, sigma, _ = self.validate(mu, sigma)
        return np.log(self._scale(mu, sigma)) - EULER_GAMMA / sigma

    def sample(self, rng, mu, sigma, nu=None, size=None):
        mu, sigma, _ = self.validate(mu, sigma)
        beta = self._scale(mu, sigma)
        return beta * rng.weibull(sigma, size=size or np.broadcast(beta, sigma).shape)

    def sigma_from_log_sd(self, sd_log, nu=1.0):
        # SD of ln tau is pi / (sigma sqrt 6)
        return float(np.pi / (sd_log * np.sqrt(6.0)))


class GenGamma(ResponseFamily):
    name = "gengamma"
    has_nu = True

    @staticmethod
    def theta(sigma, nu):
        return 1.0 / (sigma**2 * nu**2)

    def log_pdf(self, tau, mu, sigma, nu=None):
        mu, sigma, nu = self.validate(mu, sigma, nu)
        tau = _check_tau(tau)
        th = self.theta(sigma, nu)
        log_ratio = np.log(tau) - np.log(mu)
        z = np.exp(nu * log_ratio)
        return (
            np.log(np.abs(nu)) + th * np.log(th) + th * nu * log_ratio - th * z
            - special.gammaln(th) - np.log(tau)
        )

    def score(self, tau, mu, sigma, nu=None):
        mu, sigma, nu = self.validate(mu, sigma, nu)
        tau = _check_tau(tau)
        th = self.theta(sigma, nu)
        log_ratio = np.log(tau) - np.log(mu)
        z = np.exp(nu * log_ratio)
        d_theta = np.log(th) + 1 + nu * log_ratio - z - special.digamma(th)
        d_mu = nu * th * (z - 1) / mu
        d_sigma = d_theta * (-2 * th / sigma)
        d_nu = 1 / nu + th * log_ratio * (1 - z) + d_theta * (-2 * th / nu)
        return d_mu, d_sigma, d_nu

    def cdf(self, tau, mu, sigma, nu=None):
        mu, sigma, nu = self.validate(mu, sigma, nu)
        th = self.theta(sigma, nu)
        x = th * (_check_tau(tau) / mu) ** nu
        return np.where(nu > 0, special.gammainc(th, x), special.gammaincc(th, x))

    def quantile(self, u, mu, sigma, nu=None):
        mu, sigma, nu = self.validate(mu, sigma, nu)
        u = _check_level(u)
        th = self.theta(sigma, nu)
        g = np.where(nu > 0, special.gammaincinv(th, u), special.gammainccinv(th, u))
        return _finite_quantile(mu * (g / th) ** (1 / nu), self.name)

    def mean_variance(self, mu, sigma, nu=None):
        mu, sigma, nu = self.validate(mu, sigma, nu)
        th = self.theta(sigma, nu)
        if np.any(th + 1 / nu <= 0) or np.any(th + 2 / nu <= 0):
            raise DistributionError("gengamma moment undefined: theta + 1/nu or theta + 2/nu <= 0")
        m1 = np.exp(special.gammaln(th + 1 / nu) - special.gammaln(th) - np.log(th) / nu)
        m2 = np.exp(special.gammaln(th + 2 / nu) - special.gammaln(th) - 2 * np.log(th) / nu)
        return mu * m1, mu**2 * (m2 - m1**2)

    def mean_log(self, mu, sigma, nu=None):
        mu, sigma, nu = self.validate(mu, sigma, nu)
        th = self.theta(sigma, nu)
        return np.log(mu) + (special.digamma(th) - np.log(th)) / nu

    def sample(self, rng, mu, sigma, nu=None, size=None):
        mu, sigma, nu = self.validate(mu, sigma, nu)
        th = self.theta(sigma, nu)
        g = rng.gamma(th, 1.0, size=size or np.broadcast(mu, th).shape)
        return mu * (g / th) ** (1 / nu)

    def sigma_from_log_sd(self, sd_log, nu=1.0):
        return sd_log / abs(nu)


def _finite_quantile(q: np.ndarray, family: str) -> np.ndarray:
    if np.any(~np.isfinite(q)) or np.any(q <= 0):
        bad = np.flatnonzero(~(np.isfinite(q) & (q > 0)))
        raise DistributionError(
            f"{family} quantile inversion failed at {len(bad)} point(s), first index {bad[0]}"
        )
    return q


FAMILIES: dict[str, ResponseFamily] = {
    f.name: f for f in (Lognormal(), Gamma(), Weibull(), GenGamma())
}


def get_family(name: str) -> ResponseFamily:
    try:
        return FAMILIES[name]
    except KeyError:
        raise DistributionError(f"Unknown family '{name}'. Available: {list(FAMILIES)}") from None


# ============================================
# Parameter sets
# ============================================

@dataclass(frozen=True)
class ParamSet:
    family: str
    mu: float | np.ndarray
    sigma: float | np.ndarray
    nu: float | np.ndarray | None = None

    def __post_init__(self):
        fam = get_family(self.family)
        if fam.has_nu and self.nu is None:
            raise DistributionError("gengamma needs nu")
        fam.validate(self.mu, self.sigma, self.nu)

    @property
    def dist(self) -> ResponseFamily:
        return FAMILIES[self.family]


@dataclass(frozen=True)
class GgdNatural:
    b: float
    a: float
    k: float

    def __post_init__(self):
        if not (self.b > 0 and self.a > 0 and self.k > 0):
            raise DistributionError("natural generalised gamma needs b, a, k > 0")


def to_natural(params: ParamSet) -> GgdNatural:
    if params.family != "gengamma":
        raise DistributionError("natural form exists only for gengamma")
    nu = float(params.nu)
    if nu <= 0:
        raise DistributionError("natural form requires nu > 0")
    th = GenGamma.theta(float(params.sigma), nu)
    return GgdNatural(b=nu, a=float(params.mu) * th ** (-1 / nu), k=th)


def from_natural(nat: GgdNatural) -> ParamSet:
    sigma = 1.0 / (nat.b * np.sqrt(nat.k))
    return ParamSet("gengamma", nat.a * nat.k ** (1 / nat.b), sigma, nat.b)


def lognormal_limit(m: float, s: float, k: float) -> GgdNatural:
    """Generalised gamma with shape k whose ln tau mean and SD are (m, s).

    As k grows the density approaches Lognormal(m, s).
    """
    b = np.sqrt(special.polygamma(1, k)) / s
    return GgdNatural(b=float(b), a=float(np.exp(m - special.digamma(k) / b)), k=float(k))


# ============================================
# ParamSet-level API
# ============================================

def log_pdf(params: ParamSet, tau) -> np.ndarray:
    return params.dist.log_pdf(tau, params.mu, params.sigma, params.nu)


def score(params: ParamSet, tau) -> tuple[np.ndarray, ...]:
    return params.dist.score(tau, params.mu, params.sigma, params.nu)


def cdf(params: ParamSet, tau) -> np.ndarray:
    return params.dist.cdf(tau, params.mu, params.sigma, params.nu)


def quantile(params: ParamSet, u) -> np.ndarray:
    return params.dist.quantile(u, params.mu, params.sigma, params.nu)


def mean_variance(params: ParamSet) -> tuple[np.ndarray, np.ndarray]:
    return params.dist.mean_variance(params.mu, params.sigma, params.nu)


def sample(params: ParamSet, rng: np.random.Generator, size=None) -> np.ndarray:
    return params.dist.sample(rng, params.mu, params.sigma, params.nu, size=size)


def natural_log_pdf(nat: GgdNatural, tau) -> np.ndarray:
    """Generalised gamma log-density in the (b, a, k) form."""
    tau = _check_tau(tau)
    return (
        np.log(nat.b) - nat.k * nat.b * np.log(nat.a) + (nat.b * nat.k - 1) * np.log(tau)
        - (tau / nat.a) ** nat.b - special.gammaln(nat.k)
    )

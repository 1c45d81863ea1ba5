"""
Exponential-family GLM definitions used by the selection engine.

Every family is written as f(y, h) = exp{a(h)y + b(h) + c(y)}, where h = x'beta is the
linear parameter. The module exposes the pieces of that representation together with
the quantities derived from it elsewhere in the engine.

Key components:

- **GlmFamily**:
  Immutable value type naming one of six families (normal with known dispersion,
  normal with free dispersion, logistic, probit, Poisson and exponential with log
  link) and its response measure.

- **Densities and natural terms**:
  `log_density`, `natural_terms`, `mean` and `second_moment` evaluate ln f(y, h),
  (a, a', b'), psi(h) = -b'(h)/a'(h) and the second moment of y given h.

- **Hellinger affinities**:
  `hellinger_affinity` returns the closed-form integral of sqrt(f(., h1) f(., h2)),
  so the per-x squared Hellinger distance is 2 - 2 * affinity.

- **Simulation**:
  `sample_response` draws responses from a `numpy.random.Generator`.

All functions are vectorized over `h` (and `y`) with numpy broadcasting. The normal
family with free dispersion requires the dispersion (inverse variance) to be passed
explicitly on each call.
"""
# Standard library imports
from dataclasses import dataclass
from enum import Enum

# Third-party imports
import numpy as np
from scipy.special import expit, gammaln, log_ndtr, ndtr

# Local project-specific imports
from src.assets.custom_errors import ResponseDomainError, UnsupportedFamilyError

_LOG_2PI: float = float(np.log(2.0 * np.pi))


class FamilyKind(str, Enum):
    """Supported regression families."""
    NORMAL_KNOWN_VAR = "normal_known_var"
    NORMAL_UNKNOWN_VAR = "normal_unknown_var"
    LOGISTIC = "logistic"
    PROBIT = "probit"
    POISSON = "poisson"
    EXPONENTIAL = "exponential"


class ResponseMeasure(str, Enum):
    """Dominating measure of the response."""
    BINARY = "counting-on-{0,1}"
    COUNT = "counting-on-nonneg-integers"
    REAL = "lebesgue-on-reals"
    POSITIVE_REAL = "lebesgue-on-positive-reals"


_MEASURE_OF_KIND: dict[FamilyKind, ResponseMeasure] = {
    FamilyKind.NORMAL_KNOWN_VAR: ResponseMeasure.REAL,
    FamilyKind.NORMAL_UNKNOWN_VAR: ResponseMeasure.REAL,
    FamilyKind.LOGISTIC: ResponseMeasure.BINARY,
    FamilyKind.PROBIT: ResponseMeasure.BINARY,
    FamilyKind.POISSON: ResponseMeasure.COUNT,
    FamilyKind.EXPONENTIAL: ResponseMeasure.POSITIVE_REAL,
}


@dataclass(frozen=True)
class GlmFamily:
    """
    A GLM family.

    Attributes:
        kind (FamilyKind): The regression family.
        dispersion (float | None): Inverse variance for `NORMAL_KNOWN_VAR`; must be None
            for every other kind.
    """
    kind: FamilyKind
    dispersion: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        if self.kind is FamilyKind.NORMAL_KNOWN_VAR:
            if self.dispersion is None or not self.dispersion > 0:
                raise UnsupportedFamilyError(
                    self.kind.value, message="A known-variance normal family needs dispersion > 0.",
                    suggestion="Pass a positive inverse variance as `dispersion`."
                )
            object.__setattr__(self, "dispersion", float(self.dispersion))
        elif self.dispersion is not None:
            raise UnsupportedFamilyError(
                self.kind.value, message="Only the known-variance normal family carries a dispersion.",
                suggestion="Drop `dispersion` or use normal_known_var."
            )

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def response_measure(self) -> ResponseMeasure:
        return _MEASURE_OF_KIND[self.kind]

    @property
    def is_binary(self) -> bool:
        return self.response_measure is ResponseMeasure.BINARY

    @property
    def is_normal(self) -> bool:
        return self.response_measure is ResponseMeasure.REAL


def normal(dispersion: float = 1.0) -> GlmFamily:
    return GlmFamily(FamilyKind.NORMAL_KNOWN_VAR, dispersion)


def family_from_name(name: str, dispersion: float | None = None) -> GlmFamily:
    """
    Builds a family from its configuration name (e.g. "logistic").

    Raises:
        UnsupportedFamilyError: If the name is unknown.
    """
    try:
        kind = FamilyKind(name)
    except ValueError as err:
        raise UnsupportedFamilyError(
            name, message="Unknown family name.",
            suggestion=f"Use one of {[k.value for k in FamilyKind]}."
        ) from err
    return GlmFamily(kind, dispersion if kind is FamilyKind.NORMAL_KNOWN_VAR else None)


def resolve_dispersion(family: GlmFamily, dispersion: float | None = None) -> float:
    """
    Returns the dispersion to use for a normal family.

    Raises:
        UnsupportedFamilyError: If the family is not normal, or if it is the free-dispersion
            family and no dispersion was supplied.
    """
    if family.kind is FamilyKind.NORMAL_KNOWN_VAR:
        return family.dispersion if dispersion is None else float(dispersion)
    if family.kind is FamilyKind.NORMAL_UNKNOWN_VAR:
        if dispersion is None or not dispersion > 0:
            raise UnsupportedFamilyError(
                family.name, message="A positive dispersion must be supplied for this family.",
                suggestion="Pass the sampled dispersion (inverse variance)."
            )
        return float(dispersion)
    raise UnsupportedFamilyError(family.name, message="Family has no dispersion parameter.")


def check_response(family: GlmFamily, y) -> np.ndarray:
    """
    Validates that every response value lies in the family's support.

    Args:
        family (GlmFamily): The family.
        y (array-like): Response values.

    Returns:
        np.ndarray: The responses as a float array.

    Raises:
        ResponseDomainError: Naming the family and the first offending value.
    """
    y = np.asarray(y, dtype=float)
    measure = family.response_measure
    if measure is ResponseMeasure.BINARY:
        bad = (y != 0.0) & (y != 1.0)
    elif measure is ResponseMeasure.COUNT:
        bad = (y < 0) | (y != np.floor(y))
    elif measure is ResponseMeasure.POSITIVE_REAL:
        bad = ~(y > 0)
    else:
        bad = ~np.isfinite(y)
    bad |= ~np.isfinite(y)
    if np.any(bad):
        raise ResponseDomainError(family.name, y[bad].flat[0])
    return y


def _binary_log_means(family: GlmFamily, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # ln(mu), ln(1 - mu)
    if family.kind is FamilyKind.LOGISTIC:
        return -np.logaddexp(0.0, -h), -np.logaddexp(0.0, h)
    return log_ndtr(h), log_ndtr(-h)


def log_density(family: GlmFamily, y, h, dispersion: float | None = None, validate: bool = True):
    """
    Evaluates ln f(y, h).

    Args:
        family (GlmFamily): The family.
        y (array-like): Response values in the family's support.
        h (array-like): Linear parameters.
        dispersion (float | None): Dispersion override for normal families.
        validate (bool): Check the support of `y`. Callers holding already validated
            responses pass False.

    Returns:
        np.ndarray | float: The log density, broadcast over `y` and `h`.

    Raises:
        ResponseDomainError: If any `y` lies outside the support.
    """
    y = check_response(family, y) if validate else np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    kind = family.kind
    if family.is_normal:
        phi = resolve_dispersion(family, dispersion)
        out = -0.5 * phi * (y - h) ** 2 - 0.5 * (_LOG_2PI - np.log(phi))
    elif family.is_binary:
        log_mu, log_one_minus = _binary_log_means(family, h)
        out = y * log_mu + (1.0 - y) * log_one_minus
    elif kind is FamilyKind.POISSON:
        out = h * y - np.exp(h) - gammaln(y + 1.0)
    else:
        out = -np.exp(-h) * y - h
    return out[()] if isinstance(out, np.ndarray) else out


def natural_terms(family: GlmFamily, h, dispersion: float | None = None):
    """
    Returns (a(h), a'(h), b'(h)) for the family.

    The probit terms are evaluated from log-Phi to stay accurate in both tails.
    """
    h = np.asarray(h, dtype=float)
    kind = family.kind
    if family.is_normal:
        phi = resolve_dispersion(family, dispersion)
        a, a_prime, b_prime = phi * h, np.full_like(h, phi), -phi * h
    elif kind is FamilyKind.LOGISTIC:
        a, a_prime, b_prime = h.copy(), np.ones_like(h), -expit(h)
    elif kind is FamilyKind.PROBIT:
        log_pdf = -0.5 * h ** 2 - 0.5 * _LOG_2PI
        log_cdf, log_sf = log_ndtr(h), log_ndtr(-h)
        a = log_cdf - log_sf
        a_prime = np.exp(log_pdf - log_cdf) + np.exp(log_pdf - log_sf)
        b_prime = -np.exp(log_pdf - log_sf)
    elif kind is FamilyKind.POISSON:
        a, a_prime, b_prime = h.copy(), np.ones_like(h), -np.exp(h)
    else:
        a, a_prime, b_prime = -np.exp(-h), np.exp(-h), -np.ones_like(h)
    return a[()], a_prime[()], b_prime[()]


def mean(family: GlmFamily, h):
    """
    Mean function psi(h) = E(y | h).
    """
    h = np.asarray(h, dtype=float)
    kind = family.kind
    if family.is_normal:
        out = h.copy()
    elif kind is FamilyKind.LOGISTIC:
        out = expit(h)
    elif kind is FamilyKind.PROBIT:
        out = ndtr(h)
    else:
        out = np.exp(h)
    return out[()]


def second_moment(family: GlmFamily, h, dispersion: float | None = None):
    """
    Second moment E(y^2 | h) of the response.
    """
    h = np.asarray(h, dtype=float)
    mu = np.asarray(mean(family, h))
    kind = family.kind
    if family.is_normal:
        out = h ** 2 + 1.0 / resolve_dispersion(family, dispersion)
    elif family.is_binary:
        out = mu
    elif kind is FamilyKind.POISSON:
        out = mu + mu ** 2
    else:
        out = 2.0 * mu ** 2
    return np.asarray(out)[()]


def hellinger_affinity(family: GlmFamily, h1, h2, dispersion1: float | None = None,
                       dispersion2: float | None = None):
    """
    Closed-form Hellinger affinity between f(., h1) and f(., h2).

    Args:
        family (GlmFamily): The family shared by both densities.
        h1, h2 (array-like): Linear parameters.
        dispersion1, dispersion2 (float | None): Per-density dispersions for normal
            families; each defaults to the family's own dispersion.

    Returns:
        np.ndarray | float: Affinity in (0, 1].
    """
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    kind = family.kind
    if family.is_normal:
        var1 = 1.0 / resolve_dispersion(family, dispersion1)
        var2 = 1.0 / resolve_dispersion(family, dispersion2)
        total = var1 + var2
        out = np.sqrt(2.0 * np.sqrt(var1 * var2) / total) * np.exp(-(h1 - h2) ** 2 / (4.0 * total))
    elif family.is_binary:
        log_mu1, log_nu1 = _binary_log_means(family, h1)
        log_mu2, log_nu2 = _binary_log_means(family, h2)
        out = np.exp(0.5 * (log_mu1 + log_mu2)) + np.exp(0.5 * (log_nu1 + log_nu2))
    elif kind is FamilyKind.POISSON:
        out = np.exp(-0.5 * (np.exp(0.5 * h1) - np.exp(0.5 * h2)) ** 2)
    else:
        out = 1.0 / np.cosh(0.5 * (h1 - h2))
    return np.minimum(out, 1.0)[()]


def sample_response(family: GlmFamily, h, rng: np.random.Generator,
                    dispersion: float | None = None) -> np.ndarray:
    """
    Draws one response per entry of `h`.

    Args:
        family (GlmFamily): The family.
        h (array-like): Linear parameters.
        rng (np.random.Generator): Random stream, advanced by the call.
        dispersion (float | None): Dispersion override for normal families.

    Returns:
        np.ndarray: Float array shaped like `h`.
    """
    h = np.asarray(h, dtype=float)
    kind = family.kind
    if family.is_normal:
        scale = 1.0 / np.sqrt(resolve_dispersion(family, dispersion))
        return h + scale * rng.standard_normal(h.shape)
    if family.is_binary:
        return (rng.random(h.shape) < mean(family, h)).astype(float)
    if kind is FamilyKind.POISSON:
        return rng.poisson(np.exp(h)).astype(float)
    return rng.exponential(np.exp(h))

"""
Hellinger distance between fitted GLM densities and the data-generating model.

The joint squared distance is d^2 = E_x[2 - 2 * affinity(h*(x), h(x))], with the
closed-form per-x affinities of `glm_core`. The average over x is exact for the
indicator design (a uniform law on K support points) and Monte Carlo otherwise.

Key components:

- **x laws**: `IndicatorDesign`, `UniformCube` and `GaussianGraph`.
- **TrueModel**: family, beta*, x law and optional true dispersion.
- **XSample**: a frozen set of x points (or the exact indicator support) shared by all
  distance evaluations of a chain.
- `hellinger_distance`, `posterior_hellinger`, `tail_probability`.
"""
# Standard library imports
from dataclasses import dataclass
from enum import Enum

# Third-party imports
import numpy as np

# Local project-specific imports
from src.assets.custom_errors import (ConfigValidationError, DimensionError, FactorizationError,
                                      FamilyMismatchError)
from src.models.glm_core import FamilyKind, GlmFamily, hellinger_affinity
from src.models.prior import ModelIndicator

DEFAULT_X_DRAWS: int = 20_000
MAX_SQUARED_DISTANCE: float = 2.0


# ======================
# X LAWS
# ======================

@dataclass(frozen=True)
class IndicatorDesign:
    """x is a uniformly chosen canonical basis vector of R^K."""
    K: int

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        X = np.zeros((n, self.K))
        X[np.arange(n), rng.integers(self.K, size=n)] = 1.0
        return X


@dataclass(frozen=True)
class UniformCube:
    """x has i.i.d. Uniform[-1, 1] coordinates."""
    K: int

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-1.0, 1.0, size=(n, self.K))


@dataclass(frozen=True, eq=False)
class GaussianGraph:
    """x ~ N(0, precision^{-1})."""
    precision: np.ndarray

    def __post_init__(self) -> None:
        precision = np.array(self.precision, dtype=float)
        if precision.ndim != 2 or precision.shape[0] != precision.shape[1]:
            raise DimensionError(f"Precision matrix must be square, got shape {precision.shape}.")
        if not np.allclose(precision, precision.T):
            raise FactorizationError("Precision matrix is not symmetric.")
        try:
            lower = np.linalg.cholesky(precision)
        except np.linalg.LinAlgError as err:
            raise FactorizationError("Precision matrix is not positive definite.") from err
        precision.setflags(write=False)
        object.__setattr__(self, "precision", precision)
        object.__setattr__(self, "_lower", lower)

    @property
    def K(self) -> int:
        return self.precision.shape[0]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        # x = L'^{-1} z has covariance (L L')^{-1}
        z = rng.standard_normal((self.K, n))
        return np.linalg.solve(self._lower.T, z).T


XLaw = IndicatorDesign | UniformCube | GaussianGraph


@dataclass(frozen=True, eq=False)
class TrueModel:
    """
    Data-generating model p*(y, x).

    Attributes:
        family (GlmFamily): Response family.
        beta_star (np.ndarray): True coefficients, one per covariate.
        x_law (XLaw): Law of the covariates.
        dispersion_star (float | None): True dispersion; required for normal_unknown_var.
    """
    family: GlmFamily
    beta_star: np.ndarray
    x_law: XLaw
    dispersion_star: float | None = None

    def __post_init__(self) -> None:
        beta = np.array(self.beta_star, dtype=float).ravel()
        if beta.size != self.x_law.K:
            raise DimensionError(f"beta* has length {beta.size}, x law has K = {self.x_law.K}.")
        if not np.all(np.isfinite(beta)):
            raise DimensionError("beta* must be finite.")
        if self.family.kind is FamilyKind.NORMAL_UNKNOWN_VAR and self.dispersion_star is None:
            raise ConfigValidationError("truth.dispersion", None,
                                        "A true dispersion is required for normal_unknown_var.")
        beta.setflags(write=False)
        object.__setattr__(self, "beta_star", beta)

    @property
    def K(self) -> int:
        return self.beta_star.size

    @property
    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.beta_star)))


class HellingerMethod(str, Enum):
    EXACT_DISCRETE = "exact-discrete"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class HellingerEstimate:
    """
    A Hellinger distance with its Monte Carlo error.

    Attributes:
        value (float): d, in [0, sqrt(2)].
        se (float): Standard error of d^2 (0 for exact evaluations).
        n_x (int): Number of x points averaged over.
        method (HellingerMethod): Exact support average or Monte Carlo.
        squared (float): d^2, clamped to [0, 2].
    """
    value: float
    se: float
    n_x: int
    method: HellingerMethod
    squared: float

    @classmethod
    def from_per_x(cls, per_x: np.ndarray, exact: bool) -> "HellingerEstimate":
        n_x = per_x.size
        squared = float(np.clip(np.mean(per_x), 0.0, MAX_SQUARED_DISTANCE))
        if exact:
            se, method = 0.0, HellingerMethod.EXACT_DISCRETE
        else:
            se = float(np.std(per_x, ddof=1) / np.sqrt(n_x)) if n_x > 1 else 0.0
            method = HellingerMethod.MONTE_CARLO
        return cls(float(np.sqrt(squared)), se, n_x, method, squared)


@dataclass(frozen=True, eq=False)
class XSample:
    """
    Frozen x points for distance evaluations.

    Attributes:
        X (np.ndarray | None): n_x x K Monte Carlo points, or None for the exact indicator
            support.
        K (int): Number of covariates.
    """
    X: np.ndarray | None
    K: int

    @property
    def exact(self) -> bool:
        return self.X is None

    @property
    def n_x(self) -> int:
        return self.K if self.X is None else self.X.shape[0]

    def linear_predictor(self, gamma: ModelIndicator, beta) -> np.ndarray:
        """h(x) = x_gamma' beta at every sample point."""
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        idx = list(gamma.included)
        if self.X is None:
            # Support point j is e_j, so h(e_j) = beta_j
            h = np.zeros(self.K)
            h[idx] = beta
            return h
        if not idx:
            return np.zeros(self.X.shape[0])
        return self.X[:, idx] @ beta

    def full_predictor(self, beta_full: np.ndarray) -> np.ndarray:
        return np.asarray(beta_full, dtype=float).copy() if self.X is None else self.X @ beta_full


def draw_x_sample(truth: TrueModel, x_source: int | str | None = None,
                  rng: np.random.Generator | None = None) -> XSample:
    """
    Builds the x points used for distance evaluations.

    Args:
        truth (TrueModel): The true model (its x law decides what "exact" means).
        x_source (int | str | None): "exact" or None for the exact indicator support, an
            integer for that many Monte Carlo draws.
        rng (np.random.Generator | None): Stream for Monte Carlo draws.

    Returns:
        XSample: The frozen points.
    """
    if x_source in (None, "exact") and isinstance(truth.x_law, IndicatorDesign):
        return XSample(None, truth.K)
    n_x = DEFAULT_X_DRAWS if x_source in (None, "exact") else int(x_source)
    if n_x < 2:
        raise ConfigValidationError("hellinger.x_draws", n_x, "At least two x draws are needed.")
    rng = rng if rng is not None else np.random.default_rng(0)
    return XSample(truth.x_law.sample(n_x, rng), truth.K)


def _candidate(candidate) -> tuple[ModelIndicator, np.ndarray, float | None]:
    if hasattr(candidate, "gamma"):
        return candidate.gamma, candidate.beta, candidate.phi
    gamma, beta, *rest = candidate
    return gamma, beta, (rest[0] if rest else None)


def per_x_squared_distance(truth: TrueModel, x_sample: XSample, gamma: ModelIndicator, beta,
                           phi: float | None = None) -> np.ndarray:
    """2 - 2 * affinity at every sample point."""
    if gamma.K != truth.K:
        raise DimensionError(f"Candidate built for K = {gamma.K}, truth has K = {truth.K}.")
    h_star = x_sample.full_predictor(truth.beta_star)
    h = x_sample.linear_predictor(gamma, beta)
    if truth.family.is_normal:
        affinity = hellinger_affinity(truth.family, h_star, h, truth.dispersion_star, phi)
    else:
        affinity = hellinger_affinity(truth.family, h_star, h)
    return 2.0 - 2.0 * np.asarray(affinity)


def hellinger_distance(truth: TrueModel, candidate, x_source: int | str | None = None,
                       rng: np.random.Generator | None = None, family: GlmFamily | None = None,
                       x_sample: XSample | None = None) -> HellingerEstimate:
    """
    Hellinger distance between a candidate (gamma, beta, phi) and the true model.

    Args:
        truth (TrueModel): The true model p*.
        candidate: A `PosteriorDraw` or a (gamma, beta[, phi]) tuple.
        x_source (int | str | None): See `draw_x_sample`; ignored when `x_sample` is given.
        rng (np.random.Generator | None): Stream for Monte Carlo x draws.
        family (GlmFamily | None): Family the candidate was fitted with, if known.
        x_sample (XSample | None): Pre-drawn x points.

    Returns:
        HellingerEstimate: The distance, exact on the indicator design.

    Raises:
        FamilyMismatchError: If `family` differs from the truth's family.
    """
    if family is not None and family != truth.family:
        raise FamilyMismatchError(truth.family.name, family.name)
    x_sample = x_sample if x_sample is not None else draw_x_sample(truth, x_source, rng)
    gamma, beta, phi = _candidate(candidate)
    per_x = per_x_squared_distance(truth, x_sample, gamma, beta, phi)
    return HellingerEstimate.from_per_x(per_x, x_sample.exact)


def posterior_hellinger(chain, truth: TrueModel, x_source: int | str | None = None,
                        rng: np.random.Generator | None = None,
                        x_sample: XSample | None = None) -> list[HellingerEstimate]:
    """
    Distance of every chain draw to the truth, on one common set of x points.

    Raises:
        DimensionError: If the chain is empty.
        FamilyMismatchError: If the chain was fitted with another family.
    """
    if not chain.draws:
        raise DimensionError("Posterior Hellinger distances need a non-empty chain.")
    if chain.family is not None and chain.family != truth.family:
        raise FamilyMismatchError(truth.family.name, chain.family.name)
    x_sample = x_sample if x_sample is not None else draw_x_sample(truth, x_source, rng)
    return [
        HellingerEstimate.from_per_x(
            per_x_squared_distance(truth, x_sample, draw.gamma, draw.beta, draw.phi), x_sample.exact
        )
        for draw in chain.draws
    ]


def distance_values(distances) -> np.ndarray:
    """Plain d values from HellingerEstimate objects or numbers."""
    return np.array([d.value if isinstance(d, HellingerEstimate) else float(d) for d in distances])


def tail_probability(distances, epsilon: float) -> float:
    """
    Fraction of distances strictly greater than epsilon.

    Raises:
        DimensionError: If `distances` is empty.
        ConfigValidationError: If epsilon < 0.
    """
    values = distance_values(distances)
    if values.size == 0:
        raise DimensionError("Tail probability needs at least one distance.")
    if epsilon < 0:
        raise ConfigValidationError("epsilon", epsilon, "epsilon must be non-negative.")
    return float(np.mean(values > epsilon))

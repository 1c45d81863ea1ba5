"""
Prior over model indicators, slab coefficients and (optionally) the normal dispersion.

The model indicator gamma is drawn as i.i.d. Bernoulli(lambda) flags with
lambda = r_exp / K, kept only when |gamma| <= r_max. Included coefficients follow a
Gaussian slab N(0, V_gamma) and, when a dispersion prior is configured, the dispersion
phi follows Ga(kappa, rate) with beta_gamma | phi ~ N(0, V_gamma / phi).

Key components:

- **ModelIndicator**: sorted tuple of included 0-based covariate indices plus K.
- **PriorSpec**: r_exp, r_max, the V_gamma policy (`IdentityScale` or `AR1`), the
  optional `DispersionPrior`, the model-prior kind and optional eigenvalue bound (B, v).
- **OUT_OF_SUPPORT**: typed sentinel returned instead of a log probability for states
  the prior excludes.
- `log_prior_model`, `log_prior_coeffs`, `v_policy_bounds`, `sample_prior`.

The truncation constant is computed exactly from binomial terms, so it stays usable
for K far beyond what can be enumerated.
"""
# Standard library imports
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

# Third-party imports
import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.special import gammaln, logsumexp

# Local project-specific imports
from src.assets.custom_errors import ConfigValidationError, DimensionError, FactorizationError

_LOG_2PI: float = float(np.log(2.0 * np.pi))


class OutOfSupport:
    """Marker for a state with zero prior mass."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "OUT_OF_SUPPORT"

    def __bool__(self) -> bool:
        return False


OUT_OF_SUPPORT = OutOfSupport()


def is_out_of_support(value) -> bool:
    return value is OUT_OF_SUPPORT


@dataclass(frozen=True)
class ModelIndicator:
    """
    Set of included covariates.

    Attributes:
        included (tuple[int, ...]): Distinct 0-based indices, stored sorted.
        K (int): Total number of covariates.
    """
    included: tuple[int, ...]
    K: int

    def __post_init__(self) -> None:
        included = tuple(sorted(int(j) for j in self.included))
        if len(set(included)) != len(included):
            raise DimensionError(f"Duplicate indices in model indicator: {included}.")
        if included and (included[0] < 0 or included[-1] >= self.K):
            raise DimensionError(f"Model indicator indices {included} outside [0, {self.K - 1}].")
        object.__setattr__(self, "included", included)

    @classmethod
    def empty(cls, K: int) -> "ModelIndicator":
        return cls((), K)

    @classmethod
    def from_mask(cls, mask) -> "ModelIndicator":
        mask = np.asarray(mask, dtype=bool)
        return cls(tuple(np.flatnonzero(mask).tolist()), mask.size)

    @property
    def size(self) -> int:
        return len(self.included)

    def mask(self) -> np.ndarray:
        out = np.zeros(self.K, dtype=bool)
        out[list(self.included)] = True
        return out

    def add(self, j: int) -> "ModelIndicator":
        return ModelIndicator(self.included + (j,), self.K)

    def remove(self, j: int) -> "ModelIndicator":
        return ModelIndicator(tuple(i for i in self.included if i != j), self.K)

    def __contains__(self, j: int) -> bool:
        return j in self.included


@dataclass(frozen=True)
class IdentityScale:
    """V_gamma = c * I."""
    c: float = 1.0

    def covariance(self, size: int) -> np.ndarray:
        return self.c * np.eye(size)


@dataclass(frozen=True)
class AR1:
    """V_gamma[i, k] = c * rho^|i - k| over the positions of the included indices."""
    c: float = 1.0
    rho: float = 0.0

    def covariance(self, size: int) -> np.ndarray:
        pos = np.arange(size)
        return self.c * self.rho ** np.abs(pos[:, None] - pos[None, :])


@dataclass(frozen=True)
class DispersionPrior:
    """Gamma prior Ga(kappa, rate) on the normal dispersion (inverse variance)."""
    kappa: float
    rate: float


@dataclass(frozen=True)
class EigenBound:
    """Declared bound H(size) <= B * size^v."""
    B: float
    v: float


class ModelPriorKind(str, Enum):
    TRUNCATED_BERNOULLI = "truncated_bernoulli"
    UNIFORM_SIZE_CAPPED = "uniform_size_capped"


@dataclass(frozen=True)
class PriorSpec:
    """
    Full prior.

    Attributes:
        r_exp (int): Expected model size before truncation.
        r_max (int): Largest allowed model size.
        v_policy (IdentityScale | AR1): Slab covariance policy.
        dispersion (DispersionPrior | None): Gamma prior on the dispersion, if modeled.
        model_prior (ModelPriorKind): Truncated Bernoulli (default) or uniform over
            models of size <= r_max.
        eigen_bound (EigenBound | None): Declared eigenvalue growth bound.
    """
    r_exp: int
    r_max: int
    v_policy: IdentityScale | AR1 = field(default_factory=IdentityScale)
    dispersion: DispersionPrior | None = None
    model_prior: ModelPriorKind = ModelPriorKind.TRUNCATED_BERNOULLI
    eigen_bound: EigenBound | None = None

    def __post_init__(self) -> None:
        if int(self.r_exp) < 1:
            raise ConfigValidationError("prior.r_exp", self.r_exp, "r_exp must be at least 1.")
        if int(self.r_exp) > int(self.r_max):
            raise ConfigValidationError("prior.r_exp", self.r_exp, "r_exp must not exceed r_max.")
        if not self.v_policy.c > 0:
            raise ConfigValidationError("prior.v_policy.c", self.v_policy.c, "Slab scale must be positive.")
        if isinstance(self.v_policy, AR1) and not -1.0 < self.v_policy.rho < 1.0:
            raise ConfigValidationError("prior.v_policy.rho", self.v_policy.rho,
                                        "AR1 correlation must lie in (-1, 1).")
        if self.dispersion is not None and not (self.dispersion.kappa > 0 and self.dispersion.rate > 0):
            raise ConfigValidationError("prior.dispersion", self.dispersion,
                                        "Gamma shape and rate must be positive.")
        object.__setattr__(self, "model_prior", ModelPriorKind(self.model_prior))

    def check_dimension(self, K: int) -> None:
        """
        Enforces 1 <= r_exp <= r_max < K.

        Raises:
            ConfigValidationError: If r_max >= K.
        """
        if not self.r_max < K:
            raise ConfigValidationError("prior.r_max", self.r_max,
                                        f"r_max must be smaller than the covariate count K = {K}.")


# ======================
# MODEL PRIOR
# ======================

def _log_binomial_coefficients(K: int, r_top: int) -> np.ndarray:
    # ln C(K, r) for r = 0..r_top, accurate for very large K
    r = np.arange(r_top + 1)
    log_falling = np.concatenate(([0.0], np.cumsum(np.log(float(K) - np.arange(r_top)))))
    return log_falling - gammaln(r + 1.0)


@lru_cache(maxsize=256)
def _log_size_weights(r_exp: int, r_max: int, kind: ModelPriorKind, K: int) -> np.ndarray:
    # Unnormalized ln pi(|gamma| = r) summed over all models of size r, r = 0..min(r_max, K)
    r_top = min(r_max, K)
    log_binom = _log_binomial_coefficients(K, r_top)
    if kind is ModelPriorKind.UNIFORM_SIZE_CAPPED:
        return log_binom
    if not r_exp < K:
        raise ConfigValidationError("prior.r_exp", r_exp, f"r_exp must be smaller than K = {K}.")
    lam = r_exp / K
    r = np.arange(r_top + 1)
    return log_binom + r * np.log(lam) + (K - r) * np.log1p(-lam)


def log_model_normalizer(spec: PriorSpec, K: int) -> float:
    """
    Exact log truncation constant ln Z of the model prior for K covariates.
    """
    return float(logsumexp(_log_size_weights(spec.r_exp, spec.r_max, spec.model_prior, int(K))))


def log_prior_size(spec: PriorSpec, K: int, size: int):
    """
    Log prior probability of one particular model of the given size.

    Returns:
        float | OutOfSupport: The log probability, or OUT_OF_SUPPORT when size > r_max.
    """
    if size > spec.r_max or size > K:
        return OUT_OF_SUPPORT
    log_z = log_model_normalizer(spec, K)
    if spec.model_prior is ModelPriorKind.UNIFORM_SIZE_CAPPED:
        return -log_z
    lam = spec.r_exp / K
    return float(size * np.log(lam) + (K - size) * np.log1p(-lam) - log_z)


def log_prior_model(spec: PriorSpec, gamma: ModelIndicator):
    """
    Normalized log prior ln pi(gamma).

    Args:
        spec (PriorSpec): The prior.
        gamma (ModelIndicator): The model.

    Returns:
        float | OutOfSupport: ln pi(gamma), or OUT_OF_SUPPORT when |gamma| > r_max.
    """
    return log_prior_size(spec, gamma.K, gamma.size)


def log_prior_size_mass(spec: PriorSpec, K: int) -> np.ndarray:
    """Normalized ln pi(|gamma| = r) for r = 0..min(r_max, K)."""
    weights = _log_size_weights(spec.r_exp, spec.r_max, spec.model_prior, int(K))
    return weights - logsumexp(weights)


# ======================
# COEFFICIENT PRIOR
# ======================

@lru_cache(maxsize=512)
def _slab_factor(policy: IdentityScale | AR1, size: int) -> tuple[np.ndarray, float]:
    # Lower Cholesky factor of V_gamma and ln det V_gamma
    cov = policy.covariance(size)
    try:
        lower = cholesky(cov, lower=True)
    except np.linalg.LinAlgError as err:
        raise FactorizationError(f"Slab covariance of size {size} is not positive definite.") from err
    lower.setflags(write=False)
    return lower, float(2.0 * np.sum(np.log(np.diag(lower))))


def slab_covariance(spec: PriorSpec, size: int) -> np.ndarray:
    return spec.v_policy.covariance(size)


def slab_precision(spec: PriorSpec, size: int) -> np.ndarray:
    """V_gamma^{-1}, computed from the cached Cholesky factor."""
    lower, _ = _slab_factor(spec.v_policy, size)
    inv_lower = solve_triangular(lower, np.eye(size), lower=True)
    return inv_lower.T @ inv_lower


def slab_log_det(spec: PriorSpec, size: int) -> float:
    return _slab_factor(spec.v_policy, size)[1] if size else 0.0


def log_slab_density(spec: PriorSpec, beta, phi: float | None = None) -> float:
    """
    Log density of beta under N(0, V) or N(0, V / phi).
    """
    beta = np.asarray(beta, dtype=float)
    size = beta.size
    if size == 0:
        return 0.0
    lower, log_det = _slab_factor(spec.v_policy, size)
    z = solve_triangular(lower, beta, lower=True)
    scale = 1.0 if phi is None else float(phi)
    return float(-0.5 * size * _LOG_2PI - 0.5 * log_det + 0.5 * size * np.log(scale)
                 - 0.5 * scale * z @ z)


def log_dispersion_density(spec: PriorSpec, phi: float) -> float:
    """Log density of Ga(kappa, rate) at phi."""
    kappa, rate = spec.dispersion.kappa, spec.dispersion.rate
    return float(kappa * np.log(rate) - gammaln(kappa) + (kappa - 1.0) * np.log(phi) - rate * phi)


def log_prior_coeffs(spec: PriorSpec, gamma: ModelIndicator, beta, phi: float | None = None) -> float:
    """
    Log prior density of the included coefficients (and of phi when modeled).

    Raises:
        DimensionError: If len(beta) != |gamma|, or if phi is present without a
            dispersion prior (or missing with one).
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if beta.size != gamma.size:
        raise DimensionError(f"Coefficient vector has length {beta.size}, model size is {gamma.size}.")
    if (phi is None) != (spec.dispersion is None):
        raise DimensionError("A dispersion value must be given exactly when a dispersion prior is set.")
    if phi is None:
        return log_slab_density(spec, beta)
    return log_slab_density(spec, beta, phi) + log_dispersion_density(spec, phi)


@lru_cache(maxsize=512)
def _policy_bounds(policy: IdentityScale | AR1, size: int) -> tuple[float, float, float]:
    if isinstance(policy, IdentityScale):
        top, top_inv = policy.c, 1.0 / policy.c
    else:
        eigenvalues = np.linalg.eigvalsh(policy.covariance(size))
        top, top_inv = float(eigenvalues[-1]), float(1.0 / eigenvalues[0])
    return top, top_inv, max(top, top_inv)


def v_policy_bounds(spec: PriorSpec, size: int) -> tuple[float, float, float]:
    """
    Largest eigenvalues of V_gamma and V_gamma^{-1} for a model of the given size.

    Args:
        spec (PriorSpec): The prior.
        size (int): Model size, at least 1.

    Returns:
        tuple[float, float, float]: (ch1(V), ch1(V^{-1}), H = max of the two).
    """
    if size < 1:
        raise DimensionError(f"Eigenvalue bounds need a model size >= 1, got {size}.")
    return _policy_bounds(spec.v_policy, int(size))


def eigen_bound_holds(spec: PriorSpec, size: int) -> bool:
    """
    Checks H(size) <= B * size^v for the declared eigenvalue bound.

    Raises:
        ConfigValidationError: If the prior declares no eigenvalue bound.
    """
    if spec.eigen_bound is None:
        raise ConfigValidationError("prior.eigen_bound", None, "No eigenvalue bound (B, v) declared.")
    _, _, h_value = v_policy_bounds(spec, size)
    return h_value <= spec.eigen_bound.B * size ** spec.eigen_bound.v


# ======================
# SAMPLING
# ======================

def sample_model(spec: PriorSpec, K: int, rng: np.random.Generator) -> ModelIndicator:
    """
    Draws gamma from the model prior (rejection for the truncated Bernoulli prior).
    """
    if spec.model_prior is ModelPriorKind.UNIFORM_SIZE_CAPPED:
        probs = np.exp(log_prior_size_mass(spec, K))
        size = int(rng.choice(probs.size, p=probs / probs.sum()))
        return ModelIndicator(tuple(rng.choice(K, size=size, replace=False).tolist()), K)
    lam = spec.r_exp / K
    while True:
        mask = rng.random(K) < lam
        if mask.sum() <= spec.r_max:
            return ModelIndicator.from_mask(mask)


def sample_coefficients(spec: PriorSpec, size: int, rng: np.random.Generator,
                        phi: float | None = None) -> np.ndarray:
    if size == 0:
        return np.zeros(0)
    lower, _ = _slab_factor(spec.v_policy, size)
    draw = lower @ rng.standard_normal(size)
    return draw if phi is None else draw / np.sqrt(phi)


def sample_prior(spec: PriorSpec, K: int, rng: np.random.Generator
                 ) -> tuple[ModelIndicator, np.ndarray, float | None]:
    """
    Draws (gamma, beta_gamma, phi) from the prior.

    Returns:
        tuple: The model, its coefficients and the dispersion (None when not modeled).
    """
    gamma = sample_model(spec, K, rng)
    phi = None
    if spec.dispersion is not None:
        phi = float(rng.gamma(spec.dispersion.kappa, 1.0 / spec.dispersion.rate))
    return gamma, sample_coefficients(spec, gamma.size, rng, phi), phi

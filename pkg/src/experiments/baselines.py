"""
No-selection baselines and the indicator-design counterexample.

With x a uniformly chosen basis vector of R^K, y ~ N(0, 1) independent of x and an
i.i.d. N(0, 1) prior on all K coefficients (no variable selection), the posterior keeps
the coordinates never observed at their prior. With K = 2n the posterior then stays
away from the truth: pi[d^2 >= eta | D^n] >= 1 - 1 / (eta^2 n) with
eta = 1/2 - 1/sqrt(5).

Key components:

- `simulate_counterexample`: the design as a `Dataset`.
- `full_model_posterior`: exact per-coordinate normal posterior for that design.
- `chebyshev_check` / `run_counterexample`: posterior draws of d^2 against the bound.
- `full_model_normal_baseline`: exact posterior draws of the untruncated full model for
  any normal-linear design.
"""
# Standard library imports
from dataclasses import dataclass

# Third-party imports
import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

# Local project-specific imports
from src.assets.custom_errors import (ConfigValidationError, DimensionError, SizeGuardError,
                                      UnsupportedFamilyError)
from src.models.glm_core import FamilyKind, normal
from src.models.posterior import Dataset

ETA: float = 0.5 - 1.0 / np.sqrt(5.0)
MIN_POSTERIOR_DRAWS: int = 10_000
FULL_MODEL_K_LIMIT: int = 5_000
_DRAW_CHUNK_CELLS: int = 4_000_000


@dataclass(frozen=True, eq=False)
class CounterexampleRun:
    """
    One replicate of the counterexample.

    Attributes:
        n, K (int): Sample size and covariate count.
        seed (int | None): Seed of the replicate stream, when known.
        posterior_mean, posterior_var (np.ndarray): Per-coordinate posterior moments.
        d2_summary (dict[str, float]): mean, median, q10 and q90 of the d^2 draws.
        bound_value (float): 1 - 1 / (eta^2 n).
        empirical_tail (float): Fraction of draws with d >= sqrt(eta).
        tail_se (float): Binomial standard error of the tail fraction.
        passed (bool): empirical_tail >= bound_value - 3 * tail_se.
        vacuous (bool): True when eta^2 n <= 1 (the bound says nothing).
    """
    n: int
    K: int
    seed: int | None
    posterior_mean: np.ndarray
    posterior_var: np.ndarray
    d2_summary: dict[str, float]
    bound_value: float
    empirical_tail: float
    tail_se: float
    passed: bool
    vacuous: bool


def chebyshev_bound(n: int, eta: float = ETA) -> float:
    """1 - 1 / (eta^2 n)."""
    return 1.0 - 1.0 / (eta ** 2 * n)


def _draw_indicator_design(n: int, K: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # Column index of the single 1 in each row, and the responses
    z = rng.integers(K, size=n)
    y = rng.standard_normal(n)
    return z, y


def _indicator_posterior(z: np.ndarray, y: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(z, minlength=K).astype(float)
    sums = np.bincount(z, weights=y, minlength=K)
    return sums / (1.0 + counts), 1.0 / (1.0 + counts)


def simulate_counterexample(n: int, K: int, rng: np.random.Generator) -> Dataset:
    """
    Indicator design with n rows and K columns and standard normal responses.

    Raises:
        ConfigValidationError: If K < 1.
    """
    if K < 1:
        raise ConfigValidationError("counterexample.K", K, "K must be at least 1.")
    z, y = _draw_indicator_design(n, K, rng)
    X = np.zeros((n, K))
    X[np.arange(n), z] = 1.0
    return Dataset(X, y, normal(1.0))


def full_model_posterior(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """
    Exact posterior of the full model under an i.i.d. N(0, 1) prior on the indicator design.

    Args:
        data (Dataset): Indicator-design data (each row a basis vector).

    Returns:
        tuple[np.ndarray, np.ndarray]: Per-coordinate posterior means and variances.

    Raises:
        DimensionError: If a row is not a basis vector.
    """
    X = data.X
    if X.size and (np.any((X != 0.0) & (X != 1.0)) or np.any(X.sum(axis=1) != 1.0)):
        raise DimensionError("Every row of an indicator design must contain exactly one 1.")
    z = np.argmax(X, axis=1) if data.n else np.zeros(0, dtype=int)
    return _indicator_posterior(z, data.y, data.K)


def squared_distance_draws(post_mean: np.ndarray, post_var: np.ndarray, draws: int,
                           rng: np.random.Generator) -> np.ndarray:
    """
    d^2 = (2 / K) sum_j (1 - exp(-beta_j^2 / 8)) for posterior draws of beta (truth beta* = 0).
    """
    K = post_mean.size
    chunk = max(1, _DRAW_CHUNK_CELLS // max(K, 1))
    sd = np.sqrt(post_var)
    out = np.empty(draws)
    for start in range(0, draws, chunk):
        stop = min(start + chunk, draws)
        beta = post_mean + sd * rng.standard_normal((stop - start, K))
        out[start:stop] = (2.0 / K) * np.sum(-np.expm1(-beta ** 2 / 8.0), axis=1)
    return out


def run_counterexample(n: int, rng: np.random.Generator, K: int | None = None,
                       posterior_draws: int = MIN_POSTERIOR_DRAWS, seed: int | None = None,
                       eta: float = ETA) -> CounterexampleRun:
    """
    Simulates the design, samples the full-model posterior and evaluates the bound.

    Args:
        n (int): Sample size.
        rng (np.random.Generator): Replicate stream.
        K (int | None): Covariate count, 2n by default.
        posterior_draws (int): Posterior draws of d^2, at least 10^4.
        seed (int | None): Recorded in the result.
        eta (float): Threshold on d^2.

    Returns:
        CounterexampleRun: The replicate's summary.
    """
    K = 2 * n if K is None else K
    if K < n:
        raise ConfigValidationError("counterexample.K", K, "The counterexample needs K >= n.")
    if posterior_draws < MIN_POSTERIOR_DRAWS:
        raise ConfigValidationError("counterexample.posterior_draws", posterior_draws,
                                    f"At least {MIN_POSTERIOR_DRAWS} posterior draws are required.")
    z, y = _draw_indicator_design(n, K, rng)
    post_mean, post_var = _indicator_posterior(z, y, K)
    d2 = squared_distance_draws(post_mean, post_var, posterior_draws, rng)
    tail = float(np.mean(d2 >= eta))
    tail_se = float(np.sqrt(tail * (1.0 - tail) / posterior_draws))
    bound = chebyshev_bound(n, eta)
    vacuous = eta ** 2 * n <= 1.0
    passed = vacuous or tail >= bound - 3.0 * tail_se
    summary = {
        "mean": float(np.mean(d2)),
        "median": float(np.median(d2)),
        "q10": float(np.quantile(d2, 0.1)),
        "q90": float(np.quantile(d2, 0.9)),
    }
    return CounterexampleRun(n, K, seed, post_mean, post_var, summary, bound, tail, tail_se,
                             bool(passed), bool(vacuous))


def chebyshev_check(n: int, posterior_draws: int, rng: np.random.Generator) -> tuple[float, float, bool]:
    """
    Empirical pi[d >= sqrt(eta) | D^n] against 1 - 1/(eta^2 n) for K = 2n.

    Returns:
        tuple[float, float, bool]: (empirical tail, bound, pass). A vacuous bound
        (eta^2 n <= 1) passes automatically.
    """
    run = run_counterexample(n, rng, 2 * n, posterior_draws)
    return run.empirical_tail, run.bound_value, run.passed


def full_model_normal_baseline(data: Dataset, slab_scale: float, rng: np.random.Generator,
                               draws: int) -> np.ndarray:
    """
    Exact posterior draws of all K coefficients under beta ~ N(0, slab_scale * I).

    Args:
        data (Dataset): Data with a known-variance normal family.
        slab_scale (float): Prior variance of each coefficient.
        rng (np.random.Generator): Random stream.
        draws (int): Number of draws.

    Returns:
        np.ndarray: Array of shape (draws, K).

    Raises:
        UnsupportedFamilyError: For other families.
        SizeGuardError: If K > 5000.
    """
    if data.family.kind is not FamilyKind.NORMAL_KNOWN_VAR:
        raise UnsupportedFamilyError(data.family.name,
                                     message="The full-model baseline needs a known-variance normal family.")
    if data.K > FULL_MODEL_K_LIMIT:
        raise SizeGuardError("K", data.K, FULL_MODEL_K_LIMIT)
    if not slab_scale > 0:
        raise ConfigValidationError("baseline.slab_scale", slab_scale, "slab_scale must be positive.")
    phi = data.family.dispersion
    precision = phi * data.X.T @ data.X + np.eye(data.K) / slab_scale
    factor = cho_factor(precision, lower=True)
    post_mean = cho_solve(factor, phi * data.X.T @ data.y)
    z = rng.standard_normal((data.K, draws))
    noise = solve_triangular(factor[0], z, lower=True, trans="T")
    return post_mean[None, :] + noise.T

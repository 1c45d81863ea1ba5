"""
Posterior inference over (gamma, beta_gamma, phi).

Key components:

- **Dataset**: bounded design matrix, validated responses and the GLM family.
- **log_unnormalized_posterior**: log prior of the model, log slab (and dispersion)
  density and the log likelihood, summed.
- **conjugate_log_marginal**: closed-form marginal likelihood of a model for the normal
  families (known dispersion, or free dispersion with a gamma prior).
- **mcmc_run**: reversible-jump Metropolis-Hastings sampler with ADD / DELETE / SWAP
  model moves. Normal families use the collapsed sampler (moves on the marginal
  likelihood, exact draws of beta and phi); every other case uses dimension-jumping
  moves with conditional-slab births followed by a random-walk refresh of beta (and
  log phi).
- **enumerate_posterior**: exact model posterior for small K, by closed form or by
  prior Monte Carlo with a reported standard error.
- **inclusion_probabilities**, **model_frequencies**, **total_variation**: chain summaries.
"""
# Standard library imports
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

# Third-party imports
import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import gammaln, logsumexp

# Local project-specific imports
from src.assets.custom_errors import (ConfigValidationError, DimensionError, SizeGuardError,
                                      UnsupportedFamilyError)
from src.models.glm_core import FamilyKind, GlmFamily, check_response, log_density
from src.models.prior import (OUT_OF_SUPPORT, ModelIndicator, PriorSpec, is_out_of_support,
                              log_prior_coeffs, log_prior_model, sample_coefficients,
                              slab_log_det, slab_precision)

_LOG_2PI: float = float(np.log(2.0 * np.pi))

ENUMERATION_K_LIMIT: int = 15
ENUMERATION_MC_SIZE_LIMIT: int = 3
FEASIBILITY_TOLERANCE: float = 1e-12


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Observed data D^n.

    Attributes:
        X (np.ndarray): n x K design with entries in [-1, 1].
        y (np.ndarray): Length-n responses in the family's support.
        family (GlmFamily): The regression family.

    An empty dataset (n = 0) is allowed and contributes no likelihood.
    """
    X: np.ndarray
    y: np.ndarray
    family: GlmFamily

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=float, ndmin=2)
        y = np.atleast_1d(np.array(self.y, dtype=float))
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DimensionError(f"Design of shape {X.shape} does not match {y.shape[0]} responses.")
        if X.size and np.max(np.abs(X)) > 1.0 + FEASIBILITY_TOLERANCE:
            raise DimensionError("Design entries must satisfy |x_ij| <= 1.",
                                 suggestion="Rescale or clip the covariates to [-1, 1].")
        check_response(self.family, y)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def K(self) -> int:
        return self.X.shape[1]

    def concat(self, other: "Dataset") -> "Dataset":
        return Dataset(np.vstack([self.X, other.X]), np.concatenate([self.y, other.y]), self.family)


@dataclass(frozen=True, eq=False)
class PosteriorDraw:
    """One stored posterior state with its cached log unnormalized posterior."""
    gamma: ModelIndicator
    beta: np.ndarray
    phi: float | None
    log_post: float


@dataclass(frozen=True)
class McmcConfig:
    """
    Sampler settings.

    Attributes:
        iterations (int): Total iterations, burn-in included.
        burn_in (int): Iterations discarded before storing draws.
        thin (int): Store every `thin`-th post burn-in iteration.
        move_probs (tuple[float, float, float]): (add, delete, swap) probabilities.
        rw_step (float): Random-walk scale for beta and log phi.
        seed (int): Seed of the sampler's random stream.
        collapse_normal (bool): Use the marginalized sampler for normal families.
    """
    iterations: int
    burn_in: int = 0
    thin: int = 10
    move_probs: tuple[float, float, float] = (0.4, 0.4, 0.2)
    rw_step: float = 0.25
    seed: int = 0
    collapse_normal: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "move_probs", tuple(float(p) for p in self.move_probs))
        if self.iterations < 1:
            raise ConfigValidationError("mcmc.iterations", self.iterations, "iterations must be positive.")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigValidationError("mcmc.burn_in", self.burn_in,
                                        "burn_in must be non-negative and below iterations.")
        if self.thin < 1:
            raise ConfigValidationError("mcmc.thin", self.thin, "thin must be at least 1.")
        if (len(self.move_probs) != 3 or min(self.move_probs) < 0
                or abs(sum(self.move_probs) - 1.0) > 1e-9):
            raise ConfigValidationError("mcmc.move_probs", self.move_probs,
                                        "Three non-negative move probabilities summing to 1 are required.")
        if not self.rw_step > 0:
            raise ConfigValidationError("mcmc.rw_step", self.rw_step, "rw_step must be positive.")


class MoveKind(str, Enum):
    ADD = "add"
    DELETE = "delete"
    SWAP = "swap"
    REFRESH = "refresh"


def _empty_counts() -> dict[str, dict[str, int]]:
    return {move.value: {"proposed": 0, "accepted": 0, "size_rejected": 0} for move in MoveKind}


@dataclass(eq=False)
class Chain:
    """
    Output of `mcmc_run`.

    Attributes:
        draws (list[PosteriorDraw]): Stored draws (post burn-in, thinned).
        acceptance (dict): Per-move counts of proposals, acceptances and size rejections.
        config (McmcConfig): The sampler settings.
        family (GlmFamily): Family of the fitted data.
        K (int): Number of covariates.
    """
    draws: list[PosteriorDraw]
    acceptance: dict[str, dict[str, int]] = field(default_factory=_empty_counts)
    config: McmcConfig | None = None
    family: GlmFamily | None = None
    K: int = 0

    def acceptance_rates(self) -> dict[str, float]:
        return {
            move: counts["accepted"] / counts["proposed"]
            for move, counts in self.acceptance.items() if counts["proposed"]
        }

    def overall_acceptance(self) -> float:
        model_moves = [self.acceptance[m.value] for m in (MoveKind.ADD, MoveKind.DELETE, MoveKind.SWAP)]
        proposed = sum(c["proposed"] for c in model_moves)
        return sum(c["accepted"] for c in model_moves) / proposed if proposed else 0.0


# ======================
# POSTERIOR DENSITY
# ======================

def _uses_dispersion(family: GlmFamily, spec: PriorSpec) -> bool:
    """
    Checks that the family and the dispersion prior agree.

    Raises:
        UnsupportedFamilyError: If the free-dispersion family lacks a dispersion prior, or a
            dispersion prior is set for another family.
    """
    if family.kind is FamilyKind.NORMAL_UNKNOWN_VAR:
        if spec.dispersion is None:
            raise UnsupportedFamilyError(family.name, message="The free-dispersion family needs a dispersion prior.",
                                         suggestion="Set prior.dispersion (kappa, rate).")
        return True
    if spec.dispersion is not None:
        raise UnsupportedFamilyError(family.name, message="A dispersion prior is only valid with normal_unknown_var.")
    return False


def log_likelihood(data: Dataset, gamma: ModelIndicator, beta, phi: float | None = None) -> float:
    """Sum of ln f(y_i, x_i,gamma' beta) over the rows of `data`."""
    if data.n == 0:
        return 0.0
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if gamma.size:
        h = data.X[:, list(gamma.included)] @ beta
    else:
        h = np.zeros(data.n)
    return float(np.sum(log_density(data.family, data.y, h, phi, validate=False)))


def log_unnormalized_posterior(data: Dataset, spec: PriorSpec, gamma: ModelIndicator, beta,
                               phi: float | None = None):
    """
    Log numerator of the posterior: ln pi(gamma) + ln pi(beta, phi | gamma) + log likelihood.

    Args:
        data (Dataset): Observed data.
        spec (PriorSpec): The prior.
        gamma (ModelIndicator): Included covariates.
        beta (array-like): Coefficients of the included covariates.
        phi (float | None): Dispersion, present exactly when the prior models it.

    Returns:
        float | OutOfSupport: The value, or OUT_OF_SUPPORT when the prior excludes gamma.

    Raises:
        DimensionError: If the state does not match the data or the prior.
    """
    if gamma.K != data.K:
        raise DimensionError(f"Model indicator built for K = {gamma.K}, data has K = {data.K}.")
    log_model = log_prior_model(spec, gamma)
    if is_out_of_support(log_model):
        return OUT_OF_SUPPORT
    return log_model + log_prior_coeffs(spec, gamma, beta, phi) + log_likelihood(data, gamma, beta, phi)


# ======================
# CONJUGATE NORMAL MODEL
# ======================

def is_conjugate(family: GlmFamily, spec: PriorSpec) -> bool:
    return family.is_normal and (_uses_dispersion(family, spec) or family.kind is FamilyKind.NORMAL_KNOWN_VAR)


class _ConjugateNormal:
    """
    Sufficient statistics and per-model caches for the normal-linear marginal likelihood.
    """
    def __init__(self, data: Dataset, spec: PriorSpec):
        if not is_conjugate(data.family, spec):
            raise UnsupportedFamilyError(data.family.name,
                                         message="Closed-form marginal likelihood needs a normal family.")
        self._spec: PriorSpec = spec
        self._n: int = data.n
        self._gram: np.ndarray = data.X.T @ data.X
        self._xty: np.ndarray = data.X.T @ data.y
        self._yty: float = float(data.y @ data.y)
        self._free_dispersion: bool = spec.dispersion is not None
        self._phi: float | None = None if self._free_dispersion else data.family.dispersion
        self._cache: dict[tuple[int, ...], tuple[float, tuple | None, np.ndarray | None, float]] = {}

    def _model(self, gamma: ModelIndicator):
        key = gamma.included
        if key in self._cache:
            return self._cache[key]
        idx = list(key)
        size = len(idx)
        n, spec = self._n, self._spec
        log_det_v = slab_log_det(spec, size)
        if self._free_dispersion:
            precision_scale = 1.0
        else:
            precision_scale = self._phi
        if size:
            a_mat = precision_scale * self._gram[np.ix_(idx, idx)] + slab_precision(spec, size)
            factor = cho_factor(a_mat, lower=True)
            b_vec = self._xty[idx]
            solved = cho_solve(factor, b_vec)
            log_det_a = float(2.0 * np.sum(np.log(np.diag(factor[0]))))
            quad = float(b_vec @ solved)
        else:
            factor, solved, log_det_a, quad = None, np.zeros(0), 0.0, 0.0
        if self._free_dispersion:
            kappa, rate = spec.dispersion.kappa, spec.dispersion.rate
            resid = max(self._yty - quad, 0.0)
            value = (-0.5 * n * _LOG_2PI - 0.5 * log_det_v - 0.5 * log_det_a
                     + kappa * np.log(rate) - gammaln(kappa) + gammaln(kappa + 0.5 * n)
                     - (kappa + 0.5 * n) * np.log(rate + 0.5 * resid))
            mean = solved
        else:
            phi = self._phi
            resid = 0.0
            value = (-0.5 * n * _LOG_2PI + 0.5 * n * np.log(phi) - 0.5 * log_det_v - 0.5 * log_det_a
                     - 0.5 * phi * self._yty + 0.5 * phi ** 2 * quad)
            mean = phi * solved
        entry = (float(value), factor, mean, resid)
        self._cache[key] = entry
        return entry

    def log_marginal(self, gamma: ModelIndicator) -> float:
        return self._model(gamma)[0]

    def draw_parameters(self, gamma: ModelIndicator, rng: np.random.Generator
                        ) -> tuple[np.ndarray, float | None]:
        """Exact draw of (beta, phi) from their conditional posterior given gamma."""
        _, factor, mean, resid = self._model(gamma)
        phi = None
        scale = 1.0
        if self._free_dispersion:
            shape = self._spec.dispersion.kappa + 0.5 * self._n
            rate = self._spec.dispersion.rate + 0.5 * resid
            phi = float(rng.gamma(shape, 1.0 / rate))
            scale = 1.0 / np.sqrt(phi)
        if gamma.size == 0:
            return np.zeros(0), phi
        z = rng.standard_normal(gamma.size)
        # Covariance A^{-1}: solve L' u = z with A = L L'
        noise = solve_triangular(factor[0], z, lower=True, trans="T")
        return mean + scale * noise, phi


def conjugate_log_marginal(data: Dataset, spec: PriorSpec, gamma: ModelIndicator) -> float:
    """
    Closed-form log marginal likelihood of model gamma for normal families.

    Args:
        data (Dataset): Data with a normal family.
        spec (PriorSpec): The prior; a dispersion prior is required for normal_unknown_var.
        gamma (ModelIndicator): The model.

    Returns:
        float: ln of the likelihood integrated over the slab (and the gamma prior on phi).

    Raises:
        UnsupportedFamilyError: For non-normal families.
    """
    return _ConjugateNormal(data, spec).log_marginal(gamma)


# ======================
# MODEL MOVES
# ======================

def _propose_model(gamma: ModelIndicator, move: MoveKind, rng: np.random.Generator,
                   move_probs: tuple[float, float, float]):
    """
    Proposes a neighbouring model.

    Returns:
        tuple | None: (new model, added index or None, removed index or None, log q ratio
        reverse/forward), or None when the move is impossible from gamma.
    """
    K, k = gamma.K, gamma.size
    p_add, p_delete, _ = move_probs
    if move is MoveKind.ADD:
        if k == K:
            return None
        excluded = np.setdiff1d(np.arange(K), gamma.included)
        j = int(excluded[rng.integers(excluded.size)])
        log_q = np.log(p_delete / (k + 1)) - np.log(p_add / (K - k)) if p_delete > 0 else -np.inf
        return gamma.add(j), j, None, log_q
    if move is MoveKind.DELETE:
        if k == 0:
            return None
        i = gamma.included[rng.integers(k)]
        log_q = np.log(p_add / (K - k + 1)) - np.log(p_delete / k) if p_add > 0 else -np.inf
        return gamma.remove(i), None, i, log_q
    if k == 0 or k == K:
        return None
    excluded = np.setdiff1d(np.arange(K), gamma.included)
    i = gamma.included[rng.integers(k)]
    j = int(excluded[rng.integers(excluded.size)])
    return gamma.remove(i).add(j), j, i, 0.0


def _accept(log_alpha: float, rng: np.random.Generator) -> bool:
    # Ratio >= 1 always accepts; log(0) = -inf
    with np.errstate(divide="ignore"):
        return bool(np.log(rng.random()) < log_alpha) or log_alpha >= 0.0


def _conditional_slab(spec: PriorSpec, size: int, position: int, beta_full: np.ndarray,
                      phi: float | None) -> tuple[float, float]:
    """
    Mean and variance of coordinate `position` of a size-`size` slab draw given the others.
    """
    precision = slab_precision(spec, size) * (1.0 if phi is None else phi)
    q_pp = precision[position, position]
    others = np.delete(np.arange(size), position)
    mean = -float(precision[position, others] @ beta_full[others]) / q_pp if size > 1 else 0.0
    return mean, 1.0 / q_pp


def _log_normal_pdf(x: float, mean: float, var: float) -> float:
    return float(-0.5 * (_LOG_2PI + np.log(var) + (x - mean) ** 2 / var))


def _insert(gamma_new: ModelIndicator, gamma_old: ModelIndicator, beta_old: np.ndarray,
            j: int, value: float) -> np.ndarray:
    # Coefficients of gamma_new: old values kept, `value` at index j
    lookup = dict(zip(gamma_old.included, beta_old))
    lookup[j] = value
    return np.array([lookup[i] for i in gamma_new.included], dtype=float)


class _ReversibleJump:
    """
    Dimension-jumping sampler state for a single chain.
    """
    def __init__(self, data: Dataset, spec: PriorSpec, config: McmcConfig, rng: np.random.Generator,
                 counts: dict[str, dict[str, int]]):
        self._data, self._spec, self._config = data, spec, config
        self._rng, self._counts = rng, counts
        self.gamma = ModelIndicator.empty(data.K)
        self.beta = np.zeros(0)
        self.phi = None
        if _uses_dispersion(data.family, spec):
            self.phi = spec.dispersion.kappa / spec.dispersion.rate
        self.log_post = log_unnormalized_posterior(data, spec, self.gamma, self.beta, self.phi)

    def _log_post(self, gamma: ModelIndicator, beta: np.ndarray, phi: float | None) -> float:
        return log_unnormalized_posterior(self._data, self._spec, gamma, beta, phi)

    def model_move(self, move: MoveKind) -> None:
        proposal = _propose_model(self.gamma, move, self._rng, self._config.move_probs)
        counts = self._counts[move.value]
        counts["proposed"] += 1
        if proposal is None:
            return
        gamma_new, added, removed, log_q = proposal
        if gamma_new.size > self._spec.r_max:
            counts["size_rejected"] += 1
            return
        log_jump = log_q
        rng, phi, spec = self._rng, self.phi, self._spec
        if removed is not None:
            # Reverse birth density of the removed coefficient inside the current model
            pos = self.gamma.included.index(removed)
            mean, var = _conditional_slab(spec, self.gamma.size, pos, self.beta, phi)
            log_jump += _log_normal_pdf(self.beta[pos], mean, var)
            base_gamma = self.gamma.remove(removed)
            base_beta = np.array([b for i, b in zip(self.gamma.included, self.beta) if i != removed])
        else:
            base_gamma, base_beta = self.gamma, self.beta
        if added is not None:
            pos = gamma_new.included.index(added)
            trial = _insert(gamma_new, base_gamma, base_beta, added, 0.0)
            mean, var = _conditional_slab(spec, gamma_new.size, pos, trial, phi)
            value = mean + np.sqrt(var) * rng.standard_normal()
            trial[pos] = value
            log_jump -= _log_normal_pdf(value, mean, var)
            beta_new = trial
        else:
            beta_new = base_beta
        log_post_new = self._log_post(gamma_new, beta_new, phi)
        if is_out_of_support(log_post_new):
            counts["size_rejected"] += 1
            return
        if _accept(log_post_new - self.log_post + log_jump, rng):
            counts["accepted"] += 1
            self.gamma, self.beta, self.log_post = gamma_new, beta_new, log_post_new

    def refresh(self) -> None:
        rng, step = self._rng, self._config.rw_step
        counts = self._counts[MoveKind.REFRESH.value]
        if self.gamma.size:
            counts["proposed"] += 1
            beta_new = self.beta + step * rng.standard_normal(self.gamma.size)
            log_post_new = self._log_post(self.gamma, beta_new, self.phi)
            if _accept(log_post_new - self.log_post, rng):
                counts["accepted"] += 1
                self.beta, self.log_post = beta_new, log_post_new
        if self.phi is not None:
            counts["proposed"] += 1
            log_phi_new = np.log(self.phi) + step * rng.standard_normal()
            phi_new = float(np.exp(log_phi_new))
            log_post_new = self._log_post(self.gamma, self.beta, phi_new)
            # Jacobian of the log transform
            if _accept(log_post_new - self.log_post + log_phi_new - np.log(self.phi), rng):
                counts["accepted"] += 1
                self.phi, self.log_post = phi_new, log_post_new


def _conjugate_model_move(sampler: _ConjugateNormal, spec: PriorSpec, gamma: ModelIndicator,
                          current: float, move: MoveKind, rng: np.random.Generator,
                          config: McmcConfig, counts: dict[str, dict[str, int]]):
    counts[move.value]["proposed"] += 1
    proposal = _propose_model(gamma, move, rng, config.move_probs)
    if proposal is None:
        return gamma, current
    gamma_new, _, _, log_q = proposal
    if gamma_new.size > spec.r_max:
        counts[move.value]["size_rejected"] += 1
        return gamma, current
    proposed = sampler.log_marginal(gamma_new) + log_prior_model(spec, gamma_new)
    if _accept(proposed - current + log_q, rng):
        counts[move.value]["accepted"] += 1
        return gamma_new, proposed
    return gamma, current


def mcmc_run(data: Dataset, spec: PriorSpec, config: McmcConfig) -> Chain:
    """
    Runs one reversible-jump Metropolis-Hastings chain.

    Args:
        data (Dataset): Observed data.
        spec (PriorSpec): The prior, with r_max < K.
        config (McmcConfig): Sampler settings; the chain is a deterministic function of them.

    Returns:
        Chain: Stored draws with cached log posteriors and per-move acceptance counts.

    Raises:
        ConfigValidationError: If r_max >= K.
        UnsupportedFamilyError: If the family and the dispersion prior disagree.
    """
    spec.check_dimension(data.K)
    uses_dispersion = _uses_dispersion(data.family, spec)
    rng = np.random.default_rng(config.seed)
    counts = _empty_counts()
    moves = (MoveKind.ADD, MoveKind.DELETE, MoveKind.SWAP)
    draws: list[PosteriorDraw] = []
    collapsed = config.collapse_normal and is_conjugate(data.family, spec)

    if collapsed:
        sampler = _ConjugateNormal(data, spec)
        gamma = ModelIndicator.empty(data.K)
        current = sampler.log_marginal(gamma) + log_prior_model(spec, gamma)
    else:
        state = _ReversibleJump(data, spec, config, rng, counts)

    for iteration in range(config.iterations):
        move = moves[int(rng.choice(3, p=config.move_probs))]
        if collapsed:
            gamma, current = _conjugate_model_move(sampler, spec, gamma, current, move, rng, config, counts)
        else:
            state.model_move(move)
            state.refresh()
        if iteration < config.burn_in or (iteration - config.burn_in) % config.thin:
            continue
        if collapsed:
            beta, phi = sampler.draw_parameters(gamma, rng)
            log_post = log_unnormalized_posterior(data, spec, gamma, beta, phi if uses_dispersion else None)
            draws.append(PosteriorDraw(gamma, beta, phi if uses_dispersion else None, log_post))
        else:
            draws.append(PosteriorDraw(state.gamma, state.beta.copy(), state.phi, state.log_post))

    return Chain(draws=draws, acceptance=counts, config=config, family=data.family, K=data.K)


# ======================
# ENUMERATION ORACLES
# ======================

def _all_models(K: int, r_top: int):
    for size in range(r_top + 1):
        for included in combinations(range(K), size):
            yield ModelIndicator(included, K)


def prior_mc_log_marginal(data: Dataset, spec: PriorSpec, gamma: ModelIndicator,
                          rng: np.random.Generator, draws: int = 100_000,
                          chunk: int = 20_000) -> tuple[float, float]:
    """
    Prior Monte Carlo estimate of the log marginal likelihood of gamma.

    Returns:
        tuple[float, float]: (log of the mean likelihood over slab draws, delta-method SE
        of that log estimate).
    """
    uses_dispersion = _uses_dispersion(data.family, spec)
    log_weights = np.empty(draws)
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        phi = None
        if uses_dispersion:
            phi = rng.gamma(spec.dispersion.kappa, 1.0 / spec.dispersion.rate, size=m)
        if gamma.size:
            lower = np.linalg.cholesky(spec.v_policy.covariance(gamma.size))
            betas = rng.standard_normal((m, gamma.size)) @ lower.T
            if phi is not None:
                betas = betas / np.sqrt(phi)[:, None]
            h = data.X[:, list(gamma.included)] @ betas.T
        else:
            h = np.zeros((data.n, m))
        if phi is None:
            ll = log_density(data.family, data.y[:, None], h, validate=False)
        else:
            resid = (data.y[:, None] - h) ** 2
            ll = -0.5 * phi[None, :] * resid - 0.5 * (_LOG_2PI - np.log(phi)[None, :])
        log_weights[done:done + m] = np.sum(ll, axis=0)
        done += m
    log_mean = float(logsumexp(log_weights) - np.log(draws))
    normalized = np.exp(log_weights - log_mean)
    se = float(np.std(normalized, ddof=1) / np.sqrt(draws)) if draws > 1 else float("inf")
    return log_mean, se


def log_marginal_likelihood(data: Dataset, spec: PriorSpec, gamma: ModelIndicator,
                            rng: np.random.Generator | None = None,
                            mc_draws: int = 100_000) -> tuple[float, float]:
    """
    Log marginal likelihood of gamma: closed form (SE 0) for normal families, prior Monte
    Carlo otherwise.
    """
    if is_conjugate(data.family, spec):
        return conjugate_log_marginal(data, spec, gamma), 0.0
    rng = rng if rng is not None else np.random.default_rng(0)
    return prior_mc_log_marginal(data, spec, gamma, rng, mc_draws)


def enumerate_log_marginals(data: Dataset, spec: PriorSpec, rng: np.random.Generator | None = None,
                            mc_draws: int = 100_000) -> dict[ModelIndicator, tuple[float, float]]:
    """
    Log marginal likelihood (value, SE) of every model with |gamma| <= r_max.

    Raises:
        SizeGuardError: If K > 15, or if the family needs Monte Carlo and r_max > 3.
    """
    if data.K > ENUMERATION_K_LIMIT:
        raise SizeGuardError("K", data.K, ENUMERATION_K_LIMIT)
    r_top = min(spec.r_max, data.K)
    conjugate = is_conjugate(data.family, spec)
    if not conjugate and r_top > ENUMERATION_MC_SIZE_LIMIT:
        raise SizeGuardError("r_max", r_top, ENUMERATION_MC_SIZE_LIMIT)
    out: dict[ModelIndicator, tuple[float, float]] = {}
    if conjugate:
        sampler = _ConjugateNormal(data, spec)
        for gamma in _all_models(data.K, r_top):
            out[gamma] = (sampler.log_marginal(gamma), 0.0)
        return out
    rng = rng if rng is not None else np.random.default_rng(0)
    for gamma in _all_models(data.K, r_top):
        out[gamma] = prior_mc_log_marginal(data, spec, gamma, rng, mc_draws)
    return out


def enumerate_posterior(data: Dataset, spec: PriorSpec, rng: np.random.Generator | None = None,
                        mc_draws: int = 100_000) -> dict[ModelIndicator, float]:
    """
    Normalized model posterior pi(gamma | D^n) over all models with |gamma| <= r_max.

    Args:
        data (Dataset): Observed data with K <= 15.
        spec (PriorSpec): The prior.
        rng (np.random.Generator | None): Stream for the Monte Carlo marginals.
        mc_draws (int): Prior draws per model for non-conjugate families.

    Returns:
        dict[ModelIndicator, float]: Posterior model probabilities summing to 1.

    Raises:
        SizeGuardError: If the problem exceeds the enumeration guards.
    """
    marginals = enumerate_log_marginals(data, spec, rng, mc_draws)
    models = list(marginals)
    log_joint = np.array([marginals[g][0] + log_prior_model(spec, g) for g in models])
    probs = np.exp(log_joint - logsumexp(log_joint))
    probs /= probs.sum()
    return dict(zip(models, probs.tolist()))


# ======================
# CHAIN SUMMARIES
# ======================

def inclusion_probabilities(chain: Chain, K: int | None = None) -> np.ndarray:
    """
    Per-covariate inclusion frequency over the chain's draws.

    Raises:
        DimensionError: If the chain has no draws.
    """
    if not chain.draws:
        raise DimensionError("Inclusion probabilities need a non-empty chain.")
    K = chain.K if K is None else K
    counts = np.zeros(K)
    for draw in chain.draws:
        counts[list(draw.gamma.included)] += 1.0
    return counts / len(chain.draws)


def model_frequencies(chain: Chain) -> dict[ModelIndicator, float]:
    """Empirical distribution of the models visited by the chain."""
    tally = Counter(draw.gamma for draw in chain.draws)
    total = len(chain.draws)
    return {gamma: count / total for gamma, count in tally.items()}


def marginal_inclusion(posterior: dict[ModelIndicator, float], K: int) -> np.ndarray:
    """Per-covariate inclusion probabilities implied by a model distribution."""
    out = np.zeros(K)
    for gamma, prob in posterior.items():
        out[list(gamma.included)] += prob
    return out


def total_variation(first: dict, second: dict) -> float:
    keys = set(first) | set(second)
    return 0.5 * sum(abs(first.get(k, 0.0) - second.get(k, 0.0)) for k in keys)

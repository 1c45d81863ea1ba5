"""
Selected posterior estimates and the checks built on them.

A selection rule keeps part of a posterior chain; the retained draws, equally weighted,
represent the selected posterior estimate p_A(y | x) = sum_k w_k f(y, x_gamma_k' beta_k).

Key components:

- **SelectionRule** and `select`: keep everything, the m most visited models, or the
  models touching a covariate whose inclusion probability exceeds a threshold.
- `mean_estimate` and `classify`: plug-in mean and the 0.5-threshold classifier.
- `mixture_hellinger`: distance between p_A and p* (exact per x for binary families,
  Monte Carlo in y otherwise).
- `convexity_bound_check`: d(p_A, p*)^2 against eps^2 + 2 * tail / selection probability.
- `regression_classification_checks`: weighted L2 bound on the mean and excess
  classification risk bound, both driven by d(p_A, p*).
"""
# Standard library imports
from collections import Counter
from dataclasses import dataclass
from enum import Enum

# Third-party imports
import numpy as np
from scipy.special import logsumexp

# Local project-specific imports
from src.assets.custom_errors import (ConfigValidationError, DimensionError, FamilyMismatchError,
                                      SelectionRuleError, UnsupportedFamilyError)
from src.models.glm_core import GlmFamily, log_density, mean, sample_response, second_moment
from src.models.hellinger import (HellingerEstimate, TrueModel, XSample, draw_x_sample,
                                  tail_probability)
from src.models.posterior import Chain, PosteriorDraw, inclusion_probabilities

POINT_CHUNK: int = 2_000


class SelectionKind(str, Enum):
    ALL = "all"
    BEST_M = "best_m"
    INCLUSION_THRESHOLD = "inclusion_threshold"


@dataclass(frozen=True)
class SelectionRule:
    """
    Rule choosing which posterior draws enter the selected estimate.

    Attributes:
        kind (SelectionKind): Rule type.
        m (int | None): Number of top models for BEST_M.
        threshold (float | None): Inclusion threshold in (0, 1) for INCLUSION_THRESHOLD.
    """
    kind: SelectionKind = SelectionKind.ALL
    m: int | None = None
    threshold: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SelectionKind(self.kind))
        if self.kind is SelectionKind.BEST_M and (self.m is None or self.m < 1):
            raise ConfigValidationError("selection.m", self.m, "BEST_M needs m >= 1.")
        if self.kind is SelectionKind.INCLUSION_THRESHOLD and (
                self.threshold is None or not 0.0 < self.threshold < 1.0):
            raise ConfigValidationError("selection.threshold", self.threshold,
                                        "The inclusion threshold must lie in (0, 1).")

    @classmethod
    def all(cls) -> "SelectionRule":
        return cls(SelectionKind.ALL)

    @classmethod
    def best_m(cls, m: int) -> "SelectionRule":
        return cls(SelectionKind.BEST_M, m=m)

    @classmethod
    def inclusion_threshold(cls, threshold: float) -> "SelectionRule":
        return cls(SelectionKind.INCLUSION_THRESHOLD, threshold=threshold)


@dataclass(frozen=True, eq=False)
class MixtureDensity:
    """
    Equally weighted mixture of retained posterior draws.

    Attributes:
        components (tuple[PosteriorDraw, ...]): Retained draws.
        weights (np.ndarray): Component weights summing to 1.
        selection_prob (float): Retained fraction of the chain, in (0, 1].
        family (GlmFamily): Family of every component.
        K (int): Number of covariates.
    """
    components: tuple[PosteriorDraw, ...]
    weights: np.ndarray
    selection_prob: float
    family: GlmFamily
    K: int

    @classmethod
    def single(cls, draw: PosteriorDraw, family: GlmFamily, K: int) -> "MixtureDensity":
        return cls((draw,), np.ones(1), 1.0, family, K)

    def linear_predictors(self, x_sample: XSample, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Component linear predictors at sample points [start, stop), shape (points, components)."""
        columns = []
        for draw in self.components:
            h = x_sample.linear_predictor(draw.gamma, draw.beta)
            columns.append(h[start:stop])
        return np.column_stack(columns)

    def dispersions(self) -> np.ndarray | None:
        if not self.family.is_normal:
            return None
        return np.array([
            self.family.dispersion if draw.phi is None else draw.phi for draw in self.components
        ])


def select(chain: Chain, rule: SelectionRule) -> MixtureDensity:
    """
    Builds the selected posterior estimate from a chain.

    Args:
        chain (Chain): Non-empty posterior chain.
        rule (SelectionRule): The selection rule.

    Returns:
        MixtureDensity: Uniform weights over the retained draws.

    Raises:
        SelectionRuleError: If the rule retains no draw; carries the largest threshold that
            would retain something.
    """
    if not chain.draws:
        raise DimensionError("Selection needs a non-empty chain.")
    draws = chain.draws
    if rule.kind is SelectionKind.ALL:
        kept = list(draws)
    elif rule.kind is SelectionKind.BEST_M:
        tally = Counter(draw.gamma.included for draw in draws)
        ranked = sorted(tally.items(), key=lambda item: (-item[1], item[0]))
        top = {included for included, _ in ranked[:rule.m]}
        kept = [draw for draw in draws if draw.gamma.included in top]
    else:
        incl = inclusion_probabilities(chain)
        selected = set(np.flatnonzero(incl > rule.threshold).tolist())
        kept = [draw for draw in draws if selected.intersection(draw.gamma.included)]
        if not kept:
            raise SelectionRuleError(float(np.max(incl)) if incl.size else 0.0)
    weights = np.full(len(kept), 1.0 / len(kept))
    return MixtureDensity(tuple(kept), weights, len(kept) / len(draws), chain.family, chain.K)


def _as_points(mix: MixtureDensity, x) -> tuple[XSample, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != mix.K:
        raise DimensionError(f"x has {X.shape[1]} coordinates, the mixture has K = {mix.K}.")
    if np.max(np.abs(X)) > 1.0 + 1e-12:
        raise DimensionError("Covariates must satisfy |x_j| <= 1.")
    return XSample(X, mix.K), single


def _mixture_mean(mix: MixtureDensity, x_sample: XSample) -> np.ndarray:
    out = np.empty(x_sample.n_x)
    for start in range(0, x_sample.n_x, POINT_CHUNK):
        stop = min(start + POINT_CHUNK, x_sample.n_x)
        out[start:stop] = mean(mix.family, mix.linear_predictors(x_sample, start, stop)) @ mix.weights
    return out


def mean_estimate(mix: MixtureDensity, x):
    """
    Plug-in mean sum_k w_k psi(x_gamma_k' beta_k).

    Args:
        mix (MixtureDensity): The selected estimate.
        x (array-like): One K-vector or an array of them, with |x_j| <= 1.

    Returns:
        float | np.ndarray: The mean at each point.
    """
    x_sample, single = _as_points(mix, x)
    out = _mixture_mean(mix, x_sample)
    return float(out[0]) if single else out


def classify(mix: MixtureDensity, x):
    """
    Plug-in classifier I[mean_estimate > 0.5].

    Raises:
        UnsupportedFamilyError: For non-binary families.
    """
    if not mix.family.is_binary:
        raise UnsupportedFamilyError(mix.family.name, message="Classification needs a binary family.")
    mu = mean_estimate(mix, x)
    labels = (np.asarray(mu) > 0.5).astype(int)
    return int(labels) if np.ndim(labels) == 0 else labels


def _check_family(mix: MixtureDensity, truth: TrueModel) -> None:
    if mix.family is not None and mix.family != truth.family:
        raise FamilyMismatchError(truth.family.name, mix.family.name)


def mixture_squared_distance(mix: MixtureDensity, truth: TrueModel, x_sample: XSample,
                             rng: np.random.Generator) -> np.ndarray:
    """
    Per-x estimate of the integral of (sqrt(p_A) - sqrt(p*))^2 over y.

    Exact for binary families; otherwise one y ~ p*(. | x) per point and the unbiased
    estimate 2 - 2 * sqrt(p_A(y|x) / p*(y|x)).
    """
    _check_family(mix, truth)
    family = truth.family
    h_star = x_sample.full_predictor(truth.beta_star)
    out = np.empty(x_sample.n_x)
    log_w = np.log(mix.weights)
    phis = mix.dispersions()
    for start in range(0, x_sample.n_x, POINT_CHUNK):
        stop = min(start + POINT_CHUNK, x_sample.n_x)
        h_comp = mix.linear_predictors(x_sample, start, stop)
        h_true = h_star[start:stop]
        if family.is_binary:
            mu_hat = np.clip(mean(family, h_comp) @ mix.weights, 0.0, 1.0)
            mu_star = mean(family, h_true)
            affinity = np.sqrt(mu_hat * mu_star) + np.sqrt((1.0 - mu_hat) * (1.0 - mu_star))
            out[start:stop] = 2.0 - 2.0 * np.minimum(affinity, 1.0)
            continue
        y = sample_response(family, h_true, rng, truth.dispersion_star)
        log_true = log_density(family, y, h_true, truth.dispersion_star, validate=False)
        if family.is_normal:
            log_comp = np.column_stack([
                log_density(family, y, h_comp[:, k], phis[k], validate=False)
                for k in range(h_comp.shape[1])
            ])
        else:
            log_comp = log_density(family, y[:, None], h_comp, validate=False)
        log_mix = logsumexp(log_comp + log_w[None, :], axis=1)
        out[start:stop] = 2.0 - 2.0 * np.exp(0.5 * (log_mix - log_true))
    return out


def mixture_hellinger(mix: MixtureDensity, truth: TrueModel, x_source: int | str | None = None,
                      rng: np.random.Generator | None = None,
                      x_sample: XSample | None = None) -> HellingerEstimate:
    """
    Hellinger distance between the selected estimate p_A and p*.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    x_sample = x_sample if x_sample is not None else draw_x_sample(truth, x_source, rng)
    per_x = mixture_squared_distance(mix, truth, x_sample, rng)
    exact = x_sample.exact and truth.family.is_binary
    return HellingerEstimate.from_per_x(per_x, exact)


@dataclass(frozen=True)
class ConvexityCheck:
    """Outcome of the selected-estimate convexity bound."""
    epsilon: float
    lhs: float
    rhs: float
    lhs_se: float
    tail: float
    selection_prob: float
    passed: bool


def convexity_bound_check(mix: MixtureDensity, truth: TrueModel, distances, epsilon: float,
                          x_source: int | str | None = None, rng: np.random.Generator | None = None,
                          x_sample: XSample | None = None) -> ConvexityCheck:
    """
    Checks d(p_A, p*)^2 <= eps^2 + 2 * tail(eps) / selection_prob.

    Args:
        mix (MixtureDensity): The selected estimate.
        truth (TrueModel): The true model.
        distances: Distances of the retained draws (numbers or HellingerEstimate).
        epsilon (float): Radius, eps >= 0.
        x_source, rng, x_sample: Points for the mixture distance (see `draw_x_sample`).

    Returns:
        ConvexityCheck: lhs, rhs and pass = lhs <= rhs + 3 * combined Monte Carlo SE.
    """
    distances = list(distances)
    if len(distances) != len(mix.components):
        raise DimensionError(f"{len(distances)} distances for {len(mix.components)} retained draws.")
    estimate = mixture_hellinger(mix, truth, x_source, rng, x_sample)
    tail = tail_probability(distances, epsilon)
    rhs = epsilon ** 2 + 2.0 * tail / mix.selection_prob
    draw_se = [d.se for d in distances if isinstance(d, HellingerEstimate)]
    combined_se = float(np.sqrt(estimate.se ** 2 + (np.mean(draw_se) if draw_se else 0.0) ** 2))
    return ConvexityCheck(epsilon, estimate.squared, rhs, estimate.se, tail, mix.selection_prob,
                          estimate.squared <= rhs + 3.0 * combined_se)


@dataclass(frozen=True)
class RegressionClassificationReport:
    """
    Weighted L2 and classification checks for a selected estimate.

    The classification fields are None for non-binary families.
    """
    squared_distance: float
    squared_distance_se: float
    weighted_l2: float
    weighted_l2_se: float
    l2_passed: bool
    risk: float | None = None
    bayes_error: float | None = None
    excess_risk: float | None = None
    excess_risk_se: float | None = None
    excess_passed: bool | None = None


def _mean_se(values: np.ndarray, exact: bool) -> tuple[float, float]:
    if exact or values.size < 2:
        return float(np.mean(values)), 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(values.size))


def regression_classification_checks(mix: MixtureDensity, truth: TrueModel, n_mc: int | str | None = None,
                                     rng: np.random.Generator | None = None) -> RegressionClassificationReport:
    """
    Monte Carlo checks of the mean and classification consequences of d(p_A, p*).

    Checks (i) E_x[(mu_A - mu*)^2 / (nu_A + nu*)] <= 2 d^2 + 3 SE, where nu are second
    moments, and (ii) for binary families, excess risk E|2 mu* - 1| I[C_A != C*] <= 4 d + 3 SE.

    Args:
        mix (MixtureDensity): The selected estimate.
        truth (TrueModel): The true model.
        n_mc (int | str | None): Number of x draws ("exact" on the indicator design).
        rng (np.random.Generator | None): Random stream.

    Returns:
        RegressionClassificationReport: Estimates, standard errors and pass flags.
    """
    _check_family(mix, truth)
    rng = rng if rng is not None else np.random.default_rng(0)
    x_sample = draw_x_sample(truth, n_mc, rng)
    family = truth.family
    exact = x_sample.exact
    d2_per_x = mixture_squared_distance(mix, truth, x_sample, rng)
    d2_exact = exact and family.is_binary
    d2, d2_se = _mean_se(d2_per_x, d2_exact)

    h_star = x_sample.full_predictor(truth.beta_star)
    mu_star = np.asarray(mean(family, h_star))
    nu_star = np.asarray(second_moment(family, h_star, truth.dispersion_star) if family.is_normal
                         else second_moment(family, h_star))
    mu_hat = _mixture_mean(mix, x_sample)
    phis = mix.dispersions()
    nu_hat = np.zeros(x_sample.n_x)
    for k, draw in enumerate(mix.components):
        h = x_sample.linear_predictor(draw.gamma, draw.beta)
        moment = second_moment(family, h, phis[k]) if family.is_normal else second_moment(family, h)
        nu_hat += mix.weights[k] * np.asarray(moment)
    l2_per_x = (mu_hat - mu_star) ** 2 / (nu_hat + nu_star)
    l2, l2_se = _mean_se(l2_per_x, exact)
    _, gap_se = _mean_se(l2_per_x - 2.0 * d2_per_x, d2_exact)
    report = dict(
        squared_distance=d2, squared_distance_se=d2_se, weighted_l2=l2, weighted_l2_se=l2_se,
        l2_passed=bool(l2 <= 2.0 * d2 + 3.0 * gap_se),
    )
    if family.is_binary:
        bayes_per_x = np.minimum(mu_star, 1.0 - mu_star)
        disagree = (mu_hat > 0.5) != (mu_star > 0.5)
        excess_per_x = np.abs(2.0 * mu_star - 1.0) * disagree
        excess, excess_se = _mean_se(excess_per_x, exact)
        bayes, _ = _mean_se(bayes_per_x, exact)
        d = float(np.sqrt(d2))
        d_se = d2_se / (2.0 * d) if d > 0 else 0.0
        combined_se = float(np.sqrt(excess_se ** 2 + (4.0 * d_se) ** 2))
        report.update(
            risk=bayes + excess, bayes_error=bayes, excess_risk=excess, excess_risk_se=excess_se,
            excess_passed=bool(excess <= 4.0 * d + 3.0 * combined_se),
        )
    return RegressionClassificationReport(**report)

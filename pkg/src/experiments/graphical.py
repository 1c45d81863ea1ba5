"""
Gaussian graphical models by per-node neighbourhood selection.

Each node x_j is regressed on all the others with the free-dispersion normal family and
a gamma prior on the dispersion; edges are read from the per-node inclusion
probabilities, and the quality of each fitted conditional p(x_j | x_{k != j}) is scored
by its Hellinger distance to the true Gaussian conditional.

Key components:

- **GraphTruth**: precision matrix with the implied node regressions
  beta*_{j|k} = -Theta_jk / Theta_jj and residual variances 1 / Theta_jj.
- **NodeTransform**: standardization, down-scaling and clipping that maps raw columns
  to the bounded design of the sampler, and back.
- `sample_graph_data`, `neighborhood_select`, `conditional_hellinger`, `build_graph`
  and `fit_graph` (all nodes in a joblib worker pool).
"""
# Standard library imports
from dataclasses import dataclass, replace
from enum import Enum

# Third-party imports
import numpy as np
from joblib import Parallel, delayed
from scipy.special import logsumexp

# Local project-specific imports
from src.assets.custom_errors import (ConfigValidationError, DimensionError, EngineError,
                                      StandardizationError)
from src.models.estimators import MixtureDensity, SelectionRule, select
from src.models.glm_core import FamilyKind, GlmFamily
from src.models.hellinger import GaussianGraph, HellingerEstimate
from src.models.posterior import Chain, Dataset, McmcConfig, inclusion_probabilities, mcmc_run
from src.models.prior import PriorSpec

HERMITE_POINTS: int = 64
DEFAULT_DESIGN_SCALE: float = 3.0
DEFAULT_CONDITIONAL_DRAWS: int = 5_000
CLIP_WARNING_FRACTION: float = 0.01
STANDARDIZED_TOLERANCE: float = 1e-8
_CELL_CHUNK: int = 2_000_000

_HERMITE_NODES, _HERMITE_WEIGHTS = np.polynomial.hermite.hermgauss(HERMITE_POINTS)
_LOG_2PI: float = float(np.log(2.0 * np.pi))


# ======================
# TRUE GRAPH
# ======================

@dataclass(frozen=True, eq=False)
class GraphTruth:
    """
    Gaussian graphical model x ~ N(0, precision^{-1}).

    Attributes:
        precision (np.ndarray): J x J symmetric positive definite matrix.
    """
    precision: np.ndarray

    def __post_init__(self) -> None:
        # GaussianGraph validates symmetry and definiteness
        law = GaussianGraph(self.precision)
        object.__setattr__(self, "precision", law.precision)
        object.__setattr__(self, "_law", law)
        object.__setattr__(self, "_covariance", np.linalg.inv(law.precision))

    @classmethod
    def standardized(cls, precision) -> "GraphTruth":
        """Rescales the precision so that every variable has unit variance."""
        raw = cls(precision)
        sd = np.sqrt(np.diag(raw.covariance))
        return cls(raw.precision * np.outer(sd, sd))

    @property
    def J(self) -> int:
        return self.precision.shape[0]

    @property
    def covariance(self) -> np.ndarray:
        return self._covariance

    @property
    def law(self) -> GaussianGraph:
        return self._law

    @property
    def is_standardized(self) -> bool:
        return bool(np.allclose(np.diag(self._covariance), 1.0, rtol=0.0, atol=STANDARDIZED_TOLERANCE))

    def others(self, j: int) -> np.ndarray:
        self._check_node(j)
        return np.delete(np.arange(self.J), j)

    def coefficients(self, j: int) -> np.ndarray:
        """beta*_{j|k} for k != j, in increasing k."""
        others = self.others(j)
        return -self.precision[j, others] / self.precision[j, j]

    def coefficient_matrix(self) -> np.ndarray:
        """Row j holds beta*_{j|k}; the diagonal is zero."""
        out = -self.precision / np.diag(self.precision)[:, None]
        np.fill_diagonal(out, 0.0)
        return out

    def residual_variance(self, j: int) -> float:
        self._check_node(j)
        return float(1.0 / self.precision[j, j])

    def adjacency(self) -> np.ndarray:
        out = self.precision != 0.0
        np.fill_diagonal(out, False)
        return out

    def _check_node(self, j: int) -> None:
        if not 0 <= j < self.J:
            raise DimensionError(f"Node {j} outside 0..{self.J - 1}.")


def chain_graph(J: int, rho: float) -> GraphTruth:
    """
    Standardized chain graph: covariance rho^|i-k|, tridiagonal precision.

    Raises:
        ConfigValidationError: If J < 2 or |rho| >= 1.
    """
    if J < 2:
        raise ConfigValidationError("graph.J", J, "A graph needs at least two nodes.")
    if not -1.0 < rho < 1.0:
        raise ConfigValidationError("graph.rho", rho, "rho must lie in (-1, 1).")
    diag = np.full(J, 1.0 + rho ** 2)
    diag[[0, -1]] = 1.0
    precision = (np.diag(diag) - rho * (np.eye(J, k=1) + np.eye(J, k=-1))) / (1.0 - rho ** 2)
    return GraphTruth(precision)


def sample_graph_data(truth: GraphTruth, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    n i.i.d. rows of N(0, precision^{-1}).

    Returns:
        np.ndarray: n x J matrix.
    """
    if n < 0:
        raise ConfigValidationError("graph.n", n, "n must be non-negative.")
    return truth.law.sample(n, rng)


# ======================
# NEIGHBOURHOOD REGRESSION
# ======================

@dataclass(frozen=True)
class NodeTransform:
    """
    Map from raw columns to the sampler's design for one node regression.

    Covariates become clip((x_k - center_k) / (scale_k * design_scale), -1, 1) and the
    response becomes (x_j - center_j) / scale_j.

    Attributes:
        j (int): The response node.
        center, scale (np.ndarray): Column means and standard deviations (length J).
        design_scale (float): Extra divisor applied to standardized covariates.
        clip (bool): Clip covariates to [-1, 1].
    """
    j: int
    center: np.ndarray
    scale: np.ndarray
    design_scale: float = DEFAULT_DESIGN_SCALE
    clip: bool = True

    @classmethod
    def fit(cls, data: np.ndarray, j: int, design_scale: float = DEFAULT_DESIGN_SCALE) -> "NodeTransform":
        """
        Raises:
            StandardizationError: If a column is constant.
        """
        if not design_scale > 0:
            raise ConfigValidationError("graph.design_scale", design_scale, "design_scale must be positive.")
        center = data.mean(axis=0)
        scale = data.std(axis=0)
        constant = np.flatnonzero(~(scale > 0))
        if constant.size:
            raise StandardizationError(int(constant[0]))
        return cls(j, center, scale, float(design_scale))

    @classmethod
    def identity(cls, J: int, j: int) -> "NodeTransform":
        return cls(j, np.zeros(J), np.ones(J), 1.0, clip=False)

    @property
    def others(self) -> np.ndarray:
        return np.delete(np.arange(self.center.size), self.j)

    def covariates(self, data: np.ndarray) -> np.ndarray:
        others = self.others
        Z = (data[:, others] - self.center[others]) / (self.scale[others] * self.design_scale)
        return np.clip(Z, -1.0, 1.0) if self.clip else Z

    def response(self, data: np.ndarray) -> np.ndarray:
        return (data[:, self.j] - self.center[self.j]) / self.scale[self.j]

    def clip_fraction(self, data: np.ndarray) -> float:
        others = self.others
        Z = (data[:, others] - self.center[others]) / (self.scale[others] * self.design_scale)
        return float(np.mean(np.abs(Z) > 1.0)) if Z.size else 0.0


@dataclass(eq=False)
class NeighborhoodFit:
    """Posterior chain of one node regression with the transform that produced it."""
    chain: Chain
    transform: NodeTransform
    clip_fraction: float

    @property
    def j(self) -> int:
        return self.transform.j


def neighborhood_select(data, j: int, spec: PriorSpec, config: McmcConfig,
                        design_scale: float = DEFAULT_DESIGN_SCALE) -> NeighborhoodFit:
    """
    Bayesian variable selection of node j on all other nodes.

    Args:
        data (array-like): n x J raw observations.
        j (int): Response node.
        spec (PriorSpec): Prior with a dispersion prior; r_max < J - 1.
        config (McmcConfig): Sampler settings (the collapsed sampler is used).
        design_scale (float): Divisor applied after standardization, before clipping.

    Returns:
        NeighborhoodFit: The chain over the J - 1 candidate neighbours.

    Raises:
        ConfigValidationError: If the prior has no dispersion prior.
        StandardizationError: If a column is constant.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise DimensionError(f"Graph data must be n x J with J >= 2, got shape {data.shape}.")
    if not 0 <= j < data.shape[1]:
        raise DimensionError(f"Node {j} outside 0..{data.shape[1] - 1}.")
    if spec.dispersion is None:
        raise ConfigValidationError("prior.dispersion", None,
                                    "Neighbourhood regression needs a gamma prior on the dispersion.",
                                    suggestion="Set prior.dispersion with positive kappa and rate.")
    transform = NodeTransform.fit(data, j, design_scale)
    clipped = transform.clip_fraction(data)
    if clipped > CLIP_WARNING_FRACTION:
        print(f"⚠️ [WARNING] Node {j}: {clipped:.2%} of covariate values clipped to [-1, 1].")
    dataset = Dataset(transform.covariates(data), transform.response(data),
                      GlmFamily(FamilyKind.NORMAL_UNKNOWN_VAR))
    chain = mcmc_run(dataset, spec, replace(config, collapse_normal=True))
    return NeighborhoodFit(chain, transform, clipped)


# ======================
# CONDITIONAL HELLINGER
# ======================

def _component_moments(mix: MixtureDensity, transform: NodeTransform, design: np.ndarray
                       ) -> tuple[np.ndarray, np.ndarray]:
    # Means (points x components) and variances (components) in raw units of x_j
    sj, cj = transform.scale[transform.j], transform.center[transform.j]
    means = np.empty((design.shape[0], len(mix.components)))
    variances = np.empty(len(mix.components))
    for c, draw in enumerate(mix.components):
        idx = list(draw.gamma.included)
        h = design[:, idx] @ draw.beta if idx else np.zeros(design.shape[0])
        means[:, c] = cj + sj * h
        variances[c] = sj ** 2 / draw.phi
    return means, variances


def _per_x_squared(true_mean: np.ndarray, true_var: float, means: np.ndarray, variances: np.ndarray,
                   log_weights: np.ndarray) -> np.ndarray:
    # Gauss-Hermite nodes of the true conditional: x_j = m* + sqrt(2 var*) t
    points = true_mean[:, None] + np.sqrt(2.0 * true_var) * _HERMITE_NODES[None, :]
    log_true = -0.5 * (_LOG_2PI + np.log(true_var)) - _HERMITE_NODES[None, :] ** 2
    resid = points[:, :, None] - means[:, None, :]
    log_comp = (log_weights - 0.5 * (_LOG_2PI + np.log(variances)))[None, None, :] \
        - 0.5 * resid ** 2 / variances[None, None, :]
    log_fit = logsumexp(log_comp, axis=2)
    # Affinity = E_{p*}[sqrt(q / p*)]
    ratio = np.exp(0.5 * (log_fit - log_true))
    affinity = ratio @ _HERMITE_WEIGHTS / np.sqrt(np.pi)
    return np.clip(2.0 - 2.0 * affinity, 0.0, 2.0)


def conditional_hellinger(truth: GraphTruth, j: int, fit: NeighborhoodFit | NodeTransform,
                          mix: MixtureDensity | None = None, n_mc: int = DEFAULT_CONDITIONAL_DRAWS,
                          rng: np.random.Generator | None = None) -> HellingerEstimate:
    """
    Hellinger distance between the fitted and the true conditional law of x_j.

    The outer average runs over x_{k != j} drawn from the true marginal; the inner
    integral over x_j uses 64-point Gauss-Hermite quadrature against the true
    conditional N(sum_k beta*_{j|k} x_k, 1 / Theta_jj).

    Args:
        truth (GraphTruth): The true graph.
        j (int): Node.
        fit (NeighborhoodFit | NodeTransform): The node fit, or just its transform when
            `mix` is given explicitly.
        mix (MixtureDensity | None): Selected estimate; all draws of `fit.chain` by default.
        n_mc (int): Number of x draws.
        rng (np.random.Generator | None): Random stream.

    Returns:
        HellingerEstimate: Monte Carlo estimate with the SE of d^2.
    """
    transform = fit.transform if isinstance(fit, NeighborhoodFit) else fit
    if transform.j != j:
        raise DimensionError(f"The fit belongs to node {transform.j}, not {j}.")
    if mix is None:
        if not isinstance(fit, NeighborhoodFit):
            raise ConfigValidationError("mix", None, "A mixture is required when only a transform is given.")
        mix = select(fit.chain, SelectionRule.all())
    if mix.family.kind is not FamilyKind.NORMAL_UNKNOWN_VAR or any(d.phi is None for d in mix.components):
        raise DimensionError("Conditional Hellinger needs draws carrying a dispersion.")
    if mix.K != truth.J - 1:
        raise DimensionError(f"The mixture has K = {mix.K}, the graph has J - 1 = {truth.J - 1}.")
    if n_mc < 2:
        raise ConfigValidationError("hellinger.x_draws", n_mc, "At least two x draws are needed.")
    rng = rng if rng is not None else np.random.default_rng(0)

    X = truth.law.sample(n_mc, rng)
    true_mean = X[:, truth.others(j)] @ truth.coefficients(j)
    true_var = truth.residual_variance(j)
    design = transform.covariates(X)
    log_weights = np.log(mix.weights)
    chunk = max(1, _CELL_CHUNK // (HERMITE_POINTS * len(mix.components)))
    per_x = np.empty(n_mc)
    for start in range(0, n_mc, chunk):
        stop = min(start + chunk, n_mc)
        means, variances = _component_moments(mix, transform, design[start:stop])
        per_x[start:stop] = _per_x_squared(true_mean[start:stop], true_var, means, variances, log_weights)
    return HellingerEstimate.from_per_x(per_x, exact=False)


# ======================
# GRAPH AGGREGATION
# ======================

class EdgeRule(str, Enum):
    AND = "and"
    OR = "or"


@dataclass(frozen=True, eq=False)
class GraphEstimate:
    """
    Estimated graph.

    Attributes:
        inclusion (np.ndarray): J x J inclusion probabilities; row j from node j's chain,
            diagonal 0.
        adjacency_and, adjacency_or (np.ndarray): Symmetric boolean adjacencies.
        h_hat (np.ndarray): Per-node conditional Hellinger estimates (NaN when not scored).
        threshold (float): Inclusion threshold.
        rule (EdgeRule): Rule reported as the primary edge set.
    """
    inclusion: np.ndarray
    adjacency_and: np.ndarray
    adjacency_or: np.ndarray
    h_hat: np.ndarray
    threshold: float
    rule: EdgeRule = EdgeRule.AND

    @property
    def J(self) -> int:
        return self.inclusion.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        return self.adjacency_and if self.rule is EdgeRule.AND else self.adjacency_or

    def edges(self, rule: EdgeRule | None = None) -> list[list[int]]:
        """Edges [j, k] with j < k."""
        rule = self.rule if rule is None else EdgeRule(rule)
        adjacency = self.adjacency_and if rule is EdgeRule.AND else self.adjacency_or
        rows, cols = np.nonzero(np.triu(adjacency, k=1))
        return [[int(j), int(k)] for j, k in zip(rows, cols)]

    def to_json(self) -> dict:
        return {
            "nodes": self.J,
            "threshold": self.threshold,
            "rule": self.rule.value,
            "edges": self.edges(),
            "edges_and": self.edges(EdgeRule.AND),
            "edges_or": self.edges(EdgeRule.OR),
            "inclusion": self.inclusion.tolist(),
            "h_hat": [None if np.isnan(h) else float(h) for h in self.h_hat],
        }


def inclusion_matrix(chains) -> np.ndarray:
    """Stacks per-node inclusion probabilities into a J x J matrix."""
    J = len(chains)
    out = np.zeros((J, J))
    for j, chain in enumerate(chains):
        chain = chain.chain if isinstance(chain, NeighborhoodFit) else chain
        if chain.K != J - 1:
            raise DimensionError(f"Chain of node {j} has K = {chain.K}, expected {J - 1}.")
        out[j, np.delete(np.arange(J), j)] = inclusion_probabilities(chain)
    return out


def build_graph(chains, threshold: float = 0.5, rule: EdgeRule = EdgeRule.AND,
                h_hat=None) -> GraphEstimate:
    """
    Reads edges from per-node chains.

    (j, k) is an OR edge if either node includes the other with probability above the
    threshold, and an AND edge if both do.

    Args:
        chains: One `Chain` (or `NeighborhoodFit`) per node, in node order, or a J x J
            inclusion matrix.
        threshold (float): Inclusion threshold in (0, 1).
        rule (EdgeRule): Primary edge rule.
        h_hat (array-like | None): Per-node conditional Hellinger values.

    Raises:
        ConfigValidationError: If the threshold lies outside (0, 1).
    """
    if not 0.0 < threshold < 1.0:
        raise ConfigValidationError("graph.threshold", threshold, "The threshold must lie in (0, 1).")
    inclusion = np.asarray(chains, dtype=float) if isinstance(chains, np.ndarray) else inclusion_matrix(chains)
    if inclusion.ndim != 2 or inclusion.shape[0] != inclusion.shape[1]:
        raise DimensionError(f"Inclusion matrix must be square, got shape {inclusion.shape}.")
    inclusion = inclusion.copy()
    np.fill_diagonal(inclusion, 0.0)
    above = inclusion > threshold
    J = inclusion.shape[0]
    h = np.full(J, np.nan) if h_hat is None else np.asarray(h_hat, dtype=float)
    if h.shape != (J,):
        raise DimensionError(f"h_hat must have length {J}.")
    return GraphEstimate(inclusion, above & above.T, above | above.T, h, float(threshold), EdgeRule(rule))


def _fit_node(data: np.ndarray, j: int, spec: PriorSpec, config: McmcConfig, design_scale: float,
              truth: GraphTruth | None, n_mc: int, hellinger_seed: int) -> tuple[NeighborhoodFit, float]:
    fit = neighborhood_select(data, j, spec, config, design_scale)
    h = np.nan
    if truth is not None:
        h = conditional_hellinger(truth, j, fit, n_mc=n_mc, rng=np.random.default_rng(hellinger_seed)).value
    return fit, h


def fit_graph(data, spec: PriorSpec, config: McmcConfig, threshold: float = 0.5,
              rule: EdgeRule = EdgeRule.AND, truth: GraphTruth | None = None,
              n_mc: int = DEFAULT_CONDITIONAL_DRAWS, design_scale: float = DEFAULT_DESIGN_SCALE,
              n_jobs: int = 1) -> tuple[GraphEstimate, list[NeighborhoodFit]]:
    """
    Runs every node regression in a worker pool and aggregates the graph.

    Node j samples with a seed spawned from `config.seed`, so the result does not depend
    on `n_jobs`.
    """
    data = np.asarray(data, dtype=float)
    J = data.shape[1]
    children = np.random.SeedSequence(config.seed).spawn(J)
    seeds = [child.generate_state(2) for child in children]
    print(f"⏳ [INFO] Fitting {J} neighbourhood regressions on {data.shape[0]} rows.")
    try:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_fit_node)(data, j, spec, replace(config, seed=int(seeds[j][0])), design_scale,
                               truth, n_mc, int(seeds[j][1]))
            for j in range(J)
        )
    except EngineError as err:
        print(f"❌ [ERROR] A node regression failed: {err}")
        raise
    fits = [fit for fit, _ in results]
    graph = build_graph(fits, threshold, rule, [h for _, h in results])
    print(f"✅ [SUCCESS] Graph estimated: {len(graph.edges(EdgeRule.AND))} AND edges, "
          f"{len(graph.edges(EdgeRule.OR))} OR edges.")
    return graph, fits

"""
Numeric audit of the rate conditions behind the posterior convergence results.

Every condition is evaluated on an n-grid as a left-hand side, a right-hand side and
their ratio. Asymptotic relations a_n << b_n are read as "the ratio strictly decreases
across the grid and ends below 1"; finite-n inequalities are read pointwise.

Key components:

- **CoefficientProfile**: beta* generators (geometric, explicit) with closed-form tail
  sums so that K can grow far beyond what fits in memory.
- **GrowthMapping** and **RateConfig**: K(n), r(n), r_bar(n) and the rate constants.
- `delta`, `d_growth`, `rate_formula`: the building blocks.
- `audit_theorems`: entropy, prior-size, bias and eigenvalue conditions, the
  family-specific size caps, the consistency window for a fixed epsilon and, for graphical
  runs, the neighbourhood-selection conditions.
- `audit_conditions_NO`: prior mass of the best size-r model and of a small rectangle
  around beta*, the complexity conditions, the size tail and the coefficient tail.
- **ConditionsReport**: pandas-backed result with per-condition trend flags.
"""
# Standard library imports
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

# Third-party imports
import numpy as np
import pandas as pd
from scipy.special import log_ndtr, logsumexp, ndtr
from scipy.stats import multivariate_normal

# Local project-specific imports
from src.assets.custom_errors import ConditionMappingError, ConfigValidationError, DimensionError
from src.models.glm_core import FamilyKind, GlmFamily, mean, natural_terms, resolve_dispersion
from src.models.prior import IdentityScale, PriorSpec, log_prior_size, v_policy_bounds

GRID_POINTS: int = 10_000
RECTANGLE_MC_DRAWS: int = 20_000


# ======================
# COEFFICIENT PROFILES
# ======================

class ProfileKind(str, Enum):
    GEOMETRIC = "geometric"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class CoefficientProfile:
    """
    Generator of beta* for any K.

    Attributes:
        kind (ProfileKind): GEOMETRIC gives |beta*_j| = scale * ratio^(j-1) (1-based j);
            EXPLICIT gives `values` followed by zeros.
        scale (float): Geometric scale.
        ratio (float): Geometric ratio in (0, 1].
        values (tuple[float, ...]): Explicit leading coefficients.
    """
    kind: ProfileKind = ProfileKind.GEOMETRIC
    scale: float = 1.0
    ratio: float = 0.5
    values: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ProfileKind(self.kind))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind is ProfileKind.GEOMETRIC and not 0.0 < self.ratio <= 1.0:
            raise ConfigValidationError("truth.beta.ratio", self.ratio, "The geometric ratio must lie in (0, 1].")

    def vector(self, K: int) -> np.ndarray:
        """Materialized beta* of length K."""
        if self.kind is ProfileKind.GEOMETRIC:
            return self.scale * self.ratio ** np.arange(K, dtype=float)
        out = np.zeros(K)
        m = min(K, len(self.values))
        out[:m] = self.values[:m]
        return out

    def delta(self, r: int, K: int) -> float:
        """Sum of the K - r smallest |beta*_j|."""
        if not 0 <= r <= K:
            raise DimensionError(f"delta needs 0 <= r <= K, got r = {r}, K = {K}.")
        if self.kind is ProfileKind.GEOMETRIC:
            if self.ratio == 1.0:
                return abs(self.scale) * (K - r)
            # scale * (ratio^r - ratio^K) / (1 - ratio)
            return float(abs(self.scale) * (self.ratio ** r - self.ratio ** K) / (1.0 - self.ratio))
        if K <= len(self.values):
            return delta(self.vector(K), r)
        # Coordinates past `values` are zero and never enter the tail sum
        head = np.sort(np.abs(self.values))[::-1]
        return float(np.sum(head) - np.sum(head[:r]))

    def top_indices(self, r: int, K: int) -> tuple[int, ...]:
        """0-based indices of the r largest |beta*_j| (ties by index)."""
        if self.kind is ProfileKind.GEOMETRIC:
            return tuple(range(r))
        head = np.abs(self.vector(min(K, len(self.values))))
        order = np.argsort(-head, kind="stable").tolist()
        order += list(range(len(head), min(K, len(head) + r)))
        return tuple(sorted(order[:r]))

    def values_at(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=int)
        if self.kind is ProfileKind.GEOMETRIC:
            return self.scale * self.ratio ** indices.astype(float)
        values = np.asarray(self.values, dtype=float)
        out = np.zeros(indices.shape)
        known = indices < values.size
        out[known] = values[indices[known]]
        return out

    def l1_norm(self, K: int) -> float:
        return self.delta(0, K)


def delta(beta_star, r: int) -> float:
    """
    Smallest l1 mass left out by a size-r model: the sum of the K - r smallest |beta*_j|.

    Raises:
        DimensionError: If r < 0 or r > K.
    """
    magnitudes = np.sort(np.abs(np.asarray(beta_star, dtype=float)))
    K = magnitudes.size
    if not 0 <= r <= K:
        raise DimensionError(f"delta needs 0 <= r <= K, got r = {r}, K = {K}.")
    return float(np.sum(magnitudes[:K - r]))


# ======================
# GROWTH OF THE GLM CLASS
# ======================

def log_d_growth(family: GlmFamily, R: float, dispersion: float | None = None,
                 method: str = "closed") -> float:
    """
    ln D(R) with D(R) = 1 + R * sup_{|h|<=R} |a'(h)| * sup_{|h|<=R} |psi(h)|.

    Args:
        family (GlmFamily): The family.
        R (float): Radius, R >= 0.
        dispersion (float | None): Dispersion for normal families.
        method (str): "closed" for the analytic sups, "grid" for a 10^4-point grid.
    """
    if R < 0:
        raise ConfigValidationError("R", R, "R must be non-negative.")
    if R == 0:
        return 0.0
    kind = family.kind
    if method == "grid":
        h = np.linspace(-R, R, GRID_POINTS)
        _, a_prime, _ = natural_terms(family, h, dispersion if family.is_normal else None)
        psi = mean(family, h)
        return float(np.log1p(R * np.max(np.abs(a_prime)) * np.max(np.abs(psi))))
    log_r = np.log(R)
    if family.is_normal:
        return float(np.log1p(resolve_dispersion(family, dispersion) * R ** 2))
    if kind is FamilyKind.LOGISTIC:
        return float(np.log1p(R))
    if kind is FamilyKind.PROBIT:
        # a' is even and increasing in |h|, Phi increasing
        _, a_prime, _ = natural_terms(family, R)
        return float(np.logaddexp(0.0, log_r + np.log(a_prime) + log_ndtr(R)))
    if kind is FamilyKind.POISSON:
        return float(np.logaddexp(0.0, log_r + R))
    return float(np.logaddexp(0.0, log_r + 2.0 * R))


def d_growth(family: GlmFamily, R: float, dispersion: float | None = None, method: str = "closed") -> float:
    """D(R); see `log_d_growth`."""
    return float(np.exp(log_d_growth(family, R, dispersion, method)))


# ======================
# RATE CONFIGURATION
# ======================

class MappingKind(str, Enum):
    CONSTANT = "constant"
    POWER = "power"
    LOG_POWER = "log_power"
    EXP_POWER = "exp_power"


@dataclass(frozen=True)
class GrowthMapping:
    """
    Integer-valued sequence of n.

    constant: ceil(coef); power: ceil(coef * n^exponent); log_power:
    ceil(coef * (ln n)^exponent); exp_power: ceil(exp(coef * n^exponent)).
    """
    kind: MappingKind = MappingKind.POWER
    coef: float = 1.0
    exponent: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MappingKind(self.kind))

    def evaluate(self, n: int, condition: str = "mapping") -> int:
        """
        Raises:
            ConditionMappingError: If the value is not a finite integer >= 1.
        """
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if self.kind is MappingKind.CONSTANT:
                value = self.coef
            elif self.kind is MappingKind.POWER:
                value = self.coef * float(n) ** self.exponent
            elif self.kind is MappingKind.LOG_POWER:
                value = self.coef * np.log(float(n)) ** self.exponent
            else:
                value = np.exp(self.coef * float(n) ** self.exponent)
        if not np.isfinite(value) or value < 1 - 1e-9:
            raise ConditionMappingError(condition, n, message=f"Mapping {self.kind.value} gives {value}.")
        return int(np.ceil(value - 1e-9))


class RateKind(str, Enum):
    COR1 = "cor1"
    COR2 = "cor2"
    FIXED = "fixed"


@dataclass(frozen=True)
class RateConfig:
    """
    Grid and constants for the audits.

    Attributes:
        n_grid (tuple[int, ...]): Increasing sample sizes, each >= 3.
        K_of_n, r_of_n, rbar_of_n (GrowthMapping): Dimension, prior size and size cap.
        family (GlmFamily): Regression family.
        xi, k, b, delta, C, C_prime, B, v (float): Rate constants.
        eps_scale (float): Multiplier of the rate formula.
        rate (RateKind): Which rate formula drives epsilon_n.
        fixed_epsilon (float | None): Epsilon for the FIXED (consistency) mode.
        graphical (bool): Add the neighbourhood-selection conditions.
    """
    n_grid: tuple[int, ...]
    K_of_n: GrowthMapping
    r_of_n: GrowthMapping
    rbar_of_n: GrowthMapping
    family: GlmFamily
    xi: float = 0.5
    k: float = 2.0
    b: float = 0.1
    delta: float = 1.0
    C: float = 1.0
    C_prime: float = 1.0
    B: float = 1.0
    v: float = 1.0
    eps_scale: float = 1.0
    rate: RateKind = RateKind.COR1
    fixed_epsilon: float | None = None
    graphical: bool = False

    def __post_init__(self) -> None:
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "rate", RateKind(self.rate))
        if not grid or any(n < 3 for n in grid) or any(a >= b for a, b in zip(grid, grid[1:])):
            raise ConfigValidationError("rate.n_grid", grid, "n_grid must be strictly increasing with n >= 3.")
        if not 0.0 < self.xi < 1.0:
            raise ConfigValidationError("rate.xi", self.xi, "xi must lie in (0, 1).")
        if self.rate is RateKind.COR1 and not self.k > 1.0:
            raise ConfigValidationError("rate.k", self.k, "k must exceed 1.")
        if self.rate is RateKind.FIXED and (self.fixed_epsilon is None or not self.fixed_epsilon > 0):
            raise ConfigValidationError("rate.fixed_epsilon", self.fixed_epsilon,
                                        "A positive fixed_epsilon is required in fixed mode.")
        if not (self.B > 0 and self.v > 0 and self.eps_scale > 0 and self.C_prime > 0):
            raise ConfigValidationError("rate", (self.B, self.v, self.eps_scale, self.C_prime),
                                        "B, v, eps_scale and C_prime must be positive.")

    def sizes(self, n: int) -> tuple[int, int, int]:
        """
        (K, r, r_bar) at n.

        Raises:
            ConditionMappingError: If 1 <= r <= r_bar < K fails.
        """
        K = self.K_of_n.evaluate(n, "K_of_n")
        r = self.r_of_n.evaluate(n, "r_of_n")
        r_bar = self.rbar_of_n.evaluate(n, "rbar_of_n")
        if not 1 <= r <= r_bar < K:
            raise ConditionMappingError("11", n, message=f"1 <= r <= r_bar < K fails: r={r}, r_bar={r_bar}, K={K}.")
        return K, r, r_bar


@dataclass(frozen=True)
class RateValue:
    """epsilon_n with the hypothesis checks attached to it."""
    epsilon: float
    epsilon_ok: bool
    q: float | None = None
    b_ok: bool | None = None


def q_threshold(config: RateConfig) -> float:
    """Upper limit q for b under the size cap r_bar << n^b."""
    kind = config.family.kind
    if kind in (FamilyKind.POISSON, FamilyKind.EXPONENTIAL):
        return min(1.0 - config.xi, config.delta, config.xi / (3.0 + config.v))
    if config.v <= 1.0:
        return min(1.0 - config.xi, config.delta)
    return min(1.0 - config.xi, config.delta, config.xi / (config.v - 1.0))


def rate_formula(config: RateConfig, n: int, which: RateKind | None = None) -> RateValue:
    """
    epsilon_n for the configured rate.

    COR1: eps_scale * n^(-(1-xi)/2) * (ln n)^(k/2); COR2: eps_scale * n^(-(1-xi-b)/2),
    with b < q checked; FIXED: the configured constant. A violated hypothesis is flagged,
    not raised.
    """
    which = config.rate if which is None else RateKind(which)
    if n < 3:
        raise ConditionMappingError("rate", n, message="The rate formulas need n >= 3.")
    if which is RateKind.COR1:
        eps = config.eps_scale * n ** (-(1.0 - config.xi) / 2.0) * np.log(n) ** (config.k / 2.0)
        return RateValue(float(eps), bool(eps <= 1.0))
    if which is RateKind.COR2:
        q = q_threshold(config)
        eps = config.eps_scale * n ** (-(1.0 - config.xi - config.b) / 2.0)
        return RateValue(float(eps), bool(eps <= 1.0), q, bool(0.0 < config.b < q))
    if config.fixed_epsilon is None:
        raise ConfigValidationError("rate.fixed_epsilon", None, "Fixed mode needs fixed_epsilon.")
    eps = float(config.fixed_epsilon)
    return RateValue(eps, bool(eps <= 1.0))


# ======================
# REPORT
# ======================

class RowKind(str, Enum):
    ASYMPTOTIC = "asymptotic"
    BOUND = "bound"


class ConditionsReport:
    """
    Audit rows with per-condition trend flags.

    Columns: condition, n, K, r, r_bar, epsilon, lhs, rhs, ratio, log_ratio, kind,
    satisfied, trend. `trend` is True on every row of a condition whose ratio strictly
    decreases across the grid (or is identically zero).
    """
    COLUMNS: list[str] = ["condition", "n", "K", "r", "r_bar", "epsilon", "lhs", "rhs", "ratio",
                          "log_ratio", "kind", "satisfied", "trend"]

    def __init__(self, rows: list[dict] | pd.DataFrame):
        frame = rows.copy() if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows)
        if frame.empty:
            frame = pd.DataFrame(columns=self.COLUMNS)
        else:
            frame = frame.sort_values(["condition", "n"], kind="stable").reset_index(drop=True)
            trends = {cond: self._trend(group["ratio"].to_numpy(), group["log_ratio"].to_numpy())
                      for cond, group in frame.groupby("condition", sort=False)}
            frame["trend"] = frame["condition"].map(trends).astype(bool)
        self._frame: pd.DataFrame = frame[self.COLUMNS]

    @staticmethod
    def _trend(ratio: np.ndarray, log_ratio: np.ndarray) -> bool:
        if np.all(ratio == 0.0):
            return True
        return bool(np.all(np.diff(log_ratio) < 0.0))

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame

    def conditions(self) -> list[str]:
        return list(dict.fromkeys(self._frame["condition"]))

    def rows_for(self, condition: str) -> pd.DataFrame:
        return self._frame[self._frame["condition"] == condition]

    def holds(self, condition: str) -> bool:
        """
        Asymptotic rows: decreasing trend and final ratio < 1 (or identically zero).
        Bound rows: satisfied at every n.
        """
        rows = self.rows_for(condition)
        if rows.empty:
            raise ConfigValidationError("condition", condition, "Condition not present in the report.")
        if rows["kind"].iloc[0] == RowKind.BOUND.value:
            return bool(rows["satisfied"].all())
        return bool(rows["trend"].iloc[0] and rows["ratio"].iloc[-1] < 1.0)

    def summary(self) -> pd.DataFrame:
        """One row per condition with endpoint ratios and the verdict."""
        records = []
        for condition in self.conditions():
            rows = self.rows_for(condition)
            records.append({
                "condition": condition,
                "kind": rows["kind"].iloc[0],
                "first_ratio": float(rows["ratio"].iloc[0]),
                "last_ratio": float(rows["ratio"].iloc[-1]),
                "trend": bool(rows["trend"].iloc[0]),
                "all_satisfied": bool(rows["satisfied"].all()),
                "holds": self.holds(condition),
            })
        return pd.DataFrame(records)

    def failures(self) -> list[str]:
        return [condition for condition in self.conditions() if not self.holds(condition)]

    def concat(self, other: "ConditionsReport") -> "ConditionsReport":
        return ConditionsReport(pd.concat([self._frame, other.frame], ignore_index=True))


def _row(condition: str, n: int, sizes: tuple[int, int, int], eps: float, lhs: float, rhs: float,
         kind: RowKind = RowKind.ASYMPTOTIC, satisfied: bool | None = None,
         log_ratio: float | None = None) -> dict:
    K, r, r_bar = sizes
    if log_ratio is None:
        with np.errstate(divide="ignore"):
            log_ratio = float(np.log(lhs) - np.log(rhs)) if lhs > 0 else -np.inf
        ratio = lhs / rhs
    else:
        ratio = float(np.exp(log_ratio))
    if satisfied is None:
        satisfied = ratio < 1.0 if kind is RowKind.ASYMPTOTIC else lhs <= rhs
    return {
        "condition": condition, "n": n, "K": K, "r": r, "r_bar": r_bar, "epsilon": eps,
        "lhs": float(lhs), "rhs": float(rhs), "ratio": float(ratio), "log_ratio": float(log_ratio),
        "kind": kind.value, "satisfied": bool(satisfied),
    }


BetaSource = CoefficientProfile | Callable[[int], np.ndarray]


def _delta_at(beta_star_of_n: BetaSource, n: int, r: int, K: int) -> float:
    if isinstance(beta_star_of_n, CoefficientProfile):
        return beta_star_of_n.delta(r, K)
    return delta(beta_star_of_n(n), r)


def _max_prior_variance(spec: PriorSpec, r_bar: int) -> float:
    # B_tilde: sup of ch1(V_gamma) over model sizes up to r_bar
    return max(v_policy_bounds(spec, size)[0] for size in range(1, r_bar + 1))


def _dispersion_for(family: GlmFamily) -> float | None:
    if family.kind is FamilyKind.NORMAL_UNKNOWN_VAR:
        return 1.0
    return None


# ======================
# AUDITS
# ======================

def audit_theorems(config: RateConfig, beta_star_of_n: BetaSource, spec: PriorSpec) -> ConditionsReport:
    """
    Evaluates the convergence-rate conditions on the grid.

    Args:
        config (RateConfig): Grid, mappings and constants.
        beta_star_of_n (CoefficientProfile | Callable[[int], np.ndarray]): beta* per n.
        spec (PriorSpec): Prior whose slab policy supplies the eigenvalue quantities.

    Returns:
        ConditionsReport: One row per (condition, n).

    Raises:
        ConditionMappingError: If a mapping is undefined at some n.
    """
    rows: list[dict] = []
    family = config.family
    dispersion = _dispersion_for(family)
    for n in config.n_grid:
        sizes = config.sizes(n)
        K, r, r_bar = sizes
        rate = rate_formula(config, n)
        eps = rate.epsilon
        eps2 = eps ** 2
        budget = n * eps2
        b_tilde = _max_prior_variance(spec, r_bar)
        ch1_v_r, ch1_vinv_r, _ = v_policy_bounds(spec, r)
        _, _, h_rbar = v_policy_bounds(spec, r_bar)
        bias = _delta_at(beta_star_of_n, n, r, K)
        log_k = float(np.log(K))
        radius = r_bar * np.sqrt(budget * b_tilde)
        entropy_d = r_bar * log_d_growth(family, radius, dispersion)

        rows.append(_row("eps_le_1", n, sizes, eps, eps, 1.0, RowKind.BOUND))
        rows.append(_row("2", n, sizes, eps, r_bar * max(np.log(1.0 / eps2), 0.0), budget))
        rows.append(_row("3", n, sizes, eps, r_bar * log_k, budget))
        rows.append(_row("4", n, sizes, eps, entropy_d, budget))
        rows.append(_row("5", n, sizes, eps, r_bar, K, RowKind.BOUND, 1 <= r <= r_bar < K))
        rows.append(_row("6", n, sizes, eps, r, K))
        rows.append(_row("6_lower", n, sizes, eps, 1.0, r))
        rows.append(_row("7", n, sizes, eps, bias, eps2))
        rows.append(_row("8", n, sizes, eps, ch1_vinv_r, budget))
        rows.append(_row("9", n, sizes, eps, r * max(np.log(ch1_v_r), 0.0), budget))
        rows.append(_row("10", n, sizes, eps, r_bar * log_k, budget))
        rows.append(_row("11", n, sizes, eps, r_bar, K, RowKind.BOUND, 1 <= r <= r_bar < K))
        rows.append(_row("12", n, sizes, eps, r, K))
        rows.append(_row("13", n, sizes, eps, bias, eps2))
        if family.kind in (FamilyKind.POISSON, FamilyKind.EXPONENTIAL):
            rows.append(_row("15", n, sizes, eps, r_bar, budget ** (1.0 / (4.0 + config.v))))
        else:
            rows.append(_row("14", n, sizes, eps, r_bar, budget ** (1.0 / config.v)))
        rows.append(_row("eigen", n, sizes, eps, h_rbar, config.B * r_bar ** config.v, RowKind.BOUND))
        rows.append(_row("K_lower", n, sizes, eps, float(n) ** config.delta, K, RowKind.BOUND))
        rows.append(_row("K_upper", n, sizes, eps, log_k, config.C * float(n) ** config.xi, RowKind.BOUND))

        if config.rate is RateKind.COR1:
            rows.append(_row("16_lower", n, sizes, eps, np.log(n) / config.C_prime, r, RowKind.BOUND))
            rows.append(_row("16", n, sizes, eps, r_bar, np.log(n) ** config.k))
        elif config.rate is RateKind.COR2:
            rows.append(_row("q", n, sizes, eps, config.b, rate.q, RowKind.BOUND, rate.b_ok))
            rows.append(_row("18_lower", n, sizes, eps, np.log(n) / config.C_prime, r, RowKind.BOUND))
            rows.append(_row("18", n, sizes, eps, r_bar, float(n) ** config.b))
        else:
            window = min(K, float(n) ** (1.0 / (config.v + 4.0)), n / log_k)
            rows.append(_row("20", n, sizes, eps, r_bar, window))
            rows.append(_row("20_lower", n, sizes, eps, 1.0, r))

        if config.graphical:
            b_cap = min(config.delta, config.xi, config.xi / config.v)
            rows.append(_row("29_b", n, sizes, eps, config.b, b_cap, RowKind.BOUND, config.b < b_cap))
            rows.append(_row("29_lower", n, sizes, eps, np.log(n), r))
            rows.append(_row("29", n, sizes, eps, r_bar, float(n) ** config.b))
            rows.append(_row("K_delta", n, sizes, eps, K * bias, eps2))
    return ConditionsReport(rows)


def log_rectangle_probability(spec: PriorSpec, centers, half_width: float,
                              rng: np.random.Generator | None = None,
                              draws: int = RECTANGLE_MC_DRAWS) -> tuple[float, float]:
    """
    ln of the slab probability of the box prod_j (center_j - w, center_j + w).

    Exact (product of normal interval masses) for IdentityScale; importance Monte Carlo
    with uniform proposals on the box otherwise.

    Returns:
        tuple[float, float]: (log probability, standard error of the log estimate).
    """
    centers = np.asarray(centers, dtype=float)
    size = centers.size
    if size == 0:
        return 0.0, 0.0
    if not half_width > 0:
        raise ConfigValidationError("eta", half_width, "The box half-width must be positive.")
    if isinstance(spec.v_policy, IdentityScale):
        sd = np.sqrt(spec.v_policy.c)
        upper = (centers + half_width) / sd
        lower = (centers - half_width) / sd
        # Work on the side of the mass where the tail is not negligible
        flip = centers > 0
        upper, lower = np.where(flip, -lower, upper), np.where(flip, -upper, lower)
        log_upper, log_lower = log_ndtr(upper), log_ndtr(lower)
        with np.errstate(divide="ignore"):
            log_mass = log_upper + np.log1p(-np.exp(log_lower - log_upper))
        return float(np.sum(log_mass)), 0.0
    rng = rng if rng is not None else np.random.default_rng(0)
    law = multivariate_normal(mean=np.zeros(size), cov=spec.v_policy.covariance(size))
    points = centers + rng.uniform(-half_width, half_width, size=(draws, size))
    log_pdf = np.atleast_1d(law.logpdf(points))
    log_volume = size * np.log(2.0 * half_width)
    log_mean = float(logsumexp(log_pdf) - np.log(draws))
    normalized = np.exp(log_pdf - log_mean)
    se = float(np.std(normalized, ddof=1) / np.sqrt(draws))
    return log_volume + log_mean, se


def audit_conditions_NO(config: RateConfig, beta_star_of_n: CoefficientProfile, spec: PriorSpec,
                        gamma_n_of_n: Callable[[int, int, int], tuple[int, ...]] | None = None,
                        eta: float = 0.5, rng: np.random.Generator | None = None) -> ConditionsReport:
    """
    Evaluates the prior-mass and complexity conditions on the grid.

    Args:
        config (RateConfig): Grid, mappings and constants.
        beta_star_of_n (CoefficientProfile): beta* generator.
        spec (PriorSpec): Prior supplying the slab policy and model-prior kind.
        gamma_n_of_n (Callable | None): (n, r, K) -> indices of gamma_n; defaults to the
            top-r coordinates of |beta*|.
        eta (float): Box half-width factor; the half-width is eta * eps^2 / |gamma_n|.
        rng (np.random.Generator | None): Stream for the Monte Carlo box probability.

    Returns:
        ConditionsReport: Rows "32" to "39". The coefficient tail is checked at eps/4.
    """
    if not isinstance(beta_star_of_n, CoefficientProfile):
        raise ConfigValidationError("truth.beta", beta_star_of_n, "A coefficient profile is required.")
    rows: list[dict] = []
    family = config.family
    dispersion = _dispersion_for(family)
    rng = rng if rng is not None else np.random.default_rng(0)
    for n in config.n_grid:
        sizes = config.sizes(n)
        K, r, r_bar = sizes
        eps = rate_formula(config, n).epsilon
        eps2 = eps ** 2
        budget = n * eps2
        gamma_n = (gamma_n_of_n(n, r, K) if gamma_n_of_n is not None
                   else beta_star_of_n.top_indices(r, K))
        size = len(gamma_n)
        if size == 0:
            raise ConditionMappingError("33", n, message="gamma_n must be non-empty.")
        b_tilde = _max_prior_variance(spec, r_bar)

        left_out = beta_star_of_n.l1_norm(K) - float(np.sum(np.abs(beta_star_of_n.values_at(gamma_n))))
        rows.append(_row("32", n, sizes, eps, max(left_out, 0.0), eps2))

        spec_n = PriorSpec(r_exp=r, r_max=r_bar, v_policy=spec.v_policy, model_prior=spec.model_prior)
        log_model = log_prior_size(spec_n, K, size)
        rows.append(_row("33", n, sizes, eps, -log_model, budget / 8.0))

        log_box, _ = log_rectangle_probability(spec, beta_star_of_n.values_at(gamma_n), eta * eps2 / size, rng)
        rows.append(_row("34", n, sizes, eps, -log_box, budget / 8.0))

        rows.append(_row("35", n, sizes, eps, r_bar * max(np.log(1.0 / eps2), 0.0), budget))
        rows.append(_row("36", n, sizes, eps, r_bar * np.log(K), budget))
        c_n = np.sqrt(b_tilde * budget)
        rows.append(_row("37", n, sizes, eps, r_bar * log_d_growth(family, r_bar * c_n, dispersion), budget))
        rows.append(_row("38", n, sizes, eps, 0.0, float(np.exp(-4.0 * budget)), RowKind.BOUND, True,
                         log_ratio=-np.inf))

        # Tail of one slab coordinate beyond C_n, against exp(-4 n (eps/4)^2)
        log_tail = float(np.log(2.0) + log_ndtr(-c_n / np.sqrt(b_tilde)))
        log_target = -budget / 4.0
        rows.append(_row("39", n, sizes, eps, float(np.exp(log_tail)), float(np.exp(log_target)),
                         log_ratio=log_tail - log_target))
    return ConditionsReport(rows)


def run_audit(config: RateConfig, profile: CoefficientProfile, spec: PriorSpec, eta: float = 0.5,
              rng: np.random.Generator | None = None) -> ConditionsReport:
    """Both audits in one report."""
    return audit_theorems(config, profile, spec).concat(audit_conditions_NO(config, profile, spec, eta=eta, rng=rng))


def rectangle_probability_product(centers, half_width: float, c: float = 1.0) -> float:
    """prod_j (Phi((b_j + w)/sqrt(c)) - Phi((b_j - w)/sqrt(c))) computed directly."""
    centers = np.asarray(centers, dtype=float)
    sd = np.sqrt(c)
    return float(np.prod(ndtr((centers + half_width) / sd) - ndtr((centers - half_width) / sd)))

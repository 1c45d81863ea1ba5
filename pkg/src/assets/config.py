"""
Experiment configuration: validation, defaults, JSON persistence and hashing.

A configuration is a JSON object checked against `src.assets.schema`. Validation
rejects unknown keys, applies defaults, enforces the fields each experiment type
requires, and finally builds the engine objects (prior, sampler settings, rate
configuration, selection rule) so that their own cross-field checks run at parse time.
Every error is a `ConfigValidationError` naming the dotted path of the field.

The canonical form (defaults applied, keys sorted, compact separators) round-trips
through `parse_config`; its SHA-256 prefix is the configuration hash stamped on every
result row.
"""
# Standard library imports
import copy
import hashlib
import json
import os
from dataclasses import dataclass

# Third-party imports
import numpy as np

# Local project-specific imports
from src.assets import schema
from src.assets.custom_errors import ConfigValidationError, EngineError
from src.experiments.baselines import MIN_POSTERIOR_DRAWS
from src.experiments.conditions_audit import CoefficientProfile, GrowthMapping, RateConfig
from src.models.estimators import SelectionRule
from src.models.glm_core import FamilyKind, GlmFamily, family_from_name
from src.models.hellinger import IndicatorDesign, UniformCube
from src.models.posterior import McmcConfig
from src.models.prior import AR1, DispersionPrior, IdentityScale, PriorSpec

HASH_LENGTH: int = 16


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    A validated configuration with every default applied.

    Attributes:
        values (dict): The canonical configuration tree.
    """
    values: dict

    @property
    def experiment(self) -> str:
        return self.values["experiment"]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def replicates(self) -> int:
        return self.values["replicates"]

    @property
    def output_dir(self) -> str:
        return self.values["output_dir"]

    def section(self, name: str) -> dict:
        return self.values[name]

    def to_json(self) -> str:
        return canonical_json(self)

    @property
    def hash(self) -> str:
        return config_hash(self)

    def with_overrides(self, seed: int | None = None, replicates: int | None = None,
                       output_dir: str | None = None) -> "ExperimentConfig":
        """Copy with command-line overrides applied and re-validated."""
        values = copy.deepcopy(self.values)
        if seed is not None:
            values["seed"] = seed
        if replicates is not None:
            values["replicates"] = replicates
        if output_dir is not None:
            values["output_dir"] = output_dir
        return validate_config(values)


# ======================
# VALIDATION
# ======================

def _fill(path: str, given, defaults: dict) -> dict:
    if not isinstance(given, dict):
        raise ConfigValidationError(path or "<document>", given, "Expected a JSON object.")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        prefix = f"{path}." if path else ""
        raise ConfigValidationError(f"{prefix}{unknown[0]}", given[unknown[0]], "Unknown configuration key.",
                                    suggestion=f"Allowed keys: {sorted(defaults)}.")
    out = copy.deepcopy(defaults)
    out.update(copy.deepcopy(given))
    return out


def _get(values: dict, path: str):
    node = values
    for part in path.split("."):
        node = node[part]
    return node


def _check_types(values: dict) -> None:
    for path in schema.INTEGER_FIELDS:
        value = _get(values, path)
        if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigValidationError(path, value, "Expected an integer.")


def _apply_defaults(raw: dict) -> dict:
    values = _fill("", raw, {**schema.TOP_LEVEL_DEFAULTS, **{name: {} for name in schema.SECTION_DEFAULTS}})
    for name, defaults in schema.SECTION_DEFAULTS.items():
        values[name] = _fill(name, values[name], defaults)
    for path, defaults in schema.NESTED_DEFAULTS.items():
        section, key = path.split(".")
        if values[section][key] is not None:
            values[section][key] = _fill(path, values[section][key], defaults)
    return values


def validate_config(raw: dict) -> ExperimentConfig:
    """
    Validates a configuration tree and applies its defaults.

    Args:
        raw (dict): The decoded JSON document.

    Returns:
        ExperimentConfig: The canonical configuration.

    Raises:
        ConfigValidationError: On unknown keys, missing required fields, wrong types or
            violated cross-field constraints.
    """
    values = _apply_defaults(raw)
    experiment = values["experiment"]
    if experiment not in schema.EXPERIMENTS:
        raise ConfigValidationError("experiment", experiment, "Unknown experiment type.",
                                    suggestion=f"Use one of {list(schema.EXPERIMENTS)}.")
    for path in schema.REQUIRED_FIELDS[experiment]:
        if _get(values, path) is None:
            raise ConfigValidationError(path, None, f"Required for the '{experiment}' experiment.")
    _check_types(values)
    if values["replicates"] < 1:
        raise ConfigValidationError("replicates", values["replicates"], "At least one replicate is required.")
    if not 0 <= values["seed"] < 2 ** 64:
        raise ConfigValidationError("seed", values["seed"], "The seed must be an unsigned 64-bit integer.")
    config = ExperimentConfig(values)
    _check_cross_fields(config)
    return config


def _check_cross_fields(config: ExperimentConfig) -> None:
    experiment = config.experiment
    if experiment == "counterexample":
        section = config.section("counterexample")
        if not section["n_grid"] or any(n < 1 for n in section["n_grid"]):
            raise ConfigValidationError("counterexample.n_grid", section["n_grid"], "n_grid must hold positive sizes.")
        if section["K_factor"] < 1:
            raise ConfigValidationError("counterexample.K_factor", section["K_factor"], "K_factor must be >= 1.")
        if section["posterior_draws"] < MIN_POSTERIOR_DRAWS:
            raise ConfigValidationError("counterexample.posterior_draws", section["posterior_draws"],
                                        f"At least {MIN_POSTERIOR_DRAWS} posterior draws are required.")
        return
    if experiment in ("fit", "rate_sweep", "audit"):
        build_family(config)
        build_profile(config)
    if experiment in ("fit", "rate_sweep", "graph"):
        build_mcmc(config, seed=0)
        build_selection(config)
        if config.section("hellinger")["x_draws"] < 2:
            raise ConfigValidationError("hellinger.x_draws", config.section("hellinger")["x_draws"],
                                        "At least two x draws are needed.")
    if experiment in ("fit", "rate_sweep"):
        free_dispersion = build_truth_dispersion(config) is not None
        if free_dispersion != (config.section("prior")["dispersion"] is not None):
            raise ConfigValidationError("prior.dispersion", config.section("prior")["dispersion"],
                                        "A dispersion prior is required with normal_unknown_var and "
                                        "not allowed with any other family.")
    if experiment in ("rate_sweep", "audit"):
        build_rate_config(config)
    if experiment == "fit":
        data = config.section("data")
        if data["n"] < 0:
            raise ConfigValidationError("data.n", data["n"], "n must be non-negative.")
        spec = build_prior(config)
        spec.check_dimension(data["K"])
        build_x_law(config, data["K"])
    if experiment == "graph":
        graph = config.section("graph")
        if graph["J"] < 3:
            raise ConfigValidationError("graph.J", graph["J"], "A graph experiment needs J >= 3.")
        if not 0.0 < graph["threshold"] < 1.0:
            raise ConfigValidationError("graph.threshold", graph["threshold"], "The threshold must lie in (0, 1).")
        if graph["rule"] not in schema.EDGE_RULES:
            raise ConfigValidationError("graph.rule", graph["rule"], f"Use one of {list(schema.EDGE_RULES)}.")
        if not graph["n_grid"] or any(n < 2 for n in graph["n_grid"]):
            raise ConfigValidationError("graph.n_grid", graph["n_grid"], "n_grid must hold sizes >= 2.")
        build_prior(config).check_dimension(graph["J"] - 1)


# ======================
# ENGINE OBJECTS
# ======================

def build_family(config: ExperimentConfig) -> GlmFamily:
    section = config.section("family")
    try:
        return family_from_name(section["name"], section["dispersion"])
    except EngineError as err:
        raise ConfigValidationError("family", section, str(err.args[0])) from err


def build_truth_dispersion(config: ExperimentConfig) -> float | None:
    family = build_family(config)
    dispersion = config.section("truth")["dispersion"]
    if family.kind is FamilyKind.NORMAL_UNKNOWN_VAR:
        if dispersion is None or not dispersion > 0:
            raise ConfigValidationError("truth.dispersion", dispersion,
                                        "A positive true dispersion is required for normal_unknown_var.")
        return float(dispersion)
    return None


def build_profile(config: ExperimentConfig) -> CoefficientProfile:
    beta = config.section("truth")["beta"]
    if beta["kind"] not in ("geometric", "explicit"):
        raise ConfigValidationError("truth.beta.kind", beta["kind"], "Use 'geometric' or 'explicit'.")
    if beta["kind"] == "explicit" and not beta["values"]:
        raise ConfigValidationError("truth.beta.values", beta["values"], "An explicit profile needs values.")
    return CoefficientProfile(beta["kind"], float(beta["scale"]), float(beta["ratio"]), tuple(beta["values"]))


def build_prior(config: ExperimentConfig, r_exp: int | None = None, r_max: int | None = None) -> PriorSpec:
    """
    The prior of the configuration, with the sizes optionally overridden per grid point.
    """
    section = config.section("prior")
    policy = section["v_policy"]
    if policy["kind"] not in schema.V_POLICIES:
        raise ConfigValidationError("prior.v_policy.kind", policy["kind"], f"Use one of {list(schema.V_POLICIES)}.")
    v_policy = IdentityScale(float(policy["c"])) if policy["kind"] == "identity" \
        else AR1(float(policy["c"]), float(policy["rho"]))
    dispersion = section["dispersion"]
    dispersion = None if dispersion is None else DispersionPrior(float(dispersion["kappa"]), float(dispersion["rate"]))
    r_exp = section["r_exp"] if r_exp is None else r_exp
    r_max = section["r_max"] if r_max is None else r_max
    if r_exp is None or r_max is None:
        raise ConfigValidationError("prior.r_exp", r_exp, "Prior sizes are required here.")
    try:
        return PriorSpec(int(r_exp), int(r_max), v_policy, dispersion, section["model_prior"])
    except ValueError as err:
        raise ConfigValidationError("prior.model_prior", section["model_prior"], "Unknown model prior.") from err


def build_mcmc(config: ExperimentConfig, seed: int) -> McmcConfig:
    section = config.section("mcmc")
    return McmcConfig(section["iterations"], section["burn_in"], section["thin"], tuple(section["move_probs"]),
                      float(section["rw_step"]), int(seed), bool(section["collapse_normal"]))


def build_selection(config: ExperimentConfig) -> SelectionRule:
    section = config.section("selection")
    try:
        return SelectionRule(section["kind"], section["m"], section["threshold"])
    except ValueError as err:
        raise ConfigValidationError("selection.kind", section["kind"], "Unknown selection rule.") from err


def _mapping(config: ExperimentConfig, key: str) -> GrowthMapping:
    mapping = config.section("rate")[key]
    try:
        return GrowthMapping(mapping["kind"], float(mapping["coef"]), float(mapping["exponent"]))
    except ValueError as err:
        raise ConfigValidationError(f"rate.{key}.kind", mapping["kind"], "Unknown mapping kind.") from err


def build_rate_config(config: ExperimentConfig) -> RateConfig:
    section = config.section("rate")
    band = section["slope_band"]
    if len(band) != 2 or not band[0] < band[1]:
        raise ConfigValidationError("rate.slope_band", band, "slope_band must be [low, high] with low < high.")
    try:
        return RateConfig(
            n_grid=tuple(section["n_grid"]),
            K_of_n=_mapping(config, "K_of_n"), r_of_n=_mapping(config, "r_of_n"),
            rbar_of_n=_mapping(config, "rbar_of_n"), family=build_family(config),
            xi=float(section["xi"]), k=float(section["k"]), b=float(section["b"]),
            delta=float(section["delta"]), C=float(section["C"]), C_prime=float(section["C_prime"]),
            B=float(section["B"]), v=float(section["v"]), eps_scale=float(section["eps_scale"]),
            rate=section["rate"], fixed_epsilon=section["fixed_epsilon"],
            graphical=bool(config.section("audit")["graphical"]),
        )
    except ValueError as err:
        raise ConfigValidationError("rate.rate", section["rate"], "Unknown rate kind.") from err


def build_x_law(config: ExperimentConfig, K: int) -> IndicatorDesign | UniformCube:
    x_law = config.section("truth")["x_law"]
    if x_law not in schema.X_LAWS:
        raise ConfigValidationError("truth.x_law", x_law, f"Use one of {list(schema.X_LAWS)}.")
    return IndicatorDesign(K) if x_law == "indicator" else UniformCube(K)


# ======================
# JSON PERSISTENCE
# ======================

def _default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Value of type {type(value).__name__} is not JSON serializable.")


def canonical_json(config: ExperimentConfig) -> str:
    """Sorted-key compact JSON of the canonical configuration."""
    return json.dumps(config.values, sort_keys=True, separators=(",", ":"), default=_default)


def config_hash(config: ExperimentConfig) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()[:HASH_LENGTH]


def parse_config(text: str, experiment: str | None = None) -> ExperimentConfig:
    """
    Parses and validates a JSON configuration document.

    Args:
        text (str): The JSON document.
        experiment (str | None): Experiment type expected by the caller; fills a missing
            "experiment" key.

    Raises:
        ConfigValidationError: If the text is not JSON, fails validation or names another
            experiment.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as json_err:
        raise ConfigValidationError("<document>", text[:40], f"Invalid JSON: {json_err}") from json_err
    if experiment is not None and isinstance(raw, dict):
        raw.setdefault("experiment", experiment)
        if raw["experiment"] != experiment:
            raise ConfigValidationError("experiment", raw["experiment"],
                                        f"The configuration does not describe a '{experiment}' experiment.")
    return validate_config(raw)


def load_config(path: str, experiment: str | None = None) -> ExperimentConfig:
    """
    Loads a configuration file.

    Raises:
        ConfigValidationError: If the file cannot be read or fails validation.
    """
    print(f"⏳ [INFO] Loading configuration from {path}...")
    if not os.path.exists(path):
        raise ConfigValidationError("<file>", path, "Configuration file not found.")
    try:
        with open(path, "r", encoding="utf-8") as file:
            text = file.read()
    except IOError as io_err:
        print(f"❌ [ERROR] I/O error while reading the configuration: {io_err}")
        raise ConfigValidationError("<file>", path, "Configuration file is not readable.") from io_err
    config = parse_config(text, experiment)
    print(f"✅ [SUCCESS] Configuration '{config.experiment}' loaded (hash {config.hash}).")
    return config


def save_config(config: ExperimentConfig, path: str) -> None:
    """
    Writes the canonical configuration, indented, to `path`.

    Raises:
        ConfigValidationError: If the file cannot be written.
    """
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8") as file:
            json.dump(config.values, file, indent=4, sort_keys=True, ensure_ascii=False, default=_default)
        print(f"📁 [INFO] Configuration saved to {path}.")
    except (IOError, TypeError) as err:
        print(f"❌ [ERROR] Could not save the configuration: {err}")
        raise ConfigValidationError("<file>", path, "Configuration file could not be written.") from err

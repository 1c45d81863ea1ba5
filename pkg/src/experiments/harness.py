"""
Config-driven experiment runner.

`run_experiment` dispatches on the experiment type, runs every (grid point, replicate)
task in a joblib worker pool, collects the rows in deterministic (n, replicate) order
and writes pandas-built CSV tables plus a JSON run manifest. Every result row carries
the configuration hash; the timestamps live in the manifest only, so reruns of the same
configuration produce byte-identical CSV files.

Experiment types:

- **fit**: simulate one dataset per replicate, run the sampler, and report posterior
  Hellinger summaries, inclusion probabilities and the selected-estimate checks.
- **counterexample**: the indicator-design full-model posterior against its tail bound.
- **rate_sweep**: median posterior Hellinger over an n-grid, with the log-log OLS slope
  and its standard error next to the target -(1 - xi) / 2.
- **audit**: the rate and prior-mass condition audits.
- **graph**: neighbourhood selection on a chain graph over an n-grid, one JSON graph
  artifact per run.
"""
# Standard library imports
import os
from dataclasses import dataclass, field

# Third-party imports
import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import linregress

# Local project-specific imports
from src.assets.config import (ExperimentConfig, build_family, build_mcmc, build_prior, build_profile,
                               build_rate_config, build_selection, build_truth_dispersion, build_x_law)
from src.assets.custom_errors import EngineError, ExperimentError
from src.assets.utils import (SeedRole, derive_seed, grid_role, package_versions, seed_stream,
                              utc_timestamp, write_csv, write_json)
from src.experiments.baselines import FULL_MODEL_K_LIMIT, full_model_normal_baseline, run_counterexample
from src.experiments.conditions_audit import run_audit
from src.experiments.graphical import EdgeRule, chain_graph, fit_graph, sample_graph_data
from src.models.estimators import convexity_bound_check, regression_classification_checks, select
from src.models.glm_core import FamilyKind, sample_response
from src.models.hellinger import (IndicatorDesign, TrueModel, XSample, distance_values, draw_x_sample,
                                  hellinger_distance, posterior_hellinger)
from src.models.posterior import Dataset, inclusion_probabilities, mcmc_run
from src.models.prior import ModelIndicator

SCHEMA_VERSION: int = 1
MANIFEST_FILE: str = "manifest.json"
MIN_SLOPE_POINTS: int = 4

RATE_SWEEP_COLUMNS: list[str] = ["config_hash", "n", "K", "replicate", "median_hellinger", "q10", "q90",
                                 "mcmc_acceptance"]
COUNTEREXAMPLE_COLUMNS: list[str] = ["config_hash", "n", "K", "replicate", "empirical_tail", "bound", "pass"]
AUDIT_COLUMNS: list[str] = ["config_hash", "condition", "n", "lhs", "rhs", "ratio"]
FIT_COLUMNS: list[str] = [
    "config_hash", "replicate", "n", "K", "draws", "mcmc_acceptance", "mean_model_size",
    "median_hellinger", "q10", "q90", "selected_hellinger", "selected_squared_se", "selection_prob",
    "convexity_lhs", "convexity_rhs", "convexity_pass", "weighted_l2", "l2_bound", "l2_pass",
    "excess_risk", "excess_pass", "baseline_median_hellinger", "contrast_pass",
]
GRAPH_COLUMNS: list[str] = ["config_hash", "n", "replicate", "node", "h_hat", "clip_fraction",
                            "degree_and", "degree_or"]


@dataclass
class RunResult:
    """
    Outcome of one experiment run.

    Attributes:
        experiment (str): Experiment type.
        config_hash (str): Hash of the canonical configuration.
        out_dir (str): Output directory.
        outputs (dict[str, str]): Artifact name -> path.
        summary (dict): Experiment-level summary, also stored in the manifest.
        checks_passed (bool): Whether every acceptance check of the run held.
    """
    experiment: str
    config_hash: str
    out_dir: str
    outputs: dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    checks_passed: bool = True


def simulate_dataset(truth: TrueModel, n: int, rng: np.random.Generator) -> Dataset:
    """Draws n rows (x, y) from the true model."""
    X = truth.x_law.sample(n, rng)
    y = sample_response(truth.family, X @ truth.beta_star, rng, truth.dispersion_star)
    return Dataset(X, y, truth.family)


def _truth(config: ExperimentConfig, K: int) -> TrueModel:
    return TrueModel(build_family(config), build_profile(config).vector(K), build_x_law(config, K),
                     build_truth_dispersion(config))


def _x_source(config: ExperimentConfig, truth: TrueModel) -> int | str:
    return "exact" if isinstance(truth.x_law, IndicatorDesign) else config.section("hellinger")["x_draws"]


def _quantiles(values: np.ndarray) -> tuple[float, float, float]:
    return float(np.median(values)), float(np.quantile(values, 0.1)), float(np.quantile(values, 0.9))


# ======================
# FIT
# ======================

def _baseline_median(data: Dataset, truth: TrueModel, x_sample: XSample, slab_scale: float, draws: int,
                     rng: np.random.Generator) -> float | None:
    # Median d of the no-selection posterior on the same data and x points
    if data.family.kind is not FamilyKind.NORMAL_KNOWN_VAR:
        return None
    if data.K > FULL_MODEL_K_LIMIT:
        print(f"⚠️ [WARNING] Skipping the full-model baseline: K = {data.K} exceeds {FULL_MODEL_K_LIMIT}.")
        return None
    full = ModelIndicator(range(data.K), data.K)
    betas = full_model_normal_baseline(data, slab_scale, rng, draws)
    return float(np.median([hellinger_distance(truth, (full, beta), x_sample=x_sample).value for beta in betas]))


def _fit_replicate(config: ExperimentConfig, replicate: int, config_hash: str) -> tuple[dict, list[dict], bool]:
    n, K = config.section("data")["n"], config.section("data")["K"]
    truth = _truth(config, K)
    data = simulate_dataset(truth, n, seed_stream(config.seed, replicate, SeedRole.DATA))
    chain = mcmc_run(data, build_prior(config), build_mcmc(config, derive_seed(config.seed, replicate, SeedRole.MCMC)))
    rng = seed_stream(config.seed, replicate, SeedRole.HELLINGER)
    x_source = _x_source(config, truth)
    x_sample = draw_x_sample(truth, x_source, rng)
    estimates = posterior_hellinger(chain, truth, x_sample=x_sample)
    distances = distance_values(estimates)
    median, q10, q90 = _quantiles(distances)

    mix = select(chain, build_selection(config))
    position = {id(draw): k for k, draw in enumerate(chain.draws)}
    retained = [estimates[position[id(draw)]] for draw in mix.components]
    convexity = convexity_bound_check(mix, truth, retained, median, rng=rng, x_sample=x_sample)
    checks = regression_classification_checks(mix, truth, x_source, seed_stream(config.seed, replicate,
                                                                                  SeedRole.POSTERIOR))
    baseline = _baseline_median(data, truth, x_sample, build_prior(config).v_policy.c, len(chain.draws),
                                seed_stream(config.seed, replicate, SeedRole.BASELINE))
    # The contrast is only claimed in the high-dimensional regime K >= 2n
    contrast = None if baseline is None or K < 2 * n else bool(median < baseline)
    row = {
        "config_hash": config_hash, "replicate": replicate, "n": n, "K": K, "draws": len(chain.draws),
        "mcmc_acceptance": chain.overall_acceptance(),
        "mean_model_size": float(np.mean([draw.gamma.size for draw in chain.draws])),
        "median_hellinger": median, "q10": q10, "q90": q90,
        "selected_hellinger": float(np.sqrt(convexity.lhs)), "selected_squared_se": convexity.lhs_se,
        "selection_prob": mix.selection_prob, "convexity_lhs": convexity.lhs, "convexity_rhs": convexity.rhs,
        "convexity_pass": convexity.passed, "weighted_l2": checks.weighted_l2,
        "l2_bound": 2.0 * checks.squared_distance, "l2_pass": checks.l2_passed,
        "excess_risk": checks.excess_risk, "excess_pass": checks.excess_passed,
        "baseline_median_hellinger": baseline, "contrast_pass": contrast,
    }
    incl = inclusion_probabilities(chain)
    inclusion_rows = [
        {"config_hash": config_hash, "replicate": replicate, "covariate": j,
         "beta_star": float(truth.beta_star[j]), "inclusion": float(incl[j])}
        for j in range(K)
    ]
    passed = (convexity.passed and checks.l2_passed and checks.excess_passed is not False
              and contrast is not False)
    return row, inclusion_rows, bool(passed)


def _run_fit(config: ExperimentConfig, out_dir: str, threads: int, config_hash: str):
    results = Parallel(n_jobs=threads)(
        delayed(_fit_replicate)(config, replicate, config_hash) for replicate in range(config.replicates)
    )
    fit_frame = pd.DataFrame([row for row, _, _ in results], columns=FIT_COLUMNS)
    inclusion_frame = pd.DataFrame([r for _, rows, _ in results for r in rows])
    outputs = {
        "fit": write_csv(fit_frame, out_dir, "fit_summary.csv"),
        "inclusion": write_csv(inclusion_frame, out_dir, "inclusion.csv"),
    }
    summary = {
        "median_hellinger": float(fit_frame["median_hellinger"].median()),
        "selected_hellinger": float(fit_frame["selected_hellinger"].median()),
        "baseline_median_hellinger": (None if fit_frame["baseline_median_hellinger"].isna().all()
                                      else float(fit_frame["baseline_median_hellinger"].median())),
    }
    return outputs, summary, all(passed for _, _, passed in results)


# ======================
# COUNTEREXAMPLE
# ======================

def _counterexample_task(config: ExperimentConfig, n: int, replicate: int, config_hash: str) -> dict:
    section = config.section("counterexample")
    role = grid_role(SeedRole.DATA, n)
    run = run_counterexample(n, seed_stream(config.seed, replicate, role), K=section["K_factor"] * n,
                             posterior_draws=section["posterior_draws"],
                             seed=derive_seed(config.seed, replicate, role))
    return {"config_hash": config_hash, "n": n, "K": run.K, "replicate": replicate,
            "empirical_tail": run.empirical_tail, "bound": run.bound_value, "pass": run.passed}


def _run_counterexample(config: ExperimentConfig, out_dir: str, threads: int, config_hash: str):
    tasks = [(n, replicate) for n in config.section("counterexample")["n_grid"]
             for replicate in range(config.replicates)]
    rows = Parallel(n_jobs=threads)(
        delayed(_counterexample_task)(config, n, replicate, config_hash) for n, replicate in tasks
    )
    frame = pd.DataFrame(rows, columns=COUNTEREXAMPLE_COLUMNS)
    outputs = {"counterexample": write_csv(frame, out_dir, "counterexample.csv")}
    summary = {"replicates_passed": int(frame["pass"].sum()), "replicates": len(frame)}
    return outputs, summary, bool(frame["pass"].all())


# ======================
# RATE SWEEP
# ======================

def _rate_sweep_task(config: ExperimentConfig, n: int, replicate: int, config_hash: str) -> dict:
    K, r, r_bar = build_rate_config(config).sizes(n)
    truth = _truth(config, K)
    data = simulate_dataset(truth, n, seed_stream(config.seed, replicate, grid_role(SeedRole.DATA, n)))
    mcmc = build_mcmc(config, derive_seed(config.seed, replicate, grid_role(SeedRole.MCMC, n)))
    chain = mcmc_run(data, build_prior(config, r_exp=r, r_max=r_bar), mcmc)
    rng = seed_stream(config.seed, replicate, grid_role(SeedRole.HELLINGER, n))
    x_sample = draw_x_sample(truth, _x_source(config, truth), rng)
    median, q10, q90 = _quantiles(distance_values(posterior_hellinger(chain, truth, x_sample=x_sample)))
    return {"config_hash": config_hash, "n": n, "K": K, "replicate": replicate, "median_hellinger": median,
            "q10": q10, "q90": q90, "mcmc_acceptance": chain.overall_acceptance()}


def rate_sweep_slope(frame: pd.DataFrame, xi: float, band: tuple[float, float] = (-0.65, -0.25)) -> dict:
    """
    OLS slope of ln(median Hellinger) on ln n.

    The per-n value is the median over replicates of the per-run medians.

    Returns:
        dict: slope, slope_se, intercept, target = -(1 - xi) / 2, the band and whether
        the slope lies in it. The slope is None with fewer than four grid points.
    """
    per_n = frame.groupby("n", sort=True)["median_hellinger"].median()
    result = {"target": -(1.0 - xi) / 2.0, "band_low": float(band[0]), "band_high": float(band[1]),
              "grid_points": int(per_n.size), "slope": None, "slope_se": None, "intercept": None,
              "in_band": False}
    if per_n.size < MIN_SLOPE_POINTS or not np.all(per_n.to_numpy() > 0):
        print(f"⚠️ [WARNING] The slope needs at least {MIN_SLOPE_POINTS} grid points with positive medians.")
        return result
    fit = linregress(np.log(per_n.index.to_numpy(dtype=float)), np.log(per_n.to_numpy()))
    result.update(slope=float(fit.slope), slope_se=float(fit.stderr), intercept=float(fit.intercept),
                  in_band=bool(band[0] <= fit.slope <= band[1]))
    return result


def _run_rate_sweep(config: ExperimentConfig, out_dir: str, threads: int, config_hash: str):
    rate = config.section("rate")
    tasks = [(n, replicate) for n in rate["n_grid"] for replicate in range(config.replicates)]
    rows = Parallel(n_jobs=threads)(
        delayed(_rate_sweep_task)(config, n, replicate, config_hash) for n, replicate in tasks
    )
    frame = pd.DataFrame(rows, columns=RATE_SWEEP_COLUMNS)
    slope = rate_sweep_slope(frame, rate["xi"], tuple(rate["slope_band"]))
    outputs = {
        "rate_sweep": write_csv(frame, out_dir, "rate_sweep.csv"),
        "slope": write_csv(pd.DataFrame([{"config_hash": config_hash, **slope}]), out_dir, "rate_sweep_slope.csv"),
    }
    return outputs, slope, slope["in_band"]


# ======================
# AUDIT
# ======================

def _run_audit(config: ExperimentConfig, out_dir: str, threads: int, config_hash: str):
    prior = config.section("prior")
    spec = build_prior(config, r_exp=prior["r_exp"] or 1, r_max=prior["r_max"] or max(prior["r_exp"] or 1, 1))
    report = run_audit(build_rate_config(config), build_profile(config), spec, config.section("audit")["eta"],
                       seed_stream(config.seed, 0, "audit"))
    frame = report.frame[["condition", "n", "lhs", "rhs", "ratio"]].copy()
    frame.insert(0, "config_hash", config_hash)
    summary_frame = report.summary()
    summary_frame.insert(0, "config_hash", config_hash)
    failures = report.failures()
    if failures:
        print(f"⚠️ [WARNING] Conditions not satisfied on the grid: {failures}")
    outputs = {
        "audit": write_csv(frame[AUDIT_COLUMNS], out_dir, "audit.csv"),
        "audit_summary": write_csv(summary_frame, out_dir, "audit_summary.csv"),
    }
    return outputs, {"conditions": len(report.conditions()), "failures": failures}, not failures


# ======================
# GRAPH
# ======================

def _run_graph(config: ExperimentConfig, out_dir: str, threads: int, config_hash: str):
    section = config.section("graph")
    truth = chain_graph(section["J"], section["rho"])
    spec = build_prior(config)
    rows, outputs, medians = [], {}, {}
    for n in section["n_grid"]:
        per_replicate = []
        for replicate in range(config.replicates):
            data = sample_graph_data(truth, n, seed_stream(config.seed, replicate, grid_role(SeedRole.GRAPH, n)))
            mcmc = build_mcmc(config, derive_seed(config.seed, replicate, grid_role(SeedRole.MCMC, n)))
            graph, fits = fit_graph(data, spec, mcmc, section["threshold"], EdgeRule(section["rule"]), truth,
                                    section["x_draws"], section["design_scale"], n_jobs=threads)
            name = f"graph_n{n}_rep{replicate}"
            outputs[name] = write_json({"config_hash": config_hash, "n": n, "replicate": replicate,
                                        **graph.to_json()}, out_dir, f"{name}.json")
            for fit in fits:
                rows.append({
                    "config_hash": config_hash, "n": n, "replicate": replicate, "node": fit.j,
                    "h_hat": float(graph.h_hat[fit.j]), "clip_fraction": fit.clip_fraction,
                    "degree_and": int(graph.adjacency_and[fit.j].sum()),
                    "degree_or": int(graph.adjacency_or[fit.j].sum()),
                })
            per_replicate.append(float(np.median(graph.h_hat)))
        medians[n] = float(np.median(per_replicate))
    frame = pd.DataFrame(rows, columns=GRAPH_COLUMNS)
    outputs["graph_nodes"] = write_csv(frame, out_dir, "graph_nodes.csv")
    values = [medians[n] for n in section["n_grid"]]
    decreasing = bool(all(a > b for a, b in zip(values, values[1:])))
    return outputs, {"median_h_hat": {str(n): v for n, v in medians.items()}, "decreasing": decreasing}, decreasing


_RUNNERS = {
    "fit": _run_fit,
    "counterexample": _run_counterexample,
    "rate_sweep": _run_rate_sweep,
    "audit": _run_audit,
    "graph": _run_graph,
}


def run_experiment(config: ExperimentConfig, out_dir: str | None = None, threads: int = 1) -> RunResult:
    """
    Runs one experiment and writes its artifacts.

    Args:
        config (ExperimentConfig): Validated configuration.
        out_dir (str | None): Output directory; `config.output_dir` by default.
        threads (int): Worker processes for replicates, grid points and graph nodes.

    Returns:
        RunResult: Artifact paths, summary and the acceptance verdict.

    Raises:
        ExperimentError: If any step fails; the manifest then records the failure.
    """
    out_dir = out_dir or config.output_dir
    config_hash = config.hash
    manifest = {
        "schema_version": SCHEMA_VERSION, "experiment": config.experiment, "config_hash": config_hash,
        "seed": config.seed, "replicates": config.replicates, "config": config.values,
        "versions": package_versions(), "started": utc_timestamp(), "status": "running",
    }
    os.makedirs(out_dir, exist_ok=True)
    print(f"⏳ [INFO] Running '{config.experiment}' (hash {config_hash}, seed {config.seed}) into {out_dir}...")
    try:
        outputs, summary, passed = _RUNNERS[config.experiment](config, out_dir, threads, config_hash)
    except EngineError as err:
        manifest.update(status="failed", error=str(err), finished=utc_timestamp())
        write_json(manifest, out_dir, MANIFEST_FILE)
        print(f"❌ [ERROR] The '{config.experiment}' experiment failed: {err.args[0]}")
        raise ExperimentError(f"The '{config.experiment}' experiment failed: {err.args[0]}") from err
    except Exception as gen_err:
        manifest.update(status="failed", error=repr(gen_err), finished=utc_timestamp())
        write_json(manifest, out_dir, MANIFEST_FILE)
        print(f"❌ [ERROR] Unexpected error in the '{config.experiment}' experiment: {gen_err}")
        raise ExperimentError(f"Unexpected error in the '{config.experiment}' experiment.") from gen_err
    manifest.update(status="completed", checks_passed=bool(passed), outputs=outputs, summary=summary,
                    finished=utc_timestamp())
    outputs = {**outputs, "manifest": write_json(manifest, out_dir, MANIFEST_FILE)}
    if passed:
        print(f"✅ [SUCCESS] '{config.experiment}' finished; all checks passed.")
    else:
        print(f"⚠️ [WARNING] '{config.experiment}' finished with failed checks.")
    return RunResult(config.experiment, config_hash, out_dir, outputs, summary, bool(passed))

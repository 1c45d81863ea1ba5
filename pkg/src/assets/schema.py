"""
Schema of the experiment configuration documents.

Each section lists its allowed keys with their defaults; `None` marks a key without a
default. Nested objects (β* profile, slab policy, dispersion prior, growth mappings)
have their own key tables. Required fields depend on the experiment type.
"""

EXPERIMENTS: tuple[str, ...] = ("fit", "counterexample", "rate_sweep", "audit", "graph")

TOP_LEVEL_DEFAULTS: dict = {
    'experiment': None,
    'seed': 0,
    'replicates': 1,
    'output_dir': 'results',
}

SECTION_DEFAULTS: dict[str, dict] = {
    'family': {
        'name': None,
        'dispersion': None,
    },
    'truth': {
        'beta': {'kind': 'geometric', 'scale': 1.0, 'ratio': 0.5, 'values': []},
        'x_law': 'uniform_cube',
        'dispersion': None,
    },
    'data': {
        'n': None,
        'K': None,
    },
    'prior': {
        'r_exp': None,
        'r_max': None,
        'v_policy': {'kind': 'identity', 'c': 1.0, 'rho': 0.0},
        'dispersion': None,
        'model_prior': 'truncated_bernoulli',
    },
    'mcmc': {
        'iterations': 20000,
        'burn_in': 2000,
        'thin': 10,
        'move_probs': [0.4, 0.4, 0.2],
        'rw_step': 0.25,
        'collapse_normal': True,
    },
    'hellinger': {
        'x_draws': 20000,
    },
    'selection': {
        'kind': 'all',
        'm': None,
        'threshold': 0.5,
    },
    'rate': {
        'n_grid': None,
        'K_of_n': None,
        'r_of_n': None,
        'rbar_of_n': None,
        'xi': 0.5,
        'k': 2.0,
        'b': 0.1,
        'delta': 1.0,
        'C': 1.0,
        'C_prime': 1.0,
        'B': 1.0,
        'v': 1.0,
        'eps_scale': 1.0,
        'rate': 'cor1',
        'fixed_epsilon': None,
        'slope_band': [-0.65, -0.25],
    },
    'counterexample': {
        'n_grid': [1000, 4000],
        'K_factor': 2,
        'posterior_draws': 10000,
    },
    'audit': {
        'eta': 0.5,
        'graphical': False,
    },
    'graph': {
        'J': 20,
        'rho': 0.5,
        'n_grid': [100, 400, 1600],
        'threshold': 0.5,
        'rule': 'and',
        'design_scale': 3.0,
        'x_draws': 5000,
    },
}

MAPPING_DEFAULTS: dict = {'kind': 'power', 'coef': 1.0, 'exponent': 1.0}

# Dotted path of a nested object -> its key table
NESTED_DEFAULTS: dict[str, dict] = {
    'truth.beta': {'kind': 'geometric', 'scale': 1.0, 'ratio': 0.5, 'values': []},
    'prior.v_policy': {'kind': 'identity', 'c': 1.0, 'rho': 0.0},
    'prior.dispersion': {'kappa': 1.0, 'rate': 1.0},
    'rate.K_of_n': MAPPING_DEFAULTS,
    'rate.r_of_n': MAPPING_DEFAULTS,
    'rate.rbar_of_n': MAPPING_DEFAULTS,
}

REQUIRED_FIELDS: dict[str, tuple[str, ...]] = {
    'fit': ('family.name', 'data.n', 'data.K', 'prior.r_exp', 'prior.r_max'),
    'counterexample': (),
    'rate_sweep': ('family.name', 'rate.n_grid', 'rate.K_of_n', 'rate.r_of_n', 'rate.rbar_of_n'),
    'audit': ('family.name', 'rate.n_grid', 'rate.K_of_n', 'rate.r_of_n', 'rate.rbar_of_n'),
    'graph': ('prior.r_exp', 'prior.r_max', 'prior.dispersion'),
}

INTEGER_FIELDS: tuple[str, ...] = (
    'seed', 'replicates', 'data.n', 'data.K', 'prior.r_exp', 'prior.r_max',
    'mcmc.iterations', 'mcmc.burn_in', 'mcmc.thin', 'hellinger.x_draws', 'selection.m',
    'counterexample.K_factor', 'counterexample.posterior_draws', 'graph.J', 'graph.x_draws',
)

X_LAWS: tuple[str, ...] = ("uniform_cube", "indicator")
V_POLICIES: tuple[str, ...] = ("identity", "ar1")
EDGE_RULES: tuple[str, ...] = ("and", "or")

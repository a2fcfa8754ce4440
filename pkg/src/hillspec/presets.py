"""Pinned ranges and tolerances for the reproduction presets."""
from __future__ import annotations

import copy

DEFAULTS_VERSION = "1"

EX_OMEGA = "gevpow:c=0.1,gamma=0.5,a=0"

PRESETS: dict[str, dict] = {
    "example1": {
        "potential": "example1",
        "parities": ["even", "odd"],
        "even_range": [10, 60],
        "odd_range": [11, 61],
        "criteria": ["crit1", "crit2", "crit3", "makin"],
        "makin_window": 3.0,
        "dirichlet_N": 240,
        "cap": 50.0,
        "guard_eps": 0.1,
        "plateau_tol": 0.2,
        "laws": {"even": ["gap_61_3", "dev_mid_61_7"]},
        "expected": {"even": "basis", "odd": "no_basis"},
    },
    "example2": {
        "potential": "example2",
        "parities": ["even", "odd"],
        "even_range": [10, 60],
        "odd_range": [11, 61],
        "criteria": ["crit1", "crit2", "crit3", "makin"],
        "makin_window": 3.0,
        "dirichlet_N": 240,
        "cap": 50.0,
        "guard_eps": 0.1,
        "plateau_tol": 0.2,
        "laws": {},
        "expected": {"even": "no_basis", "odd": "basis"},
        "sqrt_table_from": 40,
    },
    "ex1": {
        "potential": f"ex1:omega={EX_OMEGA},xi=1/log,eta=1/log",
        "omega": EX_OMEGA,
        "parities": ["odd"],
        "p_range": [3, 15],
        "criteria": ["crit1", "crit2", "crit3", "makin"],
        "makin_window": 3.0,
        "dirichlet_N": 240,
        "cap": 50.0,
        "guard_eps": 0.1,
        "plateau_tol": 0.2,
        "laws": {},
        "normalized_window": 16.0,
        "expected": {"odd": "basis"},
    },
    "ex2": {
        "potential": f"ex2:omega={EX_OMEGA},xi=1/log,eta=1/log",
        "omega": EX_OMEGA,
        "parities": ["odd"],
        "p_range": [3, 15],
        "criteria": ["crit1", "crit2", "crit3", "makin"],
        "makin_window": 3.0,
        "dirichlet_N": 240,
        "cap": 50.0,
        "guard_eps": 0.1,
        "plateau_tol": 0.2,
        "laws": {},
        "expected": {"odd": "no_basis"},
    },
    "sawtooth": {
        "potential": "sawtooth:m=0",
        "parities": ["even", "odd"],
        "even_range": [10, 40],
        "odd_range": [11, 41],
        "criteria": ["makin"],
        "makin_window": 10.0,
        "law_n": [10, 20, 40],
        "laws": {"all": ["gap_61_3", "dev_mid_61_7", "beta_sim_V_thm1"]},
        "dirichlet_N": 240,
        "guard_eps": 0.1,
        "plateau_tol": 0.3,
        "cross_validate_n": [6, 20],
        "oracle_N": [160, 320],
        "cross_tol": 1e-4,
        "expected": {"even": "basis", "odd": "basis"},
    },
    "mathieu": {
        "potential": "mathieu",
        "parities": ["even", "odd"],
        "even_range": [2, 12],
        "odd_range": [3, 11],
        "criteria": ["crit2", "crit3"],
        "dirichlet_N": 160,
        "gap_resolution": 1e-12,
        "cap": 50.0,
        "laws": {},
        "cross_validate_n": [2, 12],
        "oracle_N": [80, 160],
        "cross_tol": 1e-6,
        "oracle_tol": 1e-8,
        "expected": {"even": "basis", "odd": "basis"},
    },
}

# warning codes each preset must emit, no more and no fewer
EXPECTED_WARNINGS = {
    "example1": {"range_relative"},
    "example2": {"range_relative", "dirichlet_unavailable"},
    "sawtooth": {"range_relative", "guard_refused"},
    "mathieu": {"range_relative", "degenerate_pair", "gap_below_resolution"},
    "ex1": {"range_relative"},
    "ex2": {"range_relative"},
}


def preset(name: str, overrides: dict | None = None) -> dict:
    if name not in PRESETS:
        raise KeyError(f"unknown preset '{name}' (choose from {', '.join(PRESETS)})")
    cfg = copy.deepcopy(PRESETS[name])
    for key, value in (overrides or {}).items():
        if key not in cfg:
            raise KeyError(f"preset '{name}' has no setting '{key}'")
        cfg[key] = value
    return cfg

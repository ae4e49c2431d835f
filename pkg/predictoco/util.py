import collections
import logging
from copy import deepcopy
from pathlib import Path
from typing import List, Tuple, Union

import pandas as pd
from flatten_dict import flatten
from ruamel.yaml import YAML

from predictoco.core import CONSTRAINT_KINDS, STATIC_AFFINE
from predictoco.errors import SettingsError

logger = logging.getLogger(__name__)

ALGORITHM_NAMES = ("ogd", "baseline", "predictive")
COST_KIND_NAMES = ("iid-random", "drifting", "piecewise-constant")
PREDICTOR_KIND_NAMES = ("oracle-decay", "last-value", "zero", "perfect", "running-mean")
SET_KIND_NAMES = ("box", "ball")
SOLVER_METHOD_NAMES = ("dual", "subgradient")

# Every accepted key with its default. A settings file may only use these paths.
DEFAULT_SETTINGS = {
    "algorithm": "predictive",
    "schedule": {"c_exp": 0.5, "a_exp": 0.0, "G": None, "gamma_override": None},
    "environment": {
        "p": 2,
        "m": 1,
        "cost_kind": "iid-random",
        "cost": {"sigma": 0.05, "segments": 1, "bias": 0.0},
        "constraint_kind": STATIC_AFFINE,
        "constraint": {"margin": 0.1, "jitter": 0.1},
        "feasible_set": {
            "kind": "box",
            "lower": -1.0,
            "upper": 1.0,
            "center": 0.0,
            "radius": 1.0,
        },
        "G": 1.0,
        "F": None,
        "seed": 0,
    },
    "predictor": {"kind": "oracle-decay", "a_exp": None, "delta": None, "seed": 0},
    "solver": {"tol": 1e-8, "max_iters": 2000, "method": "dual"},
    "sweep": {
        "T": [100],
        "seeds": [0],
        "regret_slack": 0.15,
        "violation_slack": 0.10,
    },
    "checks": {
        "queue_identity": True,
        "lemma1": True,
        "theorem3": True,
        "comparator": True,
        "oracle": True,
        "prefix_mode": False,
        "oracle_instances": 100,
        "comparator_instances": 50,
        "advantage": {
            "enabled": False,
            "T": 16384,
            "seeds": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9],
            "c_exp": 0.5,
            "sigma": 0.01,
            "predictor": "last-value",
        },
    },
    "output": {"trace": False, "results_folder": None, "record_wall_time": False},
    "suite": [],
}


def load_settings(path: Union[str, Path]) -> dict:

    with open(path, "r") as f:
        yaml = YAML(typ="safe")
        settings = yaml.load(f)

    return settings or {}


def update_dictionary(d: dict, u: dict) -> dict:
    """
    Update keys in an existing dictionary (d) with values from u

    https://stackoverflow.com/a/32357112
    """
    for k, v in u.items():
        if isinstance(d, collections.abc.Mapping):
            if isinstance(v, collections.abc.Mapping):
                r = update_dictionary(d.get(k, {}), v)
                d[k] = r
            else:
                d[k] = u[k]
        else:
            d = {k: u[k]}
    return d


def _allowed_paths(defaults: dict) -> set:
    return set(flatten(defaults, reducer="dot"))


def unknown_keys(settings: dict) -> List[str]:
    """Dotted paths in `settings` that aren't part of the documented layout,
    including keys inside `suite` entries (which may override environment keys)."""
    allowed = _allowed_paths(DEFAULT_SETTINGS)
    unknown = sorted(k for k in flatten(settings, reducer="dot") if k not in allowed)

    environment_paths = _allowed_paths(DEFAULT_SETTINGS["environment"])
    for i, entry in enumerate(settings.get("suite") or []):
        if not isinstance(entry, collections.abc.Mapping):
            unknown.append(f"suite.{i}")
            continue
        for key in flatten(entry, reducer="dot"):
            if key not in environment_paths:
                unknown.append(f"suite.{i}.{key}")
    return unknown


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _value_errors(settings: dict) -> List[Tuple[str, str]]:
    errors = []

    def expect(path, ok, message):
        if not ok:
            errors.append((path, message))

    s = settings
    expect(
        "algorithm",
        s["algorithm"] in ALGORITHM_NAMES,
        f"must be one of {ALGORITHM_NAMES}",
    )

    c_exp, a_exp = s["schedule"]["c_exp"], s["schedule"]["a_exp"]
    expect("schedule.c_exp", _is_number(c_exp) and 0 < c_exp < 1, "must lie in (0, 1)")
    expect("schedule.a_exp", _is_number(a_exp) and 0 <= a_exp < 1, "must lie in [0, 1)")
    G = s["schedule"]["G"]
    expect("schedule.G", G is None or (_is_number(G) and G > 0), "must be positive")
    override = s["schedule"]["gamma_override"]
    expect(
        "schedule.gamma_override",
        override is None or (_is_number(override) and override >= 0),
        "must be nonnegative",
    )

    environments = [("environment", s["environment"])]
    for i, entry in enumerate(s["suite"] or []):
        merged = update_dictionary(deepcopy(s["environment"]), entry)
        environments.append((f"suite.{i}", merged))
    for prefix, env in environments:
        for key in ["p", "m"]:
            expect(
                f"{prefix}.{key}",
                _is_int(env[key]) and env[key] >= 1,
                "must be a positive integer",
            )
        expect(
            f"{prefix}.cost_kind",
            env["cost_kind"] in COST_KIND_NAMES,
            f"must be one of {COST_KIND_NAMES}",
        )
        expect(
            f"{prefix}.constraint_kind",
            env["constraint_kind"] in CONSTRAINT_KINDS,
            f"must be one of {CONSTRAINT_KINDS}",
        )
        expect(
            f"{prefix}.feasible_set.kind",
            env["feasible_set"]["kind"] in SET_KIND_NAMES,
            f"must be one of {SET_KIND_NAMES}",
        )
        expect(f"{prefix}.G", _is_number(env["G"]) and env["G"] > 0, "must be positive")
        expect(
            f"{prefix}.F",
            env["F"] is None or (_is_number(env["F"]) and env["F"] > 0),
            "must be positive",
        )
        expect(
            f"{prefix}.constraint.margin",
            _is_number(env["constraint"]["margin"]) and env["constraint"]["margin"] >= 0,
            "must be nonnegative",
        )
        expect(f"{prefix}.seed", _is_int(env["seed"]), "must be an integer")

    expect(
        "predictor.kind",
        s["predictor"]["kind"] in PREDICTOR_KIND_NAMES,
        f"must be one of {PREDICTOR_KIND_NAMES}",
    )
    expect(
        "solver.tol",
        _is_number(s["solver"]["tol"]) and s["solver"]["tol"] > 0,
        "must be positive",
    )
    expect(
        "solver.max_iters",
        _is_int(s["solver"]["max_iters"]) and s["solver"]["max_iters"] >= 1,
        "must be a positive integer",
    )
    expect(
        "solver.method",
        s["solver"]["method"] in SOLVER_METHOD_NAMES,
        f"must be one of {SOLVER_METHOD_NAMES}",
    )

    T_list = s["sweep"]["T"]
    valid_T = isinstance(T_list, list) and T_list and all(
        _is_int(T) and T >= 1 for T in T_list
    )
    expect("sweep.T", valid_T, "must be a non-empty list of positive integers")
    if valid_T:
        expect(
            "sweep.T",
            all(a < b for a, b in zip(T_list, T_list[1:])),
            "must be strictly increasing",
        )
    seeds = s["sweep"]["seeds"]
    expect(
        "sweep.seeds",
        isinstance(seeds, list) and seeds and all(_is_int(x) for x in seeds),
        "must be a non-empty list of integers",
    )
    return errors


def build_settings(settings: dict) -> dict:
    """Validate user settings and merge them over the defaults.

    Parameters
    ----------
    settings : dict
        Values from a YAML settings file.

    Returns
    -------
    dict
        The complete settings.

    Raises
    ------
    SettingsError
        Unknown keys or invalid values, all reported together by dotted path.
    """
    unknown = unknown_keys(settings)
    if unknown:
        raise SettingsError(
            f"Unknown settings keys: {', '.join(unknown)}", field_paths=unknown
        )
    full = update_dictionary(deepcopy(DEFAULT_SETTINGS), deepcopy(settings))
    errors = _value_errors(full)
    if errors:
        lines = [f"{path} {message}" for path, message in errors]
        raise SettingsError(
            "Invalid settings: " + "; ".join(lines),
            field_paths=[path for path, _ in errors],
        )
    return full


def check_settings(settings: dict, mode: str = "run") -> None:
    """Check that the algorithm, environments and sweep fit together.

    Parameters
    ----------
    settings : dict
        Complete settings from `build_settings`.
    mode : str, optional
        "run", "sweep" or "verify", by default "run".

    Raises
    ------
    SettingsError
        An invalid pairing, listing every offending field path.
    """
    errors = []
    if settings["algorithm"] == "baseline":
        if settings["environment"]["constraint_kind"] != STATIC_AFFINE:
            errors.append(
                ("environment.constraint_kind", "baseline needs static-affine constraints")
            )
        for i, entry in enumerate(settings["suite"] or []):
            if entry.get("constraint_kind", STATIC_AFFINE) != STATIC_AFFINE:
                errors.append(
                    (f"suite.{i}.constraint_kind", "baseline needs static-affine constraints")
                )
    if mode == "sweep" and len(settings["sweep"]["T"]) < 4:
        errors.append(("sweep.T", "a sweep needs at least 4 values of T"))
    for T in settings["sweep"]["T"]:
        segments = settings["environment"]["cost"]["segments"]
        if segments > T:
            errors.append(("environment.cost.segments", f"more segments than T={T}"))
            break

    if errors:
        for path, message in errors:
            logger.warning(f"Settings problem at {path}: {message}")
        raise SettingsError(
            "Invalid settings: " + "; ".join(f"{p} {m}" for p, m in errors),
            field_paths=[p for p, _ in errors],
        )


def write_results_file(df: pd.DataFrame, folder: Path, file_name: str, include_index=False):
    """Write a dataframe to one of the results csv files.

    Parameters
    ----------
    df : DataFrame
        Data for a single results file
    folder : Path-like
        Folder for the results of one command
    file_name : str
        Name of the file.
    include_index : bool, optional
        If pandas should include the index when writing to csv, by default False
    """
    folder = Path(folder)
    folder.mkdir(exist_ok=True, parents=True)
    path_out = folder / file_name

    df.to_csv(path_out, index=include_index)


def write_settings_file(settings: dict, folder: Path, file_name: str):
    """Write the effective settings to a YAML file.

    Parameters
    ----------
    settings : dict
        A dictionary with settings
    folder : Path-like
        Folder for the results of one command
    file_name : str
        Name of the file.
    """
    folder = Path(folder)
    folder.mkdir(exist_ok=True, parents=True)
    path_out = folder / file_name

    yaml = YAML(typ="safe")
    yaml.default_flow_style = False
    with open(path_out, "w") as f:
        yaml.dump(deepcopy(settings), f)

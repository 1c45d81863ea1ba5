# Standard library imports
import hashlib
import json
import os
from datetime import datetime, timezone
from enum import Enum
from importlib import metadata

# Third-party imports
import numpy as np
import pandas as pd

# Local project-specific imports
from src import PACKAGE_NAME, __version__
from src.assets.custom_errors import ExperimentError

_SEED_MASK: int = 2 ** 64 - 1
VERSIONED_PACKAGES: tuple[str, ...] = ("numpy", "pandas", "scipy", "joblib")


class SeedRole(str, Enum):
    """Independent random streams of one replicate."""
    DATA = "data"
    MCMC = "mcmc"
    HELLINGER = "hellinger"
    POSTERIOR = "posterior"
    GRAPH = "graph"
    BASELINE = "baseline"


def derive_seed(master_seed: int, replicate: int, role: SeedRole | str) -> int:
    """
    master_seed XOR the first 64 bits of sha256("{replicate}:{role}").

    Args:
        master_seed (int): Unsigned 64-bit master seed.
        replicate (int): Replicate index.
        role (SeedRole | str): Stream purpose; free-form strings allow per-grid-point roles
            such as "data@400".

    Returns:
        int: The derived 64-bit seed.
    """
    role = role.value if isinstance(role, SeedRole) else str(role)
    digest = hashlib.sha256(f"{replicate}:{role}".encode("utf-8")).hexdigest()
    return (int(master_seed) & _SEED_MASK) ^ int(digest[:16], 16)


def seed_stream(master_seed: int, replicate: int, role: SeedRole | str) -> np.random.Generator:
    """
    Random stream for (master seed, replicate, role); identical inputs give identical streams.
    """
    return np.random.default_rng(np.random.SeedSequence(derive_seed(master_seed, replicate, role)))


def grid_role(role: SeedRole, n: int) -> str:
    """Role name of a stream tied to one grid point."""
    return f"{role.value}@{n}"


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def package_versions() -> dict[str, str]:
    """Installed versions of the numerical stack and of this package."""
    versions = {PACKAGE_NAME: __version__}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions


def write_csv(frame: pd.DataFrame, out_dir: str, file_name: str) -> str:
    """
    Writes a result table with a fixed float format and Unix line endings.

    Returns:
        str: Path of the written file.

    Raises:
        ExperimentError: If the file cannot be written.
    """
    path = os.path.join(out_dir, file_name)
    try:
        os.makedirs(out_dir, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n", float_format="%.10g")
    except OSError as io_err:
        print(f"❌ [ERROR] I/O error while writing {path}: {io_err}")
        raise ExperimentError(f"Could not write {path}.") from io_err
    print(f"📁 [INFO] Wrote {len(frame)} rows to {path}.")
    return path


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Enum):
        return value.value
    raise TypeError(f"Value of type {type(value).__name__} is not JSON serializable.")


def write_json(payload: dict, out_dir: str, file_name: str) -> str:
    """
    Writes a JSON artifact with sorted keys.

    Raises:
        ExperimentError: If the payload cannot be serialized or written.
    """
    path = os.path.join(out_dir, file_name)
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(path, "w", encoding="utf-8") as file:
            json.dump(payload, file, indent=4, sort_keys=True, ensure_ascii=False, default=_json_default)
    except TypeError as json_err:
        print(f"❌ [ERROR] JSON serialization error: {json_err}")
        raise ExperimentError(f"JSON serialization error in {path}: {json_err}") from json_err
    except OSError as io_err:
        print(f"❌ [ERROR] I/O error while writing {path}: {io_err}")
        raise ExperimentError(f"Could not write {path}.") from io_err
    return path


def read_results(path: str) -> pd.DataFrame | None:
    """
    Reads a result CSV written by `write_csv`.

    Returns:
        pd.DataFrame | None: The table, or None if the file does not exist.
    """
    if not os.path.exists(path):
        print(f"⚠️ [WARNING] Result file {path} not found.")
        return None
    return pd.read_csv(path)

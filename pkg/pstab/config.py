import os
from typing import List, Tuple

from dotenv import load_dotenv

if not os.getenv("PSTAB_NO_DOTENV"):
    load_dotenv()


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        return default


SCHEMA_VERSION = "1"

# Logging
LOG_LEVEL = os.getenv("PSTAB_LOG_LEVEL", "WARNING").upper()
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Worker threads for box search and report-all (1 = sequential)
WORKERS = _env_int("PSTAB_WORKERS", 1)

# Elliptic curve base point; fixed by the inversion involution
BASE_POINT_LABEL = os.getenv("PSTAB_BASE_POINT", "P")

# Search boxes of the surface verifiers, as (lo, hi) per variable
EXA_SHEAF_BOX = {
    "n_q": (1, _env_int("PSTAB_EXA_NQ_MAX", 50)),
    "n_p": (_env_int("PSTAB_EXA_NP_MIN", -500), 0),
}
TORSIONFREE_BOX = {
    "n_p": (-_env_int("PSTAB_TF_RADIUS", 50), _env_int("PSTAB_TF_RADIUS", 50)),
    "n_q": (-_env_int("PSTAB_TF_RADIUS", 50), _env_int("PSTAB_TF_RADIUS", 50)),
}

# Surface sheaf-condition grid: dim of V inside H^0(O(1))
SURFACE_DIM_V = _env_int("PSTAB_SURFACE_DIM_V", 3)

# Property sweeps run by report-all
RANDOM_SEED = _env_int("PSTAB_SEED", 20070419)
RANDOM_SAMPLES = _env_int("PSTAB_RANDOM_SAMPLES", 10000)
CLASS_BOUND = 50

# Sweep grids of the acceptance checks
PROP14_GRID = {"r": (1, 6), "d": (-20, 20), "g": (0, 4)}
# Classes swept against every (g, D, r, d) datum; only its own class may pass
PROP12_CLASS_BOX = {"r": (0, 4), "d": (-40, 40)}
FRD_GRID = {"r": (1, 8), "d": (-40, 40), "g": (0, 5)}
PARTITION_MAX = 30
TORSION_MAX_LENGTH = 5


def validate_config() -> Tuple[bool, List[str]]:
    problems = []
    if WORKERS < 1:
        problems.append(f"PSTAB_WORKERS must be >= 1, got {WORKERS}")
    for name, box in (("exa-sheaf", EXA_SHEAF_BOX), ("torsion-free", TORSIONFREE_BOX)):
        for var, (lo, hi) in box.items():
            if lo > hi:
                problems.append(f"{name} box for {var} is inverted: [{lo}, {hi}]")
    if SURFACE_DIM_V < 1:
        problems.append(f"PSTAB_SURFACE_DIM_V must be >= 1, got {SURFACE_DIM_V}")
    if RANDOM_SAMPLES < 1:
        problems.append(f"PSTAB_RANDOM_SAMPLES must be >= 1, got {RANDOM_SAMPLES}")

    return not problems, problems

"""Configuration management for cellcap."""
import os
from typing import Dict, List

from pydantic import BaseModel
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables."""

    # Parallelism (0 = one worker per CPU)
    threads: int = 0

    # Monte Carlo samples per random stream; fixed so results do not depend on threads
    chunk_size: int = 16384
    # Upper bound on interferers materialised in one vectorised batch
    max_batch_interferers: int = 2_000_000

    # Logging
    log_level: str = "INFO"
    log_file: str = ""

    class Config:
        env_file = ".env"
        env_prefix = "CELLCAP_"
        case_sensitive = False
        extra = "ignore"


# Global settings instance
settings = Settings()


def workers() -> int:
    """Effective worker count for the compute modules."""
    if settings.threads > 0:
        return settings.threads
    return os.cpu_count() or 1


class InterferenceDefaults(BaseModel):
    """Default network for the interference PDF curves."""

    sigma_db: float = 6.0
    m: float = 1.0
    sigma_r: float = 4.0
    n_t: int = 4
    n_r: int = 2
    lambda_bs: float = 1.0 / (3.141592653589793 * 500.0 ** 2)
    p_r: float = 1.0


class CapacityDefaults(BaseModel):
    """Default cooperative scenario for the capacity curves."""

    sigma_db: float = 7.0
    m: float = 1.0
    sigma_r: float = 4.0
    lambda_bs: float = 1.0 / (3.141592653589793 * 500.0 ** 2)
    r_b: float = 500.0
    n_t_c: int = 2
    # Antennas per interfering BS; never stated for the published curves
    n_t_interferer: int = 2


INTERFERENCE_DEFAULTS = InterferenceDefaults()
CAPACITY_DEFAULTS = CapacityDefaults()

# Mean cell radius used to size the simulated field
CELL_RADIUS_M = 500.0

# Default received-power grid for the interference PDF curves (watts, P_ant = 1 W)
PDF_GRID_MIN = 1e-12
PDF_GRID_MAX = 1.5e-9
PDF_GRID_POINTS = 300

# Parameter grid behind each interference figure: (parameter, values)
FIGURE_SWEEPS: Dict[int, tuple] = {
    3: ("sigma_db", [4.0, 6.0, 9.0]),
    4: ("lambda_bs", [0.5 * INTERFERENCE_DEFAULTS.lambda_bs,
                      INTERFERENCE_DEFAULTS.lambda_bs,
                      2.0 * INTERFERENCE_DEFAULTS.lambda_bs]),
    5: ("sigma_r", [3.0, 4.0, 5.0]),
    6: ("n_t", [1, 2, 4]),
    7: ("n_r", [1, 2, 4]),
    8: ("m", [1.0, 2.0, 3.0]),
}

COOP_ANTENNA_GRID: List[int] = [1, 2, 3, 4]
BS_DENSITY_GRID: List[float] = [0.5e-6, 1.0e-6, 1.5e-6, 2.0e-6, 2.5e-6, 3.0e-6, 3.5e-6]
INTERFERER_ANTENNA_SWEEP: List[int] = [1, 2, 4]

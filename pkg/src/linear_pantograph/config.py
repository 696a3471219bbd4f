from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file='.env', case_sensitive=True, populate_by_name=True, extra='ignore')

    # Sommation des séries
    rel_tol: float = Field(1e-14, alias='PANTOGRAPH_REL_TOL', gt=0)
    max_terms: int = Field(500, alias='PANTOGRAPH_MAX_TERMS', ge=2)
    high_precision_threshold: float = Field(30.0, alias='PANTOGRAPH_HIGH_PRECISION_THRESHOLD', ge=0)
    guard_digits: int = Field(30, alias='PANTOGRAPH_GUARD_DIGITS', ge=5)
    precision_attempts: int = Field(3, alias='PANTOGRAPH_PRECISION_ATTEMPTS', ge=2)
    log_like_radius: float = Field(0.5, alias='PANTOGRAPH_LOG_LIKE_RADIUS', gt=0)
    log_like_coefficients: int = Field(120, alias='PANTOGRAPH_LOG_LIKE_COEFFICIENTS', ge=4)

    # Zéros
    refine_tol: float = Field(1e-12, alias='PANTOGRAPH_REFINE_TOL', gt=0)
    bracket_attempts: int = Field(3, alias='PANTOGRAPH_BRACKET_ATTEMPTS', ge=1)
    scan_budget: int = Field(4000, alias='PANTOGRAPH_SCAN_BUDGET', ge=10)
    quad_tol: float = Field(1e-10, alias='PANTOGRAPH_QUAD_TOL', gt=0)

    # Classification au point général
    zero_gate_abs: float = Field(1e-9, alias='PANTOGRAPH_ZERO_GATE_ABS', gt=0)
    zero_proximity: float = Field(1e-6, alias='PANTOGRAPH_ZERO_PROXIMITY', gt=0)
    data_zero_tol: float = Field(1e-9, alias='PANTOGRAPH_DATA_ZERO_TOL', gt=0)
    rank_tol: float = Field(1e-9, alias='PANTOGRAPH_RANK_TOL', gt=0)
    rank_band: float = Field(100.0, alias='PANTOGRAPH_RANK_BAND', ge=1)

    # Solveurs
    cluster_tol: float = Field(1e-7, alias='PANTOGRAPH_CLUSTER_TOL', gt=0)
    jordan_tol: float = Field(1e-6, alias='PANTOGRAPH_JORDAN_TOL', gt=0)
    degenerate_tol: float = Field(1e-10, alias='PANTOGRAPH_DEGENERATE_TOL', gt=0)
    resonance_tol: float = Field(1e-12, alias='PANTOGRAPH_RESONANCE_TOL', gt=0)
    condition_limit: float = Field(1e12, alias='PANTOGRAPH_CONDITION_LIMIT', gt=1)
    bootstrap_terms: int = Field(4, alias='PANTOGRAPH_BOOTSTRAP_TERMS', ge=2)

    log_level: str = Field('INFO', alias='PANTOGRAPH_LOG_LEVEL')
    progress: bool = Field(False, alias='PANTOGRAPH_PROGRESS')
    output_dir: str = Field('results', alias='PANTOGRAPH_OUTPUT_DIR')


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()  # type: ignore[arg-type]

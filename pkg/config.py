"""Application configuration."""
from pydantic_settings import BaseSettings, SettingsConfigDict

TOOL_VERSION = "1.0.0"


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables (prefix MARTON_)."""

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", env_prefix="MARTON_", extra="ignore"
    )

    # Application Configuration
    log_level: str = "INFO"
    threads: int = 0  # Worker cap for parallel sweeps (0 = auto)

    # Search Configuration
    grid_resolution: int = 101  # Points per simplex axis
    refine_iterations: int = 6
    refine_shrink: float = 0.5
    seed: int = 0
    refine_starts: int = 3  # Lattice incumbents refined per search
    refine_random_directions: int = 8  # Seeded extra directions per refinement move
    oracle_resolution: int = 17  # Points per axis of the 8-cell p(u,v,x) lattice
    hunt_grid_resolution: int = 41  # Per-channel grid for batch hunts unless --grid is given
    hunt_oracle_resolution: int = 9
    outer_aux_size: int = 3  # Largest |U|, |V| tried by the outer-bound estimate
    polish_maxiter: int = 4000  # Nelder-Mead iterations per polish start
    outer_starts: int = 8
    violation_aux_size: int = 2  # Largest |U|, |V| tried by the ternary-input search
    violation_resolution: int = 25  # Points per axis of the p(u,v) lattice in that search

    # Tolerances
    ingest_tolerance: float = 1e-9  # File-sourced decimals
    internal_tolerance: float = 1e-12  # Internally generated values
    margin_tolerance: float = 1e-9
    equality_tolerance: float = 1e-6  # Slack in the Marton <= slice bound <= R-TD chain

    # Stationarity Certificates
    stationarity_tolerance: float = 1e-8  # Gradient norm of the AND objective
    certificate_tolerance: float = 1e-9
    degenerate_tolerance: float = 1e-9
    boundary_margin: float = 1e-6
    determinant_tolerance: float = 1e-6
    sweep_p11_points: int = 9
    sweep_scan_points: int = 200


# Global settings instance
settings = Settings()

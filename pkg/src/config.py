"""
Runtime configuration for spcimpute
Set these in your .env file or environment variables
"""

import os
from typing import Optional

from dotenv import load_dotenv

load_dotenv()


def _optional_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    return int(value) if value not in (None, "") else None


class Config:
    """Configuration management"""

    # Imputation defaults
    DEFAULT_SEED: Optional[int] = _optional_int("SPC_SEED")
    DEFAULT_M: int = int(os.getenv("SPC_M", "5"))
    FCS_ITERATIONS: int = int(os.getenv("SPC_ITERATIONS", "10"))

    # Numerics
    PSD_TOL: float = float(os.getenv("SPC_PSD_TOL", "1e-10"))

    # Execution
    THREADS: int = int(os.getenv("SPC_THREADS", "1"))

    # Simulation bench (the full study uses 1000 replications)
    REPLICATIONS: int = int(os.getenv("SPC_REPLICATIONS", "200"))
    FULL_REPLICATIONS: int = 1000

    # Output
    OUTPUT_DIR: str = os.getenv("SPC_OUTPUT_DIR", "spc_output")
    LOG_LEVEL: str = os.getenv("SPC_LOG_LEVEL", "INFO")

    # Manifest schema version
    SPEC_VERSION: int = 1


# Singleton instance
config = Config()


def get_settings() -> Config:
    """Get configuration settings"""
    return config

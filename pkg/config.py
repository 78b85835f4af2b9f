# config.py - Environment configuration for the experiment runner
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

VALID_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Config:
    """Runtime configuration read from the environment"""

    # Output root for masks, checkpoints, logs, result tables and heatmaps
    OUTPUT_ROOT = os.getenv("FREECSL_OUTPUT_ROOT", "runs")

    # Logging
    LOG_LEVEL = os.getenv("FREECSL_LOG_LEVEL", "INFO").upper()
    DEBUG = os.getenv("FREECSL_DEBUG", "false").lower() == "true"

    # torch intra-op threads; 1 keeps loss trajectories bit-identical
    NUM_THREADS = int(os.getenv("FREECSL_NUM_THREADS", 1))

    @classmethod
    def resolve_output_root(cls, override: Optional[str] = None) -> Path:
        """Output root: explicit flag, then environment (read at call time), then default"""
        if override:
            return Path(override)
        return Path(os.getenv("FREECSL_OUTPUT_ROOT", cls.OUTPUT_ROOT))

    @classmethod
    def validate(cls):
        """Validate environment-provided values"""
        problems = []

        if cls.LOG_LEVEL not in VALID_LOG_LEVELS:
            problems.append(f"FREECSL_LOG_LEVEL must be one of {VALID_LOG_LEVELS}, got {cls.LOG_LEVEL!r}")

        if cls.NUM_THREADS < 1:
            problems.append(f"FREECSL_NUM_THREADS must be >= 1, got {cls.NUM_THREADS}")

        if problems:
            raise ValueError(f"Invalid environment: {'; '.join(problems)}")

        return True


# Example .env file content:
ENV_EXAMPLE = """
# Where every subcommand writes its artifacts
FREECSL_OUTPUT_ROOT=runs

# Logging
FREECSL_LOG_LEVEL=INFO
FREECSL_DEBUG=false

# Deterministic single-threaded training
FREECSL_NUM_THREADS=1
"""

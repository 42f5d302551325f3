"""
Configuration Module

This module centralizes every numeric tolerance used by the checker and loads
overrides from a JSON tolerance file.
"""

import os
import json
import logging
from dataclasses import dataclass, field, fields, replace, asdict
from typing import Dict, Any, Optional

from dotenv import load_dotenv

from src.errors import InputError

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

TOLERANCE_ENV_VAR = "QMC_LTL_TOLERANCES"


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances, one per use site."""

    herm_tol: float = 1e-10
    psd_tol: float = 1e-10
    trace_tol: float = 1e-10
    cptp_tol: float = 1e-8
    drift_tol: float = 1e-7
    stochastic_tol: float = 1e-10
    eig_tol: float = 1e-9
    # relative to the matrix norm
    cluster_tol: float = 1e-8
    defect_cond_tol: float = 1e8
    peripheral_tol: float = 1e-8
    spectral_radius_tol: float = 1e-6
    angle_tol: float = 1e-9
    coeff_tol: float = 1e-9
    # interior eigenvalues below this modulus are treated as nilpotent
    zero_tol: float = 1e-7
    singular_cond_tol: float = 1e12
    projector_tol: float = 1e-6
    imag_tol: float = 1e-9
    ambiguity_cap: int = 16
    max_horizon: int = 1_000_000

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class CheckConfig:
    """Settings for one run of the epsilon-halving checker."""

    epsilon0: float = 0.5
    max_halvings: int = 10
    qmax: Optional[int] = None
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if not self.epsilon0 > 0:
            raise InputError(f"epsilon0 must be positive, got {self.epsilon0}")
        if self.max_halvings < 1:
            raise InputError(f"max_halvings must be at least 1, got {self.max_halvings}")
        if self.qmax is not None and self.qmax < 1:
            raise InputError(f"qmax must be a positive integer, got {self.qmax}")


def load_tolerances(path: str) -> Tolerances:
    """
    Load tolerance overrides from a JSON file.

    Args:
        path: Path to a JSON object mapping tolerance names to values

    Returns:
        Tolerances with the overrides applied on top of the defaults
    """
    if not os.path.exists(path):
        logger.error(f"Tolerance file not found: {path}")
        raise InputError(f"Tolerance file not found: {path}")

    try:
        with open(path, 'r', encoding='utf-8') as f:
            overrides = json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in tolerance file: {str(e)}")
        raise InputError(f"Invalid JSON in tolerance file {path}: {str(e)}")
    except (UnicodeDecodeError, OSError) as e:
        logger.error(f"Cannot read tolerance file: {str(e)}")
        raise InputError(f"Cannot read tolerance file {path}: {str(e)}")

    if not isinstance(overrides, dict):
        raise InputError(f"Tolerance file {path} must contain a JSON object")

    known = {f.name: f.type for f in fields(Tolerances)}
    unknown = sorted(set(overrides) - set(known))
    if unknown:
        raise InputError(f"Unknown tolerance names in {path}: {', '.join(unknown)}")

    coerced = {}
    for name, value in overrides.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InputError(f"Tolerance {name} must be a number, got {value!r}")
        coerced[name] = int(value) if name in ("ambiguity_cap", "max_horizon") else float(value)

    logger.info(f"Loaded {len(coerced)} tolerance overrides from: {path}")
    return replace(DEFAULT_TOLERANCES, **coerced)


def resolve_tolerances(cli_path: Optional[str] = None) -> Tolerances:
    """
    Resolve tolerances with precedence CLI path > environment variable > defaults.

    Args:
        cli_path: Path given with --tolerance-file, if any

    Returns:
        The effective tolerances
    """
    if cli_path:
        logger.info(f"Using tolerance file from CLI arguments: {cli_path}")
        return load_tolerances(cli_path)

    env_path = os.getenv(TOLERANCE_ENV_VAR)
    if env_path:
        logger.info(f"Using tolerance file from {TOLERANCE_ENV_VAR}: {env_path}")
        return load_tolerances(env_path)

    return DEFAULT_TOLERANCES

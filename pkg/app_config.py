import logging
import os
from dotenv import load_dotenv

load_dotenv()


def _float_env(var_name, default):
    """Return a float env var, falling back to the default on bad input."""
    raw = os.environ.get(var_name, "")
    if not raw:
        return default
    try:
        return float(raw)
    except ValueError:
        logging.getLogger(__name__).warning(
            "%s=%r is not a number; using default %r", var_name, raw, default
        )
        return default


def _int_env(var_name, default):
    value = _float_env(var_name, float(default))
    return int(value)


class Config:
    """Engine configuration"""

    # Gaussian states
    PHYSICALITY_TOL = _float_env('CHIRALQ_PHYSICALITY_TOL', 1e-9)

    # QFI engine
    PURE_STATE_CLAMP = _float_env('CHIRALQ_PURE_STATE_CLAMP', 1e-7)
    FD_STEP_SCALE = _float_env('CHIRALQ_FD_STEP_SCALE', 1e-5)
    CRB_CHAIN_TOL = _float_env('CHIRALQ_CRB_CHAIN_TOL', 1e-6)

    # Bright limit: warn when |alpha|^2 < factor * sinh^2(2s)
    BRIGHT_LIMIT_FACTOR = _float_env('CHIRALQ_BRIGHT_LIMIT_FACTOR', 100.0)

    # Fock oracle
    ORACLE_LEAK_TOL = _float_env('CHIRALQ_ORACLE_LEAK_TOL', 1e-8)
    ORACLE_DC_SCALE = _float_env('CHIRALQ_ORACLE_DC_SCALE', 1e-4)
    SLD_FLOOR = _float_env('CHIRALQ_SLD_FLOOR', 1e-12)
    ORACLE_MATCH_TOL = _float_env('CHIRALQ_ORACLE_MATCH_TOL', 0.01)

    # Monte Carlo
    MC_PARTITIONS = _int_env('CHIRALQ_MC_PARTITIONS', 8)
    SATURATION_TOL = _float_env('CHIRALQ_SATURATION_TOL', 0.05)

    # Runtime
    DEFAULT_THREADS = _int_env('CHIRALQ_THREADS', 1)
    LOG_LEVEL = os.environ.get('CHIRALQ_LOG_LEVEL', 'INFO')

    # Error monitoring (optional)
    SENTRY_DSN = os.environ.get('SENTRY_DSN', '')
    ENVIRONMENT = os.environ.get('CHIRALQ_ENV', 'development')

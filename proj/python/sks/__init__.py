"""Orbits, periods, zeta integrals and half-integral weight lifts of Maass forms."""

from pathlib import Path

from ._core import (
    CacheMiss,
    Character,
    ConfigError,
    HalfIntegralForm,
    MaassForm,
    OrbitRep,
    PrecisionError,
    characters,
    fourier_sato,
    gamma,
    gauss_sum,
    generators,
    kbessel,
    kronecker,
    lift,
    load_fixture,
    log_gamma,
    matrix_identity,
    orbits,
    parse_fixture,
    parse_half_integral,
    period,
    run_cli,
    theta_multiplier,
    verify_fg,
    verify_modularity,
    whittaker_w,
    zeta,
)
from . import _core

_FIXTURE = "maass_level1_even.txt"


def bundled_fixture() -> MaassForm:
    """The level-1 even form shipped with the package."""
    installed = Path(_core.__file__).parent / "data" / _FIXTURE
    path = installed if installed.exists() else Path(_core.DATA_DIR) / _FIXTURE
    return load_fixture(str(path))


__all__ = [name for name in dir() if not name.startswith("_") and name != "Path"]

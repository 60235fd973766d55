"""Radiative lifetime and emission of excitons in a 2D square optical lattice."""
from .config import ConfigError, DipoleOrientation, LatticeConfig, parse_config, validate_config
from .damping import (
    CriticalPoint,
    DecayResult,
    Regime,
    classify_regime,
    critical_k,
    gamma_atom,
    gamma_exciton,
)
from .dispersion import WaveVector2D, bz_grid, exciton_energy, general_dispersion
from .emission import emission_intensity, exciton_population, field_envelope
from .oracle import CouplingModel, OracleSettings, golden_rule_rate, oracle_sweep
from .units import CONSTANTS, PhysicalConstants

__version__ = "0.1.0"

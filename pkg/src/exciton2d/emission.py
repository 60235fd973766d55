"""Far-field emission of a long-wavelength lattice exciton.

Field amplitudes are expressed in V/Angstrom (multiply by
``V_PER_ANGSTROM_TO_V_PER_M`` for V/m) and intensities <E^- E^+> in
(V/Angstrom)^2.  Vectors live in the right-handed frame (k_hat, p_hat, z)
with p_hat = z x k_hat, where the in-plane dipole is
mu_par (cos(phi) k_hat + sin(phi) p_hat).

Only valid for k a << 1; evaluations with k a above ``KA_LIMIT`` carry a
warning string instead of raising.
"""
from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Optional, Tuple

import numpy as np

from .config import DipoleOrientation, LatticeConfig
from .units import CONSTANTS, PhysicalConstants

KA_LIMIT = 0.1


@dataclass(frozen=True)
class FieldEnvelope:
    """Retarded field amplitude of one exciton mode.

    ``components`` (e*Angstrom) times ``prefactor`` (V/Angstrom per e*Angstrom)
    is the field amplitude multiplying e^{i k.rho} B_k(t - z/c).
    """

    components: Tuple[float, float, float]
    prefactor: float
    phase_wavevector: float  # |k|, 1/Angstrom
    warning: Optional[str] = None

    @property
    def squared_modulus(self) -> float:
        return float(sum(c * c for c in self.components))

    def amplitude(self) -> np.ndarray:
        return self.prefactor * np.asarray(self.components)


@dataclass(frozen=True)
class EmissionSample:
    rho: Tuple[float, float]  # Angstrom
    z: float  # Angstrom
    time: float  # s
    intensity: float  # (V/Angstrom)^2
    retarded: bool
    warning: Optional[str] = None


def _long_wavelength_warning(a: float, E_0: float, consts: PhysicalConstants) -> Optional[str]:
    ka = E_0 * a / consts.hbar_c
    if ka > KA_LIMIT:
        return f"k a = {ka:.3g} exceeds {KA_LIMIT}; long-wavelength emission formula not reliable"
    return None


def _check_inputs(E_ex: float, E_0: float) -> None:
    if not E_0 > 0:
        raise ValueError(f"E_0 must be > 0 (k_hat undefined at k = 0), got {E_0!r}")
    if not E_ex > 0:
        raise ValueError(f"E_ex must be > 0, got {E_ex!r}")


def envelope_components(dip: DipoleOrientation, E_ex: float, E_0: float) -> Tuple[float, float, float]:
    r = E_ex / E_0
    mp, mz = dip.mu_parallel, dip.mu_z
    cp, sp = math.cos(dip.phi), math.sin(dip.phi)
    v_k = (r - 1.0 / r) * mp * cp - mz
    v_p = r * mp * sp
    v_z = -mp * cp
    return (v_k, v_p, v_z)


def field_prefactor(
    a: float, E_0: float, n_sites: int, consts: PhysicalConstants = CONSTANTS
) -> float:
    """E_0 / (2 eps0 hbar c a^2 sqrt(N)) in V/Angstrom per e*Angstrom."""
    return E_0 * consts.mu_over_eps0(1.0) / (2.0 * consts.hbar_c * a * a * math.sqrt(n_sites))


def field_envelope(
    cfg: LatticeConfig,
    dip: DipoleOrientation,
    E_ex: float,
    E_0: float,
    consts: PhysicalConstants = CONSTANTS,
) -> FieldEnvelope:
    _check_inputs(E_ex, E_0)
    return FieldEnvelope(
        components=envelope_components(dip, E_ex, E_0),
        prefactor=field_prefactor(cfg.a, E_0, cfg.n_sites, consts),
        phase_wavevector=E_0 / consts.hbar_c,
        warning=_long_wavelength_warning(cfg.a, E_0, consts),
    )


def emission_brace(theta, phi, x):
    """Angular factor of the intensity in terms of x = E_0/E_ex (vectorised).

    cos^2 t + sin^2 t [1/x^2 + cos^2 p (x^2 - 1)] + 2 sin t cos t cos p (x^2 - 1)/x
    """
    st, ct, cp = np.sin(theta), np.cos(theta), np.cos(phi)
    x = np.asarray(x, dtype=float)
    return (
        ct**2
        + st**2 * (1.0 / x**2 + cp**2 * (x**2 - 1.0))
        + 2.0 * st * ct * cp * (x**2 - 1.0) / x
    )


def exciton_population(
    initial: float, gamma: float, t, z, consts: PhysicalConstants = CONSTANTS
):
    """<B^dag B> at retarded time t - z/c; equal to ``initial`` before arrival.

    ``gamma`` is hbar*Gamma in eV, ``t`` in s, ``z`` in Angstrom.  Accepts
    arrays for ``t``/``z``.
    """
    if initial < 0:
        raise ValueError(f"initial population must be >= 0, got {initial!r}")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma!r}")
    tau = np.asarray(t, dtype=float) - np.abs(np.asarray(z, dtype=float)) / consts.c_angstrom_per_s
    rate = gamma / consts.hbar_ev_s
    out = initial * np.exp(-rate * np.maximum(tau, 0.0))
    return float(out) if np.ndim(out) == 0 else out


def intensity_prefactor(
    a: float, mu: float, E_0: float, n_sites: int, consts: PhysicalConstants = CONSTANTS
) -> float:
    """E_0^2 mu^2 / ((2 eps0 hbar c a^2)^2 N) in (V/Angstrom)^2."""
    amp = E_0 * consts.mu_over_eps0(mu) / (2.0 * consts.hbar_c * a * a)
    return amp * amp / n_sites


def emission_intensity(
    cfg: LatticeConfig,
    dip: DipoleOrientation,
    E_ex: float,
    E_0: float,
    gamma: float,
    n_sites: int,
    t: float,
    z: float,
    rho: Tuple[float, float] = (0.0, 0.0),
    consts: PhysicalConstants = CONSTANTS,
) -> EmissionSample:
    """Single-exciton intensity <E^- E^+> at (rho, z, t).

    Independent of ``rho``; ``z`` enters only through retardation and the
    decay exponent.  Zero before the retarded arrival time t = |z|/c.
    """
    _check_inputs(E_ex, E_0)
    if n_sites < 1:
        raise ValueError(f"N must be >= 1, got {n_sites!r}")
    retarded = t - abs(z) / consts.c_angstrom_per_s >= 0.0
    if retarded:
        brace = float(emission_brace(dip.theta, dip.phi, E_0 / E_ex))
        pop = exciton_population(1.0, gamma, t, z, consts)
        intensity = intensity_prefactor(cfg.a, dip.mu, E_0, n_sites, consts) * brace * pop
    else:
        intensity = 0.0
    return EmissionSample(
        rho=(float(rho[0]), float(rho[1])),
        z=float(z),
        time=float(t),
        intensity=intensity,
        retarded=retarded,
        warning=_long_wavelength_warning(cfg.a, E_0, consts),
    )

"""Closed-form radiative damping of a 2D lattice exciton.

All rates are returned as hbar*Gamma in eV.  With x = E_0/E_ex the exciton
rate is

    hbar*Gamma_ex = mu^2/(2 eps0 a^2 hbar c) * E_ex^2/sqrt(E_ex^2 - E_0^2) * B(theta, phi, x)

    B = sin^2(theta) (1 - cos^2(phi) x^2) + cos^2(theta) x^2
        - 2 sin(theta) cos(theta) cos(phi) x sqrt(1 - x^2)

for E_0 < E_ex, and exactly zero beyond the light cone (E_0 >= E_ex), where
no free photon matches both the exciton energy and in-plane momentum.
B can be rewritten as a sum of squares,

    B = (sin(theta) cos(phi) sqrt(1 - x^2) - cos(theta) x)^2 + sin^2(theta) sin^2(phi)

which is the form used for evaluation since it is non-negative by
construction.  The single-atom reference is
hbar*Gamma_at = mu^2 E^3 / (3 pi eps0 (hbar c)^3).
"""
from __future__ import annotations

from dataclasses import dataclass
import enum
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .config import DipoleOrientation, LatticeConfig
from .dispersion import WaveVector2D, exciton_energy
from .units import CONSTANTS, PhysicalConstants

# relative half-width of the band below E_ex treated as the 1/sqrt divergence
SINGULAR_EPS = 1e-9
# limit of B at the light cone below which the rate stays finite there
_FINITE_EDGE_TOL = 1e-12

BISECT_MAX_ITER = 200
BISECT_RESIDUAL_EV = 1e-12


class Regime(str, enum.Enum):
    SUPERRADIANT = "superradiant"
    SUBRADIANT = "subradiant"
    METASTABLE = "metastable"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DecayResult:
    """Damping rate at one (orientation, E_ex, E_0) point.

    ``gamma`` and ``gamma_at`` are hbar*Gamma in eV.  When ``divergent`` is
    set the point sits inside the singular band just below the light cone
    and ``gamma``/``ratio`` are ``inf``.
    """

    gamma: float
    gamma_at: float
    ratio: float
    regime: Regime
    divergent: bool = False


@dataclass(frozen=True)
class CriticalPoint:
    k_c: float  # 1/Angstrom
    E_0_c: float  # eV
    direction: Tuple[float, float]
    residual: float  # hbar c k_c - E_ex(k_c), eV
    iterations: int


class NoCrossingError(ValueError):
    """The photon line does not cross the band inside the first zone."""


def gamma_atom(E_A: float, mu: float, consts: PhysicalConstants = CONSTANTS) -> float:
    """Free-space single-atom rate hbar*Gamma_at (eV)."""
    return consts.mu2_over_eps0(mu) * E_A**3 / (3.0 * math.pi * consts.hbar_c**3)


def rate_prefactor(a: float, mu: float, consts: PhysicalConstants = CONSTANTS) -> float:
    """Dimensionless mu^2 / (2 eps0 a^2 hbar c)."""
    return consts.mu2_over_eps0(mu) / (2.0 * a * a * consts.hbar_c)


def damping_bracket(theta, phi, x):
    """Orientation factor B as written in expanded form (vectorised).

    The three terms cancel near the zeros of B, so they are summed in
    ``np.longdouble`` (80-bit on x86) and rounded back to float64.
    """
    ld = np.longdouble
    theta = np.asarray(theta, dtype=ld)
    phi = np.asarray(phi, dtype=ld)
    x = np.asarray(x, dtype=ld)
    st, ct, cp = np.sin(theta), np.cos(theta), np.cos(phi)
    b = (
        st**2 * (1 - cp**2 * x**2)
        + ct**2 * x**2
        - 2 * st * ct * cp * x * np.sqrt(1 - x**2)
    )
    return b.astype(float)


def damping_amplitude(theta, phi, x):
    """Signed amplitude sin(theta) cos(phi) sqrt(1-x^2) - cos(theta) x."""
    x = np.asarray(x, dtype=float)
    return np.sin(theta) * np.cos(phi) * np.sqrt(1.0 - x**2) - np.cos(theta) * x


def damping_bracket_sos(theta, phi, x):
    """Orientation factor B in sum-of-squares form; >= 0 by construction."""
    return damping_amplitude(theta, phi, x) ** 2 + (np.sin(theta) * np.sin(phi)) ** 2


def light_cone_bracket(theta: float, phi: float) -> float:
    """B at x = 1; the rate diverges at the light cone iff this is non-zero."""
    return math.cos(theta) ** 2 + (math.sin(theta) * math.sin(phi)) ** 2


def classify_regime(result: DecayResult) -> Regime:
    return regime_for(result.gamma, result.ratio)


def regime_for(gamma: float, ratio: float) -> Regime:
    if gamma == 0.0:
        return Regime.METASTABLE
    if ratio > 1.0:
        return Regime.SUPERRADIANT
    return Regime.SUBRADIANT


def gamma_exciton(
    cfg: LatticeConfig,
    dip: DipoleOrientation,
    E_ex: float,
    E_0: float,
    consts: PhysicalConstants = CONSTANTS,
) -> DecayResult:
    """Radiative damping of the exciton with energy ``E_ex`` and photon line ``E_0``.

    The ratio is taken against :func:`gamma_atom` evaluated at ``E_ex``.
    Points with E_ex*(1 - SINGULAR_EPS) < E_0 < E_ex return a divergent
    result unless the orientation makes the rate vanish at the light cone.
    """
    if not E_ex > 0:
        raise ValueError(f"E_ex must be > 0, got {E_ex!r}")
    if not E_0 >= 0:
        raise ValueError(f"E_0 must be >= 0, got {E_0!r}")
    g_at = gamma_atom(E_ex, dip.mu, consts)
    if E_0 >= E_ex:
        return DecayResult(0.0, g_at, 0.0, Regime.METASTABLE)
    if E_ex - E_0 < SINGULAR_EPS * E_ex and light_cone_bracket(dip.theta, dip.phi) > _FINITE_EDGE_TOL:
        return DecayResult(math.inf, g_at, math.inf, Regime.SUPERRADIANT, divergent=True)

    x = E_0 / E_ex
    bracket = float(damping_bracket_sos(dip.theta, dip.phi, x))
    # E_ex^2 / sqrt(E_ex^2 - E_0^2) written to avoid cancellation near x -> 1
    density = E_ex / math.sqrt((1.0 - x) * (1.0 + x))
    gamma = rate_prefactor(cfg.a, dip.mu, consts) * density * bracket
    ratio = gamma / g_at
    return DecayResult(gamma, g_at, ratio, regime_for(gamma, ratio))


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    ftol: float = 0.0,
    xtol: float = 0.0,
    max_iter: int = BISECT_MAX_ITER,
) -> Tuple[float, int]:
    """Bisection on a sign-changing bracket; returns (root, iterations).

    Stops once |f| <= ftol, the bracket is narrower than xtol, the bracket
    can no longer be split in floating point, or after ``max_iter`` steps.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo, 0
    if f_hi == 0.0:
        return hi, 0
    if (f_lo > 0) == (f_hi > 0):
        raise NoCrossingError(f"no sign change on [{lo!r}, {hi!r}]: f = {f_lo!r}, {f_hi!r}")
    mid = 0.5 * (lo + hi)
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) <= ftol or (hi - lo) <= xtol or mid in (lo, hi):
            return mid, it
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return mid, max_iter


def critical_k(
    cfg: LatticeConfig,
    direction: Sequence[float] = (1.0, 0.0),
    consts: PhysicalConstants = CONSTANTS,
) -> CriticalPoint:
    """Light-cone crossing hbar c k_c = E_ex(k_c * direction) by bisection on (0, pi/a]."""
    band_min = cfg.E_A - 4.0 * abs(cfg.J)
    band_max = cfg.E_A + 4.0 * abs(cfg.J)
    edge = consts.hbar_c * math.pi / cfg.a
    if not band_min > 0:
        raise NoCrossingError(f"band bottom E_A - 4|J| = {band_min!r} eV is not positive")
    if not edge > band_max:
        raise NoCrossingError(
            f"zone-edge photon energy {edge!r} eV does not exceed band top {band_max!r} eV"
        )
    dx, dy = direction
    norm = math.hypot(dx, dy)
    unit = (dx / norm, dy / norm)

    def residual(k: float) -> float:
        return consts.hbar_c * k - exciton_energy(cfg, WaveVector2D(k * unit[0], k * unit[1]))

    k_c, iters = bisect_root(residual, 0.0, math.pi / cfg.a, ftol=BISECT_RESIDUAL_EV)
    return CriticalPoint(
        k_c=k_c,
        E_0_c=consts.hbar_c * k_c,
        direction=unit,
        residual=residual(k_c),
        iterations=iters,
    )


def dark_point(theta: float, phi: float) -> Optional[float]:
    """x = E_0/E_ex in (0, 1) where the rate vanishes inside the light cone.

    Zero rate needs sin(theta) sin(phi) = 0 and a sign change of the signed
    amplitude; the zero of B itself is a double root, so bisection runs on
    the amplitude.  Returns None when there is no such point.
    """
    if abs(math.sin(theta) * math.sin(phi)) > 1e-15:
        return None

    def amp(x: float) -> float:
        return float(damping_amplitude(theta, phi, x))

    lo, hi = 0.0, 1.0
    if amp(lo) == 0.0 or amp(hi) == 0.0 or (amp(lo) > 0) == (amp(hi) > 0):
        return None
    x, _ = bisect_root(amp, lo, hi)
    return x

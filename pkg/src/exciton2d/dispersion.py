"""Exciton band structure of the square lattice.

The nearest-neighbour band is

    E_ex(k) = E_A - 2 J [cos(k_x a) + cos(k_y a)]

For an arbitrary coupling table the band is the lattice Fourier sum
E_A + sum_R J(R) exp(i k.R).  Couplings are taken literally, so the
nearest-neighbour band corresponds to J(+-a x) = J(+-a y) = -J.
"""
from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .config import LatticeConfig
from .units import CONSTANTS, PhysicalConstants


@dataclass(frozen=True)
class WaveVector2D:
    """In-plane wavevector (1/Angstrom)."""

    k_x: float
    k_y: float

    @classmethod
    def from_polar(cls, magnitude: float, angle: float) -> "WaveVector2D":
        return cls(magnitude * math.cos(angle), magnitude * math.sin(angle))

    @classmethod
    def along(cls, magnitude: float, direction: Sequence[float]) -> "WaveVector2D":
        dx, dy = direction
        norm = math.hypot(dx, dy)
        if norm == 0.0:
            raise ValueError("direction must be a non-zero 2-vector")
        return cls(magnitude * dx / norm, magnitude * dy / norm)

    @property
    def magnitude(self) -> float:
        return math.hypot(self.k_x, self.k_y)

    @property
    def angle(self) -> float:
        return math.atan2(self.k_y, self.k_x)

    def __neg__(self) -> "WaveVector2D":
        return WaveVector2D(-self.k_x, -self.k_y)

    def folded(self, a: float) -> "WaveVector2D":
        """Representative in the first Brillouin zone (-pi/a, pi/a]^2."""
        return WaveVector2D(_fold(self.k_x, a), _fold(self.k_y, a))


def _fold(k: float, a: float) -> float:
    period = 2.0 * math.pi / a
    # map to (-pi/a, pi/a]
    r = -((-k + math.pi / a) % period) + math.pi / a
    return r


@dataclass(frozen=True)
class BandPoint:
    k: WaveVector2D
    energy: float  # eV
    photon_line_energy: float  # E_0 = hbar c |k|, eV


def exciton_energy(cfg: LatticeConfig, k: WaveVector2D) -> float:
    """Nearest-neighbour exciton energy (eV) at wavevector ``k``."""
    return cfg.E_A - 2.0 * cfg.J * (math.cos(k.k_x * cfg.a) + math.cos(k.k_y * cfg.a))


def exciton_energy_grid(cfg: LatticeConfig, kx, ky) -> np.ndarray:
    """Vectorised :func:`exciton_energy` over broadcastable arrays."""
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    return cfg.E_A - 2.0 * cfg.J * (np.cos(kx * cfg.a) + np.cos(ky * cfg.a))


def nearest_neighbor_couplings(cfg: LatticeConfig) -> List[Tuple[Tuple[float, float], float]]:
    a = cfg.a
    return [((a, 0.0), -cfg.J), ((-a, 0.0), -cfg.J), ((0.0, a), -cfg.J), ((0.0, -a), -cfg.J)]


class AsymmetricCouplingError(ValueError):
    pass


def _check_symmetric(couplings, rtol: float = 1e-12) -> None:
    table = {}
    for (rx, ry), j in couplings:
        key = (float(rx), float(ry))
        table[key] = table.get(key, 0.0) + float(j)
    for (rx, ry), j in table.items():
        partner = table.get((-rx if rx else 0.0, -ry if ry else 0.0))
        if partner is None:
            raise AsymmetricCouplingError(f"coupling at R=({rx}, {ry}) has no partner at -R")
        if abs(partner - j) > rtol * max(abs(j), abs(partner), 1e-300):
            raise AsymmetricCouplingError(
                f"J(R) != J(-R) at R=({rx}, {ry}): {j!r} vs {partner!r}"
            )


def lattice_fourier_sum(
    cfg: LatticeConfig,
    couplings: Iterable[Tuple[Tuple[float, float], float]],
    k: WaveVector2D,
) -> complex:
    """E_A + sum_R J(R) exp(i k.R), with no symmetry check."""
    total = complex(cfg.E_A)
    for (rx, ry), j in couplings:
        phase = k.k_x * rx + k.k_y * ry
        total += j * complex(math.cos(phase), math.sin(phase))
    return total


def general_dispersion(
    cfg: LatticeConfig,
    couplings: Iterable[Tuple[Tuple[float, float], float]],
    k: WaveVector2D,
) -> float:
    """Band energy for a coupling table closed under R -> -R.

    Raises :class:`AsymmetricCouplingError` when J(R) != J(-R), since the
    sum would then be complex.
    """
    couplings = list(couplings)
    _check_symmetric(couplings)
    return lattice_fourier_sum(cfg, couplings, k).real


def bz_axis(n: int, a: float) -> np.ndarray:
    """Allowed k along one axis: 2 pi m / (n a) with m folded into (-n/2, n/2]."""
    if n < 1:
        raise ValueError(f"site count must be >= 1, got {n}")
    m = np.arange(-((n - 1) // 2), n // 2 + 1)
    return 2.0 * math.pi * m / (n * a)


def bz_grid(cfg: LatticeConfig) -> List[WaveVector2D]:
    """All N_x*N_y lattice wavevectors, row-major (k_x outer, k_y inner)."""
    kx = bz_axis(cfg.N_x, cfg.a)
    ky = bz_axis(cfg.N_y, cfg.a)
    return [WaveVector2D(float(x), float(y)) for x in kx for y in ky]


def band_point(
    cfg: LatticeConfig, k: WaveVector2D, consts: PhysicalConstants = CONSTANTS
) -> BandPoint:
    return BandPoint(k=k, energy=exciton_energy(cfg, k), photon_line_energy=consts.hbar_c * k.magnitude)

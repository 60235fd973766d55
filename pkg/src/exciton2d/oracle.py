"""Brute-force golden-rule rate, used to cross-check the closed-form damping.

The photon mode sum is done numerically: for photons q = (k, q_z) with the
in-plane part locked to the exciton wavevector,

    hbar*Gamma = int_0^qmax dq_z  hbar c q / (2 eps0 a^2) * P(mu, q) * delta(E_ex - hbar c q)

with P the polarisation sum mu^2 - (q.mu)^2/q^2.  The quantisation length
cancels between |g|^2 (1/L) and the mode density (L/2pi) before anything is
discretised, so it never appears here.  The delta function is a normalised
Lorentzian of half-width eta; the integral is evaluated by composite Simpson
for a decreasing sequence of eta and extrapolated to eta -> 0 with a
polynomial fit.

Nothing in this module calls into :mod:`exciton2d.damping`.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from .config import DipoleOrientation, LatticeConfig
from .units import CONSTANTS, PhysicalConstants

# oracle refuses points this close (relative) to the light cone
SINGULAR_BAND = 0.02


class OracleError(RuntimeError):
    pass


class OraclePreconditionError(OracleError, ValueError):
    pass


class QuadratureError(OracleError):
    pass


class ExtrapolationError(OracleError):
    pass


@dataclass(frozen=True)
class CouplingModel:
    """Exciton of energy ``E_ex`` (eV) at in-plane wavenumber ``k`` (1/Angstrom).

    The direction of k relative to the in-plane dipole is ``dipole.phi``.
    """

    dipole: DipoleOrientation
    lattice: LatticeConfig
    E_ex: float
    k: float


@dataclass(frozen=True)
class OracleSettings:
    eta: float = 1e-3  # eV, single-width evaluations
    q_z_max: Optional[float] = None  # 1/Angstrom; None -> hbar c q_z_max = 10 E_ex
    n_points: int = 200_000
    eta_sequence: Tuple[float, ...] = (1e-3, 5e-4, 2.5e-4)
    refine: bool = True
    quad_rtol: float = 1e-3
    extrap_rtol: float = 1e-3
    # absolute tolerance, as a fraction of the natural rate scale
    abs_tol: float = 1e-6

    def cutoff(self, E_ex: float, consts: PhysicalConstants = CONSTANTS) -> float:
        return self.q_z_max if self.q_z_max is not None else 10.0 * E_ex / consts.hbar_c

    def check(self, E_ex: float, consts: PhysicalConstants = CONSTANTS) -> None:
        problems = []
        if not self.eta > 0:
            problems.append(f"eta must be > 0, got {self.eta!r}")
        if consts.hbar_c * self.cutoff(E_ex, consts) < 5.0 * E_ex * (1 - 1e-12):
            problems.append("hbar c q_z_max must be >= 5 E_ex")
        etas = list(self.eta_sequence)
        if not etas or any(e <= 0 for e in etas):
            problems.append("eta_sequence must be non-empty and positive")
        elif any(b >= a for a, b in zip(etas, etas[1:])):
            problems.append("eta_sequence must be strictly decreasing")
        if self.n_points < 4:
            problems.append("n_points must be >= 4")
        if problems:
            raise OraclePreconditionError("; ".join(problems))


@dataclass(frozen=True)
class OracleResult:
    rate: float  # extrapolated hbar*Gamma, eV
    raw: Tuple[float, ...]  # one per eta, finest resolution
    etas: Tuple[float, ...]
    quadrature_error: float  # max |I(2n) - I(n)| over the eta sequence
    extrapolation_error: float  # |quadratic - linear| eta -> 0 estimate
    fit_residual: float  # least-squares residual (0 for exact interpolation)
    n_points: int


def polarization_sum(mu, q):
    """Sum over the two transverse polarisations of |mu . e|^2.

    ``mu`` and ``q`` are 3-vectors (last axis); broadcasts over leading axes.
    """
    mu = np.asarray(mu, dtype=float)
    q = np.asarray(q, dtype=float)
    q2 = np.sum(q * q, axis=-1)
    if np.any(q2 == 0.0):
        raise ValueError("polarization sum undefined for q = 0")
    mu2 = np.sum(mu * mu, axis=-1)
    qmu = np.sum(q * mu, axis=-1)
    return mu2 - qmu * qmu / q2


def lorentzian(x, eta: float):
    return (eta / math.pi) / (x * x + eta * eta)


def _dipole_vector(dip: DipoleOrientation) -> np.ndarray:
    # (k_hat, p_hat, z) frame
    st = math.sin(dip.theta)
    return dip.mu * np.array([st * math.cos(dip.phi), st * math.sin(dip.phi), math.cos(dip.theta)])


def _natural_scale(model: CouplingModel, consts: PhysicalConstants) -> float:
    a = model.lattice.a
    return 4.0 * math.pi * consts.coulomb_factor * model.dipole.mu**2 * model.E_ex / (
        2.0 * a * a * consts.hbar_c
    )


def _broadened_rates(
    model: CouplingModel, etas: Sequence[float], q_max: float, n_points: int, consts: PhysicalConstants
) -> np.ndarray:
    n_intervals = n_points + (n_points % 2)
    qz = np.linspace(0.0, q_max, n_intervals + 1)
    k = model.k
    qvec = np.stack([np.full_like(qz, k), np.zeros_like(qz), qz], axis=-1)
    pol = np.zeros_like(qz)
    # at k = 0 the q = 0 endpoint has zero weight (hbar c q = 0)
    live = (k * k + qz * qz) > 0.0
    pol[live] = polarization_sum(_dipole_vector(model.dipole), qvec[live])
    e_ph = consts.hbar_c * np.sqrt(k * k + qz * qz)
    # |<f|H_I|i>|^2 (L/2pi) (2pi/hbar) -> hbar c q P / (2 eps0 a^2), times hbar
    mu2_over_eps0_per_mu2 = 4.0 * math.pi * consts.coulomb_factor
    weight = e_ph * pol * mu2_over_eps0_per_mu2 / (2.0 * model.lattice.a**2)
    detuning = model.E_ex - e_ph
    return np.array([simpson(weight * lorentzian(detuning, eta), x=qz) for eta in etas])


def golden_rule_details(
    model: CouplingModel,
    settings: OracleSettings = OracleSettings(),
    consts: PhysicalConstants = CONSTANTS,
) -> OracleResult:
    settings.check(model.E_ex, consts)
    E_0 = consts.hbar_c * model.k
    if abs(E_0 - model.E_ex) < SINGULAR_BAND * model.E_ex:
        raise OraclePreconditionError(
            f"E_0 = {E_0:.6g} eV lies within {SINGULAR_BAND} E_ex of the light cone"
        )
    q_max = settings.cutoff(model.E_ex, consts)
    etas = tuple(float(e) for e in settings.eta_sequence)
    atol = settings.abs_tol * _natural_scale(model, consts)

    coarse = _broadened_rates(model, etas, q_max, settings.n_points, consts)
    n_used = settings.n_points
    quad_err = 0.0
    raw = coarse
    if settings.refine:
        n_used = 2 * settings.n_points
        raw = _broadened_rates(model, etas, q_max, n_used, consts)
        diffs = np.abs(raw - coarse)
        quad_err = float(diffs.max())
        bad = diffs > settings.quad_rtol * np.abs(raw) + atol
        if np.any(bad):
            raise QuadratureError(
                f"quadrature not converged at n={n_used}: max change {quad_err:.3g} eV"
            )

    limit, extrap_err, resid = _extrapolate(np.array(etas), raw)
    if extrap_err > settings.extrap_rtol * abs(limit) + atol:
        raise ExtrapolationError(
            f"eta -> 0 extrapolation uncertain: estimate {extrap_err:.3g} eV vs limit {limit:.6g} eV"
        )
    return OracleResult(
        rate=float(limit),
        raw=tuple(float(r) for r in raw),
        etas=etas,
        quadrature_error=quad_err,
        extrapolation_error=float(extrap_err),
        fit_residual=float(resid),
        n_points=n_used,
    )


def _extrapolate(etas: np.ndarray, values: np.ndarray) -> Tuple[float, float, float]:
    """Polynomial (<= quadratic) fit in eta evaluated at 0.

    Returns (limit, error estimate, fit residual).  The error estimate is the
    gap to the one-order-lower fit through the smallest etas.
    """
    deg = min(2, len(etas) - 1)
    if deg == 0:
        return float(values[-1]), abs(float(values[-1])), 0.0
    coeffs = np.polyfit(etas, values, deg)
    limit = float(np.polyval(coeffs, 0.0))
    fitted = np.polyval(coeffs, etas)
    resid = float(np.sqrt(np.mean((fitted - values) ** 2))) if len(etas) > deg + 1 else 0.0
    lower = np.polyfit(etas[-deg:], values[-deg:], deg - 1)
    lower_limit = float(np.polyval(lower, 0.0))
    return limit, abs(limit - lower_limit), resid


def golden_rule_rate(
    model: CouplingModel,
    settings: OracleSettings = OracleSettings(),
    consts: PhysicalConstants = CONSTANTS,
) -> float:
    """Extrapolated golden-rule hbar*Gamma (eV)."""
    return golden_rule_details(model, settings, consts).rate


def broadened_rate(
    model: CouplingModel,
    settings: OracleSettings = OracleSettings(),
    consts: PhysicalConstants = CONSTANTS,
) -> float:
    """Golden-rule rate at the single width ``settings.eta`` (no extrapolation)."""
    settings.check(model.E_ex, consts)
    q_max = settings.cutoff(model.E_ex, consts)
    return float(_broadened_rates(model, [settings.eta], q_max, settings.n_points, consts)[0])


@dataclass
class OracleRow:
    theta: float
    phi: float
    E_0: float
    closed_form: Optional[float] = None
    oracle: Optional[float] = None
    relative_error: Optional[float] = None
    error: Optional[str] = None


@dataclass
class OracleTable:
    rows: List[OracleRow] = field(default_factory=list)

    @property
    def max_relative_error(self) -> Optional[float]:
        errs = [r.relative_error for r in self.rows if r.relative_error is not None]
        return max(errs) if errs else None

    @property
    def flagged(self) -> List[OracleRow]:
        return [r for r in self.rows if r.error is not None]


def _sweep_row(args) -> OracleRow:
    from .damping import gamma_exciton  # closed form only compared against, never reused
    from .dispersion import WaveVector2D, exciton_energy

    cfg, mu, theta, phi, e0, settings, consts = args
    row = OracleRow(theta=theta, phi=phi, E_0=e0)
    dip = DipoleOrientation(mu=mu, theta=theta, phi=phi)
    k = e0 / consts.hbar_c
    E_ex = exciton_energy(cfg, WaveVector2D(k, 0.0))
    try:
        closed = gamma_exciton(cfg, dip, E_ex, e0, consts)
        row.closed_form = closed.gamma
        row.oracle = golden_rule_rate(CouplingModel(dip, cfg, E_ex, k), settings, consts)
    except (OracleError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        return row
    if row.closed_form == 0.0:
        row.relative_error = abs(row.oracle) / _natural_scale(CouplingModel(dip, cfg, E_ex, k), consts)
    else:
        row.relative_error = abs(row.oracle - row.closed_form) / abs(row.closed_form)
    return row


def oracle_sweep(
    grid: Sequence[Tuple[float, float, float]],
    cfg: LatticeConfig = LatticeConfig(),
    mu: float = 1.0,
    settings: OracleSettings = OracleSettings(),
    consts: PhysicalConstants = CONSTANTS,
    workers: int = 1,
) -> OracleTable:
    """Compare closed form and oracle at each (theta, phi, E_0) in ``grid``.

    Rows keep grid order regardless of ``workers``.  A failing point is
    recorded in ``row.error`` and the sweep continues.  Where the closed form
    is exactly zero the relative error is taken against the natural rate
    scale mu^2 E_ex / (2 eps0 a^2 hbar c).
    """
    jobs = [(cfg, mu, float(t), float(p), float(e), settings, consts) for t, p, e in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    return OracleTable(rows)

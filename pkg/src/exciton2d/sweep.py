"""Parameter sweeps over the damping rate and the CSV tables they produce."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import io
import math
import os
from typing import Dict, IO, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import DipoleOrientation, LatticeConfig
from .damping import Regime, gamma_exciton, light_cone_bracket
from .dispersion import WaveVector2D, exciton_energy
from .emission import emission_intensity, exciton_population
from .oracle import CouplingModel, OracleError, OracleSettings, golden_rule_rate
from .units import CONSTANTS, PhysicalConstants

DIVERGENT = "DIVERGENT"
FLAGGED = "FLAGGED"

SWEPT_VARIABLES = ("E_0", "phi", "theta")

DEFAULT_RANGES: Dict[str, Tuple[float, float, int]] = {
    "E_0": (0.0, 1.5, 301),
    "phi": (0.0, 2.0 * math.pi, 361),
    "theta": (0.0, math.pi, 181),
}

# figure id -> (swept variable, fixed parameters); angles in rad, E_0 in eV
FIGURES: Dict[str, Tuple[str, Dict[str, float]]] = {
    "2": ("E_0", {"theta": 0.0, "phi": 0.0}),
    "3a": ("E_0", {"theta": math.pi / 4, "phi": 0.0}),
    "3b": ("E_0", {"theta": math.pi / 4, "phi": math.pi / 2}),
    "4": ("E_0", {"theta": math.pi / 2, "phi": 0.0}),
    "5a": ("phi", {"theta": math.pi / 4, "E_0": 0.1}),
    "5b": ("phi", {"theta": math.pi / 4, "E_0": 0.9}),
    "6a": ("phi", {"theta": math.pi / 2, "E_0": 0.1}),
    "6b": ("phi", {"theta": math.pi / 2, "E_0": 0.9}),
    "7a": ("theta", {"phi": math.pi / 2, "E_0": 0.1}),
    "7b": ("theta", {"phi": math.pi / 2, "E_0": 0.9}),
}


@dataclass(frozen=True)
class SweepSpec:
    figure_id: str
    swept_variable: str
    range: Tuple[float, float, int]
    fixed_params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.swept_variable not in SWEPT_VARIABLES:
            raise ValueError(f"swept variable must be one of {SWEPT_VARIABLES}, got {self.swept_variable!r}")
        start, stop, n = self.range
        if not start < stop:
            raise ValueError(f"sweep range needs start < stop, got {start!r}, {stop!r}")
        if int(n) != n or n < 2:
            raise ValueError(f"sweep needs n_samples >= 2, got {n!r}")
        missing = set(SWEPT_VARIABLES) - {self.swept_variable} - set(self.fixed_params)
        if missing:
            raise ValueError(f"fixed parameters missing: {sorted(missing)}")

    @classmethod
    def for_figure(
        cls, figure_id: str, range: Optional[Tuple[float, float, int]] = None
    ) -> "SweepSpec":
        if figure_id not in FIGURES:
            raise ValueError(f"unknown figure {figure_id!r}; choose from {sorted(FIGURES)}")
        var, fixed = FIGURES[figure_id]
        return cls(figure_id, var, range or DEFAULT_RANGES[var], dict(fixed))

    def samples(self) -> np.ndarray:
        start, stop, n = self.range
        return np.linspace(start, stop, int(n))


@dataclass(frozen=True)
class SweepRow:
    swept_var: str
    value: float
    gamma: float  # eV; inf when divergent
    ratio: float
    regime: Regime
    divergent: bool = False
    oracle: Optional[float] = None
    rel_err: Optional[float] = None
    oracle_flag: Optional[str] = None


def _point(spec: SweepSpec, v: float) -> Tuple[float, float, float]:
    p = dict(spec.fixed_params)
    p[spec.swept_variable] = float(v)
    return p["theta"], p["phi"], p["E_0"]


def _band_energy(cfg: LatticeConfig, E_0: float, direction, consts: PhysicalConstants) -> float:
    k = E_0 / consts.hbar_c
    return exciton_energy(cfg, WaveVector2D.along(k, direction))


def _row(args) -> SweepRow:
    spec, cfg, dip, v, step, with_oracle, settings, direction, consts = args
    theta, phi, e0 = _point(spec, v)
    d = replace(dip, theta=theta, phi=phi)
    E_ex = _band_energy(cfg, e0, direction, consts)
    res = gamma_exciton(cfg, d, E_ex, e0, consts)
    divergent = res.divergent
    if spec.swept_variable == "E_0" and not divergent and step > 0:
        # the singularity falls inside (v, v + step]: report this cell as divergent
        nxt = v + step
        if e0 < E_ex and nxt >= _band_energy(cfg, nxt, direction, consts):
            divergent = light_cone_bracket(theta, phi) > 1e-12
    if divergent:
        return SweepRow(spec.swept_variable, float(v), math.inf, math.inf, Regime.SUPERRADIANT, True)
    row = SweepRow(spec.swept_variable, float(v), res.gamma, res.ratio, res.regime)
    if not with_oracle:
        return row
    try:
        oracle = golden_rule_rate(CouplingModel(d, cfg, E_ex, e0 / consts.hbar_c), settings, consts)
    except (OracleError, ValueError) as exc:
        return replace(row, oracle_flag=f"{type(exc).__name__}: {exc}")
    if res.gamma > 0:
        rel = abs(oracle - res.gamma) / res.gamma
    else:
        # zero closed form: compare against the natural rate scale
        scale = 4.0 * math.pi * consts.coulomb_factor * d.mu**2 * E_ex / (2.0 * cfg.a**2 * consts.hbar_c)
        rel = abs(oracle) / scale
    return replace(row, oracle=oracle, rel_err=rel)


def run_sweep(
    spec: SweepSpec,
    cfg: LatticeConfig = LatticeConfig(),
    dip: DipoleOrientation = DipoleOrientation(),
    with_oracle: bool = False,
    oracle_settings: OracleSettings = OracleSettings(),
    direction: Sequence[float] = (1.0, 0.0),
    workers: int = 1,
    consts: PhysicalConstants = CONSTANTS,
) -> List[SweepRow]:
    """Evaluate the damping rate at every sample of ``spec``.

    ``dip`` supplies the dipole magnitude; its angles are overridden by the
    sweep.  For E_0 sweeps the sample whose cell (v, v + step] contains the
    light-cone crossing is reported as divergent when the rate actually
    diverges there.  Output is identical for any ``workers``.
    """
    values = spec.samples()
    step = float(values[1] - values[0])
    jobs = [
        (spec, cfg, dip, float(v), step, with_oracle, oracle_settings, tuple(direction), consts)
        for v in values
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row, jobs))
    return [_row(j) for j in jobs]


def fmt_float(x: float) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def _write_text(text: str, destination: Union[str, os.PathLike, IO[str], None]) -> int:
    data = text.encode("utf-8")
    if destination is None:
        return len(data)
    if hasattr(destination, "write"):
        destination.write(text)
        return len(data)
    with open(destination, "wb") as fh:
        fh.write(data)
    return len(data)


def format_table(rows: Sequence[SweepRow]) -> str:
    with_oracle = any(r.oracle is not None or r.oracle_flag is not None for r in rows)
    header = ["swept_var", "value", "gamma_ev", "ratio", "regime"]
    if with_oracle:
        header += ["oracle_ev", "rel_err"]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        if r.divergent:
            cells = [r.swept_var, fmt_float(r.value), DIVERGENT, DIVERGENT, str(r.regime)]
        else:
            cells = [r.swept_var, fmt_float(r.value), fmt_float(r.gamma), fmt_float(r.ratio), str(r.regime)]
        if with_oracle:
            if r.oracle is not None:
                cells += [fmt_float(r.oracle), fmt_float(r.rel_err)]
            else:
                cells += [FLAGGED, FLAGGED]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def write_table(rows: Sequence[SweepRow], destination) -> int:
    """Write sweep rows as CSV (UTF-8, LF); returns the byte count."""
    return _write_text(format_table(rows), destination)


@dataclass(frozen=True)
class EmissionRow:
    t: float
    population: float
    intensity: float


def emission_report(
    cfg: LatticeConfig,
    dip: DipoleOrientation,
    E_ex: float,
    E_0: float,
    n_sites: int,
    times: Sequence[float],
    z: float,
    gamma: Optional[float] = None,
    consts: PhysicalConstants = CONSTANTS,
) -> List[EmissionRow]:
    """Population and intensity at distance ``z`` for each time in ``times``.

    ``gamma`` (eV) defaults to the closed-form damping rate.  Rows before the
    retarded arrival have population 1 and zero intensity.
    """
    if gamma is None:
        res = gamma_exciton(cfg, dip, E_ex, E_0, consts)
        if res.divergent:
            raise ValueError("damping rate diverges at this E_0; no finite emission envelope")
        gamma = res.gamma
    rows = []
    for t in times:
        s = emission_intensity(cfg, dip, E_ex, E_0, gamma, n_sites, float(t), z, consts=consts)
        pop = exciton_population(1.0, gamma, float(t), z, consts)
        rows.append(EmissionRow(float(t), pop, s.intensity))
    return rows


def write_emission_table(rows: Sequence[EmissionRow], destination) -> int:
    buf = io.StringIO()
    buf.write("t_s,population,intensity_v2_per_a2\n")
    for r in rows:
        buf.write(f"{fmt_float(r.t)},{fmt_float(r.population)},{fmt_float(r.intensity)}\n")
    return _write_text(buf.getvalue(), destination)

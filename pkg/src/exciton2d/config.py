"""Lattice and dipole configuration, validation, and the key = value config file."""
from __future__ import annotations

from dataclasses import dataclass, fields
import math
import os
from typing import List, Tuple


@dataclass(frozen=True)
class LatticeConfig:
    """Square optical lattice with nearest-neighbour excitation hopping.

    Lengths in Angstrom, energies in eV.  ``J`` defaults to zero, which gives
    a flat band E_ex(k) = E_A.
    """

    a: float = 1000.0
    N_x: int = 1
    N_y: int = 1
    E_A: float = 1.0
    J: float = 0.0

    @property
    def n_sites(self) -> int:
        return self.N_x * self.N_y

    @property
    def zone_edge_k(self) -> float:
        return math.pi / self.a


@dataclass(frozen=True)
class DipoleOrientation:
    """Transition dipole of magnitude ``mu`` (e*Angstrom).

    ``theta`` is the tilt from the lattice normal z, ``phi`` the angle between
    the in-plane wavevector and the in-plane dipole component.
    """

    mu: float = 1.0
    theta: float = 0.0
    phi: float = 0.0

    @property
    def mu_parallel(self) -> float:
        return self.mu * math.sin(self.theta)

    @property
    def mu_z(self) -> float:
        return self.mu * math.cos(self.theta)

    def components(self) -> Tuple[float, float, float]:
        """Dipole vector in the (k_hat, p_hat, z) frame, p_hat = z x k_hat."""
        mp = self.mu_parallel
        return (mp * math.cos(self.phi), mp * math.sin(self.phi), self.mu_z)


class ConfigError(ValueError):
    """Raised with every violated invariant listed in ``violations``."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def config_violations(cfg: LatticeConfig, dip: DipoleOrientation) -> List[str]:
    out = []
    if not (cfg.a > 0):
        out.append(f"a: must be > 0, got {cfg.a!r}")
    if int(cfg.N_x) != cfg.N_x or cfg.N_x < 1:
        out.append(f"N_x: must be an integer >= 1, got {cfg.N_x!r}")
    if int(cfg.N_y) != cfg.N_y or cfg.N_y < 1:
        out.append(f"N_y: must be an integer >= 1, got {cfg.N_y!r}")
    if not (cfg.E_A > 0):
        out.append(f"E_A: must be > 0, got {cfg.E_A!r}")
    if not math.isfinite(cfg.J):
        out.append(f"J: must be finite, got {cfg.J!r}")
    elif not (cfg.E_A - 4.0 * abs(cfg.J) > 0):
        out.append(
            f"J: band bottom E_A - 4|J| = {cfg.E_A - 4.0 * abs(cfg.J):g} eV must stay > 0, "
            f"got J={cfg.J!r}"
        )
    if not (dip.mu > 0):
        out.append(f"mu: must be > 0, got {dip.mu!r}")
    if not (0.0 <= dip.theta <= math.pi):
        out.append(f"theta: must lie in [0, pi], got {dip.theta!r}")
    if not (0.0 <= dip.phi < 2.0 * math.pi):
        out.append(f"phi: must lie in [0, 2pi), got {dip.phi!r}")
    return out


def validate_config(
    cfg: LatticeConfig, dip: DipoleOrientation
) -> Tuple[LatticeConfig, DipoleOrientation]:
    """Return ``(cfg, dip)`` unchanged if valid, else raise :class:`ConfigError`."""
    violations = config_violations(cfg, dip)
    if violations:
        raise ConfigError(violations)
    return cfg, dip


# config-file key -> (target, field name, parser)
CONFIG_KEYS = {
    "a_angstrom": ("lattice", "a", float),
    "n_x": ("lattice", "N_x", int),
    "n_y": ("lattice", "N_y", int),
    "e_a_ev": ("lattice", "E_A", float),
    "j_ev": ("lattice", "J", float),
    "mu_e_angstrom": ("dipole", "mu", float),
    "theta_rad": ("dipole", "theta", float),
    "phi_rad": ("dipole", "phi", float),
}

_FIELD_TO_KEY = {(t, f): k for k, (t, f, _) in CONFIG_KEYS.items()}


def parse_config_text(
    text: str, source: str = "<config>"
) -> Tuple[LatticeConfig, DipoleOrientation]:
    """Parse ``key = value`` lines; omitted keys take the default lattice values.

    Raises :class:`ConfigError` whose messages carry ``source:line`` locations.
    """
    values = {"lattice": {}, "dipole": {}}
    lines = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in CONFIG_KEYS:
            errors.append(f"{source}:{lineno}: unknown key {key!r}")
            continue
        target, name, conv = CONFIG_KEYS[key]
        if name in values[target]:
            errors.append(f"{source}:{lineno}: duplicate key {key!r}")
            continue
        try:
            values[target][name] = conv(value)
        except ValueError:
            errors.append(f"{source}:{lineno}: cannot parse {key} value {value!r}")
            continue
        lines[(target, name)] = lineno
    if errors:
        raise ConfigError(errors)

    cfg = LatticeConfig(**values["lattice"])
    dip = DipoleOrientation(**values["dipole"])

    located = []
    for msg in config_violations(cfg, dip):
        name = msg.split(":", 1)[0]
        target = "lattice" if name in {f.name for f in fields(LatticeConfig)} else "dipole"
        lineno = lines.get((target, name))
        if lineno is None and name == "J":
            lineno = lines.get(("lattice", "E_A"))
        key = _FIELD_TO_KEY[(target, name)]
        where = f"{source}:{lineno}" if lineno is not None else f"{source}: (default)"
        located.append(f"{where}: {key}: {msg.split(': ', 1)[1]}")
    if located:
        raise ConfigError(located)
    return cfg, dip


def parse_config(path: "str | os.PathLike[str]") -> Tuple[LatticeConfig, DipoleOrientation]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text, source=os.fspath(path))

import ast
import dataclasses
import inspect
import math
import textwrap

import numpy as np
import pytest

from exciton2d import oracle
from exciton2d.config import DipoleOrientation, LatticeConfig
from exciton2d.damping import gamma_exciton
from exciton2d.oracle import (
    CouplingModel,
    OraclePreconditionError,
    OracleSettings,
    QuadratureError,
    broadened_rate,
    golden_rule_details,
    golden_rule_rate,
    oracle_sweep,
    polarization_sum,
)

CFG = LatticeConfig()
HBAR_C = 1973.269804
SCALE = 4.5850616934997704e-08  # mu^2 E_ex / (2 eps0 a^2 hbar c) at 1 eV, 1000 A


def model(theta, phi, e0, e_ex=1.0):
    return CouplingModel(DipoleOrientation(1.0, theta, phi), CFG, e_ex, e0 / HBAR_C)


def test_polarization_transverse_and_longitudinal():
    assert polarization_sum([0, 2.0, 0], [1.0, 0, 3.0]) == pytest.approx(4.0)
    assert polarization_sum([1.0, 0, 3.0], [2.0, 0, 6.0]) == pytest.approx(0.0, abs=1e-15)


def test_polarization_componentwise():
    rng = np.random.default_rng(30)
    th, ph, mu = math.pi / 4, 0.0, 1.3
    mpar, mz = mu * math.sin(th), mu * math.cos(th)
    mvec = [mpar * math.cos(ph), mpar * math.sin(ph), mz]
    for k, qz in rng.uniform(0.01, 2.0, (200, 2)):
        q2 = k * k + qz * qz
        expected = mu * mu - (mpar * k * math.cos(ph) + mz * qz) ** 2 / q2
        assert polarization_sum(mvec, [k, 0.0, qz]) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_polarization_bounds():
    rng = np.random.default_rng(31)
    mu = rng.normal(size=(500, 3))
    q = rng.normal(size=(500, 3))
    p = polarization_sum(mu, q)
    assert np.all(p >= -1e-12) and np.all(p <= np.sum(mu * mu, axis=1) + 1e-12)


def test_polarization_zero_q():
    with pytest.raises(ValueError):
        polarization_sum([1, 0, 0], [0, 0, 0])


def test_matches_closed_form_normal_dipole():
    g = gamma_exciton(CFG, DipoleOrientation(1.0, 0.0, 0.0), 1.0, 0.5).gamma
    assert golden_rule_rate(model(0.0, 0.0, 0.5)) == pytest.approx(g, rel=1e-2)


def test_zero_beyond_light_cone():
    res = golden_rule_details(model(0.3, 0.2, 1.2))
    assert abs(res.rate) < 1e-6 * SCALE
    # raw broadened values are O(eta) and shrink with eta
    assert res.raw[0] > res.raw[1] > res.raw[2] > 0


def test_dark_point_fig3a():
    rate = golden_rule_rate(model(math.pi / 4, 0.0, 1 / math.sqrt(2)))
    assert abs(rate) < 1e-6 * SCALE


def test_no_quantisation_length():
    # the integrand has no L/V parameter anywhere
    for cls in (CouplingModel, OracleSettings):
        names = {f.name.lower() for f in dataclasses.fields(cls)}
        assert not names & {"l", "length", "volume", "v"}
    tree = ast.parse(textwrap.dedent(inspect.getsource(oracle._broadened_rates)))
    names = {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)}
    names |= {n.attr for n in ast.walk(tree) if isinstance(n, ast.Attribute)}
    names |= {a.arg for a in ast.walk(tree) if isinstance(a, ast.arg)}
    assert not names & {"L", "V", "length", "volume", "n_sites"}


def test_resolution_convergence():
    m = model(math.pi / 3, 0.4, 0.6)
    base = OracleSettings()
    res = golden_rule_details(m, base)
    finer = golden_rule_details(m, dataclasses.replace(base, n_points=400_000))
    # one more doubling changes the result by less than the reported error
    assert abs(finer.rate - res.rate) < max(res.quadrature_error, 1e-12 * SCALE)


def test_eta_extrapolation_consistency():
    res = golden_rule_details(model(math.pi / 3, 0.4, 0.6))
    spread = abs(res.raw[0] - res.raw[-1])
    assert abs(res.rate - res.raw[-1]) < 3 * spread
    assert res.extrapolation_error < 1e-3 * abs(res.rate)


def test_broadened_rate_approaches_limit():
    m = model(0.0, 0.0, 0.5)
    limit = golden_rule_rate(m)
    errs = [abs(broadened_rate(m, OracleSettings(eta=eta)) - limit) for eta in (4e-3, 2e-3, 1e-3)]
    assert errs[0] > errs[1] > errs[2]


def test_underresolved_quadrature_detected():
    with pytest.raises(QuadratureError):
        golden_rule_details(model(math.pi / 3, 0.4, 0.6), OracleSettings(n_points=500))


@pytest.mark.parametrize(
    "settings",
    [
        OracleSettings(eta=0.0),
        OracleSettings(q_z_max=2.0 / HBAR_C),
        OracleSettings(eta_sequence=(1e-4, 5e-4)),
        OracleSettings(eta_sequence=()),
    ],
)
def test_invalid_settings(settings):
    with pytest.raises(OraclePreconditionError):
        golden_rule_rate(model(0.0, 0.0, 0.5), settings)


def test_singular_band_rejected():
    with pytest.raises(OraclePreconditionError):
        golden_rule_rate(model(0.0, 0.0, 0.99))


def test_sweep_empty():
    table = oracle_sweep([])
    assert table.rows == [] and table.max_relative_error is None


def test_sweep_flags_singular_row():
    grid = [(0.0, 0.0, 0.3), (0.0, 0.0, 0.999), (math.pi / 2, 0.0, 0.3)]
    table = oracle_sweep(grid)
    assert [r.E_0 for r in table.rows] == [0.3, 0.999, 0.3]
    assert table.rows[1].error and "OraclePreconditionError" in table.rows[1].error
    assert table.rows[1].relative_error is None
    assert len(table.flagged) == 1
    assert table.max_relative_error < 1e-2


def test_sweep_parallel_matches_serial():
    grid = [(t, p, 0.4) for t in (0.0, 1.0) for p in (0.0, 2.0)]
    serial = oracle_sweep(grid)
    parallel = oracle_sweep(grid, workers=2)
    assert serial.rows == parallel.rows

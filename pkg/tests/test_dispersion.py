import math

import numpy as np
import pytest

from exciton2d.config import LatticeConfig
from exciton2d.dispersion import (
    AsymmetricCouplingError,
    WaveVector2D,
    band_point,
    bz_grid,
    exciton_energy,
    exciton_energy_grid,
    general_dispersion,
    lattice_fourier_sum,
    nearest_neighbor_couplings,
)

A = 1000.0


def random_k(rng, n, span=3.0):
    return [WaveVector2D(*rng.uniform(-span * math.pi / A, span * math.pi / A, 2)) for _ in range(n)]


def test_flat_band():
    cfg = LatticeConfig(E_A=1.0, J=0.0)
    rng = np.random.default_rng(0)
    for k in random_k(rng, 20):
        assert exciton_energy(cfg, k) == 1.0


def test_band_bottom_and_corner():
    cfg = LatticeConfig(E_A=1.0, J=0.01)
    assert exciton_energy(cfg, WaveVector2D(0.0, 0.0)) == pytest.approx(0.96, abs=1e-15)
    corner = WaveVector2D(math.pi / A, math.pi / A)
    assert exciton_energy(cfg, corner) == pytest.approx(1.04, abs=1e-15)


def test_evenness_and_periodicity():
    cfg = LatticeConfig(E_A=1.0, J=0.013)
    rng = np.random.default_rng(2)
    g = 2 * math.pi / A
    for k in random_k(rng, 200):
        e = exciton_energy(cfg, k)
        assert exciton_energy(cfg, -k) == pytest.approx(e, abs=1e-14)
        m, n = rng.integers(-5, 6, 2)
        shifted = WaveVector2D(k.k_x + m * g, k.k_y + n * g)
        assert exciton_energy(cfg, shifted) == pytest.approx(e, abs=1e-13)
        assert cfg.E_A - 4 * abs(cfg.J) <= e <= cfg.E_A + 4 * abs(cfg.J)


def test_vectorised_matches_scalar():
    cfg = LatticeConfig(E_A=1.2, J=-0.02)
    rng = np.random.default_rng(3)
    ks = random_k(rng, 50)
    grid = exciton_energy_grid(cfg, [k.k_x for k in ks], [k.k_y for k in ks])
    assert np.allclose(grid, [exciton_energy(cfg, k) for k in ks], rtol=0, atol=1e-15)


def test_general_matches_nearest_neighbour():
    cfg = LatticeConfig(E_A=1.0, J=0.01)
    couplings = nearest_neighbor_couplings(cfg)
    assert sorted(j for _, j in couplings) == [-0.01] * 4
    rng = np.random.default_rng(4)
    for k in random_k(rng, 100):
        assert general_dispersion(cfg, couplings, k) == pytest.approx(exciton_energy(cfg, k), abs=1e-14)


def test_empty_couplings():
    cfg = LatticeConfig(E_A=1.3, J=0.05)
    assert general_dispersion(cfg, [], WaveVector2D(1e-3, -2e-3)) == 1.3


def test_asymmetric_couplings_rejected():
    cfg = LatticeConfig()
    with pytest.raises(AsymmetricCouplingError):
        general_dispersion(cfg, [((A, 0.0), -0.01), ((-A, 0.0), -0.02)], WaveVector2D(0, 0))
    with pytest.raises(AsymmetricCouplingError):
        general_dispersion(cfg, [((A, 0.0), -0.01)], WaveVector2D(0, 0))


def test_symmetric_couplings_give_real_sum():
    cfg = LatticeConfig(E_A=1.0)
    rng = np.random.default_rng(5)
    couplings = []
    for _ in range(6):
        r = tuple(float(v) for v in rng.integers(-3, 4, 2) * A)
        if r == (0.0, 0.0):
            continue
        j = float(rng.normal(0, 0.01))
        couplings += [(r, j), ((-r[0], -r[1]), j)]
    for k in random_k(rng, 50):
        s = lattice_fourier_sum(cfg, couplings, k)
        assert abs(s.imag) <= 1e-12 * abs(s.real)
        assert general_dispersion(cfg, couplings, k) == s.real


def test_bz_grid_two_by_two():
    pts = bz_grid(LatticeConfig(a=A, N_x=2, N_y=2))
    assert len(pts) == 4
    assert sorted({p.k_x for p in pts}) == [0.0, pytest.approx(math.pi / A)]


def test_bz_grid_folds_duplicate_edge():
    pts = bz_grid(LatticeConfig(a=A, N_x=4, N_y=1))
    kx = [p.k_x for p in pts]
    expected = [-math.pi / (2 * A), 0.0, math.pi / (2 * A), math.pi / A]
    assert kx == pytest.approx(expected)


def test_bz_grid_ten_by_ten():
    cfg = LatticeConfig(a=A, N_x=10, N_y=10)
    pts = bz_grid(cfg)
    assert len(pts) == 100
    kmax = max(max(abs(p.k_x), abs(p.k_y)) for p in pts)
    assert kmax == pytest.approx(math.pi / 1000.0, rel=1e-15)
    # row-major: k_x outer
    assert pts[0].k_x == pts[9].k_x and pts[0].k_y < pts[1].k_y


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 11])
def test_bz_grid_counts_and_zone(n):
    pts = bz_grid(LatticeConfig(a=A, N_x=n, N_y=n + 1))
    assert len(pts) == n * (n + 1)
    for p in pts:
        assert -math.pi / A < p.k_x <= math.pi / A * (1 + 1e-15)
        assert -math.pi / A < p.k_y <= math.pi / A * (1 + 1e-15)


def test_folding():
    k = WaveVector2D(3 * math.pi / A, -1.5 * math.pi / A).folded(A)
    assert k.k_x == pytest.approx(math.pi / A)
    assert k.k_y == pytest.approx(0.5 * math.pi / A)


def test_band_point():
    cfg = LatticeConfig()
    bp = band_point(cfg, WaveVector2D.from_polar(1e-4, 0.3))
    assert bp.energy == 1.0
    assert bp.photon_line_energy == pytest.approx(1973.269804e-4)

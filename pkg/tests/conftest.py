"""Shared fixtures and random admissible-data generators."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from dcvortex import geometry as geo
from dcvortex import higgs
from dcvortex.geometry import TorusGrid
from dcvortex.higgs import MetricPair, QuadrupletSpec


@pytest.fixture(scope="session")
def charts():
    return geo.p1_quadrature()


def random_hermitian_log(grid: TorusGrid, degrees, rng, amplitude=0.25, modes=2):
    """Band-limited Hermitian matrix field supported on the degree mask."""
    r = len(degrees)
    x, y = grid.coordinates()
    out = np.zeros((grid.n, grid.n, r, r), dtype=np.complex128)
    for p in range(-modes, modes + 1):
        for q in range(-modes, modes + 1):
            coeff = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
            out += np.exp(2j * np.pi * (p * x + q * y))[..., None, None] * coeff
    out = 0.5 * (out + geo.adjoint_values(out))
    mask = higgs.degree_mask(degrees, degrees)
    out[..., ~mask] = 0
    norm = geo.sup_norm(out)
    return out * (amplitude / norm) if norm > 0 else out


def random_metric_pair(q: QuadrupletSpec, rng, amplitude=0.25) -> MetricPair:
    s1 = random_hermitian_log(q.grid, q.block_degrees1, rng, amplitude)
    s2 = random_hermitian_log(q.grid, q.block_degrees2, rng, amplitude)
    return MetricPair(
        geo.FieldOnTorus(q.grid, geo.FUNCTION, higgs.expm_hermitian(s1)),
        geo.FieldOnTorus(q.grid, geo.FUNCTION, higgs.expm_hermitian(s2)),
    ).validate()


def _const10(grid, matrix):
    return geo.constant_field(grid, matrix, geo.FORM_10)


def random_admissible_quadruplet(grid: TorusGrid, rng) -> QuadrupletSpec:
    """Random quadruplet satisfying all defining constraints exactly.

    Draws from three families: rank-(1,1) with a single coupling and
    matched scalar Higgs fields, coupled rank-(2,2) with complementary
    nilpotent couplings, and decoupled data with arbitrary degrees.
    """
    kind = rng.integers(3)
    if kind == 0:
        d = int(rng.integers(-2, 3))
        t = complex(rng.standard_normal() + 1j * rng.standard_normal())
        use_psi = bool(rng.random() < 0.5)
        coupling = complex(rng.standard_normal() + 1j * rng.standard_normal())
        phi = [[coupling]] if not use_psi else [[0.0]]
        psi = [[coupling]] if use_psi else [[0.0]]
        return QuadrupletSpec(
            grid, (d,), (d,),
            _const10(grid, [[t]]), _const10(grid, [[t]]),
            geo.constant_field(grid, phi), geo.constant_field(grid, psi),
        ).validate()
    if kind == 1:
        d = int(rng.integers(-1, 2))
        p, q_ = rng.standard_normal(2)
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        theta1 = np.diag([p, q_]).astype(complex)
        theta2 = np.diag([q_, p]).astype(complex)
        phi = np.array([[0, a], [0, 0]], dtype=complex)
        psi = np.array([[0, b], [0, 0]], dtype=complex)
        return QuadrupletSpec(
            grid, (d, d), (d, d),
            _const10(grid, theta1), _const10(grid, theta2),
            geo.constant_field(grid, phi), geo.constant_field(grid, psi),
        ).validate()
    d1 = tuple(int(v) for v in rng.integers(-2, 3, size=int(rng.integers(1, 3))))
    d2 = tuple(int(v) for v in rng.integers(-2, 3, size=int(rng.integers(1, 3))))
    t1 = np.diag(rng.standard_normal(len(d1)) + 1j * rng.standard_normal(len(d1)))
    t2 = np.diag(rng.standard_normal(len(d2)) + 1j * rng.standard_normal(len(d2)))
    return QuadrupletSpec(
        grid, d1, d2,
        _const10(grid, t1), _const10(grid, t2),
        geo.zero_field(grid, len(d2), len(d1)),
        geo.zero_field(grid, len(d1), len(d2)),
    ).validate()


def random_fraction(rng, max_num=8, max_den=6) -> Fraction:
    num = int(rng.integers(-max_num, max_num + 1))
    den = int(rng.integers(1, max_den + 1))
    return Fraction(num, den)


def psi_entry(grid: TorusGrid) -> QuadrupletSpec:
    """The stable catalog entry: trivial line bundles, psi = 1."""
    return QuadrupletSpec(
        grid, (0,), (0,),
        geo.zero_field(grid, 1, 1, geo.FORM_10),
        geo.zero_field(grid, 1, 1, geo.FORM_10),
        geo.zero_field(grid, 1, 1),
        geo.constant_field(grid, [[1.0]]),
    ).validate()


def phi_entry(grid: TorusGrid) -> QuadrupletSpec:
    """The unstable catalog entry: trivial line bundles, phi = 1."""
    return QuadrupletSpec(
        grid, (0,), (0,),
        geo.zero_field(grid, 1, 1, geo.FORM_10),
        geo.zero_field(grid, 1, 1, geo.FORM_10),
        geo.constant_field(grid, [[1.0]]),
        geo.zero_field(grid, 1, 1),
    ).validate()

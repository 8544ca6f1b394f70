"""Curvature, adjoints, brackets and the quadruplet constraints."""

import numpy as np
import pytest

from dcvortex import geometry as geo
from dcvortex import higgs
from dcvortex.errors import ConstraintError, DomainError

from conftest import random_admissible_quadruplet, random_metric_pair


def degree_from_curvature(F):
    lam = geo.lambda_contract(F).trace()
    return (1j / (2 * np.pi)) * geo.integrate(lam)[0, 0]


class TestChernCurvature:
    def test_flat_background(self):
        g = geo.TorusGrid(16)
        F = higgs.chern_curvature(geo.identity_field(g, 1), (0,))
        assert F.sup_norm() == 0.0

    def test_background_only_rank1_degree_d(self):
        # h = Id, degree d: F = -2 pi i d omega, i.e. coefficient pi d
        g = geo.TorusGrid(16)
        F = higgs.chern_curvature(geo.identity_field(g, 1), (3,))
        assert np.abs(F.values - 3 * np.pi).max() < 1e-13
        assert abs(degree_from_curvature(F) - 3) < 1e-12

    def test_exponential_metric_matches_dbar_del(self):
        g = geo.TorusGrid(32)
        x, _ = g.coordinates()
        u = 0.1 * np.cos(2 * np.pi * x)[..., None, None] + 0j
        h = geo.FieldOnTorus(g, geo.FUNCTION, np.exp(u))
        F = higgs.chern_curvature(h, (0,))
        oracle = geo.dbar(geo.del_(geo.FieldOnTorus(g, geo.FUNCTION, u)))
        assert np.abs(F.values - oracle.values).max() < 1e-11
        assert abs(degree_from_curvature(F)) < 1e-10

    def test_exponential_metric_against_stencil(self):
        # independent finite-difference route: F = dbar del u evaluated with
        # 4th-order periodic stencils instead of the FFT
        from test_geometry import stencil_derivative

        g = geo.TorusGrid(64)
        x, y = g.coordinates()
        u = (0.1 * np.cos(2 * np.pi * x) - 0.05 * np.sin(2 * np.pi * y))[..., None, None] + 0j
        h = geo.FieldOnTorus(g, geo.FUNCTION, np.exp(u))
        F = higgs.chern_curvature(h, (0,))
        dz = lambda v: 0.5 * (stencil_derivative(v, g.n, 0) - 1j * stencil_derivative(v, g.n, 1))
        dzbar = lambda v: 0.5 * (stencil_derivative(v, g.n, 0) + 1j * stencil_derivative(v, g.n, 1))
        oracle = -dzbar(dz(u))  # dbar(w dz) carries coefficient -d_zbar w
        assert np.abs(F.values - oracle).max() < 1e-4

    def test_degree_for_random_metric(self):
        rng = np.random.default_rng(5)
        g = geo.TorusGrid(32)
        for degrees in [(0,), (2,), (-1, -1), (1, 1)]:
            q_degrees = degrees
            from conftest import random_hermitian_log

            s = random_hermitian_log(g, q_degrees, rng)
            h = geo.FieldOnTorus(g, geo.FUNCTION, higgs.expm_hermitian(s))
            F = higgs.chern_curvature(h, q_degrees)
            assert abs(degree_from_curvature(F) - sum(q_degrees)) < 1e-8

    def test_nonpositive_metric_rejected(self):
        g = geo.TorusGrid(8)
        bad = geo.constant_field(g, [[-1.0]])
        with pytest.raises(DomainError):
            higgs.chern_curvature(bad, (0,))


class TestAdjoints:
    def test_scalar_higgs_adjoint(self):
        g = geo.TorusGrid(8)
        c = 1.5 - 0.5j
        theta = geo.constant_field(g, [[c]], geo.FORM_10)
        dag = higgs.higgs_adjoint(theta, geo.identity_field(g, 1))
        assert dag.form_type == geo.FORM_01
        assert np.abs(dag.values - np.conj(c)).max() < 1e-15

    def test_defining_property_random(self):
        # h(theta s, t) = h(s, theta^dag t) pointwise for random data
        rng = np.random.default_rng(2)
        g = geo.TorusGrid(8)
        t_coeff = rng.standard_normal((g.n, g.n, 2, 2)) + 1j * rng.standard_normal((g.n, g.n, 2, 2))
        theta = geo.FieldOnTorus(g, geo.FORM_10, t_coeff)
        s_log = 0.3 * (lambda m: 0.5 * (m + geo.adjoint_values(m)))(
            rng.standard_normal((g.n, g.n, 2, 2)) + 1j * rng.standard_normal((g.n, g.n, 2, 2))
        )
        h = geo.FieldOnTorus(g, geo.FUNCTION, higgs.expm_hermitian(s_log))
        dag = higgs.higgs_adjoint(theta, h)
        s = rng.standard_normal((g.n, g.n, 2, 1)) + 1j * rng.standard_normal((g.n, g.n, 2, 1))
        t = rng.standard_normal((g.n, g.n, 2, 1)) + 1j * rng.standard_normal((g.n, g.n, 2, 1))
        adj = geo.adjoint_values
        lhs = adj(t) @ h.values @ (t_coeff @ s)
        rhs = adj(dag.values @ t) @ h.values @ s
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_nilpotent_rank2_frozen_value(self):
        # defining-property oracle for theta = [[0,1],[0,0]] dz, h = diag(2,1)
        g = geo.TorusGrid(8)
        theta = geo.constant_field(g, [[0, 1], [0, 0]], geo.FORM_10)
        h = geo.constant_field(g, np.diag([2.0, 1.0]))
        dag = higgs.higgs_adjoint(theta, h)
        expected = np.array([[0, 0], [2.0, 0]])
        assert np.abs(dag.values - expected).max() < 1e-14

    def test_morphism_adjoint_identity(self):
        g = geo.TorusGrid(8)
        f = geo.identity_field(g, 2)
        fstar = higgs.morphism_adjoint(f, geo.identity_field(g, 2), geo.identity_field(g, 2))
        assert np.abs(fstar.values - np.eye(2)).max() == 0.0

    def test_morphism_adjoint_scalar_metrics(self):
        # f = c, h1 = e^u1, h2 = e^u2 (f: E1 -> E2): f* = conj(c) e^(u2-u1)
        g = geo.TorusGrid(16)
        c = 0.7 + 0.2j
        x, y = g.coordinates()
        u1 = 0.3 * np.cos(2 * np.pi * x)[..., None, None] + 0j
        u2 = -0.2 * np.sin(2 * np.pi * y)[..., None, None] + 0j
        h1 = geo.FieldOnTorus(g, geo.FUNCTION, np.exp(u1))
        h2 = geo.FieldOnTorus(g, geo.FUNCTION, np.exp(u2))
        f = geo.constant_field(g, [[c]])
        fstar = higgs.morphism_adjoint(f, h1, h2)
        assert np.abs(fstar.values - np.conj(c) * np.exp(u2 - u1)).max() < 1e-13

    def test_morphism_defining_property_and_involution(self):
        rng = np.random.default_rng(9)
        g = geo.TorusGrid(8)
        fv = rng.standard_normal((g.n, g.n, 1, 2)) + 1j * rng.standard_normal((g.n, g.n, 1, 2))
        f = geo.FieldOnTorus(g, geo.FUNCTION, fv)  # psi-shaped: E2 -> E1
        from conftest import random_hermitian_log

        h1 = geo.FieldOnTorus(g, geo.FUNCTION, higgs.expm_hermitian(random_hermitian_log(g, (0,), rng)))
        h2 = geo.FieldOnTorus(g, geo.FUNCTION, higgs.expm_hermitian(random_hermitian_log(g, (0, 0), rng)))
        fstar = higgs.morphism_adjoint(f, h2, h1)
        adj = geo.adjoint_values
        s = rng.standard_normal((g.n, g.n, 2, 1)) + 0j
        t = rng.standard_normal((g.n, g.n, 1, 1)) + 0j
        lhs = adj(t) @ h1.values @ (fv @ s)           # h1(f s, t)
        rhs = adj(fstar.values @ t) @ h2.values @ s   # h2(s, f* t)
        assert np.abs(lhs - rhs).max() < 1e-12
        fss = higgs.morphism_adjoint(fstar, h1, h2)
        assert np.abs(fss.values - fv).max() < 1e-12


class TestBracket:
    def test_rank1_bracket_vanishes(self):
        g = geo.TorusGrid(8)
        theta = geo.constant_field(g, [[2.0 + 1j]], geo.FORM_10)
        dag = higgs.higgs_adjoint(theta, geo.constant_field(g, [[3.0]]))
        br = higgs.bracket_theta(theta, dag)
        assert br.sup_norm() < 1e-15

    def test_zero_theta(self):
        g = geo.TorusGrid(8)
        z = geo.zero_field(g, 2, 2, geo.FORM_10)
        br = higgs.bracket_theta(z, higgs.higgs_adjoint(z, geo.identity_field(g, 2)))
        assert br.sup_norm() == 0.0

    def test_trace_free_and_integral_zero(self):
        rng = np.random.default_rng(3)
        g = geo.TorusGrid(16)
        tv = rng.standard_normal((g.n, g.n, 2, 2)) + 1j * rng.standard_normal((g.n, g.n, 2, 2))
        theta = geo.FieldOnTorus(g, geo.FORM_10, tv)
        from conftest import random_hermitian_log

        h = geo.FieldOnTorus(g, geo.FUNCTION, higgs.expm_hermitian(random_hermitian_log(g, (0, 0), rng)))
        br = higgs.bracket_theta(theta, higgs.higgs_adjoint(theta, h))
        assert br.trace().sup_norm() < 1e-12
        assert np.abs(geo.integrate(geo.lambda_contract(br).trace())).max() < 1e-10

    def test_rank1_positivity(self):
        # i Lambda(theta ^ theta^dag) = 2 |T|^2 >= 0 pointwise in rank 1
        rng = np.random.default_rng(4)
        g = geo.TorusGrid(8)
        tv = rng.standard_normal((g.n, g.n, 1, 1)) + 1j * rng.standard_normal((g.n, g.n, 1, 1))
        theta = geo.FieldOnTorus(g, geo.FORM_10, tv)
        dag = higgs.higgs_adjoint(theta, geo.identity_field(g, 1))
        val = 1j * geo.lambda_contract(geo.wedge(theta, dag)).values
        assert np.min(val.real) >= 0.0
        assert np.abs(val.imag).max() < 1e-13


class TestQuadrupletConstraints:
    def test_constant_quadruplet_residuals_vanish(self):
        g = geo.TorusGrid(16)
        q = higgs.QuadrupletSpec(
            g, (0,), (0,),
            geo.constant_field(g, [[1.2]], geo.FORM_10),
            geo.constant_field(g, [[1.2]], geo.FORM_10),
            geo.zero_field(g, 1, 1),
            geo.constant_field(g, [[0.5]]),
        )
        res = higgs.holomorphy_residuals(q)
        assert max(res) < 1e-12

    def test_nonholomorphic_phi_detected(self):
        # phi = exp(2 pi i x): residual sup is |pi i exp(2 pi i x)| = pi
        g = geo.TorusGrid(32)
        q = higgs.QuadrupletSpec(
            g, (0,), (0,),
            geo.zero_field(g, 1, 1, geo.FORM_10),
            geo.zero_field(g, 1, 1, geo.FORM_10),
            geo.mode_field(g, 1, 0),
            geo.zero_field(g, 1, 1),
        )
        res = higgs.holomorphy_residuals(q)
        assert res.phi == pytest.approx(np.pi, rel=1e-10)
        with pytest.raises(ConstraintError):
            q.validate()

    def test_composition_constraint_enforced(self):
        g = geo.TorusGrid(8)
        q = higgs.QuadrupletSpec(
            g, (0,), (0,),
            geo.zero_field(g, 1, 1, geo.FORM_10),
            geo.zero_field(g, 1, 1, geo.FORM_10),
            geo.constant_field(g, [[1.0]]),
            geo.constant_field(g, [[1.0]]),
        )
        with pytest.raises(ConstraintError):
            q.validate()

    def test_degree_mask_enforced(self):
        # coupling between summands of different degree is unrepresentable
        g = geo.TorusGrid(8)
        q = higgs.QuadrupletSpec(
            g, (1,), (0,),
            geo.zero_field(g, 1, 1, geo.FORM_10),
            geo.zero_field(g, 1, 1, geo.FORM_10),
            geo.zero_field(g, 1, 1),
            geo.constant_field(g, [[1.0]]),
        )
        with pytest.raises(ConstraintError):
            q.validate()

    def test_random_admissible_families_validate(self):
        rng = np.random.default_rng(11)
        g = geo.TorusGrid(16)
        for _ in range(20):
            q = random_admissible_quadruplet(g, rng)
            h = random_metric_pair(q, rng)
            assert max(higgs.holomorphy_residuals(q)) < 1e-9
            h.validate()

"""Configuration-space metric, quaternionic operators and the moment map.

The configuration space fixes unit Hermitian metrics and varies unitary
connections (as perturbations of the constant-curvature backgrounds),
skew-Hermitian 1-forms and the two couplings.  Skew 1-forms are stored by
their (1,0)-coefficient C; the (0,1)-coefficient is -C^dagger by
definition, so skewness is exact by representation.

Sign conventions are locked by the moment-map identity
<Dmu_I(x)[a], xi> = omega_I(X_xi(x), a) with the left gauge action and
omega_I := g(I., .): the overall sign of apply_I and the factor 2 on the
coupling part of g are the unique choices satisfying it (flipping I's
sign moves the identity to the swapped argument order), and mu_I couples
the full endomorphisms with the same phi-signs as the vortex residual.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import geometry as geo
from . import higgs
from .errors import ConstraintError, ShapeError
from .geometry import FieldOnTorus, TorusGrid
from .higgs import MetricPair, QuadrupletSpec
from .vortex import VortexConstants

TWO_PI = 2.0 * np.pi


def _adj(v: np.ndarray) -> np.ndarray:
    return geo.adjoint_values(v)


@dataclass
class Configuration:
    """Point of M: unitary connections, skew 1-forms, and the couplings."""

    grid: TorusGrid
    block_degrees1: tuple[int, ...]
    block_degrees2: tuple[int, ...]
    a1: np.ndarray      # (1,0)-coefficient of the connection perturbation on E1
    p1: np.ndarray      # (1,0)-coefficient of Phi_1
    a2: np.ndarray
    p2: np.ndarray
    phi: np.ndarray     # r2 x r1
    psi: np.ndarray     # r1 x r2

    @property
    def r1(self) -> int:
        return self.a1.shape[-1]

    @property
    def r2(self) -> int:
        return self.a2.shape[-1]


@dataclass
class TangentData:
    """Tangent vector (A1_dot, Phi1_dot, A2_dot, Phi2_dot, f, g_dir).

    One-form slots hold (1,0)-coefficients; skew-Hermitian by representation.
    """

    a1: np.ndarray
    p1: np.ndarray
    a2: np.ndarray
    p2: np.ndarray
    f: np.ndarray
    g: np.ndarray

    def map(self, fn) -> "TangentData":
        return TangentData(*(fn(v) for v in (self.a1, self.p1, self.a2, self.p2, self.f, self.g)))


@dataclass
class GaugeDirection:
    """Lie-algebra element (u, v): skew-Hermitian function fields."""

    u: np.ndarray
    v: np.ndarray

    def validate(self, tol: float = 1e-12):
        for name, m in (("u", self.u), ("v", self.v)):
            defect = geo.sup_norm(m + _adj(m))
            if defect > tol * max(1.0, geo.sup_norm(m)):
                raise ConstraintError(f"{name} is not skew-Hermitian")
        return self


# -- metric, symplectic form, quaternions -------------------------------------

def _slot_inner(ca: np.ndarray, cb: np.ndarray) -> float:
    # -int Tr(A ^ *B) = 4 int Re Tr(C_a C_b^dagger) dA for skew 1-forms
    return 4.0 * float(np.mean(np.einsum("xyij,xyij->xy", ca, np.conj(cb)).real))


def _coupling_inner(fa: np.ndarray, fb: np.ndarray) -> float:
    return float(np.mean(np.einsum("xyij,xyij->xy", fa, np.conj(fb)).real))


def metric_g(a: TangentData, b: TangentData) -> float:
    """Riemannian metric on T_x M; positive definite."""
    if a.f.shape != b.f.shape or a.a1.shape != b.a1.shape:
        raise ShapeError("tangent shapes differ")
    total = sum(_slot_inner(x, y) for x, y in
                ((a.a1, b.a1), (a.p1, b.p1), (a.a2, b.a2), (a.p2, b.p2)))
    total += 2.0 * (_coupling_inner(a.f, b.f) + _coupling_inner(a.g, b.g))
    return total


def apply_I(a: TangentData) -> TangentData:
    """First complex structure; in the (1,0)-coefficient representation
    (+i, -i, +i, -i) on the form slots and -i on both couplings."""
    return TangentData(1j * a.a1, -1j * a.p1, 1j * a.a2, -1j * a.p2, -1j * a.f, -1j * a.g)


def apply_J(a: TangentData) -> TangentData:
    """Second complex structure: (A, Phi) -> (-Phi, A), (f, g) -> (-g*, f*)."""
    return TangentData(-a.p1, a.a1, -a.p2, a.a2, -_adj(a.g), _adj(a.f))


def apply_K(a: TangentData) -> TangentData:
    """Third complex structure, the composite I o J."""
    return apply_I(apply_J(a))


def omega_I(a: TangentData, b: TangentData) -> float:
    """Symplectic form omega_I(a, b) := g(I a, b)."""
    return metric_g(apply_I(a), b)


# -- curvature and the moment map ----------------------------------------------

def _curvature_coeff(grid: TorusGrid, degrees: Sequence[int], c: np.ndarray) -> np.ndarray:
    """dz^dzbar coefficient of F(bg + a) with a = C dz - C^dag dzbar."""
    d = -_adj(c)
    field_c = FieldOnTorus(grid, geo.FUNCTION, c)
    field_d = FieldOnTorus(grid, geo.FUNCTION, d)
    da = geo._d_z(field_d) - geo._d_zbar(field_c)
    bg = np.pi * np.diag(np.asarray(degrees, dtype=float))
    return bg + da + (c @ d - d @ c)


def _wedge_square_coeff(p: np.ndarray) -> np.ndarray:
    """dz^dzbar coefficient of Phi ^ Phi for Phi = P dz - P^dag dzbar."""
    q = -_adj(p)
    return p @ q - q @ p


def moment_mu_I(x: Configuration) -> tuple[FieldOnTorus, FieldOnTorus]:
    """mu_I as a pair of (1,1)-form endomorphism fields.

    At a vortex solution the value is (-2 pi i tau Id omega, -2 pi i tau' Id omega).
    """
    phis_phi = _adj(x.phi) @ x.phi
    phi_phis = x.phi @ _adj(x.phi)
    psi_psis = x.psi @ _adj(x.psi)
    psis_psi = _adj(x.psi) @ x.psi
    f1 = _curvature_coeff(x.grid, x.block_degrees1, x.a1)
    f2 = _curvature_coeff(x.grid, x.block_degrees2, x.a2)
    mu1 = f1 - _wedge_square_coeff(x.p1) + (1j * phis_phi - 1j * psi_psis) * geo.OMEGA_COEFF
    mu2 = f2 - _wedge_square_coeff(x.p2) + (-1j * phi_phis + 1j * psis_psi) * geo.OMEGA_COEFF
    return (
        FieldOnTorus(x.grid, geo.FORM_11, mu1),
        FieldOnTorus(x.grid, geo.FORM_11, mu2),
    )


def moment_pairing(mu: tuple[FieldOnTorus, FieldOnTorus], xi: GaugeDirection) -> float:
    """<mu, xi> = int Tr(u mu_1) + int Tr(v mu_2); real for skew xi."""
    t1 = geo.integrate(FieldOnTorus(mu[0].grid, geo.FORM_11, xi.u @ mu[0].values).trace())[0, 0]
    t2 = geo.integrate(FieldOnTorus(mu[1].grid, geo.FORM_11, xi.v @ mu[1].values).trace())[0, 0]
    total = t1 + t2
    return float(total.real)


def level_set_defect(x: Configuration, c: VortexConstants) -> float:
    """Sup distance of Lambda(mu_I) from (-2 pi i tau Id, -2 pi i tau' Id)."""
    mu1, mu2 = moment_mu_I(x)
    lam1 = geo.lambda_contract(mu1).values + TWO_PI * 1j * float(c.tau) * np.eye(x.r1)
    lam2 = geo.lambda_contract(mu2).values + TWO_PI * 1j * float(c.tau_prime) * np.eye(x.r2)
    return max(geo.sup_norm(lam1), geo.sup_norm(lam2))


# -- gauge action ----------------------------------------------------------------

def gauge_transform(x: Configuration, g1: np.ndarray, g2: np.ndarray) -> Configuration:
    """Finite unitary gauge action (g1, g2) . x."""
    def transform_connection(c, g):
        ginv = _adj(g)  # unitary
        dzg = geo._d_z(FieldOnTorus(x.grid, geo.FUNCTION, g))
        return g @ c @ ginv - dzg @ ginv

    return replace(
        x,
        a1=transform_connection(x.a1, g1),
        p1=g1 @ x.p1 @ _adj(g1),
        a2=transform_connection(x.a2, g2),
        p2=g2 @ x.p2 @ _adj(g2),
        phi=g2 @ x.phi @ _adj(g1),
        psi=g1 @ x.psi @ _adj(g2),
    )


def infinitesimal_gauge(x: Configuration, xi: GaugeDirection) -> TangentData:
    """X_xi(x) = d/dt exp(t xi) . x: (-nabla u, [u, Phi_1], ..., v phi - phi u, u psi - psi v)."""
    def cov_deriv(u, c):
        du = geo._d_z(FieldOnTorus(x.grid, geo.FUNCTION, u))
        return du + c @ u - u @ c

    return TangentData(
        a1=-cov_deriv(xi.u, x.a1),
        p1=xi.u @ x.p1 - x.p1 @ xi.u,
        a2=-cov_deriv(xi.v, x.a2),
        p2=xi.v @ x.p2 - x.p2 @ xi.v,
        f=xi.v @ x.phi - x.phi @ xi.u,
        g=xi.u @ x.psi - x.psi @ xi.v,
    )


def perturb(x: Configuration, a: TangentData, t: float) -> Configuration:
    return replace(
        x,
        a1=x.a1 + t * a.a1, p1=x.p1 + t * a.p1,
        a2=x.a2 + t * a.a2, p2=x.p2 + t * a.p2,
        phi=x.phi + t * a.f, psi=x.psi + t * a.g,
    )


def moment_map_property_check(
    x: Configuration, a: TangentData, xi: GaugeDirection, step: float = 1e-4
) -> float:
    """|<Dmu_I(x)[a], xi> - omega_I(X_xi(x), a)| via central differences.

    mu_I is quadratic in the fields, so the central difference is exact up
    to round-off.
    """
    xi.validate()
    plus = moment_pairing(moment_mu_I(perturb(x, a, +step)), xi)
    minus = moment_pairing(moment_mu_I(perturb(x, a, -step)), xi)
    derivative = (plus - minus) / (2.0 * step)
    return abs(derivative - omega_I(infinitesimal_gauge(x, xi), a))


# -- constraints (the set N) ------------------------------------------------------

def constraint_residuals(x: Configuration) -> dict:
    """Sup norms of the holomorphy constraints cutting out N inside M."""
    d1 = -_adj(x.a1)
    d2 = -_adj(x.a2)

    def dbar_cov(values, d_left, d_right):
        dzbar = geo._d_zbar(FieldOnTorus(x.grid, geo.FUNCTION, values))
        return dzbar + d_left @ values - values @ d_right

    return {
        "higgs1": geo.sup_norm(dbar_cov(x.p1, d1, d1)),
        "higgs2": geo.sup_norm(dbar_cov(x.p2, d2, d2)),
        "phi_dbar": geo.sup_norm(dbar_cov(x.phi, d2, d1)),
        "phi_twist": geo.sup_norm(x.p2 @ x.phi - x.phi @ x.p1),
        "psi_dbar": geo.sup_norm(dbar_cov(x.psi, d1, d2)),
        "psi_twist": geo.sup_norm(x.p1 @ x.psi - x.psi @ x.p2),
        "phi_psi": geo.sup_norm(x.phi @ x.psi),
        "psi_phi": geo.sup_norm(x.psi @ x.phi),
    }


# -- bridge from solved quadruplets ------------------------------------------------

def _sqrtm_hermitian(values: np.ndarray) -> np.ndarray:
    if values.shape[-1] == 1:
        return np.sqrt(values)
    w, v = np.linalg.eigh(values)
    return (v * np.sqrt(w)[..., None, :]) @ _adj(v)


def configuration_from_solution(q: QuadrupletSpec, h: MetricPair, c: VortexConstants) -> Configuration:
    """Express a metric solution as a point of M over unit metrics.

    Conjugates by g_i = h_i^(1/2): the connection perturbation becomes
    g^-1 del g, the Higgs field theta' = g theta g^-1 enters through
    Phi = -i(theta' + theta'^dagger), and the couplings conjugate
    accordingly.  If (Q, h) solves the vortex system, the result sits in N
    on the central level set of mu_I.
    """
    g1 = _sqrtm_hermitian(h.h1.values)
    g2 = _sqrtm_hermitian(h.h2.values)
    g1_inv = higgs.metric_inverse(FieldOnTorus(q.grid, geo.FUNCTION, g1))
    g2_inv = higgs.metric_inverse(FieldOnTorus(q.grid, geo.FUNCTION, g2))

    def connection(g, ginv):
        dzg = geo._d_z(FieldOnTorus(q.grid, geo.FUNCTION, g))
        return ginv @ dzg

    theta1p = g1 @ q.theta1.values @ g1_inv
    theta2p = g2 @ q.theta2.values @ g2_inv
    return Configuration(
        grid=q.grid,
        block_degrees1=tuple(q.block_degrees1),
        block_degrees2=tuple(q.block_degrees2),
        a1=connection(g1, g1_inv),
        p1=-1j * theta1p,
        a2=connection(g2, g2_inv),
        p2=-1j * theta2p,
        phi=g2 @ q.phi.values @ g1_inv,
        psi=g1 @ q.psi.values @ g2_inv,
    )


# -- random data -------------------------------------------------------------------

def random_smooth_matrix(grid: TorusGrid, ro: int, ri: int, rng, amplitude: float = 0.3, modes: int = 2) -> np.ndarray:
    """Band-limited random matrix field (trigonometric polynomial entries)."""
    x, y = grid.coordinates()
    out = np.zeros((grid.n, grid.n, ro, ri), dtype=np.complex128)
    for p in range(-modes, modes + 1):
        for qq in range(-modes, modes + 1):
            coeff = (rng.standard_normal((ro, ri)) + 1j * rng.standard_normal((ro, ri)))
            phase = np.exp(2j * np.pi * (p * x + qq * y))
            out += phase[..., None, None] * coeff
    norm = geo.sup_norm(out)
    return out * (amplitude / norm) if norm > 0 else out


def random_skew_field(grid: TorusGrid, r: int, rng, amplitude: float = 0.3, modes: int = 2) -> np.ndarray:
    m = random_smooth_matrix(grid, r, r, rng, amplitude, modes)
    return 0.5 * (m - _adj(m))


def random_tangent(grid: TorusGrid, r1: int, r2: int, rng, amplitude: float = 0.5) -> TangentData:
    return TangentData(
        a1=random_smooth_matrix(grid, r1, r1, rng, amplitude),
        p1=random_smooth_matrix(grid, r1, r1, rng, amplitude),
        a2=random_smooth_matrix(grid, r2, r2, rng, amplitude),
        p2=random_smooth_matrix(grid, r2, r2, rng, amplitude),
        f=random_smooth_matrix(grid, r2, r1, rng, amplitude),
        g=random_smooth_matrix(grid, r1, r2, rng, amplitude),
    )


def random_configuration(grid: TorusGrid, r1: int, r2: int, rng, amplitude: float = 0.3) -> Configuration:
    return Configuration(
        grid=grid,
        block_degrees1=(0,) * r1,
        block_degrees2=(0,) * r2,
        a1=random_smooth_matrix(grid, r1, r1, rng, amplitude),
        p1=random_smooth_matrix(grid, r1, r1, rng, amplitude),
        a2=random_smooth_matrix(grid, r2, r2, rng, amplitude),
        p2=random_smooth_matrix(grid, r2, r2, rng, amplitude),
        phi=random_smooth_matrix(grid, r2, r1, rng, amplitude),
        psi=random_smooth_matrix(grid, r1, r2, rng, amplitude),
    )


def random_gauge_direction(grid: TorusGrid, r1: int, r2: int, rng, amplitude: float = 0.3) -> GaugeDirection:
    return GaugeDirection(
        u=random_skew_field(grid, r1, rng, amplitude),
        v=random_skew_field(grid, r2, rng, amplitude),
    )


def random_unitary_gauge(grid: TorusGrid, r: int, rng, amplitude: float = 0.2, modes: int = 1) -> np.ndarray:
    """Pointwise unitary gauge field exp(skew); kept band-limited enough that
    the spectral identities hold to round-off at n >= 32."""
    return _expm_skew(random_skew_field(grid, r, rng, amplitude, modes))


def _expm_skew(values: np.ndarray) -> np.ndarray:
    """Pointwise exponential of a skew-Hermitian field (unitary result)."""
    herm = -1j * values
    w, v = np.linalg.eigh(herm)
    return (v * np.exp(1j * w)[..., None, :]) @ _adj(v)

"""Higgs quadruplets on the torus: metrics, curvature, adjoints, constraints.

Bundles are direct sums of line bundles.  Degree d is realized by a fixed
background unitary connection of constant curvature -2 pi i d omega, so
every dynamical field (metric perturbations, Higgs fields, the coupling
morphisms) is an honest periodic matrix field.  Matrix entries may only
connect summands of equal degree; on that subalgebra all covariant
derivatives reduce to the plain spectral dbar / del of `geometry`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import geometry as geo
from .errors import ConstraintError, DomainError, ShapeError
from .geometry import FieldOnTorus, TorusGrid

DEFAULT_CONSTRAINT_TOL = 1e-9


def degree_mask(degrees_out: Sequence[int], degrees_in: Sequence[int]) -> np.ndarray:
    """Boolean matrix of entries allowed to be nonzero (equal summand degrees)."""
    do = np.asarray(degrees_out, dtype=int)
    di = np.asarray(degrees_in, dtype=int)
    return do[:, None] == di[None, :]


def background_curvature(grid: TorusGrid, degrees: Sequence[int]) -> FieldOnTorus:
    """Curvature of the background connection, -2 pi i d omega per summand.

    As a dz^dzbar coefficient this is the constant diag(pi * d).
    """
    coeff = np.pi * np.diag(np.asarray(degrees, dtype=float))
    return geo.constant_field(grid, coeff, geo.FORM_11)


def _check_mask(values: np.ndarray, mask: np.ndarray, what: str, tol: float):
    if values.shape[-2:] != mask.shape:
        raise ShapeError(f"{what}: shape {values.shape[-2:]} does not match mask {mask.shape}")
    off = np.abs(values[..., ~mask])
    if off.size and off.max() > tol:
        raise ConstraintError(
            f"{what}: entries connect summands of different degree (sup {off.max():.3e})"
        )


@dataclass
class QuadrupletSpec:
    """Concrete Higgs quadruplet: two bundles, two Higgs fields, two couplings.

    block_degrees fix the line-bundle summands (rank = length, degree = sum);
    theta_i are (1,0)-form endomorphism fields, phi: E1 -> E2 and
    psi: E2 -> E1 are function fields.
    """

    grid: TorusGrid
    block_degrees1: tuple[int, ...]
    block_degrees2: tuple[int, ...]
    theta1: FieldOnTorus
    theta2: FieldOnTorus
    phi: FieldOnTorus
    psi: FieldOnTorus
    tol: float = DEFAULT_CONSTRAINT_TOL

    @property
    def r1(self) -> int:
        return len(self.block_degrees1)

    @property
    def r2(self) -> int:
        return len(self.block_degrees2)

    @property
    def d1(self) -> int:
        return int(sum(self.block_degrees1))

    @property
    def d2(self) -> int:
        return int(sum(self.block_degrees2))

    def masks(self):
        m1 = degree_mask(self.block_degrees1, self.block_degrees1)
        m2 = degree_mask(self.block_degrees2, self.block_degrees2)
        mphi = degree_mask(self.block_degrees2, self.block_degrees1)
        mpsi = degree_mask(self.block_degrees1, self.block_degrees2)
        return m1, m2, mphi, mpsi

    def validate(self):
        """Check shapes, block support, phi psi = psi phi = 0 and holomorphy."""
        r1, r2 = self.r1, self.r2
        for f, ro, ri, ft, what in (
            (self.theta1, r1, r1, geo.FORM_10, "theta1"),
            (self.theta2, r2, r2, geo.FORM_10, "theta2"),
            (self.phi, r2, r1, geo.FUNCTION, "phi"),
            (self.psi, r1, r2, geo.FUNCTION, "psi"),
        ):
            if f.form_type != ft:
                raise ConstraintError(f"{what} must be a {ft} field")
            if (f.rank_out, f.rank_in) != (ro, ri):
                raise ShapeError(f"{what} must be {ro}x{ri}, got {f.rank_out}x{f.rank_in}")
        m1, m2, mphi, mpsi = self.masks()
        _check_mask(self.theta1.values, m1, "theta1", self.tol)
        _check_mask(self.theta2.values, m2, "theta2", self.tol)
        _check_mask(self.phi.values, mphi, "phi", self.tol)
        _check_mask(self.psi.values, mpsi, "psi", self.tol)
        comp1 = geo.sup_norm(self.phi.values @ self.psi.values)
        comp2 = geo.sup_norm(self.psi.values @ self.phi.values)
        if max(comp1, comp2) > self.tol:
            raise ConstraintError(
                f"phi o psi / psi o phi must vanish (sup {max(comp1, comp2):.3e})"
            )
        res = holomorphy_residuals(self)
        worst = max(res)
        if worst > self.tol:
            raise ConstraintError(f"holomorphy residuals too large: {res}")
        return self


def trivial_metrics(q: QuadrupletSpec) -> "MetricPair":
    return MetricPair(
        geo.identity_field(q.grid, q.r1),
        geo.identity_field(q.grid, q.r2),
    )


@dataclass
class MetricPair:
    """Positive Hermitian metric matrices h_i = exp(s_i) over the Id background."""

    h1: FieldOnTorus
    h2: FieldOnTorus

    def validate(self, tol: float = 1e-12):
        for h, what in ((self.h1, "h1"), (self.h2, "h2")):
            v = h.values
            herm_defect = geo.sup_norm(v - geo.adjoint_values(v))
            if herm_defect > tol * max(1.0, geo.sup_norm(v)):
                raise DomainError(f"{what} is not Hermitian (defect {herm_defect:.3e})")
            eigs = np.linalg.eigvalsh(v)
            if eigs.min() <= 0:
                raise DomainError(f"{what} is not positive definite (min eig {eigs.min():.3e})")
        return self


def expm_hermitian(values: np.ndarray) -> np.ndarray:
    """Pointwise matrix exponential of a Hermitian field."""
    if values.shape[-1] == 1:
        return np.exp(values)
    w, v = np.linalg.eigh(values)
    return (v * np.exp(w)[..., None, :]) @ geo.adjoint_values(v)


def metric_inverse(h: FieldOnTorus) -> np.ndarray:
    if h.rank_out == 1:
        return 1.0 / h.values
    return np.linalg.inv(h.values)


def chern_curvature(h: FieldOnTorus, background_degrees: Sequence[int]) -> FieldOnTorus:
    """Curvature F_h = F_bg + dbar(h^-1 del h) in the background trivialization.

    Satisfies (i/2pi) integral tr Lambda(F_h) vol = sum(background_degrees).
    """
    eigs = np.linalg.eigvalsh(h.values)
    if eigs.min() <= 0:
        raise DomainError(f"metric not positive definite (min eig {eigs.min():.3e})")
    hinv = metric_inverse(h)
    dh = geo.del_(h)
    connection = FieldOnTorus(h.grid, geo.FORM_10, hinv @ dh.values)
    return background_curvature(h.grid, background_degrees) + geo.dbar(connection)


def higgs_adjoint(theta: FieldOnTorus, h: FieldOnTorus) -> FieldOnTorus:
    """Formal adjoint theta^dagger_h = (h^-1 T^dagger h) dzbar for theta = T dz."""
    if theta.form_type != geo.FORM_10:
        raise geo.FormTypeError("higgs_adjoint expects a (1,0)-form")
    if theta.rank_out != h.rank_out:
        raise ShapeError("theta and h ranks differ")
    hinv = metric_inverse(h)
    coeff = hinv @ geo.adjoint_values(theta.values) @ h.values
    return FieldOnTorus(theta.grid, geo.FORM_01, coeff)


def bracket_theta(theta: FieldOnTorus, theta_dag: FieldOnTorus) -> FieldOnTorus:
    """[theta, theta^dagger] = theta^theta^dagger + theta^dagger^theta, a (1,1)-form.

    With coefficients T dz and S dzbar this is the matrix commutator
    (TS - ST) dz^dzbar; in particular it is trace free pointwise.
    """
    return geo.wedge(theta, theta_dag) + geo.wedge(theta_dag, theta)


def morphism_adjoint(f: FieldOnTorus, h_from: FieldOnTorus, h_to: FieldOnTorus) -> FieldOnTorus:
    """Adjoint f* = h_from^-1 f^dagger h_to of f: (E_from,h_from) -> (E_to,h_to)."""
    if f.rank_out != h_to.rank_out or f.rank_in != h_from.rank_out:
        raise ShapeError("morphism and metric shapes are inconsistent")
    coeff = metric_inverse(h_from) @ geo.adjoint_values(f.values) @ h_to.values
    return FieldOnTorus(f.grid, f.form_type, coeff)


class HolomorphyResiduals(NamedTuple):
    theta1: float
    theta2: float
    phi: float
    psi: float


def holomorphy_residuals(q: QuadrupletSpec) -> HolomorphyResiduals:
    """Sup norms of the four holomorphy constraints of a Higgs quadruplet.

    For the morphisms the (0,1) part (dbar f) and the (1,0) part
    (theta-intertwining defect) must vanish separately; the reported
    residual is the larger of the two.
    """
    r_t1 = geo.dbar(q.theta1).sup_norm()
    r_t2 = geo.dbar(q.theta2).sup_norm()
    dbar_phi = geo.dbar(q.phi).sup_norm()
    twist_phi = geo.sup_norm(q.theta2.values @ q.phi.values - q.phi.values @ q.theta1.values)
    dbar_psi = geo.dbar(q.psi).sup_norm()
    twist_psi = geo.sup_norm(q.theta1.values @ q.psi.values - q.psi.values @ q.theta2.values)
    return HolomorphyResiduals(r_t1, r_t2, max(dbar_phi, twist_phi), max(dbar_psi, twist_psi))


def higgs_laplacian_term(q: QuadrupletSpec, h: MetricPair):
    """Lambda(F_{h_i} + [theta_i, theta_i^dagger]) for both bundles."""
    f1 = chern_curvature(h.h1, q.block_degrees1)
    f2 = chern_curvature(h.h2, q.block_degrees2)
    b1 = bracket_theta(q.theta1, higgs_adjoint(q.theta1, h.h1))
    b2 = bracket_theta(q.theta2, higgs_adjoint(q.theta2, h.h2))
    return geo.lambda_contract(f1 + b1), geo.lambda_contract(f2 + b2)


def coupling_terms(q: QuadrupletSpec, h: MetricPair):
    """The four quadratic coupling endomorphisms (phi*phi, phi phi*, psi psi*, psi* psi)."""
    phi_star = morphism_adjoint(q.phi, h.h1, h.h2)
    psi_star = morphism_adjoint(q.psi, h.h2, h.h1)
    phis_phi = phi_star.values @ q.phi.values
    phi_phis = q.phi.values @ phi_star.values
    psi_psis = q.psi.values @ psi_star.values
    psis_psi = psi_star.values @ q.psi.values
    return phis_phi, phi_phis, psi_psis, psis_psi

"""The doubly-coupled vortex system: constants, residual, damped descent solver.

The residual implements

    R1 = Lambda(F_h1 + [theta1, theta1^dag]) + i phi* phi - i psi psi* + 2 pi i tau Id
    R2 = Lambda(F_h2 + [theta2, theta2^dag]) - i phi phi* + i psi* psi + 2 pi i tau' Id

The phi-term signs are the ones produced by the curvature blocks of the
associated product bundle; with the opposite pair the phi-only coupled
system would admit an explicit constant solution despite being
slope-unstable, so these signs are what make solvability and stability
agree.  The summed trace identity |int tr(i R1) + int tr(i R2)| = 0
holds for any admissible input once tau' = -(r1 tau - d1 - d2)/r2,
which is how the tau' sign is locked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from . import geometry as geo
from . import higgs
from .errors import DomainError
from .geometry import FieldOnTorus
from .higgs import MetricPair, QuadrupletSpec

TWO_PI = 2.0 * np.pi


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


@dataclass(frozen=True)
class VortexConstants:
    """tau, tau', sigma and the Hermitian-Einstein constant of the product.

    Exact Fractions whenever tau was given as a rational; sigma > 0 is
    required for anything involving the product geometry, the solver
    itself runs for any tau.
    """

    tau: Union[Fraction, float]
    tau_prime: Union[Fraction, float]
    sigma: Union[Fraction, float]
    r1: int
    r2: int
    d1: int
    d2: int

    @property
    def reduction_enabled(self) -> bool:
        return self.sigma > 0

    @property
    def lambda_he(self) -> complex:
        """-(2 pi i / Vol) deg_sigma F / rank F with Vol = sigma/2."""
        if not self.reduction_enabled:
            raise DomainError("sigma <= 0: product constants are undefined")
        sigma = float(self.sigma)
        deg_sigma_f = self.d1 + self.d2 + sigma * self.r2
        return -4j * np.pi / sigma * deg_sigma_f / (self.r1 + self.r2)


def constants_from_tau(tau, r1: int, r2: int, d1: int, d2: int) -> VortexConstants:
    """Populate tau' = -(r1 tau - d1 - d2)/r2 and sigma = ((r1+r2)tau - d1 - d2)/r2."""
    if r1 < 1 or r2 < 1:
        raise DomainError("ranks must be >= 1")
    if _is_rational(tau):
        tau = Fraction(tau)
        tau_prime = -Fraction(r1 * tau - d1 - d2, 1) / r2
        sigma = Fraction((r1 + r2) * tau - d1 - d2, 1) / r2
    else:
        tau = float(tau)
        tau_prime = -(r1 * tau - d1 - d2) / r2
        sigma = ((r1 + r2) * tau - d1 - d2) / r2
    return VortexConstants(tau, tau_prime, sigma, r1, r2, d1, d2)


def constants_from_sigma(sigma, r1: int, r2: int, d1: int, d2: int) -> VortexConstants:
    """Inverse relation tau = (d1 + d2 + sigma r2)/(r1 + r2); exact for rationals."""
    if _is_rational(sigma):
        tau = Fraction(d1 + d2 + Fraction(sigma) * r2, 1) / (r1 + r2)
    else:
        tau = (d1 + d2 + float(sigma) * r2) / (r1 + r2)
    return constants_from_tau(tau, r1, r2, d1, d2)


@dataclass
class VortexResidual:
    """Left-hand sides of the two equations, endomorphism-valued functions."""

    R1: FieldOnTorus
    R2: FieldOnTorus

    def sup_norms(self) -> tuple[float, float]:
        return self.R1.sup_norm(), self.R2.sup_norm()

    def sup(self) -> float:
        return max(self.sup_norms())


def residual(q: QuadrupletSpec, h: MetricPair, c: VortexConstants) -> VortexResidual:
    lam1, lam2 = higgs.higgs_laplacian_term(q, h)
    phis_phi, phi_phis, psi_psis, psis_psi = higgs.coupling_terms(q, h)
    tau = float(c.tau)
    tau_p = float(c.tau_prime)
    eye1 = np.eye(q.r1)
    eye2 = np.eye(q.r2)
    r1 = lam1.values + 1j * phis_phi - 1j * psi_psis + TWO_PI * 1j * tau * eye1
    r2 = lam2.values - 1j * phi_phis + 1j * psis_psi + TWO_PI * 1j * tau_p * eye2
    return VortexResidual(
        FieldOnTorus(q.grid, geo.FUNCTION, r1),
        FieldOnTorus(q.grid, geo.FUNCTION, r2),
    )


def trace_identity_check(q: QuadrupletSpec, h: MetricPair, c: VortexConstants) -> float:
    """|int tr(i R1) + int tr(i R2)|, an identity (zero) for any admissible input."""
    res = residual(q, h, c)
    t1 = geo.integrate(res.R1.trace())[0, 0]
    t2 = geo.integrate(res.R2.trace())[0, 0]
    return abs(1j * t1 + 1j * t2)


def is_solution(q: QuadrupletSpec, h: MetricPair, c: VortexConstants, tol: float = 1e-8):
    """Threshold the per-equation sup norms; returns (ok, sup_R1, sup_R2)."""
    s1, s2 = residual(q, h, c).sup_norms()
    return (max(s1, s2) <= tol), s1, s2


@dataclass
class SolveOptions:
    step: Optional[float] = None          # auto: 1.8 / (pi^2 n^2)
    max_iter: int = 200_000
    target_residual: float = 1e-8
    patience: int = 2000                  # accepted steps without relative progress
    min_rel_improvement: float = 1e-9
    backtrack: float = 0.5
    grow: float = 1.05
    grow_every: int = 25
    min_step: float = 1e-14
    s_bound: float = 40.0                 # |s| beyond this is a scale runaway
    trace_normalize: bool = True
    record_every: int = 1


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    final_sup_r1: float
    final_sup_r2: float
    message: str
    history: list = field(default_factory=list)  # rows (iteration, sup_R1, sup_R2)
    step_final: float = 0.0

    def sup(self) -> float:
        return max(self.final_sup_r1, self.final_sup_r2)


def _renormalize_trace(s1: np.ndarray, s2: np.ndarray, r1: int, r2: int):
    # only the simultaneous scaling of (h1, h2) is gauge; fix the summed trace
    total = float(np.real(np.einsum("xykk->", s1) + np.einsum("xykk->", s2)))
    shift = total / (s1.shape[0] * s1.shape[1]) / (r1 + r2)
    s1 = s1 - shift * np.eye(r1)
    s2 = s2 - shift * np.eye(r2)
    return s1, s2


def solve(q: QuadrupletSpec, c: VortexConstants, options: Optional[SolveOptions] = None):
    """Damped descent s_i <- herm(s_i - eps i R_i) on metric logs h_i = exp(s_i).

    Backtracking keeps the sup residual non-increasing; nonconvergence
    (stall, scale runaway, or step collapse) is reported as a result, not
    raised - it is the expected outcome for unstable quadruplets.
    Returns (MetricPair of the best iterate, SolveReport).
    """
    opts = options or SolveOptions()
    n = q.grid.n
    eps = opts.step if opts.step is not None else 1.8 / (np.pi ** 2 * n ** 2)

    s1 = np.zeros((n, n, q.r1, q.r1), dtype=np.complex128)
    s2 = np.zeros((n, n, q.r2, q.r2), dtype=np.complex128)

    def metrics(a, b):
        return MetricPair(
            FieldOnTorus(q.grid, geo.FUNCTION, higgs.expm_hermitian(a)),
            FieldOnTorus(q.grid, geo.FUNCTION, higgs.expm_hermitian(b)),
        )

    h = metrics(s1, s2)
    res = residual(q, h, c)
    sup1, sup2 = res.sup_norms()
    sup = max(sup1, sup2)
    history = [(0, sup1, sup2)]
    best = (sup, s1, s2, sup1, sup2)
    best_iter = 0
    accepted = 0
    message = "max_iter reached"
    converged = sup <= opts.target_residual
    if converged:
        message = "converged"

    it = 0
    while not converged and it < opts.max_iter:
        it += 1
        cand1 = s1 - eps * geo.hermitian_part(1j * res.R1.values)
        cand2 = s2 - eps * geo.hermitian_part(1j * res.R2.values)
        if opts.trace_normalize:
            cand1, cand2 = _renormalize_trace(cand1, cand2, q.r1, q.r2)
        h_cand = metrics(cand1, cand2)
        res_cand = residual(q, h_cand, c)
        c1, c2 = res_cand.sup_norms()
        cand_sup = max(c1, c2)

        if cand_sup <= sup * (1.0 + 1e-12):
            s1, s2, h, res = cand1, cand2, h_cand, res_cand
            sup1, sup2, sup = c1, c2, cand_sup
            accepted += 1
            if accepted % opts.record_every == 0:
                history.append((accepted, sup1, sup2))
            if accepted % opts.grow_every == 0:
                eps *= opts.grow
            if sup < best[0] * (1.0 - opts.min_rel_improvement):
                best = (sup, s1, s2, sup1, sup2)
                best_iter = accepted
            if sup <= opts.target_residual:
                converged, message = True, "converged"
                break
            if max(geo.sup_norm(s1), geo.sup_norm(s2)) > opts.s_bound:
                message = "diverged: metric log runaway (unstable quadruplet?)"
                break
            if accepted - best_iter > opts.patience:
                message = "stalled: residual plateau (unstable quadruplet?)"
                break
        else:
            eps *= opts.backtrack
            if eps < opts.min_step:
                message = "step collapse: residual cannot decrease"
                break

    if history[-1][0] != accepted:
        history.append((accepted, sup1, sup2))
    if not converged:
        _, s1, s2, sup1, sup2 = best
    report = SolveReport(
        converged=converged,
        iterations=accepted,
        final_sup_r1=sup1,
        final_sup_r2=sup2,
        message=message,
        history=history,
        step_final=eps,
    )
    return metrics(s1, s2), report

"""Run configuration: flat INI sections, exact rationals for the constants.

Exactly one of sigma / tau must be given.  Field specifications accept

    zero
    constant <complex>          broadcast scalar (diagonal for square shapes)
    matrix <json rows>          entries as strings, e.g. [["0","1"],["0","0"]]
    mode <p> <q> <complex>      amplitude * exp(2 pi i (p x + q y)) * ones
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import geometry as geo
from . import higgs
from .geometry import TorusGrid
from .higgs import QuadrupletSpec
from .vortex import SolveOptions, VortexConstants, constants_from_sigma, constants_from_tau


class ConfigError(ValueError):
    """Malformed run configuration; the message names the section/key."""


@dataclass
class RunConfig:
    n: int = 32
    n_radial: int = 24
    n_angular: int = 24
    block_degrees1: tuple[int, ...] = (0,)
    block_degrees2: tuple[int, ...] = (0,)
    sigma: Optional[Fraction] = None
    tau: Optional[Fraction] = None
    field_specs: dict = field(default_factory=dict)
    solver: SolveOptions = field(default_factory=SolveOptions)
    constraint_tol: float = higgs.DEFAULT_CONSTRAINT_TOL
    check_tol: Optional[float] = None
    n_product_points: int = 200
    hk_draws: int = 100
    catalog_path: Optional[str] = None
    user_subobjects: list = field(default_factory=list)
    raw_text: str = ""

    def constants(self) -> VortexConstants:
        r1, r2 = len(self.block_degrees1), len(self.block_degrees2)
        d1, d2 = sum(self.block_degrees1), sum(self.block_degrees2)
        if self.sigma is not None:
            return constants_from_sigma(self.sigma, r1, r2, d1, d2)
        return constants_from_tau(self.tau, r1, r2, d1, d2)

    def grid(self) -> TorusGrid:
        return TorusGrid(self.n)

    def quadruplet(self) -> QuadrupletSpec:
        grid = self.grid()
        r1, r2 = len(self.block_degrees1), len(self.block_degrees2)
        return QuadrupletSpec(
            grid=grid,
            block_degrees1=self.block_degrees1,
            block_degrees2=self.block_degrees2,
            theta1=build_field(grid, self.field_specs.get("theta1", "zero"), r1, r1, geo.FORM_10),
            theta2=build_field(grid, self.field_specs.get("theta2", "zero"), r2, r2, geo.FORM_10),
            phi=build_field(grid, self.field_specs.get("phi", "zero"), r2, r1, geo.FUNCTION),
            psi=build_field(grid, self.field_specs.get("psi", "zero"), r1, r2, geo.FUNCTION),
            tol=self.constraint_tol,
        ).validate()


def _parse_complex(token: str, where: str) -> complex:
    try:
        return complex(token.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse complex number {token!r}") from exc


def build_field(grid: TorusGrid, spec: str, ro: int, ri: int, form_type: str):
    parts = spec.split()
    kind = parts[0] if parts else "zero"
    where = f"field spec {spec!r}"
    if kind == "zero":
        return geo.zero_field(grid, ro, ri, form_type)
    if kind == "constant":
        if len(parts) != 2:
            raise ConfigError(f"{where}: constant needs one value")
        c = _parse_complex(parts[1], where)
        m = c * (np.eye(ro, ri) if ro == ri else np.ones((ro, ri)))
        return geo.constant_field(grid, m, form_type)
    if kind == "matrix":
        try:
            rows = json.loads(" ".join(parts[1:]))
            m = np.array([[complex(str(e).replace(" ", "")) for e in row] for row in rows])
        except (json.JSONDecodeError, ValueError) as exc:
            raise ConfigError(f"{where}: bad matrix literal") from exc
        if m.shape != (ro, ri):
            raise ConfigError(f"{where}: matrix must be {ro}x{ri}, got {m.shape}")
        return geo.constant_field(grid, m, form_type)
    if kind == "mode":
        if len(parts) != 4:
            raise ConfigError(f"{where}: mode needs p q amplitude")
        p, q = int(parts[1]), int(parts[2])
        amp = _parse_complex(parts[3], where)
        m = amp * (np.eye(ro, ri) if ro == ri else np.ones((ro, ri)))
        return geo.mode_field(grid, p, q, m, form_type)
    raise ConfigError(f"{where}: unknown field kind {kind!r}")


def _parse_rational(text: str, where: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: expected an exact rational, got {text!r}") from exc


def _parse_degrees(text: str, where: str) -> tuple[int, ...]:
    try:
        degs = tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"{where}: degrees must be integers") from exc
    if not degs:
        raise ConfigError(f"{where}: at least one summand degree required")
    return degs


def parse_config(path) -> RunConfig:
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc

    cfg = RunConfig(raw_text=text)

    if parser.has_section("grid"):
        cfg.n = parser.getint("grid", "n", fallback=cfg.n)
        cfg.n_radial = parser.getint("grid", "n_radial", fallback=cfg.n_radial)
        cfg.n_angular = parser.getint("grid", "n_angular", fallback=cfg.n_angular)

    if parser.has_section("bundles"):
        if parser.has_option("bundles", "degrees1"):
            cfg.block_degrees1 = _parse_degrees(parser.get("bundles", "degrees1"), "[bundles] degrees1")
        if parser.has_option("bundles", "degrees2"):
            cfg.block_degrees2 = _parse_degrees(parser.get("bundles", "degrees2"), "[bundles] degrees2")

    if parser.has_section("constants"):
        has_sigma = parser.has_option("constants", "sigma")
        has_tau = parser.has_option("constants", "tau")
        if has_sigma == has_tau:
            raise ConfigError("[constants]: exactly one of sigma / tau must be set")
        if has_sigma:
            cfg.sigma = _parse_rational(parser.get("constants", "sigma"), "[constants] sigma")
        else:
            cfg.tau = _parse_rational(parser.get("constants", "tau"), "[constants] tau")
    else:
        raise ConfigError("missing [constants] section (set sigma or tau)")

    if parser.has_section("fields"):
        for key in ("theta1", "theta2", "phi", "psi"):
            if parser.has_option("fields", key):
                cfg.field_specs[key] = parser.get("fields", key)

    if parser.has_section("solver"):
        s = cfg.solver
        if parser.has_option("solver", "step"):
            s.step = parser.getfloat("solver", "step")
        s.max_iter = parser.getint("solver", "max_iter", fallback=s.max_iter)
        s.target_residual = parser.getfloat("solver", "target_residual", fallback=s.target_residual)
        s.patience = parser.getint("solver", "patience", fallback=s.patience)
        if s.target_residual <= 0:
            raise ConfigError("[solver] target_residual must be positive")

    if parser.has_section("tolerances"):
        cfg.constraint_tol = parser.getfloat("tolerances", "constraint", fallback=cfg.constraint_tol)
        if parser.has_option("tolerances", "check"):
            cfg.check_tol = parser.getfloat("tolerances", "check")
        if cfg.constraint_tol <= 0 or (cfg.check_tol is not None and cfg.check_tol <= 0):
            raise ConfigError("[tolerances]: tolerances must be positive")

    if parser.has_section("reduction"):
        cfg.n_product_points = parser.getint("reduction", "n_points", fallback=cfg.n_product_points)

    if parser.has_section("hk"):
        cfg.hk_draws = parser.getint("hk", "draws", fallback=cfg.hk_draws)

    if parser.has_section("stability"):
        if parser.has_option("stability", "catalog"):
            cfg.catalog_path = parser.get("stability", "catalog")
        if parser.has_option("stability", "subobjects"):
            for chunk in parser.get("stability", "subobjects").split(";"):
                chunk = chunk.strip()
                if chunk:
                    nums = chunk.split()
                    if len(nums) != 4:
                        raise ConfigError("[stability] subobjects: each entry is 'r1 r2 d1 d2'")
                    cfg.user_subobjects.append(tuple(int(v) for v in nums))

    return cfg

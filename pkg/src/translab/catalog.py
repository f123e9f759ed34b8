"""Closed-form translators and the exact translator-PDE residual.

The family covered here: the grim reaper u = log cos x, its tilted/scaled
relatives over strips of width pi/cos(theta) and vertical planes (the
theta -> pi/2 limit, not graphs).  All formulas use the downward translation
convention, so residual == 0 characterizes the family exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import OutOfDomainError
from .grid import GridFunction
from . import geom as _geom

# analytic evaluation refuses points this close to the strip edge
# (log cos would lose all digits or blow up)
DOMAIN_GUARD = 1e-9


class Kind(Enum):
    GRIM_REAPER = "grim"
    TILTED_GRIM_REAPER = "tilted"
    VERTICAL_PLANE = "plane"


@dataclass
class AnalyticTranslator:
    """A member of the closed-form family.

    theta is the tilt angle in [0, pi/2); the strip half-width in x is
    pi / (2 cos theta).  Vertical planes carry no height function.
    """

    kind: Kind
    theta: float = 0.0

    def __post_init__(self):
        if self.kind is Kind.GRIM_REAPER:
            self.theta = 0.0
        if not (0.0 <= self.theta < math.pi / 2):
            raise ValueError("theta must lie in [0, pi/2)")

    @property
    def half_width(self) -> float:
        if self.kind is Kind.VERTICAL_PLANE:
            raise OutOfDomainError("vertical planes are not graphs over a strip")
        return math.pi / (2.0 * math.cos(self.theta))

    @property
    def is_graph(self) -> bool:
        return self.kind is not Kind.VERTICAL_PLANE


def evaluate(t: AnalyticTranslator, x, y):
    """Exact jet (u, (u_x, u_y), (u_xx, u_xy, u_yy)) at interior points.

    u = sec^2(theta) log cos(x cos theta) - tan(theta) y; the strip variable
    is x, the translation-invariant direction is y.
    """
    if not t.is_graph:
        raise OutOfDomainError("vertical planes are not graphs over a strip")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = math.cos(t.theta)
    sec = 1.0 / c
    tan_t = math.tan(t.theta)
    arg = x * c
    if np.any(math.pi / 2 - np.abs(arg) < DOMAIN_GUARD):
        raise OutOfDomainError("point outside the open strip (or in the guard band)")
    u = sec * sec * np.log(np.cos(arg)) - tan_t * y
    ux = -sec * np.tan(arg)
    uy = np.full_like(u, -tan_t)
    uxx = -1.0 / np.cos(arg) ** 2
    uxy = np.zeros_like(u)
    uyy = np.zeros_like(u)
    return u, (ux, uy), (uxx, uxy, uyy)


def pde_residual(u, Du, D2u):
    """Translator equation residual of a jet; zero iff the jet solves it.

    (1 + u_y^2) u_xx - 2 u_x u_y u_xy + (1 + u_x^2) u_yy + u_x^2 + u_y^2 + 1
    """
    ux, uy = Du
    uxx, uxy, uyy = D2u
    return ((1.0 + uy * uy) * uxx - 2.0 * ux * uy * uxy
            + (1.0 + ux * ux) * uyy + ux * ux + uy * uy + 1.0)


@dataclass
class ResidualReport:
    """Aggregate translator-PDE residual of a discrete height field."""

    maxAbs: float
    l2: float
    perNode: np.ndarray      # (nx, ny), NaN on the margin
    maxGrad: float           # max |Du|, diagnostic
    is_graph: bool = True    # False only for vertical planes (residual 0 by convention)


def residual_report(u: GridFunction) -> ResidualReport:
    """Central-difference residual of the translator PDE at interior nodes."""
    p, q, r, s, t = _geom.grid_jet(u)
    res = pde_residual(u.values, (p, q), (r, s, t))
    res[0, :] = res[-1, :] = np.nan
    res[:, 0] = res[:, -1] = np.nan
    inner = res[1:-1, 1:-1]
    max_abs = float(np.max(np.abs(inner)))
    l2 = math.sqrt(math.fsum((inner * inner).ravel().tolist()))
    grad2 = p[1:-1, 1:-1] ** 2 + q[1:-1, 1:-1] ** 2
    return ResidualReport(maxAbs=max_abs, l2=l2, perNode=res,
                          maxGrad=float(np.sqrt(np.max(grad2))))


def plane_report() -> ResidualReport:
    """Vertical planes translate trivially; residual 0 by convention, flagged."""
    return ResidualReport(maxAbs=0.0, l2=0.0, perNode=np.zeros((0, 0)),
                          maxGrad=math.inf, is_graph=False)


def sample_grid(t: AnalyticTranslator, h: float, half_width_frac: float = 0.9,
                y_extent: float | None = None) -> GridFunction:
    """Sample the analytic translator on a truncated strip.

    The x-range is +-(half_width_frac * half_width); y spans the same extent
    unless y_extent is given.  Node counts are chosen so the spacing is h
    rounded to fit.
    """
    if not (0.0 < half_width_frac < 1.0):
        raise ValueError("half_width_frac must lie in (0, 1)")
    xw = t.half_width * half_width_frac
    yw = xw if y_extent is None else y_extent
    nx = max(int(round(2 * xw / h)) + 1, 5)
    ny = max(int(round(2 * yw / h)) + 1, 5)
    hx = 2 * xw / (nx - 1)
    hy = 2 * yw / (ny - 1)
    X, Y = np.meshgrid(-xw + hx * np.arange(nx), -yw + hy * np.arange(ny),
                       indexing="ij")
    u, _, _ = evaluate(t, X, Y)
    return GridFunction(nx, ny, hx, hy, -xw, -yw, u)

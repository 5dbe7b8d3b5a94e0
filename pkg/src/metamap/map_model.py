"""Piecewise expanding interval maps, their perturbation families, and
hypothesis checks.

A map of [0,1] is represented as an ordered list of monotone branches over a
critical partition 0 = c_0 < c_1 < ... < c_d = 1.  At interior partition
points the map is bi-valued: both one-sided limits are kept, each computed
from the adjacent branch.  Branches are either affine (slope, intercept) or
smooth (user-supplied function with first and second derivatives).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

ENDPOINT_TOL = 1e-12
PREIMAGE_XTOL = 1e-13


class MapModelError(ValueError):
    """Invalid map geometry or domain violation."""


class HypothesisViolation(MapModelError):
    """A structural hypothesis of the metastable setting is broken."""


@dataclass(frozen=True)
class Interval:
    """Closed subinterval of [0,1]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 - ENDPOINT_TOL <= self.lo <= self.hi <= 1.0 + ENDPOINT_TOL):
            raise MapModelError(f"interval [{self.lo}, {self.hi}] not inside [0,1]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class Branch:
    """One monotone C^2 piece of an interval map.

    Affine branches carry (slope, intercept) and are handled in closed form
    everywhere.  Smooth branches carry callables ``f``, ``df``, ``d2f`` and
    fall back to sampling / bracketed root finding.
    """

    domain: Interval
    slope: Optional[float] = None
    intercept: Optional[float] = None
    f: Optional[Callable[[float], float]] = None
    df: Optional[Callable[[float], float]] = None
    d2f: Optional[Callable[[float], float]] = None

    @classmethod
    def affine(cls, lo, hi, slope, intercept) -> "Branch":
        return cls(domain=Interval(float(lo), float(hi)),
                   slope=float(slope), intercept=float(intercept))

    @classmethod
    def smooth(cls, lo, hi, f, df, d2f) -> "Branch":
        return cls(domain=Interval(float(lo), float(hi)), f=f, df=df, d2f=d2f)

    @property
    def is_affine(self) -> bool:
        return self.slope is not None

    def __post_init__(self):
        if self.is_affine:
            if abs(self.slope) <= 1.0:
                raise MapModelError(
                    f"branch on [{self.domain.lo}, {self.domain.hi}] has |slope| "
                    f"{abs(self.slope)} <= 1; map must be uniformly expanding")
        else:
            if self.f is None or self.df is None or self.d2f is None:
                raise MapModelError("smooth branch needs f, df and d2f")
            if self.min_abs_derivative() <= 1.0:
                raise MapModelError("smooth branch is not uniformly expanding")
        lo, hi = self.image()
        if lo < -ENDPOINT_TOL or hi > 1.0 + ENDPOINT_TOL:
            raise MapModelError(
                f"branch image [{lo}, {hi}] escapes [0,1]")

    def __call__(self, x: float) -> float:
        if self.is_affine:
            return self.slope * x + self.intercept
        return self.f(x)

    def derivative(self, x: float) -> float:
        if self.is_affine:
            return self.slope
        return self.df(x)

    @property
    def orientation(self) -> int:
        """+1 for increasing branches, -1 for decreasing."""
        d = self.slope if self.is_affine else self.df(self.domain.midpoint())
        return 1 if d > 0 else -1

    def image(self) -> tuple[float, float]:
        a, b = self(self.domain.lo), self(self.domain.hi)
        return (a, b) if a <= b else (b, a)

    def min_abs_derivative(self, samples: int = 2048) -> float:
        """Lower bound for inf |T'| over the closed branch domain.

        Exact for affine branches; for smooth branches a dense sample is
        corrected downward by a curvature term so the bound is safe.
        """
        if self.is_affine:
            return abs(self.slope)
        xs = np.linspace(self.domain.lo, self.domain.hi, samples)
        d = np.abs([self.df(x) for x in xs])
        curv = np.max(np.abs([self.d2f(x) for x in xs]))
        h = (self.domain.hi - self.domain.lo) / (samples - 1)
        return float(np.min(d) - 0.5 * curv * h)

    def max_distortion(self, samples: int = 2048) -> float:
        """sup |T''| / |T'| over the branch; 0 for affine branches."""
        if self.is_affine:
            return 0.0
        prev = -1.0
        while True:
            xs = np.linspace(self.domain.lo, self.domain.hi, samples)
            vals = np.abs([self.d2f(x) for x in xs]) / np.abs([self.df(x) for x in xs])
            cur = float(np.max(vals))
            if prev >= 0 and abs(cur - prev) <= 1e-6 * max(1.0, cur) or samples >= 1 << 18:
                return cur
            prev, samples = cur, samples * 2

    def preimage(self, y: float, tol: float = ENDPOINT_TOL) -> Optional[float]:
        """The unique x in the branch domain with T(x) = y, or None.

        Affine branches are solved in closed form; smooth branches by
        bracketed root finding to xtol 1e-13.
        """
        lo, hi = self.image()
        if not (lo - tol <= y <= hi + tol):
            return None
        if self.is_affine:
            x = (y - self.intercept) / self.slope
            return min(max(x, self.domain.lo), self.domain.hi)
        a, b = self.domain.lo, self.domain.hi
        fa, fb = self.f(a) - y, self.f(b) - y
        if abs(fa) <= tol:
            return a
        if abs(fb) <= tol:
            return b
        if fa * fb > 0:
            return None
        try:
            return float(brentq(lambda x: self.f(x) - y, a, b, xtol=PREIMAGE_XTOL))
        except RuntimeError as exc:  # pragma: no cover - brentq rarely fails
            raise MapModelError(f"preimage solve failed on branch {self.domain}: {exc}")


@dataclass(frozen=True)
class PiecewiseMap:
    """Piecewise C^2 uniformly expanding map of [0,1].

    Branch domains tile [0,1] exactly, sharing only endpoints; the critical
    set is the ordered list of all branch endpoints.
    """

    branches: tuple[Branch, ...]

    def __init__(self, branches: Sequence[Branch]):
        object.__setattr__(self, "branches", tuple(branches))
        self._validate()

    def _validate(self):
        if not self.branches:
            raise MapModelError("map needs at least one branch")
        if abs(self.branches[0].domain.lo) > ENDPOINT_TOL:
            raise MapModelError("first branch must start at 0")
        if abs(self.branches[-1].domain.hi - 1.0) > ENDPOINT_TOL:
            raise MapModelError("last branch must end at 1")
        for a, b in zip(self.branches, self.branches[1:]):
            if abs(a.domain.hi - b.domain.lo) > ENDPOINT_TOL:
                raise MapModelError(
                    f"branch domains [{a.domain.lo},{a.domain.hi}] and "
                    f"[{b.domain.lo},{b.domain.hi}] do not tile [0,1]")

    @property
    def critical_set(self) -> tuple[float, ...]:
        pts = [b.domain.lo for b in self.branches]
        pts.append(self.branches[-1].domain.hi)
        return tuple(pts)

    def branch_at(self, x: float) -> Branch:
        """The branch whose open domain contains x (left branch at shared
        endpoints other than 0)."""
        for br in self.branches:
            if x <= br.domain.hi + ENDPOINT_TOL:
                return br
        return self.branches[-1]

    def __call__(self, x: float) -> float:
        """Single-valued evaluation; at interior critical points returns the
        left limit (use :func:`evaluate` for both one-sided values)."""
        vals = evaluate(self, x)
        return vals[0]


def evaluate(map_: PiecewiseMap, x: float) -> tuple[float, ...]:
    """One or both values of the (possibly bi-valued) map at x.

    Interior branch points yield the single branch value.  At a shared
    critical point both one-sided limits are returned, deduplicated when they
    agree to 1e-12.
    """
    if x < -ENDPOINT_TOL or x > 1.0 + ENDPOINT_TOL:
        raise MapModelError(f"x={x} outside [0,1]")
    x = min(max(x, 0.0), 1.0)
    vals = []
    for br in map_.branches:
        if br.domain.lo - ENDPOINT_TOL <= x <= br.domain.hi + ENDPOINT_TOL:
            vals.append(br(x))
    out: list[float] = []
    for v in vals:
        if not any(abs(v - w) <= ENDPOINT_TOL for w in out):
            out.append(v)
    return tuple(out)


def min_expansion(map_: PiecewiseMap) -> float:
    """inf |T'| over [0,1] minus the critical set."""
    return min(b.min_abs_derivative() for b in map_.branches)


def distortion(map_: PiecewiseMap) -> float:
    """sup |T''| / |T'|; exactly 0 for fully affine maps."""
    return max(b.max_distortion() for b in map_.branches)


def branch_preimages(map_: PiecewiseMap, y: float) -> list[tuple[float, int]]:
    """All (x, branch index) with T restricted to that branch mapping x to y."""
    if y < -ENDPOINT_TOL or y > 1.0 + ENDPOINT_TOL:
        raise MapModelError(f"y={y} outside [0,1]")
    out = []
    for i, br in enumerate(map_.branches):
        x = br.preimage(y)
        if x is not None:
            out.append((x, i))
    return out


def infinitesimal_holes(map_: PiecewiseMap, b: float) -> list[float]:
    """Preimages of the boundary point b, excluding b itself.

    Each returned point must lie in the critical set; a preimage strictly
    inside a branch would mean the two halves [0,b], [b,1] are not invariant.
    """
    if not (0.0 < b < 1.0):
        raise MapModelError("boundary point must be interior")
    crit = map_.critical_set
    holes: list[float] = []
    for x, i in branch_preimages(map_, b):
        if abs(x - b) <= ENDPOINT_TOL:
            continue
        if min(abs(x - c) for c in crit) > ENDPOINT_TOL:
            raise HypothesisViolation(
                f"preimage {x} of boundary {b} lies strictly inside branch {i}; "
                "the two halves are not invariant at eps=0")
        if not any(abs(x - h) <= ENDPOINT_TOL for h in holes):
            holes.append(x)
    return sorted(holes)


def _dedup(points: list[float], tol: float = ENDPOINT_TOL) -> list[float]:
    out: list[float] = []
    for p in sorted(points):
        if not out or p - out[-1] > tol:
            out.append(p)
    return out


def postcritical_points(map_: PiecewiseMap, depth: int) -> dict[int, list[float]]:
    """Forward images of the critical set, keyed by iteration count 1..depth.

    Bi-valued points contribute both one-sided images at every step.
    """
    if depth < 1:
        raise MapModelError("depth must be >= 1")
    layers: dict[int, list[float]] = {}
    frontier = list(map_.critical_set)
    for k in range(1, depth + 1):
        nxt: list[float] = []
        for x in frontier:
            nxt.extend(evaluate(map_, x))
        layers[k] = _dedup(nxt)
        frontier = layers[k]
    return layers


@dataclass(frozen=True)
class PerturbationFamily:
    """eps -> PiecewiseMap with branch coefficients linear in eps.

    ``slope_eps`` / ``intercept_eps`` perturb affine branches additively;
    smooth branches may carry an additive term ``g(x, eps)`` with derivatives.
    Branch domains (hence the critical set) do not move with eps.

    ``hole_coefficients`` optionally records, per infinitesimal hole h, the
    first-order growth (a, b) of the hole (h - a*eps + o(eps), h + b*eps + o(eps)).
    """

    base: PiecewiseMap
    slope_eps: tuple[float, ...] = ()
    intercept_eps: tuple[float, ...] = ()
    smooth_eps: tuple[Optional[tuple], ...] = ()   # per branch: (g, dg, d2g) or None
    boundary_b: float = 0.5
    hole_coefficients: tuple[tuple[float, float, float], ...] = ()  # (h, a, b)
    lebesgue_halves: bool = False   # ergodic densities at eps=0 are 2*1_half

    def __post_init__(self):
        nb = len(self.base.branches)
        for name in ("slope_eps", "intercept_eps"):
            arr = getattr(self, name)
            if arr and len(arr) != nb:
                raise MapModelError(f"{name} must have one entry per branch")
        for h, a, b in self.hole_coefficients:
            if a < 0 or b < 0:
                raise MapModelError("hole growth coefficients must be >= 0")
        if not (0.0 < self.boundary_b < 1.0):
            raise MapModelError("boundary point must be interior")

    def instantiate(self, eps: float) -> PiecewiseMap:
        """The map at parameter eps; eps=0 reproduces the base exactly."""
        if eps == 0.0:
            return self.base
        branches = []
        for i, br in enumerate(self.base.branches):
            ds = self.slope_eps[i] if self.slope_eps else 0.0
            di = self.intercept_eps[i] if self.intercept_eps else 0.0
            if br.is_affine:
                branches.append(Branch.affine(br.domain.lo, br.domain.hi,
                                              br.slope + eps * ds,
                                              br.intercept + eps * di))
            else:
                g = self.smooth_eps[i] if self.smooth_eps else None
                if g is None:
                    branches.append(br)
                else:
                    gf, gdf, gd2f = g
                    branches.append(Branch.smooth(
                        br.domain.lo, br.domain.hi,
                        lambda x, _f=br.f, _g=gf, _e=eps: _f(x) + _e * _g(x),
                        lambda x, _df=br.df, _dg=gdf, _e=eps: _df(x) + _e * _dg(x),
                        lambda x, _d2f=br.d2f, _d2g=gd2f, _e=eps: _d2f(x) + _e * _d2g(x)))
        return PiecewiseMap(branches)

    def infinitesimal_holes(self) -> list[float]:
        return infinitesimal_holes(self.base, self.boundary_b)


@dataclass
class HypothesisReport:
    """Outcome of the checkable structural hypotheses for one family.

    Uniqueness of the ergodic densities (both before and after perturbation)
    is not decided here; the spectral solver flags non-simple leading
    eigenvalues instead.
    """

    min_expansion: float
    distortion: float
    passes_I2: bool
    checked_depth: int
    passes_I3: Optional[bool]
    passes_I4a: bool
    passes_P2: bool
    diagnostics: list[str] = field(default_factory=list)

    @property
    def all_checked_pass(self) -> bool:
        checked = [self.passes_I2, self.passes_I4a, self.passes_P2]
        if self.passes_I3 is not None:
            checked.append(self.passes_I3)
        return all(checked)


def validate_hypotheses(family: PerturbationFamily, depth: int = 8,
                        phi_l=None, phi_r=None,
                        tol: float = 1e-9) -> HypothesisReport:
    """Check the finite-horizon structural hypotheses of a family.

    * no-return: forward images of the critical set up to ``depth`` steps stay
      at distance > tol from the infinitesimal holes;
    * expansion: min |T'| > 2;
    * boundary: either the boundary point is critical with a genuine one-sided
      gap across it, or it is a fixed point of every instantiation;
    * hole positivity (only when phi_l/phi_r grids are supplied): the ergodic
      densities are positive at the infinitesimal holes.

    Failures are reported with diagnostics, never raised.
    """
    if depth < 1:
        raise MapModelError("depth must be >= 1")
    T0 = family.base
    diags: list[str] = []
    lam = min_expansion(T0)
    dis = distortion(T0)

    halves_invariant = True
    try:
        holes = family.infinitesimal_holes()
    except HypothesisViolation as exc:
        halves_invariant = False
        holes = []
        diags.append(f"setup fails: {exc}")

    passes_i2 = True
    layers = postcritical_points(T0, depth)
    for k, pts in layers.items():
        for p in pts:
            d = min((abs(p - h) for h in holes), default=math.inf)
            if d <= tol:
                passes_i2 = False
                diags.append(
                    f"(I2) fails: iterate {k} of the critical set hits "
                    f"infinitesimal hole at {p:.12g} (distance {d:.3g})")
    if passes_i2:
        diags.append(f"(I2) holds to depth {depth} (finite-horizon check only)")

    passes_i4a = lam > 2.0
    if not passes_i4a:
        diags.append(f"(I4a) fails: min expansion {lam} <= 2")

    b = family.boundary_b
    crit = T0.critical_set
    b_critical = min(abs(b - c) for c in crit) <= ENDPOINT_TOL
    if not halves_invariant:
        passes_p2 = False
    elif b_critical:
        # One-sided values must straddle the boundary strictly; the boundary
        # stays critical automatically (domains do not move in this model).
        left = T0.branch_at(b - ENDPOINT_TOL)(b)
        idx = [i for i, br in enumerate(T0.branches)
               if abs(br.domain.lo - b) <= ENDPOINT_TOL]
        right = T0.branches[idx[0]](b) if idx else left
        passes_p2 = left < b - tol and right > b + tol
        if not passes_p2:
            diags.append(
                f"(P2b) fails: need T0(b-) < b < T0(b+), got "
                f"T0(b-)={left:.12g}, b={b:.12g}, T0(b+)={right:.12g}")
    else:
        vals0 = evaluate(T0, b)
        passes_p2 = len(vals0) == 1 and abs(vals0[0] - b) <= tol
        if passes_p2:
            for eps in (1e-2, 1e-3):
                veps = evaluate(family.instantiate(eps), b)
                if len(veps) != 1 or abs(veps[0] - b) > tol:
                    passes_p2 = False
                    diags.append(f"(P2a) fails: T_eps(b) != b at eps={eps}")
                    break
        else:
            diags.append(f"(P2a) fails: T0(b)={vals0} but b={b} is not critical")

    passes_i3: Optional[bool] = None
    if phi_l is not None and phi_r is not None:
        passes_i3 = True
        for h in holes:
            grid = phi_l if h < b else phi_r
            v = grid.value_near(h)
            if v <= tol:
                passes_i3 = False
                diags.append(f"(I3) fails: ergodic density ~{v:.3g} at hole {h:.12g}")
    else:
        diags.append("(I3) not checked: no ergodic densities supplied")
    diags.append("(I1)/(P1) assumed; verify via spectral simplicity probe")

    return HypothesisReport(min_expansion=lam, distortion=dis,
                            passes_I2=passes_i2, checked_depth=depth,
                            passes_I3=passes_i3, passes_I4a=passes_i4a,
                            passes_P2=passes_p2, diagnostics=diags)

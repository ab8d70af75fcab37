"""Symmetric polyhedral norms: diamonds, crowns, projections, geodesic tracking.

A polyhedral norm is the maximum of a finite symmetric spanning family of
linear functionals.  The set of points realizing the triangle equality
between x and y (the union of all geodesics from x to y) is a compact
polytope, the diamond; it is the intersection of the two "special cones"
at x toward y and at y toward x, and membership is decided by an explicit
halfspace system derived from the active functionals.

The geodesic tracker walks a quasi-ruled path and greedily projects each
sample into the diamond spanned by the previous waypoint and the far
endpoint.  Nested-diamond chaining makes the resulting polyline an exactly
certified geodesic: the lengths telescope to the endpoint distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial

import numpy as np

from .config import DEFAULTS
from .errors import DimensionMismatch, DomainError, ProjectionError
from .symspace import FinslerFunctional

__all__ = [
    "PolyNorm",
    "DiamondDescription",
    "PolyPath",
    "max_norm",
    "weyl_norm",
    "norm_eval",
    "diamond",
    "crown_contains",
    "project_to_diamond",
    "quasi_ruled_defect",
    "track_geodesic",
    "hausdorff_distance",
]


@dataclass(frozen=True, eq=False)
class PolyNorm:
    """max-of-functionals norm; rows of ``functionals`` are the covectors.

    ``embedding`` is set when the norm lives on a subspace of a larger
    ambient space (columns form an orthonormal basis of the subspace); it
    maps reduced coordinates to ambient vectors.
    """

    functionals: np.ndarray
    embedding: np.ndarray | None = None

    def __post_init__(self):
        a = np.asarray(self.functionals, dtype=float)
        if a.ndim != 2:
            raise DimensionMismatch("functionals must be a 2d array")
        if np.any(np.linalg.norm(a, axis=1) < 1e-14):
            raise DomainError("zero functional")
        if np.linalg.matrix_rank(a) < a.shape[1]:
            raise DomainError("functionals do not span the dual space")
        # symmetry: -A = A as a set
        for row in a:
            if np.min(np.linalg.norm(a + row[np.newaxis, :], axis=1)) > 1e-9 * np.linalg.norm(row):
                raise DomainError("functional family is not symmetric")
        object.__setattr__(self, "functionals", a)

    @property
    def dim(self) -> int:
        return self.functionals.shape[1]

    def value(self, v) -> float:
        return float(np.max(self.functionals @ np.asarray(v, dtype=float)))

    def dist(self, u, v) -> float:
        return self.value(np.asarray(u, dtype=float) - np.asarray(v, dtype=float))

    def to_reduced(self, v_ambient):
        if self.embedding is None:
            return np.asarray(v_ambient, dtype=float)
        return self.embedding.T @ np.asarray(v_ambient, dtype=float)

    def to_ambient(self, u):
        if self.embedding is None:
            return np.asarray(u, dtype=float)
        return self.embedding @ np.asarray(u, dtype=float)


def max_norm(n: int) -> PolyNorm:
    """The sup-norm on R^n: functionals are plus/minus the coordinate forms."""
    eye = np.eye(n)
    return PolyNorm(np.concatenate([eye, -eye], axis=0))


def weyl_norm(d: int, f: FinslerFunctional) -> PolyNorm:
    """The permutation-orbit norm realizing the Finsler functional.

    The functionals are all coordinate permutations of the scaled weight
    vector; evaluation on trace-free vectors agrees with the sorted-weights
    formula.  Returned in reduced coordinates on the trace-free subspace
    (so the functional family is spanning); ``embedding`` maps back.
    """
    if d > 6:
        raise DomainError(f"permutation norm with d={d} has {factorial(d)} functionals; capped at d=6")
    if f.dim != d:
        raise DimensionMismatch("functional dimension mismatch")
    w = f.scale * f.weights
    rows = np.array(sorted({tuple(w[list(p)]) for p in permutations(range(d))}))
    ones = np.ones((1, d))
    _, _, vt = np.linalg.svd(ones)
    basis = vt[1:].T  # d x (d-1), orthonormal, trace-free columns
    return PolyNorm(rows @ basis, embedding=basis)


def norm_eval(p: PolyNorm, v, tol_active: float = DEFAULTS.active_rel):
    """Value of the norm and the set of active functionals (argmax indices)."""
    vals = p.functionals @ np.asarray(v, dtype=float)
    value = float(np.max(vals))
    cutoff = value - tol_active * max(1.0, abs(value))
    active = tuple(int(i) for i in np.flatnonzero(vals >= cutoff))
    return value, active


@dataclass(frozen=True, eq=False)
class DiamondDescription:
    """Halfspace description of the diamond of a pair of points.

    Membership in {v : C v <= offsets} is equivalent to the triangle
    equality d(x,z) + d(z,y) = d(x,y).
    """

    x: np.ndarray
    y: np.ndarray
    active_x_to_y: tuple
    active_y_to_x: tuple
    halfspaces: np.ndarray
    offsets: np.ndarray

    def contains(self, z, tol: float = 1e-9) -> bool:
        z = np.asarray(z, dtype=float)
        return bool(np.all(self.halfspaces @ z - self.offsets <= tol))

    def violation(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(np.max(self.halfspaces @ z - self.offsets, initial=0.0))


def diamond(x, y, p: PolyNorm, tol_active: float = DEFAULTS.active_rel) -> DiamondDescription:
    """The diamond D(x,y): intersection of the special cones at x and at y.

    For each functional a active on y-x, the cone {z : |z-x| = a(z-x)} is
    cut out by (b - a)(z - x) <= 0 over all functionals b; the mirrored
    system at y completes the diamond.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = p.functionals
    _, act_xy = norm_eval(p, y - x, tol_active)
    _, act_yx = norm_eval(p, x - y, tol_active)
    rows, offs = [], []
    for base_pt, act in ((x, act_xy), (y, act_yx)):
        for i in act:
            c = a - a[i][np.newaxis, :]
            keep = np.linalg.norm(c, axis=1) > 1e-14
            rows.append(c[keep])
            offs.append(c[keep] @ base_pt)
    halfspaces = np.concatenate(rows, axis=0)
    offsets = np.concatenate(offs, axis=0)
    return DiamondDescription(x=x, y=y, active_x_to_y=act_xy, active_y_to_x=act_yx,
                              halfspaces=halfspaces, offsets=offsets)


def crown_contains(x, y, z, p: PolyNorm, tol_active: float = DEFAULTS.active_rel,
                   tol_membership: float = 1e-9) -> bool:
    """Whether z lies on the boundaries of both special cones of the pair.

    For a generic pair (a unique active functional on y-x) this asks that
    the active sets of z-x and z-y both contain at least two functionals;
    for a non-generic pair the crown is the whole diamond.
    """
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    dia = diamond(x, y, p, tol_active)
    if not dia.contains(z, tol_membership):
        return False
    if len(dia.active_x_to_y) > 1:
        return True
    _, act_zx = norm_eval(p, z - x, tol_active)
    _, act_zy = norm_eval(p, z - y, tol_active)
    return len(act_zx) >= 2 and len(act_zy) >= 2


# ---------------------------------------------------------------------------
# Euclidean projection onto the diamond polytope
# ---------------------------------------------------------------------------

def _project_polytope(z, c, b, feasible_start, max_iter: int = 10_000):
    """Euclidean closest point of {v : C v <= b} via a primal active set.

    Standard strictly convex QP active-set iteration: move toward the
    equality-constrained minimizer of the working set, blocking on the
    first violated constraint, and drop constraints with negative
    multipliers at a local optimum.
    """
    z = np.asarray(z, dtype=float)
    scale = 1.0 + float(np.max(np.abs(b), initial=0.0)) + float(np.max(np.abs(z)))
    feas_tol = 1e-11 * scale
    if np.all(c @ z - b <= 1e-15 * scale):
        return z.copy()
    x = np.asarray(feasible_start, dtype=float).copy()
    work: list[int] = []
    for _ in range(max_iter):
        if work:
            cw = c[work]
            mu, *_ = np.linalg.lstsq(cw @ cw.T, cw @ z - b[work], rcond=None)
            v_star = z - cw.T @ mu
        else:
            mu = np.zeros(0)
            v_star = z.copy()
        step = v_star - x
        if float(np.max(np.abs(step))) <= 1e-13 * scale:
            if mu.size and float(np.min(mu)) < -1e-10:
                work.pop(int(np.argmin(mu)))
                continue
            return v_star
        # ratio test against constraints outside the working set
        slack = b - c @ x
        rate = c @ step
        alpha, blocking = 1.0, None
        outside = np.ones(c.shape[0], dtype=bool)
        outside[work] = False
        candidates = np.flatnonzero(outside & (rate > 1e-14 * scale))
        if candidates.size:
            ratios = np.maximum(slack[candidates], 0.0) / rate[candidates]
            j = int(np.argmin(ratios))
            if ratios[j] < alpha:
                alpha, blocking = float(ratios[j]), int(candidates[j])
        x = x + alpha * step
        if blocking is not None:
            work.append(blocking)
    raise ProjectionError(f"polytope projection did not converge in {max_iter} iterations")


def project_to_diamond(x, y, z, p: PolyNorm,
                       description: DiamondDescription | None = None) -> np.ndarray:
    """Euclidean closest point of the diamond D(x,y) to z."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    dia = description if description is not None else diamond(x, y, p)
    return _project_polytope(z, dia.halfspaces, dia.offsets, feasible_start=x)


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class PolyPath:
    """A polyline with a metric handle (a PolyNorm or a distance callback)."""

    breakpoints: np.ndarray
    metric: object

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        if b.ndim != 2 or b.shape[0] < 1:
            raise DimensionMismatch("breakpoints must be a nonempty 2d array")
        diffs = np.linalg.norm(np.diff(b, axis=0), axis=1)
        if b.shape[0] > 1 and np.any(diffs < 1e-14 * (1.0 + np.max(np.abs(b)))):
            raise DomainError("consecutive breakpoints must be distinct")
        object.__setattr__(self, "breakpoints", b)

    def dist(self, u, v) -> float:
        if isinstance(self.metric, PolyNorm):
            return self.metric.dist(u, v)
        return float(self.metric(u, v))

    def length(self) -> float:
        b = self.breakpoints
        return float(sum(self.dist(b[i], b[i + 1]) for i in range(b.shape[0] - 1)))

    def point_at(self, t: float) -> np.ndarray:
        """Point at fractional breakpoint index t in [0, len-1]."""
        b = self.breakpoints
        i = int(np.clip(np.floor(t), 0, b.shape[0] - 2)) if b.shape[0] > 1 else 0
        s = t - i
        return (1.0 - s) * b[i] + s * b[min(i + 1, b.shape[0] - 1)]


def quasi_ruled_defect(path: PolyPath, sampler: str = "breakpoints+random",
                       n_random: int = 10, seed: int = 0) -> float:
    """Largest triangle-equality defect over sampled ordered triples.

    With breakpoint-only sampling this is exact (up to a bounded factor)
    for piecewise-geodesic paths; the default adds random interior triples
    per segment pair.
    """
    b = path.breakpoints
    m = b.shape[0]
    if m < 3:
        return 0.0
    pts = [b[i] for i in range(m)]
    params = list(range(m))
    if sampler == "breakpoints+random":
        rng = np.random.default_rng(seed)
        for i in range(m - 1):
            for j in range(i + 1, m - 1):
                for _ in range(n_random):
                    t1 = i + rng.random()
                    t3 = j + rng.random()
                    if t3 <= t1:
                        t1, t3 = t3, t1
                    t2 = t1 + (t3 - t1) * rng.random()
                    pts.extend([path.point_at(t1), path.point_at(t2), path.point_at(t3)])
                    params.extend([t1, t2, t3])
    elif sampler != "breakpoints":
        raise DomainError(f"unknown sampling policy {sampler!r}")
    order = np.argsort(params)
    pts = [pts[i] for i in order]
    n = len(pts)
    dmat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dmat[i, j] = path.dist(pts[i], pts[j])
    worst = 0.0
    for j in range(1, n - 1):
        left = dmat[:j, j]
        right = dmat[j, j + 1:]
        through = dmat[:j, j + 1:]
        worst = max(worst, float(np.max(left[:, None] + right[None, :] - through)))
    return max(worst, 0.0)


def track_geodesic(path: PolyPath, p: PolyNorm, resolution: float | None = None):
    """Greedy nested-diamond geodesic construction.

    Walk the input path; project each sample into the diamond spanned by the
    last waypoint and the far endpoint.  Every waypoint then realizes the
    triangle equality with its predecessor and the endpoint, so the output
    lengths telescope exactly to the endpoint distance (certified geodesic).
    Returns the geodesic and the sampled Hausdorff distance to the input.
    """
    b = path.breakpoints
    x, y = b[0], b[-1]
    total = p.dist(x, y)
    scale = 1.0 + float(np.max(np.abs(b)))
    waypoints = [x]
    for i in range(1, b.shape[0] - 1):
        w = project_to_diamond(waypoints[-1], y, b[i], p)
        if p.dist(w, waypoints[-1]) <= 1e-12 * scale:
            continue
        if p.dist(w, y) <= 1e-12 * scale:
            break
        waypoints.append(w)
    if p.dist(waypoints[-1], y) > 1e-12 * scale or len(waypoints) == 1:
        waypoints.append(y)
    geo = PolyPath(np.array(waypoints), p)
    if resolution is None:
        resolution = max(total / 256.0, 1e-9)
    h = hausdorff_distance(path, geo, p, resolution)
    return geo, h


def _densify(path: PolyPath, p: PolyNorm, resolution: float) -> np.ndarray:
    b = path.breakpoints
    if b.shape[0] == 1:
        return b.copy()
    pts = [b[0]]
    for i in range(b.shape[0] - 1):
        seg = p.dist(b[i], b[i + 1])
        n = max(1, int(np.ceil(seg / resolution)))
        for s in range(1, n + 1):
            pts.append(b[i] + (b[i + 1] - b[i]) * (s / n))
    return np.array(pts)


def _directed_hausdorff(a_pts: np.ndarray, b_pts: np.ndarray, p: PolyNorm) -> float:
    fa = a_pts @ p.functionals.T
    fb = b_pts @ p.functionals.T
    # distance from each a-point to the nearest b-point, maximizing over
    # functionals one at a time to bound memory
    dmat = np.full((a_pts.shape[0], b_pts.shape[0]), -np.inf)
    for k in range(p.functionals.shape[0]):
        np.maximum(dmat, fa[:, k][:, None] - fb[:, k][None, :], out=dmat)
    return float(dmat.min(axis=1).max())


def hausdorff_distance(a: PolyPath, b: PolyPath, p: PolyNorm, resolution: float) -> float:
    """Symmetric sampled Hausdorff distance with sampling step <= resolution.

    Lipschitz interpolation bounds the over-approximation by the resolution.
    """
    if resolution <= 0:
        raise DomainError("resolution must be positive")
    a_pts = _densify(a, p, resolution)
    b_pts = _densify(b, p, resolution)
    return max(_directed_hausdorff(a_pts, b_pts, p),
               _directed_hausdorff(b_pts, a_pts, p))

"""The symmetric space of SL(d,R) with a polyhedral Finsler metric.

Points are unit-determinant symmetric positive-definite matrices (the
inner products on R^d of unit volume); the group acts by congruence
``p -> g p g^T``, the basepoint is the identity.  The vector-valued
distance between two points is the sorted log-spectrum of the relative
position matrix, and a Weyl-invariant linear functional on the diagonal
turns it into an invariant Finsler distance.

The irreducible embedding of SL(2,R) acts on binary forms of degree d-1;
in the weighted monomial basis used here it carries rotations to rotations,
so the hyperbolic plane embeds isometrically and totally geodesically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .config import DEFAULTS
from .errors import DimensionMismatch, DomainError, NonUnimodular, SpectralError
from .scaled import ScaledMatrix, SpectralLog, eig_log_moduli, svd_log

__all__ = [
    "FinslerFunctional",
    "SymPoint",
    "Flag",
    "FlatChart",
    "DiamondDistanceBound",
    "sort_desc",
    "recenter",
    "cartan_vector",
    "finsler_norm",
    "tau_embed",
    "sl2_generators",
    "hyperbolic_direction",
    "basepoint",
    "flat_point",
    "act",
    "cartan_between",
    "finsler_distance",
    "finsler_translation_length",
    "busemann_vector",
    "flag_transverse",
    "flat_through",
    "distance_to_diamond",
    "h2_distance_from_identity",
]


# ---------------------------------------------------------------------------
# vectors in the Cartan subspace
# ---------------------------------------------------------------------------

def sort_desc(v) -> np.ndarray:
    return np.sort(np.asarray(v, dtype=float))[::-1]


def recenter(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v - v.mean()


def cartan_vector(v, tol_desc: float = DEFAULTS.descending,
                  tol_sum: float = DEFAULTS.sum_zero) -> np.ndarray:
    """Validate that ``v`` is descending and trace-free; return it as array."""
    v = np.asarray(v, dtype=float)
    if np.any(np.diff(v) > tol_desc):
        raise DomainError(f"vector is not sorted descending: {v}")
    if abs(v.sum()) > tol_sum * max(1.0, float(np.max(np.abs(v), initial=0.0))):
        raise DomainError(f"vector is not trace-free: sum={v.sum()}")
    return v


def hyperbolic_direction(d: int) -> np.ndarray:
    """The diagonal direction (d-1, d-3, ..., 1-d) of the embedded H^2."""
    return np.array([d - 1 - 2 * k for k in range(d)], dtype=float)


@dataclass(frozen=True)
class FinslerFunctional:
    """Weights of a Weyl-chamber-positive linear functional, with its scale.

    The default weights are (d-1, d-3, ..., 1-d) and the default scale makes
    the embedded hyperbolic plane isometric: the norm of the hyperbolic
    direction equals 2.
    """

    weights: np.ndarray
    scale: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(np.diff(w) >= 0):
            raise DomainError("functional weights must be strictly decreasing")
        if np.max(np.abs(w + w[::-1])) > 1e-12 * np.max(np.abs(w)):
            raise DomainError("weights must be antisymmetric under index reversal")
        if abs(w.sum()) > 1e-12 * np.max(np.abs(w)):
            raise DomainError("weights must sum to zero")
        if self.scale <= 0:
            raise DomainError("scale must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @staticmethod
    def standard(d: int) -> "FinslerFunctional":
        w = hyperbolic_direction(d)
        return FinslerFunctional(w, 2.0 / float(w @ w))

    def kernel_basis(self) -> np.ndarray:
        """Orthonormal basis (columns) of {v : v trace-free, <weights, v> = 0}."""
        d = self.dim
        a = np.vstack([np.ones(d), self.weights])
        _, _, vt = np.linalg.svd(a)
        return vt[2:].T


def finsler_norm(v, f: FinslerFunctional) -> float:
    """Weyl-invariant polyhedral norm: scale * <weights, sorted(v) descending>.

    Equals the maximum of scale * <weights, w(v)> over all permutations w.
    """
    v = np.asarray(v, dtype=float)
    if abs(v.sum()) > 1e-6 * (1.0 + float(np.max(np.abs(v), initial=0.0))):
        raise DomainError(f"finsler_norm expects a trace-free vector, sum={v.sum()}")
    return f.scale * float(f.weights @ sort_desc(v))


# ---------------------------------------------------------------------------
# the irreducible embedding of SL(2,R)
# ---------------------------------------------------------------------------

def tau_embed(m2, d: int) -> ScaledMatrix:
    """Embed a unimodular 2x2 matrix as its action on binary forms of degree d-1.

    The basis is the weighted monomial basis e_k = sqrt(C(d-1,k)) X^(d-1-k) Y^k,
    which carries SO(2) into SO(d) and transposes to transposes.
    """
    m2 = np.asarray(m2, dtype=float)
    if m2.shape != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 matrix, got {m2.shape}")
    det = m2[0, 0] * m2[1, 1] - m2[0, 1] * m2[1, 0]
    # the determinant of a valid input is 1 up to cancellation noise in the
    # products above; the check is relative to that noise floor
    if abs(det - 1.0) > 1e-10 * max(1.0, float(np.max(np.abs(m2))) ** 2):
        raise NonUnimodular(f"determinant {det} != 1")
    m2 = m2 / np.sqrt(det)
    a, b, c, e = m2[0, 0], m2[0, 1], m2[1, 0], m2[1, 1]
    n = d - 1
    out = np.zeros((d, d))
    for k in range(d):
        # image of X^(n-k) Y^k is (aX+cY)^(n-k) (bX+eY)^k
        coeff = np.zeros(d)
        for p in range(n - k + 1):
            ca = comb(n - k, p) * a ** (n - k - p) * c ** p
            if ca == 0.0:
                continue
            for q in range(k + 1):
                cb = comb(k, q) * b ** (k - q) * e ** q
                coeff[p + q] += ca * cb
        out[:, k] = coeff
    # weighted-basis change: column k gains sqrt(C(n,k)), row j loses sqrt(C(n,j))
    wts = np.sqrt([comb(n, j) for j in range(d)])
    out = out * wts[np.newaxis, :] / wts[:, np.newaxis]
    return ScaledMatrix(out).normalize()


def _sl2_rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]])


def sl2_generators(d: int, t: float, theta: float):
    """The standard one-parameter subgroups through the embedding.

    Returns (a_t, r_theta, a'_t) where a_t is the diagonal geodesic flow,
    r_theta the image of the rotation by theta/2, and a'_t the conjugate
    of a_t by the quarter rotation.  The rotation orientation is chosen so
    that a'_t is entrywise positive for t > 0; at d = 2 it is
    [[cosh t, sinh t], [sinh t, cosh t]].
    """
    if d < 2:
        raise DimensionMismatch("dimension must be at least 2")
    a_t = hyperbolic_translation(d, t)
    r_theta = tau_embed(_sl2_rotation(theta), d)
    a2 = np.array([[np.cosh(t), np.sinh(t)], [np.sinh(t), np.cosh(t)]])
    a_prime = tau_embed(a2, d)
    return a_t, r_theta, a_prime


def hyperbolic_translation(d: int, t: float) -> ScaledMatrix:
    """tau(diag(e^t, e^-t)): the diagonal exp(t * hyperbolic_direction)."""
    exponents = t * hyperbolic_direction(d)
    top = float(np.max(exponents))
    return ScaledMatrix(np.diag(np.exp(exponents - top)), top)


def flat_exponential(v) -> ScaledMatrix:
    """exp(diag(v)) as a scaled matrix, safe for large exponents."""
    v = np.asarray(v, dtype=float)
    top = float(np.max(v))
    return ScaledMatrix(np.diag(np.exp(v - top)), top)


# ---------------------------------------------------------------------------
# points of the symmetric space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymPoint:
    """A point of the symmetric space: e^log_scale * p with p SPD, det 1."""

    p: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "log_scale", float(self.log_scale))

    @property
    def dim(self) -> int:
        return self.p.shape[0]

    def validate(self, tol_sym: float = DEFAULTS.spd_sym,
                 tol_det: float = DEFAULTS.det_rel) -> "SymPoint":
        if np.max(np.abs(self.p - self.p.T)) > tol_sym * max(1.0, np.max(np.abs(self.p))):
            raise DomainError("point matrix is not symmetric")
        w = np.linalg.eigvalsh(self.p)
        if w[0] <= 0:
            raise DomainError("point matrix is not positive-definite")
        logdet = float(np.sum(np.log(w))) + self.dim * self.log_scale
        if abs(logdet) > tol_det * 10 + tol_det:
            raise DomainError(f"point determinant defect {logdet}")
        return self

    @staticmethod
    def _store(p: np.ndarray, log_scale: float) -> "SymPoint":
        p = 0.5 * (p + p.T)
        m = float(np.max(np.abs(p)))
        if m == 0.0:
            raise DomainError("zero matrix is not a point")
        log_scale = log_scale + np.log(m)
        p = p / m
        if abs(log_scale) < 300.0:
            return SymPoint(p * np.exp(log_scale), 0.0)
        return SymPoint(p, log_scale)


def basepoint(d: int) -> SymPoint:
    return SymPoint(np.eye(d), 0.0)


def flat_point(v) -> SymPoint:
    """The point exp(diag(v)) . o = diag(e^{2 v}) in the standard flat."""
    v = np.asarray(v, dtype=float)
    return SymPoint._store(np.diag(np.exp(2.0 * (v - np.max(v)))), 2.0 * float(np.max(v)))


def act(g: ScaledMatrix, x: SymPoint) -> SymPoint:
    """Isometric action p -> g p g^T with scale recentering."""
    if g.dim != x.dim:
        raise DimensionMismatch(f"dimension mismatch: {g.dim} vs {x.dim}")
    return SymPoint._store(g.entries @ x.p @ g.entries.T,
                           2.0 * g.log_scale + x.log_scale)


def point_of(g: ScaledMatrix) -> SymPoint:
    """The orbit point g . o = g g^T."""
    return act(g, basepoint(g.dim))


def cartan_between(x: SymPoint, y: SymPoint) -> np.ndarray:
    """Vector-valued distance: half the sorted log-spectrum of x^(-1) y.

    Symmetrized as x^(-1/2) y x^(-1/2) and recentered to be trace-free.
    For x = o and y = g . o this equals the log singular values of g.
    """
    if x.dim != y.dim:
        raise DimensionMismatch(f"dimension mismatch: {x.dim} vs {y.dim}")
    try:
        w, u = np.linalg.eigh(x.p)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigendecomposition failed: {exc}") from exc
    if w[0] <= 0:
        raise DomainError("first point is not positive-definite")
    isqrt = u * (w ** -0.5)[np.newaxis, :]
    m = 0.5 * (isqrt.T @ y.p @ isqrt)
    m = m + m.T
    lam = np.linalg.eigvalsh(m)
    if lam[0] <= -1e-8 * lam[-1]:
        raise SpectralError("relative position matrix is not positive")
    # extract the log spectrum through exterior-power partial sums, which
    # stays accurate for spectra spread beyond what eigvalsh resolves; the
    # determinant is known exactly from the unit-volume contract
    logdet = x.dim * (x.log_scale - y.log_scale)
    spec = svd_log(ScaledMatrix(m).normalize(), logdet=logdet)
    return recenter(0.5 * spec.values)


def finsler_distance(x: SymPoint, y: SymPoint, f: FinslerFunctional) -> float:
    return finsler_norm(cartan_between(x, y), f)


def finsler_translation_length(g: ScaledMatrix, f: FinslerFunctional) -> float:
    """Stable translation length: the functional applied to the Jordan projection."""
    lam = eig_log_moduli(g)
    return f.scale * float(f.weights @ lam.values)


def spectral_finsler_value(spec: SpectralLog, f: FinslerFunctional) -> float:
    """Apply the functional to an already-computed sorted log-spectrum."""
    return f.scale * float(f.weights @ spec.values)


# ---------------------------------------------------------------------------
# flags, Busemann vectors, transversality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Flag:
    """A full flag: column k of ``basis`` spans the new direction at step k."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise DimensionMismatch(f"flag basis must be square, got {b.shape}")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.basis))

    @staticmethod
    def standard(d: int) -> "Flag":
        return Flag(np.eye(d))

    @staticmethod
    def reversed_standard(d: int) -> "Flag":
        return Flag(np.eye(d)[:, ::-1])


def _gram_logdet(v: np.ndarray, x: SymPoint) -> float:
    """log det of the Gram matrix of the columns of v in the metric of x."""
    w = np.linalg.solve(x.p, v)
    g = v.T @ w
    sign, logabs = np.linalg.slogdet(g)
    if sign <= 0:
        raise DomainError("degenerate flag: Gram matrix not positive")
    return logabs - v.shape[1] * x.log_scale


def busemann_vector(xi: Flag, x: SymPoint, y: SymPoint) -> np.ndarray:
    """Vector-valued horofunction centered at the chamber of the flag.

    The partial sums v_1 + ... + v_k equal the log of the ratio of the norms
    of the k-th wedge of the flag at x and at y; the norms are Gram
    determinants.  With this convention b(standard flag, o, exp(v) . o) = v,
    and the cocycle identity b(xi,x,y) + b(xi,y,z) = b(xi,x,z) holds.
    """
    if not (xi.dim == x.dim == y.dim):
        raise DimensionMismatch("flag and points must share a dimension")
    if xi.condition > 1e12:
        raise DomainError("degenerate flag")
    d = xi.dim
    partial = np.empty(d + 1)
    partial[0] = 0.0
    for k in range(1, d + 1):
        v = xi.basis[:, :k]
        partial[k] = 0.5 * (_gram_logdet(v, x) - _gram_logdet(v, y))
    return np.diff(partial)


def flag_transverse(xi: Flag, eta: Flag, tol: float = 1e-9) -> bool:
    """Whether every partial span of xi is complementary to the opposite one of eta."""
    if xi.dim != eta.dim:
        raise DimensionMismatch("flags must share a dimension")
    d = xi.dim
    a = xi.basis / np.linalg.norm(xi.basis, axis=0)
    b = eta.basis / np.linalg.norm(eta.basis, axis=0)
    for k in range(1, d):
        m = np.concatenate([a[:, :k], b[:, :d - k]], axis=1)
        if abs(np.linalg.det(m)) <= tol:
            return False
    return True


# ---------------------------------------------------------------------------
# maximal flats and diamonds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlatChart:
    """Coordinates on the maximal flat through two points.

    ``point(v) = frame @ exp(2 diag(v)) @ frame.T`` (times the stored log
    scale); v = 0 gives the first point and v = spectrum the second, and
    distances inside the chart are the Finsler norm of coordinate
    differences.
    """

    base: SymPoint
    frame: np.ndarray
    spectrum: np.ndarray
    frame_log: float = 0.0

    def point(self, v) -> SymPoint:
        v = np.asarray(v, dtype=float)
        top = float(np.max(v))
        core = self.frame @ np.diag(np.exp(2.0 * (v - top))) @ self.frame.T
        return SymPoint._store(core, 2.0 * top + 2.0 * self.frame_log)


def flat_through(x: SymPoint, y: SymPoint) -> FlatChart:
    """The maximal flat through two distinct points, as a coordinate chart."""
    if x.dim != y.dim:
        raise DimensionMismatch("points must share a dimension")
    try:
        w, u = np.linalg.eigh(x.p)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigendecomposition failed: {exc}") from exc
    if w[0] <= 0:
        raise DomainError("base point is not positive-definite")
    isqrt = u * (w ** -0.5)[np.newaxis, :]
    sqrt = u * (w ** 0.5)[np.newaxis, :]
    m = isqrt.T @ y.p @ isqrt
    try:
        lam, k = np.linalg.eigh(0.5 * (m + m.T))
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigendecomposition failed: {exc}") from exc
    if lam[0] <= 0:
        raise SpectralError("relative position matrix is not positive")
    spectrum = 0.5 * (np.log(lam) + (y.log_scale - x.log_scale))
    order = np.argsort(spectrum)[::-1]
    spectrum = recenter(spectrum[order])
    if float(np.max(np.abs(spectrum))) < 1e-12:
        raise DomainError("points are too close to span a flat")
    frame = sqrt @ k[:, order]
    return FlatChart(base=x, frame=frame, spectrum=spectrum,
                     frame_log=0.5 * x.log_scale)


@dataclass(frozen=True)
class DiamondDistanceBound:
    """An upper bound for the distance to a diamond, with its refinement level."""

    value: float
    refinement: int


def distance_to_diamond(x: SymPoint, y: SymPoint, z: SymPoint,
                        f: FinslerFunctional, budget: int = 8) -> DiamondDistanceBound:
    """Upper bound for the Finsler distance from z to the diamond of (x, y).

    The diamond is the set of points on Finsler geodesics from x to y; in
    flat coordinates it is the polytope of vectors v such that both v and
    spectrum - v satisfy the polyhedral triangle equality.  The bound comes
    from a projected pattern search with dyadic step refinement and
    decreases as the budget grows.
    """
    from . import polynorm

    if budget < 1:
        raise DomainError("budget must be at least 1")
    chart = flat_through(x, y)
    lam = chart.spectrum
    d = lam.shape[0]
    pn = polynorm.weyl_norm(d, f)
    b = pn.embedding
    target = b.T @ lam
    dia = polynorm.diamond(np.zeros(d - 1), target, pn)

    def phi(u):
        return finsler_distance(z, chart.point(b @ u), f)

    # seed with the chart segment between the two tips
    best_u, best_val = None, np.inf
    for s in np.linspace(0.0, 1.0, 9):
        val = phi(s * target)
        if val < best_val:
            best_u, best_val = s * target, val
    rng = np.random.default_rng(0)
    dirs = np.concatenate([np.eye(d - 1), -np.eye(d - 1)], axis=0)
    step = 0.5 * float(np.linalg.norm(target)) + 0.5
    refinement = 0
    for _ in range(budget):
        improved = True
        while improved:
            improved = False
            extra = rng.standard_normal((4, d - 1))
            extra /= np.linalg.norm(extra, axis=1, keepdims=True)
            for direction in np.concatenate([dirs, extra], axis=0):
                cand = polynorm.project_to_diamond(np.zeros(d - 1), target,
                                                   best_u + step * direction, pn,
                                                   description=dia)
                val = phi(cand)
                if val < best_val - 1e-14:
                    best_u, best_val = cand, val
                    improved = True
        step *= 0.5
        refinement += 1
    return DiamondDistanceBound(value=float(best_val), refinement=refinement)


# ---------------------------------------------------------------------------
# hyperbolic-plane oracle
# ---------------------------------------------------------------------------

def h2_distance_from_identity(g2) -> float:
    """Curvature -1 distance from i to g . i in the upper half-plane."""
    g2 = np.asarray(g2, dtype=float)
    a, b, c, e = g2[0, 0], g2[0, 1], g2[1, 0], g2[1, 1]
    num = complex(a * 1j + b)
    den = complex(c * 1j + e)
    z = num / den
    if z.imag <= 0:
        raise DomainError("matrix does not preserve the upper half-plane")
    cosh_d = 1.0 + (abs(z - 1j) ** 2) / (2.0 * z.imag)
    return float(np.arccosh(cosh_d))

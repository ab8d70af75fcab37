"""Shared experiment ensembles used by the command line, calibration and tests.

Each function is deterministic given its seed and returns plain data
(lists of row tuples and summary dicts); CSV formatting, ledger pinning
and assertions live with the callers.
"""

from __future__ import annotations

import numpy as np

from . import polynorm, positivity, surface, symspace
from .errors import DomainError
from .scaled import (ScaledMatrix, WedgeProduct, eig_log_moduli, psl_defect,
                     scaled_inv, scaled_mul, scaled_pow, svd_log)
from .surface import (AdmissiblePath, Flat, Hyperbolic, admissible_evaluate,
                      bend, cylinder_height, genus2_fuchsian, normal_form,
                      piece_matrix, random_admissible)
from .symspace import (FinslerFunctional, Flag, act, basepoint, cartan_between,
                       finsler_distance, finsler_norm, flat_point,
                       h2_distance_from_identity, point_of, sl2_generators,
                       sort_desc, tau_embed)

# ---------------------------------------------------------------------------
# random generators
# ---------------------------------------------------------------------------

def random_sl2(rng) -> np.ndarray:
    """Random 2x2 unimodular matrix with determinant renormalized to one."""
    while True:
        m = rng.standard_normal((2, 2))
        det = np.linalg.det(m)
        if abs(det) > 0.1:
            m = m / np.sqrt(abs(det))
            if det < 0:
                m[:, 0] = -m[:, 0]
            return m


def random_positive_sl2(rng) -> np.ndarray:
    """Random entrywise positive unimodular 2x2 matrix."""
    while True:
        m = np.exp(rng.uniform(-1.0, 1.0, size=(2, 2)))
        det = np.linalg.det(m)
        if det > 0.1:
            return m / np.sqrt(det)


def random_unimodular(d: int, rng, spread: float = 1.0) -> ScaledMatrix:
    """Random unimodular d x d matrix with entries of moderate size."""
    while True:
        m = rng.standard_normal((d, d)) * spread
        sign, logabs = np.linalg.slogdet(m)
        if sign != 0 and abs(logabs) < 20 * d:
            m = m * np.exp(-logabs / d)
            if sign < 0:
                m[:, 0] = -m[:, 0]
            return ScaledMatrix(m).normalize()


def random_flat_diag(d: int, rng, spread: float = 1.0) -> ScaledMatrix:
    """exp of a random trace-free diagonal: totally nonnegative."""
    v = rng.uniform(-spread, spread, size=d)
    return symspace.flat_exponential(v - v.mean())


def random_trace_free(d: int, rng, spread: float = 1.0) -> np.ndarray:
    v = rng.uniform(-spread, spread, size=d)
    return v - v.mean()


def random_tnn(d: int, rng) -> ScaledMatrix:
    """Random totally nonnegative element (semigroup product of basic ones)."""
    factors = []
    for _ in range(3):
        kind = rng.integers(3)
        if kind == 0:
            factors.append(random_flat_diag(d, rng))
        elif kind == 1:
            s = float(rng.uniform(0.0, 1.0))
            factors.append(tau_embed(np.array([[1.0, s], [0.0, 1.0]]), d))
        else:
            s = float(rng.uniform(0.0, 1.0))
            factors.append(tau_embed(np.array([[1.0, 0.0], [s, 1.0]]), d))
    out = ScaledMatrix.identity(d)
    for m in factors:
        out = scaled_mul(out, m)
    return out


def random_tp(d: int, rng) -> ScaledMatrix:
    """Random totally positive element: nonnegative factors absorbed by a'_t."""
    _, _, ap1 = sl2_generators(d, float(rng.uniform(0.2, 1.0)), np.pi / 2)
    _, _, ap2 = sl2_generators(d, float(rng.uniform(0.2, 1.0)), np.pi / 2)
    return scaled_mul(scaled_mul(ap1, random_tnn(d, rng)), ap2)


def random_loxodromic(d: int, rng, basis_skew: float = 0.02) -> ScaledMatrix:
    """Random loxodromic element with controlled eigenbasis conditioning.

    Conjugating a spread diagonal by a near-orthogonal basis keeps the
    offset in the power-iteration limit kappa(g^n)/n -> lambda(g) small, so
    the defining limit is observable at moderate n.  ``basis_skew`` sets the
    departure from normality.
    """
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    v = np.sort(rng.uniform(0.4, 2.0, size=d))[::-1]
    v -= v.mean()
    h = np.eye(d) + basis_skew * rng.standard_normal((d, d))
    m = q @ h @ np.diag(np.exp(v)) @ np.linalg.inv(h) @ q.T
    return ScaledMatrix(m).normalize()


# ---------------------------------------------------------------------------
# embedding and isometry sweep
# ---------------------------------------------------------------------------

def tau_isometry_sweep(d_values, trials: int, seed: int, inject_fault: bool = False):
    """Rows (d, trial, homomorphism_error, h2_isometry_error)."""
    rng = np.random.default_rng(seed)
    rows = []
    for d in d_values:
        f = FinslerFunctional.standard(d)
        o = basepoint(d)
        for trial in range(trials):
            a2, b2 = random_sl2(rng), random_sl2(rng)
            ta, tb = tau_embed(a2, d), tau_embed(b2, d)
            if inject_fault:
                e = ta.entries.copy()
                e[0, -1] = -e[0, -1] if e[0, -1] != 0 else 0.5
                ta = ScaledMatrix(e, ta.log_scale)
            hom_err = psl_defect(tau_embed(a2 @ b2, d), scaled_mul(ta, tb))
            iso_err = abs(finsler_distance(o, point_of(ta), f)
                          - h2_distance_from_identity(a2))
            rows.append((d, trial, hom_err, iso_err))
    return rows


# ---------------------------------------------------------------------------
# positivity suite
# ---------------------------------------------------------------------------

def positivity_suite(d_values, seed: int, semigroup_samples: int = 40):
    """Rows (test, d, margin, verdict, ok)."""
    rng = np.random.default_rng(seed)
    rows = []

    def push(test, d, report, expect):
        ok = (report.verdict is positivity.Verdict.TOTALLY_POSITIVE) if expect == "TP" \
            else report.is_tnn
        rows.append((test, d, report.margin, report.verdict.value, bool(ok)))

    for d in d_values:
        push("identity_tnn", d, positivity.total_positivity(ScaledMatrix.identity(d)), "TNN")
        for t in (0.1, 1.0, 5.0):
            _, _, ap = sl2_generators(d, t, np.pi / 2)
            push(f"aprime_tp_t{t}", d, positivity.total_positivity(ap), "TP")
        push("exp_flat_tnn", d, positivity.total_positivity(random_flat_diag(d, rng)), "TNN")
        for _ in range(semigroup_samples):
            tp, tnn = random_tp(d, rng), random_tnn(d, rng)
            push("semigroup_tp_tnn", d, positivity.total_positivity(scaled_mul(tp, tnn)), "TP")
            push("semigroup_tnn_tp", d, positivity.total_positivity(scaled_mul(tnn, tp)), "TP")
        if d <= 6:
            for _ in range(10):
                push("tau_positive", d,
                     positivity.total_positivity(tau_embed(random_positive_sl2(rng), d)), "TP")
        # transversality of negative-side flags against nonnegative-side flags
        for _ in range(10):
            g = random_tp(d, rng)
            h = random_tnn(d, rng)
            xi = Flag(np.linalg.inv(g.entries))
            eta = Flag(h.entries)
            ok = symspace.flag_transverse(xi, eta, tol=1e-9)
            rows.append(("transverse_neg_nonneg", d, np.nan, "-", bool(ok)))
        # conjugating the inverse by the half-turn preserves the verdict
        for _ in range(5):
            m = random_tp(d, rng) if rng.random() < 0.5 else random_unimodular(d, rng)
            _, r_pi, _ = sl2_generators(d, 0.0, np.pi)
            conj = scaled_mul(scaled_mul(r_pi, scaled_inv(m)), scaled_inv(r_pi))
            same = positivity.total_positivity(conj).verdict is \
                positivity.total_positivity(m).verdict
            rows.append(("half_turn_inverse_verdict", d, np.nan, "-", bool(same)))
    return rows


# ---------------------------------------------------------------------------
# Jordan limit
# ---------------------------------------------------------------------------

def jordan_limit_sweep(d: int, trials: int, seed: int, n_power: int = 64):
    """Rows (trial, sup_error) for |kappa(g^n)/n - lambda(g)|_inf.

    The power is tracked through every exterior power (level-wise squaring),
    which keeps the full log singular spectrum accurate for condition
    numbers far beyond the floating range.
    """
    if n_power & (n_power - 1):
        raise DomainError("power must be a power of two")
    rng = np.random.default_rng(seed)
    rows = []
    for trial in range(trials):
        g = random_loxodromic(d, rng)
        lam = eig_log_moduli(g).values
        w = WedgeProduct(d).absorb(g)
        n = 1
        while n < n_power:
            w.square()
            n *= 2
        err = float(np.max(np.abs(w.cartan().values / n_power - lam)))
        rows.append((trial, err))
    return rows


# ---------------------------------------------------------------------------
# admissible-path ensembles
# ---------------------------------------------------------------------------

def admissible_ensemble(omega: float, length_floor: float, trials: int,
                        pieces: int, d: int, seed: int):
    """Rows (L, trial, lengthF, endpointDist, defectMax, ratio, junctions)."""
    f = FinslerFunctional.standard(d)
    rows = []
    for trial in range(trials):
        path = random_admissible(omega, length_floor, pieces, d,
                                 seed=seed * 100003 + trial)
        mats = [surface.piece_absorbable(p, d, f) for p in path.pieces]
        dist = positivity.pairwise_increment_distances(mats, d, f)
        n = dist.shape[0]
        defect = 0.0
        for j in range(1, n - 1):
            left = dist[:j, j]
            right = dist[j, j + 1:]
            through = dist[:j, j + 1:]
            defect = max(defect, float(np.max(left[:, None] + right[None, :] - through)))
        length = path.finsler_length()
        endpoint = dist[0, n - 1]
        ratio = endpoint / length if length > 0 else 1.0
        rows.append((length_floor, trial, length, endpoint, max(defect, 0.0),
                     ratio, n - 2))
    return rows


def displacement_ensemble(omega: float, trials: int, d: int, seed: int,
                          max_pieces: int = 14):
    """Rows (junctions k, finsler displacement) for (omega, 0)-admissible paths."""
    f = FinslerFunctional.standard(d)
    rng = np.random.default_rng(seed)
    rows = []
    for trial in range(trials):
        pieces = int(rng.integers(2, max_pieces + 1))
        path = random_admissible(omega, 0.0, pieces, d, seed=seed * 7919 + trial)
        if not path.pieces:
            continue
        w = WedgeProduct(d)
        for p in path.pieces:
            w.absorb(surface.piece_absorbable(p, d, f))
        dist = f.scale * float(f.weights @ w.cartan().values)
        rows.append((len(path.pieces) - 1, dist))
    return rows


# ---------------------------------------------------------------------------
# eigenvalue-gap growth
# ---------------------------------------------------------------------------

def gap_growth(d: int, n_max: int, trials: int, seed: int, t_fixed: float = 0.5):
    """Rows (n, trial, min_gap) for products g h_1 g h_2 ... g h_n."""
    rng = np.random.default_rng(seed)
    _, _, g = sl2_generators(d, t_fixed, np.pi / 2)
    rows = []
    for trial in range(trials):
        w = WedgeProduct(d)
        for n in range(1, n_max + 1):
            w.absorb(g)
            w.absorb(random_flat_diag(d, rng))
            gaps = -np.diff(w.jordan().values)
            rows.append((n, trial, float(np.min(gaps))))
    return rows


def fit_gap_slope(rows) -> float:
    """Least-squares slope of min-gap against the factor count."""
    ns = np.array([r[0] for r in rows], dtype=float)
    gaps = np.array([r[2] for r in rows], dtype=float)
    a = np.vstack([ns, np.ones_like(ns)]).T
    slope, _ = np.linalg.lstsq(a, gaps, rcond=None)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# Morse tracker ensembles
# ---------------------------------------------------------------------------

def make_norm(kind: str, dim: int):
    """Norm selector: 'max' or 'weyl' (reduced trace-free coordinates of dim+1)."""
    if kind == "max":
        return polynorm.max_norm(dim)
    if kind == "weyl":
        return polynorm.weyl_norm(dim + 1, FinslerFunctional.standard(dim + 1))
    raise DomainError(f"unknown norm selector {kind!r}")


def quasi_ruled_zigzag(p, dim: int, c: float, rng, n_points: int = 9) -> polynorm.PolyPath:
    """A C-quasi-ruled polyline: a straight segment with interior wobble.

    Each interior sample of a straight segment moves by at most C/6 in the
    given norm, which bounds the triangle defect of the polyline by C.
    """
    direction = rng.standard_normal(dim)
    direction /= p.value(direction)
    length = max(10.0 * c, 8.0)
    y = direction * length
    pts = [np.zeros(dim)]
    for i in range(1, n_points - 1):
        base = y * (i / (n_points - 1))
        wobble = rng.standard_normal(dim)
        wobble *= rng.uniform(0.0, c / 6.0) / p.value(wobble)
        pts.append(base + wobble)
    pts.append(y)
    return polynorm.PolyPath(np.array(pts), p)


def morse_ensemble(kind: str, dim: int, c: float, trials: int, seed: int,
                   cert_tol: float = 1e-7):
    """Rows (C, trial, certified, hausdorff, hausdorff/C)."""
    p = make_norm(kind, dim)
    rng = np.random.default_rng(seed)
    rows = []
    for trial in range(trials):
        path = quasi_ruled_zigzag(p, p.dim, c, rng)
        geo, hdist = polynorm.track_geodesic(path, p)
        total = p.dist(path.breakpoints[0], path.breakpoints[-1])
        certified = abs(geo.length() - total) <= cert_tol * max(1.0, total)
        rows.append((c, trial, int(certified), hdist, hdist / c))
    return rows


# ---------------------------------------------------------------------------
# diamond self-test and projection constants
# ---------------------------------------------------------------------------

def diamond_grid_selftest(dim: int, grid: int = 100, tol: float = 1e-9):
    """Halfspace membership vs triangle equality on a grid.

    Returns (ok, first_disagreement, checked) for the max-norm plane
    (dim = 2) or the permutation norm of 3-space in reduced coordinates
    (dim = 3).
    """
    if dim == 2:
        p = polynorm.max_norm(2)
        x, y = np.array([0.0, 0.0]), np.array([2.0, 1.0])
        u = np.linspace(-1.0, 3.0, grid)
        pts = np.array([[a, b] for a in u for b in u])
    elif dim == 3:
        p = polynorm.weyl_norm(3, FinslerFunctional.standard(3))
        x = np.zeros(2)
        y = p.to_reduced(sort_desc([0.9, 0.3, -1.2]))
        u = np.linspace(-1.5, 2.5, grid)
        pts = np.array([[a, b] for a in u for b in u])
    else:
        raise DomainError("self-test dimensions are 2 and 3")
    dia = polynorm.diamond(x, y, p)
    total = p.dist(x, y)
    checked = 0
    for z in pts:
        by_halfspace = dia.contains(z, tol)
        defect = p.dist(x, z) + p.dist(z, y) - total
        by_triangle = defect <= tol
        checked += 1
        if by_halfspace != by_triangle:
            # disagreements inside the tolerance shell do not count
            if abs(defect) > 10 * tol:
                return False, (z.tolist(), by_halfspace, by_triangle, defect), checked
    return True, None, checked


def lambda1_fit(kind: str, dim: int, trials: int, seed: int) -> float:
    """Largest ratio d(z, projection) / triangle defect over random triples."""
    p = make_norm(kind, dim)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(p.dim)
        y = rng.standard_normal(p.dim)
        z = rng.standard_normal(p.dim) * 2.0
        defect = p.dist(x, z) + p.dist(z, y) - p.dist(x, y)
        if defect < 1e-9:
            continue
        w = polynorm.project_to_diamond(x, y, z, p)
        worst = max(worst, p.dist(z, w) / defect)
    return worst


def cone_halfspace_ratio(kind: str, dim: int, trials: int, seed: int) -> float:
    """Dual-cone comparability: d(x, cone) vs max over face halfspaces."""
    p = make_norm(kind, dim)
    rng = np.random.default_rng(seed)
    a = p.functionals
    worst = 0.0
    for idx in range(a.shape[0]):
        # the special cone of functional idx: (a_j - a_idx) v <= 0 for all j
        c = a - a[idx][np.newaxis, :]
        keep = np.linalg.norm(c, axis=1) > 1e-14
        c = c[keep]
        b = np.zeros(c.shape[0])
        apex = np.zeros(p.dim)
        for _ in range(trials):
            v = rng.standard_normal(p.dim) * 2.0
            # dual-cone points project to the apex
            proj = polynorm._project_polytope(v, c, b, feasible_start=apex)
            if np.linalg.norm(proj) > 1e-8:
                continue
            d_cone = np.linalg.norm(v)
            d_faces = float(np.max(np.maximum(c @ v, 0.0) / np.linalg.norm(c, axis=1)))
            if d_faces > 1e-12:
                worst = max(worst, d_cone / d_faces)
    return worst


def hull_tip_ratio(kind: str, dim: int, trials: int, seed: int) -> float:
    """d(0, K) vs d(0, conv K) for finite sets K inside one special cone."""
    p = make_norm(kind, dim)
    rng = np.random.default_rng(seed)
    a = p.functionals
    worst = 0.0
    idx = 0
    c = a - a[idx][np.newaxis, :]
    keep = np.linalg.norm(c, axis=1) > 1e-14
    c = c[keep]
    for _ in range(trials):
        pts = []
        while len(pts) < 6:
            v = rng.standard_normal(p.dim) * rng.uniform(0.5, 3.0)
            if np.all(c @ v <= 0):
                pts.append(v)
        k = np.array(pts)
        d_k = float(np.min([p.value(v) for v in k]))
        # distance to the hull: minimize |sum w_i k_i| over the simplex by
        # projected gradient (small, fixed iteration budget)
        w = np.full(len(k), 1.0 / len(k))
        for _ in range(400):
            g = k @ (k.T @ w)
            w -= 0.05 * g / (1.0 + np.linalg.norm(g))
            w = np.maximum(w, 0.0)
            s = w.sum()
            w = w / s if s > 0 else np.full(len(k), 1.0 / len(k))
        d_hull = p.value(k.T @ w)
        if d_hull > 1e-9:
            worst = max(worst, d_k / d_hull)
    return worst


def diamond_distance_sweep(d: int, trials: int, seed: int, budget: int = 6):
    """Rows (delta, bound, ratio) for points pushed slightly off a diamond."""
    rng = np.random.default_rng(seed)
    f = FinslerFunctional.standard(d)
    rows = []
    for _ in range(trials):
        lam = sort_desc(rng.uniform(0.5, 2.0, size=d))
        lam = lam - lam.mean()
        x, y = basepoint(d), flat_point(lam)
        chart = symspace.flat_through(x, y)
        mid = chart.point(lam * rng.uniform(0.3, 0.7))
        eps = rng.uniform(0.05, 0.4)
        g = random_unimodular(d, rng, spread=1.0)
        g = ScaledMatrix(np.eye(d) + eps * (g.entries - np.eye(d))).normalize()
        z = act(g, mid)
        delta = (finsler_distance(x, z, f) + finsler_distance(z, y, f)
                 - finsler_distance(x, y, f))
        if delta < 1e-6:
            continue
        bound = symspace.distance_to_diamond(x, y, z, f, budget=budget).value
        rows.append((delta, bound, bound / delta))
    return rows


# ---------------------------------------------------------------------------
# grafting rays
# ---------------------------------------------------------------------------

def graft_ray_run(d: int, length: float, twist: float, z_vec, t_grid, words,
                  f: FinslerFunctional | None = None):
    """Rows (word, iota+, iota-, t, cylinder_height, lengthF, predicted_slope, ratio)."""
    if f is None:
        f = FinslerFunctional.standard(d)
    fuchsian, graph = genus2_fuchsian(length, twist)
    z_vec = np.asarray(z_vec, dtype=float)
    kappa_plus = finsler_norm(z_vec, f) if np.any(z_vec) else 0.0
    kappa_minus = finsler_norm(-z_vec, f) if np.any(z_vec) else 0.0
    rows = []
    for word in words:
        nf = normal_form(word, graph)
        slope = nf.iota_plus * kappa_plus + nf.iota_minus * kappa_minus
        for t in t_grid:
            datum = surface.GraftingDatum({"e0": t * z_vec})
            rep = bend(fuchsian, graph, datum, d)
            ell = rep.finsler_length(word, f)
            height = cylinder_height(t * z_vec, f, d)
            ratio = ell / (t * slope) if t > 0 and slope > 0 else np.nan
            rows.append((word, nf.iota_plus, nf.iota_minus, float(t), height,
                         ell, slope, ratio))
    return rows


def graft_length_bounds(d: int, length: float, twist: float, z_vec, words,
                        f: FinslerFunctional | None = None):
    """Per-word data for the length lower bounds of a single grafted structure.

    Returns rows (word, iota, lengthF, length_S, cylinder_height).
    """
    if f is None:
        f = FinslerFunctional.standard(d)
    fuchsian, graph = genus2_fuchsian(length, twist)
    z_vec = np.asarray(z_vec, dtype=float)
    datum = surface.GraftingDatum({"e0": z_vec})
    rep = bend(fuchsian, graph, datum, d)
    height = cylinder_height(z_vec, f, d)
    rows = []
    for word in words:
        nf = normal_form(word, graph)
        ell_f = rep.finsler_length(word, f)
        m2 = fuchsian.evaluate_sl2(word)
        ev = np.linalg.eigvals(m2)
        ell_s = 2.0 * float(np.max(np.log(np.abs(ev))))
        rows.append((word, nf.iota, ell_f, ell_s, height))
    return rows

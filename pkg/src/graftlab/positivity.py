"""Total positivity: minor scans, semigroup certificates, contraction rates.

A unimodular matrix is totally positive (nonnegative) when all of its
minors of all orders are positive (nonnegative); equivalently, when every
exterior power is an entrywise positive (nonnegative) matrix.  Totally
positive matrices form a semigroup that absorbs the totally nonnegative
ones, every totally positive matrix is loxodromic, and products alternating
a fixed totally positive factor with nonnegative ones have eigenvalue gaps
growing linearly in the number of factors.  These are the engines behind
the non-backtracking estimates for admissible paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from math import comb

import numpy as np

from .config import DEFAULTS
from .errors import DomainError, NotLoxodromic
from .scaled import (ScaledMatrix, WedgeProduct, _all_minors, _subsets,
                     eig_log_moduli, scaled_mul)
from .symspace import FinslerFunctional

__all__ = [
    "Verdict",
    "PositivityReport",
    "AdmissibleDefectReport",
    "total_positivity",
    "admissible_increment_certificate",
    "eigen_gaps",
    "birkhoff_contraction",
    "subspace_angle",
    "quasi_ruled_defect_of_admissible",
    "pairwise_increment_distances",
]


class Verdict(Enum):
    TOTALLY_POSITIVE = "TotallyPositive"
    TOTALLY_NONNEGATIVE = "TotallyNonnegative"
    NEITHER = "Neither"


@dataclass(frozen=True)
class PositivityReport:
    verdict: Verdict
    worst_minor: tuple  # (order, row subset, column subset, raw value)
    margin: float  # smallest minor over all orders, normalized per order

    @property
    def is_tp(self) -> bool:
        return self.verdict is Verdict.TOTALLY_POSITIVE

    @property
    def is_tnn(self) -> bool:
        return self.verdict is not Verdict.NEITHER


def total_positivity(m: ScaledMatrix, tol: float = DEFAULTS.minor_rel) -> PositivityReport:
    """Scan all minors of all orders, normalized per order by the largest one.

    Normalizing per order makes the verdict meaningful for long products
    whose raw minors span hundreds of orders of magnitude.
    """
    d = m.dim
    margin = np.inf
    worst = (0, (), (), np.inf)
    for k in range(1, d):
        minors = _all_minors(m.entries, k)
        top = float(np.max(np.abs(minors)))
        if top == 0.0:
            raise DomainError("matrix has an identically zero exterior power")
        normalized = minors / top
        idx = np.unravel_index(int(np.argmin(normalized)), normalized.shape)
        local = float(normalized[idx])
        if local < margin:
            subs, _ = _subsets(d, k)
            margin = local
            worst = (k, subs[idx[0]], subs[idx[1]], float(minors[idx]))
    if margin > tol:
        verdict = Verdict.TOTALLY_POSITIVE
    elif margin >= -tol:
        verdict = Verdict.TOTALLY_NONNEGATIVE
    else:
        verdict = Verdict.NEITHER
    return PositivityReport(verdict=verdict, worst_minor=worst, margin=margin)


def admissible_increment_certificate(pieces, d: int | None = None,
                                     f: FinslerFunctional | None = None,
                                     tol: float = DEFAULTS.minor_rel) -> PositivityReport:
    """Positivity report for the product of admissible-path pieces.

    The product of flat pieces is totally nonnegative; as soon as one
    hyperbolic piece of positive parameter is present it is totally
    positive (semigroup absorption).
    """
    from . import surface

    pieces = list(pieces)
    if d is None:
        for piece in pieces:
            if isinstance(piece, surface.Flat):
                d = len(piece.direction)
                break
        else:
            raise DomainError("cannot infer the dimension; pass d explicitly")
    if f is None:
        f = FinslerFunctional.standard(d)
    product = ScaledMatrix.identity(d)
    for piece in pieces:
        product = scaled_mul(product, surface.piece_matrix(piece, d, f))
    return total_positivity(product, tol)


def eigen_gaps(m) -> np.ndarray:
    """Consecutive gaps of the sorted log eigenvalue moduli."""
    spec = m.jordan() if isinstance(m, WedgeProduct) else eig_log_moduli(m)
    return -np.diff(spec.values)


def birkhoff_contraction(m) -> float:
    """Contraction coefficient tanh(delta/4) of an entrywise positive matrix.

    delta is the projective diameter of the image of the positive cone:
    the largest log cross-ratio log((m_ik m_jl) / (m_jk m_il)).
    """
    entries = m.entries if isinstance(m, ScaledMatrix) else np.asarray(m, dtype=float)
    if np.any(entries <= 0):
        raise DomainError("birkhoff_contraction requires strictly positive entries")
    logm = np.log(entries)
    term = (logm[:, None, :, None] + logm[None, :, None, :]
            - logm[None, :, :, None] - logm[:, None, None, :])
    delta = float(np.max(term))
    return float(np.tanh(delta / 4.0))


def _complement_sign(subset: tuple, d: int) -> tuple:
    comp = tuple(i for i in range(d) if i not in subset)
    seq = subset + comp
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq))
                     if seq[i] > seq[j])
    return comp, -1.0 if inversions % 2 else 1.0


def _top_real_eigvec(a: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(a)
    i = int(np.argmax(np.abs(vals)))
    v = vecs[:, i]
    # distinct moduli force a real top eigenvalue of a real matrix
    phase = v[np.argmax(np.abs(v))]
    v = (v / phase).real
    return v / np.linalg.norm(v)


def subspace_angle(m: ScaledMatrix, k: int,
                   gap_tol: float = DEFAULTS.loxodromy_gap) -> float:
    """Principal angle between the top-k and bottom-(d-k) eigenspace sums.

    Computed through the wedge pairing: the k-th wedge of the top
    eigenvectors is the leading eigenvector of the k-th exterior power, and
    the angle to the complementary subspace is the angle in the wedge space
    between that vector and the hyperplane defined by the complementary
    wedge acting as a linear form.
    """
    d = m.dim
    if not 1 <= k <= d - 1:
        raise DomainError(f"subspace order {k} out of range for d={d}")
    gaps = eigen_gaps(m)
    if np.min(gaps) <= gap_tol:
        raise NotLoxodromic(f"eigenvalue gaps {gaps} below {gap_tol}")
    v = _top_real_eigvec(_all_minors(m.entries, k) if k > 1 else m.entries)
    inv = np.linalg.inv(m.entries)
    kk = d - k
    w = _top_real_eigvec(_all_minors(inv, kk) if kk > 1 else inv)
    subs_k, _ = _subsets(d, k)
    _, index_comp = _subsets(d, kk)
    paired = np.empty_like(v)
    for i, s in enumerate(subs_k):
        comp, sign = _complement_sign(s, d)
        paired[i] = sign * w[index_comp[comp]]
    s = abs(float(v @ paired)) / (np.linalg.norm(v) * np.linalg.norm(paired))
    return float(np.arcsin(min(1.0, s)))


# ---------------------------------------------------------------------------
# quasi-ruled defect of admissible paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibleDefectReport:
    defect: float
    omega: float      # smallest hyperbolic parameter present (inf if none)
    flat_floor: float  # smallest flat length present (inf if none)
    junctions: int


def pairwise_increment_distances(absorbables, d: int, f: FinslerFunctional) -> np.ndarray:
    """Finsler distances between all junctions of a piecewise path.

    Entry (i, j) is the distance between junction i and junction j, computed
    from the increment product of pieces i..j-1 accumulated through every
    exterior power, so that arbitrarily long and ill-conditioned increments
    stay accurate.  Pieces are scaled matrices or 1-d log-diagonals (the
    latter absorbed exactly, column-scaled in log coordinates).
    """
    from .scaled import _subset_sums, exterior_power

    n = len(absorbables)
    pre = []
    for p in absorbables:
        if isinstance(p, np.ndarray) and p.ndim == 1:
            pre.append(("diag", {k: _subset_sums(d, k, p) for k in range(1, d)},
                        float(p.sum())))
        else:
            pre.append(("mat", {k: exterior_power(p, k) for k in range(1, d)},
                        float(np.linalg.slogdet(p.entries)[1] + d * p.log_scale)))
    weight_steps = -np.diff(f.weights)  # w_k - w_{k+1} > 0
    dist = np.zeros((n + 1, n + 1))
    for i in range(n):
        levels = {k: ScaledMatrix.identity(comb(d, k)) for k in range(1, d)}
        logdet = 0.0
        for j in range(i + 1, n + 1):
            kind, data, piece_logdet = pre[j - 1]
            for k in range(1, d):
                lvl = levels[k]
                if kind == "diag":
                    sums = data[k]
                    top = float(np.max(sums))
                    levels[k] = ScaledMatrix(lvl.entries * np.exp(sums - top)[np.newaxis, :],
                                             lvl.log_scale + top).normalize()
                else:
                    levels[k] = scaled_mul(lvl, data[k])
            logdet += piece_logdet
            partial = np.empty(d)
            for k in range(1, d):
                lvl = levels[k]
                partial[k - 1] = np.log(np.linalg.norm(lvl.entries, 2)) + lvl.log_scale
            partial[d - 1] = logdet
            value = float(weight_steps @ partial[:d - 1]) + f.weights[-1] * partial[d - 1]
            dist[i, j] = dist[j, i] = f.scale * value
    return dist


def quasi_ruled_defect_of_admissible(path, f: FinslerFunctional | None = None) -> AdmissibleDefectReport:
    """Largest Finsler triangle defect over junction triples of an admissible path.

    Junction sampling suffices for piecewise geodesics up to a bounded
    factor; the defect is reported together with the path's hyperbolic
    parameter floor and flat length floor.
    """
    from . import surface

    pieces = list(path.pieces)
    if not pieces:
        return AdmissibleDefectReport(0.0, np.inf, np.inf, 0)
    d = surface.path_dimension(path, f)
    if f is None:
        f = FinslerFunctional.standard(d)
    mats = [surface.piece_absorbable(p, d, f) for p in pieces]
    dist = pairwise_increment_distances(mats, d, f)
    n = dist.shape[0]
    worst = 0.0
    for i, j, k in combinations(range(n), 3):
        worst = max(worst, dist[i, j] + dist[j, k] - dist[i, k])
    hyp = [p.t for p in pieces if isinstance(p, surface.Hyperbolic)]
    flat = [p.s for p in pieces if isinstance(p, surface.Flat)]
    return AdmissibleDefectReport(
        defect=max(worst, 0.0),
        omega=min(hyp) if hyp else np.inf,
        flat_floor=min(flat) if flat else np.inf,
        junctions=n - 2,
    )

"""Log-scaled dense matrix arithmetic for very long unimodular products.

A ``ScaledMatrix`` stores a d-by-d float matrix together with an additive
natural-log multiplier, so that products whose entries would overflow any
floating format by hundreds of orders of magnitude remain representable.
After every multiplication the entries are divided by the largest absolute
entry and its log is pushed onto the accumulator.

Spectral data is extracted in log coordinates through exterior powers: the
log of the top singular value (resp. top eigenvalue modulus) of the k-th
exterior power equals the sum of the k largest log singular values (resp.
log eigenvalue moduli) of the matrix itself.  Differencing these partial
sums recovers the full sorted spectrum without ever forming quantities
outside the floating range.  ``WedgeProduct`` pushes this one step further
and accumulates every exterior power alongside a long product, which keeps
the *small* spectral values accurate even when the product's condition
number exceeds the range of float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .config import DEFAULTS
from .errors import DimensionMismatch, SpectralError

__all__ = [
    "ScaledMatrix",
    "SpectralLog",
    "WedgeProduct",
    "scaled_mul",
    "scaled_inv",
    "scaled_pow",
    "svd_log",
    "eig_log_moduli",
    "exterior_power",
    "psl_equal",
    "psl_defect",
]


@dataclass(frozen=True)
class ScaledMatrix:
    """A matrix ``e**log_scale * entries`` with entries of moderate size."""

    entries: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise SpectralError("non-finite matrix entries")
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "log_scale", float(self.log_scale))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @staticmethod
    def identity(d: int) -> "ScaledMatrix":
        return ScaledMatrix(np.eye(d), 0.0)

    @staticmethod
    def from_array(a, log_scale: float = 0.0) -> "ScaledMatrix":
        return ScaledMatrix(np.asarray(a, dtype=float), log_scale).normalize()

    def normalize(self) -> "ScaledMatrix":
        """Rescale so the largest absolute entry is 1 (hence in [1/2, 2])."""
        m = float(np.max(np.abs(self.entries)))
        if m == 0.0:
            raise SpectralError("zero matrix cannot be normalized")
        return ScaledMatrix(self.entries / m, self.log_scale + np.log(m))

    def det_defect(self) -> float:
        """Relative deviation of the represented determinant from 1."""
        sign, logabs = np.linalg.slogdet(self.entries)
        if sign == 0:
            return np.inf
        total = logabs + self.dim * self.log_scale
        return abs(np.expm1(total)) if abs(total) < 1 else np.inf

    def collapse(self):
        """The represented matrix as a plain array (requires modest scale)."""
        if abs(self.log_scale) > 300.0:
            raise SpectralError("represented matrix exceeds floating range")
        return self.entries * np.exp(self.log_scale)

    def transpose(self) -> "ScaledMatrix":
        return ScaledMatrix(self.entries.T.copy(), self.log_scale)

    def __matmul__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        return scaled_mul(self, other)


@dataclass(frozen=True)
class SpectralLog:
    """Sorted descending log-spectrum, recentered to sum zero.

    ``residual`` reports the recentering shift that was applied; for a
    unit-determinant input it is a measure of accumulated numerical error.
    """

    values: np.ndarray
    residual: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "residual", float(self.residual))


def scaled_mul(a: ScaledMatrix, b: ScaledMatrix) -> ScaledMatrix:
    """Product of two scaled matrices, renormalized."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension mismatch: {a.dim} vs {b.dim}")
    return ScaledMatrix(a.entries @ b.entries, a.log_scale + b.log_scale).normalize()


def scaled_inv(a: ScaledMatrix) -> ScaledMatrix:
    """Inverse of a scaled matrix (entries must be invertible in float)."""
    try:
        inv = np.linalg.inv(a.entries)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise SpectralError(f"matrix inversion failed: {exc}") from exc
    return ScaledMatrix(inv, -a.log_scale).normalize()


def scaled_pow(a: ScaledMatrix, n: int) -> ScaledMatrix:
    """n-th power by repeated squaring (n >= 0)."""
    if n < 0:
        return scaled_pow(scaled_inv(a), -n)
    result = ScaledMatrix.identity(a.dim)
    base = a.normalize()
    while n > 0:
        if n & 1:
            result = scaled_mul(result, base)
        n >>= 1
        if n:
            base = scaled_mul(base, base)
    return result


# ---------------------------------------------------------------------------
# minors and exterior powers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _subsets(d: int, k: int):
    """All k-subsets of range(d) in lexicographic order, plus an index map."""
    subs = list(combinations(range(d), k))
    index = {s: i for i, s in enumerate(subs)}
    return subs, index


def _subset_sums(d: int, k: int, v: np.ndarray) -> np.ndarray:
    subs, _ = _subsets(d, k)
    return np.array([v[list(s)].sum() for s in subs])


@lru_cache(maxsize=None)
def _laplace_tables(d: int, k: int):
    """Gather tables for one Laplace step from order k-1 to order k.

    For row subset I the expansion runs along the last row I[-1]; removing
    column J[m] from the column subset J leaves a (k-1)-subset whose index
    is looked up in the lexicographic table of order k-1.
    """
    subs_k, _ = _subsets(d, k)
    _, index_prev = _subsets(d, k - 1)
    last_rows = np.array([s[-1] for s in subs_k])
    prefix_idx = np.array([index_prev[s[:-1]] for s in subs_k])
    n = len(subs_k)
    col_entry = np.empty((k, n), dtype=int)
    col_minor = np.empty((k, n), dtype=int)
    for j, s in enumerate(subs_k):
        for m in range(k):
            col_entry[m, j] = s[m]
            col_minor[m, j] = index_prev[s[:m] + s[m + 1:]]
    signs = np.array([(-1.0) ** ((k - 1) + m) for m in range(k)])
    return last_rows, prefix_idx, col_entry, col_minor, signs


def _all_minors(a: np.ndarray, k: int) -> np.ndarray:
    """Matrix of all k-by-k minors of ``a`` in lexicographic wedge order.

    Orders up to three use one LU determinant per minor; higher orders are
    assembled by Laplace expansion on cached minors of order k-1.
    """
    d = a.shape[0]
    subs, _ = _subsets(d, k)
    n = len(subs)
    if k == 1:
        return a.copy()
    if k <= 3:
        rows = np.array(subs)
        block = a[rows[:, None, :, None], rows[None, :, None, :]]
        return np.linalg.det(block.reshape(n * n, k, k)).reshape(n, n)
    prev = _all_minors(a, k - 1)
    last_rows, prefix_idx, col_entry, col_minor, signs = _laplace_tables(d, k)
    out = np.zeros((n, n))
    for m in range(signs.shape[0]):
        out += signs[m] * a[last_rows[:, None], col_entry[m][None, :]] \
            * prev[prefix_idx[:, None], col_minor[m][None, :]]
    return out


def exterior_power(m: ScaledMatrix, k: int) -> ScaledMatrix:
    """k-th exterior power in the lexicographic wedge basis.

    Entry (I, J) is the k-by-k minor of ``m`` with rows I and columns J;
    the log scale is multiplied by k (plus the renormalization shift).
    """
    d = m.dim
    if not 1 <= k <= d - 1:
        raise DimensionMismatch(f"exterior power order {k} out of range for d={d}")
    minors = _all_minors(m.entries, k)
    return ScaledMatrix(minors, k * m.log_scale).normalize()


# ---------------------------------------------------------------------------
# spectra in log coordinates
# ---------------------------------------------------------------------------

def _top_sigma_log(entries: np.ndarray) -> float:
    try:
        return float(np.log(np.linalg.norm(entries, 2)))
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"singular value computation failed: {exc}") from exc


def _top_eig_log(entries: np.ndarray) -> float:
    try:
        vals = np.linalg.eigvals(entries)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigenvalue computation failed: {exc}") from exc
    top = float(np.max(np.abs(vals)))
    if top == 0.0:
        raise SpectralError("zero spectral radius")
    return float(np.log(top))


def _spectrum_from_partial_sums(partial: np.ndarray, d: int) -> SpectralLog:
    """Turn partial sums S_1..S_d of a log spectrum into a SpectralLog."""
    values = np.diff(np.concatenate([[0.0], partial]))
    shift = partial[-1] / d
    values = values - shift
    # partial sums of a sorted sequence are concave; enforce the order
    # against roundoff so downstream consumers can rely on it.
    values = np.sort(values)[::-1]
    return SpectralLog(values, residual=abs(shift))


def _wedge_partial_sums(m: ScaledMatrix, top_log, logdet: float | None) -> np.ndarray:
    d = m.dim
    partial = np.empty(d)
    for k in range(1, d):
        w = exterior_power(m, k)
        partial[k - 1] = top_log(w.entries) + w.log_scale
    if logdet is None:
        sign, logabs = np.linalg.slogdet(m.entries)
        if sign == 0:
            raise SpectralError("determinant underflowed; pass the known logdet")
        logdet = logabs + d * m.log_scale
    partial[d - 1] = logdet
    return partial


def svd_log(m: ScaledMatrix, logdet: float | None = None) -> SpectralLog:
    """Sorted log singular values of the represented matrix, sum recentered to 0.

    Computed from the top singular value of each exterior power, which keeps
    the small singular values accurate for extremely ill-conditioned inputs.
    ``logdet`` (log |det| of the represented matrix) can be supplied when it
    is known by contract, bypassing an LU factorization that may underflow.
    """
    if not np.all(np.isfinite(m.entries)):
        raise SpectralError("non-finite entries")
    return _spectrum_from_partial_sums(
        _wedge_partial_sums(m, _top_sigma_log, logdet), m.dim)


def eig_log_moduli(m: ScaledMatrix, logdet: float | None = None) -> SpectralLog:
    """Sorted log moduli of eigenvalues, recentered to sum zero."""
    if not np.all(np.isfinite(m.entries)):
        raise SpectralError("non-finite entries")
    return _spectrum_from_partial_sums(
        _wedge_partial_sums(m, _top_eig_log, logdet), m.dim)


def psl_defect(a: ScaledMatrix, b: ScaledMatrix) -> float:
    """Entrywise distance between a and the nearer of +b, -b after scale alignment."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension mismatch: {a.dim} vs {b.dim}")
    an, bn = a.normalize(), b.normalize()
    ds = an.log_scale - bn.log_scale
    if abs(ds) > 50.0:
        return np.inf
    x = an.entries * np.exp(ds)
    return float(min(np.max(np.abs(x - bn.entries)), np.max(np.abs(x + bn.entries))))


def psl_equal(a: ScaledMatrix, b: ScaledMatrix, tol: float = DEFAULTS.psl_equal) -> bool:
    """Projective equality: a represents +b or -b after scale alignment."""
    defect = psl_defect(a, b)
    return defect <= tol * max(1.0, float(np.max(np.abs(b.normalize().entries))))


class WedgeProduct:
    """A long matrix product tracked through all of its exterior powers.

    Multiplying the k-th exterior powers of the factors (each level with its
    own log rescaling) keeps every partial sum of the log spectrum inside
    the floating range, no matter how long the product or how large the
    spread of its singular values.
    """

    def __init__(self, d: int):
        self.dim = d
        self.levels = {k: ScaledMatrix.identity(comb(d, k)) for k in range(1, d)}
        self._logdet = 0.0

    @staticmethod
    def from_pieces(pieces, d: int | None = None) -> "WedgeProduct":
        pieces = list(pieces)
        if d is None:
            if not pieces:
                raise DimensionMismatch("cannot infer dimension from an empty product")
            d = pieces[0].dim
        w = WedgeProduct(d)
        for p in pieces:
            w.absorb(p)
        return w

    def absorb(self, piece) -> "WedgeProduct":
        """Right-multiply the tracked product by ``piece``.

        A 1-d array is interpreted as the log-diagonal of exp(diag(v)) and
        absorbed exactly (its exterior powers are the subset-sum diagonals).
        """
        if isinstance(piece, np.ndarray) and piece.ndim == 1:
            return self.absorb_diagonal(piece)
        if piece.dim != self.dim:
            raise DimensionMismatch(f"dimension mismatch: {piece.dim} vs {self.dim}")
        for k in range(1, self.dim):
            self.levels[k] = scaled_mul(self.levels[k], exterior_power(piece, k))
        sign, logabs = np.linalg.slogdet(piece.entries)
        if sign == 0:
            raise SpectralError("absorbed an exactly singular factor")
        self._logdet += logabs + self.dim * piece.log_scale
        return self

    def absorb_diagonal(self, v) -> "WedgeProduct":
        """Right-multiply by exp(diag(v)) exactly, level by level.

        The k-th exterior power of a diagonal is the diagonal of subset
        sums; scaling columns in log coordinates avoids ever forming the
        (possibly astronomically spread) dense exponentials.
        """
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"log-diagonal has shape {v.shape}, expected ({self.dim},)")
        for k in range(1, self.dim):
            sums = _subset_sums(self.dim, k, v)
            top = float(np.max(sums))
            lvl = self.levels[k]
            entries = lvl.entries * np.exp(sums - top)[np.newaxis, :]
            self.levels[k] = ScaledMatrix(entries, lvl.log_scale + top).normalize()
        self._logdet += float(v.sum())
        return self

    def square(self) -> "WedgeProduct":
        """Replace the tracked product g by g^2 (level-wise squaring)."""
        for k in range(1, self.dim):
            self.levels[k] = scaled_mul(self.levels[k], self.levels[k])
        self._logdet *= 2.0
        return self

    def _partial_sums(self, top_log) -> np.ndarray:
        d = self.dim
        partial = np.empty(d)
        for k in range(1, d):
            lvl = self.levels[k]
            partial[k - 1] = top_log(lvl.entries) + lvl.log_scale
        partial[d - 1] = self._logdet
        return partial

    def cartan(self) -> SpectralLog:
        """Log singular values of the tracked product (= svd_log of it)."""
        return _spectrum_from_partial_sums(self._partial_sums(_top_sigma_log), self.dim)

    def jordan(self) -> SpectralLog:
        """Log eigenvalue moduli of the tracked product."""
        return _spectrum_from_partial_sums(self._partial_sums(_top_eig_log), self.dim)

"""Surface groups, Fuchsian gluing, graph-of-groups bending, admissible paths.

A genus-2 surface group is assembled from two one-holed tori glued along
their boundary (an amalgamated product over the separating curve), using
the classical trace identity tr[a,b] = tr(a)^2 + tr(b)^2 + tr(ab)^2
- tr(a) tr(b) tr(ab) - 2 to hit a prescribed boundary length.  Everything
is conjugated so the separating curve acts as a positive diagonal matrix;
its centralizer in the target group is then the diagonal subgroup, and
bending conjugates one factor of the amalgam by exp(z) for a trace-free
diagonal parameter z.

Word syntax: generators are lowercase identifiers (a1, b1, a2, b2),
inverses take a trailing apostrophe (a1'), concatenation is whitespace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS
from .errors import DimensionMismatch, DomainError
from .scaled import ScaledMatrix, WedgeProduct, psl_equal, scaled_inv, scaled_mul
from .symspace import (FinslerFunctional, finsler_norm, flat_exponential,
                       hyperbolic_direction, recenter, tau_embed)

__all__ = [
    "Edge",
    "GraphOfGroups",
    "FuchsianData",
    "GraftingDatum",
    "Hyperbolic",
    "Flat",
    "AdmissiblePath",
    "NormalForm",
    "GraftedRepresentation",
    "parse_word",
    "word_inverse",
    "one_holed_torus",
    "genus2_fuchsian",
    "bend",
    "normal_form",
    "cylinder_height",
    "collar_size",
    "admissible_evaluate",
    "random_admissible",
    "piece_matrix",
    "path_dimension",
    "discreteness_screen",
]


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------

def parse_word(word: str) -> list[tuple[str, int]]:
    """Parse 'a1 b1' a2' into [(gen, +1/-1), ...]."""
    tokens = []
    for chunk in word.split():
        if chunk.endswith("'"):
            gen, power = chunk[:-1], -1
        else:
            gen, power = chunk, 1
        if not gen or not gen[0].isalpha() or not gen.isalnum() or not gen[0].islower():
            raise DomainError(f"invalid generator token {chunk!r}")
        tokens.append((gen, power))
    return tokens


def free_reduce(tokens) -> list[tuple[str, int]]:
    out: list[tuple[str, int]] = []
    for tok in tokens:
        if out and out[-1][0] == tok[0] and out[-1][1] == -tok[1]:
            out.pop()
        else:
            out.append(tok)
    return out


def word_inverse(tokens) -> list[tuple[str, int]]:
    return [(g, -p) for g, p in reversed(tokens)]


def format_word(tokens) -> str:
    return " ".join(g if p > 0 else g + "'" for g, p in tokens)


# ---------------------------------------------------------------------------
# graphs of groups
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    """An oriented edge with its two boundary monomorphism images."""

    name: str
    origin: str
    target: str
    word_origin: str
    word_target: str
    oriented: bool = True


@dataclass(frozen=True)
class GraphOfGroups:
    vertices: dict          # vertex name -> tuple of generator symbols
    edges: tuple
    spanning_tree: frozenset

    def __post_init__(self):
        names = set(self.vertices)
        gens = [g for gg in self.vertices.values() for g in gg]
        if len(gens) != len(set(gens)):
            raise DomainError("vertex generator symbols must be distinct")
        tree = [e for e in self.edges if e.name in self.spanning_tree]
        # the tree must connect all vertices and have |V| - 1 edges
        if len(tree) != len(names) - 1:
            raise DomainError("spanning tree must have exactly |V| - 1 edges")
        reached = {next(iter(names))} if names else set()
        frontier = True
        while frontier:
            frontier = False
            for e in tree:
                if e.origin in reached and e.target not in reached:
                    reached.add(e.target)
                    frontier = True
                elif e.target in reached and e.origin not in reached:
                    reached.add(e.origin)
                    frontier = True
        if reached != names:
            raise DomainError("spanning tree does not cover all vertices")

    def vertex_of(self, gen: str) -> str:
        for v, gg in self.vertices.items():
            if gen in gg:
                return v
        raise DomainError(f"unknown generator {gen!r}")

    def edge_by_name(self, name: str) -> Edge:
        for e in self.edges:
            if e.name == name:
                return e
        raise DomainError(f"unknown edge {name!r}")


# ---------------------------------------------------------------------------
# Fuchsian data
# ---------------------------------------------------------------------------

def _sl2_inv(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


@dataclass(frozen=True)
class FuchsianData:
    """Generator images in SL(2,R) with relators and a marked curve."""

    assignment: dict        # generator symbol -> 2x2 unimodular matrix
    relators: tuple
    marked_curve: str

    def evaluate_sl2(self, word: str) -> np.ndarray:
        out = np.eye(2)
        for gen, power in parse_word(word):
            if gen not in self.assignment:
                raise DomainError(f"generator {gen!r} has no assigned matrix")
            m = self.assignment[gen]
            out = out @ (m if power > 0 else _sl2_inv(m))
        return out

    def validate(self, tol: float = DEFAULTS.psl_equal) -> "FuchsianData":
        for word in self.relators:
            r = self.evaluate_sl2(word)
            if min(np.max(np.abs(r - np.eye(2))), np.max(np.abs(r + np.eye(2)))) > tol:
                raise DomainError(f"relator {word!r} does not evaluate to the identity")
        m = self.evaluate_sl2(self.marked_curve)
        if max(abs(m[0, 1]), abs(m[1, 0])) > tol:
            raise DomainError("marked curve image is not diagonal")
        if abs(m[0, 0]) <= abs(m[1, 1]) + tol / 2:
            raise DomainError("marked curve image is not descending")
        return self

    @property
    def boundary_length(self) -> float:
        """Translation length of the marked curve in the hyperbolic plane."""
        m = self.evaluate_sl2(self.marked_curve)
        return 2.0 * float(np.log(abs(m[0, 0])))


@dataclass(frozen=True)
class GraftingDatum:
    per_edge: dict  # edge name -> trace-free d-vector

    def __post_init__(self):
        clean = {}
        for name, z in self.per_edge.items():
            z = np.asarray(z, dtype=float)
            if abs(z.sum()) > DEFAULTS.sum_zero * max(1.0, float(np.max(np.abs(z), initial=0.0))):
                raise DomainError(f"bending vector for edge {name!r} is not trace-free")
            clean[name] = z
        object.__setattr__(self, "per_edge", clean)

    def scaled(self, t: float) -> "GraftingDatum":
        return GraftingDatum({k: t * v for k, v in self.per_edge.items()})


# ---------------------------------------------------------------------------
# one-holed torus and the genus-2 amalgam
# ---------------------------------------------------------------------------

def one_holed_torus(boundary_length: float, shape=(3.0, 3.0)):
    """A hyperbolic once-punctured-torus group with prescribed boundary length.

    Returns generators (a, b) in SL(2,R), conjugated so that the commutator
    [a, b] is diagonal with entries -e^(l/2), -e^(-l/2) (the projective
    class of diag(e^(l/2), e^(-l/2))).  The trace of ab is solved from the
    commutator trace identity; parameters whose identity has no real or
    hyperbolic solution are rejected.
    """
    ell = float(boundary_length)
    if ell <= 0:
        raise DomainError("boundary length must be positive")
    ta, tb = float(shape[0]), float(shape[1])
    target = -2.0 * np.cosh(ell / 2.0)  # commutator trace; < -2 excludes parabolic
    disc = (ta * tb) ** 2 - 4.0 * (ta * ta + tb * tb - 2.0 - target)
    if disc < 0:
        raise DomainError("shape parameters lie outside the hyperbolic region")
    roots = [(ta * tb + np.sqrt(disc)) / 2.0, (ta * tb - np.sqrt(disc)) / 2.0]
    tab = next((t for t in roots if abs(t) > 2.0), None)
    if tab is None:
        raise DomainError("no hyperbolic solution for the product trace")
    zeta = (tab + np.sign(tab) * np.sqrt(tab * tab - 4.0)) / 2.0
    a = np.array([[ta, -1.0], [1.0, 0.0]])
    b = np.array([[0.0, zeta], [-1.0 / zeta, tb]])
    c = a @ b @ _sl2_inv(a) @ _sl2_inv(b)
    if abs(np.trace(c) - target) > 1e-8 * max(1.0, abs(target)):
        raise DomainError("trace identity violated; shape parameters rejected")
    # diagonalize the commutator: eigenvalues -e^(l/2), -e^(-l/2)
    mu_big = -np.exp(ell / 2.0)
    mu_small = -np.exp(-ell / 2.0)
    p = np.column_stack([_eigvec_2x2(c, mu_big), _eigvec_2x2(c, mu_small)])
    det = np.linalg.det(p)
    if abs(det) < 1e-12:
        raise DomainError("commutator could not be diagonalized")
    if det < 0:
        p[:, 1] = -p[:, 1]
        det = -det
    p = p / np.sqrt(det)
    p_inv = _sl2_inv(p)
    return p_inv @ a @ p, p_inv @ b @ p


def _eigvec_2x2(m: np.ndarray, mu: float) -> np.ndarray:
    r1 = np.array([m[0, 1], mu - m[0, 0]])
    r2 = np.array([mu - m[1, 1], m[1, 0]])
    v = r1 if np.linalg.norm(r1) >= np.linalg.norm(r2) else r2
    n = np.linalg.norm(v)
    if n < 1e-14:
        raise DomainError("degenerate eigenvector")
    return v / n


def genus2_fuchsian(length: float, twist: float = 0.0,
                    shapes=((3.0, 3.0), (3.0, 3.0))):
    """Two one-holed tori glued along a separating curve of the given length.

    The second handle is conjugated by diag(e^(twist/2), e^(-twist/2)) . J
    with J = [[0,1],[-1,0]], which inverts the diagonal commutator, so that
    the genus-2 relator [a1,b1][a2,b2] evaluates to the identity exactly.
    """
    a1, b1 = one_holed_torus(length, shapes[0])
    a2r, b2r = one_holed_torus(length, shapes[1])
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    a_tw = np.diag([np.exp(twist / 2.0), np.exp(-twist / 2.0)])
    w = a_tw @ j
    w_inv = _sl2_inv(w)
    a2, b2 = w @ a2r @ w_inv, w @ b2r @ w_inv
    fuchsian = FuchsianData(
        assignment={"a1": a1, "b1": b1, "a2": a2, "b2": b2},
        relators=("a1 b1 a1' b1' a2 b2 a2' b2'",),
        marked_curve="a1 b1 a1' b1'",
    ).validate()
    graph = GraphOfGroups(
        vertices={"v1": ("a1", "b1"), "v2": ("a2", "b2")},
        edges=(Edge(name="e0", origin="v1", target="v2",
                    word_origin="a1 b1 a1' b1'", word_target="b2 a2 b2' a2'"),),
        spanning_tree=frozenset({"e0"}),
    )
    return fuchsian, graph


def discreteness_screen(fuchsian: FuchsianData, max_len: int = 6,
                        tol: float = 1e-3) -> float:
    """Smallest projective distance to the identity over short reduced words.

    A sanity screen, not a discreteness certificate: returns the minimum of
    min(|g - 1|, |g + 1|) over nonempty reduced words of length <= max_len
    and raises if it falls below tol.
    """
    gens = list(fuchsian.assignment)
    letters = []
    for i, g in enumerate(gens):
        letters.append((fuchsian.assignment[g], i))
        letters.append((_sl2_inv(fuchsian.assignment[g]), i + len(gens)))
    mats = np.stack([m for m, _ in letters])
    ids = np.array([i for _, i in letters])
    inverse_of = np.concatenate([np.arange(len(gens)) + len(gens), np.arange(len(gens))])
    eye = np.eye(2)
    words, last = mats.copy(), ids.copy()
    best = np.inf
    for _ in range(max_len):
        dist = np.minimum(np.abs(words - eye).max(axis=(1, 2)),
                          np.abs(words + eye).max(axis=(1, 2)))
        best = min(best, float(dist.min()))
        if _ == max_len - 1:
            break
        keep = inverse_of[last][:, None] != ids[None, :]
        src, tgt = np.nonzero(keep)
        words = np.einsum("nij,njk->nik", words[src], mats[tgt])
        last = ids[tgt]
    if best < tol:
        raise DomainError(f"short word within {best} of the identity; gluing rejected")
    return best


# ---------------------------------------------------------------------------
# bending
# ---------------------------------------------------------------------------

class GraftedRepresentation:
    """Evaluator for words of the surface group after bending.

    Generator images are kept as lists of elementary factors (tree-path
    bending conjugators, diagonal exponentials, embedded base images), each
    paired with its exact inverse.  Deferring the multiplication to word
    evaluation keeps every factor well conditioned, so spectra stay
    accurate for arbitrarily large bending parameters.
    """

    def __init__(self, gen_factors: dict, d: int, graph: GraphOfGroups,
                 fuchsian: FuchsianData, datum: GraftingDatum):
        self.d = d
        self.graph = graph
        self.fuchsian = fuchsian
        self.datum = datum
        self._factors = dict(gen_factors)

    def _word_factors(self, word: str):
        for gen, power in parse_word(word):
            if gen not in self._factors:
                raise DomainError(f"generator {gen!r} has no image")
            pairs = self._factors[gen]
            if power > 0:
                yield from (fwd for fwd, _ in pairs)
            else:
                yield from (inv for _, inv in reversed(pairs))

    def image(self, gen: str) -> ScaledMatrix:
        """Collapsed image of a single generator."""
        return self.evaluate(gen)

    def evaluate(self, word: str) -> ScaledMatrix:
        out = ScaledMatrix.identity(self.d)
        for m in self._word_factors(word):
            if isinstance(m, np.ndarray):
                m = flat_exponential(m)
            out = scaled_mul(out, m)
        return out

    def wedge(self, word: str) -> WedgeProduct:
        w = WedgeProduct(self.d)
        for m in self._word_factors(word):
            w.absorb(m)
        return w

    def finsler_length(self, word: str, f: FinslerFunctional) -> float:
        """Stable Finsler translation length of the word's image."""
        spec = self.wedge(word).jordan()
        return f.scale * float(f.weights @ spec.values)


def _pair(fwd: ScaledMatrix, inv: ScaledMatrix):
    return (fwd, inv)


def _tau_pair(m2: np.ndarray, d: int):
    return _pair(tau_embed(m2, d), tau_embed(_sl2_inv(m2), d))


def _invert_factors(pairs):
    return [(inv, fwd) for fwd, inv in reversed(pairs)]


def bend(rho: FuchsianData, g: GraphOfGroups, z: GraftingDatum, d: int) -> GraftedRepresentation:
    """Bend the composed representation along the multicurve of the graph.

    Each edge word must act loxodromically; its image is diagonalized as
    B exp(l u) B^(-1) with u the hyperbolic direction, and the bending
    element is zeta_e = B exp(z_e) B^(-1).  Vertex groups are conjugated by
    the product of the zeta's along the spanning tree from the base vertex;
    a trivial bending vector leaves the composed representation untouched.
    """
    zeta = {}
    for e in g.edges:
        z_e = z.per_edge.get(e.name)
        if z_e is None:
            raise DomainError(f"no bending vector for edge {e.name!r}")
        if len(z_e) != d:
            raise DimensionMismatch(f"bending vector for {e.name!r} has wrong length")
        if np.max(np.abs(z_e)) == 0.0:
            zeta[e.name] = []
            continue
        m_e = rho.evaluate_sl2(e.word_origin)
        tr = float(np.trace(m_e))
        if abs(tr) <= 2.0 + 1e-10:
            raise DomainError(f"edge word of {e.name!r} is not loxodromic (trace {tr})")
        sign = np.sign(tr)
        half = np.arccosh(abs(tr) / 2.0)
        mu_big, mu_small = sign * np.exp(half), sign * np.exp(-half)
        p2 = np.column_stack([_eigvec_2x2(m_e, mu_big), _eigvec_2x2(m_e, mu_small)])
        det = np.linalg.det(p2)
        if abs(det) < 1e-12:
            raise DomainError(f"edge conjugator for {e.name!r} is degenerate")
        if det < 0:
            p2[:, 1] = -p2[:, 1]
            det = -det
        p2 = p2 / np.sqrt(det)
        zeta[e.name] = [_tau_pair(p2, d), _pair(z_e.copy(), -z_e),
                        _tau_pair(_sl2_inv(p2), d)]
    base = next(iter(g.vertices))
    omega = {base: []}
    frontier = [base]
    tree = [e for e in g.edges if e.name in g.spanning_tree]
    while frontier:
        v = frontier.pop()
        for e in tree:
            if e.origin == v and e.target not in omega:
                omega[e.target] = omega[v] + zeta[e.name]
                frontier.append(e.target)
            elif e.target == v and e.origin not in omega:
                omega[e.origin] = omega[v] + _invert_factors(zeta[e.name])
                frontier.append(e.origin)
    factors = {}
    for v, gens in g.vertices.items():
        w_v = omega[v]
        w_v_inv = _invert_factors(w_v)
        for gen in gens:
            factors[gen] = w_v + [_tau_pair(rho.assignment[gen], d)] + w_v_inv
    # non-tree edge letters (HNN generators), when they carry an assignment
    for e in g.edges:
        if e.name in g.spanning_tree or e.name not in rho.assignment:
            continue
        factors[e.name] = (omega[e.origin] + [_tau_pair(rho.assignment[e.name], d)]
                           + zeta[e.name] + _invert_factors(omega[e.target]))
    return GraftedRepresentation(factors, d, g, rho, z)


# ---------------------------------------------------------------------------
# normal form and intersection numbers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalForm:
    syllables: tuple        # tuples of (vertex, token list)
    iota_plus: int
    iota_minus: int
    in_edge_group: bool

    @property
    def iota(self) -> int:
        return self.iota_plus + self.iota_minus


def _is_power_of(tokens, base_tokens) -> int | None:
    """Exponent k such that tokens freely equals base^k, else None."""
    tokens = free_reduce(tokens)
    base = free_reduce(base_tokens)
    if not tokens:
        return 0
    if not base:
        return None
    for sign, base_s in ((1, base), (-1, word_inverse(base))):
        acc: list = []
        k = 0
        while len(acc) <= len(tokens) + len(base_s):
            if acc == tokens and k > 0:
                return sign * k
            acc = free_reduce(acc + base_s)
            k += 1
    return None


def normal_form(word: str, g: GraphOfGroups):
    """Cyclically reduced syllable form with oriented edge-crossing counts.

    Supports two-vertex amalgams (one edge).  Syllables that are powers of
    the edge word are rewritten on the far side and merged, which realizes
    cyclic reduction in the amalgamated product.  Words conjugate into the
    edge group are flagged and report zero crossings.
    """
    if len(g.vertices) != 2 or len(g.edges) != 1:
        raise DomainError("normal form implemented for two-vertex amalgams")
    edge = g.edges[0]
    tokens = free_reduce(parse_word(word))
    if not tokens:
        return NormalForm((), 0, 0, True)
    syl: list[tuple[str, list]] = []
    for tok in tokens:
        v = g.vertex_of(tok[0])
        if syl and syl[-1][0] == v:
            syl[-1][1].append(tok)
        else:
            syl.append((v, [tok]))
    edge_word = {edge.origin: parse_word(edge.word_origin),
                 edge.target: parse_word(edge.word_target)}
    other = {edge.origin: edge.target, edge.target: edge.origin}

    def absorb_once(syllables):
        # cyclic merge of same-vertex neighbors
        changed = False
        while len(syllables) > 1 and syllables[0][0] == syllables[-1][0]:
            v, last = syllables.pop()
            syllables[0] = (v, free_reduce(last + syllables[0][1]))
            changed = True
        for i, (v, toks) in enumerate(syllables):
            if len(syllables) == 1:
                break
            k = _is_power_of(toks, edge_word[v])
            if k is not None:
                w = other[v]
                rewritten = free_reduce(
                    (edge_word[w] * k) if k >= 0 else (word_inverse(edge_word[w]) * -k))
                nxt = (i + 1) % len(syllables)
                syllables[nxt] = (w, free_reduce(rewritten + syllables[nxt][1]))
                del syllables[i]
                return True
        for i, (v, toks) in enumerate(syllables):
            if not free_reduce(toks) and len(syllables) > 1:
                del syllables[i]
                return True
        return changed

    while absorb_once(syl):
        pass
    if len(syl) <= 1:
        v, toks = syl[0] if syl else (edge.origin, [])
        in_edge = not toks or _is_power_of(toks, edge_word.get(v, [])) is not None
        return NormalForm(tuple((v, tuple(t)) for v, t in syl), 0, 0, in_edge)
    plus = minus = 0
    for i, (v, _) in enumerate(syl):
        w = syl[(i + 1) % len(syl)][0]
        if (v, w) == (edge.origin, edge.target):
            plus += 1
        elif (v, w) == (edge.target, edge.origin):
            minus += 1
        else:
            raise DomainError("inconsistent syllable decomposition")
    return NormalForm(tuple((v, tuple(t)) for v, t in syl), plus, minus, False)


# ---------------------------------------------------------------------------
# cylinder height and collars
# ---------------------------------------------------------------------------

def cylinder_height(z, f: FinslerFunctional, d: int, tol: float = 1e-10) -> float:
    """min over t of F(t u + z), with u the hyperbolic direction.

    The objective is convex piecewise linear in t; ternary search brackets
    the minimizer inside |t| <= F(z)/2 + 1.
    """
    z = np.asarray(z, dtype=float)
    if len(z) != d:
        raise DimensionMismatch("bending vector has wrong length")
    u = hyperbolic_direction(d)
    fz = finsler_norm(z, f)
    lo, hi = -(fz / 2.0 + 1.0), fz / 2.0 + 1.0

    def phi(t):
        return finsler_norm(t * u + z, f)

    for _ in range(200):
        if hi - lo < tol:
            break
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if phi(m1) <= phi(m2):
            hi = m2
        else:
            lo = m1
    return max(phi(0.5 * (lo + hi)), 0.0)


def collar_size(sigma: float) -> float:
    """Embedded collar radius around a closed geodesic of length sigma."""
    if sigma <= 0:
        raise DomainError("curve length must be positive")
    return float(np.arcsinh(1.0 / np.sinh(sigma / 2.0)))


# ---------------------------------------------------------------------------
# admissible paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hyperbolic:
    """A geodesic piece of the embedded hyperbolic plane; Finsler speed 2."""

    t: float

    def __post_init__(self):
        if self.t <= 0:
            raise DomainError("hyperbolic piece parameter must be positive")


@dataclass(frozen=True)
class Flat:
    """A unit-Finsler-speed segment in a maximal flat."""

    direction: np.ndarray
    s: float

    def __post_init__(self):
        direction = np.asarray(self.direction, dtype=float)
        object.__setattr__(self, "direction", direction)
        if self.s <= 0:
            raise DomainError("flat piece length must be positive")


@dataclass(frozen=True)
class AdmissiblePath:
    """Alternating hyperbolic and flat pieces, with an optional left anchor.

    Hyperbolic pieces of parameter t have Finsler length 2t (the embedded
    hyperbolic plane is isometric and the diagonal flow has speed 2); flat
    pieces use unit-norm directions so their parameter equals their length.
    """

    pieces: tuple
    left_anchor: ScaledMatrix | None = None

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))

    def validate(self, f: FinslerFunctional) -> "AdmissiblePath":
        for piece in self.pieces:
            if isinstance(piece, Flat):
                n = finsler_norm(piece.direction, f)
                if abs(n - 1.0) > 1e-10:
                    raise DomainError(f"flat direction has Finsler norm {n}, expected 1")
        return self

    def normalized(self) -> "AdmissiblePath":
        """Merge consecutive hyperbolic pieces and aligned flat pieces."""
        merged: list = []
        for piece in self.pieces:
            if merged and isinstance(piece, Hyperbolic) and isinstance(merged[-1], Hyperbolic):
                merged[-1] = Hyperbolic(merged[-1].t + piece.t)
            elif (merged and isinstance(piece, Flat) and isinstance(merged[-1], Flat)
                  and np.allclose(piece.direction, merged[-1].direction, atol=1e-12)):
                merged[-1] = Flat(piece.direction, merged[-1].s + piece.s)
            else:
                merged.append(piece)
        return AdmissiblePath(tuple(merged), self.left_anchor)

    def finsler_length(self) -> float:
        return float(sum(2.0 * p.t if isinstance(p, Hyperbolic) else p.s
                         for p in self.pieces))


def path_dimension(path: AdmissiblePath, f: FinslerFunctional | None = None) -> int:
    if f is not None:
        return f.dim
    if path.left_anchor is not None:
        return path.left_anchor.dim
    for piece in path.pieces:
        if isinstance(piece, Flat):
            return len(piece.direction)
    raise DomainError("cannot infer the dimension of a purely hyperbolic path")


def piece_matrix(piece, d: int, f: FinslerFunctional) -> ScaledMatrix:
    """Group element traversed by one path piece."""
    if isinstance(piece, Hyperbolic):
        t = piece.t
        m2 = np.array([[np.cosh(t), np.sinh(t)], [np.sinh(t), np.cosh(t)]])
        return tau_embed(m2, d)
    if isinstance(piece, Flat):
        if len(piece.direction) != d:
            raise DimensionMismatch("flat direction has wrong length")
        return flat_exponential(piece.s * piece.direction)
    raise DomainError(f"unknown piece type {type(piece).__name__}")


def piece_absorbable(piece, d: int, f: FinslerFunctional):
    """Piece as an exact absorbable: a matrix, or a log-diagonal for flats."""
    if isinstance(piece, Flat):
        if len(piece.direction) != d:
            raise DimensionMismatch("flat direction has wrong length")
        return piece.s * piece.direction
    return piece_matrix(piece, d, f)


def admissible_evaluate(path: AdmissiblePath, d: int, f: FinslerFunctional):
    """Evaluate a path to (endpoint, Finsler length, junction group elements)."""
    anchor = path.left_anchor if path.left_anchor is not None else ScaledMatrix.identity(d)
    junctions = [anchor]
    current = anchor
    for piece in path.pieces:
        current = scaled_mul(current, piece_matrix(piece, d, f))
        junctions.append(current)
    return current, path.finsler_length(), junctions


def random_admissible(omega: float, length_floor: float, piece_count: int,
                      d: int, seed: int, f: FinslerFunctional | None = None) -> AdmissiblePath:
    """Seed-deterministic alternating path.

    Hyperbolic parameters are uniform in [omega, 2 omega] (in (0, 1) when
    omega = 0); flat lengths are uniform in [L, 2L], except that for L = 0
    a flat piece is skipped with probability 1/2 and otherwise gets a
    length in (0, 1).  Flat directions are drawn isotropically on the unit
    Finsler sphere of the trace-free subspace.
    """
    if omega < 0 or length_floor < 0:
        raise DomainError("piece length floors must be nonnegative")
    if f is None:
        f = FinslerFunctional.standard(d)
    rng = np.random.default_rng(seed)
    pieces: list = []
    want_hyperbolic = True
    while len(pieces) < piece_count:
        if want_hyperbolic:
            t = omega + (omega if omega > 0 else 1.0) * rng.random()
            if t > 0:
                pieces.append(Hyperbolic(t))
        else:
            skip = length_floor == 0 and rng.random() < 0.5
            if not skip:
                s = (length_floor + length_floor * rng.random()
                     if length_floor > 0 else rng.random() + 1e-6)
                v = rng.standard_normal(d)
                v = recenter(v)
                while finsler_norm(v, f) < 1e-9:
                    v = recenter(rng.standard_normal(d))
                pieces.append(Flat(v / finsler_norm(v, f), s))
        want_hyperbolic = not want_hyperbolic
    return AdmissiblePath(tuple(pieces)).normalized().validate(f)

"""Finite weighted point systems acted on by named permutations.

A system is a set of points {0..N-1} with invariant rational weights and a
set of named generator permutations acting transitively.  On top of it live
invariant partitions (the finite stand-in for invariant sigma-algebras),
partial bijections carrying generator-word certificates, and the mixing
constructions that average cell frequencies over equal-size classes.

Group elements are enumerated deterministically: identity, then generators
and their inverses in declaration order, then longer words length-first and
left-to-right lexicographically.  Every derived map records, per point, the
word that moves it, so expressibility over a given invariant partition can
be re-checked independently of how the map was built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import (
    DivisibilityError,
    ExpressibilityUndecided,
    InvalidParamsError,
    InvalidPartitionError,
    InvalidVectorError,
)
from .probvec import ProbVec, ratcomb_decompose

# word tokens: "a" applies generator a, "~a" its inverse; applied left to right
DEFAULT_GROUP_CAP = 100_000


def invert_token(tok: str) -> str:
    return tok[1:] if tok.startswith("~") else "~" + tok


def invert_word(word: tuple) -> tuple:
    return tuple(invert_token(t) for t in reversed(word))


class GroupEnum(NamedTuple):
    elements: tuple  # ((word, perm), ...) in enumeration order
    complete: bool


@dataclass(frozen=True)
class FiniteSystem:
    n_points: int
    weights: ProbVec
    generators: tuple  # ((name, perm), ...) in declaration order
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        n = self.n_points
        if n < 1:
            raise InvalidParamsError("n_points >= 1")
        if len(self.weights) != n:
            raise InvalidVectorError("one weight per point")
        if any(w <= 0 for w in self.weights.weights):
            raise InvalidVectorError("point weights must be positive")
        if not self.generators:
            raise InvalidParamsError("at least one generator")
        seen = set()
        for name, perm in self.generators:
            if not name or name.startswith("~"):
                raise InvalidParamsError("generator names are nonempty, no ~ prefix")
            if name in seen:
                raise InvalidParamsError(f"duplicate generator name {name!r}")
            seen.add(name)
            if sorted(perm) != list(range(n)):
                raise InvalidPartitionError(f"generator {name!r} is not a permutation")
            for x in range(n):
                if self.weights.weights[perm[x]] != self.weights.weights[x]:
                    raise InvalidVectorError(f"weights not invariant under {name!r}")
        # transitivity: generator edges connect all points
        seen_pts = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for _, perm in self.generators:
                for y in (perm[x], perm.index(x)):
                    if y not in seen_pts:
                        seen_pts.add(y)
                        frontier.append(y)
        if len(seen_pts) != n:
            raise InvalidParamsError("generators act transitively")

    @classmethod
    def make(cls, n: int, generators, weights=None) -> "FiniteSystem":
        """generators: mapping or pair list name -> permutation sequence."""
        gens = tuple(
            (name, tuple(perm))
            for name, perm in (generators.items() if hasattr(generators, "items") else generators)
        )
        if weights is None:
            w = ProbVec.uniform(n)
        elif isinstance(weights, ProbVec):
            w = weights
        else:
            w = ProbVec(tuple(Fraction(x) for x in weights))
        return cls(n, w, gens)

    @classmethod
    def cyclic(cls, n: int, step: int = 1, name: str = "r") -> "FiniteSystem":
        return cls.make(n, {name: [(x + step) % n for x in range(n)]})

    def to_json(self) -> dict:
        return {
            "points": self.n_points,
            "weights": self.weights.to_strings(),
            "generators": {name: list(perm) for name, perm in self.generators},
        }

    @classmethod
    def from_json(cls, blob: dict) -> "FiniteSystem":
        return cls.make(
            blob["points"],
            list(blob["generators"].items()),
            weights=ProbVec.from_strings(blob["weights"]) if "weights" in blob else None,
        )

    def perm(self, token: str) -> tuple:
        key = ("perm", token)
        if key not in self._cache:
            name = token[1:] if token.startswith("~") else token
            for gname, p in self.generators:
                if gname == name:
                    break
            else:
                raise InvalidParamsError(f"unknown generator {name!r}")
            if token.startswith("~"):
                inv = [0] * self.n_points
                for x, y in enumerate(p):
                    inv[y] = x
                p = tuple(inv)
            self._cache[key] = tuple(p)
        return self._cache[key]

    def apply_word(self, word, x: int) -> int:
        for tok in word:
            x = self.perm(tok)[x]
        return x

    def word_perm(self, word) -> tuple:
        out = tuple(range(self.n_points))
        for tok in word:
            p = self.perm(tok)
            out = tuple(p[x] for x in out)
        return out

    def group(self, max_elements: int | None = None, max_word_len: int | None = None) -> GroupEnum:
        """Enumerate distinct group elements with their first producing word."""
        cap = DEFAULT_GROUP_CAP if max_elements is None else max_elements
        lcap = 2 * self.n_points if max_word_len is None else max_word_len
        cached = self._cache.get("group")
        if cached is not None:
            enum, ccap, clcap = cached
            if enum.complete or (ccap >= cap and clcap >= lcap):
                if len(enum.elements) <= cap:
                    return enum
                return GroupEnum(enum.elements[:cap], False)
        ident = tuple(range(self.n_points))
        tokens = [name for name, _ in self.generators]
        tokens += [invert_token(t) for t in tokens]
        seen = {ident: ()}
        order = [((), ident)]
        layer = order[:]
        complete = True
        while layer:
            if len(order) >= cap:
                complete = False
                break
            if layer[0][0] and len(layer[0][0]) >= lcap:
                complete = False
                break
            nxt = []
            for word, perm in layer:
                for tok in tokens:
                    p = self.perm(tok)
                    q = tuple(p[y] for y in perm)
                    if q not in seen:
                        w = word + (tok,)
                        seen[q] = w
                        entry = (w, q)
                        order.append(entry)
                        nxt.append(entry)
                        if len(order) >= cap:
                            break
                if len(order) >= cap:
                    break
            layer = nxt
        enum = GroupEnum(tuple(order), complete and len(order) <= cap)
        self._cache["group"] = (enum, cap, lcap)
        return enum

    def total_weight(self, points) -> Fraction:
        return sum((Fraction(self.weights.weights[x]) for x in points), Fraction(0))

    def is_uniform(self) -> bool:
        return len(set(self.weights.weights)) == 1


def _canon_labels(raw) -> tuple:
    table: dict = {}
    out = []
    for v in raw:
        if v not in table:
            table[v] = len(table)
        out.append(table[v])
    return tuple(out)


@dataclass(frozen=True)
class GAlgebra:
    """Invariant partition: every generator maps each cell onto a cell."""

    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", _canon_labels(self.labels))

    def __len__(self) -> int:
        return len(set(self.labels))

    @property
    def cells(self) -> tuple:
        out: dict = {}
        for x, c in enumerate(self.labels):
            out.setdefault(c, []).append(x)
        return tuple(tuple(out[c]) for c in sorted(out))

    @classmethod
    def from_cells(cls, cells, n: int) -> "GAlgebra":
        labels = [-1] * n
        for i, cell in enumerate(cells):
            for x in cell:
                if labels[x] != -1:
                    raise InvalidPartitionError("cells overlap")
                labels[x] = i
        if -1 in labels:
            raise InvalidPartitionError("cells do not cover the points")
        return cls(tuple(labels))

    def measurable(self, points) -> bool:
        marked = set(points)
        return all(
            all(x in marked for x in cell) or all(x not in marked for x in cell)
            for cell in self.cells
        )

    def cell_of(self, x: int) -> tuple:
        c = self.labels[x]
        return tuple(i for i, l in enumerate(self.labels) if l == c)

    def join(self, other: "GAlgebra") -> "GAlgebra":
        return GAlgebra(tuple(zip(self.labels, other.labels)))

    def refines(self, other: "GAlgebra") -> bool:
        seen: dict = {}
        for mine, theirs in zip(self.labels, other.labels):
            if seen.setdefault(mine, theirs) != theirs:
                return False
        return True

    def invariant_under(self, sys: FiniteSystem) -> bool:
        for _, perm in sys.generators:
            image: dict = {}
            for x in range(sys.n_points):
                if image.setdefault(self.labels[x], self.labels[perm[x]]) != self.labels[perm[x]]:
                    return False
        return True


def generated_algebra(sys: FiniteSystem, seed_sets) -> GAlgebra:
    """Coarsest generator-stable partition separating all the seed sets."""
    n = sys.n_points
    seeds = [frozenset(s) for s in seed_sets]
    for s in seeds:
        if any(not (0 <= x < n) for x in s):
            raise InvalidParamsError("seed sets live on the points")
    labels = _canon_labels(tuple(tuple(x in s for s in seeds) for x in range(n)))
    perms = [sys.perm(name) for name, _ in sys.generators]
    perms += [sys.perm(invert_token(name)) for name, _ in sys.generators]
    while True:
        sig = tuple(
            (labels[x],) + tuple(labels[p[x]] for p in perms) for x in range(n)
        )
        nxt = _canon_labels(sig)
        if len(set(nxt)) == len(set(labels)):
            return GAlgebra(labels)
        labels = nxt


@dataclass(frozen=True)
class PseudoMap:
    """Partial bijection whose every point moves by a recorded generator word."""

    system: FiniteSystem
    pairs: tuple  # ((x, y), ...) sorted by x
    words: tuple  # word moving x to y, aligned with pairs

    def __post_init__(self):
        order = sorted(range(len(self.pairs)), key=lambda i: self.pairs[i])
        object.__setattr__(self, "pairs", tuple(self.pairs[i] for i in order))
        if len(self.words) != len(self.pairs):
            raise InvalidParamsError("one word per pair")
        object.__setattr__(self, "words", tuple(self.words[i] for i in order))
        xs = [x for x, _ in self.pairs]
        ys = [y for _, y in self.pairs]
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise InvalidParamsError("map must be a bijection")
        for (x, y), w in zip(self.pairs, self.words):
            if self.system.apply_word(w, x) != y:
                raise InvalidParamsError("word certificate mismatch", f"at point {x}")
        object.__setattr__(self, "_fwd", dict(self.pairs))
        object.__setattr__(self, "_words_by_point", dict(zip(xs, self.words)))

    @classmethod
    def from_mapping(cls, sys: FiniteSystem, mapping: dict, words: dict) -> "PseudoMap":
        items = sorted(mapping.items())
        return cls(sys, tuple(items), tuple(words[x] for x, _ in items))

    @classmethod
    def identity(cls, sys: FiniteSystem, points=None) -> "PseudoMap":
        pts = sorted(range(sys.n_points) if points is None else points)
        return cls(sys, tuple((x, x) for x in pts), ((),) * len(pts))

    @classmethod
    def from_word(cls, sys: FiniteSystem, word, points=None) -> "PseudoMap":
        pts = sorted(range(sys.n_points) if points is None else points)
        word = tuple(word)
        return cls(sys, tuple((x, sys.apply_word(word, x)) for x in pts), (word,) * len(pts))

    @property
    def domain(self) -> tuple:
        return tuple(x for x, _ in self.pairs)

    @property
    def range(self) -> tuple:
        return tuple(sorted(y for _, y in self.pairs))

    def apply(self, x: int) -> int:
        if x not in self._fwd:
            raise InvalidParamsError(f"point {x} outside the domain")
        return self._fwd[x]

    def word_at(self, x: int) -> tuple:
        if x not in self._words_by_point:
            raise InvalidParamsError(f"point {x} outside the domain")
        return self._words_by_point[x]

    def decomposition(self) -> dict:
        out: dict = {}
        for (x, _), w in zip(self.pairs, self.words):
            out.setdefault(w, []).append(x)
        return {w: tuple(xs) for w, xs in out.items()}

    def compose(self, other: "PseudoMap") -> "PseudoMap":
        """self after other; words concatenate along the trajectory."""
        fwd = self._fwd
        pairs = []
        words = []
        for (x, mid), w in zip(other.pairs, other.words):
            if mid not in fwd:
                raise InvalidParamsError("range/domain mismatch", f"point {mid}")
            pairs.append((x, fwd[mid]))
            words.append(w + self.word_at(mid))
        return PseudoMap(self.system, tuple(pairs), tuple(words))

    def invert(self) -> "PseudoMap":
        pairs = tuple(sorted((y, x) for x, y in self.pairs))
        back = {y: invert_word(w) for (x, y), w in zip(self.pairs, self.words)}
        return PseudoMap(self.system, pairs, tuple(back[x] for x, _ in pairs))

    def restrict(self, points) -> "PseudoMap":
        keep = set(points)
        pw = [(p, w) for p, w in zip(self.pairs, self.words) if p[0] in keep]
        return PseudoMap(self.system, tuple(p for p, _ in pw), tuple(w for _, w in pw))

    def orbit(self, x: int) -> tuple:
        fwd = self._fwd
        out = [x]
        y = fwd.get(x)
        while y is not None and y != x:
            out.append(y)
            y = fwd.get(y)
        if y != x:
            raise InvalidParamsError(f"orbit of {x} leaves the domain")
        return tuple(out)


def merge_maps(maps) -> PseudoMap:
    pairs: list = []
    words: list = []
    for m in maps:
        pairs.extend(m.pairs)
        words.extend(m.words)
    order = sorted(range(len(pairs)), key=lambda i: pairs[i])
    sys = maps[0].system
    return PseudoMap(sys, tuple(pairs[i] for i in order), tuple(words[i] for i in order))


def is_expressible(theta: PseudoMap, algebra: GAlgebra,
                   max_elements: int | None = None,
                   max_word_len: int | None = None) -> bool:
    """Whether theta moves each algebra cell by a single group element.

    The domain and range must be unions of cells, and every cell inside the
    domain must match some enumerated group element pointwise.  If the group
    enumeration is cut off before a witness or a refutation is reached the
    question stays open and ExpressibilityUndecided is raised.
    """
    sys = theta.system
    dom = set(theta.domain)
    if not algebra.measurable(dom) or not algebra.measurable(theta.range):
        return False
    enum = sys.group(max_elements=max_elements, max_word_len=max_word_len)
    fwd = dict(theta.pairs)
    for cell in algebra.cells:
        if cell[0] not in dom:
            continue
        hit = False
        for _, perm in enum.elements:
            if all(perm[x] == fwd[x] for x in cell):
                hit = True
                break
        if not hit:
            if enum.complete:
                return False
            raise ExpressibilityUndecided(
                "group enumeration capped before deciding a cell"
            )
    return True


def simplemix(sys: FiniteSystem, A, B) -> PseudoMap:
    """Greedy sweep matching A into B along the group enumeration.

    Each group element claims every still-unmatched domain point it sends
    into the still-unclaimed part of B, so the word decomposition is
    measurable over the algebra generated by {A, B}.
    """
    A = sorted(set(A))
    Bset = set(B)
    if not A:
        raise InvalidParamsError("A nonempty")
    if sys.total_weight(A) > sys.total_weight(Bset):
        raise InvalidParamsError("weight(A) <= weight(B)")
    rem_dom = set(A)
    rem_rng = set(Bset)
    pairs: list = []
    words: list = []
    for word, perm in sys.group().elements:
        if not rem_dom:
            break
        batch = [x for x in sorted(rem_dom) if perm[x] in rem_rng]
        for x in batch:
            pairs.append((x, perm[x]))
            words.append(word)
            rem_dom.discard(x)
            rem_rng.discard(perm[x])
    if rem_dom:
        raise InvalidParamsError(
            "group enumeration exhausted before matching", f"left {sorted(rem_dom)}"
        )
    return PseudoMap(sys, tuple(pairs), tuple(words))


def make_equal_partition(sys: FiniteSystem, C, B, n: int) -> list:
    """Split B into n equal-weight pieces with C as the first piece."""
    C = sorted(set(C))
    Bset = set(B)
    if not set(C) <= Bset:
        raise InvalidParamsError("C inside B")
    if n < 1:
        raise InvalidParamsError("n >= 1")
    if sys.total_weight(C) * n != sys.total_weight(Bset):
        raise DivisibilityError("weight(C) * n == weight(B)")
    pieces = [tuple(C)]
    used = set(C)
    for _ in range(n - 1):
        rest = Bset - used
        phi = simplemix(sys, C, rest)
        piece = phi.range
        pieces.append(piece)
        used.update(piece)
    if used != Bset:
        raise DivisibilityError("pieces exhaust B exactly")
    return pieces


def cyclic_permute(sys: FiniteSystem, pieces) -> PseudoMap:
    """Order-n map sending piece k onto piece k+1, identity when n = 1."""
    pieces = [tuple(sorted(p)) for p in pieces]
    if not pieces or any(not p for p in pieces):
        raise InvalidParamsError("pieces nonempty")
    allpts = [x for p in pieces for x in p]
    if len(set(allpts)) != len(allpts):
        raise InvalidParamsError("pieces pairwise disjoint")
    w0 = sys.total_weight(pieces[0])
    if any(sys.total_weight(p) != w0 for p in pieces):
        raise InvalidParamsError("pieces of equal weight")
    phis = [PseudoMap.identity(sys, pieces[0])]
    for p in pieces[1:]:
        phis.append(simplemix(sys, pieces[0], p))
    n = len(pieces)
    steps = []
    for k in range(n):
        nxt = phis[(k + 1) % n]
        steps.append(nxt.compose(phis[k].invert()))
    return merge_maps(steps)


@dataclass(frozen=True)
class MixResult:
    classes: tuple  # tuple of point tuples, each of size n
    theta: PseudoMap
    n: int
    route: str  # "ratcomb" or "atomic"
    algebra: GAlgebra


def _atoms_in(algebra: GAlgebra, B) -> list:
    Bset = set(B)
    return [cell for cell in algebra.cells if cell[0] in Bset]


def avgmix(sys: FiniteSystem, B, labels, eps) -> MixResult:
    """Classes of one size whose per-class cell frequencies track the global.

    The rational-decomposition route hands each class the frequencies of one
    denominator-n vector; when its block sizes do not divide evenly the
    construction falls back to single-atom pieces, which realize the global
    frequencies exactly.
    """
    B = tuple(sorted(set(B)))
    if not B:
        raise InvalidParamsError("B nonempty")
    eps = Fraction(eps)
    present = sorted({labels[x] for x in B})
    cells = {c: frozenset(x for x in B if labels[x] == c) for c in present}
    seeds = [cells[c] for c in present] + [frozenset(B)]
    algebra = generated_algebra(sys, seeds)
    atoms = _atoms_in(algebra, B)
    a = ProbVec(tuple(Fraction(len(cells[c]), len(B)) for c in present))
    plan = None
    if eps > 0 and len(present) > 1:
        dec = ratcomb_decompose(a, eps)
        sizes = [c * len(atoms) for c in dec.mixing.weights]
        if all(s.denominator == 1 for s in sizes) and all(
            int(s) % dec.n == 0 for s in sizes
        ):
            plan = (dec, [int(s) for s in sizes])
    if plan is None:
        theta = cyclic_permute(sys, atoms)
        classes = _orbit_classes(theta)
        return MixResult(classes, theta, len(atoms), "atomic", algebra)
    dec, sizes = plan
    atoms_by_cell = {c: [at for at in atoms if labels[at[0]] == c] for c in present}
    maps = []
    classes: list = []
    for j, s_j in enumerate(sizes):
        if s_j == 0:
            continue
        per_piece = s_j // dec.n
        block_pieces = []
        for i, c in enumerate(present):
            quota = dec.vectors[j].weights[i] * s_j
            take = int(quota)
            grabbed, atoms_by_cell[c] = atoms_by_cell[c][:take], atoms_by_cell[c][take:]
            for t in range(0, take, per_piece):
                piece = tuple(x for at in grabbed[t : t + per_piece] for x in at)
                block_pieces.append(tuple(sorted(piece)))
        theta_j = cyclic_permute(sys, block_pieces)
        maps.append(theta_j)
        classes.extend(_orbit_classes(theta_j))
    theta = merge_maps(maps)
    return MixResult(tuple(classes), theta, dec.n, "ratcomb", algebra)


def _orbit_classes(theta: PseudoMap) -> tuple:
    seen: set = set()
    out = []
    for x in theta.domain:
        if x not in seen:
            orb = theta.orbit(x)
            seen.update(orb)
            out.append(tuple(sorted(orb)))
    return tuple(out)


def avgfuncmix(sys: FiniteSystem, B, funcs, eps) -> MixResult:
    """Classes whose per-class averages of each function sit within eps.

    funcs maps names to point->value mappings on B.  Their joint level sets
    drive avgmix at a tolerance shrunk by the largest total cell amplitude,
    so each function's class average lands within eps of its global mean.
    """
    B = tuple(sorted(set(B)))
    names = list(funcs)
    values = {x: tuple(Fraction(funcs[f][x]) for f in names) for x in B}
    level_of: dict = {}
    for x in B:
        level_of.setdefault(values[x], len(level_of))
    labels = [0] * sys.n_points
    for x in B:
        labels[x] = level_of[values[x]] + 1
    scale = Fraction(0)
    for i, _ in enumerate(names):
        amp = sum(abs(v[i]) for v in level_of)
        scale = max(scale, amp)
    shrunk = Fraction(eps) / scale if scale > 0 else Fraction(eps)
    return avgmix(sys, B, tuple(labels), shrunk)


def name_word(sys: FiniteSystem, labels, theta: PseudoMap, x: int) -> tuple:
    """Labels read along the full theta-orbit of x."""
    return tuple(labels[y] for y in theta.orbit(x))

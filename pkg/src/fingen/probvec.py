"""Weighted finite probability vectors and partition entropy.

Two arithmetic modes coexist deliberately.  Decomposition and counting run
on ``fractions.Fraction`` so reconstruction identities hold exactly;
entropies are reported as floats in nats and compared with tolerances.

A *labeling* is a sequence of cell indices over a finite point set; the
conditional entropy of one labeling given another is the weighted average
of the cell entropies over the conditioning fibers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidParamsError, InvalidPartitionError, InvalidVectorError

__all__ = [
    "ProbVec",
    "Coarsening",
    "RatDecomposition",
    "entropy",
    "entropy_pair",
    "coarsen",
    "cond_entropy",
    "ratcomb_decompose",
    "join_labels",
    "label_distribution",
    "uniform_weights",
]

FLOAT_SUM_TOL = 1e-9


def _coerce_weights(values: Iterable) -> tuple:
    out = []
    exact = True
    for v in values:
        if isinstance(v, Fraction):
            out.append(v)
        elif isinstance(v, int):
            out.append(Fraction(v))
        elif isinstance(v, float):
            out.append(v)
            exact = False
        else:
            raise InvalidVectorError(f"unsupported weight type {type(v).__name__}")
    if not exact:
        out = [float(v) for v in out]
    return tuple(out)


@dataclass(frozen=True)
class ProbVec:
    """Ordered weights, all Fraction (exact mode) or all float."""

    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", _coerce_weights(self.weights))
        w = self.weights
        if not w:
            raise InvalidVectorError("empty vector")
        if any((x < 0) for x in w):
            raise InvalidVectorError("negative weight")
        total = sum(w)
        if self.exact:
            if total != 1:
                raise InvalidVectorError(f"exact weights sum to {total}, not 1")
        elif abs(total - 1.0) > FLOAT_SUM_TOL:
            raise InvalidVectorError(f"float weights sum to {total!r}")

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    @classmethod
    def uniform(cls, k: int) -> "ProbVec":
        return cls(tuple(Fraction(1, k) for _ in range(k)))

    def as_fractions(self) -> tuple:
        """Entries as exact rationals (floats converted to their binary value)."""
        return tuple(x if isinstance(x, Fraction) else Fraction(x) for x in self.weights)

    def to_strings(self) -> list:
        if self.exact:
            return [f"{x.numerator}/{x.denominator}" for x in self.weights]
        return [repr(x) for x in self.weights]

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> "ProbVec":
        vals = []
        for s in items:
            s = s.strip()
            if "/" in s:
                num, den = s.split("/", 1)
                vals.append(Fraction(int(num), int(den)))
            else:
                vals.append(float(s))
        return cls(tuple(vals))


@dataclass(frozen=True)
class Coarsening:
    """Partition of ``range(size)`` into ordered blocks of source indices."""

    blocks: tuple
    size: int

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))
        seen = sorted(i for b in self.blocks for i in b)
        if seen != list(range(self.size)):
            raise InvalidPartitionError("blocks are not a partition of the index range")
        if any(not b for b in self.blocks):
            raise InvalidPartitionError("empty block")

    def block_of(self) -> dict:
        return {i: j for j, b in enumerate(self.blocks) for i in b}

    def __len__(self) -> int:
        return len(self.blocks)


def uniform_weights(n: int) -> tuple:
    return tuple(Fraction(1, n) for _ in range(n))


def entropy(p) -> float:
    """Shannon entropy in nats; the zero-weight convention 0*log 0 = 0 applies."""
    weights = p.weights if isinstance(p, ProbVec) else ProbVec(tuple(p)).weights
    h = 0.0
    for w in weights:
        x = float(w)
        if x > 0.0:
            h -= x * math.log(x)
    return h


def entropy_pair(a: float, b: float) -> float:
    """Entropy of an unnormalized two-outcome split (a, b), both nonnegative."""
    h = 0.0
    for x in (a, b):
        x = float(x)
        if x > 0.0:
            h -= x * math.log(x)
    return h


def coarsen(p: ProbVec, q: Coarsening) -> ProbVec:
    if q.size != len(p):
        raise InvalidPartitionError("coarsening size mismatch")
    return ProbVec(tuple(sum((p.weights[i] for i in b), start=Fraction(0) if p.exact else 0.0) for b in q.blocks))


def _groups(labels: Sequence[int]):
    g: dict = {}
    for i, lab in enumerate(labels):
        g.setdefault(lab, []).append(i)
    return g


def label_distribution(labels: Sequence[int], weights: Sequence | None = None) -> ProbVec:
    """Cell-mass vector of a labeling, cells ordered by label value."""
    if weights is None:
        weights = uniform_weights(len(labels))
    groups = _groups(labels)
    return ProbVec(tuple(sum(weights[i] for i in groups[lab]) for lab in sorted(groups)))


def join_labels(a: Sequence[int], b: Sequence[int]) -> tuple:
    """Common refinement of two labelings, cells numbered by first occurrence."""
    if len(a) != len(b):
        raise InvalidPartitionError("labeling length mismatch")
    seen: dict = {}
    out = []
    for pair in zip(a, b):
        if pair not in seen:
            seen[pair] = len(seen)
        out.append(seen[pair])
    return tuple(out)


def cond_entropy(a: Sequence[int], b: Sequence[int], weights: Sequence | None = None) -> float:
    """H(a | b): average over b-fibers of the entropy of a restricted there."""
    if len(a) != len(b):
        raise InvalidPartitionError("labeling length mismatch")
    if weights is None:
        weights = uniform_weights(len(a))
    h = 0.0
    for fiber in _groups(b).values():
        wb = float(sum(weights[i] for i in fiber))
        if wb <= 0.0:
            continue
        sub: dict = {}
        for i in fiber:
            sub[a[i]] = sub.get(a[i], 0) + weights[i]
        for wab in sub.values():
            x = float(wab)
            if x > 0.0:
                h -= x * math.log(x / wb)
    return h


@dataclass(frozen=True)
class RatDecomposition:
    """Convex mix ``sum_j mixing[j] * vectors[j]`` equal to the source exactly.

    Every component vector has denominator ``n``; ``lambdas``, ``ks`` and
    ``order`` record the internal interpolation data for audits.
    """

    source: ProbVec
    n: int
    vectors: tuple
    mixing: ProbVec
    lambdas: tuple
    ks: tuple
    order: tuple

    def verify(self, eps) -> None:
        eps = Fraction(eps)
        p = len(self.source)
        acc = [Fraction(0)] * p
        for c, r in zip(self.mixing.weights, self.vectors):
            for i in range(p):
                acc[i] += c * r.weights[i]
        if tuple(acc) != self.source.as_fractions():
            raise InvalidVectorError("mix does not reconstruct the source exactly")
        for r in self.vectors:
            for i in range(p):
                if abs(r.weights[i] - self.source.weights[i]) >= eps:
                    raise InvalidVectorError("component strays beyond the tolerance")
            if any(x.denominator > self.n or (self.n % x.denominator) != 0 for x in r.weights):
                raise InvalidVectorError("component denominator exceeds n")


def ratcomb_decompose(a: ProbVec, eps) -> RatDecomposition:
    """Write ``a`` as an exact convex mix of denominator-n rational vectors.

    The common denominator is the least n with n > (p-1)/eps and
    n > 2(p-1)/a_p, so each component stays within eps of ``a`` entrywise.
    Requires exact mode and a positive final entry (reorder beforehand).
    """
    if not a.exact:
        raise InvalidVectorError("decomposition needs exact rational weights")
    eps = Fraction(eps)
    if eps <= 0:
        raise InvalidParamsError("eps > 0")
    p = len(a)
    last = a.weights[-1]
    if last == 0:
        raise InvalidVectorError("final entry must be positive; place a positive cell last")
    if p == 1:
        one = ProbVec((Fraction(1),))
        return RatDecomposition(a, 1, (one,), one, (Fraction(1),), (1,), (0,))

    n = max(
        math.floor(Fraction(p - 1) / eps) + 1,
        math.floor(Fraction(2 * (p - 1)) / last) + 1,
        1,
    )

    if all((n * w).denominator == 1 for w in a.weights):
        # a is itself a denominator-n vector: every component may equal a.
        mixing = ProbVec((Fraction(1),) + (Fraction(0),) * (p - 1))
        ks = tuple(int(n * w) for w in a.weights)
        out = RatDecomposition(a, n, (a,) * p, mixing, (Fraction(1),) * (p - 1), ks, tuple(range(p - 1)))
        out.verify(eps)
        return out

    head = list(a.weights[:-1])
    ks = [math.floor(n * w) for w in head]
    lambdas = [Fraction(k + 1) - n * w for k, w in zip(ks, head)]
    order = sorted(range(p - 1), key=lambda i: lambdas[i])  # stable: ties keep index order

    lam_sorted = [Fraction(0)] + [lambdas[i] for i in order] + [Fraction(1)]
    mixing = ProbVec(tuple(lam_sorted[j] - lam_sorted[j - 1] for j in range(1, p + 1)))

    k_sorted = [ks[i] for i in order]
    vectors = []
    for j in range(1, p + 1):
        comp = [Fraction(0)] * p
        for t in range(p - 1):  # position t in the sorted order holds source index order[t]
            k = k_sorted[t]
            val = Fraction(k, n) if j <= t + 1 else Fraction(k + 1, n)
            comp[order[t]] = val
        comp[p - 1] = 1 - sum(comp[:-1])
        if comp[p - 1] <= 0:
            raise InvalidVectorError("final component entry not positive; eps too loose for a_p")
        vectors.append(ProbVec(tuple(comp)))

    out = RatDecomposition(a, n, tuple(vectors), mixing, tuple(lambdas), tuple(ks), tuple(order))
    out.verify(eps)
    return out

"""Variable-length ternary rank codes on partition cells.

Within each fiber the cells are ranked by decreasing conditional weight and
the cell of rank n receives the base-3 expansion of n.  The expected code
length is then controlled by m * |t(m)| + H(cells | fibers), where m is the
least integer above exp(1 / (1 - log3(e))).  A bit-extraction helper shared
with the tower encoder lives here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import InvalidParamsError, InvalidVectorError
from .probvec import ProbVec, entropy

# least integer greater than exp(1 / (1 - log3(e)))
RANK_CUTOFF = math.floor(math.exp(1 / (1 - math.log(math.e, 3)))) + 1


def ternary(n: int) -> tuple:
    """Base-3 expansion of n >= 1, most significant digit first."""
    if n < 1:
        raise InvalidParamsError("n >= 1", f"got {n}")
    digits = []
    while n:
        n, d = divmod(n, 3)
        digits.append(d)
    return tuple(reversed(digits))


def _rank_word(n: int, start_rank: int) -> tuple:
    if start_rank == 0:
        return (0,) if n == 0 else ternary(n)
    return ternary(n)


def binary_digit(i: int, t: int) -> int:
    """Digit i of the binary expansion of t, i = 1 at the least significant end."""
    if i < 1:
        raise InvalidParamsError("i >= 1", f"got {i}")
    if t < 0:
        raise InvalidParamsError("t >= 0", f"got {t}")
    return (t >> (i - 1)) & 1


@dataclass(frozen=True)
class FiberDistribution:
    """Fiber weights together with a conditional cell distribution per fiber."""

    nu: ProbVec
    mus: tuple

    def __post_init__(self):
        if len(self.nu) != len(self.mus):
            raise InvalidVectorError("one conditional distribution per fiber")
        if not self.mus:
            raise InvalidVectorError("at least one fiber")
        cells = len(self.mus[0])
        for mu in self.mus:
            if not isinstance(mu, ProbVec) or len(mu) != cells:
                raise InvalidVectorError("all fibers share one cell index set")

    @property
    def cells(self) -> int:
        return len(self.mus[0])

    @classmethod
    def from_labels(cls, cell_labels, fiber_labels, weights=None) -> "FiberDistribution":
        """Disintegrate point weights over the fibers of a second labeling."""
        if len(cell_labels) != len(fiber_labels):
            raise InvalidVectorError("labelings cover the same points")
        n = len(cell_labels)
        if weights is None:
            weights = (Fraction(1, n),) * n
        cells = max(cell_labels) + 1
        fibers = sorted(set(fiber_labels))
        nu = []
        mus = []
        for y in fibers:
            mass = sum(w for w, f in zip(weights, fiber_labels) if f == y)
            if mass == 0:
                continue
            cond = [Fraction(0)] * cells
            for w, c, f in zip(weights, cell_labels, fiber_labels):
                if f == y:
                    cond[c] += Fraction(w)
            nu.append(Fraction(mass))
            mus.append(ProbVec(tuple(v / mass for v in cond)))
        return cls(ProbVec(tuple(nu)), tuple(mus))


@dataclass(frozen=True)
class TernaryCode:
    """Injective ternary words per fiber, aligned with the cell index set."""

    words: tuple  # words[y][c] is the code of cell c within fiber y
    start_rank: int = 1

    def word(self, y: int, c: int) -> tuple:
        return self.words[y][c]

    def length(self, y: int, c: int) -> int:
        return len(self.words[y][c])

    def to_json(self) -> list:
        return [
            {"fiber": y, "codes": {str(c): "".join(map(str, w)) for c, w in enumerate(ws)}}
            for y, ws in enumerate(self.words)
        ]


def build_code(fd: FiberDistribution, start_rank: int = 1) -> TernaryCode:
    """Rank cells inside each fiber and hand rank n the expansion t(n).

    Ranking is by decreasing conditional weight, ties and zero-weight cells
    by increasing cell index, so the heaviest cells get the shortest words.
    """
    if start_rank not in (0, 1):
        raise InvalidParamsError("start_rank in {0, 1}", f"got {start_rank}")
    out = []
    for mu in fd.mus:
        order = sorted(range(len(mu)), key=lambda c: (-mu.weights[c], c))
        ws = [()] * len(mu)
        for pos, c in enumerate(order):
            ws[c] = _rank_word(pos + start_rank, start_rank)
        out.append(tuple(ws))
    return TernaryCode(tuple(out), start_rank)


class LengthBound(NamedTuple):
    avg_len: float
    bound: float
    holds: bool


def code_length_bound(fd: FiberDistribution, code: TernaryCode) -> LengthBound:
    """Average code length against m * |t(m)| + H(cells | fibers)."""
    avg = 0.0
    cond = 0.0
    for w, mu, ws in zip(fd.nu.weights, fd.mus, code.words):
        wf = float(w)
        avg += wf * sum(len(cw) * float(m) for cw, m in zip(ws, mu.weights))
        cond += wf * entropy(mu)
    bound = RANK_CUTOFF * len(ternary(RANK_CUTOFF)) + cond
    return LengthBound(avg, bound, avg <= bound)

"""Shared end-to-end instance family for the recoding pipeline tests.

Each entry is a cyclic system with an invariant mod-``d`` coarse algebra and
a fine labeling that breaks one residue cell at a few exception points, so
the conditional entropy is small but positive.  Targets, rates, and packing
tolerances are pinned per instance so the decoder budget clears the measured
codeword separation.
"""

from fractions import Fraction as F

from fingen.probvec import Coarsening, ProbVec
from fingen.recoder import RecodeParams
from fingen.system import FiniteSystem, GAlgebra
from fingen.tower import build_tower
from fingen.typical import PackingBudget, build_injections

TWO_ONE_BLOCKS = ((0, 1), (2,))

# name, N, modulus, exceptions, p, r, delta, tower_eps, m, reserved, pack_delta
FAMILY = (
    ("z24-mod3", 24, 3, (0,), (F(1, 4), F(1, 4), F(1, 2)),
     F(1, 2), F(1, 8), F(7, 2), None, (), None),
    ("z28-explicit-m", 28, 2, (0,), (F(2, 7), F(3, 14), F(1, 2)),
     F(1, 2), F(1, 8), F(11, 5), 28, (), F(1, 100)),
    ("z32-reserved", 32, 2, (0,), (F(1, 4), F(1, 4), F(1, 2)),
     F(1, 2), F(1, 10), F(2), None, (5,), None),
    ("z48-two-classes", 48, 3, (0, 24), (F(1, 4), F(1, 4), F(1, 2)),
     F(1, 2), F(1, 8), F(7, 2), 24, (), None),
    ("z30-low-rate", 30, 3, (0,), (F(1, 4), F(1, 4), F(1, 2)),
     F(2, 5), F(1, 8), F(14, 5), None, (), None),
    ("z36-wide-prefix", 36, 2, (0,), (F(2, 9), F(5, 18), F(1, 2)),
     F(1, 2), F(1, 10), F(2), None, (), F(1, 100)),
    ("z40-mod4", 40, 4, (0,), (F(1, 4), F(1, 4), F(1, 2)),
     F(3, 10), F(1, 8), F(27, 10), None, (), None),
    ("z14-degenerate-fibers", 14, 2, (), (F(2, 7), F(3, 14), F(1, 2)),
     F(1), F(1, 10), F(12, 5), None, (), None),
    ("z60-at-capacity", 60, 3, (3, 33), (F(1, 4), F(1, 4), F(1, 2)),
     F(2, 5), F(1, 8), F(14, 5), 30, (), None),
    ("z24-skew-target", 24, 3, (0,), (F(1, 6), F(1, 6), F(2, 3)),
     F(1, 2), F(1, 10), F(7, 2), None, (), None),
)


def build(entry):
    name, n, mod, exc, p, r, delta, te, m, reserved, pack_delta = entry
    sysn = FiniteSystem.cyclic(n)
    falg = GAlgebra(tuple(x % mod for x in range(n)))
    xi = tuple(mod if x in exc else x % mod for x in range(n))
    params = RecodeParams(ProbVec(p), Coarsening(TWO_ONE_BLOCKS, len(p)), r, delta, 0)
    kwargs = {"tower_eps": te, "m": m, "reserved": reserved}
    if pack_delta is not None:
        kwargs["pack_delta"] = pack_delta
    return sysn, xi, falg, params, kwargs


def pipeline_parts(entry):
    """Rebuild the intermediate objects of the pipeline for one instance."""
    sysn, xi, falg, params, kwargs = build(entry)
    pairs = sorted({(falg.labels[x], xi[x]) for x in range(sysn.n_points)})
    index = {pair: i for i, pair in enumerate(pairs)}
    fine = tuple(index[(falg.labels[x], xi[x])] for x in range(sysn.n_points))
    coarse_ids = sorted({b for b, _ in pairs})
    fine_blocks = Coarsening(
        tuple(
            tuple(i for i, (b, _) in enumerate(pairs) if b == bb) for bb in coarse_ids
        ),
        len(pairs),
    )
    blk = fine_blocks.block_of()
    beta = tuple(blk[fine[x]] for x in range(sysn.n_points))
    counts = [0] * len(pairs)
    for f in fine:
        counts[f] += 1
    fine_dist = ProbVec(tuple(F(c, sysn.n_points) for c in counts))
    tower = build_tower(sysn, fine, kwargs["tower_eps"], 1, kwargs["m"])
    pack_delta = kwargs.get("pack_delta") or F(9, 400 * len(params.q))
    budget = PackingBudget(pack_delta, params.r)
    needed = sorted(
        {tuple(beta[x] for x in tower.theta.orbit(y)) for y in tower.transversal}
    )
    codebook = build_injections(
        fine_dist, fine_blocks, params.q, budget, 0, tower.n, "exact", only=needed
    )
    return sysn, xi, falg, params, fine, beta, tower, codebook

"""Deterministic experiment driver over the library.

Subcommands mirror the library surface: typical-set count windows, rational
mixes, fiber codebooks, towers, alphabet reductions, the full recoding
pipeline, and the exhaustive generator search.  Reports are JSON with sorted
keys or RFC-4180 CSV, and are byte-identical for identical (config, seed)
pairs.  Randomness exists only in instance sampling and is derived from the
seed through labeled hash splits, never inside the core algorithms.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import random
import sys
from dataclasses import dataclass
from fractions import Fraction

from .errors import FingenError
from .probvec import Coarsening, ProbVec, cond_entropy, ratcomb_decompose
from .recoder import (
    RecodeParams,
    brute_force_generator_search,
    krieger_recode,
    reduce_alphabet,
)
from .system import FiniteSystem, GAlgebra, generated_algebra
from .tower import audit_tower, build_tower
from .typical import PackingBudget, build_injections, stirling_window

SCHEMA = "1"
MAX_SEED = 2**64


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config plumbing


def _fr(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    try:
        return Fraction(str(v).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not a rational: {v!r} ({e})")


def _fs(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _vec(items) -> ProbVec:
    if isinstance(items, str):
        items = items.split(",")
    if not isinstance(items, (list, tuple)) or not items:
        raise ConfigError("vector must be a non-empty list")
    return ProbVec(tuple(_fr(v) for v in items))


def child_seed(seed: int, label: str) -> int:
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved run description: merged file options, seed, output routing."""

    command: str
    options: dict
    seed: int
    fmt: str
    out: str | None
    max_points: int

    def __post_init__(self):
        if not (0 <= self.seed < MAX_SEED):
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.max_points < 1:
            raise ConfigError("max-points must be positive")


def make_system(spec, cap: int) -> FiniteSystem:
    if not isinstance(spec, dict):
        raise ConfigError("system must be an object")
    if "cyclic" in spec:
        n = int(spec["cyclic"])
        if n > cap:
            raise ConfigError(f"system size {n} exceeds max-points {cap}")
        return FiniteSystem.cyclic(n)
    if "points" in spec:
        n = int(spec["points"])
        if n > cap:
            raise ConfigError(f"system size {n} exceeds max-points {cap}")
        gens = {name: tuple(perm) for name, perm in spec["generators"].items()}
        weights = spec.get("weights")
        if weights is not None:
            weights = tuple(_fr(w) for w in weights)
        return FiniteSystem.make(n, gens, weights)
    raise ConfigError("system needs 'cyclic' or 'points'")


def parse_labels(spec, n: int) -> tuple:
    if isinstance(spec, (list, tuple)):
        if len(spec) != n:
            raise ConfigError("one label per point")
        return tuple(int(v) for v in spec)
    if isinstance(spec, dict):
        if "modulus" in spec:
            d = int(spec["modulus"])
            exc = {int(x) for x in spec.get("exceptions", [])}
            return tuple(d if x in exc else x % d for x in range(n))
        if "sizes" in spec:
            sizes = [int(s) for s in spec["sizes"]]
            if sum(sizes) != n or any(s < 1 for s in sizes):
                raise ConfigError("sizes must be positive and sum to the point count")
            out = []
            for c, sz in enumerate(sizes):
                out += [c] * sz
            return tuple(out)
    raise ConfigError("labels need an explicit list, 'modulus', or 'sizes'")


def parse_blocks(spec, size: int) -> Coarsening:
    try:
        return Coarsening(tuple(tuple(int(i) for i in b) for b in spec), size)
    except FingenError as e:
        raise ConfigError(f"bad blocks: {e}")


def expand_range(spec) -> list:
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, str):
        parts = [int(p) for p in spec.split(":")]
        if len(parts) == 1:
            return parts
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    if isinstance(spec, dict):
        return list(
            range(int(spec["start"]), int(spec["stop"]) + 1, int(spec.get("step", 1)))
        )
    if isinstance(spec, list):
        return [int(v) for v in spec]
    raise ConfigError("range needs an int, 'a:b:c', a list, or start/stop/step")


def jsonable(v):
    if isinstance(v, Fraction):
        return _fs(v)
    if isinstance(v, float):
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return v


# ---------------------------------------------------------------------------
# subcommands


def cmd_count(cfg: ExperimentConfig) -> dict:
    o = cfg.options
    q = _vec(o.get("q", ["1/2", "1/2"]))
    eps_list = o.get("eps", ["0"])
    if not isinstance(eps_list, list):
        eps_list = [eps_list]
    eps_list = [_fr(e) for e in eps_list]
    delta = _fr(o.get("delta", "1/10"))
    rows = []
    for n in expand_range(o.get("n", 24)):
        for eps in eps_list:
            rep = stirling_window(q, None, delta, eps, n)
            rows.append(
                {
                    "n": n,
                    "eps": _fs(eps),
                    "delta": _fs(delta),
                    "count": rep.count,
                    "log_count": rep.log_count,
                    "log_lower": rep.log_lower,
                    "log_upper": rep.log_upper,
                    "holds": rep.holds,
                }
            )
    columns = ["n", "eps", "delta", "count", "log_count", "log_lower", "log_upper", "holds"]
    return {"columns": columns, "rows": rows}


def _composition(rng: random.Random, total: int, parts: int) -> list:
    cuts = sorted(rng.sample(range(1, total), parts - 1))
    edges = [0] + cuts + [total]
    return [b - a for a, b in zip(edges, edges[1:])]


def _decompose_row(rid: str, a: ProbVec, eps: Fraction) -> dict:
    dec = ratcomb_decompose(a, eps)
    identity = all(
        sum(Fraction(c) * vec.weights[i] for c, vec in zip(dec.mixing.weights, dec.vectors))
        == a.weights[i]
        for i in range(len(a))
    )
    max_dev = max(
        abs(Fraction(vec.weights[i]) - a.weights[i])
        for vec in dec.vectors
        for i in range(len(a))
    )
    return {
        "id": rid,
        "a": ",".join(a.to_strings()),
        "n": dec.n,
        "components": len(dec.vectors),
        "mixing": ",".join(dec.mixing.to_strings()),
        "max_dev": _fs(max_dev),
        "identity": identity,
        "within_eps": max_dev < eps,
    }


def cmd_decompose(cfg: ExperimentConfig) -> dict:
    o = cfg.options
    eps = _fr(o.get("eps", "3/10"))
    rows = []
    if o.get("a") is not None:
        rows.append(_decompose_row("given", _vec(o["a"]), eps))
    for i in range(int(o.get("samples", 0))):
        rng = random.Random(child_seed(cfg.seed, f"decompose:{i}"))
        parts = rng.randint(2, int(o.get("max_len", 5)))
        den = rng.choice((12, 24, 36, 60, 120))
        a = ProbVec(tuple(Fraction(c, den) for c in _composition(rng, den, parts)))
        rows.append(_decompose_row(f"sample-{i:03d}", a, eps))
    rows.sort(key=lambda r: r["id"])
    columns = ["id", "a", "n", "components", "mixing", "max_dev", "identity", "within_eps"]
    return {"columns": columns, "rows": rows}


def cmd_codebook(cfg: ExperimentConfig) -> dict:
    o = cfg.options
    xi = _vec(o["xi"])
    blocks = parse_blocks(o["blocks"], len(xi))
    q = _vec(o["q"])
    budget = PackingBudget(
        _fr(o.get("delta", "1/1000")),
        _fr(o.get("r", "1/2")),
        _fr(o["eps0"]) if o.get("eps0") is not None else None,
        int(o["n0"]) if o.get("n0") is not None else None,
    )
    book = build_injections(
        xi, blocks, q, budget, _fr(o.get("eps", "0")), int(o["n"]),
        o.get("capacity", "analytic"),
    )
    report = {
        "k": book.k,
        "rho": _fs(book.rho),
        "packing_size": len(book.packing),
        "books": len(book.books),
        "separation": _fs(book.separation()),
        "checks": list(book.checks),
    }
    if o.get("include_books"):
        report["codebook"] = book.to_json()
    return {"certificate": report}


def cmd_tower(cfg: ExperimentConfig) -> dict:
    o = cfg.options
    sysn = make_system(o["system"], cfg.max_points)
    labels = parse_labels(o["labels"], sysn.n_points)
    m = int(o["m"]) if o.get("m") is not None else None
    tw = build_tower(sysn, labels, _fr(o.get("eps", "2")), int(o.get("nmin", 1)), m)
    return {
        "certificate": {
            "m": tw.m,
            "k": tw.k,
            "n": tw.n,
            "ell": tw.ell,
            "classes": len(tw.transversal),
            "transversal": list(tw.transversal),
            "profiles": len(tw.profiles),
            "s2_size": len(tw.s2),
            "audit": audit_tower(tw),
        }
    }


def _label_cells(labels) -> list:
    out: dict = {}
    for x, c in enumerate(labels):
        out.setdefault(c, []).append(x)
    return [tuple(v) for v in out.values()]


def cmd_reduce(cfg: ExperimentConfig) -> dict:
    o = cfg.options
    sysn = make_system(o["system"], cfg.max_points)
    xi = parse_labels(o["labels"], sysn.n_points)
    falg = GAlgebra(parse_labels(o.get("factor", {"modulus": 1}), sysn.n_points))
    eps = _fr(o.get("eps", "1"))
    delta = _fr(o["delta"]) if o.get("delta") is not None else None
    cutoff = int(o["cutoff"]) if o.get("cutoff") is not None else None
    alpha, plan = reduce_alphabet(sysn, xi, falg, eps, delta, cutoff)
    ga = generated_algebra(sysn, _label_cells(alpha) + _label_cells(falg.labels))
    gx = generated_algebra(sysn, _label_cells(xi) + _label_cells(falg.labels))
    w = sysn.weights.weights
    return {
        "certificate": {
            "cells_before": len(set(xi)),
            "cells_after": len(set(alpha)),
            "h_before": cond_entropy(xi, falg.labels, w),
            "h_after": cond_entropy(alpha, falg.labels, w),
            "eps": _fs(eps),
            "algebra_equal": ga.labels == gx.labels,
            "plan": plan.to_json(),
        },
        "alpha": list(alpha),
    }


def cmd_recode(cfg: ExperimentConfig) -> dict:
    o = cfg.options
    sysn = make_system(o["system"], cfg.max_points)
    xi = parse_labels(o["xi"], sysn.n_points)
    falg = GAlgebra(parse_labels(o["factor"], sysn.n_points))
    p = _vec(o["p"])
    params = RecodeParams(
        p, parse_blocks(o["blocks"], len(p)), _fr(o["r"]), _fr(o["delta"]),
        _fr(o.get("eps", "0")),
    )
    alpha, cert = krieger_recode(
        sysn, xi, falg, params,
        reserved=tuple(int(x) for x in o.get("reserved", [])),
        tower_eps=_fr(o["tower_eps"]) if o.get("tower_eps") is not None else None,
        m=int(o["m"]) if o.get("m") is not None else None,
        nmin=int(o.get("nmin", 1)),
        pack_delta=_fr(o["pack_delta"]) if o.get("pack_delta") is not None else None,
        capacity=o.get("capacity", "exact"),
    )
    return {"certificate": cert, "alpha": list(alpha)}


def cmd_oracle(cfg: ExperimentConfig) -> dict:
    o = cfg.options
    sysn = make_system(o.get("system", {"cyclic": 4}), cfg.max_points)
    h, witness = brute_force_generator_search(sysn, int(o.get("k_max", sysn.n_points)))
    found = witness is not None
    return {
        "certificate": {
            "points": sysn.n_points,
            "k_max": int(o.get("k_max", sysn.n_points)),
            "found": found,
            "min_entropy": h if found else None,
            "witness": [list(c) for c in witness] if found else None,
        }
    }


COMMANDS = {
    "count": cmd_count,
    "decompose": cmd_decompose,
    "codebook": cmd_codebook,
    "tower": cmd_tower,
    "reduce": cmd_reduce,
    "recode": cmd_recode,
    "oracle": cmd_oracle,
}


# ---------------------------------------------------------------------------
# rendering


def _cell(v) -> str:
    if v is True:
        return "true"
    if v is False:
        return "false"
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return _fs(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _flatten(prefix: str, v, rows: list):
    if isinstance(v, dict):
        for k in sorted(v, key=str):
            _flatten(f"{prefix}.{k}" if prefix else str(k), v[k], rows)
    elif isinstance(v, (list, tuple)):
        for i, item in enumerate(v):
            _flatten(f"{prefix}[{i}]", item, rows)
    else:
        rows.append((prefix, _cell(v)))


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    if "rows" in report:
        columns = report["columns"]
        writer.writerow(columns)
        for row in report["rows"]:
            writer.writerow([_cell(row[c]) for c in columns])
    else:
        writer.writerow(["key", "value"])
        rows: list = []
        _flatten("", jsonable(report), rows)
        for key, val in rows:
            writer.writerow([key, val])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fingen", description="finite recoding experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--max-points", type=int, default=1024)
        if name == "count":
            p.add_argument("--q", help="comma-separated weights")
            p.add_argument("--eps", help="comma-separated tolerances")
            p.add_argument("--delta")
            p.add_argument("--n", help="single value or start:stop:step")
        if name == "decompose":
            p.add_argument("--a", help="comma-separated weights")
            p.add_argument("--eps")
            p.add_argument("--samples", type=int)
        if name == "oracle":
            p.add_argument("--points", type=int, help="cyclic system size")
            p.add_argument("--k-max", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    options: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                options = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}")
        if not isinstance(options, dict):
            raise ConfigError("config must be a JSON object")
    overrides = {
        "q": getattr(args, "q", None),
        "eps": getattr(args, "eps", None),
        "delta": getattr(args, "delta", None),
        "n": getattr(args, "n", None),
        "a": getattr(args, "a", None),
        "samples": getattr(args, "samples", None),
        "k_max": getattr(args, "k_max", None),
    }
    for key, val in overrides.items():
        if val is not None:
            options[key] = val
    if getattr(args, "points", None) is not None:
        options["system"] = {"cyclic": args.points}
    if args.command == "count" and isinstance(options.get("eps"), str):
        options["eps"] = options["eps"].split(",")
    return ExperimentConfig(
        args.command, options, args.seed, args.format, args.out, args.max_points
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        report = {"schema": SCHEMA, "command": cfg.command, "seed": cfg.seed}
        report.update(COMMANDS[cfg.command](cfg))
        text = render(report, cfg.fmt)
    except ConfigError as e:
        sys.stderr.write(f"config error: {e}\n")
        return 2
    except FingenError as e:
        err = {
            "schema": SCHEMA,
            "command": args.command,
            "error": {"type": type(e).__name__, "message": str(e)},
        }
        named = getattr(e, "inequality", None) or getattr(e, "constraint", None)
        if named:
            err["error"]["name"] = named
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return 1
    except (KeyError, TypeError, ValueError) as e:
        sys.stderr.write(f"config error: {type(e).__name__}: {e}\n")
        return 2
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

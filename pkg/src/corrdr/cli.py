"""Command-line entry point: ``corrdr enumerate|dr|invariants|verify``.

Exit codes:
  0  success
  1  a verification check failed
  2  usage error (bad flags)
  3  invalid parameters (delta does not divide a, legs do not sum to zero, ...)
  4  an enumeration cap was exceeded
  5  internal invariant violated
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .abelian import (ResourceCapExceeded, Subgroup, SubgroupLattice, TorsionAmbient, enumerate_subgroups,
                      pairing_is_nondegenerate, raise_level, weil_pair_circle)
from .elliptic import (InvariantMismatch, N0_point, N_point, genus1_graph_sum, invariant_rows, qseries_check,
                       rows_to_csv, subgroup_sum_N0)
from .exact import ConfigurationError
from .graphs import GraphError, enumerate_graphs, subdivide
from .monodromy import InvariantViolation, enumerate_corr0_cones, enumerate_strata
from .pixton import (assemble_DRK, correlated_dr, enumerate_weightings, is_weighting, validate_legs,
                     verify_gluing)
from .tropical import DivisorClass, canonical_rep

SCHEMA_VERSION = 1

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INVALID, EXIT_CAP, EXIT_INTERNAL = 0, 1, 2, 3, 4, 5


@dataclass
class RunConfig:
    g: int = 1
    n: int = 0
    d: int = 0
    delta: int = 1
    q: int = 1
    a: tuple[int, ...] = ()
    trunc: int | None = None
    format: str = "json"
    cap: int = 20000
    seed: int = 0
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def validate_legs(self) -> None:
        validate_legs(self.a, self.delta)


def _parse_a(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad leg vector {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--g", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--a", type=_parse_a, help="leg vector, e.g. 2,-2")
    p.add_argument("--trunc", type=int)
    p.add_argument("--format", choices=("json", "csv", "text"))
    p.add_argument("--cap", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--config", help="TOML file with default parameters")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrdr",
        description="Correlated double ramification cycles: enumeration, assembly and checks.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("enumerate", help="list graphs, subgroups, monodromy graphs or cones")
    p.add_argument("kind", choices=("graphs", "subgroups", "monodromy", "cones"))
    p.add_argument("--index", type=int, default=0, help="monodromy graph whose cones are listed")
    _common(p)
    p = sub.add_parser("dr", help="assemble the correlated DR class")
    p.add_argument("--max-edges", type=int)
    _common(p)
    p = sub.add_parser("invariants", help="tables of elliptic invariants")
    _common(p)
    p = sub.add_parser("verify", help="run a check suite")
    p.add_argument("suite", choices=("weil", "moebius", "weightings", "gluing", "elliptic", "qseries"))
    _common(p)
    return parser


def make_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(ns, "config", None):
        with open(ns.config, "rb") as fh:
            data = tomllib.load(fh)
        for k, v in data.items():
            if not hasattr(cfg, k):
                raise ConfigurationError(f"unknown config key {k!r}")
            setattr(cfg, k, tuple(v) if k == "a" else v)
    for k in ("g", "n", "d", "delta", "q", "a", "trunc", "format", "cap", "seed", "jobs"):
        v = getattr(ns, k, None)
        if v is not None:
            setattr(cfg, k, v)
    if cfg.delta < 1 or cfg.q < 0 or cfg.g < 0 or cfg.n < 0 or cfg.d < 0:
        raise ConfigurationError("parameters must be non-negative and delta positive")
    if cfg.jobs < 1:
        raise ConfigurationError("--jobs must be at least 1")
    return cfg


# --------------------------------------------------------------------------
# output


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def emit(cfg: RunConfig, payload: dict, rows: list[dict] | None = None, text: str | None = None) -> str:
    if cfg.format == "csv" and rows is not None:
        return rows_to_csv(rows) if rows and "source" in rows[0] else _plain_csv(rows)
    if cfg.format == "text" and text is not None:
        return text
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(payload, default=_jsonable, indent=2, sort_keys=False)


def _plain_csv(rows: list[dict]) -> str:
    import csv
    import io
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v, default=_jsonable) if isinstance(v, (list, dict)) else v
                        for k, v in r.items()})
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands


def cmd_enumerate(cfg: RunConfig, kind: str, index: int = 0) -> tuple[int, str]:
    if kind == "graphs":
        gs = enumerate_graphs(cfg.g, cfg.n, cfg.d)
        if len(gs) > cfg.cap:
            raise ResourceCapExceeded(f"{len(gs)} graphs exceed cap {cfg.cap}")
        items = [gr.to_json() for gr in gs]
    elif kind == "subgroups":
        subs = enumerate_subgroups(TorsionAmbient.for_target(cfg.delta, cfg.q), cap=cfg.cap)
        items = [{"rows": s.to_json(), "order": s.order} for s in subs]
    else:
        fan = enumerate_strata(cfg.g, cfg.n, cfg.d, cfg.delta, cfg.q, cap=cfg.cap)
        if kind == "monodromy":
            items = [mg.to_json() for mg in fan]
        else:
            if not 0 <= index < len(fan):
                raise ConfigurationError(f"--index must lie in [0, {len(fan)})")
            cones = enumerate_corr0_cones(fan[index])
            items = [{"class": list(c.divisor_class.vector),
                      "representative": canonical_rep(c.divisor_class).to_json()} for c in cones]
    rows = [{"index": i, "item": it} for i, it in enumerate(items)]
    text = f"{len(items)} {kind}\n" + "\n".join(json.dumps(it) for it in items)
    return EXIT_OK, emit(cfg, {"kind": kind, "count": len(items), "items": items}, rows, text)


def _dr_for_k(args):
    g, a, delta, q, k_rows, trunc, max_edges = args
    amb = TorsionAmbient.for_target(delta, q)
    k = Subgroup.generated(amb, k_rows)
    res = correlated_dr(g, a, delta, q, [k], trunc, max_edges=max_edges)
    _, pp, parts = res.per_k[0]
    rep = verify_gluing(pp)
    return {
        "K": k.to_json(),
        "fan": pp.to_json()["fan"],
        "degree_g": [p.to_text() for p in parts],
        "gluing": rep.ok,
        "gluing_detail": rep.reason,
    }, res.psi_prefactor.to_text()


def cmd_dr(cfg: RunConfig, max_edges: int | None = None) -> tuple[int, str]:
    cfg.validate_legs()
    trunc = cfg.g if cfg.trunc is None else cfg.trunc
    ks = enumerate_subgroups(TorsionAmbient.for_target(cfg.delta, cfg.q), cap=cfg.cap)
    jobs = [(cfg.g, cfg.a, cfg.delta, cfg.q, k.rows, trunc, max_edges) for k in ks]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as ex:
            results = list(ex.map(_dr_for_k, jobs))
    else:
        results = [_dr_for_k(j) for j in jobs]
    strata = [r for r, _ in results]
    glued = all(s["gluing"] for s in strata)
    payload = {"parameters": {"g": cfg.g, "a": list(cfg.a), "delta": cfg.delta, "q": cfg.q, "trunc": trunc},
               "psi_prefactor": results[0][1] if results else "1/1",
               "strata": strata, "gluing": glued}
    rows = [{"K": s["K"], "cones": len(s["fan"]), "gluing": s["gluing"]} for s in strata]
    text = "\n".join(f"K={s['K']} cones={len(s['fan'])} gluing={s['gluing']}" for s in strata)
    return (EXIT_OK if glued else EXIT_FAILED), emit(cfg, payload, rows, text)


def cmd_invariants(cfg: RunConfig) -> tuple[int, str]:
    validate_legs(cfg.a, cfg.delta)
    d_max = cfg.d or 6
    rows = invariant_rows(cfg.a, cfg.delta, d_max, max(cfg.g, 1))
    text = "\n".join(f"g={r['g']} d={r['d']} N={r['N']} N0={r['N0']} ({r['source']})" for r in rows)
    return EXIT_OK, emit(cfg, {"rows": rows}, rows, text)


# verification suites ------------------------------------------------------


Check = tuple[str, bool, str]


def suite_weil(cfg: RunConfig) -> list[Check]:
    out = []
    for delta in range(1, 7):
        amb = TorsionAmbient.for_target(delta, 1)
        out.append((f"nondegenerate delta={delta}", pairing_is_nondegenerate(amb), ""))
        bad = 0
        for k in range(1, 5):
            for x in amb.elements():
                for y in amb.elements():
                    lhs = weil_pair_circle(raise_level(x, k), raise_level(y, k), k * delta)
                    rhs = (k * weil_pair_circle(x, y, delta)) % 1
                    bad += lhs != rhs
        out.append((f"level change delta={delta}", bad == 0, f"{bad} failures"))
    return out


def suite_moebius(cfg: RunConfig) -> list[Check]:
    rng = random.Random(cfg.seed)
    out = []
    for delta in (2, 3, 4, 6):
        lat = SubgroupLattice(TorsionAmbient.for_target(delta, 1))
        f = {h: rng.randint(-50, 50) for h in lat.subgroups}
        big = {k: sum(f[h] for h in lat.above(k)) for k in lat.subgroups}
        back = {k: sum(lat.moebius(k, h) * big[h] for h in lat.above(k)) for k in lat.subgroups}
        out.append((f"moebius round trip delta={delta}", back == f, f"{len(lat.subgroups)} subgroups"))
    return out


def random_weighting_instance(rng: random.Random):
    """A random graph, delta, class divergence, legs and r with consistent data."""
    g, n = rng.choice([(1, 1), (1, 2), (2, 0), (2, 1), (0, 3), (0, 4), (1, 3)])
    graphs = enumerate_graphs(g, n, 0)
    gr = rng.choice(graphs)
    delta = rng.choice([1, 2, 3])
    sub = subdivide(gr, delta)
    cls = DivisorClass(gr, delta, tuple(rng.randrange(delta) for _ in range(gr.b1)))
    div = canonical_rep(cls)
    labels = list(gr.leg_labels)
    legs = {lab: delta * rng.randint(-3, 3) for lab in labels[:-1]}
    if labels:
        legs[labels[-1]] = -sum(legs.values())
    r = rng.randint(2, 7)
    return sub, div, legs, r


def suite_weightings(cfg: RunConfig, count: int = 20) -> list[Check]:
    rng = random.Random(cfg.seed)
    out = []
    for i in range(count):
        sub, div, legs, r = random_weighting_instance(rng)
        ws = enumerate_weightings(sub, div, legs, r)
        ok = len(ws) == r ** sub.b1 and all(is_weighting(w, div, legs) for w in ws)
        out.append((f"instance {i}: b1={sub.b1} delta={sub.delta} r={r}", ok, f"{len(ws)} weightings"))
    return out


def suite_gluing(cfg: RunConfig) -> list[Check]:
    g = cfg.g if cfg.g else 2
    delta = cfg.delta if cfg.delta > 1 else 2
    trunc = 2 if cfg.trunc is None else cfg.trunc
    out = []
    for k in enumerate_subgroups(TorsionAmbient.for_target(delta, cfg.q)):
        pp = assemble_DRK(g, 2, 0, delta, cfg.q, k, trunc, a=(delta, -delta))
        rep = verify_gluing(pp)
        out.append((f"g={g} delta={delta} K={k.to_json()}", rep.ok, f"{rep.checked} facets {rep.reason}"))
    return out


def suite_elliptic(cfg: RunConfig) -> list[Check]:
    out = []
    for delta in range(1, 7):
        for base in ((1, -1), (2, -1, -1)):
            a = tuple(delta * x for x in base)
            bad = [d for d in range(1, 21) if subgroup_sum_N0(d, a, delta) != N0_point(d, a, delta)]
            out.append((f"N0 closed forms vs subgroup sum a={a}", not bad, f"bad d: {bad}"))
    for a in ((2, -2), (3, -1, -2), (2, -1, 1, -2)):
        bad = [d for d in range(1, 11) if genus1_graph_sum(d, a) != N_point(d, a)]
        out.append((f"graph sum vs closed form a={a}", not bad, f"bad d: {bad}"))
        bad = [d for d in range(1, 11) if N0_point(d, a, 1) != N_point(d, a)]
        out.append((f"N0 at delta=1 equals N a={a}", not bad, f"bad d: {bad}"))
    return out


def suite_qseries(cfg: RunConfig) -> list[Check]:
    out = []
    for delta in (1, 2):
        for base in ((1, -1), (2, -1, -1)):
            a = tuple(delta * x for x in base)
            rep = qseries_check(a, delta, 4, 12)
            out.append((f"q-series a={a} delta={delta}", rep.ok, f"{rep.checked} coefficients"))
    return out


SUITES: dict[str, Callable[[RunConfig], list[Check]]] = {
    "weil": suite_weil, "moebius": suite_moebius, "weightings": suite_weightings,
    "gluing": suite_gluing, "elliptic": suite_elliptic, "qseries": suite_qseries,
}


def cmd_verify(cfg: RunConfig, suite: str) -> tuple[int, str]:
    checks = SUITES[suite](cfg)
    ok = all(c[1] for c in checks)
    rows = [{"check": name, "pass": passed, "detail": detail} for name, passed, detail in checks]
    text = "\n".join(f"{'PASS' if p else 'FAIL'} {name} {detail}".rstrip() for name, p, detail in checks)
    return (EXIT_OK if ok else EXIT_FAILED), emit(cfg, {"suite": suite, "pass": ok, "checks": rows}, rows, text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = make_config(ns)
        if ns.command == "enumerate":
            code, out = cmd_enumerate(cfg, ns.kind, ns.index)
        elif ns.command == "dr":
            code, out = cmd_dr(cfg, ns.max_edges)
        elif ns.command == "invariants":
            code, out = cmd_invariants(cfg)
        else:
            code, out = cmd_verify(cfg, ns.suite)
    except (ConfigurationError, GraphError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InvariantMismatch, InvariantViolation) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

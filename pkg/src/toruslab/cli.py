"""Command-line front end: ``toruslab <group> <action> [options]``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 failed gate
under ``--check``. Every option can also come from a TOML or JSON file given
with ``--config``; flags on the command line take precedence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import tomli

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_GATE = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class GateFailure(Exception):
    def __init__(self, messages: Sequence[str]):
        super().__init__("; ".join(messages))
        self.messages = list(messages)


# -- schedules and parsing -------------------------------------------------


def parse_number(text: str) -> float:
    try:
        return float(Fraction(text)) if "e" not in text.lower() else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def parse_schedule(text) -> list[float]:
    """Explicit list ``"1,2,4"``, ellipsis form ``"128,256,...,16384"`` or ``"geom:start:stop:factor"``."""
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    text = str(text).strip()
    if text.startswith("geom:"):
        parts = text.split(":")[1:]
        if len(parts) != 3:
            raise ConfigError(f"geometric schedule needs start:stop:factor, got {text!r}")
        start, stop, factor = map(parse_number, parts)
        return _geometric(start, stop, factor)
    items = [s.strip() for s in text.split(",") if s.strip()]
    if "..." in items:
        k = items.index("...")
        if k < 2 or k != len(items) - 2:
            raise ConfigError(f"ellipsis schedule must look like a,b,...,z: {text!r}")
        head = [parse_number(s) for s in items[:k]]
        stop = parse_number(items[-1])
        factor = head[1] / head[0]
        out = _geometric(head[0], stop, factor)
        if any(not math.isclose(a, b) for a, b in zip(head, out)):
            raise ConfigError(f"leading terms of {text!r} are not geometric")
        return out
    return [parse_number(s) for s in items]


def _geometric(start: float, stop: float, factor: float) -> list[float]:
    if start <= 0 or factor <= 1 or stop < start:
        raise ConfigError("geometric schedule needs 0 < start <= stop and factor > 1")
    out, x, k = [], start, 0
    while x <= stop * (1 + 1e-12):
        out.append(x)
        k += 1
        x = start * factor**k
    if not math.isclose(out[-1], stop, rel_tol=1e-9):
        raise ConfigError(f"stop {stop} is not reached exactly by the progression")
    return [float(round(v)) if math.isclose(v, round(v), rel_tol=1e-12) else v for v in out]


def parse_poly_coeffs(text: str):
    """``"1,-3,2"`` (highest degree first) or an expression in x."""
    from .exact import RatPolynomial

    if "x" in text:
        return RatPolynomial.parse(text)
    try:
        coeffs = [Fraction(s.strip()) for s in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad coefficient list {text!r}") from exc
    return RatPolynomial(list(reversed(coeffs)))


def split_factors(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [s.strip() for s in out if s.strip()]


def parse_omega(text: str) -> Callable[[float], float]:
    from .polytope import loglog_schedule

    if text == "loglog":
        return loglog_schedule
    if text.startswith("const:"):
        c = parse_number(text[6:])
        return lambda i: c
    raise ConfigError(f"unknown omega schedule {text!r} (use loglog or const:<value>)")


def fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(rows: Sequence[Sequence], header: Sequence[str], out: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    _emit(buf.getvalue(), out)


def write_json(data, out: str | None) -> None:
    _emit(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n", out)


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _pool_map(fn, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _gate(args, failures: list[str]) -> None:
    if args.check and failures:
        raise GateFailure(failures)


def _need_seed(args) -> int:
    if args.seed is None:
        raise ConfigError("--seed is mandatory for stochastic runs")
    return args.seed


# -- commands ---------------------------------------------------------------


def cmd_torus_build(args) -> None:
    from .exact import RatPolynomial, verify_factorization
    from .torus import build_torus

    factors = [RatPolynomial.parse(s) for s in split_factors(args.factors)]
    p = factors[0]
    for f in factors[1:]:
        p = p * f
    rep = verify_factorization(p, factors)
    spec = build_torus(rep, precision=args.precision)
    write_json({"factorization": rep.to_json(), "torus": spec.to_json()}, args.out)


def cmd_polytope_volume(args) -> None:
    from .polytope import build_omega, family, inscribed_radius, volume
    from .torus import split_torus

    if args.family:
        spec, f = family(args.family)
        B = f(args.index)
    else:
        spec = split_torus(args.split)
        B = np.eye(spec.N, dtype=int).tolist()
    P = build_omega(spec, B, args.eps)
    seed = _need_seed(args) if args.method == "montecarlo" else (args.seed or 0)
    vol, se = volume(P, args.method, n=args.samples, seed=seed, partitions=args.partitions)
    write_csv([(P.dim, args.method, vol, se, inscribed_radius(P))], ["dim", "method", "volume", "stderr", "inscribed_radius"], args.out)


def _ratio_row(job):
    name, i, eps, omega = job
    from .polytope import family, shrink_ratio_series

    spec, f = family(name)
    return shrink_ratio_series(spec, [(i, f(i))], eps, parse_omega(omega))[0]


def cmd_polytope_ratio(args) -> None:
    indices = parse_schedule(args.indices) if args.indices else _geometric(args.imin, args.imax, 10.0)
    parse_omega(args.omega)
    rows = _pool_map(_ratio_row, [(args.family, i, args.eps, args.omega) for i in indices], args.workers)
    write_csv(
        [(r.i, r.vol, r.vol_shrunk, r.ratio, r.cheb_radius) for r in rows],
        ["i", "volume", "volume_shrunk", "ratio", "inscribed_radius"],
        args.out,
    )
    fails = []
    if rows[-1].ratio < 0.9:
        fails.append(f"final ratio {rows[-1].ratio:.4f} < 0.9")
    if len(rows) > 1 and rows[-1].ratio <= rows[0].ratio:
        fails.append("final ratio does not exceed the first")
    if any(b.cheb_radius <= a.cheb_radius for a, b in zip(rows, rows[1:])):
        fails.append("inscribed radius is not strictly increasing")
    _gate(args, fails)


def _parse_edges(text: str, n: int) -> list[tuple[int, int]]:
    edges = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        try:
            a, b = (int(v) - 1 for v in item.split("-"))
        except ValueError as exc:
            raise ConfigError(f"edge {item!r} is not of the form i-j") from exc
        edges.append((a, b))
    return edges


def cmd_graph_analyze(args) -> None:
    from .graph import (
        DivergenceGraph,
        build_graph,
        classify_blocks,
        enumerate_uds,
        is_connected,
        uds_weights,
    )
    from .polytope import family

    out: dict = {}
    if args.family:
        spec, f = family(args.family)
        idx = parse_schedule(args.indices)
        pattern = classify_blocks(lambda i: np.array(f(i), dtype=float), idx, spec)
        g = build_graph(pattern)
        out["exponents"] = {f"{a + 1}-{b + 1}": None if math.isnan(e) else e for (a, b), e in sorted(pattern.exponents.items())}
    else:
        if args.n is None:
            raise ConfigError("give --family or --n with --edges")
        g = DivergenceGraph.from_edges(args.n, _parse_edges(args.edges or "", args.n))
    out["graph"] = g.to_json()
    out["connected"] = is_connected(g)
    out["uds"] = [[g.vertices[v] for v in sorted(s)] for s in enumerate_uds(g)]
    out["weights"] = [str(x) for x in uds_weights(g)] if out["connected"] else None
    write_json(out, args.out)
    _gate(args, [] if out["connected"] else ["divergence graph is disconnected"])


def _equidist_row(job):
    from .orbits import equidist_run

    index, eps, n, seed, r, delta, partitions = job
    return equidist_run(index, eps, n, seed, r, delta, partitions)


def cmd_equidist_run(args) -> None:
    seed = _need_seed(args)
    indices = parse_schedule(args.indices)
    jobs = [(i, args.eps, args.samples, seed, args.radius, args.delta, args.partitions) for i in indices]
    rows = _pool_map(_equidist_row, jobs, args.workers)
    write_csv(
        [(r.index, r.samples, r.systole_fraction, r.siegel_mean, r.siegel_stderr, r.ball_volume) for r in rows],
        ["index", "samples", "systole_fraction", "siegel_mean", "siegel_stderr", "ball_volume"],
        args.out,
    )
    last = rows[-1]
    fails = []
    if last.systole_fraction > 0.05:
        fails.append(f"systole fraction {last.systole_fraction:.4f} > 0.05")
    if last.relative_error > 0.1:
        fails.append(f"Siegel mean {last.siegel_mean:.3f} is {100 * last.relative_error:.1f}% off {last.ball_volume:.4f}")
    _gate(args, fails)


def cmd_count_run(args) -> None:
    from .counting import CountSpec, count, fit_asymptotics

    p = parse_poly_coeffs(args.poly)
    spec = CountSpec(p.degree, p, tuple(parse_schedule(args.radii)))
    rep = count(spec)
    write_csv(rep.rows(), ["R", "count", "normalized", "doubling_log_ratio"], args.out)
    fails = []
    if args.check:
        fit = fit_asymptotics(rep)
        tail = fit.doubling_log_ratios[-3:]
        if any(not abs(x - spec.alpha) <= 0.15 for x in tail):
            fails.append(f"doubling log-ratios {tail} not within 0.15 of {spec.alpha}")
        limit = 1.2 if spec.beta == 0 else 1.25
        if fit.plateau > limit:
            fails.append(f"plateau statistic {fit.plateau:.4f} > {limit}")
    _gate(args, fails)


def cmd_examples_verify(args) -> None:
    from .orbits import example_suite

    indices = [10**k for k in range(1, int(round(math.log10(args.imax))) + 1)]
    rep = example_suite(args.name, indices)
    write_json(rep.to_json(), args.out)
    _gate(args, [] if rep.ok else [f"example {args.name} failed"])


def cmd_resscalars_check(args) -> None:
    from .exact import NumberField, RatPolynomial
    from .resscalars import (
        GeometricEmbedding,
        covolume_decrease_margin,
        equivariance_check,
        random_integral,
        random_sl,
    )

    seed = _need_seed(args)
    emb = GeometricEmbedding(NumberField(RatPolynomial.parse(args.field), args.precision))
    rng = np.random.default_rng(seed)
    eq_fail = 0
    for _ in range(args.cases):
        g = random_sl(args.N, emb, rng)
        a = int(rng.integers(1, args.N + 1))
        vs = [[random_integral(emb, rng) for _ in range(args.N)] for _ in range(a)]
        try:
            ok = equivariance_check(g, vs, emb)
        except ValueError:
            continue  # dependent vectors give the zero wedge on both sides
        eq_fail += not ok
    worst, violations, done = 0.0, 0, 0
    while done < args.margin_cases:
        v = [random_integral(emb, rng) for _ in range(args.N)]
        if not any(any(x) for x in v):
            continue
        m = covolume_decrease_margin(v, emb)
        worst = max(worst, m.ratio / m.bound)
        violations += not m.within
        done += 1
    write_json(
        {
            "field": args.field,
            "N": args.N,
            "m0": emb.m0,
            "kappa": emb.kappa,
            "equivariance_cases": args.cases,
            "equivariance_failures": eq_fail,
            "margin_cases": args.margin_cases,
            "margin_violations": violations,
            "worst_ratio_over_bound": worst,
        },
        args.out,
    )
    _gate(args, [f"{eq_fail} equivariance failures"] * bool(eq_fail) + [f"{violations} margin violations"] * bool(violations))


# -- parser -------------------------------------------------------------------


def _global_parent(suppress: bool) -> argparse.ArgumentParser:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d(None), help="RNG seed (mandatory for stochastic runs)")
    p.add_argument("--precision", type=int, default=d(30), help="decimal digits for numeric roots")
    p.add_argument("--workers", type=int, default=d(1), help="process count; never changes results")
    p.add_argument("--out", default=d(None), help="output file (stdout if omitted)")
    p.add_argument("--check", action="store_true", default=d(False), help="exit 4 when an acceptance gate fails")
    p.add_argument("--config", default=d(None), help="TOML or JSON file with option values")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toruslab", description=__doc__.splitlines()[0], parents=[_global_parent(False)])
    sub_parent = _global_parent(True)
    groups = parser.add_subparsers(dest="group", required=True)

    def leaf(group, name, func, help_):
        p = group.add_parser(name, parents=[sub_parent], help=help_)
        p.set_defaults(func=func, required=())
        return p

    torus = groups.add_parser("torus", help="torus construction").add_subparsers(dest="action", required=True)
    p = leaf(torus, "build", cmd_torus_build, "build a torus from a factorization")
    p.add_argument("--factors", help='e.g. "(x-1)(x-2),(x^2-2)" (required)')
    p.set_defaults(required=("factors",))

    poly = groups.add_parser("polytope", help="polytopes of non-divergence").add_subparsers(dest="action", required=True)
    p = leaf(poly, "volume", cmd_polytope_volume, "volume of Omega_{B,eps}")
    p.add_argument("--split", type=int, default=3, help="split torus dimension N (B = identity)")
    p.add_argument("--family", default=None)
    p.add_argument("--index", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=math.exp(-1))
    p.add_argument("--method", choices=["auto", "exact", "montecarlo"], default="auto")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--partitions", type=int, default=8)
    p = leaf(poly, "ratio", cmd_polytope_ratio, "shrink-ratio series along a family")
    p.add_argument("--family", default="sl3-u")
    p.add_argument("--omega", default="loglog")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--imin", type=float, default=1e3)
    p.add_argument("--imax", type=float, default=1e8)
    p.add_argument("--indices", default=None, help="explicit schedule overriding imin/imax")

    graph = groups.add_parser("graph", help="divergence graphs").add_subparsers(dest="action", required=True)
    p = leaf(graph, "analyze", cmd_graph_analyze, "graph, UDS sets and weights")
    p.add_argument("--family", default=None)
    p.add_argument("--indices", default="1e9,1e10,1e11,1e12,1e13")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--edges", default=None, help='e.g. "1-2,2-3"')

    eq = groups.add_parser("equidist", help="Example 1 orbit statistics").add_subparsers(dest="action", required=True)
    p = leaf(eq, "run", cmd_equidist_run, "systole fraction and Siegel mean")
    p.add_argument("--indices", default="10000")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=10**4)
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--partitions", type=int, default=1)

    cnt = groups.add_parser("count", help="characteristic-polynomial census").add_subparsers(dest="action", required=True)
    p = leaf(cnt, "run", cmd_count_run, "exact counts in norm balls")
    p.add_argument("--poly", help='coefficients, highest degree first, e.g. "1,-3,2"')
    p.add_argument("--radii", help='e.g. "128,256,...,16384" (required)')
    p.set_defaults(required=("poly", "radii"))

    ex = groups.add_parser("examples", help="worked examples").add_subparsers(dest="action", required=True)
    p = leaf(ex, "verify", cmd_examples_verify, "exact conjugation checks")
    p.add_argument("name", choices=["ex1", "ex2", "ex3"])
    p.add_argument("--imax", type=float, default=1e6)

    rs = groups.add_parser("resscalars", help="restriction of scalars").add_subparsers(dest="action", required=True)
    p = leaf(rs, "check", cmd_resscalars_check, "equivariance and covolume-margin checks")
    p.add_argument("--field", default="x^2-2")
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--margin-cases", type=int, default=1000)
    return parser


def load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{path}: file not found")
    try:
        if p.suffix == ".json":
            data = json.loads(p.read_text())
        else:
            with p.open("rb") as fh:
                data = tomli.load(fh)
    except (json.JSONDecodeError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a table")
    return {k.replace("-", "_"): v for k, v in data.items()}


def main(argv: Sequence[str] | None = None) -> int:
    from .exact import EmbeddingError
    from .polytope import EmptyPolytopeError, UnboundedPolytopeError

    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INVALID
    for k, v in (("seed", None), ("precision", 30), ("workers", 1), ("out", None), ("check", False), ("config", None)):
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        if args.config:
            args = _config_args(parser, argv, args)
        missing = [k for k in args.required if getattr(args, k, None) is None]
        if missing:
            raise ConfigError("missing required options: " + ", ".join("--" + k.replace("_", "-") for k in missing))
        args.func(args)
    except GateFailure as exc:
        for m in exc.messages:
            print(f"gate failed: {m}", file=sys.stderr)
        return EXIT_GATE
    except (EmbeddingError, EmptyPolytopeError, UnboundedPolytopeError, ArithmeticError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError) as exc:
        where = f" (config {args.config})" if getattr(args, "config", None) else ""
        print(f"invalid input{where}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _config_args(parser: argparse.ArgumentParser, argv: list[str], args: argparse.Namespace) -> argparse.Namespace:
    cfg = load_config(args.config)
    bad = sorted(k for k in cfg if not hasattr(args, k) or k in ("func", "required", "group", "action"))
    if bad:
        raise ConfigError(f"{args.config}: unknown keys {bad}")
    explicit = {k for k in vars(args) if _given(argv, k)}
    for k, v in cfg.items():
        if k not in explicit:
            setattr(args, k, v)
    return args


def _given(argv: Sequence[str], key: str) -> bool:
    flag = "--" + key.replace("_", "-")
    return any(a == flag or a.startswith(flag + "=") for a in argv)


if __name__ == "__main__":
    sys.exit(main())

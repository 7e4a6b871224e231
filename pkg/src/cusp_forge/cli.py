"""Command-line front end: ``cusp-forge <subcommand> --field D --modulus I ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
from dataclasses import asdict, dataclass, fields

from .const_terms import (ParityError, build_B, diamond_act_const, ones_vector)
from .cusps import (cusp_data, diamond_act, enumerate_cusps, enumerate_cusps_by_points,
                    enumerate_p_unramified_cusps, enumerate_unramified_cusps, is_admissible, level_context,
                    orbits, stabilizer, unramified_count_oracle)
from .field import field, format_element
from .groups import class_number, prime_ideals, ray_class_group
from .hecke import compatible_characters, is_admissible_weight
from .ideals import InvalidIdeal, Lattice2, format_ideal, normalizing_ideal, parse_ideal
from .rigidity import level_report

SCHEMA = "cusp-forge/1"
EXIT_INVALID_IDEAL = 2
EXIT_PARITY = 3
EXIT_ASSERTION = 4


@dataclass
class JobConfig:
    field: int
    modulus: str = "(1)"
    p: int | None = None
    weight: int = 2
    character: int | None = None
    trace_bound: int = 10
    format: str = "json"
    seed: int = 0
    narrow: bool = False
    trivial_psi: bool = False
    eps: int | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "JobConfig":
        data = json.loads(text)
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


# --- subcommands; each returns a JSON-ready dict

def _setup(cfg: JobConfig):
    F = field(cfg.field)
    n = parse_ideal(F, cfg.modulus)
    if not n.is_integral():
        raise InvalidIdeal("the modulus must be an integral ideal")
    return F, n


def cmd_field(cfg: JobConfig) -> dict:
    F = field(cfg.field)
    eps = F.fund_unit
    return {
        "D": F.D,
        "discriminant": F.disc,
        "omega": "(1+sqrt(D))/2" if F.D % 4 == 1 else "sqrt(D)",
        "fundamental_unit": format_element(eps),
        "unit_norm": int(eps.norm()),
        "class_number": class_number(F),
        "narrow_class_number": ray_class_group(F, parse_ideal(F, "(1)"), narrow=True).order,
    }


def cmd_classgroup(cfg: JobConfig) -> dict:
    F, n = _setup(cfg)
    G = ray_class_group(F, n, narrow=cfg.narrow)
    return {
        "modulus": format_ideal(n),
        "narrow": cfg.narrow,
        "invariant_factors": list(G.invariant_factors),
        "order": G.order,
        "generators": [format_ideal(I) for I in G.generators()],
    }


def cmd_hecke(cfg: JobConfig) -> dict:
    F, n = _setup(cfg)
    k = cfg.weight
    chars = compatible_characters(F, n, k)
    return {
        "modulus": format_ideal(n),
        "weight": k,
        "admissible": is_admissible_weight(F, n, k),
        "compatible_characters": [
            {"exponents": list(chi.j), "order": chi.order(), "trivial": chi.is_trivial()} for chi in chars],
    }


def _cusp_record(c, k: int) -> dict:
    s = c.label.split
    d = cusp_data(c.label)
    return {
        "key": _plain(c.key),
        "a": format_ideal(s.a),
        "b": format_ideal(s.b),
        "v_a": format_element(s.va),
        "v_b": format_element(s.vb),
        "sigma": list(s.tau),
        "unramified": c.label.is_unramified(),
        "admissible": is_admissible(c.label, k),
        "uc_index": d.uc_index,
        "stabilizer_order": len(stabilizer(c)),
    }


def _plain(x):
    if isinstance(x, (tuple, list)):
        return [_plain(y) for y in x]
    return x


def cmd_cusps(cfg: JobConfig) -> dict:
    F, n = _setup(cfg)
    ctx = level_context(F, n)
    cusps = enumerate_p_unramified_cusps(ctx, cfg.p)
    return {
        "modulus": format_ideal(n),
        "p": cfg.p,
        "count": len(cusps),
        "cusps": [_cusp_record(c, cfg.weight) for c in cusps],
        "orbits": [_plain(o) for o in orbits(cusps)] if cfg.p is None or len(cusps) else [],
    }


def cmd_constant_term(cfg: JobConfig) -> dict:
    F, n = _setup(cfg)
    if cfg.p is None:
        raise ValueError("constant-term needs --p")
    ctx = level_context(F, n)
    k = cfg.weight
    eps = cfg.eps if cfg.eps is not None else (-1) ** k
    B = build_B(ctx, cfg.p, k, eps, rng=random.Random(cfg.seed))
    R = B.ring
    if cfg.trivial_psi:
        idx = next(i for i, chi in enumerate(R.chars) if chi.is_trivial()) if eps == 1 else None
        if idx is None:
            raise ParityError("the trivial character has parity +1")
    elif cfg.character is not None:
        chars = ctx.Gn.characters()
        if not 0 <= cfg.character < len(chars):
            raise ValueError("character index out of range")
        chi = chars[cfg.character]
        if chi not in R.chars:
            raise ParityError("sgn(psi) must equal (-1)^k")
        idx = R.chars.index(chi)
    else:
        idx = None
    v = B.vector
    rows = []
    for key in v.keys():
        entry = v.entries[key]
        vals = [entry[idx]] if idx is not None else list(entry)
        rows.append({"cusp": _plain(key), "entry": [str(x) for x in vals]})
    return {
        "modulus": format_ideal(n),
        "p": cfg.p,
        "weight": k,
        "characters": [list(chi.j) for chi in R.chars] if idx is None else [list(R.chars[idx].j)],
        "entries": rows,
    }


def cmd_rigidity(cfg: JobConfig) -> dict:
    F, n = _setup(cfg)
    return level_report(F, n, cfg.p).to_json()


# --- the invariant suite

def _coprime_primes(ctx, count: int):
    """The first few prime ideals prime to the level."""
    norm_n = int(ctx.n.norm())
    out = []
    for P in prime_ideals(ctx.F):
        if math.gcd(int(P.norm()), norm_n) == 1:
            out.append(P)
            if len(out) == count:
                break
    return out


def _default_prime(n) -> int:
    q = 3
    while int(n.norm()) % q == 0:
        q += 2
        while any(q % r == 0 for r in range(3, int(q ** 0.5) + 1, 2)):
            q += 2
    return q


def _suite(cfg: JobConfig) -> list[tuple[str, bool, str]]:
    F, n = _setup(cfg)
    ctx = level_context(F, n)
    rng = random.Random(cfg.seed)
    out = []

    def record(name, fn):
        try:
            detail = fn()
            out.append((name, True, detail or ""))
        except AssertionError as exc:
            out.append((name, False, str(exc)))

    def enumeration():
        full = enumerate_cusps(ctx)
        pts = enumerate_cusps_by_points(ctx, 2)
        keys = {c.key for c in full}
        assert {c.key for c in pts} <= keys, "point search found an unknown cusp"
        unr = enumerate_unramified_cusps(ctx)
        assert len(unr) == unramified_count_oracle(ctx), "unramified count mismatch"
        assert len(unr) == sum(c.label.is_unramified() for c in full), "unramified filter mismatch"
        return f"{len(full)} cusps, {len(unr)} unramified"

    def diamond():
        full = enumerate_cusps(ctx)
        Ps = _coprime_primes(ctx, 6)
        for _ in range(10):
            c = rng.choice(full)
            N1, N2 = rng.choice(Ps), rng.choice(Ps)
            lhs = diamond_act(N1 * N2, c.label).key
            rhs = diamond_act(N1, diamond_act(N2, c.label)).key
            assert lhs == rhs, "diamond composition fails"
            assert diamond_act(ctx.O, c.label).key == c.key, "identity acts nontrivially"
            a = ctx.Gn.element_with(F.one + ctx.ring.m * F(rng.randint(-3, 3), rng.randint(-3, 3)))
            assert diamond_act(ctx.O * a, c.label).key == c.key, "principal class acts nontrivially"
        return "10 random cases"

    def auxiliary():
        p = cfg.p or _default_prime(n)
        done = []
        for k in (1, 2):
            if not is_admissible_weight(F, n, k):
                continue
            build_B(ctx, p, k, (-1) ** k, rng=rng)
            done.append(k)
        return f"p={p}, weights {done}"

    def ones():
        v = ones_vector(ctx, 2)
        for N in _coprime_primes(ctx, 4):
            assert diamond_act_const(N, v) == v, "f_k is not invariant"
        return ""

    def normalizing():
        reps = list(ctx.class_reps)
        for _ in range(10):
            a_id, b_id = rng.choice(reps), rng.choice(reps)
            while True:
                g = [[F(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(2)] for _ in range(2)]
                det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
                if det and det.is_totally_positive():
                    break
            _, I = normalizing_ideal(a_id, b_id, g)
            direct = Lattice2.direct_sum(b_id, a_id).transform(g).intersect_line((F.zero, F.one))
            assert I == direct, "normalizing ideal mismatch"
        return "10 random g"

    record("cusp enumeration", enumeration)
    record("diamond action laws", diamond)
    record("auxiliary vector B", auxiliary)
    record("f_k invariance", ones)
    record("normalizing ideal", normalizing)
    return out


def cmd_check(cfg: JobConfig) -> dict:
    results = _suite(cfg)
    return {
        "seed": cfg.seed,
        "checks": [{"name": a, "passed": b, "detail": c} for a, b, c in results],
        "passed": all(b for _, b, _ in results),
    }


COMMANDS = {
    "field": cmd_field,
    "classgroup": cmd_classgroup,
    "hecke": cmd_hecke,
    "cusps": cmd_cusps,
    "constant-term": cmd_constant_term,
    "rigidity": cmd_rigidity,
    "check": cmd_check,
}


# --- output

def _rows(result: dict) -> tuple[list[str], list[list]]:
    """Flatten the main list of a result into CSV rows."""
    for name in ("cusps", "entries", "checks", "compatible_characters"):
        if isinstance(result.get(name), list):
            items = result[name]
            header = sorted({k for it in items for k in it}) if items else []
            return header, [[_cell(it.get(h)) for h in header] for it in items]
    return ["key", "value"], [[k, _cell(v)] for k, v in sorted(result.items())]


def _cell(x) -> str:
    return x if isinstance(x, str) else json.dumps(x, sort_keys=True)


def render(result: dict, fmt: str) -> str:
    if fmt == "csv":
        header, rows = _rows(result)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    return json.dumps({"schema": SCHEMA, **result}, sort_keys=True, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cusp-forge",
                                     description="Cusps and constant terms of Hilbert modular varieties over real quadratic fields.")
    sub = parser.add_subparsers(dest="command", required=True)
    env_seed = int(os.environ.get("CUSP_FORGE_SEED", "0"))
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--field", type=int, required=True, help="squarefree D > 1")
        sp.add_argument("--modulus", default="(1)", help='level ideal, e.g. "(3)", "(7, 3+w)", "hnf:[[7,3],[0,1]]"')
        sp.add_argument("--p", type=int, default=None)
        sp.add_argument("--weight", type=int, default=2)
        sp.add_argument("--character", type=int, default=None, help="index into the characters of G^+_n")
        sp.add_argument("--trivial-psi", action="store_true")
        sp.add_argument("--eps", type=int, choices=(1, -1), default=None, help="parity of the characters")
        sp.add_argument("--trace-bound", type=int, default=10)
        sp.add_argument("--narrow", action="store_true")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=env_seed)
    return parser


def config_from_args(args: argparse.Namespace) -> JobConfig:
    return JobConfig(field=args.field, modulus=args.modulus, p=args.p, weight=args.weight,
                     character=args.character, trace_bound=args.trace_bound, format=args.format,
                     seed=args.seed, narrow=args.narrow, trivial_psi=args.trivial_psi, eps=args.eps)


def run(command: str, cfg: JobConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        result = COMMANDS[command](cfg)
    except InvalidIdeal as exc:
        print(f"error: invalid ideal: {exc}", file=sys.stderr)
        return EXIT_INVALID_IDEAL
    except ParityError as exc:
        print(f"error: parity mismatch: {exc}", file=sys.stderr)
        return EXIT_PARITY
    except AssertionError as exc:
        print(f"error: internal check failed: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out.write(render(result, cfg.format))
    if command == "check" and not result["passed"]:
        return EXIT_ASSERTION
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())

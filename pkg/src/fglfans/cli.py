"""Command-line front end: ranks, bases, descent checks, resolutions, self-test.

Exit codes: 0 success, 2 bad input, 3 bad configuration (degree above the
truncation), 4 an internal invariant failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .descent import (DescentSquare, RouteMismatchError, check_cartesian, compute_via_resolution,
                      identity_subdivision)
from .fan import STRATEGIES, Fan, FanError, is_smooth, resolve, star_subdivision, validate_fan
from .fgl import GradedRing
from .intlin import rank_q
from .lazard import build_lazard
from .oracles import compare_with_additive_specialization, multiplicative_restriction_defects
from .pps import Domain, global_sections, is_global_section, pullback_subdivision, restriction_chain_defect

SCHEMA_VERSION = 1
COEFFS = ("universal", "additive", "multiplicative")
QUASIPROJECTIVE_WARNING = "warning: results assume the fan is quasi-projective; this is not checked"

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class JobConfig:
    fan_path: str | None
    command: str
    degrees: tuple[int, ...]
    trunc: int = 3
    coeff: str = "universal"
    fmt: str = "table"

    def check(self):
        if self.trunc < 0:
            raise CliError(EXIT_CONFIG, "truncation must be non-negative")
        if self.degrees and max(self.degrees) > self.trunc:
            raise CliError(EXIT_CONFIG, f"degree {max(self.degrees)} exceeds truncation D = {self.trunc}")


def parse_degrees(text: str) -> tuple[int, ...]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise CliError(EXIT_INPUT, f"bad degree range {text!r} (expected a..b)") from None
    if hi < lo:
        raise CliError(EXIT_INPUT, f"empty degree range {text!r}")
    return tuple(range(lo, hi + 1))


def make_ring(coeff: str, trunc: int) -> GradedRing:
    if coeff == "universal":
        return build_lazard(trunc)
    if coeff == "additive":
        return GradedRing.additive(trunc)
    if coeff == "multiplicative":
        return GradedRing.multiplicative(trunc)
    raise CliError(EXIT_INPUT, f"unknown coefficient mode {coeff!r}")


def corpus_dir() -> Path:
    return Path(str(resources.files("fglfans") / "corpus"))


def corpus_names(directory: Path | None = None) -> list[str]:
    d = directory or corpus_dir()
    return sorted(p.stem for p in d.glob("*.json") if not p.stem.endswith(".expected"))


def load_fan(path: str) -> Fan:
    p = Path(path)
    if not p.exists() and (corpus_dir() / f"{path}.json").exists():
        p = corpus_dir() / f"{path}.json"
    try:
        f = Fan.load(p)
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, f"no such fan file: {path}") from None
    except (FanError, ValueError) as exc:
        raise CliError(EXIT_INPUT, f"invalid fan {path}: {exc}") from None
    report = validate_fan(f)
    if not report.ok:
        raise CliError(EXIT_INPUT, "invalid fan:\n" + "\n".join(f"  {v}" for v in report.violations))
    return f


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("FGLFANS_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, args: list) -> list:
    """Run ``fn`` over ``args``, in worker processes if allowed; results keep input order."""
    n = min(thread_cap(), len(args))
    if n <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, *zip(*args)))


# -- output helpers --------------------------------------------------------------

def _dump_json(obj) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **obj}, sort_keys=True, indent=2)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _table(header, rows) -> str:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in cells)


def _emit(fmt, header, rows, payload) -> str:
    if fmt == "json":
        return _dump_json(payload)
    if fmt == "csv":
        return _csv(header, rows)
    return _table(header, rows)


# -- commands -------------------------------------------------------------------------

def _rank_job(fan_json: str, degree: int, trunc: int, coeff: str) -> int:
    return global_sections(Domain(Fan.from_json(fan_json)), degree, make_ring(coeff, trunc)).rank


def cmd_rank(cfg: JobConfig) -> str:
    cfg.check()
    f = load_fan(cfg.fan_path)
    ranks = _map(_rank_job, [(f.dumps(), d, cfg.trunc, cfg.coeff) for d in cfg.degrees])
    rows = [(d, r, 0) for d, r in zip(cfg.degrees, ranks)]
    payload = {"command": "rank", "fan": f.to_json(), "trunc": cfg.trunc, "coeff": cfg.coeff,
               "rows": [{"degree": d, "rank": r, "torsion": []} for d, r, _ in rows]}
    return _emit(cfg.fmt, ("degree", "rank", "torsion"), rows, payload)


def cmd_basis(cfg: JobConfig) -> str:
    cfg.check()
    f = load_fan(cfg.fan_path)
    ring = make_ring(cfg.coeff, cfg.trunc)
    modules = [global_sections(Domain(f), d, ring) for d in cfg.degrees]
    for mod in modules:
        for i, p in enumerate(mod.sections()):
            if not is_global_section(p):
                raise CliError(EXIT_INVARIANT, f"basis section {i} in degree {mod.degree} is not compatible")
    if cfg.fmt == "json":
        return _dump_json({"command": "basis", "fan": f.to_json(), "trunc": cfg.trunc, "coeff": cfg.coeff,
                           "degrees": [{"degree": m.degree, "rank": m.rank,
                                        "sections": [p.to_json() for p in m.sections()]} for m in modules]})
    if cfg.fmt == "csv":
        rows = []
        for m in modules:
            for i, p in enumerate(m.sections()):
                for key in p.domain.maximal:
                    for e, c in p.values[key].sorted_terms():
                        rows.append((m.degree, i, " ".join(map(str, key)), " ".join(map(str, e)),
                                     " ".join(map(str, c))))
        return _csv(("degree", "section", "cone", "exponent", "coefficient"), rows)
    out = []
    for m in modules:
        out.append(f"degree {m.degree}: rank {m.rank}")
        for i, p in enumerate(m.sections()):
            out.append(f"[{i}] " + str(p))
    return "\n".join(out)


def _parse_ray(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace("(", "").replace(")", "").split(","))
    except ValueError:
        raise CliError(EXIT_INPUT, f"bad ray {text!r} (expected comma-separated integers)") from None


def cmd_check_descent(cfg: JobConfig, ray: str | None) -> tuple[int, str]:
    cfg.check()
    f = load_fan(cfg.fan_path)
    ring = make_ring(cfg.coeff, cfg.trunc)
    if ray is None:
        sub = identity_subdivision(f)
    else:
        v = _parse_ray(ray)
        try:
            sub = star_subdivision(f, v)
        except FanError as exc:
            raise CliError(EXIT_INPUT, str(exc)) from None
    reports = [check_cartesian(DescentSquare(sub, ring, d)) for d in cfg.degrees]
    ok = all(r.cartesian for r in reports)
    rows = [(r.degree, r.ranks["delta"], r.ranks["delta_prime"], r.ranks["star_pi"], r.ranks["star_rho"],
             r.ranks["fiber_product"], r.commutes, r.injective, r.exact,
             "Cartesian" if r.cartesian else (r.witness or "failed")) for r in reports]
    payload = {"command": "check-descent", "fan": f.to_json(), "trunc": cfg.trunc, "coeff": cfg.coeff,
               "center": list(sub.center) if sub.center else None, "pi": list(sub.pi), "rho": list(sub.rho),
               "reports": [r.to_json() for r in reports], "ok": ok}
    header = ("degree", "PPS(D)", "PPS(D')", "PPS(St pi)", "PPS(St rho)", "fiber", "commutes",
              "injective", "exact", "verdict")
    return (EXIT_OK if ok else EXIT_INVARIANT), _emit(cfg.fmt, header, rows, payload)


def cmd_resolve(cfg: JobConfig, strategy: str) -> str:
    f = load_fan(cfg.fan_path)
    chain = resolve(f, strategy)
    final = chain[-1].source if chain else f
    smooth = final.is_smooth()
    if not smooth:
        raise CliError(EXIT_INVARIANT, "resolution ended in a singular fan")
    certificate = []
    for key in final.maximal:
        c = final.cone(key)
        certificate.append({"cone": list(key), "rays": [list(r) for r in c.rays], "multiplicity": c.multiplicity(),
                            "smooth": is_smooth(c)})
    steps = [{"step": i + 1, "center": list(m.center), "pi": [list(m.target.rays[k]) for k in m.pi],
              "maximal_cones": len(m.source.maximal)} for i, m in enumerate(chain)]
    if cfg.fmt == "json":
        return _dump_json({"command": "resolve", "strategy": strategy, "fan": f.to_json(), "steps": steps,
                           "resolved": final.to_json(), "smooth": smooth, "certificate": certificate})
    rows = [(s["step"], ",".join(map(str, s["center"])), " ".join("(" + ",".join(map(str, r)) + ")" for r in s["pi"]),
             s["maximal_cones"]) for s in steps]
    if cfg.fmt == "csv":
        return _csv(("step", "center", "cone", "maximal_cones"), rows)
    lines = [f"{len(chain)} star subdivision(s), strategy {strategy}"]
    if rows:
        lines.append(_table(("step", "center", "subdivided cone", "maximal cones"), rows))
    lines.append(f"resolved fan: {final.dumps()}")
    lines.append("smooth: every maximal cone has multiplicity 1 "
                 f"({', '.join(str(c['multiplicity']) for c in certificate)})")
    return "\n".join(lines)


# -- self-test ---------------------------------------------------------------------

EXTRA_SUBDIVISIONS = {"A2": [(1, 1)], "P2": [(1, 1)], "P1xP1": [(1, 1)]}


def _selftest_fan(name: str, f: Fan, trunc: int, fixture: dict | None) -> tuple[list[tuple[bool, str]], dict]:
    lines = []

    def record(ok, text):
        lines.append((bool(ok), text))

    univ = build_lazard(trunc)
    degrees = list(range(0, trunc + 1))
    ranks = {}
    for coeff in ("universal", "additive"):
        ring = make_ring(coeff, trunc)
        ranks[coeff] = {str(d): global_sections(Domain(f), d, ring).rank for d in degrees}
    if fixture is None:
        record(True, f"{name}: ranks {ranks['universal']} (no fixture)")
    elif fixture.get("trunc") != trunc:
        record(True, f"{name}: ranks {ranks['universal']} (fixture is for D={fixture.get('trunc')}, skipped)")
    else:
        for coeff in ("universal", "additive"):
            record(fixture[coeff] == ranks[coeff], f"{name}: {coeff} ranks {ranks[coeff]} match fixture")

    low = [d for d in degrees if d <= 3]
    cmp = compare_with_additive_specialization(f, low, trunc)
    record(cmp.ok, f"{name}: polynomial oracle ranks {cmp.pp_ranks} equal additive ranks {cmp.pps_ranks}")

    bad = []
    for skey in f.cones:
        sigma = f.cone(skey)
        for tkey in f.faces_of(skey):
            tau = f.cone(tkey)
            for rkey in f.faces_of(tkey):
                if restriction_chain_defect((sigma, tau, f.cone(rkey)), univ):
                    bad.append((skey, tkey, rkey))
    record(not bad, f"{name}: restriction maps compose on every cone chain")
    mult = multiplicative_restriction_defects(f, trunc)
    record(not mult, f"{name}: multiplicative restrictions match the closed form")

    route_degrees = [d for d in degrees if d <= 2]
    for strategy in STRATEGIES:
        agree, steps = True, 0
        for d in route_degrees:
            try:
                _, rep = compute_via_resolution(f, d, univ, strategy)
                steps = rep.steps
            except RouteMismatchError:
                agree = False
        record(agree, f"{name}: resolution route ({strategy}, {steps} steps) agrees with direct solver "
                      f"for d in {route_degrees}")

    subs = [(f"resolution step {i + 1}", m) for i, m in enumerate(resolve(f, "min"))]
    subs += [(f"blowup at {list(v)}", star_subdivision(f, v)) for v in EXTRA_SUBDIVISIONS.get(name, [])]
    for label, m in subs:
        cart = all(check_cartesian(DescentSquare(m, univ, d)).cartesian for d in route_degrees)
        record(cart, f"{name}: {label} gives Cartesian squares for d in {route_degrees}")
        inj = True
        for d in degrees:
            mod = global_sections(Domain(m.target), d, univ)
            images = [pullback_subdivision(m, p).to_vector() for p in mod.sections()]
            if images and rank_q(images) != mod.rank:
                inj = False
        record(inj, f"{name}: {label} pullback is injective for d in {degrees}")
    return lines, {"trunc": trunc, **ranks}


def cmd_selftest(trunc: int = 3, bless: bool = False, corpus: str | None = None) -> tuple[int, str]:
    directory = Path(corpus) if corpus else corpus_dir()
    names = corpus_names(directory)
    if not names:
        raise CliError(EXIT_INPUT, f"no fan files in {directory}")
    out, failed, invalid = [], 0, False
    out.append(f"selftest over {len(names)} fans, D = {trunc}")
    for name in names:
        try:
            f = load_fan(str(directory / f"{name}.json"))
        except CliError as exc:
            out.append(f"FAIL {name}: {exc}")
            failed += 1
            invalid = True
            continue
        fx_path = directory / f"{name}.expected.json"
        fixture = json.loads(fx_path.read_text()) if fx_path.exists() and not bless else None
        lines, ranks = _selftest_fan(name, f, trunc, fixture)
        for ok, text in lines:
            out.append(("PASS " if ok else "FAIL ") + text)
            failed += not ok
        if bless:
            fx_path.write_text(json.dumps(ranks, sort_keys=True, indent=2) + "\n")
            out.append(f"blessed {fx_path.name}")
    out.append(f"{'PASS' if not failed else 'FAIL'}: {failed} failing check(s)")
    code = EXIT_OK if not failed else (EXIT_INPUT if invalid else EXIT_INVARIANT)
    return code, "\n".join(out)


# -- entry point -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fglfans", description="Piecewise graded power series on toric fans.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, degrees=True, default_degrees="0..3"):
        sp.add_argument("--fan", required=True, help="fan JSON file (or the name of a bundled fan)")
        if degrees:
            sp.add_argument("--degrees", default=default_degrees, help="degree range a..b (default %(default)s)")
            sp.add_argument("--trunc", type=int, default=3, help="truncation D (default %(default)s)")
            sp.add_argument("--coeff", choices=COEFFS, default="universal")
        sp.add_argument("--format", choices=("table", "json", "csv"), default="table")

    common(sub.add_parser("rank", help="ranks of global sections per degree"))
    common(sub.add_parser("basis", help="bases of global sections"), default_degrees="0..0")
    cd = sub.add_parser("check-descent", help="Cartesian-square check for one star subdivision")
    common(cd, default_degrees="0..2")
    cd.add_argument("--ray", help="center of the subdivision, e.g. 1,1 (omit for the trivial subdivision)")
    rs = sub.add_parser("resolve", help="resolve singularities by star subdivisions")
    common(rs, degrees=False)
    rs.add_argument("--strategy", choices=STRATEGIES, default="min")
    st = sub.add_parser("selftest", help="run all consistency checks on the bundled corpus")
    st.add_argument("--trunc", type=int, default=3)
    st.add_argument("--bless", action="store_true", help="rewrite the expected-rank fixtures")
    st.add_argument("--corpus", help="directory of fan files (default: bundled corpus)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            if args.trunc < 0:
                raise CliError(EXIT_CONFIG, "truncation must be non-negative")
            code, text = cmd_selftest(args.trunc, args.bless, args.corpus)
        else:
            degrees = parse_degrees(args.degrees) if hasattr(args, "degrees") else ()
            cfg = JobConfig(args.fan, args.command, degrees, getattr(args, "trunc", 3),
                            getattr(args, "coeff", "universal"), args.format)
            if args.command != "resolve":
                print(QUASIPROJECTIVE_WARNING, file=sys.stderr)
            code = EXIT_OK
            if args.command == "rank":
                text = cmd_rank(cfg)
            elif args.command == "basis":
                text = cmd_basis(cfg)
            elif args.command == "check-descent":
                code, text = cmd_check_descent(cfg, args.ray)
            else:
                text = cmd_resolve(cfg, args.strategy)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except RouteMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end: ``bvhtt <command> problem.txt [options]``.

Every command prints a short report with one ``name: ok|FAIL`` line per
check and exits with status 0 exactly when all checks pass.  With
``--format document`` the main result is printed as a problem document
instead (``transfer`` and ``transfer-unimodular`` only).
"""
from __future__ import annotations

import argparse
import random
import sys

from .document import DocumentError, ProblemDocument, parse_problem, serialize
from .doubling import (
    double_even, double_odd, double_odd_quantum, even_double, even_double_structure,
    halve_even, halve_odd, halve_odd_quantum, odd_double, strictly_unimodular_double,
)
from .feynman import (
    check_bv_stokes, check_graph_sum, minimal_model_linf, minimal_model_unimodular,
    wick_integral,
)
from .graded import EVEN, ODD, Poly, format_poly
from .htt import brute_force_mc, htt_transfer
from .random_instances import random_poly
from .sdr import (
    compute_homology_sdr, induced_double_sdr, lagrangian_data, check_lagrangian, verify_sdr,
)
from .structures import (
    LinfStructure, McReport, StructureError, check_mc_linf, check_mc_unimodular, check_qme,
    to_multilinear,
)

COMMANDS = ("validate", "transfer", "transfer-unimodular", "double", "halve", "compare",
            "wick-check", "stokes-check")
DEFAULT_SEED = 0


class Report:
    def __init__(self, title: str):
        self.title = title
        self.lines: list[str] = []
        self.ok = True

    def check(self, name: str, passed: bool, detail: str = ""):
        self.ok &= bool(passed)
        self.lines.append(f"{name}: {'ok' if passed else 'FAIL'}" + (f" ({detail})" if detail else ""))

    def add_report(self, prefix: str, rep: McReport):
        for k in rep.residuals:
            self.check(f"{prefix} {k}", k not in rep.failures())

    def note(self, text: str):
        self.lines.append(text)

    def render(self) -> str:
        return "\n".join([f"# {self.title}"] + self.lines + [f"status: {'ok' if self.ok else 'FAIL'}"]) + "\n"


def _with_overrides(doc: ProblemDocument, args) -> ProblemDocument:
    opts = dict(doc.options)
    if args.cutoff is not None:
        opts["cutoff"] = args.cutoff
    if args.hbar_order is not None:
        opts["hbar-order"] = args.hbar_order
    if args.seed is not None:
        opts["seed"] = args.seed
    if opts == doc.options:
        return doc
    n = opts.get("cutoff", doc.cutoff)
    if n < 2:
        raise ValueError("cutoff must be at least 2")
    m = doc.structure
    if m is not None:
        m = LinfStructure(m.space, m.deriv.with_order(n), n)
    f = doc.function.copy(n - 1) if doc.function is not None else None
    return ProblemDocument(doc.space, m, f, doc.sdr, opts)


def _sdr(doc: ProblemDocument):
    return doc.sdr if doc.sdr is not None else compute_homology_sdr(doc.space)


def _summary(rep: Report, fam):
    for n in sorted(fam.maps):
        rep.note(f"arity {n}: {sum(len(v) for v in fam.maps[n].values())} nonzero coefficients")


def cmd_validate(doc, args):
    rep = Report("validate")
    m = doc.linf()
    rep.add_report("mc", check_mc_linf(m))
    rep.add_report("jacobi", brute_force_mc(to_multilinear(m)))
    if doc.function is not None:
        rep.add_report("unimodular", check_mc_unimodular(doc.unimodular()))
    if doc.sdr is not None:
        rep.add_report("sdr", verify_sdr(doc.sdr))
    return rep, None


def cmd_transfer(doc, args):
    if doc.options.get("hbar-order", 0) == 1:
        return cmd_transfer_unimodular(doc, args)
    rep = Report("transfer")
    m = doc.linf()
    sdr = _sdr(doc)
    rep.add_report("input mc", check_mc_linf(m))
    if not rep.ok:
        return rep, None
    rep.add_report("sdr", verify_sdr(sdr))
    t2 = minimal_model_linf(m, sdr, validate=False)
    rep.add_report("output mc", check_mc_linf(t2))
    oracle = htt_transfer(to_multilinear(m), sdr, validate=False)
    rep.check("agrees with tree formula", to_multilinear(t2) == oracle)
    _summary(rep, to_multilinear(t2))
    out = ProblemDocument(sdr.small, t2, None, None, {"cutoff": m.cutoff})
    return rep, out


def cmd_transfer_unimodular(doc, args):
    rep = Report("transfer-unimodular")
    u = doc.unimodular()
    sdr = _sdr(doc)
    rep.add_report("input", check_mc_unimodular(u))
    if not rep.ok:
        return rep, None
    t1 = minimal_model_unimodular(u, sdr, validate=False)
    rep.add_report("output", check_mc_unimodular(t1))
    rep.check("L-infinity part agrees with transfer", t1.linf == minimal_model_linf(u.linf, sdr, False))
    rep.check("agrees with tree formula",
              to_multilinear(t1.linf) == htt_transfer(to_multilinear(u.linf), sdr, validate=False))
    rep.note("f = " + format_poly(t1.function))
    out = ProblemDocument(sdr.small, t1.linf, t1.function, None, {"cutoff": u.cutoff, "hbar-order": 1})
    return rep, out


def cmd_double(doc, args):
    rep = Report("double")
    m = doc.linf()
    e = even_double(m.space)
    me = even_double_structure(m, e)
    rep.note("D_ev(m) = " + format_poly(double_even(m.deriv, e)))
    rep.add_report("even double mc", check_mc_linf(me))
    rep.add_report("even double unimodular", check_mc_unimodular(strictly_unimodular_double(m, e)))
    q = double_odd_quantum(doc.unimodular()) if doc.function is not None else None
    if q is not None:
        rep.note("D_od,q(m, f) = " + " + ".join(f"hbar^{g} ({format_poly(c)})" for g, c in enumerate(q.coeffs)))
        rep.add_report("qme", check_qme(q))
    qe = double_odd_quantum(strictly_unimodular_double(m, e))
    rep.add_report("qme of even double", check_qme(qe))
    return rep, None


def cmd_halve(doc, args):
    rep = Report("halve")
    m = doc.linf()
    e, o = even_double(m.space), odd_double(m.space)
    rep.check("H_ev D_ev = id", halve_even(double_even(m.deriv, e), e, ODD) == m.deriv)
    rep.check("H_od D_od = id", halve_odd(double_odd(m.deriv, o), o, ODD, strict=True) == m.deriv)
    if doc.function is not None:
        u = doc.unimodular()
        rep.check("H_od,q D_od,q = id", halve_odd_quantum(double_odd_quantum(u, o), o) == u)
    return rep, None


def cmd_compare(doc, args):
    rep = Report("compare")
    if not args.other:
        raise SystemExit("compare needs --other PATH")
    with open(args.other, encoding="utf-8") as fh:
        other = parse_problem(fh.read())
    rep.check("same space", doc.space == other.space)
    if doc.space != other.space:
        return rep, None
    a, b = to_multilinear(doc.linf()), to_multilinear(other.linf())
    diffs = []
    keys = set()
    for fam in (a, b):
        for n, mono, j, _ in fam.entries():
            keys.add((n, mono, j))
    names = doc.space.names
    for n, mono, j in sorted(keys):
        x, y = a.value(mono, j), b.value(mono, j)
        if x != y:
            diffs.append(f"m({', '.join(names[v] for v in mono)}) [{names[j]}]: {x} vs {y}")
    for line in diffs:
        rep.note(line)
    rep.check("structures equal", not diffs, f"{len(diffs)} differing coefficients" if diffs else "")
    fa, fb = doc.function, other.function
    if fa is not None or fb is not None:
        za = fa if fa is not None else Poly.zero(doc.space, 1)
        zb = fb if fb is not None else Poly.zero(doc.space, 1)
        rep.check("functions equal", za.terms == zb.terms)
    return rep, None


def _odd_lagrangian(doc):
    sq, ds, sds = induced_double_sdr(_sdr(doc), "odd")
    return lagrangian_data(sq, ds, sds)


def cmd_wick_check(doc, args):
    rep = Report("wick-check")
    lag = _odd_lagrangian(doc)
    rep.add_report("lagrangian", check_lagrangian(lag))
    one = wick_integral(Poly.const(lag.ds.total, 2), lag)
    rep.check("integral of 1", set(one) == {0} and one[0] == Poly.const(lag.small_ds.total, 2))
    u = doc.unimodular()
    q = double_odd_quantum(u, lag.ds)
    weight = max(q.weight - 2, 1)
    rep.add_report(f"log identity weight {weight}", check_graph_sum(q, lag, weight))
    return rep, None


def cmd_stokes_check(doc, args):
    rep = Report("stokes-check")
    lag = _odd_lagrangian(doc)
    seed = doc.options.get("seed", DEFAULT_SEED)
    rng = random.Random(seed)
    trials = args.trials
    sp = lag.ds.total
    fails = 0
    for _ in range(trials):
        f = random_poly(sp, 4, rng.randint(0, 1), rng, 1, 4, 5)
        fails += not check_bv_stokes(f, lag).ok
    rep.check(f"stokes on {trials} integrands (seed {seed})", fails == 0,
              f"{fails} failures" if fails else "")
    return rep, None


HANDLERS = {
    "validate": cmd_validate,
    "transfer": cmd_transfer,
    "transfer-unimodular": cmd_transfer_unimodular,
    "double": cmd_double,
    "halve": cmd_halve,
    "compare": cmd_compare,
    "wick-check": cmd_wick_check,
    "stokes-check": cmd_stokes_check,
}


def run_command(cmd: str, doc: ProblemDocument, args=None) -> tuple[Report, ProblemDocument | None]:
    if cmd not in HANDLERS:
        raise ValueError(f"unknown command {cmd!r}")
    args = args or build_parser().parse_args([cmd, "-"])
    return HANDLERS[cmd](doc, args)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bvhtt", description="Minimal models of L-infinity structures.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("input", help="problem document, or - for stdin")
    ap.add_argument("--cutoff", type=int)
    ap.add_argument("--hbar-order", type=int, choices=(0, 1))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--output", help="write the result here instead of stdout")
    ap.add_argument("--format", choices=("report", "document"), default="report")
    ap.add_argument("--other", help="second document for compare")
    ap.add_argument("--trials", type=int, default=20, help="integrands for stokes-check")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.input == "-":
            text = sys.stdin.read()
        else:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        doc = _with_overrides(parse_problem(text), args)
        rep, out = run_command(args.command, doc, args)
    except DocumentError as e:
        print(f"{args.input}: {e}", file=sys.stderr)
        return 2
    except (StructureError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.format == "document":
        if out is None:
            print(f"{args.command} produces no document", file=sys.stderr)
            return 2
        text = serialize(out)
    else:
        text = rep.render()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())

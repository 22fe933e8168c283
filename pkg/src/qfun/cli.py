"""Command-line front end: ``qfun <command> ...``.

Exit status 0 on success, 1 for a structured domain failure (rejected gap matrix, no
fit, no guess), 2 for usage and parse errors.  Data go to stdout, warnings to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import io
from .exact import QPolynomial, format_poly
from .expr import EvalError, ParseError, default_expansion_order, expand_series, parse, parse_equation, parse_factor
from .forms import Recurrence, ShiftEquation, convert, se_to_re, substitute_re, substitute_se, unroll
from .ore import gcrd


class DomainFailure(Exception):
    """Reported with exit status 1."""


class UsageError(Exception):
    """Reported with exit status 2."""


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _read_source(arg: str) -> str:
    if arg == "-":
        return sys.stdin.read()
    with open(arg, encoding="utf-8") as fh:
        return fh.read()


def _equation(text: str, args):
    return parse_equation(text, mma=args.mma_brackets)


def _emit(args, text: str, payload) -> None:
    if args.json:
        sys.stdout.write(io.dumps(payload))
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


# -- commands --------------------------------------------------------------------------

def cmd_convert(args):
    eq = _equation(args.equation, args)
    if isinstance(eq, ShiftEquation) and args.to.lower() == "qre":
        res = se_to_re(eq)
        lines = [res.recurrence.to_text()]
        for m, cond, *_ in res.side_conditions:
            lines.append(f"# x^{m}: " + " + ".join(f"({io.coeff_text(c)})*{eq.unknown}[{j}]" for j, c in sorted(cond.items())))
        _emit(args, "\n".join(lines), io.equation_to_json(res.recurrence))
        return
    out = convert(eq, args.to)
    _emit(args, out.to_text(), io.equation_to_json(out))


def _recurrence(text, args) -> Recurrence:
    eq = _equation(text, args)
    if not isinstance(eq, Recurrence):
        raise UsageError(f"{text!r} is not a recurrence")
    return eq


def cmd_gcd(args):
    a, b = _recurrence(args.first, args), _recurrence(args.second, args)
    g = Recurrence(gcrd(a.op, b.op).normalized(), 0, a.unknown)
    _emit(args, g.to_text(), io.equation_to_json(g))


def cmd_unroll(args):
    rec = _recurrence(args.recurrence, args)
    init = [io.parse_coeff(t) for t in args.init.split(",")]
    vals = unroll(rec, args.start, init, args.count)
    _emit(args, "\n".join(io.coeff_text(v) for v in vals), io.polys_to_json(vals))


def cmd_subs_se(args):
    eq = _equation(args.equation, args)
    if not isinstance(eq, ShiftEquation):
        raise UsageError("subs-se needs a q-shift equation")
    out = substitute_se(eq, parse_factor(args.factor, "series", eq.var), args.unknown)
    _emit(args, out.to_text(), io.equation_to_json(out))


def cmd_subs_re(args):
    rec = _recurrence(args.equation, args)
    index = rec.op.var[1:] if rec.op.var.startswith("Q") else "n"
    out = substitute_re(rec, parse_factor(args.factor, "sequence", index=index), args.unknown)
    _emit(args, out.to_text(), io.equation_to_json(out))


def _guess_options(args):
    from .guess import GuessOptions
    deg = _ints(args.degree)
    return GuessOptions(order=args.order, degree=tuple(deg) if len(deg) == 2 else deg[0],
                        shift_increment=args.shift_inc, starting_point=args.start,
                        expansion_order=args.expansion_order,
                        highest_order_factor=io.parse_poly(args.top_factor) if args.top_factor else None,
                        lowest_order_coefficient=io.parse_poly(args.low_coeff) if args.low_coeff else None,
                        inhomogeneous=args.inhomogeneous)


def _guess_report(args, res):
    if not res.solutions:
        raise DomainFailure(res.diagnostic)
    if res.diagnostic:
        print(res.diagnostic, file=sys.stderr)
    _emit(args, str(res), io.guess_result_to_json(res))


def cmd_guess_se(args):
    from .guess import guess_shift_equation, data_from_summand
    if args.sum:
        data, _ = data_from_summand(args.sum, args.var, args.expansion_order)
    elif args.data:
        data = io.read_poly_list(_read_source(args.data))
    else:
        raise UsageError("guess-se needs a data file or --sum")
    _guess_report(args, guess_shift_equation(data, _guess_options(args), args.unknown, args.var))


def cmd_guess_re(args):
    from .guess import guess_recurrence
    data = io.read_poly_list(_read_source(args.data))
    _guess_report(args, guess_recurrence(data, _guess_options(args), args.unknown, args.index))


def _gap_matrix(args):
    from .weighted_words import GapMatrix
    rows = [_ints(r) for r in args.matrix.split(";")]
    letters = args.letters.split(",") if args.letters else None
    return GapMatrix.of(rows, letters)


def cmd_ww(args):
    from .weighted_words import generate_recurrences
    system = generate_recurrences(_gap_matrix(args))
    if not system:
        print(system.warning, file=sys.stderr)
        raise DomainFailure("gap matrix rejected")
    _emit(args, system.to_text(), io.ww_system_to_json(system))


def cmd_ww_enum(args):
    from .weighted_words import enumerate_weighted_partitions
    M = _gap_matrix(args)
    table = enumerate_weighted_partitions(M, args.level, args.degree)
    keys = sorted(table, key=lambda t: (t[1], M.letters.index(t[0])))
    lines = [f"g[{letter}][{k}] = {format_poly(table[(letter, k)])}" for letter, k in keys]
    payload = [{"letter": letter, "level": k, "value": format_poly(table[(letter, k)])} for letter, k in keys]
    _emit(args, "\n".join(lines), payload)


def _validate(args):
    if args.validate:
        from .cylindric import validate_templates
        for k, size in validate_templates():
            print(f"warning: template fails enumeration for k={k}, size={size}", file=sys.stderr)


def cmd_cyl_system(args):
    from .cylindric import functional_equation_system
    _validate(args)
    k, size = _ints(args.family)
    try:
        eqs = functional_equation_system(k, size, args.trusted_only)
    except ValueError as exc:
        raise DomainFailure(str(exc)) from None
    _emit(args, "\n".join(e.to_text() for e in eqs), [e.to_text() for e in eqs])


def cmd_cyl_recs(args):
    from .cylindric import coefficient_recurrences, functional_equation_system, system_text
    _validate(args)
    k, size = _ints(args.family)
    try:
        cs = coefficient_recurrences(functional_equation_system(k, size, args.trusted_only))
    except ValueError as exc:
        raise DomainFailure(str(exc)) from None
    if args.uncouple:
        from .ore import format_operator
        ops = cs.uncouple()
        lines = [format_operator(op, u, "n") for u, op in ops.items()]
        payload = [io.equation_to_json(Recurrence(op, 0, u)) for u, op in ops.items()]
        _emit(args, "\n".join(lines), payload)
        return
    _emit(args, system_text(cs), io.system_to_json(cs.rows, cs.unknowns, cs.var))


def cmd_cyl_enum(args):
    from .cylindric import enumerate_cylindric
    counts = enumerate_cylindric(_ints(args.profile), args.max_part, args.max_size)
    F = QPolynomial({(b, s): n for (s, b), n in counts.items()}, ("z", "q"))
    _emit(args, format_poly(F), io.coeff_text(F))


def cmd_borodin(args):
    from .qobjects import borodin_product
    d = borodin_product(_ints(args.profile))
    _emit(args, str(d), {"modulus": d.modulus, "exponents": list(d.exponents)})


def cmd_fit(args):
    from .fitting import NO_FIT, fit_q_representation, fit_to_bilateral_form
    data = io.read_poly_list(_read_source(args.data))
    sub = tuple(_ints(args.subseq)) if args.subseq else None
    fams = args.families.split(",") if args.families else "All"
    fits = fit_q_representation(data, args.index, args.base, sub, fams, args.all)
    if not fits:
        raise DomainFailure(NO_FIT)
    lines = []
    for f in fits:
        lines.append(f.to_text())
        if args.bilateral:
            form = fit_to_bilateral_form(f)
            lines.append(f"# {form}" if form else "# no bilateral pattern")
    _emit(args, "\n".join(lines), [io.fit_to_json(f) for f in fits])


def cmd_expand(args):
    order = args.order if args.order is not None else default_expansion_order()
    s = expand_series(parse(args.expression, args.mma_brackets), args.var, order)
    _emit(args, "\n".join(io.coeff_text(c) for c in s.c), io.polys_to_json(s.c))


def cmd_prodmake(args):
    from .qobjects import prod_make
    order = args.order if args.order is not None else default_expansion_order()
    if args.data:
        coeffs = [v.as_poly().const_value() if hasattr(v, "as_poly") else v.const_value()
                  for v in io.read_poly_list(_read_source(args.data))]
    else:
        s = expand_series(parse(args.expression, args.mma_brackets), "q", order)
        coeffs = [c.as_poly().const_value() for c in s.c]
    res = prod_make(coeffs, min(order, len(coeffs) - 1))
    lines = [f"{n}: {e}" for n, e in enumerate(res.exponents, start=1) if e]
    if not res.integral:
        print("warning: non-integral exponents; the series is not an eta-type product", file=sys.stderr)
    _emit(args, "\n".join(lines) or "1", {"exponents": [str(e) for e in res.exponents], "integral": res.integral})


# -- parser -------------------------------------------------------------------------------

def _add_guess_flags(p):
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--degree", default="1", help="d or dv,dq")
    p.add_argument("--shift-inc", type=int, default=1)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--expansion-order", type=int, default=None)
    p.add_argument("--top-factor", default=None, help="prescribed factor of the highest-order coefficient")
    p.add_argument("--low-coeff", default=None, help="prescribed lowest-order coefficient")
    p.add_argument("--inhomogeneous", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--mma-brackets", action="store_true", help="accept F[x] and juxtaposition")
    ap = argparse.ArgumentParser(prog="qfun", description="q-series equations, guessing and partition tools")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(fn=fn)
        return p

    p = cmd("convert", cmd_convert, "convert among q-shift, q-recurrence and q-differential forms")
    p.add_argument("equation")
    p.add_argument("--to", required=True, choices=["qSE", "qRE", "qDE", "qse", "qre", "qde"])
    p = cmd("gcd", cmd_gcd, "greatest common right divisor of two recurrences")
    p.add_argument("first")
    p.add_argument("second")
    p = cmd("unroll", cmd_unroll, "list values of a recurrence")
    p.add_argument("recurrence")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--init", required=True, help="comma-separated initial values")
    p.add_argument("--count", type=int, required=True)
    for name, fn in (("subs-se", cmd_subs_se), ("subs-re", cmd_subs_re)):
        p = cmd(name, fn, "substitute new unknown = factor * old unknown")
        p.add_argument("equation")
        p.add_argument("factor")
        p.add_argument("--unknown", default=None)
    p = cmd("guess-se", cmd_guess_se, "guess a q-shift equation from series coefficients")
    p.add_argument("data", nargs="?", help="file with one coefficient per line or a JSON array; - for stdin")
    p.add_argument("--sum", default=None, help="summand expression Sum(...) to expand instead of a data file")
    p.add_argument("--var", default="x")
    p.add_argument("--unknown", default="F")
    _add_guess_flags(p)
    p = cmd("guess-re", cmd_guess_re, "guess a q-recurrence from sequence terms")
    p.add_argument("data")
    p.add_argument("--index", default="n")
    p.add_argument("--unknown", default="a")
    _add_guess_flags(p)
    p = cmd("ww", cmd_ww, "recurrences for a weighted-words gap matrix")
    p.add_argument("matrix", help="rows separated by ';', entries by ','")
    p.add_argument("letters", nargs="?", default=None)
    p = cmd("ww-enum", cmd_ww_enum, "enumerate weighted-words generating polynomials")
    p.add_argument("matrix")
    p.add_argument("letters", nargs="?", default=None)
    p.add_argument("--level", type=int, default=4)
    p.add_argument("--degree", type=int, default=10)
    for name, fn in (("cyl-system", cmd_cyl_system), ("cyl-recs", cmd_cyl_recs)):
        p = cmd(name, fn, "cylindric functional equations / coefficient recurrences")
        p.add_argument("family", help="k,size")
        p.add_argument("--trusted-only", action="store_true",
                       help="refuse families whose template has not been checked by enumeration")
        p.add_argument("--validate", action="store_true",
                       help="check the template by enumeration (k <= 3, size <= 4) first")
        if name == "cyl-recs":
            p.add_argument("--uncouple", action="store_true")
    p = cmd("cyl-enum", cmd_cyl_enum, "enumerate cylindric partitions of a profile")
    p.add_argument("profile")
    p.add_argument("--max-part", type=int, default=6)
    p.add_argument("--max-size", type=int, default=10)
    p = cmd("borodin", cmd_borodin, "product side of F_C(1)")
    p.add_argument("profile")
    p = cmd("fit", cmd_fit, "fit data with q-binomial or q-trinomial bases")
    p.add_argument("data")
    p.add_argument("--subseq", default=None, help="m,r: use the entries with index r mod m")
    p.add_argument("--families", default=None, help="comma-separated family names")
    p.add_argument("--all", action="store_true", help="return every fit found")
    p.add_argument("--index", default="n")
    p.add_argument("--base", type=int, default=1)
    p.add_argument("--bilateral", action="store_true", help="also print the residue-class pattern")
    p = cmd("expand", cmd_expand, "truncated series expansion")
    p.add_argument("expression")
    p.add_argument("--var", default="x")
    p.add_argument("--order", type=int, default=None)
    p = cmd("prodmake", cmd_prodmake, "exponents e_n with f = prod (1-q^n)^(-e_n)")
    p.add_argument("expression", nargs="?")
    p.add_argument("--data", default=None)
    p.add_argument("--order", type=int, default=None)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "prodmake" and not (args.expression or args.data):
        print("qfun prodmake: give an expression or --data", file=sys.stderr)
        return 2
    try:
        args.fn(args)
    except DomainFailure as exc:
        print(f"qfun {args.command}: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ParseError, EvalError, json.JSONDecodeError, OSError) as exc:
        print(f"qfun {args.command}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"qfun {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

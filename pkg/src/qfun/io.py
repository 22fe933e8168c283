"""JSON and text interchange for equations, data lists, weighted-words systems and fits.

Coefficients travel as strings in the canonical polynomial syntax (``Qn`` stands for
q^n); non-polynomial rational functions are written ``(num)/(den)``.  Every ``*_to_json``
has a matching reader, and emitting what was read gives the same bytes.
"""

from __future__ import annotations

import json
from typing import Any, Sequence

from .exact import QPolynomial, QRationalFunction, format_poly, poly, rat
from .expr import evaluate, parse
from .fitting import Affine, FitResult
from .forms import DifferentialEquation, Recurrence, ShiftEquation
from .ore import OreOperator

_COEFF = {"type": "string"}

EQUATION_SCHEMA = {
    "type": "object",
    "required": ["form", "unknown", "var", "stride", "terms", "boundary"],
    "properties": {
        "form": {"enum": ["qSE", "qRE", "qDE"]},
        "unknown": {"type": "string"},
        "var": {"type": "string"},
        "stride": {"type": "integer", "minimum": 1},
        "terms": {"type": "array", "items": {
            "type": "object", "required": ["coeff"],
            "properties": {"shift": {"type": "integer"}, "deriv": {"type": "integer", "minimum": 0},
                           "coeff": _COEFF}}},
        "boundary": {"type": "array", "items": {
            "type": "object", "required": ["index", "coeff"],
            "properties": {"index": {"type": "integer"}, "coeff": _COEFF}}},
        "inhomogeneous": _COEFF,
        "validFrom": {"type": "integer"},
    },
}

SYSTEM_SCHEMA = {
    "type": "object",
    "required": ["form", "var", "unknowns", "rows", "validFrom"],
    "properties": {
        "form": {"const": "qRE-system"},
        "var": {"type": "string"},
        "unknowns": {"type": "array", "items": {"type": "string"}},
        "validFrom": {"type": "integer"},
        "rows": {"type": "array", "items": {"type": "array", "items": {
            "type": "object", "required": ["unknown", "shift", "coeff"],
            "properties": {"unknown": {"type": "string"}, "shift": {"type": "integer"}, "coeff": _COEFF}}}},
    },
}

FIT_SCHEMA = {
    "type": "object",
    "required": ["family", "top", "center", "coefficients", "subsequence", "base", "indexVar"],
    "properties": {
        "family": {"type": "string"},
        "top": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "center": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "coefficients": {"type": "array", "items": {
            "type": "object", "required": ["offset", "coeff"],
            "properties": {"offset": {"type": "integer"}, "coeff": _COEFF}}},
        "subsequence": {"anyOf": [{"type": "null"},
                                  {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}]},
        "base": {"type": "integer"},
        "indexVar": {"type": "string"},
    },
}

POLY_LIST_SCHEMA = {"type": "array", "items": _COEFF}


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=True) + "\n"


# -- coefficients ---------------------------------------------------------------------

def coeff_text(c) -> str:
    c = rat(c)
    if c.is_poly():
        return format_poly(c.as_poly())
    if c.den.is_monomial():
        return format_poly(c.num * QPolynomial._raw(c.den.vars, {tuple(-e for e in k): 1 / v
                                                                 for k, v in c.den.terms.items()}))
    return f"({format_poly(c.num)})/({format_poly(c.den)})"


def parse_coeff(text: str) -> QRationalFunction:
    return evaluate(parse(text))


def parse_poly(text: str) -> QPolynomial:
    v = parse_coeff(text)
    if not v.is_poly():
        raise ValueError(f"{text!r} is not a polynomial")
    return v.as_poly()


# -- equations ----------------------------------------------------------------------

def equation_to_json(eq) -> dict:
    if isinstance(eq, ShiftEquation):
        out = {"form": "qSE", "unknown": eq.unknown, "var": eq.var, "stride": eq.stride,
               "terms": [{"shift": k, "coeff": coeff_text(c)} for k, c in sorted(eq.terms().items())],
               "boundary": [{"index": j, "coeff": coeff_text(c)} for j, c in sorted(eq.boundary.items())]}
        if eq.inhomogeneous:
            out["inhomogeneous"] = coeff_text(eq.inhomogeneous)
        return out
    if isinstance(eq, Recurrence):
        op = eq.op
        return {"form": "qRE", "unknown": eq.unknown, "var": op.var, "stride": op.stride,
                "terms": [{"shift": i, "coeff": coeff_text(c)} for i, c in sorted(op.coeffs.items())],
                "boundary": [], "validFrom": eq.valid_from}
    if isinstance(eq, DifferentialEquation):
        out = {"form": "qDE", "unknown": eq.unknown, "var": eq.var, "stride": 1,
               "terms": [{"deriv": i, "coeff": coeff_text(c)} for i, c in sorted(eq.terms.items())],
               "boundary": [{"index": j, "coeff": coeff_text(c)} for j, c in sorted(eq.init.items())]}
        if eq.inhomogeneous:
            out["inhomogeneous"] = coeff_text(eq.inhomogeneous)
        return out
    raise TypeError(f"cannot serialize {type(eq).__name__}")


def _poly_or_rat(text: str):
    v = parse_coeff(text)
    return v.as_poly() if v.is_poly() else v


def equation_from_json(obj: dict):
    form = obj["form"]
    inh = parse_poly(obj["inhomogeneous"]) if obj.get("inhomogeneous") else poly(0)
    if form == "qSE":
        stride = obj["stride"]
        coeffs = {}
        for t in obj["terms"]:
            if t["shift"] % stride:
                raise ValueError(f"shift {t['shift']} is not a multiple of stride {stride}")
            coeffs[t["shift"] // stride] = parse_coeff(t["coeff"])
        bnd = {b["index"]: _poly_or_rat(b["coeff"]) for b in obj["boundary"]}
        return ShiftEquation(OreOperator(coeffs, obj["var"], stride), bnd, inh, obj["unknown"])
    if form == "qRE":
        op = OreOperator({t["shift"]: parse_coeff(t["coeff"]) for t in obj["terms"]}, obj["var"], obj["stride"])
        return Recurrence(op, obj.get("validFrom", 0), obj["unknown"])
    if form == "qDE":
        return DifferentialEquation({t["deriv"]: parse_coeff(t["coeff"]) for t in obj["terms"]},
                                    {b["index"]: parse_coeff(b["coeff"]) for b in obj["boundary"]},
                                    inh, obj["unknown"], obj["var"])
    raise ValueError(f"unknown equation form {form!r}")


# -- coupled systems -------------------------------------------------------------------

def system_to_json(rows: Sequence[dict], unknowns: Sequence[str], var: str, valid_from: int = 0,
                   rename=None) -> dict:
    rename = rename or (lambda u: u)
    out_rows = []
    for r in rows:
        terms = []
        for u in unknowns:
            op = r.get(u)
            if op:
                terms += [{"unknown": rename(u), "shift": s, "coeff": coeff_text(c)}
                          for s, c in sorted(op.coeffs.items())]
        out_rows.append(terms)
    return {"form": "qRE-system", "var": var, "unknowns": [rename(u) for u in unknowns],
            "rows": out_rows, "validFrom": valid_from}


def system_from_json(obj: dict) -> tuple[list[dict], list[str]]:
    rows = []
    for terms in obj["rows"]:
        acc: dict[str, dict] = {}
        for t in terms:
            acc.setdefault(t["unknown"], {})[t["shift"]] = parse_coeff(t["coeff"])
        rows.append({u: OreOperator(d, obj["var"], 1) for u, d in acc.items()})
    return rows, list(obj["unknowns"])


def ww_system_to_json(system) -> dict:
    """Denominator-cleared rows, unknowns named g.a, g.b, ..."""
    letters = system.matrix.letters
    names = {system.unknown(i): f"g.{letters[i]}" for i in range(len(letters))}
    from .weighted_words import LEVEL
    return system_to_json(system.cleared(), system.unknowns(), LEVEL, system.valid_from, names.get)


# -- data lists and fits -------------------------------------------------------------------

def polys_to_json(values: Sequence) -> list:
    return [coeff_text(v) for v in values]


def read_poly_list(text: str) -> list:
    """A JSON array of strings, or one expression per non-empty line (``#`` starts a comment)."""
    s = text.strip()
    if s.startswith("["):
        return [_poly_or_rat(t) for t in json.loads(s)]
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    return [_poly_or_rat(ln) for ln in lines if ln]


def fit_to_json(fit: FitResult) -> dict:
    return {"family": fit.family, "top": [fit.top.slope, fit.top.offset],
            "center": [[c.slope, c.offset] for c in fit.center],
            "coefficients": [{"offset": j, "coeff": coeff_text(c)} for j, c in fit.coefficients],
            "subsequence": list(fit.subsequence) if fit.subsequence else None,
            "base": fit.base, "indexVar": fit.index_var}


def fit_from_json(obj: dict) -> FitResult:
    return FitResult(obj["family"], Affine(*obj["top"]), tuple(Affine(*c) for c in obj["center"]),
                     tuple((c["offset"], parse_poly(c["coeff"])) for c in obj["coefficients"]),
                     tuple(obj["subsequence"]) if obj["subsequence"] else None,
                     obj["base"], obj["indexVar"])


def guess_result_to_json(res) -> dict:
    return {"unique": res.unique, "freeConstants": res.free_constants, "diagnostic": res.diagnostic,
            "equationsUsed": res.equations_used, "unknowns": res.unknowns,
            "solutions": [equation_to_json(e) for e in res.solutions],
            "general": str(res.general) if res.general is not None else None}

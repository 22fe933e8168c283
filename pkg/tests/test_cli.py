import json

import jsonschema
import pytest

from qfun import io
from qfun.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_convert_to_recurrence(capsys):
    code, out, _ = run(capsys, "convert", "F(q^2*x) - x^2*q*F(x)", "--to", "qRE")
    assert code == 0
    assert out.splitlines()[0] == "a(n+2)*q^(2*n+4) - a(n)*q"


def test_convert_json_is_valid(capsys):
    code, out, _ = run(capsys, "convert", "F(q^2*x) - x^2*q*F(x)", "--to", "qDE", "--json")
    assert code == 0
    jsonschema.validate(json.loads(out), io.EQUATION_SCHEMA)


def test_mma_brackets(capsys):
    code, out, _ = run(capsys, "convert", "F[x q^2] - x^2 q F[x]", "--to", "qRE", "--mma-brackets")
    assert code == 0 and out.startswith("a(n+2)*q^(2*n+4) - a(n)*q")


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "convert", "F(q^^2*x)", "--to", "qRE")
    assert code == 2 and "offset 4" in err


def test_unknown_command(capsys):
    assert run(capsys, "frobnicate")[0] == 2


def test_unroll_and_gcd(capsys):
    code, out, _ = run(capsys, "unroll", "a(n+2)*q^(2*n+3) - a(n)", "--start", "-2", "--init", "1,q", "--count", "5")
    assert code == 0 and out.split() == ["1", "q", "q", "1", "q^(-2)"]
    code, out, _ = run(capsys, "gcd", "a(n+2)*q^(2*n+4) - q*a(n)", "a(n+2)*q^(2*n+3) - a(n)")
    assert code == 0 and out.strip() == "a(n+2)*q^(2*n+3) - a(n)"


def test_guess_from_sum(capsys):
    code, out, _ = run(capsys, "guess-se", "--sum", "Sum(x^m*q^(m^2)/qPochhammer(q,q,m), m, 0, 30)",
                       "--order", "2", "--degree", "1")
    assert code == 0 and out.strip() == "q*x*F(q^2*x) + F(q*x) - F(x)"


def test_guess_with_too_little_data(tmp_path, capsys):
    data = tmp_path / "d.txt"
    data.write_text("1\n1 + 2*q\n")
    assert run(capsys, "guess-re", str(data))[0] == 1


def test_weighted_words(capsys):
    code, out, _ = run(capsys, "ww", "1,2,2;1,1,2;1,1,2", "a,b,c")
    assert code == 0 and out.splitlines()[0] == "g[a][k] = g[c][k-1] + q^k*a*g[a][k-1]"
    code, out, err = run(capsys, "ww", "1,1,1;2,1,1;0,0,1")
    assert code == 1 and err.startswith("Given difference conditions matrix")
    code, out, _ = run(capsys, "ww", "--json", "--", "-3,1;0,-4")
    assert code == 0
    jsonschema.validate(json.loads(out), io.SYSTEM_SCHEMA)
    code, out, _ = run(capsys, "ww-enum", "0,0;0,0", "--level", "1", "--degree", "2")
    assert code == 0 and out.startswith("g[a][1] = ")


def test_cylindric_commands(capsys):
    code, out, _ = run(capsys, "cyl-system", "2,4")
    assert code == 0 and out.splitlines()[0] == "G[{2,2}](z) + (-q*z + 1)*G[{2,2}](q^2*z) - 2*G[{3,1}](q*z)"
    code, out, _ = run(capsys, "cyl-recs", "2,4", "--uncouple")
    assert code == 0 and len(out.splitlines()) == 3
    code, out, _ = run(capsys, "borodin", "2,2")
    assert out.strip() == "1/(q,q,q^2,q^2,q^4,q^4,q^5,q^5,q^6;q^6)_inf"
    code, out, _ = run(capsys, "cyl-enum", "2,2", "--max-part", "2", "--max-size", "1")
    assert code == 0 and out.strip() == "2*q*z + 1"


def test_trusted_only(monkeypatch, capsys):
    from qfun import cylindric
    monkeypatch.setattr(cylindric, "VALIDATED", set())
    assert run(capsys, "cyl-system", "2,4", "--trusted-only")[0] == 1
    assert run(capsys, "cyl-system", "2,4", "--trusted-only", "--validate")[0] == 0


def test_fit(tmp_path, capsys):
    values = ["1", "1 + 2*q", "1 + 2*q + 2*q^2 + 2*q^3 + 2*q^4",
              "1 + 2*q + 2*q^2 + 4*q^3 + 4*q^4 + 4*q^5 + 4*q^6 + 2*q^7 + 2*q^8 + 2*q^9"]
    data = tmp_path / "h.json"
    data.write_text(json.dumps(values))
    code, out, _ = run(capsys, "fit", str(data), "--families", "qBinomial")
    assert code == 0 and out.startswith("qBinomial[2*n + 1, n + 1, q] + (-q^2 + q)*qBinomial[2*n + 1, n + 2, q]")
    short = tmp_path / "s.txt"
    short.write_text("1\n2\n")
    assert run(capsys, "fit", str(short))[0] == 1


def test_expand_and_prodmake(capsys):
    code, out, _ = run(capsys, "expand", "1/(1-x)", "--order", "3")
    assert code == 0 and out.split() == ["1", "1", "1", "1"]
    code, out, _ = run(capsys, "prodmake", "1/qPochhammer(q,q,inf)", "--order", "4")
    assert code == 0 and out.split() == ["1:", "1", "2:", "1", "3:", "1", "4:", "1"]
    assert run(capsys, "prodmake")[0] == 2


def test_substitution_commands(capsys):
    code, out, _ = run(capsys, "subs-re", "b(n+1) - b(n)", "qPochhammer(q,q,n)", "--unknown", "g")
    assert code == 0 and out.strip() == "-g(n+1) + g(n)*(-q^(n+1) + 1)"
    code, out, _ = run(capsys, "subs-se", "F(q*x) - (1-x)*F(x)", "1/qPochhammer(x,q,inf)", "--unknown", "B")
    assert code == 0 and "B(" in out

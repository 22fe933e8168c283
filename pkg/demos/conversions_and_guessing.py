"""Move one q-shift equation between its three forms, then recover it from data."""
from qfun.expr import parse_equation
from qfun.forms import convert
from qfun.guess import GuessOptions, data_from_summand, guess_shift_equation

equation = parse_equation("F(q^2*x) - x^2*q*F(x)")
print("shift equation:       ", equation)
print("coefficient recurrence:", convert(equation, "qRE"))
print("q-differential form:   ", convert(equation, "qDE"))

# the first Rogers-Ramanujan sum satisfies a second-order shift equation;
# truncate the sum, feed the coefficients back in and see it come out
data, _ = data_from_summand("Sum(x^m*q^(m^2)/qPochhammer(q,q,m), m, 0, 30)")
result = guess_shift_equation(data, GuessOptions(order=2, degree=1))
print("guessed from the sum:  ", result)

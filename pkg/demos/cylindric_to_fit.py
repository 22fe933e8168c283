"""Cylindric partitions of rank 2 and level 4: from functional equations to a q-binomial fit."""
from qfun.cylindric import coefficient_recurrences, functional_equation_system, system_text
from qfun.expr import parse_factor
from qfun.fitting import fit_q_representation, fit_to_bilateral_form
from qfun.forms import Recurrence, substitute_re, unroll
from qfun.qobjects import borodin_product

system = functional_equation_system(2, 4)
for eq in system:
    print(eq)
print("product side of G[{2,2}](1):", borodin_product((2, 2)))

coupled = coefficient_recurrences(system)
print(system_text(coupled))
g22 = Recurrence(coupled.uncouple("g[{2,2}]"), 0, "g")
print("uncoupled g[{2,2}]:", g22)

# strip the obvious product factor so the remaining sequence is polynomial
h = substitute_re(g22, parse_factor("qPochhammer(q^2,q^2,n)/q^(n^2)", "sequence"), "h")
print("after substitution:", h)

values = [v.as_poly() for v in unroll(h, -1, [0, 1], 13)[1:]]
(fit,) = fit_q_representation(values[:10])
print("binomial fit:", fit)
form = fit_to_bilateral_form(fit)
print("bilateral form:", form)
print("reproduces all 12 values:", all(form.evaluate(n) == values[n] for n in range(len(values))))

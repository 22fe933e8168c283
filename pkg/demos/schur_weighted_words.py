"""Schur's theorem through weighted words: recurrences, uncoupling, and the closed form."""
from qfun.weighted_words import SCHUR, generate_recurrences, oracle_agrees, schur_pipeline

system = generate_recurrences(SCHUR)
print(system.to_text())
print("recurrences match brute-force enumeration:", oracle_agrees(SCHUR))

report = schur_pipeline(4)
for letter, op in report.uncoupled.items():
    print(f"uncoupled {letter}: {op}")
for k, _, factored in report.values[:3]:
    print(f"k={k}: g_c({k + 1}) at c=abq = {factored}")
print("identity holds for k <= 4:", report.holds)

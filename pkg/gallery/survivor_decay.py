"""Follow the measure of points that have not yet hit the hole.

At ``beta = 1.9`` both hole endpoints fall into the hole after 52 steps, so
the exact Markov route applies. The survivor measure decays like
``(rho / beta) ** n``, and the fitted slope reproduces the Perron root.
"""
import math

from betaescape import make_beta
from betaescape.markov_escape import build_partition, build_transition, detect_matching, escape_from_matrix
from betaescape.survivor import escape_rate_empirical, survivor_iterate

beta = make_beta("1.9")
table = survivor_iterate(beta, 40)
for row in table.rows[::5]:
    print(f"n={row.n:>2}  |W_n| = {float(row.measure_W):.3e}  pieces = {row.interval_count}")

fit = escape_rate_empirical(table)
m = detect_matching(beta)
esc = escape_from_matrix(build_transition(build_partition(m.record_a, m.record_b, beta))[1], beta)
print(f"fitted E   = {fit.E_hat:.6f}  (R^2 = {fit.r_squared:.6f})")
print(f"matrix E   = {esc.E:.6f}  from rho = {esc.rho:.6f}, log beta = {math.log(1.9):.6f}")
print(f"conservation error = {float(table.conservation_error()):.1e}")

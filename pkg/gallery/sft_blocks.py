"""Read an escape rate off a subshift of finite type.

When the survivor set is a vertex shift cut out by a block ``t``, its entropy
``h(t)`` gives ``E = 1 - h / log beta``. For the tribonacci base the block is
``110``, whose language is the golden-mean shift.
"""
import math

from betaescape import make_beta
from betaescape.sft_tools import count_words, escape_for_admissible, sft_entropy

for t in ["1", "10", "11", "110", "1110", "11010"]:
    h = sft_entropy(t)
    counts = [count_words(t, n) for n in range(1, 9)]
    print(f"t={t:<6} h={h:.6f}  exp(h)={math.exp(h):.6f}  c(1..8)={counts}")

E = escape_for_admissible(make_beta("tribonacci"), "110")
print(f"tribonacci escape rate from block 110: {E:.8f}")

#!/usr/bin/env python3
"""Generate exact derivatives of the 1-D cutoff transition profile.

The cutoff b(t) equals 1 for |t| <= 1 and 0 for |t| >= 2; on the transition
1 < t < 2 it is the two-sided partition

    b(t) = h(2 - t) / (h(2 - t) + h(t - 1)),   h(u) = exp(-1/u),

whose product h(2-t) h(t-1) = exp(-4 / (1 - (2t-3)^2)) is the standard smooth
bump profile.  Lemma-type checks need (1 - Laplacian)^m of the tensor cutoff
exactly, so derivatives up to order 6 are emitted as C++ code.
"""

import sympy as sp

t = sp.symbols("t", positive=True)
h1 = sp.exp(-1 / (2 - t))
h2 = sp.exp(-1 / (t - 1))
b = h1 / (h1 + h2)

orders = 7  # derivatives 0..6
exprs = [sp.simplify(sp.diff(b, t, k)) for k in range(orders)]

subs, reduced = sp.cse(exprs, optimizations="basic")

lines = []
lines.append("// Generated by tools/gen_bump.py; do not edit by hand.")
lines.append("// bump_transition(k, t): k-th derivative of the cutoff transition")
lines.append("// profile on 1 < t < 2 (value 1 at t <= 1, 0 at t >= 2).")
lines.append("inline double bump_transition(int k, double t) {")
for name, expr in subs:
    lines.append(f"    const double {name} = {sp.cxxcode(expr)};")
lines.append("    switch (k) {")
for k, expr in enumerate(reduced):
    lines.append(f"        case {k}: return {sp.cxxcode(expr)};")
lines.append("        default: return 0.0;")
lines.append("    }")
lines.append("}")

with open("src/generated/bump_derivatives.inc", "w") as f:
    f.write("\n".join(lines) + "\n")
print("wrote src/generated/bump_derivatives.inc,",
      sum(len(sp.cxxcode(e)) for e in reduced), "chars of expressions")

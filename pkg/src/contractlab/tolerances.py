"""Global numeric tolerances.

All instances are desk-scale and computed in doubles, so a single set of
absolute tolerances is enough.  Everything that compares probabilities,
costs, or invariants goes through these constants.
"""

# Probability / invariant checks (pmf sums, FOSD, CDFP, nesting, ...).
ABS_TOL = 1e-9

# Agent tie-breaking: actions within TIE_TOL of the maximum agent utility
# are considered tied, so exact ties survive floating-point evaluation.
TIE_TOL = 1e-7

# LP feasibility / optimality certificates.
LP_TOL = 1e-8

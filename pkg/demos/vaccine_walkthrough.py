"""
Selecting units for a three-outcome vaccine trial
=================================================

A clinical study records three outcomes per treatment arm: infected with
symptoms, asymptomatic, and no infection. This walkthrough bounds the
benefit of vaccinating one more person using both the randomized arm counts
and the counts observed in the general population.
"""

from unitselect import BenefitFunction, bound_benefit, from_counts, identify
from unitselect.core import format_decimal
from unitselect.pcbounds import bounds_for_all_full_joints

# Rows are treatments (vaccinated, unvaccinated), columns are outcomes.
# The first table comes from the randomized study, the second from the field.
exp, obs = from_counts([[52, 512, 36], [329, 58, 213]],
                       [[14, 933, 6], [121, 65, 61]])
print("P(y1 | do(x1)) =", exp.p(1, 1))
print("P(x1, y2)      =", obs.joint(1, 2))

###############################################################################
# Each of the nine response types (outcome if vaccinated, outcome if not)
# gets an interval. Exact fractions are kept; decimals are for reading only.

for a, iv in bounds_for_all_full_joints(exp, obs).items():
    print(f"  P(y{a[0]}_x1, y{a[1]}_x2): [{iv.lower}, {iv.upper}]  ~ {iv.format()}")

###############################################################################
# Task 1 rewards moving a person to a better outcome and penalizes moving
# them to a worse one. Experimental data alone cannot pin it down.

task1 = BenefitFunction.from_vector(2, 3, (0, 1, 1, -1, 0, 1, -1, -1, 0))
print("identifiable:", identify(task1, exp).identifiable)

result = bound_benefit(task1, exp, obs)
print(f"{format_decimal(result.lower)} <= f(c) <= {format_decimal(result.upper)}")
print("exact:", result.interval)
print("without rewriting the interval would be", result.base.format())

# The reductions that produced the lower bound:
for step in result.lower_steps:
    print("  ", step)

###############################################################################
# Task 2 weights the severe outcome twice. Here every coefficient can be
# cancelled against experimental margins, so the benefit is a single number.

task2 = BenefitFunction.from_vector(2, 3, (0, 1, 2, -1, 0, 1, -2, -1, 0))
answer = identify(task2, exp)
print("identifiable:", answer.identifiable, "value:", answer.value, f"({format_decimal(answer.value)})")

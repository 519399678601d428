"""Hollow stars pin down worst-case certificate size exactly.

For singletons on n points the b-robust hollow star number is
(b+1)(n-1)+1, so some test point needs a certificate with every one of
(b+1)(n-1) training examples -- far beyond the VC dimension (which is 1).
"""

from certikit import (
    dpoint,
    hardest_instance,
    is_minimal_certificate,
    largest_minimal_certificate,
    lift_star,
    minimum_certificate,
    robust_star_number,
    singletons,
    verify_star,
)

# ------------------------------------------------------------- star numbers
print("b-robust hollow star numbers for singletons (closed form (b+1)(n-1)+1):")
for n in (2, 3, 4):
    family = singletons(n)
    row = []
    for b in (0, 1, 2):
        number, witness = robust_star_number(family, b)
        assert verify_star(family, witness)
        row.append(number)
    print(f"  n={n}: s_0={row[0]}  s_1={row[1]}  s_2={row[2]}")

# ------------------------------------------------- lifting a star to budget b
family = singletons(3)
_, star0 = robust_star_number(family, 0)
lifted = lift_star(star0, 2)
print(f"\nlifting the budget-0 star (size {star0.size}) to budget 2 "
      f"gives size {lifted.size}; verifies: {verify_star(family, lifted)}")

# -------------------------------------------------------- hardest instances
data, test, label = hardest_instance(family, star0)
print(f"\nhardest budget-0 instance: {[(e.point.discrete, e.label) for e in data]}"
      f" certifying ({test.discrete}, {label:+d})")
print("is a minimal certificate:",
      is_minimal_certificate(family, data, range(len(data)), 0, test, label))

cert = minimum_certificate(family, data, 0, test, label)
print(f"minimum certificate size: {cert.size} (= s_0 - 1 = {star0.size - 1})")

# ------------------------------------------- duality, verified exhaustively
for b in (0, 1):
    s_b, _ = robust_star_number(family, b)
    worst, _ = largest_minimal_certificate(family, b)
    print(f"b={b}: largest minimal certificate {worst} == s_b - 1 == {s_b - 1}")

"""Size-d certificates for halfspace predictions via conic membership.

A test point carries label +1 against every halfspace consistent with the
training data exactly when it lies in the conic hull of the signed training
points.  A basic solution of that membership LP touches at most d
generators, so d training examples always suffice as the certificate.
"""

import numpy as np

from certikit import (
    ConicInstance,
    HalfspaceFamily,
    TargetHypothesis,
    caratheodory_certificate,
    conic_membership,
    in_robust_agreement,
    label_dataset,
    vpoint,
)

rng = np.random.default_rng(7)
d = 3
family = HalfspaceFamily(d)

# ---------------------------------------------------------------- training set
w_star = rng.normal(size=d)
points = rng.normal(size=(60, d))
target = TargetHypothesis(family, tuple(w_star))
data = label_dataset(family, target, [vpoint(*p) for p in points])
print(f"labeled {len(data)} points in R^{d} by a hidden halfspace")

# a test point deep inside the agreement cone: a positive combination of
# signed training points
signed = data.as_matrix() * data.labels_array()[:, None]
test = vpoint(*(rng.uniform(0.3, 1.0, size=8) @ signed[:8]))
print("test point in agreement region:",
      in_robust_agreement(family, data, 0, test, 1))

# ------------------------------------------------------- certificate extraction
cert = caratheodory_certificate(family, data, test, 1)
print(f"certificate uses {cert.size} of {len(data)} examples "
      f"(dimension bound is {d}): indices {cert.indices}")
print("certificate JSON:", cert.to_json())

# the certificate alone already pins the prediction
sub = cert.subset()
print("agreement from the certificate alone:",
      in_robust_agreement(family, sub, 0, test, 1))

# ------------------------------------------------------------ infeasible side
outside = vpoint(*(-np.asarray(test.vector)))
instance = ConicInstance(tuple(map(tuple, signed)), outside.vector)
sol = conic_membership(instance)
print(f"\nmirrored test point feasible: {sol.feasible}")
w = np.asarray(sol.separator)
print("separating direction w: w.z_i >= 0 for all generators, w.x < 0:",
      float(np.min(signed @ w)) >= -1e-8, float(w @ outside.as_array()) < 0)

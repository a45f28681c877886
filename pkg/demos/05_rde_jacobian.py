"""Differential equations driven by lifted paths, and the flow Jacobian.

The depth-L Euler scheme steps the state by iterated directional
derivatives contracted against the increment's tensor levels; the Jacobian
of the flow solves the augmented system on (y, J).
"""

import numpy as np
from scipy.linalg import expm

import roughtail as rt
from roughtail.rough_path import PiecewiseLinearPath

t = np.linspace(0, 1, 65)
driver = PiecewiseLinearPath(t, (np.sin(2 * np.pi * t) + 0.4 * t)[:, None])
x = rt.lift(driver, 2)

# scalar equation dy = y dx: the solution is the exponential of the driver
fields = rt.linear_fields(np.array([[[1.0]]]))
traj = rt.solve_rde(x, fields, np.array([1.0]), substeps=32)
print("y_T:", traj.final[0], " exact:", np.exp(driver.values[-1, 0]))

# matrix case: the Jacobian of a linear system is a matrix exponential
a = np.array([[[0.3, -0.6], [0.4, 0.2]]])
lin = rt.linear_fields(a)
jtraj = rt.jacobian_flow(x, lin, np.array([1.0, 0.0]), substeps=32)
inc = driver.values[-1, 0] - driver.values[0, 0]
print("\nJacobian at T:\n", jtraj.jacobians[-1])
print("matrix exponential:\n", expm(a[0] * inc))
print("sup_t |J_t| (operator norm):", jtraj.sup_jacobian_norm())

# nonlinear fields: the Jacobian column tracks a finite difference of the flow
rng = np.random.default_rng(1)
poly = rt.polynomial_fields(c1=0.4 * rng.standard_normal((1, 2, 2)),
                            c2=0.1 * rng.standard_normal((1, 2, 2, 2)))
y0 = np.array([0.5, -0.2])
jp = rt.jacobian_flow(x, poly, y0, substeps=32)
eps = 1e-5
fd = (rt.solve_rde(x, poly, y0 + eps * np.array([1, 0]), substeps=32).final
      - rt.solve_rde(x, poly, y0 - eps * np.array([1, 0]), substeps=32).final) / (2 * eps)
print("\nfirst Jacobian column:", jp.jacobians[-1][:, 0])
print("finite difference:     ", fd)

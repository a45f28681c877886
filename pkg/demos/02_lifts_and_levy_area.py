"""Lifting sampled paths and reading off enclosed areas.

The lift of a piecewise-linear path stores its iterated integrals exactly;
the antisymmetric part of level two is the signed (Levy) area.
"""

import numpy as np

import roughtail as rt
from roughtail.rough_path import PiecewiseLinearPath

# the unit square traversed counterclockwise: zero displacement, area one
corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
square = PiecewiseLinearPath(np.linspace(0, 1, 5), corners)
x = rt.lift(square, 2)
g = x.increment(0, 4)
area = 0.5 * (g.levels[1][0, 1] - g.levels[1][1, 0])
print("square loop: displacement", g.levels[0], " area", area)

# the parabola (t, t^2): area works out to 1/6
m = 2048
t = np.linspace(0, 1, m + 1)
par = rt.lift(PiecewiseLinearPath(t, np.stack([t, t ** 2], axis=1)), 2)
gp = par.increment(0, m)
print("parabola area:", 0.5 * (gp.levels[1][0, 1] - gp.levels[1][1, 0]),
      "(exact: 1/6)")

# translation by a finite-variation path equals lifting the sum
rng = np.random.default_rng(0)
times = np.linspace(0, 1, 33)
xp = PiecewiseLinearPath(times, np.cumsum(rng.standard_normal((33, 2)), 0))
h = PiecewiseLinearPath(times, np.cumsum(rng.standard_normal((33, 2)), 0))
lhs = rt.translate(rt.lift(xp, 3), h)
rhs = rt.lift(xp + h, 3)
print("translate vs lift-of-sum, worst level-3 entry:",
      np.abs(lhs.level3 - rhs.level3).max())

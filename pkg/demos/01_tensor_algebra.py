"""Group elements of the truncated tensor algebra.

Build signature-like values, compose them with the truncated tensor
product, and look at homogeneous norms and dilations.
"""

import numpy as np

import roughtail as rt

# a single linear segment lifts to its tensor exponential
v = np.array([1.0, -0.5])
g = rt.segment_exp(v, 3)
print("level 1:", g.levels[0])
print("level 2 (v (x) v / 2):\n", g.levels[1])

# composing two segments: the product is the signature of the concatenation
w = np.array([0.25, 2.0])
gw = rt.segment_exp(w, 3)
prod = rt.mul(g, gw)
print("\nconcatenated level 1 (v + w):", prod.levels[0])
print("level-2 cross term is v (x) w on top of the two self-halves:")
print(prod.levels[1] - 0.5 * np.outer(v, v) - 0.5 * np.outer(w, w))

# inverses undo composition exactly (truncated group structure)
undo = rt.mul(prod, rt.inverse(gw))
print("\nafter multiplying by the inverse of the second segment:")
print("level-1 difference from the first segment:",
      np.abs(undo.levels[0] - g.levels[0]).max())

# the homogeneous norm scales degree-1 under dilation: level k picks up lam^k
lam = 3.0
print("\nnorm:", rt.homogeneous_norm(g))
print("norm after dilation by", lam, ":", rt.homogeneous_norm(rt.dilate(g, lam)))

"""Greedy threshold partitions and the accumulated local variation.

Starting from the left end, stop each time the control from the previous
stop reaches alpha; the interior stop count N and the best constrained
dissection mass M obey the deterministic bound M <= (2N + 1) alpha for
every path and every alpha.
"""

import numpy as np

import roughtail as rt
from roughtail.gaussian import bm_model, sample_path

model = bm_model(dim=1, n=256)
x = rt.lift(sample_path(model, seed=3, index=0), 2)
ctrl = rt.control(x, 2.5)
total = ctrl.total()
print("total control:", total)

for frac in (0.5, 0.2, 0.08):
    alpha = frac * total
    gp = rt.greedy_partition(ctrl, alpha)
    lv = rt.accumulated_local_variation(ctrl, alpha)
    rep = rt.check_m_n_inequality(ctrl, alpha)
    print(f"\nalpha = {alpha:.4f}")
    print(f"  greedy stops: N = {gp.count}, taus = "
          f"{np.array2string(gp.taus, precision=4)}")
    print(f"  interior interval controls (all == alpha to 1e-6 rel): "
          f"{np.array2string(gp.interval_controls[:gp.count], precision=6)}")
    print(f"  M = {lv.value:.4f}  bound (2N+1) alpha = {rep.bound:.4f}  "
          f"pass = {rep.passed}")

# M saturates at the total once alpha is large enough, and is monotone
alphas = np.linspace(0.1, 1.1, 6) * total
values = [rt.accumulated_local_variation(ctrl, a).value for a in alphas]
print("\nM as alpha grows:", np.array2string(np.array(values), precision=4))
print("total control:   ", round(total, 4))

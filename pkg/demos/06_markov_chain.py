"""The two-state caricature of everything else in this library.

A Markov chain on {l, r} with switching probabilities eps_lr, eps_rl has the
stationary measure alpha delta_l + (1 - alpha) delta_r with

    alpha / (1 - alpha) = eps_rl / eps_lr

(the weight ratio is the INVERSE ratio of the hole sizes), and its second
eigenvalue is rho = 1 - eps_lr - eps_rl.  The interval-map machinery in the
rest of this library reproduces exactly this picture with ergodic densities
in place of point masses and hole measures in place of switching
probabilities.
"""

import numpy as np

from metamap.metastability import markov_stationary
from metamap.spectral import invariant_density, second_eigenpair
from metamap.map_model import Interval
from metamap.transfer_operator import UlamMatrix

print(f"{'eps_lr':>8} {'eps_rl':>8} {'alpha':>8} {'rho':>8}")
for eps_lr, eps_rl in ((0.01, 0.03), (0.03, 0.01), (0.02, 0.02), (0.0, 0.03)):
    alpha, rho = markov_stationary(eps_lr, eps_rl)
    print(f"{eps_lr:8.3f} {eps_rl:8.3f} {alpha:8.3f} {rho:8.3f}")

# the closed form agrees with the generic spectral machinery run on the
# 2x2 transition matrix
eps_lr, eps_rl = 0.01, 0.03
P = UlamMatrix.from_matrix(np.array([[1 - eps_lr, eps_lr],
                                     [eps_rl, 1 - eps_rl]]))
res = invariant_density(P, tol=1e-12)
rho_num, psi = second_eigenpair(P, res.phi, Interval(0, 0.5), tol=1e-12)
alpha_num = float(res.phi.values[0] / P.n)
alpha, rho = markov_stationary(eps_lr, eps_rl)
print(f"\npower iteration on the 2x2 matrix: alpha = {alpha_num:.12f} "
      f"(closed form {alpha})")
print(f"deflated iteration:               rho = {rho_num:.12f} "
      f"(closed form {rho})")
print(f"second eigenvector cell values: {psi.values} "
      "(the density analog of (delta_l - delta_r)/2)")

# stationarity is flux balance: alpha eps_lr = (1 - alpha) eps_rl
print(f"\nflux check: alpha*eps_lr = {alpha * eps_lr:.6f} "
      f"= (1-alpha)*eps_rl = {(1 - alpha) * eps_rl:.6f}")

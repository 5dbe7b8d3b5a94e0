"""Leading and second eigenpairs of Ulam matrices, and open-system escape rates.

The primary solver is power iteration: plain (with per-step mass
renormalization) for the invariant density, deflated against the invariant
density for the second eigenpair.  A dense eigensolve (LAPACK, via
numpy.linalg.eig) doubles as cross-check oracle and fallback when iterates
fail to settle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from .map_model import Interval
from .transfer_operator import DensityGrid, UlamMatrix, cells_within

RESTART_SEED = 0x5EED
DENSE_FALLBACK_CAP = 4096


class SolverError(RuntimeError):
    """Iteration failed to converge within the allowed number of steps."""


class DegenerateSpectrumError(ValueError):
    """The requested eigenstructure does not exist (complex pair, zero gap...)."""


def _default_max_iter(n: int) -> int:
    # 10 n log n scales with grid size; the floor keeps small matrices (whose
    # spectral gap need not shrink with n) convergent.
    return max(int(10 * n * max(math.log(n), 1.0)), 20000)


def _err_estimate(diff: float, prev_diff: float) -> float:
    """Distance-to-limit estimate from two successive step sizes.

    For a linearly converging iteration with rate r, the remaining error is
    about diff * r / (1 - r); r is estimated by the step ratio.
    """
    if diff == 0.0:
        return 0.0
    if prev_diff <= 0.0 or diff >= prev_diff:
        return math.inf
    r = diff / prev_diff
    return diff * r / (1.0 - r)


@dataclass(frozen=True)
class InvariantDensityResult:
    phi: DensityGrid
    leading_simple: bool
    residual: float
    iterations: int
    probe_phi: Optional[DensityGrid] = None
    probe_distance: float = 0.0


def power_fixed_density(P: UlamMatrix, start: np.ndarray, tol: float,
                         max_iter: int) -> tuple[np.ndarray, int]:
    """Iterate the transfer matrix from a nonnegative start until the iterate
    is within ~tol (L1) of the fixed density, renormalizing mass each step."""
    d = start / np.mean(start)
    prev_diff = math.inf
    for k in range(1, max_iter + 1):
        nxt = P.apply(d)
        nxt /= np.mean(nxt)
        diff = float(np.mean(np.abs(nxt - d)))
        d = nxt
        if diff <= tol and _err_estimate(diff, prev_diff) <= tol:
            return d, k
        prev_diff = diff
    raise SolverError(
        f"power iteration did not converge in {max_iter} steps "
        f"(last step change {prev_diff:.3g})")


def invariant_density(P: UlamMatrix, tol: float = 1e-10,
                      max_iter: Optional[int] = None,
                      probe_start: Optional[DensityGrid] = None) -> InvariantDensityResult:
    """Fixed density of the Ulam matrix with a simplicity probe.

    Runs power iteration twice: from the uniform density and from an
    independent start (by default the left half-interval indicator).  If the
    two limits disagree by more than 10*tol in L1 the leading eigenvalue is
    reported as non-simple and both limits are returned.
    """
    n = P.n
    if max_iter is None:
        max_iter = _default_max_iter(n)
    if probe_start is None:
        probe_start = DensityGrid.indicator(Interval(0.0, 0.5), n, normalize=True)
    phi1, it1 = power_fixed_density(P, np.ones(n), tol, max_iter)
    phi2, it2 = power_fixed_density(P, probe_start.values.copy(), tol, max_iter)
    dist = float(np.mean(np.abs(phi1 - phi2)))
    simple = dist <= 10.0 * tol
    residual = float(np.mean(np.abs(P.apply(phi1) - phi1)))
    out1 = DensityGrid(n, phi1)
    if simple:
        return InvariantDensityResult(phi=out1, leading_simple=True,
                                      residual=residual, iterations=it1 + it2)
    return InvariantDensityResult(phi=out1, leading_simple=False,
                                  residual=residual, iterations=it1 + it2,
                                  probe_phi=DensityGrid(n, phi2), probe_distance=dist)


def dense_top_eigenpairs(P: UlamMatrix, k: int = 2) -> list[tuple[complex, np.ndarray]]:
    """Top-k left eigenpairs by modulus from a dense eigensolve (oracle path)."""
    vals, vecs = np.linalg.eig(P.to_dense().T)
    order = np.argsort(-np.abs(vals))
    out = []
    for idx in order[:k]:
        out.append((complex(vals[idx]), vecs[:, idx]))
    return out


def _finalize_psi(values: np.ndarray, b_left: float, n: int) -> DensityGrid:
    """Apply the sign convention (positive integral over [0, b]) and L1-normalize."""
    g = DensityGrid(n, values)
    if g.integrate(0.0, b_left) < 0.0:
        g = DensityGrid(n, -g.values)
    norm = g.l1_norm()
    if norm <= 0:
        raise DegenerateSpectrumError("second eigenvector collapsed to zero")
    return DensityGrid(n, g.values / norm)


def second_eigenpair(P: UlamMatrix, phi: DensityGrid, I_l: Interval,
                     tol: float = 1e-10,
                     max_iter: Optional[int] = None) -> tuple[float, DensityGrid]:
    """Second eigenvalue and eigenvector of the Ulam matrix.

    Deflated power iteration: each step projects out the invariant-density
    direction, so iterates stay in the mass-zero subspace where the second
    eigenvalue dominates.  The eigenvector is L1-normalized with positive
    integral over I_l; its own integral vanishes by construction.

    Falls back to a dense eigensolve (n <= 4096) when iterates oscillate,
    and raises if the second eigenvalue turns out to be complex.
    """
    n = P.n
    if max_iter is None:
        max_iter = _default_max_iter(n)
    phi_v = phi.values / phi.mass()

    w = DensityGrid.indicator(I_l, n).values - DensityGrid.indicator(Interval(I_l.hi, 1.0), n).values
    w = w - np.mean(w) * phi_v
    if np.mean(np.abs(w)) < 1e-14:
        rng = np.random.default_rng(RESTART_SEED)
        w = rng.standard_normal(n)
        w = w - np.mean(w) * phi_v
    w /= np.mean(np.abs(w))

    rho = 0.0
    prev_diff = math.inf
    stall: list[float] = []
    for k in range(1, max_iter + 1):
        v = P.apply(w)
        v = v - np.mean(v) * phi_v
        denom = float(np.dot(w, w))
        rho_k = float(np.dot(v, w)) / denom
        nrm = np.mean(np.abs(v))
        if nrm <= 1e-300:
            raise DegenerateSpectrumError("iterate collapsed; no second eigenvalue found")
        v /= nrm
        if np.dot(v, w) < 0:
            v = -v
        diff = float(np.mean(np.abs(v - w)))
        w = v
        rho = rho_k
        if diff <= tol and _err_estimate(diff, prev_diff) <= tol:
            psi = _finalize_psi(w, I_l.hi, n)
            return rho, psi
        prev_diff = diff
        stall.append(diff)
        if k >= 400 and diff > 0.5 * stall[k - 200]:
            break  # oscillating; go dense
    return _second_eigenpair_dense(P, phi_v, I_l)


def _second_eigenpair_dense(P: UlamMatrix, phi_v: np.ndarray,
                            I_l: Interval) -> tuple[float, DensityGrid]:
    n = P.n
    if n > DENSE_FALLBACK_CAP:
        raise SolverError(
            f"second eigenpair iteration oscillates and n={n} exceeds the dense "
            f"fallback cap {DENSE_FALLBACK_CAP}")
    pairs = dense_top_eigenpairs(P, k=2)
    lam2, vec = pairs[1]
    if abs(lam2.imag) > 1e-8 * max(1.0, abs(lam2)):
        raise DegenerateSpectrumError(
            f"second eigenvalue {lam2} is complex; outside the metastable regime")
    vals = np.real(vec)
    vals = vals - np.mean(vals) * phi_v
    psi = _finalize_psi(vals, I_l.hi, n)
    return lam2.real, psi


@dataclass(frozen=True)
class SpectralReport:
    """Leading eigenpair, second eigenpair and their residuals for one matrix."""

    phi: DensityGrid
    rho: Optional[float]
    psi: Optional[DensityGrid]
    leading_simple: bool
    residual_phi: float
    residual_psi: Optional[float]


def spectral_report(P: UlamMatrix, I_l: Interval, tol: float = 1e-10,
                    with_second: bool = True) -> SpectralReport:
    """Convenience pipeline: invariant density, simplicity probe, second pair."""
    inv = invariant_density(P, tol=tol,
                            probe_start=DensityGrid.indicator(I_l, P.n, normalize=True))
    rho = psi = res_psi = None
    if with_second and inv.leading_simple:
        rho, psi = second_eigenpair(P, inv.phi, I_l, tol=tol)
        res_psi = float(np.mean(np.abs(P.apply(psi.values) - rho * psi.values)))
    return SpectralReport(phi=inv.phi, rho=rho, psi=psi,
                          leading_simple=inv.leading_simple,
                          residual_phi=inv.residual, residual_psi=res_psi)


@dataclass(frozen=True)
class EscapeReport:
    """Escape rate of an open system next to the measure of its hole."""

    rate: float
    hole_measure: float
    ratio: float
    eigenvalue: float


def escape_rate(P: UlamMatrix, hole_cells, sub_domain: Interval,
                hole_measure: Optional[float] = None,
                tol: float = 1e-12,
                max_iter: Optional[int] = None) -> EscapeReport:
    """Exponential escape rate through a hole in an invariant subinterval.

    Rows and columns are restricted to the cells of ``sub_domain`` (which must
    be invariant: restricted rows must still sum to 1), the hole columns are
    zeroed, and the leading eigenvalue of the resulting substochastic matrix
    is found by power iteration on nonnegative vectors.  rate = -log(lambda).

    ``hole_measure`` should be the invariant measure of the true hole; when
    omitted it is approximated by the closed-system stationary measure of the
    hole cells.
    """
    sub = cells_within(sub_domain, P.n)
    if sub.size == 0:
        raise ValueError("sub_domain contains no whole cells")
    hole_cells = np.asarray(sorted(set(int(c) for c in hole_cells)), dtype=int)
    pos_of = {int(c): i for i, c in enumerate(sub)}
    missing = [int(c) for c in hole_cells if int(c) not in pos_of]
    if missing:
        raise ValueError(f"hole cells {missing[:4]}... outside the sub-domain")
    hole_pos = np.array([pos_of[int(c)] for c in hole_cells], dtype=int)

    Q_closed = P.restrict(sub)
    rs = np.asarray(Q_closed.sum(axis=1)).ravel()
    if np.max(np.abs(rs - 1.0)) > 1e-9:
        raise ValueError("sub_domain is not invariant under the map")

    m = sub.size
    if max_iter is None:
        max_iter = _default_max_iter(max(m, 2))

    if hole_measure is None:
        pi, _ = power_fixed_density(UlamMatrix(n=m, matrix=Q_closed),
                                     np.ones(m), 1e-12, max_iter)
        hole_measure = float(np.sum(pi[hole_pos]) / m)

    if hole_pos.size == 0:
        return EscapeReport(rate=0.0, hole_measure=hole_measure,
                            ratio=math.nan, eigenvalue=1.0)
    if hole_pos.size == m:
        raise ValueError("hole covers the whole sub-domain; escape rate undefined")

    keep = np.ones(m)
    keep[hole_pos] = 0.0
    if sparse.issparse(Q_closed):
        Q = (Q_closed @ sparse.diags(keep)).tocsr()
    else:
        Q = Q_closed * keep[np.newaxis, :]

    w = keep / np.sum(keep)
    lam_prev = math.inf
    lam = 1.0
    for _ in range(max_iter):
        v = np.asarray(w @ Q).ravel()
        s = float(np.sum(v))
        if s <= 0.0:
            raise DegenerateSpectrumError("all mass escapes in one step")
        lam = s / float(np.sum(w))
        v /= s
        diff = float(np.sum(np.abs(v - w)))
        w = v
        if abs(lam - lam_prev) <= tol * max(lam, 1e-300) and diff <= 1e-10:
            break
        lam_prev = lam
    else:
        raise SolverError("escape-rate iteration did not converge")
    return EscapeReport(rate=-math.log(lam), hole_measure=hole_measure,
                        ratio=hole_measure / -math.log(lam) if lam < 1.0 else math.inf,
                        eigenvalue=lam)

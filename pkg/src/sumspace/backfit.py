"""Alternating-projection (backfitting) solver with convergence certificates.

Splitting the empirical projection onto range(Z1) + range(Z2) into the sweep
v1 <- P1(v - v2), v2 <- P2(v - v1) converges geometrically at rate rho^2,
where rho is the cosine of the minimal angle between the two column spaces.
The solver certifies this: it reports the empirical rho, the per-sweep error
against the direct least-squares decomposition, and the a-priori bound
rho^(2k+1)/(1-rho^2) * ||v||_n that the errors must respect.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, svdvals

from .errors import NonConvergenceError, RankDeficiencyError

_COLLINEAR_GATE = 1e-8  # refuse when rho >= 1 - this
_RANK_RTOL = 1e-12


def _empirical_norm(u):
    return float(np.linalg.norm(u) / np.sqrt(u.shape[0]))


def _thin_q(Z, name):
    """Orthonormal basis of range(Z); errors out on numerically deficient columns."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[1] == 0:
        raise ValueError(f"{name} has no columns")
    q, r, _ = qr(Z, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag[0] == 0.0 or diag[-1] < _RANK_RTOL * diag[0]:
        raise RankDeficiencyError(
            f"{name} is numerically rank deficient "
            f"({Z.shape[1]} columns, diag ratio {diag[-1] / max(diag[0], 1e-300):.2e})"
        )
    return q


def empirical_rho(Z1, Z2):
    """Cosine of the minimal angle between the column spaces of Z1 and Z2.

    Largest singular value of B11^(-1/2) B12 B22^(-1/2) with B the empirical
    Gram of the stacked design, computed stably as svd(Q1^T Q2) from thin QR
    factors. Lies in [0, 1]; 1 means the spans intersect.
    """
    q1 = _thin_q(Z1, "Z1")
    q2 = _thin_q(Z2, "Z2")
    s = svdvals(q1.T @ q2)
    return float(np.clip(s[0], 0.0, 1.0)) if s.size else 0.0


@dataclass
class BackfitReport:
    """Convergence certificate for one backfit_decompose call.

    `sweep_errors[k]` is the empirical-norm distance of v1 after sweep k+1
    from the direct least-squares component; each is bounded by
    rho^(2k+1)/(1-rho^2) * norm_v. `certified_bound` is that bound evaluated
    at k = iterations - 2, which dominates `final_gap` whenever rho < 1.
    """

    iterations: int
    final_gap: float
    certified_bound: float
    empirical_rho: float
    norm_v: float
    sweep_errors: tuple = ()

    def error_bound(self, k):
        r = self.empirical_rho
        if r == 0.0:
            return 0.0 if k >= 0 else np.inf
        return r ** (2 * k + 1) / (1.0 - r * r) * self.norm_v


def backfit_decompose(Z1, Z2, v, tol=1e-10, max_iter=10_000):
    """Split v into v1 + v2 in range(Z1) + range(Z2) by alternating projections.

    Runs v1 <- P1(v - v2), v2 <- P2(v - v1) until the empirical norm of v1's
    change per sweep drops to tol * ||v||_n (at least two sweeps always run).
    Returns (v1, v2, BackfitReport). Blocks that are numerically collinear
    across each other (rho >= 1 - 1e-8) raise NonConvergenceError carrying
    rho; rank-deficient individual blocks raise RankDeficiencyError. Hitting
    max_iter only warns.
    """
    v = np.asarray(v, dtype=float).ravel()
    Z1 = np.atleast_2d(np.asarray(Z1, dtype=float))
    Z2 = np.atleast_2d(np.asarray(Z2, dtype=float))
    if Z1.shape[0] != v.shape[0] or Z2.shape[0] != v.shape[0]:
        raise ValueError("Z1, Z2, v disagree on the sample size")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    q1 = _thin_q(Z1, "Z1")
    q2 = _thin_q(Z2, "Z2")
    s = svdvals(q1.T @ q2)
    rho = float(np.clip(s[0], 0.0, 1.0)) if s.size else 0.0
    if rho >= 1.0 - _COLLINEAR_GATE:
        raise NonConvergenceError(
            f"column spaces nearly intersect (rho = {rho:.12f}); "
            "the backfit limit is not well defined",
            rho_hat=rho,
        )

    norm_v = _empirical_norm(v)
    threshold = tol * norm_v
    # direct joint solve, used only as the error reference for the certificate
    theta, *_ = np.linalg.lstsq(np.hstack([Z1, Z2]), v, rcond=None)
    v1_direct = Z1 @ theta[: Z1.shape[1]]

    v1 = np.zeros_like(v)
    v2 = np.zeros_like(v)
    errors = []
    gap = np.inf
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        v1_new = q1 @ (q1.T @ (v - v2))
        v2 = q2 @ (q2.T @ (v - v1_new))
        gap = _empirical_norm(v1_new - v1)
        v1 = v1_new
        errors.append(_empirical_norm(v1 - v1_direct))
        if sweeps >= 2 and gap <= threshold:
            break
    else:
        warnings.warn(
            f"backfit hit max_iter={max_iter} with rho={rho:.6f}, "
            f"last sweep change {gap:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )

    if rho == 0.0:
        certified = 0.0
    else:
        certified = rho ** (2 * sweeps - 3) / (1.0 - rho * rho) * norm_v
    report = BackfitReport(
        iterations=sweeps,
        final_gap=gap,
        certified_bound=certified,
        empirical_rho=rho,
        norm_v=norm_v,
        sweep_errors=tuple(errors),
    )
    return v1, v2, report


def trace_diagnostics(Z1, Z2):
    """(trace of P1 P2, operator norm of P2 P1 P2) for the two hat matrices.

    The first argument may carry the W1 design instead of V1's; the trace is
    then tr(P_W1 P_V2). Both quantities come from the thin factor M = Q1^T Q2:
    the trace is ||M||_F^2 and the operator norm is the top squared singular
    value, so no n x n matrix is ever formed.
    """
    q1 = _thin_q(Z1, "Z1")
    q2 = _thin_q(Z2, "Z2")
    m = q1.T @ q2
    trace = float(np.sum(m * m))
    s = svdvals(m)
    opnorm = float(np.clip(s[0], 0.0, 1.0)) ** 2 if s.size else 0.0
    rho_sq = opnorm
    if trace > rho_sq * q1.shape[1] + 1e-10:
        raise AssertionError(
            f"trace {trace:.6e} exceeds rho^2 * dim bound {rho_sq * q1.shape[1]:.6e}"
        )
    return trace, opnorm


def trace_inequalities_selftest(trials=10_000, max_dim=12, seed=0):
    """Max violation of the three trace inequalities over random matrix pairs.

    (i) tr(AB) = tr(BA); (ii) |tr(AB)| <= sqrt(tr(AA^T) tr(BB^T));
    (iii) |tr(AB)| <= ||A||_op tr(B) for symmetric PSD B. Returns the largest
    violation seen; anything above 1e-10 indicates a broken linear algebra
    stack rather than a failure of the inequalities.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        p = int(rng.integers(1, max_dim + 1))
        scale = float(np.exp(rng.uniform(-2.0, 2.0)))
        a = scale * rng.standard_normal((p, p))
        d = rng.standard_normal((p, p))
        c = rng.standard_normal((p, p))
        b = c.T @ c  # symmetric PSD

        t_ab, t_ba = np.trace(a @ d), np.trace(d @ a)
        worst = max(worst, abs(t_ab - t_ba))

        lhs = abs(np.trace(a @ d))
        rhs = np.sqrt(np.trace(a @ a.T) * np.trace(d @ d.T))
        worst = max(worst, lhs - rhs)

        lhs = abs(np.trace(a @ b))
        rhs = svdvals(a)[0] * np.trace(b)
        worst = max(worst, lhs - rhs)
    return float(worst)

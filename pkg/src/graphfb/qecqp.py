"""Globally solved quadratic programs with two quadratic equality constraints.

The problem is

    minimize x^T Q x  subject to  x^T x = 1,  x^T R x = 1,

with Q symmetric and R symmetric positive semidefinite whose spectrum
straddles 1 strictly (some eigenvalue below 1 and some above, none equal).
Under these assumptions the Lagrangian dual

    f(mu2) = -mu2 + lambda_min(Q + mu2 R)

is concave in the single variable mu2, its supergradients at mu2 are
v^T R v - 1 over unit eigenvectors v of the smallest eigenvalue, and a
maximizer yields a dual pair (mu1, mu2) with mu1 = -lambda_min(Q + mu2 R)
such that H = Q + mu1 I + mu2 R is positive semidefinite with a nontrivial
null space.  A feasible point inside that null space attains the dual value,
so the duality gap is zero and global optimality is certified by

    H >= 0,  H x ~ 0,  x^T x = 1,  x^T R x = 1,  x^T Q x = -mu1 - mu2.

The maximizer is found by bisection on the supergradient sign.  At kinks the
smallest eigenvalue is degenerate and the supergradient is an interval; the
bisection moves toward the side the whole interval lies on and stops when the
interval straddles zero or the bracket is narrower than the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EigensolverError, InputError, SolverError

__all__ = [
    "QecqpProblem",
    "DualPoint",
    "QecqpSolution",
    "dual_objective",
    "maximize_dual",
    "feasible_null_point",
    "solve",
    "oracle_min",
]

_SYM_TOL = 1e-12
_EIG_ONE_GAP = 1e-8


def _eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"symmetric eigendecomposition failed: {exc}") from exc


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


@dataclass(frozen=True, eq=False)
class QecqpProblem:
    """Validated problem data (Q, R)."""

    q: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float)
        r = np.asarray(self.r, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape != r.shape:
            raise InputError(f"Q and R must be square with equal shapes, got {q.shape} and {r.shape}")
        qs = max(1.0, float(np.abs(q).max(initial=0.0)))
        rs = max(1.0, float(np.abs(r).max(initial=0.0)))
        if float(np.abs(q - q.T).max(initial=0.0)) > _SYM_TOL * qs:
            raise InputError("Q is not symmetric")
        if float(np.abs(r - r.T).max(initial=0.0)) > _SYM_TOL * rs:
            raise InputError("R is not symmetric")
        ev = np.linalg.eigvalsh(_sym(r))
        if ev[0] < -1e-10 * rs:
            raise InputError(f"R is not positive semidefinite (lambda_min = {ev[0]:.3e})")
        gap = _EIG_ONE_GAP * rs
        if not (ev[0] < 1.0 - gap and ev[-1] > 1.0 + gap):
            raise InputError("spectrum of R must straddle 1 strictly (some eigenvalue below and some above)")
        if np.abs(ev - 1.0).min() <= gap:
            raise InputError("R has an eigenvalue at 1, which the dual approach excludes")
        object.__setattr__(self, "q", _sym(q))
        object.__setattr__(self, "r", _sym(r))

    @property
    def dim(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True, eq=False)
class DualPoint:
    """Dual maximizer with its certificate matrix H = Q + mu1 I + mu2 R."""

    mu1: float
    mu2: float
    fval: float
    h_matrix: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class QecqpSolution:
    """Certified global minimizer.

    Residuals: ``stationarity`` = ||H x||_2, ``unit_error`` = |x^T x - 1|,
    ``feas_error`` = |x^T R x - 1|.  ``gap`` is |x^T Q x - fval|.
    """

    x: np.ndarray
    objective: float
    dual: DualPoint
    stationarity: float
    unit_error: float
    feas_error: float
    gap: float


def _dual_eval(q: np.ndarray, r: np.ndarray, mu2: float) -> tuple[float, float, float]:
    """Dual value and the supergradient interval [g_lo, g_hi] at mu2."""
    w, v = _eigh(q + mu2 * r)
    lam = float(w[0])
    cluster_tol = 1e-9 * max(1.0, float(np.abs(w).max()))
    k = int(np.searchsorted(w, lam + cluster_tol, side="right"))
    vc = v[:, :k]
    m = _sym(vc.T @ r @ vc)
    if k == 1:
        g = float(m[0, 0]) - 1.0
        return -mu2 + lam, g, g
    d = np.linalg.eigvalsh(m)
    return -mu2 + lam, float(d[0]) - 1.0, float(d[-1]) - 1.0


def dual_objective(problem: QecqpProblem, mu2: float) -> tuple[float, float]:
    """Dual value f(mu2) = -mu2 + lambda_min(Q + mu2 R) and one supergradient.

    The supergradient returned is v^T R v - 1 for v a unit eigenvector of the
    smallest eigenvalue (the first one the eigensolver reports).
    """
    w, v = _eigh(problem.q + mu2 * problem.r)
    v0 = v[:, 0]
    return -mu2 + float(w[0]), float(v0 @ problem.r @ v0) - 1.0


def maximize_dual(
    problem: QecqpProblem,
    tol: float = 1e-10,
    trace: list[tuple[float, float]] | None = None,
) -> DualPoint:
    """Maximize the concave dual by safeguarded root finding on the supergradient.

    The initial bracket is +-(||Q||_2 + 1), widened by doubling until the
    supergradient changes sign across it, then narrowed with bracketed secant
    steps (Illinois weighting, bisection fallback).  Convergence is declared
    when the supergradient interval straddles zero within a small band (the
    kink case), or the bracket is narrower than ``tol`` with a supergradient
    small enough that a near-feasible null vector exists (the smooth case).
    ``trace``, if given, collects (mu2, f(mu2)) for every evaluation.
    """
    if tol <= 0:
        raise InputError(f"tolerance must be positive, got {tol}")
    q, r = problem.q, problem.r
    r_scale = max(1.0, float(np.linalg.norm(r, 2)))
    g_tol = 1e-13 * r_scale
    g_accept = 1e-8 * r_scale

    def ev(mu2: float) -> tuple[float, float, float]:
        fval, g_lo, g_hi = _dual_eval(q, r, mu2)
        if trace is not None:
            trace.append((mu2, fval))
        return fval, g_lo, g_hi

    width = float(np.linalg.norm(q, 2)) + 1.0
    lo, hi = -width, width
    _, g_lo_at_lo, g_hi_at_lo = ev(lo)
    for _ in range(80):
        if g_hi_at_lo >= 0:
            break
        hi = lo
        lo -= width
        width *= 2.0
        _, g_lo_at_lo, g_hi_at_lo = ev(lo)
    else:
        raise SolverError("dual bracket search failed on the left; no supergradient sign change")
    if g_lo_at_lo <= g_tol and g_hi_at_lo >= -g_tol:
        return _dual_point_at(q, r, problem.dim, lo)
    _, g_lo_at_hi, g_hi_at_hi = ev(hi)
    for _ in range(80):
        if g_lo_at_hi <= 0:
            break
        lo = hi
        hi += width
        width *= 2.0
        _, g_lo_at_hi, g_hi_at_hi = ev(hi)
    else:
        raise SolverError("dual bracket search failed on the right; no supergradient sign change")
    if g_lo_at_hi <= g_tol and g_hi_at_hi >= -g_tol:
        return _dual_point_at(q, r, problem.dim, hi)

    # Bracket invariant: some supergradient is > 0 at lo and < 0 at hi.
    f_lo, f_hi = g_hi_at_lo, g_lo_at_hi
    eps = float(np.finfo(float).eps)
    mu2 = 0.5 * (lo + hi)
    side = 0
    for _ in range(300):
        mu2 = 0.5 * (lo + hi)
        if hi - lo <= 16.0 * eps * (1.0 + abs(mu2)):
            break
        if f_hi < f_lo:
            secant = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
            if lo < secant < hi:
                mu2 = secant
        _, g_lo, g_hi = ev(mu2)
        if g_lo <= g_tol and g_hi >= -g_tol:
            break
        if max(abs(g_lo), abs(g_hi)) <= g_accept and hi - lo <= tol * (1.0 + abs(mu2)):
            break
        if g_lo > 0.0:
            lo, f_lo = mu2, g_lo
            if side == 1:
                f_hi *= 0.5
            side = 1
        else:
            hi, f_hi = mu2, g_hi
            if side == -1:
                f_lo *= 0.5
            side = -1
    else:
        raise SolverError("dual root finding failed to converge")
    return _dual_point_at(q, r, problem.dim, mu2)


def _dual_point_at(q: np.ndarray, r: np.ndarray, dim: int, mu2: float) -> DualPoint:
    lam = float(np.linalg.eigvalsh(q + mu2 * r)[0])
    mu1 = -lam
    h = _sym(q + mu1 * np.eye(dim) + mu2 * r)
    return DualPoint(mu1=mu1, mu2=mu2, fval=-mu2 + lam, h_matrix=h)


def _null_point_from_eigh(
    w: np.ndarray,
    v: np.ndarray,
    r: np.ndarray,
    tol_null: float,
) -> np.ndarray:
    """Feasible point from the near-null eigenvectors of H.

    Starts with all eigenvectors below the null threshold and enlarges with
    the next-smallest ones until the eigenvalues of B^T R B straddle 1, then
    interpolates between the straddling pair to hit x^T R x = 1 exactly.
    """
    dim = len(w)
    threshold = tol_null * max(1.0, float(w[-1]))
    k = max(1, int(np.searchsorted(w, threshold, side="right")))
    # Direct-accept band for a single near-feasible eigenvector.  Wide enough
    # to absorb the solver's supergradient residual at a smooth dual maximum,
    # still well inside the feasibility certificate.
    one_tol = 1e-7
    while k <= dim:
        b = v[:, :k]
        m = _sym(b.T @ r @ b)
        d, z = _eigh(m)
        near = np.abs(d - 1.0) <= one_tol
        if near.any():
            idx = int(np.nonzero(near)[0][0])
            return b @ z[:, idx]
        below = np.nonzero(d < 1.0)[0]
        above = np.nonzero(d > 1.0)[0]
        if len(below) and len(above):
            i_lo = int(below[-1])
            i_hi = int(above[0])
            d_lo, d_hi = float(d[i_lo]), float(d[i_hi])
            alpha = np.sqrt((1.0 - d_lo) / (d_hi - d_lo))
            beta = np.sqrt(1.0 - alpha**2)
            return b @ (alpha * z[:, i_hi] + beta * z[:, i_lo])
        k += 1
    raise SolverError("could not reach the feasibility constraint inside the null space of H")


def feasible_null_point(h: np.ndarray, r: np.ndarray, tol_null: float = 1e-8) -> np.ndarray:
    """Unit vector x in the (near-)null space of H with x^T R x = 1."""
    h = _sym(np.asarray(h, dtype=float))
    r = _sym(np.asarray(r, dtype=float))
    if h.shape != r.shape or h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InputError(f"H and R must be square with equal shapes, got {h.shape} and {r.shape}")
    w, v = _eigh(h)
    return _null_point_from_eigh(w, v, r, tol_null)


def _fix_sign(x: np.ndarray) -> np.ndarray:
    # Lowest index within a relative band of the max magnitude, so that
    # rounding noise cannot flip the convention on tied entries.
    a = np.abs(x)
    k = int(np.nonzero(a >= a.max() * (1.0 - 1e-9))[0][0])
    return -x if x[k] < 0 else x


def solve(
    problem: QecqpProblem,
    tol: float = 1e-10,
    trace: list[tuple[float, float]] | None = None,
) -> QecqpSolution:
    """Globally solve the problem and certify optimality.

    Raises SolverError if any certificate residual exceeds its threshold
    (thresholds scale with ``tol``; at the default they are 1e-7 relative for
    positive semidefiniteness of H, 1e-6 relative for stationarity and the
    duality gap, 1e-8 for the unit norm, and 1e-6 for x^T R x - 1).
    """
    dual = maximize_dual(problem, tol=tol, trace=trace)
    w, v = _eigh(dual.h_matrix)
    x = _fix_sign(_null_point_from_eigh(w, v, problem.r, tol_null=1e-8))

    h_scale = 1.0 + max(0.0, float(w[-1]), -float(w[0]))
    objective = float(x @ problem.q @ x)
    stationarity = float(np.linalg.norm(dual.h_matrix @ x))
    unit_error = abs(float(x @ x) - 1.0)
    feas_error = abs(float(x @ problem.r @ x) - 1.0)
    gap = abs(objective - dual.fval)

    checks = [
        (float(w[0]) >= -1e3 * tol * h_scale, f"H not positive semidefinite: lambda_min = {float(w[0]):.3e}"),
        (stationarity <= 1e4 * tol * h_scale, f"stationarity residual {stationarity:.3e} too large"),
        (unit_error <= 1e2 * tol, f"unit-norm residual {unit_error:.3e} too large"),
        (feas_error <= 1e4 * tol, f"feasibility residual {feas_error:.3e} too large"),
        (gap <= 1e4 * tol * (1.0 + abs(objective)), f"duality gap {gap:.3e} too large"),
    ]
    for ok, msg in checks:
        if not ok:
            raise SolverError(f"optimality certificate failed: {msg}")
    return QecqpSolution(
        x=x,
        objective=objective,
        dual=dual,
        stationarity=stationarity,
        unit_error=unit_error,
        feas_error=feas_error,
        gap=gap,
    )


def oracle_min(problem: QecqpProblem, samples: int = 100_000, seed: int = 0) -> float:
    """Monte Carlo upper bound on the optimum, independent of the solver.

    Requires R to have eigenvalues exactly in {0, 2}.  Each standard normal
    draw is split into its components in the two eigenspaces and each
    component is rescaled to squared norm 1/2; the result satisfies both
    constraints exactly, so the sample minimum of x^T Q x bounds the true
    minimum from above.
    """
    if samples < 1:
        raise InputError(f"need at least one sample, got {samples}")
    ev, vec = _eigh(problem.r)
    scale = max(1.0, float(np.abs(ev).max()))
    at0 = np.abs(ev) <= 1e-8 * scale
    at2 = np.abs(ev - 2.0) <= 1e-8 * scale
    if not (at0.any() and at2.any() and (at0 | at2).all()):
        raise InputError("oracle requires R eigenvalues to be exactly {0, 2}")
    p0 = vec[:, at0]
    p2 = vec[:, at2]
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, problem.dim))
    c0 = z @ p0
    c2 = z @ p2
    n0 = np.linalg.norm(c0, axis=1)
    n2 = np.linalg.norm(c2, axis=1)
    bad = (n0 < 1e-12) | (n2 < 1e-12)
    while bad.any():
        z = rng.standard_normal((int(bad.sum()), problem.dim))
        c0[bad] = z @ p0
        c2[bad] = z @ p2
        n0[bad] = np.linalg.norm(c0[bad], axis=1)
        n2[bad] = np.linalg.norm(c2[bad], axis=1)
        bad = (n0 < 1e-12) | (n2 < 1e-12)
    x = (c0 / (np.sqrt(2.0) * n0[:, None])) @ p0.T + (c2 / (np.sqrt(2.0) * n2[:, None])) @ p2.T
    vals = np.einsum("ij,jk,ik->i", x, problem.q, x)
    return float(vals.min())

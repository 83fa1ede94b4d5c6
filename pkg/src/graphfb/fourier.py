"""Orthonormal graph Fourier bases adapted to a two-channel sampling pattern.

Given a Laplacian L and a sign vector s (J = diag(s)) from a sampling
pattern, the basis U is built so that J U = U Phi for a symmetric signed
permutation Phi: flipping the signs of one channel permutes basis vectors.
Columns come in pairs (u, Ju) where u minimizes the smoothness u^T L u over
unit vectors of the current complement subspace subject to u^T J u = 0, a
problem solved globally as a two-constraint quadratic program after
projecting onto the complement (Q = A^T L A, R = A^T J A + I).  When the
complement becomes J-invariant with J acting as +I or -I on it, its
smoothness eigenvectors complete the basis and satisfy Ju = +-u.  Columns
are finally sorted by increasing smoothness (stable, so pair discovery order
breaks ties) and Phi is read off by rounding U^T J U.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import qecqp
from .errors import InputError, NumericalError
from .graphs import as_signal
from .sampling import SamplingPattern

__all__ = [
    "SubspaceClass",
    "SignedPermutation",
    "FourierBasis",
    "classify_subspace",
    "complement_basis",
    "compute_basis",
    "transform",
]


class SubspaceClass(enum.Enum):
    MIXED = "mixed"
    ALL_PLUS = "all_plus"
    ALL_MINUS = "all_minus"


@dataclass(frozen=True, eq=False)
class SignedPermutation:
    """Symmetric signed involution: entry signs[i] at (i, perm[i]).

    perm is an involution and signs are +-1 with signs[perm] == signs, which
    makes the matrix symmetric and equal to its own inverse.
    """

    perm: np.ndarray
    signs: np.ndarray

    def __post_init__(self) -> None:
        perm = np.asarray(self.perm, dtype=int)
        signs = np.asarray(self.signs, dtype=int)
        n = perm.shape[0]
        if perm.ndim != 1 or signs.shape != (n,):
            raise InputError("perm and signs must be vectors of equal length")
        if sorted(perm.tolist()) != list(range(n)):
            raise InputError("perm is not a permutation")
        if not np.array_equal(perm[perm], np.arange(n)):
            raise InputError("perm is not an involution")
        if not np.all(np.abs(signs) == 1):
            raise InputError("signs must be +-1")
        if not np.array_equal(signs[perm], signs):
            raise InputError("signs must agree across each pair")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @property
    def n(self) -> int:
        return len(self.perm)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Matrix-vector product Phi v."""
        v = as_signal(v, self.n)
        return self.signs * v[self.perm]

    def apply_abs(self, v: np.ndarray) -> np.ndarray:
        """Product |Phi| v, the unsigned permutation."""
        v = as_signal(v, self.n)
        return v[self.perm]

    def as_matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[np.arange(self.n), self.perm] = self.signs
        return m


@dataclass(frozen=True, eq=False)
class FourierBasis:
    """Orthonormal basis with the channel-flip folding property.

    ``u`` holds the basis columns ordered by ``energies`` (ascending),
    ``phi`` satisfies J U = U Phi, and ``pair_tags`` marks which pair of the
    construction each column came from (-1 for completion columns).
    """

    u: np.ndarray = field(repr=False)
    energies: np.ndarray
    phi: SignedPermutation
    pattern: SamplingPattern
    pair_tags: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.u.shape[0]


def classify_subspace(a: np.ndarray, sign: np.ndarray, tol: float = 1e-8) -> SubspaceClass:
    """Classify how J = diag(sign) acts on the span of the columns of a.

    The span must be J-invariant, equivalently every eigenvalue of A^T J A
    is +-1 within ``tol``.  Returns ALL_PLUS / ALL_MINUS when J fixes /
    negates the whole span, MIXED when both eigenvalues occur.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] < 1:
        raise InputError(f"need at least one column to classify, got shape {a.shape}")
    t = a.T @ (sign[:, None] * a)
    ev = np.linalg.eigvalsh(0.5 * (t + t.T))
    if np.abs(np.abs(ev) - 1.0).max() > tol:
        raise NumericalError("subspace is not invariant under the channel sign flip")
    if ev[0] > 0:
        return SubspaceClass.ALL_PLUS
    if ev[-1] < 0:
        return SubspaceClass.ALL_MINUS
    return SubspaceClass.MIXED


def complement_basis(u_built: np.ndarray | None, n: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the built columns.

    Computed from a full singular value decomposition, so the returned
    columns are orthogonal to the built ones at machine precision.
    """
    if u_built is None or u_built.shape[1] == 0:
        return np.eye(n)
    if u_built.shape[0] != n:
        raise InputError(f"built columns have {u_built.shape[0]} rows, expected {n}")
    m = u_built.shape[1]
    if m >= n:
        return np.zeros((n, 0))
    left, _, _ = np.linalg.svd(u_built, full_matrices=True)
    return left[:, m:]


def _fix_sign(u: np.ndarray) -> np.ndarray:
    # Lowest index within a relative band of the max magnitude, so that
    # rounding noise cannot flip the convention on tied entries.
    a = np.abs(u)
    k = int(np.nonzero(a >= a.max() * (1.0 - 1e-9))[0][0])
    return -u if u[k] < 0 else u


def _round_signed_permutation(t: np.ndarray, tol: float = 1e-6) -> SignedPermutation:
    n = t.shape[0]
    perm = np.full(n, -1, dtype=int)
    signs = np.zeros(n, dtype=int)
    for i in range(n):
        hits = np.nonzero(np.abs(t[i]) >= 0.5)[0]
        if len(hits) != 1:
            raise NumericalError(f"row {i} of U^T J U does not round to a signed permutation")
        j = int(hits[0])
        perm[i] = j
        signs[i] = 1 if t[i, j] > 0 else -1
    phi = SignedPermutation(perm, signs)
    residual = float(np.abs(t - phi.as_matrix()).max())
    if residual > tol:
        raise NumericalError(f"U^T J U deviates from a signed permutation by {residual:.3e}")
    return phi


def compute_basis(
    l_matrix: np.ndarray,
    pattern: SamplingPattern,
    *,
    tol: float = 1e-10,
    classify_tol: float = 1e-8,
    trace_hook=None,
) -> FourierBasis:
    """Build the folding-adapted orthonormal basis for (L, pattern).

    ``trace_hook``, if given, is called as trace_hook(step, trace) with the
    dual evaluation trace of each projected subproblem.
    """
    l_matrix = np.asarray(l_matrix, dtype=float)
    n = l_matrix.shape[0]
    if l_matrix.ndim != 2 or l_matrix.shape != (n, n):
        raise InputError(f"Laplacian must be square, got shape {l_matrix.shape}")
    if pattern.n != n:
        raise InputError(f"pattern size {pattern.n} does not match Laplacian size {n}")
    s = pattern.sign

    cols: list[np.ndarray] = []
    tags: list[int] = []
    step = 0
    while len(cols) < n:
        built = np.column_stack(cols) if cols else None
        a = complement_basis(built, n)
        cls = classify_subspace(a, s, tol=classify_tol)
        if cls is SubspaceClass.MIXED:
            q = a.T @ l_matrix @ a
            r = a.T @ (s[:, None] * a) + np.eye(a.shape[1])
            trace: list | None = [] if trace_hook is not None else None
            sol = qecqp.solve(qecqp.QecqpProblem(q, r), tol=tol, trace=trace)
            if trace_hook is not None:
                trace_hook(step, trace)
            u = a @ sol.x
            u = _fix_sign(u / np.linalg.norm(u))
            w = s * u
            w = w - (u @ w) * u
            w = w / np.linalg.norm(w)
            cols.extend([u, w])
            tags.extend([step, step])
            step += 1
        else:
            qa = a.T @ l_matrix @ a
            _, vecs = np.linalg.eigh(0.5 * (qa + qa.T))
            for v in (a @ vecs).T:
                cols.append(_fix_sign(v))
                tags.append(-1)
            break

    u_mat = np.column_stack(cols)
    energies = np.einsum("ij,jk,ik->i", u_mat.T, l_matrix, u_mat.T)
    order = np.argsort(energies, kind="stable")
    u_mat = u_mat[:, order]
    energies = energies[order]
    pair_tags = np.asarray(tags, dtype=int)[order]
    phi = _round_signed_permutation(u_mat.T @ (s[:, None] * u_mat))
    return FourierBasis(u=u_mat, energies=energies, phi=phi, pattern=pattern, pair_tags=pair_tags)


def transform(basis: FourierBasis, f: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Analysis (U^T f) or synthesis (U f) transform of a signal."""
    f = as_signal(f, basis.n)
    if direction == "forward":
        return basis.u.T @ f
    if direction == "inverse":
        return basis.u @ f
    raise InputError(f"direction must be 'forward' or 'inverse', got {direction!r}")

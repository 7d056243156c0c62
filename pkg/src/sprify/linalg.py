"""Dense matrix kernels: tolerance-based rank, eigenvalues, Lyapunov solves
and full-rank factorizations.

Every function is a pure function of its arguments. SVD, eigenvalue
and Lyapunov computations are delegated to LAPACK through numpy and scipy.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, InfeasibleError, InvalidInputError, NumericalFailureError

__all__ = [
    "MACHINE_EPS",
    "DEFAULT_TOL_RANK",
    "COND_LIMIT",
    "RankResult",
    "as_matrix",
    "rank_tol",
    "eigenvalues",
    "solve_lyapunov",
    "full_rank_decomposition",
    "signed_svd",
    "is_invertible",
    "zero_index_of",
    "nonzero_spectrum",
]

MACHINE_EPS = float(np.finfo(float).eps)

# Relative cut for rank decisions on *computed* matrices (inverses, products,
# powers). Raw-kernel callers of rank_tol still get machine epsilon.
DEFAULT_TOL_RANK = 1e-10

# "Invertible" means condition number at most this.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class RankResult:
    """Outcome of a tolerance-based rank decision."""

    rank: int
    singular_values: np.ndarray
    tol_used: float


def as_matrix(M, name="M"):
    """Return `M` as a finite 2-D float or complex array.

    Scalars become 1x1 matrices and 1-D input becomes a single row.
    """
    arr = np.asarray(M)
    if arr.dtype == object:
        raise InvalidInputError(f"{name}: entries must be numeric")
    if not (np.issubdtype(arr.dtype, np.number) or arr.dtype == bool):
        raise InvalidInputError(f"{name}: entries must be numeric")
    if np.iscomplexobj(arr):
        arr = arr.astype(complex)
    else:
        arr = arr.astype(float)
    if arr.ndim > 2:
        raise DimensionError(f"{name}: expected a matrix, got {arr.ndim}-D array")
    arr = np.atleast_2d(arr)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name}: entries must be finite")
    return arr


def rank_tol(M, tol_rel=None, ref_norm=None):
    """Numerical rank of `M`.

    Singular values strictly greater than
    ``tol_rel * ref * max(rows, cols)`` count, where ``ref`` is the largest
    singular value of `M` unless `ref_norm` supplies a nominal scale (useful
    when `M` is a computed quantity that may be pure round-off).

    Parameters
    ----------
    M : array_like
        Nonempty matrix.
    tol_rel : float, optional
        Relative tolerance, machine epsilon by default.
    ref_norm : float, optional
        Reference magnitude replacing the largest singular value.

    Returns
    -------
    RankResult
    """
    M = as_matrix(M)
    if M.size == 0:
        raise InvalidInputError("rank_tol: empty matrix")
    if tol_rel is None:
        tol_rel = MACHINE_EPS
    if tol_rel < 0:
        raise InvalidInputError("rank_tol: tol_rel must be nonnegative")
    sv = np.linalg.svd(M, compute_uv=False)
    sv = np.sort(np.abs(sv))[::-1]
    ref = float(sv[0]) if ref_norm is None else float(ref_norm)
    tol_used = float(tol_rel) * ref * max(M.shape)
    rank = int(np.count_nonzero(sv > tol_used))
    return RankResult(rank=rank, singular_values=sv, tol_used=tol_used)


def eigenvalues(M):
    """All eigenvalues of the square matrix `M`, with multiplicity."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"eigenvalues: matrix must be square, got {M.shape}")
    return np.linalg.eigvals(M).astype(complex)


def is_invertible(M, cond_limit=COND_LIMIT):
    """True when `M` is square with 2-norm condition number <= `cond_limit`."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        return False
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] == 0.0:
        return False
    return bool(sv[0] / sv[-1] <= cond_limit)


def solve_lyapunov(A2, Q):
    """Solve ``P A2 + A2' P + Q = 0`` for symmetric `P`.

    Bartels-Stewart via :func:`scipy.linalg.solve_continuous_lyapunov`,
    followed by a residual check.

    Raises
    ------
    InfeasibleError
        If `A2` is not Hurwitz.
    """
    A2 = as_matrix(A2, "A2")
    Q = as_matrix(Q, "Q")
    n = A2.shape[0]
    if A2.shape != (n, n):
        raise DimensionError(f"solve_lyapunov: A2 must be square, got {A2.shape}")
    if Q.shape != (n, n):
        raise DimensionError(f"solve_lyapunov: Q must be {n}x{n}, got {Q.shape}")
    qnorm = np.linalg.norm(Q, 2)
    if np.linalg.norm(Q - Q.conj().T, 2) > 1e-10 * max(qnorm, 1.0):
        raise InvalidInputError("solve_lyapunov: Q must be symmetric")
    try:
        np.linalg.cholesky((Q + Q.conj().T) / 2)
    except np.linalg.LinAlgError:
        raise InvalidInputError("solve_lyapunov: Q must be positive definite") from None
    eig = eigenvalues(A2)
    if np.max(eig.real) >= 0.0:
        raise InfeasibleError(
            f"solve_lyapunov: A2 is not Hurwitz (max real part {np.max(eig.real):.3g})")

    At = A2.conj().T
    P = scipy.linalg.solve_continuous_lyapunov(At, -Q)
    P = (P + P.conj().T) / 2
    if not np.iscomplexobj(A2) and not np.iscomplexobj(Q):
        P = P.real

    resid = np.linalg.norm(P @ A2 + At @ P + Q, 2)
    if resid > 1e-10 * qnorm:
        raise NumericalFailureError(
            f"solve_lyapunov: residual {resid:.3e} exceeds 1e-10*||Q||")
    return P


def signed_svd(M):
    """SVD ``M = U diag(s) Vh`` with a deterministic sign convention.

    Each singular pair is flipped so that the largest-magnitude entry of the
    left singular vector is positive (first such entry on ties).
    """
    M = as_matrix(M)
    U, s, Vh = np.linalg.svd(M)
    k = min(M.shape)
    for j in range(k):
        col = U[:, j]
        i = int(np.argmax(np.abs(col) - 1e-12 * np.arange(col.size)))
        pivot = col[i]
        if np.iscomplexobj(pivot):
            phase = np.conj(pivot) / abs(pivot) if pivot != 0 else 1.0
        else:
            phase = -1.0 if pivot < 0 else 1.0
        U[:, j] = U[:, j] * phase
        Vh[j, :] = Vh[j, :] * np.conj(phase)
    return U, s, Vh


def full_rank_decomposition(M, tol_rel=None, ref_norm=None):
    """Factor ``M = X @ Y'`` with `X` and `Y` of full column rank.

    Uses the truncated SVD: ``X = U1 S1`` and ``Y = V1``, keeping the
    singular values counted by :func:`rank_tol`.

    Raises
    ------
    InvalidInputError
        If `M` has numerical rank zero; callers branch on that case.
    """
    M = as_matrix(M)
    rr = rank_tol(M, tol_rel, ref_norm)
    if rr.rank == 0:
        raise InvalidInputError("full_rank_decomposition: matrix is (numerically) zero")
    U, s, Vh = signed_svd(M)
    r = rr.rank
    X = U[:, :r] * s[:r]
    Y = Vh[:r, :].conj().T
    return X, Y


def _staircase(S, tol_rel, scale):
    """Deflate the zero eigenvalue of `S` by repeated null-space removal.

    At each step the null space of the current block is rotated to the
    trailing coordinates, which zeroes those columns; the leading block then
    represents `S` on the quotient space. Every rank decision uses the fixed
    threshold ``tol_rel * scale * n``, so a small but genuine eigenvalue is
    not lost the way it is in high powers of `S`.

    Returns the final (nonsingular or empty) block, the number of zero
    eigenvalues removed and the index of zero.
    """
    n = S.shape[0]
    thresh = tol_rel * scale * max(n, 1)
    T = S
    index = 0
    while T.shape[0]:
        _, sv, Vh = np.linalg.svd(T)
        r = int(np.count_nonzero(sv > thresh))
        if r == T.shape[0]:
            break
        V = Vh.conj().T  # leading r columns span the row space
        T = (V.conj().T @ T @ V)[:r, :r]
        index += 1
    return T, n - T.shape[0], index


def zero_index_of(S, tol_rel=None, scale=None):
    """Index of zero as an eigenvalue of the square matrix `S`.

    The smallest ``k >= 0`` with ``rank(S^(k+1)) == rank(S^k)``; zero when
    `S` is invertible. Computed by staircase deflation with rank decisions
    relative to `scale` (default ``||S||_2``).
    """
    S = as_matrix(S)
    if S.shape[0] != S.shape[1]:
        raise DimensionError(f"zero_index_of: matrix must be square, got {S.shape}")
    if tol_rel is None:
        tol_rel = DEFAULT_TOL_RANK
    if scale is None:
        scale = np.linalg.norm(S, 2)
    if scale == 0.0:
        return 1 if S.shape[0] > 0 else 0
    return _staircase(S, tol_rel, scale)[2]


def nonzero_spectrum(S, tol_rel=None, scale=None):
    """Split the spectrum of `S` into its nonzero part and a zero count.

    The nonzero eigenvalues come from the block left after deflating the
    zero eigenvalue (see :func:`zero_index_of`). This keeps a defective zero
    eigenvalue, whose computed copies scatter by ``eps**(1/k)``, out of the
    nonzero list.

    Returns
    -------
    nonzero : ndarray of complex
    zero_count : int
    index : int
        Index of zero as an eigenvalue of `S`.
    """
    S = as_matrix(S)
    n = S.shape[0]
    if S.shape != (n, n):
        raise DimensionError(f"nonzero_spectrum: matrix must be square, got {S.shape}")
    if tol_rel is None:
        tol_rel = DEFAULT_TOL_RANK
    if scale is None:
        scale = np.linalg.norm(S, 2)
    if n == 0 or scale == 0.0:
        return np.zeros(0, dtype=complex), n, (1 if n else 0)
    T, zero_count, index = _staircase(S, tol_rel, scale)
    if T.shape[0] == 0:
        return np.zeros(0, dtype=complex), n, index
    return eigenvalues(T), zero_count, index

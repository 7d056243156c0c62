"""Descriptor systems ``E x' = A x + B u, y = C x + D u`` and the pencil
machinery built on them.

The augmented pencil ``(calE, calA)`` with ``calB = [0; I]`` and
``calC = [0, -I]`` realizes ``G(s)^-1`` directly, so the inverse transfer
function can be evaluated without ever inverting ``G``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DimensionError,
    IllPosedFeedbackError,
    InvalidInputError,
    IrregularPencilError,
    PoleError,
    SingularMatrixError,
)
from .linalg import (
    COND_LIMIT,
    DEFAULT_TOL_RANK,
    as_matrix,
    is_invertible,
    nonzero_spectrum,
    rank_tol,
    zero_index_of,
)

__all__ = [
    "DescriptorSystem",
    "AugmentedPencil",
    "ClosedLoopSystem",
    "PencilEigenvalues",
    "SAMPLE_SEED",
    "sample_points",
    "validate",
    "augmented_pencil",
    "rank_conditions",
    "pencil_eigenvalues",
    "pencil_index",
    "uncontrollable_eigenvalues",
    "unobservable_eigenvalues",
    "eval_G",
    "eval_G_inverse",
    "close_loop",
]

SAMPLE_SEED = 20240611
N_SAMPLES = 12


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DescriptorSystem:
    """The quintuple ``(E, A, B, C, D)`` with square ``D`` (m inputs and
    m outputs). Arrays are copied and made read-only on construction."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        mats = {}
        for name in "EABCD":
            mats[name] = as_matrix(getattr(self, name), name)
        E, A, B, C, D = (mats[k] for k in "EABCD")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if E.shape != (n, n):
            raise DimensionError(f"E must be {n}x{n}, got {E.shape}")
        if B.shape[0] != n:
            raise DimensionError(f"B must have {n} rows, got {B.shape}")
        m = B.shape[1]
        if C.shape != (m, n):
            raise DimensionError(f"C must be {m}x{n}, got {C.shape}")
        if D.shape != (m, m):
            raise DimensionError(f"D must be {m}x{m}, got {D.shape}")
        for name in "EABCD":
            object.__setattr__(self, name, _frozen(mats[name]))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.D.shape[0]

    def __repr__(self):
        return f"DescriptorSystem(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class AugmentedPencil:
    """``calE = blockdiag(E, 0)``, ``calA = [[A, B], [C, D]]``,
    ``calB = [0; I]``, ``calC = [0, -I]``."""

    calE: np.ndarray
    calA: np.ndarray
    calB: np.ndarray
    calC: np.ndarray
    n: int
    m: int


@dataclass(frozen=True)
class PencilEigenvalues:
    finite_eigenvalues: np.ndarray
    regular: bool
    shift_used: complex
    infinite_count: int = 0


@dataclass(frozen=True)
class ClosedLoopSystem:
    """Closed loop under ``u = K y``, ``z = L y``."""

    E: np.ndarray
    Ac: np.ndarray
    Bc: np.ndarray
    Cc: np.ndarray
    Dc: np.ndarray
    K: np.ndarray
    L: np.ndarray
    gains_used: Optional[object] = field(default=None, compare=False)

    def as_system(self):
        return DescriptorSystem(self.E, self.Ac, self.Bc, self.Cc, self.Dc)


def sample_points():
    """The 12 fixed complex sample points used for regularity and shifts."""
    rng = np.random.default_rng(SAMPLE_SEED)
    return rng.uniform(-2.0, 2.0, N_SAMPLES) + 1j * rng.uniform(-2.0, 2.0, N_SAMPLES)


def _best_shift(E, A):
    """Sample point with the best-conditioned ``A - s E`` and its condition."""
    best, best_cond = None, np.inf
    for s in sample_points():
        sv = np.linalg.svd(A - s * E, compute_uv=False)
        c = np.inf if sv[-1] == 0.0 else sv[0] / sv[-1]
        if c < best_cond:
            best, best_cond = complex(s), c
    return best, best_cond


def _check_pencil(E, A):
    E = as_matrix(E, "E")
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1] or E.shape != A.shape:
        raise DimensionError(f"pencil matrices must be square and equal size, got {E.shape}, {A.shape}")
    return E, A


def _validate_pencil(E, A):
    shift, cond = _best_shift(E, A)
    if not cond <= COND_LIMIT:
        raise IrregularPencilError(
            "det(sE - A) vanishes at every sample point: pencil is not regular")
    return shift


def validate(sys):
    """Raise :class:`IrregularPencilError` unless ``(E, A)`` is regular.

    Regularity is certified when ``sE - A`` is well conditioned (condition
    number at most 1e12) at one of the fixed sample points.
    """
    if not isinstance(sys, DescriptorSystem):
        raise InvalidInputError("validate expects a DescriptorSystem")
    _validate_pencil(sys.E, sys.A)


def augmented_pencil(sys):
    n, m = sys.n, sys.m
    calE = np.zeros((n + m, n + m))
    calE[:n, :n] = sys.E
    calA = np.block([[sys.A, sys.B], [sys.C, sys.D]])
    calB = np.vstack([np.zeros((n, m)), np.eye(m)])
    calC = np.hstack([np.zeros((m, n)), -np.eye(m)])
    return AugmentedPencil(calE=_frozen(calE), calA=_frozen(calA), calB=_frozen(calB),
                           calC=_frozen(calC), n=n, m=m)


def rank_conditions(sys, tol_rank=None):
    """True iff ``[E B]`` and ``[E; C]`` both have rank n."""
    tol = DEFAULT_TOL_RANK if tol_rank is None else tol_rank
    n = sys.n
    EB = np.hstack([sys.E, sys.B])
    EC = np.vstack([sys.E, sys.C])
    return rank_tol(EB, tol).rank == n and rank_tol(EC, tol).rank == n


def pencil_eigenvalues(E, A, tol_rank=None, shift=None):
    """Finite eigenvalues of the regular pencil ``(E, A)`` by shift-and-invert.

    With ``sigma`` the best-conditioned sample shift, an eigenvalue ``mu`` of
    ``(A - sigma E)^-1 E`` maps to ``lambda = sigma + 1/mu``; ``mu = 0``
    corresponds to an infinite eigenvalue. The zero eigenvalues of the
    shifted matrix are deflated by rank-of-powers before the nonzero ones are
    computed, so infinite eigenvalues never leak into the finite list.
    An explicit `shift` overrides the sample-point choice; ``A - shift E``
    must then be invertible.
    """
    E, A = _check_pencil(E, A)
    n = A.shape[0]
    sigma = _validate_pencil(E, A)
    if shift is not None:
        sigma = complex(shift)
        if not is_invertible(A - sigma * E):
            raise SingularMatrixError(f"pencil_eigenvalues: A - sE is singular at s = {sigma}")
    if n == 0:
        return PencilEigenvalues(np.zeros(0, dtype=complex), True, sigma, 0)
    M = np.linalg.solve(A - sigma * E, E)
    mnorm = np.linalg.norm(M, 2)
    if mnorm == 0.0:
        return PencilEigenvalues(np.zeros(0, dtype=complex), True, sigma, n)
    mu, zero_count, _ = nonzero_spectrum(M, tol_rank)
    keep = np.abs(mu) > 1e-10 * mnorm
    lam = _clean_real_pencil(sigma + 1.0 / mu[keep], E, A)
    return PencilEigenvalues(lam, True, sigma, zero_count + int(np.count_nonzero(~keep)))


def _clean_real_pencil(lam, E, A):
    """Snap imaginary round-off (introduced by the complex shift) to zero for
    real pencils; genuinely complex eigenvalues come in conjugate pairs."""
    if np.iscomplexobj(E) or np.iscomplexobj(A):
        return lam
    lam = lam.copy()
    small = np.abs(lam.imag) <= 1e-9 * np.maximum(1.0, np.abs(lam))
    lam[small] = lam[small].real
    return lam


def pencil_index(calE, calA, tol_rank=None):
    """Index of the pencil ``(calE, calA)`` with ``calA`` invertible: the
    smallest ``k`` with ``rank((calA^-1 calE)^(k+1)) == rank((calA^-1 calE)^k)``."""
    calE, calA = _check_pencil(calE, calA)
    if not is_invertible(calA):
        raise SingularMatrixError("pencil_index: calA is singular")
    T = np.linalg.solve(calA, calE)
    return zero_index_of(T, tol_rank)


def _candidates(candidates):
    return [complex(c) for c in np.asarray(candidates, dtype=complex).ravel()]


def uncontrollable_eigenvalues(sys, candidates, tol_rank=None):
    """Those ``lam`` among `candidates` where ``[lam E - A, B]`` loses rank."""
    tol = DEFAULT_TOL_RANK if tol_rank is None else tol_rank
    out = []
    for lam in _candidates(candidates):
        M = np.hstack([lam * sys.E - sys.A, sys.B])
        if rank_tol(M, tol).rank < sys.n:
            out.append(lam)
    return out


def unobservable_eigenvalues(sys, candidates, tol_rank=None):
    """Those ``lam`` among `candidates` where ``[lam E - A; C]`` loses rank."""
    tol = DEFAULT_TOL_RANK if tol_rank is None else tol_rank
    out = []
    for lam in _candidates(candidates):
        M = np.vstack([lam * sys.E - sys.A, sys.C])
        if rank_tol(M, tol).rank < sys.n:
            out.append(lam)
    return out


# Point evaluations only need sE - A nonsingular to working precision. The
# 1e12 "invertible" cut used for structural decisions would flag large |s|
# as poles when the transfer function is improper.
EVAL_COND_LIMIT = 1e15


def _resolvent_apply(E, A, s, rhs, what):
    M = s * E - A
    if M.shape[0] and not is_invertible(M, EVAL_COND_LIMIT):
        raise PoleError(f"{what}: sE - A is singular at s = {s}")
    return np.linalg.solve(M, rhs)


def eval_G(sys, s):
    """``G(s) = C (sE - A)^-1 B + D`` evaluated with a linear solve."""
    s = complex(s)
    X = _resolvent_apply(sys.E, sys.A, s, sys.B.astype(complex), "eval_G")
    return sys.C @ X + sys.D


def eval_G_inverse(sys, s, pencil=None):
    """``G(s)^-1`` as ``calC (s calE - calA)^-1 calB``; `G` is never inverted."""
    s = complex(s)
    p = augmented_pencil(sys) if pencil is None else pencil
    X = _resolvent_apply(p.calE, p.calA, s, p.calB.astype(complex), "eval_G_inverse")
    return p.calC @ X


def close_loop(sys, K, L, gains=None):
    """Closed loop of ``u = K y``, ``z = L y``:

    ``Ac = A + B (I-KD)^-1 K C``, ``Bc = B (I-KD)^-1``,
    ``Cc = L (I-DK)^-1 C``, ``Dc = L D (I-KD)^-1``.
    """
    m = sys.m
    K = as_matrix(K, "K")
    L = as_matrix(L, "L")
    if K.shape != (m, m) or L.shape != (m, m):
        raise DimensionError(f"K and L must be {m}x{m}, got {K.shape} and {L.shape}")
    I = np.eye(m)
    IKD = I - K @ sys.D
    IDK = I - sys.D @ K
    if not is_invertible(IKD):
        raise IllPosedFeedbackError("I - KD is numerically singular: feedback is ill posed")
    inv_IKD = np.linalg.inv(IKD)
    inv_IDK = np.linalg.inv(IDK)
    Ac = sys.A + sys.B @ inv_IKD @ K @ sys.C
    Bc = sys.B @ inv_IKD
    Cc = L @ inv_IDK @ sys.C
    Dc = L @ sys.D @ inv_IKD
    return ClosedLoopSystem(E=_frozen(sys.E), Ac=_frozen(Ac), Bc=_frozen(Bc), Cc=_frozen(Cc),
                            Dc=_frozen(Dc), K=_frozen(K), L=_frozen(L), gains_used=gains)

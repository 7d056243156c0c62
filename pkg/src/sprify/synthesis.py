"""Static output feedback synthesis.

``G(s)^-1`` is split as ``s H1 + D2 + C2 (sI - A2)^-1 B2``. With
``L = U V'`` from the SVD of ``H1`` (so ``L' H1`` is symmetric PSD), ``P``
solving ``P A2 + A2' P + Q = 0`` and ``N`` large enough that
``N + N' > (P B2 - C2' L)' Q^-1 (P B2 - C2' L)``, the gain
``K = D2 - L^-T N`` makes ``u = K y``, ``z = L y`` stable and SPR.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .descriptor import augmented_pencil, eval_G_inverse, validate
from .errors import (
    IndexTooHighError,
    InfeasibleSynthesisError,
    InvalidInputError,
    NumericalFailureError,
    SingularMatrixError,
)
from .frequency import frequency_sprifiability
from .linalg import (
    DEFAULT_TOL_RANK,
    as_matrix,
    full_rank_decomposition,
    is_invertible,
    rank_tol,
    signed_svd,
    solve_lyapunov,
)
from .spectral import DEFAULT_TOL_STAB, InverseBlocks, _e1_parts, _is_zero, inverse_blocks

__all__ = [
    "GinvDecomposition",
    "ControllerGains",
    "decompose_ginv",
    "choose_L",
    "choose_N",
    "n_lower_bound",
    "synthesize",
    "RESCALE_FACTORS",
]

RESCALE_FACTORS = (2.0, 4.0, 8.0, 16.0)

# relative size below which the computed s-coefficient is round-off
_H1_CHOP = 1e-10


@dataclass(frozen=True)
class GinvDecomposition:
    """``G(s)^-1 = s H1 + D2 + C2 (sI - A2)^-1 B2``.

    `branch` is ``"E=0"``, ``"E1=0"`` or ``"general"``. The factor fields
    (``X``, ``Y``, ``E1``, ``B1 = Y' Btilde``, ``C1 = Ctilde X``, ``X1``,
    ``Y1``) are None where the branch does not use them.
    """

    H1: np.ndarray
    D2: np.ndarray
    has_R: bool
    A2: Optional[np.ndarray]
    B2: Optional[np.ndarray]
    C2: Optional[np.ndarray]
    branch: str
    blocks: InverseBlocks
    X: Optional[np.ndarray] = None
    Y: Optional[np.ndarray] = None
    E1: Optional[np.ndarray] = None
    B1: Optional[np.ndarray] = None
    C1: Optional[np.ndarray] = None
    X1: Optional[np.ndarray] = None
    Y1: Optional[np.ndarray] = None

    def R(self, s):
        """Strictly proper part ``C2 (sI - A2)^-1 B2`` (zero if absent)."""
        m = self.D2.shape[0]
        if not self.has_R:
            return np.zeros((m, m), dtype=complex)
        k = self.A2.shape[0]
        return self.C2 @ np.linalg.solve(complex(s) * np.eye(k) - self.A2, self.B2.astype(complex))

    def evaluate(self, s):
        """Reassembled ``s H1 + D2 + R(s)``."""
        return complex(s) * self.H1 + self.D2 + self.R(s)


@dataclass(frozen=True)
class ControllerGains:
    K: np.ndarray
    L: np.ndarray
    N: np.ndarray
    M: np.ndarray
    P: Optional[np.ndarray]
    Q: Optional[np.ndarray]
    kappa: float
    margin: float
    W: Optional[np.ndarray] = None
    decomposition: Optional[GinvDecomposition] = None
    rescale: float = 1.0


def _hermitian(M):
    return M.conj().T


def decompose_ginv(sys, tol_rank=None, tol_stab=DEFAULT_TOL_STAB, require_hurwitz=True):
    """Split ``G^-1`` into its polynomial and strictly proper parts.

    Parameters
    ----------
    sys : DescriptorSystem
    tol_rank : float, optional
    tol_stab : float
    require_hurwitz : bool
        Raise when ``A2`` has an eigenvalue with ``Re >= -tol_stab``.

    Returns
    -------
    GinvDecomposition

    Raises
    ------
    InfeasibleSynthesisError
        ``calA`` singular, or ``A2`` not Hurwitz.
    IndexTooHighError
        ``Y1' X1`` singular: ``G^-1`` has a pole of order two or more at
        infinity.
    """
    validate(sys)
    pencil = augmented_pencil(sys)
    try:
        blocks = inverse_blocks(pencil)
    except SingularMatrixError as exc:
        raise InfeasibleSynthesisError("calA = [[A, B], [C, D]] is singular") from exc
    m = sys.m
    Bt, Ct, Dt = blocks.Btilde, blocks.Ctilde, blocks.Dtilde

    if _is_zero(sys.E, tol_rank):
        return GinvDecomposition(np.zeros((m, m)), Dt.copy(), False, None, None, None,
                                 "E=0", blocks)

    tol = DEFAULT_TOL_RANK if tol_rank is None else tol_rank
    X, Y, E1, scale = _e1_parts(sys, blocks, tol_rank)
    B1 = _hermitian(Y) @ Bt
    C1 = Ct @ X
    h_scale = np.linalg.norm(C1, 2) * np.linalg.norm(B1, 2)

    if scale == 0.0 or rank_tol(E1, tol, ref_norm=scale).rank == 0:
        H1 = C1 @ B1
        if np.linalg.norm(H1, 2) <= _H1_CHOP * h_scale:
            H1 = np.zeros_like(H1)
        return GinvDecomposition(H1, Dt.copy(), False, None, None, None, "E1=0", blocks,
                                 X=X, Y=Y, E1=E1, B1=B1, C1=C1)

    X1, Y1 = full_rank_decomposition(E1, tol, ref_norm=scale)
    core = _hermitian(Y1) @ X1
    if not is_invertible(core):
        raise IndexTooHighError(
            "Y1' X1 is singular: G⁻¹ has a pole of order at least 2 at infinity")
    A2 = np.linalg.inv(core)
    B2 = A2 @ _hermitian(Y1) @ B1
    C2 = -C1 @ X1 @ A2 @ A2
    D2 = Dt + C2 @ np.linalg.solve(A2, B2)
    r = X.shape[1]
    H1 = C1 @ (np.eye(r) - X1 @ A2 @ _hermitian(Y1)) @ B1
    if np.linalg.norm(H1, 2) <= _H1_CHOP * h_scale * max(1.0, np.linalg.norm(X1 @ A2 @ _hermitian(Y1), 2)):
        H1 = np.zeros_like(H1)
    if require_hurwitz:
        worst = np.max(np.linalg.eigvals(A2).real)
        if not worst < -tol_stab:
            raise InfeasibleSynthesisError(
                f"A2 is not Hurwitz (max real part {worst:.6g}): G⁻¹ has a pole "
                "outside the open left half plane")
    return GinvDecomposition(H1, D2, True, A2, B2, C2, "general", blocks,
                             X=X, Y=Y, E1=E1, B1=B1, C1=C1, X1=X1, Y1=Y1)


def choose_L(H1):
    """``L = U V'`` from the signed SVD ``H1 = U S V'``; identity for
    ``H1 = 0``. Then ``L' H1 = V S V'`` is symmetric PSD.

    Raises
    ------
    NumericalFailureError
        If the post-hoc symmetry/PSD check fails.
    """
    H1 = as_matrix(H1, "H1")
    m = H1.shape[0]
    if not np.any(H1):
        return np.eye(m)
    U, _, Vh = signed_svd(H1)
    L = U @ Vh
    S = _hermitian(L) @ H1
    tol = 1e-9 * max(1.0, np.linalg.norm(H1, 2))
    if np.linalg.norm(S - _hermitian(S), 2) > tol or np.min(np.linalg.eigvalsh((S + _hermitian(S)) / 2)) < -tol:
        raise NumericalFailureError("choose_L: L' H1 is not symmetric PSD")
    return L


def _as_Q(Q, k):
    if Q is None:
        return np.eye(k)
    Q = np.asarray(Q, dtype=float) if not np.iscomplexobj(Q) else np.asarray(Q)
    if Q.ndim == 0:
        if not Q > 0:
            raise InvalidInputError("Q scale must be positive")
        return float(Q) * np.eye(k)
    Q = as_matrix(Q, "Q")
    if Q.shape != (k, k):
        raise InvalidInputError(f"Q must be {k}x{k}, got {Q.shape}")
    return Q


def n_lower_bound(dec, L, P, Q):
    """``W = (P B2 - C2' L)' Q^-1 (P B2 - C2' L)``; ``N + N'`` must exceed it."""
    F = P @ dec.B2 - _hermitian(dec.C2) @ L
    W = _hermitian(F) @ np.linalg.solve(Q, F)
    return (W + _hermitian(W)) / 2


def choose_N(dec, L, Q=None):
    """Pick ``N = kappa I`` with ``kappa = lambda_max(W)/2 + 1``.

    Without a strictly proper part, ``N = I`` and ``P`` is None.

    Returns
    -------
    N : ndarray
    P : ndarray or None
    """
    m = dec.D2.shape[0]
    if not dec.has_R:
        return np.eye(m), None
    Qm = _as_Q(Q, dec.A2.shape[0])
    P = solve_lyapunov(dec.A2, Qm)
    W = n_lower_bound(dec, L, P, Qm)
    kappa = float(np.max(np.linalg.eigvalsh(W))) / 2.0 + 1.0
    return kappa * np.eye(m), P


def synthesize(sys, Q=None, kappa_override=None, L_override=None, tol_rank=None,
               tol_stab=DEFAULT_TOL_STAB):
    """Compute static gains ``K``, ``L`` making the closed loop stable and SPR.

    Parameters
    ----------
    sys : DescriptorSystem
    Q : float or ndarray, optional
        Lyapunov weight; a scalar ``q`` means ``q I``. Identity by default.
    kappa_override : float, optional
        Use ``N = kappa I`` instead of the default rule.
    L_override : array_like, optional
        Use this (invertible) ``L`` instead of the SVD choice.

    Returns
    -------
    ControllerGains

    Raises
    ------
    InfeasibleSynthesisError
        When the frequency test fails; the message names the failing condition.
    NumericalFailureError
        When ``I - K D`` stays singular after rescaling ``N``.
    """
    report = frequency_sprifiability(sys, tol_rank, tol_stab)
    if not report.sprifiable:
        raise InfeasibleSynthesisError("; ".join(report.reasons) or "system is not SPRifiable")
    dec = decompose_ginv(sys, tol_rank, tol_stab)
    m = sys.m

    if L_override is not None:
        L = as_matrix(L_override, "L")
        if L.shape != (m, m) or not is_invertible(L):
            raise InvalidInputError(f"L must be an invertible {m}x{m} matrix")
    else:
        L = choose_L(dec.H1)

    Qm = _as_Q(Q, dec.A2.shape[0]) if dec.has_R else None
    N0, P = choose_N(dec, L, Qm)
    W = n_lower_bound(dec, L, P, Qm) if dec.has_R else np.zeros((m, m))
    if kappa_override is not None:
        if not kappa_override > 0:
            raise InvalidInputError("kappa must be positive")
        N0 = float(kappa_override) * np.eye(m)
    kappa = float(N0[0, 0])

    Linv_h = _hermitian(np.linalg.inv(L))
    I = np.eye(m)
    for c in (1.0,) + RESCALE_FACTORS:
        N = c * N0
        K = dec.D2 - Linv_h @ N
        if is_invertible(I - K @ sys.D):
            break
    else:
        raise NumericalFailureError("I - KD stays singular after rescaling N by up to 16")
    M = N - _hermitian(L) @ dec.D2
    margin = float(np.min(np.linalg.eigvalsh(N + _hermitian(N) - W)))
    return ControllerGains(K=K, L=L, N=N, M=M, P=P, Q=Qm, kappa=kappa * c, margin=margin,
                           W=W, decomposition=dec, rescale=c)


def _check_reconstruction(sys, dec, points):
    """Max relative mismatch between ``G^-1`` and the decomposition."""
    worst = 0.0
    for s in points:
        ref = eval_G_inverse(sys, s)
        err = np.linalg.norm(ref - dec.evaluate(s), 2) / max(1.0, np.linalg.norm(ref, 2))
        worst = max(worst, err)
    return worst

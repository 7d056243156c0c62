"""Frequency-domain test for SPRifiability.

The system can be made stable and SPR when every finite eigenvalue of the
augmented pencil ``(calE, calA)`` lies in the open left half plane (these
are the finite poles of ``G^-1`` together with the uncontrollable and
unobservable eigenvalues) and ``G^-1`` has a pole of order at most one at
infinity.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .descriptor import (
    _best_shift,
    augmented_pencil,
    eval_G_inverse,
    pencil_eigenvalues,
    pencil_index,
    rank_conditions,
    uncontrollable_eigenvalues,
    unobservable_eigenvalues,
    validate,
)
from .errors import IrregularPencilError, PoleError, SingularMatrixError
from .linalg import COND_LIMIT, DEFAULT_TOL_RANK, as_matrix, is_invertible, zero_index_of
from .spectral import DEFAULT_TOL_STAB, _fmt, is_stable_value

__all__ = [
    "FrequencyReport",
    "classify_pencil_eigs",
    "ginv_infinity_order",
    "infinity_pole_order",
    "infinity_order_numeric",
    "frequency_sprifiability",
]

POLE = "pole-of-Ginv"
UNCONTROLLABLE = "uncontrollable"
UNOBSERVABLE = "unobservable"
MULTIPLE = "multiple"


@dataclass
class FrequencyReport:
    sprifiable: bool
    pencil_eigs: np.ndarray
    classification: List[str]
    ginv_infinity_order: Optional[int]
    uncontrollable_bad: List[complex] = field(default_factory=list)
    unobservable_bad: List[complex] = field(default_factory=list)
    reasons: List[str] = field(default_factory=list)
    rank_conditions_hold: bool = True
    order_method: str = "pencil-index"
    numeric_order_estimate: Optional[int] = None


def classify_pencil_eigs(sys, tol_rank=None):
    """Eigenvalues of ``(calE, calA)`` with a label for each.

    Labels come from rank tests on the original system: ``[lam E - A, B]``
    (uncontrollable) and ``[lam E - A; C]`` (unobservable). An eigenvalue
    passing neither test is a pole of ``G^-1``; one passing both is labeled
    ``"multiple"``.

    Raises
    ------
    IrregularPencilError
        If the augmented pencil is not regular.
    """
    p = augmented_pencil(sys)
    eigs = pencil_eigenvalues(p.calE, p.calA, tol_rank).finite_eigenvalues
    labels = []
    for lam in eigs:
        unc = bool(uncontrollable_eigenvalues(sys, [lam], tol_rank))
        uno = bool(unobservable_eigenvalues(sys, [lam], tol_rank))
        if unc and uno:
            labels.append(MULTIPLE)
        elif unc:
            labels.append(UNCONTROLLABLE)
        elif uno:
            labels.append(UNOBSERVABLE)
        else:
            labels.append(POLE)
    return eigs, labels


def ginv_infinity_order(sys, tol_rank=None):
    """Order of infinity as a pole of ``G^-1``, read off the pencil index.

    Valid when ``calA`` is invertible and ``[E B]``, ``[E; C]`` have full row
    and column rank respectively; the order is then ``index - 1``. Without
    the rank conditions use :func:`infinity_pole_order`.

    Raises
    ------
    SingularMatrixError
        If ``calA`` is singular.
    """
    p = augmented_pencil(sys)
    if not np.any(sys.E):
        if not is_invertible(p.calA):
            raise SingularMatrixError("ginv_infinity_order: calA is singular")
        return 0
    return pencil_index(p.calE, p.calA, tol_rank) - 1


def _nilpotent_projector(M, tol_rel):
    """Spectral projector onto the generalized null space of `M`, with the
    zero index. The projector is ``[K 0][K R]^-1`` where K spans
    ``ker(M^k)`` and R spans ``range(M^k)``."""
    n = M.shape[0]
    scale = np.linalg.norm(M, 2)
    if scale == 0.0:
        return np.eye(n), 1
    k = zero_index_of(M, tol_rel, scale=scale)
    if k == 0:
        return np.zeros((n, n)), 0
    Mk = np.linalg.matrix_power(M, k)
    U, sv, Vh = np.linalg.svd(Mk)
    r = int(np.count_nonzero(sv > tol_rel * scale ** k * n))
    R = U[:, :r]
    Kb = Vh[r:, :].conj().T
    T = np.hstack([Kb, R])
    sel = np.zeros((n, n))
    sel[: n - r, : n - r] = np.eye(n - r)
    P0 = T @ sel @ np.linalg.inv(T)
    return P0, k


def infinity_pole_order(E, A, B, C, D=None, tol_rank=None):
    """Order of the pole at infinity of ``C (sE - A)^-1 B + D``.

    With a shift ``sigma`` where ``A - sigma E`` is invertible, put
    ``M = (A - sigma E)^-1 E`` and let ``P0`` project onto the generalized
    null space of ``M``. The polynomial part of the transfer function in
    ``t = s - sigma`` is ``D - sum_k t^k C M^k P0 (A - sigma E)^-1 B``, so the
    order is the largest ``k`` whose coefficient is nonzero (0 if none).
    Needs no rank conditions.
    """
    E = as_matrix(E, "E")
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    C = as_matrix(C, "C")
    tol = DEFAULT_TOL_RANK if tol_rank is None else tol_rank
    sigma, cond = _best_shift(E, A)
    if not cond <= COND_LIMIT:
        raise IrregularPencilError("infinity_pole_order: pencil is not regular")
    As = A - sigma * E
    M = np.linalg.solve(As, E)
    P0, k = _nilpotent_projector(M, tol)
    if k <= 1:
        return 0
    V = P0 @ np.linalg.solve(As, B)
    mnorm = np.linalg.norm(M, 2)
    ref = np.linalg.norm(C, 2) * np.linalg.norm(V, 2)
    order = 0
    W = V
    for j in range(1, k):
        W = M @ W
        coef = C @ W
        if np.linalg.norm(coef, 2) > 1e-8 * ref * mnorm ** j:
            order = j
    return order


def infinity_order_numeric(evaluator, s0=1e2, decades=1):
    """Rough order estimate from the growth of ``||H(s)||`` along the real
    axis: the rounded log-slope between ``s0`` and ``s0 * 10**decades``.
    Diagnostic only."""
    try:
        a = np.linalg.norm(evaluator(s0), 2)
        b = np.linalg.norm(evaluator(s0 * 10 ** decades), 2)
    except PoleError:
        return None
    if a == 0.0 or b == 0.0:
        return 0
    return max(0, int(round(np.log10(b / a) / decades)))


def frequency_sprifiability(sys, tol_rank=None, tol_stab=DEFAULT_TOL_STAB):
    """Decide SPRifiability from the poles of ``G^-1``.

    Parameters
    ----------
    sys : DescriptorSystem
    tol_rank : float, optional
    tol_stab : float
        Eigenvalues must satisfy ``Re(lam) < -tol_stab``; those inside the
        band are reported as marginal.

    Returns
    -------
    FrequencyReport
        An irregular augmented pencil yields a negative report.
    """
    validate(sys)
    rank_ok = rank_conditions(sys, tol_rank)
    p = augmented_pencil(sys)
    try:
        eigs, labels = classify_pencil_eigs(sys, tol_rank)
    except IrregularPencilError:
        return FrequencyReport(False, np.zeros(0, dtype=complex), [], None,
                               reasons=["augmented pencil (calE, calA) is not regular"],
                               rank_conditions_hold=rank_ok, order_method="none")

    reasons = []
    unc_bad, uno_bad = [], []
    for lam, lab in zip(eigs, labels):
        if is_stable_value(lam, tol_stab):
            continue
        if lab in (UNCONTROLLABLE, MULTIPLE):
            unc_bad.append(complex(lam))
        if lab in (UNOBSERVABLE, MULTIPLE):
            uno_bad.append(complex(lam))
        if abs(np.real(lam)) <= tol_stab:
            reasons.append(f"marginal eigenvalue {_fmt(lam)} ({lab})")
        elif lab == POLE:
            reasons.append(f"pole of G⁻¹ at {_fmt(lam)}")
        else:
            reasons.append(f"{lab} eigenvalue at {_fmt(lam)}")

    method = "pencil-index"
    if rank_ok and is_invertible(p.calA):
        order = ginv_infinity_order(sys, tol_rank)
    else:
        method = "laurent"
        order = infinity_pole_order(p.calE, p.calA, p.calB, p.calC, tol_rank=tol_rank)
        if not rank_ok:
            reasons.append("rank conditions fail: infinity order computed from the "
                           "Laurent expansion instead of the pencil index")
    numeric = infinity_order_numeric(lambda s: eval_G_inverse(sys, s, p))
    if order > 1:
        reasons.append(f"G⁻¹ has a pole of order {order} at infinity (at most 1 allowed)")

    ok = len(eigs) == 0 or all(is_stable_value(lam, tol_stab) for lam in eigs)
    ok = ok and order <= 1
    return FrequencyReport(ok, eigs, labels, order, unc_bad, uno_bad, reasons, rank_ok,
                           method, numeric)

"""Eigenvalue test for SPRifiability.

A system can be made stable and SPR by static output feedback when
``calA`` is invertible, every nonzero eigenvalue of ``calA^-1 calE`` has
negative real part, and zero has index at most two as an eigenvalue of
``calA^-1 calE``. The index is computed on the smaller matrix
``E1 = Y' Atilde X`` (``E = X Y'``), whose zero index is one less.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .descriptor import augmented_pencil, rank_conditions, validate
from .errors import SingularMatrixError
from .linalg import (
    DEFAULT_TOL_RANK,
    full_rank_decomposition,
    is_invertible,
    nonzero_spectrum,
    rank_tol,
    zero_index_of,
)

__all__ = [
    "DEFAULT_TOL_STAB",
    "InverseBlocks",
    "SpectralReport",
    "inverse_blocks",
    "reduced_E1",
    "zero_index",
    "spectral_sprifiability",
    "nonalgebraic_shortcuts",
    "is_stable_value",
]

DEFAULT_TOL_STAB = 1e-9


@dataclass(frozen=True)
class InverseBlocks:
    """Blocks of ``calA^-1`` partitioned at n."""

    Atilde: np.ndarray
    Btilde: np.ndarray
    Ctilde: np.ndarray
    Dtilde: np.ndarray


@dataclass
class SpectralReport:
    sprifiable: bool
    calA_invertible: bool
    rank_conditions_hold: bool
    eigenvalues_of_calAinv_calE: np.ndarray
    zero_index: Optional[int]
    E1: Optional[np.ndarray]
    reasons: List[str] = field(default_factory=list)
    method: str = "spectral"


def is_stable_value(lam, tol_stab=DEFAULT_TOL_STAB):
    """Strict numerical left-half-plane test ``Re(lam) < -tol_stab``."""
    return bool(np.real(lam) < -tol_stab)


def _fmt(z):
    z = complex(z)
    re, im = float(f"{z.real:.10g}"), float(f"{z.imag:.10g}")
    if im == 0.0:
        return f"{re:+}"
    return f"{re:+}{im:+}j"


def inverse_blocks(pencil):
    """Partition ``calA^-1`` into ``[[Atilde, Btilde], [Ctilde, Dtilde]]``.

    Raises
    ------
    SingularMatrixError
        If ``calA`` is numerically singular (the test then fails outright).
    """
    if not is_invertible(pencil.calA):
        raise SingularMatrixError("calA is singular")
    n = pencil.n
    inv = np.linalg.inv(pencil.calA)
    return InverseBlocks(Atilde=inv[:n, :n], Btilde=inv[:n, n:],
                         Ctilde=inv[n:, :n], Dtilde=inv[n:, n:])


def _is_zero(E, tol_rank):
    return rank_tol(E, DEFAULT_TOL_RANK if tol_rank is None else tol_rank).rank == 0


def _e1_parts(sys, blocks, tol_rank=None):
    tol = DEFAULT_TOL_RANK if tol_rank is None else tol_rank
    X, Y = full_rank_decomposition(sys.E, tol)
    E1 = Y.conj().T @ blocks.Atilde @ X
    # judge E1 against the whole inverse: Atilde itself may be pure round-off
    inv = np.block([[blocks.Atilde, blocks.Btilde], [blocks.Ctilde, blocks.Dtilde]])
    scale = np.linalg.norm(Y, 2) * np.linalg.norm(inv, 2) * np.linalg.norm(X, 2)
    return X, Y, E1, scale


def reduced_E1(sys, blocks, tol_rank=None):
    """``E1 = Y' Atilde X`` for the SVD-based full-rank factorization
    ``E = X Y'``. Only defined for nonzero E."""
    return _e1_parts(sys, blocks, tol_rank)[2]


def zero_index(sys, blocks, tol_rank=None):
    """Index of zero as an eigenvalue of ``calA^-1 calE``.

    Equal to 1 when E = 0, otherwise one more than the zero index of E1.
    """
    if _is_zero(sys.E, tol_rank):
        return 1
    _, _, E1, scale = _e1_parts(sys, blocks, tol_rank)
    return 1 + zero_index_of(E1, tol_rank, scale=scale)


def _nonzero_eigs_negative(mus, tol_stab):
    """Nonzero eigenvalues mu of calA^-1 calE correspond to pencil eigenvalues
    1/mu; test those with the same strict cut the frequency test uses."""
    return [mu for mu in mus if not is_stable_value(1.0 / mu, tol_stab)]


def spectral_sprifiability(sys, tol_rank=None, tol_stab=DEFAULT_TOL_STAB, tol_eig=None):
    """Decide SPRifiability from the spectrum of ``calA^-1 calE``.

    Parameters
    ----------
    sys : DescriptorSystem
    tol_rank : float, optional
        Relative rank tolerance for index and factorization decisions.
    tol_stab : float
        Eigenvalues must satisfy ``Re(1/mu) < -tol_stab``.
    tol_eig : float, optional
        Magnitude below which an eigenvalue counts as zero; defaults to
        ``1e-8 * max(1, ||calA^-1 calE||)``.

    Returns
    -------
    SpectralReport
    """
    validate(sys)
    pencil = augmented_pencil(sys)
    rank_ok = rank_conditions(sys, tol_rank)
    reasons = []
    if not rank_ok:
        reasons.append(
            "rank conditions on [E B] and [E; C] fail: a positive verdict is still "
            "sufficient, a negative one may be conservative (frequency method is authoritative)")
    try:
        blocks = inverse_blocks(pencil)
    except SingularMatrixError:
        reasons.insert(0, "calA = [[A, B], [C, D]] is singular")
        return SpectralReport(False, False, rank_ok, np.zeros(0, dtype=complex), None, None,
                              reasons)

    M = np.linalg.solve(pencil.calA, pencil.calE)
    mnorm = np.linalg.norm(M, 2)
    if tol_eig is None:
        tol_eig = 1e-8 * max(1.0, mnorm)
    mus, zero_count, _ = nonzero_spectrum(M, tol_rank)
    small = np.abs(mus) <= tol_eig
    nonzero = mus[~small]
    zero_count += int(np.count_nonzero(small))
    eigs = np.concatenate([nonzero, np.zeros(zero_count, dtype=complex)])

    if _is_zero(sys.E, tol_rank):
        E1, idx = None, 1
    else:
        _, _, E1, scale = _e1_parts(sys, blocks, tol_rank)
        idx = 1 + zero_index_of(E1, tol_rank, scale=scale)

    bad = _nonzero_eigs_negative(nonzero, tol_stab)
    for mu in bad:
        lam = 1.0 / mu
        kind = "marginal eigenvalue" if abs(np.real(lam)) <= tol_stab else "eigenvalue"
        reasons.append(f"{kind} {_fmt(mu)} of calA^-1 calE (zero-output pole {_fmt(lam)}) "
                       "does not have negative real part")
    if idx > 2:
        reasons.append(f"index of zero as an eigenvalue of calA^-1 calE is {idx} > 2")
    ok = not bad and idx <= 2
    return SpectralReport(ok, True, rank_ok, eigs, idx, E1, reasons)


def nonalgebraic_shortcuts(sys, tol_rank=None, tol_stab=DEFAULT_TOL_STAB):
    """Simplified tests for systems with invertible E; None otherwise.

    The system is first normalized to ``E = I``. Then

    * D invertible: all eigenvalues of ``A - B D^-1 C`` must be stable;
    * D = 0: ``calA`` invertible, nonzero eigenvalues of Atilde stable and
      ``C B`` invertible;
    * otherwise: ``calA`` invertible, nonzero eigenvalues of Atilde stable
      and zero (if an eigenvalue of Atilde) of index one.
    """
    if not is_invertible(sys.E):
        return None
    n, m = sys.n, sys.m
    A = np.linalg.solve(sys.E, sys.A)
    B = np.linalg.solve(sys.E, sys.B)
    C, D = sys.C, sys.D
    tol = DEFAULT_TOL_RANK if tol_rank is None else tol_rank
    reasons = []

    d_ref = max(np.linalg.norm(D, 2), np.linalg.norm(C, 2) * np.linalg.norm(B, 2))
    if rank_tol(D, tol, ref_norm=d_ref).rank == m and is_invertible(D):
        F = A - B @ np.linalg.solve(D, C)
        lams = np.linalg.eigvals(F)
        bad = [lam for lam in lams if not is_stable_value(lam, tol_stab)]
        for lam in bad:
            reasons.append(f"eigenvalue {_fmt(lam)} of A - B D^-1 C is not stable")
        with np.errstate(divide="ignore"):
            mus = np.array([1.0 / lam for lam in lams if lam != 0], dtype=complex)
        invertible = is_invertible(F)
        if not invertible:
            reasons.insert(0, "calA is singular (A - B D^-1 C singular)")
        eigs = np.concatenate([mus, np.zeros(n + m - mus.size, dtype=complex)])
        return SpectralReport(not bad and invertible, invertible, True, eigs,
                              1 if invertible else None, None, reasons,
                              method="shortcut: D invertible")

    calA = np.block([[A, B], [C, D]])
    if not is_invertible(calA):
        return SpectralReport(False, False, True, np.zeros(0, dtype=complex), None, None,
                              ["calA = [[A, B], [C, D]] is singular"],
                              method="shortcut: E invertible")
    inv = np.linalg.inv(calA)
    Atilde = inv[:n, :n]
    scale = np.linalg.norm(inv, 2)
    mus, zero_count, idx0 = nonzero_spectrum(Atilde, tol_rank, scale=scale)
    bad = _nonzero_eigs_negative(mus, tol_stab)
    for mu in bad:
        reasons.append(f"eigenvalue {_fmt(mu)} of Atilde does not have negative real part")
    eigs = np.concatenate([mus, np.zeros(n + m - mus.size, dtype=complex)])

    if rank_tol(D, tol, ref_norm=d_ref).rank == 0:
        CB = C @ B
        cb_ok = (rank_tol(CB, tol, ref_norm=np.linalg.norm(C, 2) * np.linalg.norm(B, 2)).rank == m
                 and is_invertible(CB))
        if not cb_ok:
            reasons.append("C B is singular")
        idx = 2 if cb_ok else 1 + zero_index_of(Atilde, tol_rank, scale=scale)
        return SpectralReport(not bad and cb_ok, True, True, eigs, idx, Atilde, reasons,
                              method="shortcut: D = 0")

    idx = 1 + (idx0 if zero_count else 0)
    if idx > 2:
        reasons.append(f"zero is an eigenvalue of Atilde with index {idx - 1} > 1")
    return SpectralReport(not bad and idx <= 2, True, True, eigs, idx, Atilde, reasons,
                          method="shortcut: E invertible")

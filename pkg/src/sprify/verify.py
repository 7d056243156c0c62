"""Closed-loop stability and SPR certificates on a frequency grid.

The certificate is a grid-resolution certificate: positivity of the
Hermitian part ``G_c(jw) + G_c(jw)'`` is checked at finitely many
frequencies and combined with the closed-loop pole margin. Only ``w >= 0``
is swept; for real systems the Hermitian part at ``-w`` is the complex
conjugate of the one at ``w`` and has the same eigenvalues.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .descriptor import (
    ClosedLoopSystem,
    augmented_pencil,
    close_loop,
    eval_G,
    pencil_eigenvalues,
)
from .errors import InternalConsistencyError, PoleError, SprifyError
from .frequency import infinity_pole_order
from .linalg import as_matrix
from .spectral import DEFAULT_TOL_STAB, is_stable_value

__all__ = [
    "FrequencyGrid",
    "SprCertificate",
    "VerificationResult",
    "default_grid",
    "hermitian_min_eig",
    "spr_check",
    "closed_loop_evaluator",
    "operator_form",
    "verify_closed_loop",
    "spr_structural_checks",
]

CAVEAT = "grid-resolution certificate"
CROSS_CHECK_POINTS = 5
CROSS_CHECK_RTOL = 1e-7


@dataclass(frozen=True)
class FrequencyGrid:
    omegas: np.ndarray
    includes_limit: bool = True

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("grid frequencies must be finite and nonnegative")
        if np.any(np.diff(w) <= 0):
            raise ValueError("grid frequencies must be strictly increasing")
        w.flags.writeable = False
        object.__setattr__(self, "omegas", w)


def default_grid(points=481, omega_min=1e-6, omega_max=1e6):
    """``0`` followed by `points` log-spaced frequencies in
    ``[omega_min, omega_max]``."""
    if not 0 < omega_min < omega_max:
        raise ValueError("need 0 < omega_min < omega_max")
    if points < 2:
        raise ValueError("need at least 2 log-spaced points")
    w = np.logspace(np.log10(omega_min), np.log10(omega_max), int(points))
    return FrequencyGrid(np.concatenate([[0.0], w]))


@dataclass
class SprCertificate:
    passed: bool
    epsilon: float
    pole_margin: float
    min_hermitian_eig: float
    worst_omega: float
    grid: FrequencyGrid
    caveat: str = CAVEAT
    reasons: List[str] = field(default_factory=list)

    @property
    def pass_(self):
        return self.passed


def hermitian_min_eig(H):
    """Smallest eigenvalue of ``H + H'``."""
    H = np.atleast_2d(np.asarray(H))
    return float(np.min(np.linalg.eigvalsh(H + H.conj().T)))


def spr_check(evaluator, finite_poles, grid=None, tol_stab=DEFAULT_TOL_STAB):
    """Grid certificate that ``evaluator`` is stable and SPR.

    Parameters
    ----------
    evaluator : callable
        ``s -> m x m`` complex matrix.
    finite_poles : sequence of complex
        Finite poles (closed-loop eigenvalues) of the function.
    grid : FrequencyGrid, optional

    Returns
    -------
    SprCertificate
        ``epsilon = min(pole_margin, delta / (2 * slope)) / 2`` on success,
        where ``delta`` is the smallest Hermitian eigenvalue and ``slope``
        the largest finite-difference slope of ``||G(jw)||`` over the grid
        (capped at 1 when both terms are unbounded); 0 on failure.
    """
    grid = default_grid() if grid is None else grid
    poles = np.asarray(finite_poles, dtype=complex).ravel()
    reasons = []
    pole_margin = float(-np.max(poles.real)) if poles.size else np.inf
    poles_ok = all(is_stable_value(p, tol_stab) for p in poles)
    if not poles_ok:
        worst = poles[np.argmax(poles.real)]
        reasons.append(f"closed-loop eigenvalue {complex(worst):.6g} is not in the open left half plane")

    min_h, worst_w = np.inf, float(grid.omegas[0])
    slope = 0.0
    prev = None
    for w in grid.omegas:
        try:
            with np.errstate(divide="ignore", invalid="ignore"):
                H = np.atleast_2d(evaluator(1j * w))
            if not np.all(np.isfinite(H)):
                raise PoleError(f"non-finite value at w = {w}")
        except (PoleError, np.linalg.LinAlgError):
            min_h, worst_w = -np.inf, float(w)
            reasons.append(f"evaluation failed at w = {w:.6g} (pole on the imaginary axis)")
            prev = None
            continue
        h = hermitian_min_eig(H)
        if h < min_h:
            min_h, worst_w = h, float(w)
        if prev is not None:
            slope = max(slope, np.linalg.norm(H - prev[1], 2) / (w - prev[0]))
        prev = (w, H)

    herm_ok = min_h > 0
    if not herm_ok and np.isfinite(min_h):
        reasons.append(f"Hermitian part not positive definite at w = {worst_w:.6g} "
                       f"(min eigenvalue {min_h:.6g})")
    passed = bool(poles_ok and herm_ok)
    eps = 0.0
    if passed:
        bound = min_h / (2.0 * slope) if slope > 0 else np.inf
        eps = min(pole_margin, bound) / 2.0
        if not np.isfinite(eps):
            eps = 1.0
    return SprCertificate(passed, float(eps), float(pole_margin), float(min_h), worst_w, grid,
                          reasons=reasons)


@dataclass
class VerificationResult:
    certificate: SprCertificate
    stable: bool
    closed_loop_eigenvalues: np.ndarray
    closed_loop: ClosedLoopSystem
    consistency_error: float

    @property
    def passed(self):
        return self.certificate.passed and self.stable


def closed_loop_evaluator(cl):
    """``s -> Cc (sE - Ac)^-1 Bc + Dc``."""
    csys = cl.as_system()
    return lambda s: eval_G(csys, s)


def operator_form(sys, K, L, s):
    """``L (I - G(s) K)^-1 G(s)``, the closed loop computed from ``G``."""
    G = eval_G(sys, s)
    m = sys.m
    return L @ np.linalg.solve(np.eye(m) - G @ K, G)


def _gains(gains):
    if isinstance(gains, tuple):
        K, L = gains
        return as_matrix(K, "K"), as_matrix(L, "L"), None
    return gains.K, gains.L, gains


def verify_closed_loop(sys, gains, grid=None, tol_stab=DEFAULT_TOL_STAB):
    """Close the loop and certify stability and SPR.

    Parameters
    ----------
    sys : DescriptorSystem
    gains : ControllerGains or tuple (K, L)
    grid : FrequencyGrid, optional

    Returns
    -------
    VerificationResult

    Raises
    ------
    IllPosedFeedbackError
        If ``I - K D`` is singular.
    InternalConsistencyError
        If the state-space and operator forms of ``G_c`` disagree.
    """
    grid = default_grid() if grid is None else grid
    K, L, g = _gains(gains)
    cl = close_loop(sys, K, L, g)
    eigs = pencil_eigenvalues(cl.E, cl.Ac).finite_eigenvalues
    stable = all(is_stable_value(lam, tol_stab) for lam in eigs)
    evaluator = closed_loop_evaluator(cl)

    idx = np.unique(np.linspace(0, grid.omegas.size - 1, CROSS_CHECK_POINTS).round().astype(int))
    worst = 0.0
    for i in idx:
        s = 1j * grid.omegas[i]
        try:
            a = evaluator(s)
            b = operator_form(sys, K, L, s)
        except (PoleError, np.linalg.LinAlgError):
            continue
        ref = max(np.linalg.norm(a, 2), np.linalg.norm(b, 2))
        if ref == 0.0:
            continue
        err = np.linalg.norm(a - b, 2) / ref
        worst = max(worst, err)
        if err > CROSS_CHECK_RTOL:
            raise InternalConsistencyError(
                f"closed-loop evaluations disagree at s = {s}: relative error {err:.3g}")

    cert = spr_check(evaluator, eigs, grid, tol_stab)
    return VerificationResult(cert, stable, eigs, cl, worst)


def spr_structural_checks(cl, cert, tol=1e-8):
    """Necessary properties of an SPR closed loop; returns violations.

    Checks that the s-coefficient of ``G_c^-1`` is symmetric PSD and that
    neither ``G_c`` nor ``G_c^-1`` has a pole of order above one at
    infinity. Empty when `cert` did not pass.
    """
    from .synthesis import decompose_ginv

    if not cert.passed:
        return []
    findings = []
    csys = cl.as_system()
    try:
        dec = decompose_ginv(csys, require_hurwitz=False)
    except SprifyError as exc:
        findings.append(f"cannot decompose G_c⁻¹: {exc}")
        dec = None
    if dec is not None:
        H1 = dec.H1
        scale = max(1.0, np.linalg.norm(H1, 2))
        if np.linalg.norm(H1 - H1.conj().T, 2) > tol * scale:
            findings.append("s-coefficient of G_c⁻¹ is not symmetric")
        elif np.min(np.linalg.eigvalsh((H1 + H1.conj().T) / 2)) < -tol * scale:
            findings.append("s-coefficient of G_c⁻¹ is not positive semi-definite")
    order = infinity_pole_order(csys.E, csys.A, csys.B, csys.C, csys.D)
    if order > 1:
        findings.append(f"G_c has a pole of order {order} at infinity")
    p = augmented_pencil(csys)
    try:
        inv_order = infinity_pole_order(p.calE, p.calA, p.calB, p.calC)
    except SprifyError as exc:
        findings.append(f"cannot evaluate G_c⁻¹ at infinity: {exc}")
    else:
        if inv_order > 1:
            findings.append(f"G_c⁻¹ has a pole of order {inv_order} at infinity")
    return findings

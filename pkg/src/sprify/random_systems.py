"""Seeded random descriptor systems for property tests and benchmarks."""

import numpy as np

from .descriptor import DescriptorSystem, _best_shift, augmented_pencil
from .linalg import COND_LIMIT

__all__ = [
    "random_hurwitz",
    "random_regular_system",
    "random_sprifiable_system",
    "transform_system",
    "MODES",
]

MODES = ("generic", "stable-zero-dynamics", "cb-zero")


def _well_conditioned(rng, k, limit=20.0):
    while True:
        S = rng.standard_normal((k, k))
        if np.linalg.cond(S) <= limit:
            return S


def random_hurwitz(rng, k, lo=-3.0, hi=-0.2):
    """Real ``k x k`` matrix with eigenvalues in ``[lo, hi]`` (a complex pair
    with real part in that range when ``k >= 2``, half the time)."""
    D = np.zeros((k, k))
    i = 0
    while i < k:
        if k - i >= 2 and rng.random() < 0.5:
            a = rng.uniform(lo, hi)
            b = rng.uniform(0.1, 2.0)
            D[i:i + 2, i:i + 2] = [[a, b], [-b, a]]
            i += 2
        else:
            D[i, i] = rng.uniform(lo, hi)
            i += 1
    S = _well_conditioned(rng, k)
    return S @ D @ np.linalg.inv(S)


def _random_rank(rng, rows, cols, r):
    if r == 0:
        return np.zeros((rows, cols))
    return rng.standard_normal((rows, r)) @ rng.standard_normal((r, cols))


def _draw(rng, n, m, mode):
    if mode == "generic":
        E = _random_rank(rng, n, n, int(rng.integers(1, n + 1)))
        A = rng.standard_normal((n, n))
        B = rng.standard_normal((n, m))
        C = rng.standard_normal((m, n))
        D = _random_rank(rng, m, m, int(rng.integers(0, m + 1)))
    elif mode == "stable-zero-dynamics":
        # E = I, D invertible: the zero dynamics are A - B D^-1 C = F
        E = np.eye(n)
        B = rng.standard_normal((n, m))
        C = rng.standard_normal((m, n))
        D = rng.standard_normal((m, m)) + 2.0 * np.eye(m)
        A = random_hurwitz(rng, n) + B @ np.linalg.solve(D, C)
    elif mode == "cb-zero":
        # E = I, D = 0, C B singular: relative degree above one somewhere
        E = np.eye(n)
        A = rng.standard_normal((n, n))
        B = rng.standard_normal((n, m))
        C = rng.standard_normal((m, n))
        Qb, _ = np.linalg.qr(B)
        C = C - (C @ Qb) @ Qb.T
        if m > 1 and rng.random() < 0.5:
            C[0] = rng.standard_normal(n)
        D = np.zeros((m, m))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return DescriptorSystem(E, A, B, C, D)


def _acceptable(sys, cond_max, eig_band):
    p = augmented_pencil(sys)
    if np.linalg.cond(p.calA) > cond_max:
        return False
    if _best_shift(sys.E, sys.A)[1] > 1e8 or _best_shift(p.calE, p.calA)[1] > 1e8:
        return False
    # keep eigenvalues of calA^-1 calE either clearly zero or clearly nonzero
    mu = np.linalg.eigvals(np.linalg.solve(p.calA, p.calE))
    scale = max(1.0, np.max(np.abs(mu)))
    small = np.abs(mu) < 1e-6 * scale
    if np.any(small & (np.abs(mu) > 1e-12 * scale)):
        return False
    lam = 1.0 / mu[~small]
    return not np.any(np.abs(lam.real) < eig_band)


def random_regular_system(rng, n=None, m=None, mode=None, cond_max=1e6, eig_band=1e-4,
                          max_tries=1000):
    """A random regular system with well-conditioned invertible ``calA``.

    Parameters
    ----------
    rng : numpy.random.Generator
    n, m : int, optional
        Drawn from ``1..4`` and ``1..2`` when omitted (``m <= n``).
    mode : str, optional
        One of :data:`MODES`; drawn at random when omitted. ``"generic"``
        has random-rank E and D, ``"stable-zero-dynamics"`` is SPRifiable
        by construction, ``"cb-zero"`` has ``D = 0`` and singular ``C B``.
    cond_max : float
        Upper bound on ``cond(calA)``.
    eig_band : float
        Reject systems whose zero-dynamics eigenvalues have
        ``|Re| < eig_band`` (verdicts there are tolerance-dependent).
    """
    for _ in range(max_tries):
        nn = int(rng.integers(1, 5)) if n is None else n
        mm = int(rng.integers(1, min(2, nn) + 1)) if m is None else m
        md = MODES[int(rng.integers(0, len(MODES)))] if mode is None else mode
        sys = _draw(rng, nn, mm, md)
        if _acceptable(sys, cond_max, eig_band):
            return sys
    raise RuntimeError("random_regular_system: no acceptable draw")


def random_sprifiable_system(rng, n2=None, m=None, h1_rank=None):
    """A system that is SPRifiable by construction.

    Builds ``H(s) = s H1 + D2 + C2 (sI - A2)^-1 B2`` with Hurwitz ``A2`` and
    ``H1 = F F'`` PSD, realizes it as a descriptor system
    ``(E_h, A_h, B_h, C_h, D2)`` using a nilpotent block for ``s H1``, and
    returns the system whose inverse transfer function is ``H``: the
    augmented pencil of the realization read as a system.
    """
    n2 = int(rng.integers(1, 4)) if n2 is None else n2
    m = int(rng.integers(1, 3)) if m is None else m
    r = int(rng.integers(0, m + 1)) if h1_rank is None else h1_rank
    A2 = random_hurwitz(rng, n2)
    B2 = rng.standard_normal((n2, m))
    C2 = rng.standard_normal((m, n2))
    while True:
        D2 = rng.standard_normal((m, m)) + np.eye(m)
        if np.linalg.cond(D2) < 1e2:
            break
    V, _ = np.linalg.qr(rng.standard_normal((m, m)))
    F = V[:, :r] * np.sqrt(rng.uniform(0.5, 2.0, r))

    k = n2 + 2 * r
    E_h = np.zeros((k, k))
    E_h[:n2, :n2] = np.eye(n2)
    E_h[n2:n2 + r, n2 + r:] = np.eye(r)
    A_h = np.eye(k)
    A_h[:n2, :n2] = A2
    B_h = np.vstack([B2, np.zeros((r, m)), F.T])
    C_h = np.hstack([C2, -F, np.zeros((m, r))])

    E = np.zeros((k + m, k + m))
    E[:k, :k] = E_h
    A = np.block([[A_h, B_h], [C_h, D2]])
    B = np.vstack([np.zeros((k, m)), np.eye(m)])
    C = np.hstack([np.zeros((m, k)), -np.eye(m)])
    sys = DescriptorSystem(E, A, B, C, np.zeros((m, m)))
    if _best_shift(sys.E, sys.A)[1] > COND_LIMIT:
        return random_sprifiable_system(rng, n2, m, h1_rank)
    return sys


def transform_system(sys, T, S):
    """``(T E S, T A S, T B, C S, D)``: same transfer function, new basis."""
    return DescriptorSystem(T @ sys.E @ S, T @ sys.A @ S, T @ sys.B, sys.C @ S, sys.D)

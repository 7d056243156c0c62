"""Small hand-checkable systems used in the documentation, fixtures and tests."""

import numpy as np

from .descriptor import DescriptorSystem

__all__ = [
    "integrator",
    "descriptor_2x2",
    "unstable_inverse_2x2",
    "singular_a_and_d",
    "first_order_lead",
    "ALL",
]


def integrator():
    """x' = u, y = x.  G(s) = 1/s."""
    return DescriptorSystem(E=[[1.0]], A=[[0.0]], B=[[1.0]], C=[[1.0]], D=[[0.0]])


def descriptor_2x2():
    """Singular E with det(sE - A) == 1; G(s)^-1 has a single pole at -1/2."""
    return DescriptorSystem(
        E=[[0, 0], [1, 0]],
        A=[[1, 0], [0, 1]],
        B=[[-1, -1], [0, 0]],
        C=[[-1, 1], [0, 1]],
        D=[[-3, 0], [-1, 0]],
    )


def unstable_inverse_2x2():
    """G = diag((s-1)/(s+1), (s+1)/(s-1)); G^-1 has a pole at +1."""
    return DescriptorSystem(
        E=np.eye(2),
        A=[[-1, 0], [0, 1]],
        B=np.eye(2),
        C=[[-2, 0], [0, 2]],
        D=np.eye(2),
    )


def singular_a_and_d():
    """G = diag((s+1)/s, 1/(s+1)); G^-1 = diag(s/(s+1), s+1)."""
    return DescriptorSystem(
        E=np.eye(2),
        A=[[0, 0], [0, -1]],
        B=np.eye(2),
        C=np.eye(2),
        D=[[1, 0], [0, 0]],
    )


def first_order_lead():
    """G(s) = (s+1)/(s-2), realized with E=1, A=2, B=1, C=3, D=1."""
    return DescriptorSystem(E=[[1.0]], A=[[2.0]], B=[[1.0]], C=[[3.0]], D=[[1.0]])


ALL = {
    "integrator": integrator,
    "descriptor_2x2": descriptor_2x2,
    "unstable_inverse_2x2": unstable_inverse_2x2,
    "singular_a_and_d": singular_a_and_d,
    "first_order_lead": first_order_lead,
}

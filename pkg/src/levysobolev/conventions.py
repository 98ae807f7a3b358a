"""Fourier and sign conventions, fixed once and imported everywhere.

Transform pair:

    u_hat(xi) = int e^{+i<xi,x>} u(x) dx
    u(x)      = (2*pi)^{-d} int e^{-i<xi,x>} u_hat(xi) dxi

Characteristic function of the process at time t:

    mu_hat_t(xi) = E e^{i<xi,L_t>} = e^{-t*A(-xi)}

so the time-t propagator acting on transformed payoffs is the decaying
factor e^{-tau*A(xi)} (consistent with Re A >= 0).  Every module derives
its signs from these three lines; none hard-codes its own.
"""

import numpy as np


def propagator(symbol, tau, xi):
    """e^{-tau*A(xi)}: multiplier advancing u_hat by time tau."""
    return np.exp(-tau * symbol(xi))


def char_fn_values(symbol, t, xi):
    """mu_hat_t(xi) = e^{-t*A(-xi)} for xi of shape (...,) or (..., d)."""
    return np.exp(-t * symbol(np.negative(xi)))


def inv_scale(d: int) -> float:
    """(2*pi)^{-d} prefactor of the inverse transform."""
    return float((2.0 * np.pi) ** (-d))

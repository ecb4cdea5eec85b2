"""Model constants, nonlinearity, and the standing-wave profile.

The scalar equation is u_tt - u_xx + u - |u|^{p-1} u = 0 with subcritical
power 5/3 < p <= 2.  Its even positive stationary solution is

    Q(x) = ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}(a x),   a = (p-1)/2.

All exponent ladders hanging off Q are collected in ModelConstants.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import EVEN, Grid, ParityField

P_MIN = 5.0 / 3.0
P_MAX = 2.0


class ExponentError(ValueError):
    """Raised when p leaves the admissible window (5/3, 2]."""


@dataclass(frozen=True)
class ModelConstants:
    """Derived constants of the linearization around Q at a given power p.

    k[j] = (p+1)/2 - j (p-1)/2 for j = 0..4 is the ladder of decay rates;
    mu[m] = 1 - k[m]^2 the associated eigenvalues.  The number of bound
    states of the linearized operator is n_bound = N + 1 with N = 3 for
    p < 2 and N = 2 at p = 2 (where k[3] = 0 and the third state is
    absorbed into the continuum threshold).
    """

    p: float

    def __post_init__(self):
        if not (P_MIN < self.p <= P_MAX):
            raise ExponentError(f"p = {self.p} outside (5/3, 2]")

    @property
    def a(self) -> float:
        return (self.p - 1.0) / 2.0

    @property
    def k(self) -> np.ndarray:
        j = np.arange(5)
        return (self.p + 1.0) / 2.0 - j * (self.p - 1.0) / 2.0

    @property
    def mu(self) -> np.ndarray:
        return 1.0 - self.k[:4] ** 2

    @property
    def N(self) -> int:
        return 2 if self.p == P_MAX else 3

    @property
    def n_bound(self) -> int:
        return self.N + 1

    @property
    def nu0(self) -> float:
        """Growth rate of the unstable mode: mu[0] = -nu0^2 < 0."""
        return float(np.sqrt(-self.mu[0]))

    @property
    def lam(self) -> float:
        """Internal-mode frequency: mu[2] = lam^2 in (0, 1)."""
        return float(np.sqrt(self.mu[2]))

    @property
    def xi_fgr(self) -> float:
        """Continuum wavenumber resonant with twice the internal frequency."""
        return float(np.sqrt(4.0 * self.mu[2] - 1.0))


def constants(p: float) -> ModelConstants:
    return ModelConstants(p=float(p))


# ---------------------------------------------------------------------------
# nonlinearity


def f_nonlin(u: np.ndarray, p: float) -> np.ndarray:
    """f(u) = |u|^{p-1} u, the focusing power nonlinearity."""
    return np.abs(u) ** (p - 1.0) * u


def f_prime(u: np.ndarray, p: float) -> np.ndarray:
    return p * np.abs(u) ** (p - 1.0)


def f_second_at_Q(q_vals: np.ndarray, p: float) -> np.ndarray:
    """f''(Q) = p (p-1) Q^{p-2}, used by the quadratic-in-z source terms."""
    return p * (p - 1.0) * q_vals ** (p - 2.0)


# ---------------------------------------------------------------------------
# profile evaluation
#
# Q^k for fractional k is evaluated through log Q to stay finite in the far
# field where Q underflows; logcosh is computed overflow-free.


def _logcosh(y: np.ndarray) -> np.ndarray:
    ay = np.abs(y)
    return ay + np.log1p(np.exp(-2.0 * ay)) - np.log(2.0)


def log_Q(x: np.ndarray, p: float) -> np.ndarray:
    a = (p - 1.0) / 2.0
    return np.log((p + 1.0) / 2.0) / (p - 1.0) - (2.0 / (p - 1.0)) * _logcosh(a * x)


def Q_power(x: np.ndarray, p: float, k: float) -> np.ndarray:
    return np.exp(k * log_Q(x, p))


def Q_values(x: np.ndarray, p: float) -> np.ndarray:
    return Q_power(x, p, 1.0)


def soliton(grid: Grid, p: float) -> ParityField:
    """The standing-wave profile Q as an even field."""
    return ParityField(grid, Q_values(grid.x, p), EVEN)


def soliton_power(grid: Grid, p: float, k: float) -> ParityField:
    return ParityField(grid, Q_power(grid.x, p, k), EVEN)


def soliton_derivative(grid: Grid, p: float) -> ParityField:
    """Q'(x) = -tanh(a x) Q(x), evaluated in closed form."""
    a = (p - 1.0) / 2.0
    vals = -np.tanh(a * grid.x) * Q_values(grid.x, p)
    vals[0] = 0.0
    from .fields import ODD
    return ParityField(grid, vals, ODD)


__all__ = [
    "P_MIN", "P_MAX", "ExponentError", "ModelConstants", "constants",
    "f_nonlin", "f_prime", "f_second_at_Q",
    "log_Q", "Q_power", "Q_values", "soliton", "soliton_power",
    "soliton_derivative",
]

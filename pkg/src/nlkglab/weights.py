"""Cutoff families, virial weights, and weighted norms.

One fixed C^2 bump chi anchors everything: chi = 1 on [0, 1], 0 beyond 2,
with a polynomial smoothstep transition.  From it derive

    chi_A(x)  = chi(x / A)
    zeta_C(x) = exp(-|x| (1 - chi(x)) / C)     (unit-scale chi inside)
    phi_C(x)  = int_0^x zeta_C(y)^2 dy          (odd antiderivative)
    psi_{A,B} = chi_A^2 phi_B

and the virial generator S_C f = (1/2) zeta_C^2 f + phi_C f'.  phi_C is
accumulated by corrected cumulative trapezoid so that the defining identity
phi_C' = zeta_C^2 holds to stencil order, which is what makes S_C
skew-adjoint at the discrete level.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .fields import EVEN, Grid, ParityField, StatePair, deriv1, integrate_even


def smoothstep(t):
    """C^4 ramp q with q(0) = 0, q(1) = 1, q^(k) = 0 at both ends for k <= 4.

    The extra smoothness (over the common cubic step) keeps trapezoid sums
    of chi-weighted integrands at full stencil order; with a C^2 step the
    junction kinks cap quadrature cancellation near 1e-7.
    """
    t = np.clip(t, 0.0, 1.0)
    return t**5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))))


def _smoothstep_d1(t):
    t = np.clip(t, 0.0, 1.0)
    return 630.0 * t**4 * (1.0 - t) ** 4


def _smoothstep_d2(t):
    t = np.clip(t, 0.0, 1.0)
    return 2520.0 * t**3 * (1.0 - t) ** 3 * (1.0 - 2.0 * t)


def chi(x):
    """Even bump: 1 on [0, 1], smoothstep down across [1, 2], 0 beyond."""
    ax = np.abs(x)
    return smoothstep(2.0 - ax)


def chi_d1(x):
    """d/dx chi for x >= 0 (odd continuation implied)."""
    ax = np.abs(x)
    return -_smoothstep_d1(2.0 - ax) * np.sign(x)


def chi_d2(x):
    ax = np.abs(x)
    return _smoothstep_d2(2.0 - ax)


@dataclass(frozen=True)
class WeightConfig:
    """Localization scales of the monitored functionals."""

    A: float = 40.0
    B: float = 10.0
    kappa: float = 0.1
    eps: float = 0.3

    def __post_init__(self):
        if self.A <= 0 or self.B <= 0 or self.kappa <= 0 or self.eps <= 0:
            raise ValueError("weight scales must be positive")


def _zeta(x: np.ndarray, C: float) -> np.ndarray:
    return np.exp(-np.abs(x) * (1.0 - chi(x)) / C)


def _zeta_sq_d1(x: np.ndarray, C: float) -> np.ndarray:
    """Closed-form (zeta_C^2)'."""
    zsq = _zeta(x, C) ** 2
    return zsq * (-2.0 / C) * (np.sign(x) * (1.0 - chi(x)) - np.abs(x) * chi_d1(x))


def _phi(grid: Grid, C: float, refine: int = 8) -> np.ndarray:
    """Antiderivative of zeta_C^2 from 0 by corrected cumulative trapezoid.

    The accumulation runs on a ``refine``-times finer grid with the analytic
    slope correction -h^2/12 (zeta^2)', then subsamples back.  Refinement is
    cheap (zeta is closed form) and pushes the bump-junction defect of the
    trapezoid far below stencil order, which keeps S_C skew-adjoint.
    """
    nf = (grid.n - 1) * refine + 1
    xf = np.linspace(0.0, grid.L, nf)
    hf = grid.dx / refine
    zsq = _zeta(xf, C) ** 2
    base = cumulative_trapezoid(zsq, dx=hf, initial=0.0)
    phi_f = base - hf * hf / 12.0 * _zeta_sq_d1(xf, C)
    return phi_f[::refine].copy()


@dataclass(frozen=True)
class WeightSet:
    """All weight arrays for one grid and one scale choice, built eagerly."""

    grid: Grid
    config: WeightConfig

    @cached_property
    def chi_A(self) -> np.ndarray:
        return chi(self.grid.x / self.config.A)

    @cached_property
    def chi_A_d1(self) -> np.ndarray:
        return chi_d1(self.grid.x / self.config.A) / self.config.A

    @cached_property
    def zeta_A(self) -> np.ndarray:
        return _zeta(self.grid.x, self.config.A)

    @cached_property
    def zeta_B(self) -> np.ndarray:
        return _zeta(self.grid.x, self.config.B)

    @cached_property
    def phi_A(self) -> np.ndarray:
        return _phi(self.grid, self.config.A)

    @cached_property
    def phi_B(self) -> np.ndarray:
        return _phi(self.grid, self.config.B)

    @cached_property
    def psi_AB(self) -> np.ndarray:
        return self.chi_A**2 * self.phi_B

    @cached_property
    def psi_AB_d1(self) -> np.ndarray:
        # product rule with the exact phi' = zeta^2 substitution
        return (2.0 * self.chi_A * self.chi_A_d1 * self.phi_B
                + self.chi_A**2 * self.zeta_B**2)

    @cached_property
    def exp_kappa_bracket(self) -> np.ndarray:
        x = self.grid.x
        return np.exp(-self.config.kappa * np.sqrt(1.0 + x * x))

    @cached_property
    def sech_2x_over_A(self) -> np.ndarray:
        return 1.0 / np.cosh(2.0 * self.grid.x / self.config.A)

    @cached_property
    def sech_kappa(self) -> np.ndarray:
        return 1.0 / np.cosh(self.config.kappa * self.grid.x)


def weight_set(grid: Grid, A: float = 40.0, B: float = 10.0,
               kappa: float = 0.1, eps: float = 0.3) -> WeightSet:
    return WeightSet(grid=grid, config=WeightConfig(A=A, B=B, kappa=kappa, eps=eps))


# ---------------------------------------------------------------------------
# virial generator


def apply_S(f: ParityField, half_weight: np.ndarray,
            antideriv: np.ndarray) -> ParityField:
    """S f = (1/2) w f + m f' with w even and m odd; preserves parity."""
    fp = deriv1(f)
    return ParityField(f.grid, 0.5 * half_weight * f.values + antideriv * fp.values,
                       f.parity)


def apply_S_A(eta: StatePair, ws: WeightSet) -> StatePair:
    """Componentwise virial generator at scale A."""
    w = ws.zeta_A**2
    m = ws.phi_A
    return StatePair(apply_S(eta.u1, w, m), apply_S(eta.u2, w, m))


def apply_S_AB(v: StatePair, ws: WeightSet) -> StatePair:
    """Componentwise inner-localized generator built on psi_{A,B}."""
    return StatePair(apply_S(v.u1, ws.psi_AB_d1, ws.psi_AB),
                     apply_S(v.u2, ws.psi_AB_d1, ws.psi_AB))


def apply_sigma3(u: StatePair, weight: np.ndarray = None) -> StatePair:
    """sigma_3 u = (u1, -u2), optionally through a scalar even weight."""
    if weight is None:
        return StatePair(u.u1, -1.0 * u.u2)
    return StatePair(
        ParityField(u.u1.grid, weight * u.u1.values, u.u1.parity),
        ParityField(u.u2.grid, -weight * u.u2.values, u.u2.parity),
    )


# ---------------------------------------------------------------------------
# weighted norms


def norm_sigma_A(eta: StatePair, A: float) -> float:
    """|sech(2x/A) d_x eta_1| + A^{-1} |sech(2x/A) eta|."""
    g = eta.grid
    w = 1.0 / np.cosh(2.0 * g.x / A)
    d1 = deriv1(eta.u1)
    grad = np.sqrt(np.real(integrate_even(g, np.abs(w * d1.values) ** 2)))
    low = np.sqrt(np.real(
        integrate_even(g, np.abs(w * eta.u1.values) ** 2)
        + integrate_even(g, np.abs(w * eta.u2.values) ** 2)))
    return float(grad + low / A)


def norm_l2_minus_kappa(eta, kappa: float) -> float:
    """|sech(kappa x) eta| for a scalar field or a pair."""
    if isinstance(eta, StatePair):
        g = eta.grid
        w = 1.0 / np.cosh(kappa * g.x)
        return float(np.sqrt(np.real(
            integrate_even(g, np.abs(w * eta.u1.values) ** 2)
            + integrate_even(g, np.abs(w * eta.u2.values) ** 2))))
    g = eta.grid
    w = 1.0 / np.cosh(kappa * g.x)
    return float(np.sqrt(np.real(integrate_even(g, np.abs(w * eta.values) ** 2))))


def norm_h1_minus_a(f: ParityField, a: float) -> float:
    """H^1 norm of the product sech(a x) f."""
    g = f.grid
    w = 1.0 / np.cosh(a * g.x)
    prod = ParityField(g, w * f.values, f.parity)
    dp = deriv1(prod)
    return float(np.sqrt(np.real(
        integrate_even(g, np.abs(dp.values) ** 2)
        + integrate_even(g, np.abs(prod.values) ** 2))))


__all__ = [
    "smoothstep", "chi", "chi_d1", "chi_d2", "WeightConfig", "WeightSet",
    "weight_set", "apply_S", "apply_S_A", "apply_S_AB", "apply_sigma3",
    "norm_sigma_A", "norm_l2_minus_kappa", "norm_h1_minus_a",
]

"""The free Stein operator, its discrepancy, and the dual Stein equation.

The two-variable operator L[g](x, y) = -x g(x) + (g(y) - g(x))/(y - x)
pairs against product measures.  Against monomial test functions the
pairing collapses to pure moment arithmetic (the difference quotient of
x^r is the complete homogeneous sum), which is how everything here is
evaluated: no grids, no diagonal issues.

The dual Stein equation is solved by integrating the pairing along the
semicircular Ornstein-Uhlenbeck flow, whose action on free cumulants is
explicit: kappa_j -> e^{-j theta} kappa_j for j != 2 and
kappa_2 -> e^{-2 theta} kappa_2 + 1 - e^{-2 theta}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .analytic import MeasureSpec
from .errors import TailTruncationWarning
from .momentalg import (
    FreeCumulantSequence,
    MomentSequence,
    cumulants_to_moments,
    moments_to_cumulants,
    semicircle_moments,
)

_DIAG_CUTOFF = 1e-8
_DIAG_STEP = 1e-5
TAIL_TOL = 1e-10

#: Fixed measures used by consistency checks and the acceptance suite:
#: standard semicircle, symmetric Bernoulli, a skewed two-atom law
#: (centered, unit variance, m_3 != 0), a symmetric three-atom law, and a
#: shifted/scaled semicircle.
MEASURE_BATTERY = (
    MeasureSpec.semicircle(0.0, 1.0),
    MeasureSpec.atomic([(-1.0, 0.5), (1.0, 0.5)]),
    MeasureSpec.atomic([(1.5, 4 / 13), (-2 / 3, 9 / 13)]),
    MeasureSpec.atomic(
        [(-math.sqrt(1.5), 1 / 3), (0.0, 1 / 3), (math.sqrt(1.5), 1 / 3)]
    ),
    MeasureSpec.semicircle(-0.3, 0.49),
)


def stein_operator_eval(g, x: float, y: float) -> float:
    """-x g(x) + (g(y) - g(x))/(y - x), extended continuously to y = x.

    On the diagonal (|y - x| < 1e-8) the difference quotient becomes g'(x),
    taken by a central difference with step 1e-5.
    """
    if abs(y - x) < _DIAG_CUTOFF:
        deriv = (g(x + _DIAG_STEP) - g(x - _DIAG_STEP)) / (2 * _DIAG_STEP)
        return -x * g(x) + deriv
    return -x * g(x) + (g(y) - g(x)) / (y - x)


@dataclass(frozen=True)
class SteinDiscrepancy:
    """Deviations d_r = m_{r+1} - sum_{k<r} m_k m_{r-1-k}, r = 0..N-1.

    The vector vanishes identically exactly when the moments are the
    semicircle's through order N.  Oriented like the moment recursion:
    the raw operator pairing <mu (x) mu, L[x^r]> equals -d_r.
    """

    values: tuple

    @property
    def max_abs(self) -> float:
        return max(abs(float(v)) for v in self.values)

    def is_zero(self, tol: float = 1e-12) -> bool:
        return self.max_abs <= tol


def stein_discrepancy(m: MomentSequence) -> SteinDiscrepancy:
    """Pairing of mu (x) mu against L[x^r] for r = 0..order-1."""
    out = []
    for r in range(m.order):
        out.append(m[r + 1] - sum(m[k] * m[r - 1 - k] for k in range(r)))
    return SteinDiscrepancy(tuple(out))


def generator_apply(m: MomentSequence, p: int):
    """Closed form of d/dtheta <P_theta mu, x^p> at theta = 0.

    Equals -p m_p + p sum_{l=0}^{p-2} m_l m_{p-2-l}; identically zero on
    the semicircle by its moment recursion.
    """
    if p < 1:
        raise ValueError("power must be >= 1")
    if p > m.order:
        raise ValueError(f"power {p} exceeds truncation order {m.order}")
    return -p * m[p] + p * sum(m[l] * m[p - 2 - l] for l in range(p - 1))


def evolve_cumulants(kappa: FreeCumulantSequence, theta: float) -> FreeCumulantSequence:
    """Free cumulants of P_theta[mu] from those of mu."""
    if theta < 0:
        raise ValueError("semigroup time must be nonnegative")
    u = math.exp(-theta)
    vals = []
    for j, k in enumerate(kappa.values, start=1):
        v = u**j * k
        if j == 2:
            v = v + 1.0 - u * u
        vals.append(v)
    return FreeCumulantSequence(vals)


def evolved_moments(m: MomentSequence, theta: float) -> MomentSequence:
    """Moments of P_theta applied to the law with moments ``m``."""
    return cumulants_to_moments(evolve_cumulants(moments_to_cumulants(m), theta))


def generator_finite_difference(mu: MeasureSpec, p: int, theta_step: float) -> float:
    """(m_p(P_theta mu) - m_p(mu)) / theta at theta = theta_step.

    The evolved moments come from the exact cumulant flow, so the only
    error is the O(theta_step) finite-difference bias against
    :func:`generator_apply`.
    """
    if not 0 < theta_step <= 1e-3:
        raise ValueError("theta_step must lie in (0, 1e-3]")
    m0 = mu.moments(max(p, 2))
    m1 = evolved_moments(m0, theta_step)
    return (float(m1[p]) - float(m0[p])) / theta_step


def polynomial_expectation(m: MomentSequence, coeffs):
    """<mu, h> for h(x) = sum_p coeffs[p] x^p."""
    if len(coeffs) - 1 > m.order:
        raise ValueError("polynomial degree exceeds moment order")
    return sum(c * m[p] for p, c in enumerate(coeffs))


def _pairing_from_moments(m: MomentSequence, coeffs):
    """<nu (x) nu, L[Dh]> for h with the given coefficients."""
    acc = 0.0
    for p, c in enumerate(coeffs):
        if p == 0 or c == 0:
            continue
        acc += c * p * (-m[p] + sum(m[l] * m[p - 2 - l] for l in range(p - 1)))
    return acc


def dual_stein_pairing(
    mu: MeasureSpec, h, theta_max: float = 40.0, n_quad: int = 400
) -> float:
    """Integral over theta of <P_theta mu (x) P_theta mu, L[Dh]>.

    Solves the dual Stein equation: the result equals <s, h> - <mu, h>.
    Integration substitutes u = e^{-theta}, under which the integrand is a
    polynomial in u divided by u with no constant term, and applies
    Gauss-Legendre with one doubling refinement.  A warning is raised if
    the integrand has not decayed below 1e-10 at theta_max.
    """
    coeffs = tuple(float(c) for c in h)
    deg = len(coeffs) - 1
    if deg > 8:
        raise ValueError("test polynomials capped at degree 8")
    if theta_max < 20:
        raise ValueError("theta_max must be >= 20")
    if n_quad < 200:
        raise ValueError("n_quad must be >= 200")
    order = max(deg, 2)
    kappa = moments_to_cumulants(mu.moments(order))

    def integrand(theta: float) -> float:
        m_theta = cumulants_to_moments(evolve_cumulants(kappa, theta))
        return _pairing_from_moments(m_theta, coeffs)

    tail = abs(integrand(theta_max))
    if tail > TAIL_TOL:
        warnings.warn(
            f"integrand {tail:.2e} at theta_max={theta_max}; tail truncated",
            TailTruncationWarning,
            stacklevel=2,
        )

    u0 = math.exp(-theta_max)

    def gauss(n: int) -> float:
        nodes, wts = np.polynomial.legendre.leggauss(n)
        u = 0.5 * (nodes + 1.0) * (1.0 - u0) + u0
        scale = 0.5 * (1.0 - u0)
        total = 0.0
        for ui, wi in zip(u, wts):
            total += wi * integrand(-math.log(ui)) / ui
        return total * scale

    est = gauss(n_quad)
    for _ in range(3):
        finer = gauss(2 * n_quad)
        if abs(finer - est) <= 1e-12 * (1.0 + abs(finer)):
            return finer
        est, n_quad = finer, 2 * n_quad
    return est

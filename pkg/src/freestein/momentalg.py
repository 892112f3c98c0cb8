"""Moment sequences, free cumulants, and cumulant-level free convolution.

Transforms run over the non-crossing lattice of :mod:`freestein.ncpart`.
Arithmetic deliberately stays in plain Python numbers, so integer and
Fraction inputs round-trip exactly; floats round-trip to ~1e-15.
"""

from __future__ import annotations

import math

import numpy as np

from . import ncpart

HANKEL_TOL = 1e-10
MATCH_TOL = 1e-12
MAX_ORDER = 12


class MomentSequence:
    """Truncated moment vector (m_0, ..., m_N) of a compactly supported law.

    Construction enforces m_0 = 1, finite entries, and Hankel positive
    semidefiniteness up to ``HANKEL_TOL`` (a necessary condition for a
    genuine measure).  Immutable.
    """

    __slots__ = ("values",)

    def __init__(self, values, validate: bool = True):
        vals = tuple(values)
        if len(vals) < 3:
            raise ValueError("moment sequence needs order >= 2 (m_0, m_1, m_2)")
        if validate:
            arr = np.asarray([float(v) for v in vals])
            if not np.all(np.isfinite(arr)):
                raise ValueError("moments must be finite")
            if abs(arr[0] - 1.0) > MATCH_TOL:
                raise ValueError(f"m_0 must equal 1, got {vals[0]}")
            k = (len(vals) - 1) // 2
            hank = np.array([[arr[i + j] for j in range(k + 1)] for i in range(k + 1)])
            lam = np.linalg.eigvalsh(hank)
            if lam.min() < -HANKEL_TOL:
                raise ValueError(
                    f"Hankel matrix not positive semidefinite (min eig {lam.min():.3e})"
                )
        self.values = vals

    @property
    def order(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, j: int):
        return self.values[j]

    def __eq__(self, other) -> bool:
        return isinstance(other, MomentSequence) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self) -> str:
        return f"MomentSequence({self.values})"

    def close_to(self, other: "MomentSequence", tol: float = 1e-12) -> bool:
        if self.order != other.order:
            return False
        return max(abs(a - b) for a, b in zip(self.values, other.values)) <= tol


class FreeCumulantSequence:
    """Truncated free cumulants (kappa_1, ..., kappa_N)."""

    __slots__ = ("values",)

    def __init__(self, values):
        vals = tuple(values)
        if not vals:
            raise ValueError("empty cumulant sequence")
        if not np.all(np.isfinite([float(v) for v in vals])):
            raise ValueError("cumulants must be finite")
        self.values = vals

    @property
    def order(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int):
        """kappa_j, 1-indexed as in the mathematics."""
        if j < 1:
            raise IndexError("cumulants are indexed from 1")
        return self.values[j - 1]

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeCumulantSequence) and self.values == other.values

    def __repr__(self) -> str:
        return f"FreeCumulantSequence({self.values})"


def _check_order(order: int) -> None:
    if order > MAX_ORDER:
        raise ValueError(f"transforms capped at order {MAX_ORDER} (got {order})")


def semicircle_moments(order: int) -> MomentSequence:
    """Moments of the standard semicircle via m_{r+1} = sum m_k m_{r-1-k}.

    Odd moments vanish; even moments are the Catalan numbers.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    m = [1, 0]
    for r in range(1, order):
        m.append(sum(m[k] * m[r - 1 - k] for k in range(r)))
    return MomentSequence(m[: order + 1], validate=False)


def cumulants_to_moments(k: FreeCumulantSequence) -> MomentSequence:
    """m_n = sum over NC(n) of the product of kappa_{|V|} over blocks V."""
    _check_order(k.order)
    m = [1]
    for n in range(1, k.order + 1):
        counts = ncpart.nc_type_counts(n)
        acc = 0
        for sizes, cnt in counts.items():
            term = cnt
            for s in sizes:
                term = term * k[s]
            acc = acc + term
        m.append(acc)
    return MomentSequence(m, validate=False)


def moments_to_cumulants(m: MomentSequence) -> FreeCumulantSequence:
    """Free cumulants by Moebius inversion over NC(n).

    Equivalently (and exactly), the triangular solve of the moment-cumulant
    relation: kappa_n is m_n minus the contribution of all non-crossing
    partitions with more than one block.  Inverse of
    :func:`cumulants_to_moments`.
    """
    _check_order(m.order)
    kappa = []
    for n in range(1, m.order + 1):
        counts = ncpart.nc_type_counts(n)
        acc = m[n]
        for sizes, cnt in counts.items():
            if sizes == (n,):
                continue
            term = cnt
            for s in sizes:
                term = term * kappa[s - 1]
            acc = acc - term
        kappa.append(acc)
    return FreeCumulantSequence(kappa)


def free_convolve_cumulants(a: MomentSequence, b: MomentSequence) -> MomentSequence:
    """Moments of the free additive convolution, via cumulant additivity."""
    if a.order != b.order:
        raise ValueError(f"orders differ: {a.order} vs {b.order}")
    ka = moments_to_cumulants(a)
    kb = moments_to_cumulants(b)
    return cumulants_to_moments(
        FreeCumulantSequence(tuple(x + y for x, y in zip(ka.values, kb.values)))
    )


def dilate_moments(m: MomentSequence, r) -> MomentSequence:
    """Pushforward under x -> r*x: m_j -> r^j m_j."""
    if r == 0:
        raise ValueError("dilation by 0 is degenerate")
    return MomentSequence(
        tuple(r**j * v for j, v in enumerate(m.values)), validate=False
    )


def shift_moments(m: MomentSequence, c) -> MomentSequence:
    """Pushforward under x -> x + c (binomial re-expansion)."""
    n = m.order
    out = []
    for j in range(n + 1):
        out.append(sum(math.comb(j, i) * c ** (j - i) * m[i] for i in range(j + 1)))
    return MomentSequence(out, validate=False)


def gauss_analog(m: MomentSequence) -> MomentSequence:
    """Semicircle moments with the same mean and variance as ``m``."""
    var = m[2] - m[1] ** 2
    if float(var) <= 0:
        raise ValueError("gauss analog needs positive variance")
    kappa = [m[1], var] + [0] * (m.order - 2)
    return cumulants_to_moments(FreeCumulantSequence(kappa))


def matching_rank(m: MomentSequence) -> int:
    """Largest order through which ``m`` matches its mean/variance semicircle.

    Always at least 2, since the comparison semicircle matches the mean
    and variance by construction.
    """
    if float(m[2] - m[1] ** 2) <= 0:
        raise ValueError("matching rank needs a non-degenerate law")
    g = gauss_analog(m)
    q = 0
    for j in range(1, m.order + 1):
        if abs(m[j] - g[j]) <= MATCH_TOL * max(1.0, abs(float(g[j]))):
            q = j
        else:
            break
    return q


def mixed_moment(kappa_a: FreeCumulantSequence, m_b: MomentSequence, n: int):
    """tau[(ab)^n] for free a, b with the given cumulants / moments.

    Sums kappa_pi[a] * tau_{K(pi)}[b] over pi in NC(n); K is the Kreweras
    complement.
    """
    if n < 1 or n > 8:
        raise ValueError("mixed moments supported for 1 <= n <= 8")
    if kappa_a.order < n or m_b.order < n:
        raise ValueError("sequences truncated below the requested length")
    acc = 0
    for sizes_pi, sizes_k in ncpart.nc_kreweras_size_pairs(n):
        term = 1
        for s in sizes_pi:
            term = term * kappa_a[s]
        for s in sizes_k:
            term = term * m_b[s]
        acc = acc + term
    return acc

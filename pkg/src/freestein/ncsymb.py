"""Noncommutative word algebra over two letters, with a matrix oracle.

Polynomials live in the free algebra on A and R, with coefficients that
are themselves polynomials in a commuting scalar z (stored as coefficient
tuples, constant term first).  Words are canonical run-length tuples like
``(("A", 2), ("R", 1))`` for A^2 R; adjacent equal letters merge and zero
coefficients are pruned.

The module implements the interpolation polynomial

    Delta(a, r) = 2 z r - a r - r a - r^2  (= (z-a)^2 - (z-a-r)^2),

its powers, and the telescoping resolvent expansion

    g(a+r) = g(a+r) (Delta g(a))^q + sum_{j<q} g(a) (Delta g(a))^j,

with g the squared resolvent g(x) = ((z - x)^{-1})^2, checked numerically
on seeded matrix batteries.
"""

from __future__ import annotations

import numpy as np

MAX_TERMS = 100_000
MAX_MATRIX_DIM = 12
COND_LIMIT = 1e8


def _zp_trim(c: tuple) -> tuple:
    i = len(c)
    while i > 0 and c[i - 1] == 0:
        i -= 1
    return tuple(c[:i])


def _zp_add(a: tuple, b: tuple) -> tuple:
    n = max(len(a), len(b))
    return _zp_trim(
        tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))
    )


def _zp_mul(a: tuple, b: tuple) -> tuple:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return _zp_trim(tuple(out))


def _zp_eval(c: tuple, z: complex) -> complex:
    acc = 0.0 + 0.0j
    for coef in reversed(c):
        acc = acc * z + coef
    return acc


def _word_concat(w1: tuple, w2: tuple) -> tuple:
    if not w1:
        return w2
    if not w2:
        return w1
    if w1[-1][0] == w2[0][0]:
        return w1[:-1] + ((w1[-1][0], w1[-1][1] + w2[0][1]),) + w2[1:]
    return w1 + w2


class NcPolynomial:
    """A finite sum of words in A, R with z-polynomial coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for word, coeff in (terms or {}).items():
            c = _zp_trim(tuple(coeff))
            if c:
                clean[tuple(word)] = c
        self.terms = clean

    @classmethod
    def unit(cls) -> "NcPolynomial":
        return cls({(): (1,)})

    @classmethod
    def letter(cls, name: str, exp: int = 1) -> "NcPolynomial":
        if name not in ("A", "R"):
            raise ValueError("letters are 'A' and 'R'")
        return cls({((name, exp),): (1,)})

    @classmethod
    def scalar(cls, coeff) -> "NcPolynomial":
        """Constant-in-word polynomial; coeff is a z-coefficient tuple."""
        return cls({(): tuple(coeff)})

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, NcPolynomial) and self.terms == other.terms

    def __add__(self, other: "NcPolynomial") -> "NcPolynomial":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = _zp_add(out.get(w, ()), c)
        return NcPolynomial(out)

    def __sub__(self, other: "NcPolynomial") -> "NcPolynomial":
        return self + other.scale((-1,))

    def scale(self, coeff) -> "NcPolynomial":
        c = tuple(coeff)
        return NcPolynomial({w: _zp_mul(v, c) for w, v in self.terms.items()})

    def __mul__(self, other: "NcPolynomial") -> "NcPolynomial":
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = _word_concat(w1, w2)
                prod = _zp_mul(c1, c2)
                out[w] = _zp_add(out.get(w, ()), prod) if w in out else prod
                if len(out) > MAX_TERMS:
                    raise RuntimeError(f"expansion exceeded {MAX_TERMS} terms")
        return NcPolynomial(out)

    def __pow__(self, j: int) -> "NcPolynomial":
        if j < 0:
            raise ValueError("negative word powers are not defined")
        acc = NcPolynomial.unit()
        for _ in range(j):
            acc = acc * self
        return acc

    def coefficient(self, word) -> tuple:
        """z-polynomial coefficient of a canonical word."""
        return self.terms.get(tuple(word), ())

    def evaluate(self, a_val: np.ndarray, r_val: np.ndarray, z_val: complex) -> np.ndarray:
        return eval_matrix(self, a_val, r_val, z_val)

    def __repr__(self) -> str:
        if not self.terms:
            return "NcPolynomial(0)"
        bits = []
        for w, c in sorted(self.terms.items()):
            word = "".join(f"{ltr}^{e}" if e > 1 else ltr for ltr, e in w) or "1"
            bits.append(f"({c})*{word}")
        return "NcPolynomial(" + " + ".join(bits) + ")"


def delta_poly() -> NcPolynomial:
    """Delta = 2 z R - A R - R A - R^2 (the symmetrised (z-a)r minus r^2)."""
    return NcPolynomial(
        {
            (("R", 1),): (0, 2),
            (("A", 1), ("R", 1)): (-1,),
            (("R", 1), ("A", 1)): (-1,),
            (("R", 2),): (-1,),
        }
    )


def a_delta() -> NcPolynomial:
    """A * Delta, the factor whose powers drive the error expansion."""
    return NcPolynomial.letter("A") * delta_poly()


def expand_power(p: NcPolynomial, j: int) -> NcPolynomial:
    """Canonical expansion of p^j (blow-up guarded at 1e5 terms)."""
    if j > 6:
        raise ValueError("expansion powers capped at 6")
    return p**j


def core_multi_index(word) -> tuple:
    """Run exponents of a word after stripping leading/trailing A-runs.

    This is the multi-index whose length is bounded by the expansion
    support condition: every word of (A Delta)^j has a core of fewer than
    2j runs (the boundary A-runs are absorbed by adjacent resolvent
    factors in the estimates that consume the expansion).
    """
    runs = list(word)
    if runs and runs[0][0] == "A":
        runs = runs[1:]
    if runs and runs[-1][0] == "A":
        runs = runs[:-1]
    return tuple(e for _, e in runs)


def eval_matrix(
    p: NcPolynomial, a_val: np.ndarray, r_val: np.ndarray, z_val: complex
) -> np.ndarray:
    """Substitute square matrices for A, R and a scalar for z."""
    a = np.asarray(a_val, dtype=complex)
    r = np.asarray(r_val, dtype=complex)
    if a.shape != r.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("A and R must be square matrices of the same dimension")
    d = a.shape[0]
    if d > MAX_MATRIX_DIM:
        raise ValueError(f"matrix oracle capped at dimension {MAX_MATRIX_DIM}")
    out = np.zeros((d, d), dtype=complex)
    eye = np.eye(d, dtype=complex)
    for word, coeff in p.terms.items():
        acc = eye
        for letter, exp in word:
            base = a if letter == "A" else r
            acc = acc @ np.linalg.matrix_power(base, exp)
        out = out + _zp_eval(coeff, z_val) * acc
    return out


def _resolvent_sq(x: np.ndarray, z: complex) -> np.ndarray:
    d = x.shape[0]
    res = np.linalg.inv(z * np.eye(d, dtype=complex) - x)
    return res @ res


def resolvent_lemma_check(
    a_val: np.ndarray, r_val: np.ndarray, z_val: complex, q: int
) -> float:
    """Max-abs residual of the telescoping expansion of g(A+R).

    g is the squared resolvent.  Returns
    ``max | g(A+R) - g(A+R)(Delta g(A))^q - sum_{j<q} g(A)(Delta g(A))^j |``,
    which is zero in exact arithmetic for every q >= 1.
    """
    if q < 1 or q > 5:
        raise ValueError("q must lie in 1..5")
    a = np.asarray(a_val, dtype=complex)
    r = np.asarray(r_val, dtype=complex)
    d = a.shape[0]
    eye = np.eye(d, dtype=complex)
    for x, name in ((a, "z - A"), (a + r, "z - A - R")):
        cond = np.linalg.cond(z_val * eye - x)
        if cond >= COND_LIMIT:
            raise ValueError(f"resolvent {name} too ill-conditioned (cond {cond:.2e})")
    g_a = _resolvent_sq(a, z_val)
    g_ar = _resolvent_sq(a + r, z_val)
    delta = eval_matrix(delta_poly(), a, r, z_val)
    dg = delta @ g_a
    rhs = g_ar @ np.linalg.matrix_power(dg, q)
    term = eye
    for _ in range(q):
        rhs = rhs + g_a @ term
        term = term @ dg
    return float(np.abs(g_ar - rhs).max())


def random_matrix_battery(count: int = 50, dim: int = 6, seed: int = 20240901):
    """Seeded (A, R) pairs: unit-disc entries scaled by 1/dim, A Hermitian.

    The 1/dim scaling keeps norms of Delta g(A) near unity, so the q = 5
    residual stays at machine level; pairs whose resolvents at
    z = 2.5 + 0.5i are ill-conditioned are resampled.
    """
    rng = np.random.default_rng(seed)
    z = 2.5 + 0.5j
    out = []
    while len(out) < count:
        m1 = _disc_matrix(rng, dim) / dim
        m2 = _disc_matrix(rng, dim) / dim
        a = 0.5 * (m1 + m1.conj().T)
        r = m2
        eye = np.eye(dim)
        if (
            np.linalg.cond(z * eye - a) < COND_LIMIT
            and np.linalg.cond(z * eye - a - r) < COND_LIMIT
        ):
            out.append((a, r))
    return out


def _disc_matrix(rng, dim: int) -> np.ndarray:
    radius = np.sqrt(rng.uniform(0.0, 1.0, size=(dim, dim)))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=(dim, dim))
    return radius * np.exp(1j * angle)

"""Set-partition and non-crossing-partition combinatorics.

Enumeration of partitions of [n], the non-crossing lattice NC(n) with its
refinement order, Kreweras complementation and the Moebius function of the
lattice.  Everything here is exact integer combinatorics; enumeration is
capped at n = 12 so that exhaustive tests stay cheap.
"""

from __future__ import annotations

import math
from functools import lru_cache

MAX_GROUND_SET = 12
MAX_CATALAN = 30


def catalan(n: int) -> int:
    """Catalan number C_n = binom(2n, n)/(n+1), exact."""
    if n < 0:
        raise ValueError("catalan expects a non-negative index")
    if n > MAX_CATALAN:
        raise ValueError(f"catalan capped at n = {MAX_CATALAN}")
    return math.comb(2 * n, n) // (n + 1)


def bell(n: int) -> int:
    """Bell number B_n (number of set partitions of [n])."""
    if n < 0:
        raise ValueError("bell expects a non-negative index")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


class NcPartition:
    """A partition of [n] = {1, ..., n} in canonical block form.

    Blocks are stored sorted internally and ordered by their least element,
    so equality is structural.  Instances are immutable and hashable.  The
    plain constructor accepts any partition (crossing or not); use
    :meth:`noncrossing` when the input is required to be non-crossing.
    """

    __slots__ = ("n", "blocks", "_hash")

    def __init__(self, n: int, blocks, _validated: bool = False):
        if _validated:
            self.n = n
            self.blocks = blocks
        else:
            canon = tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))
            seen = [e for b in canon for e in b]
            if sorted(seen) != list(range(1, n + 1)):
                raise ValueError(f"blocks do not partition [{n}]: {blocks}")
            self.n = n
            self.blocks = canon
        self._hash = hash((self.n, self.blocks))

    @classmethod
    def noncrossing(cls, n: int, blocks) -> "NcPartition":
        """Construct and verify that the result is non-crossing."""
        p = cls(n, blocks)
        if not is_noncrossing(p):
            raise ValueError(f"partition has a crossing: {p}")
        return p

    @classmethod
    def zero(cls, n: int) -> "NcPartition":
        """The finest partition (all singletons)."""
        return cls(n, tuple((i,) for i in range(1, n + 1)), _validated=True)

    @classmethod
    def one(cls, n: int) -> "NcPartition":
        """The coarsest partition (a single block)."""
        return cls(n, (tuple(range(1, n + 1)),), _validated=True)

    def __len__(self) -> int:
        return len(self.blocks)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NcPartition)
            and self.n == other.n
            and self.blocks == other.blocks
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = "".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        return f"NcPartition({self.n}, {inner})"

    def block_sizes(self) -> tuple:
        """Block sizes, largest first."""
        return tuple(sorted((len(b) for b in self.blocks), reverse=True))

    def rgs(self) -> tuple:
        """Restricted-growth string: rgs[i] = index of the block of i+1."""
        label = {}
        out = []
        nxt = 0
        lookup = {e: j for j, b in enumerate(self.blocks) for e in b}
        for i in range(1, self.n + 1):
            b = lookup[i]
            if b not in label:
                label[b] = nxt
                nxt += 1
            out.append(label[b])
        return tuple(out)


def _from_rgs(rgs) -> NcPartition:
    blocks = {}
    for i, lab in enumerate(rgs, start=1):
        blocks.setdefault(lab, []).append(i)
    return NcPartition(
        len(rgs), tuple(tuple(b) for b in sorted(blocks.values())), _validated=True
    )


def _check_bound(n: int) -> None:
    if not 1 <= n <= MAX_GROUND_SET:
        raise ValueError(f"enumeration supported for 1 <= n <= {MAX_GROUND_SET}, got {n}")


def enumerate_partitions(n: int) -> list:
    """All set partitions of [n], ordered lexicographically by RGS."""
    _check_bound(n)
    out = []
    rgs = [0] * n

    def rec(i: int, mx: int) -> None:
        if i == n:
            out.append(_from_rgs(rgs))
            return
        for lab in range(mx + 2):
            rgs[i] = lab
            rec(i + 1, max(mx, lab))

    rec(1, 0)
    return out


def _blocks_cross(b1, b2) -> bool:
    # crossing pattern a < c < b < d with a,b in one block and c,d in the other
    merged = sorted([(e, 0) for e in b1] + [(e, 1) for e in b2])
    switches = 0
    last = merged[0][1]
    for _, tag in merged[1:]:
        if tag != last:
            switches += 1
            last = tag
    return switches >= 3


def is_noncrossing(p: NcPartition) -> bool:
    """True iff no two blocks interleave."""
    bs = p.blocks
    for i in range(len(bs)):
        if len(bs[i]) < 2:
            continue
        for j in range(i + 1, len(bs)):
            if len(bs[j]) < 2:
                continue
            if _blocks_cross(bs[i], bs[j]):
                return False
    return True


def _gen_nc_blocks(elements):
    """Yield non-crossing partitions of a sorted element tuple, as block lists.

    The block of the least element is chosen first; the remaining elements
    split into independent gaps between consecutive chosen elements.
    """
    if not elements:
        yield []
        return
    first, rest = elements[0], elements[1:]
    m = len(rest)
    for mask in range(1 << m):
        block = [first] + [rest[i] for i in range(m) if mask >> i & 1]
        gaps = []
        gap = []
        k = 0
        for e in rest:
            if k + 1 < len(block) and e == block[k + 1]:
                gaps.append(tuple(gap))
                gap = []
                k += 1
            elif e not in block:
                gap.append(e)
        gaps.append(tuple(gap))

        def rec(idx, acc):
            if idx == len(gaps):
                yield acc
                return
            for sub in _gen_nc_blocks(gaps[idx]):
                yield from rec(idx + 1, acc + sub)

        for tail in rec(0, []):
            yield [tuple(block)] + tail


@lru_cache(maxsize=None)
def _enumerate_nc_cached(n: int) -> tuple:
    parts = [
        NcPartition(n, tuple(blocks), _validated=True)
        for blocks in _gen_nc_blocks(tuple(range(1, n + 1)))
    ]
    # finest (0-hat) first, coarsest (1-hat) last
    parts.sort(key=lambda p: p.rgs(), reverse=True)
    return tuple(parts)


def enumerate_nc(n: int) -> list:
    """All non-crossing partitions of [n]; exactly Catalan(n) of them."""
    _check_bound(n)
    return list(_enumerate_nc_cached(n))


def leq(p: NcPartition, q: NcPartition) -> bool:
    """Refinement order: every block of p is contained in some block of q."""
    if p.n != q.n:
        raise ValueError(f"ground sets differ: {p.n} vs {q.n}")
    owner = {e: i for i, b in enumerate(q.blocks) for e in b}
    for b in p.blocks:
        i = owner[b[0]]
        if any(owner[e] != i for e in b[1:]):
            return False
    return True


def kreweras(p: NcPartition) -> NcPartition:
    """Kreweras complement of a non-crossing partition.

    Computed on the interlaced alphabet 1, 1', 2, 2', ..., n, n' (original
    elements on odd positions 2i-1, complement points on even positions 2i)
    by greedy maximal merging of the complement blocks.  Compatible
    partitions are closed under refinement and joins, so greedy pairwise
    merging reaches the unique maximal element.
    """
    if not is_noncrossing(p):
        raise ValueError("Kreweras complement requires a non-crossing partition")
    n = p.n
    base = [tuple(2 * e - 1 for e in b) for b in p.blocks]
    comp = [[2 * i] for i in range(1, n + 1)]

    def union_ok(blocks):
        all_blocks = base + [tuple(sorted(b)) for b in blocks]
        for i in range(len(all_blocks)):
            for j in range(i + 1, len(all_blocks)):
                if len(all_blocks[i]) > 1 and len(all_blocks[j]) > 1:
                    if _blocks_cross(all_blocks[i], all_blocks[j]):
                        return False
        return True

    merged = True
    while merged:
        merged = False
        for i in range(len(comp)):
            for j in range(i + 1, len(comp)):
                trial = [b for k, b in enumerate(comp) if k not in (i, j)]
                trial.append(comp[i] + comp[j])
                if union_ok(trial):
                    comp = trial
                    merged = True
                    break
            if merged:
                break
    blocks = [tuple(sorted(e // 2 for e in b)) for b in comp]
    return NcPartition(n, blocks)


@lru_cache(maxsize=None)
def _interval_mobius_table(n: int) -> dict:
    """Moebius values mu(p, q) for all p <= q in NC(n), by the recursion."""
    lat = enumerate_nc(n)
    idx = {p: i for i, p in enumerate(lat)}
    le = [[leq(p, q) for q in lat] for p in lat]
    # number of blocks decreases going up; process q by decreasing |q|
    order = sorted(range(len(lat)), key=lambda i: -len(lat[i]))
    table = {}
    for qi in order:
        inside = [si for si in range(len(lat)) if le[si][qi]]
        for pi in inside:
            if pi == qi:
                table[(pi, qi)] = 1
                continue
            acc = 0
            for si in inside:
                if si != qi and le[pi][si]:
                    acc += table[(pi, si)]
            table[(pi, qi)] = -acc
    return {"idx": idx, "table": table}


def mobius(p: NcPartition, q: NcPartition) -> int:
    """Moebius function of the interval [p, q] in NC(n).

    Ground truth is the defining recursion mu(p, p) = 1 and
    sum_{p <= s <= q} mu(p, s) = 0; see :func:`mobius_to_top` for the
    multiplicative shortcut used by the transforms.
    """
    if p.n != q.n:
        raise ValueError(f"ground sets differ: {p.n} vs {q.n}")
    if not leq(p, q):
        raise ValueError("mobius requires p <= q in the refinement order")
    data = _interval_mobius_table(p.n)
    return data["table"][(data["idx"][p], data["idx"][q])]


def mobius_to_top(p: NcPartition) -> int:
    """mu(p, 1-hat), via the Kreweras anti-isomorphism [p, 1] ~ [0, K(p)].

    Each block W of K(p) contributes (-1)^(|W|-1) * Catalan(|W|-1).  The
    test suite pins this against the lattice recursion.
    """
    return _sign_catalan_product(kreweras(p).block_sizes())


def _sign_catalan_product(sizes) -> int:
    out = 1
    for s in sizes:
        out *= (-1) ** (s - 1) * catalan(s - 1)
    return out


@lru_cache(maxsize=None)
def nc_type_counts(n: int) -> dict:
    """Number of non-crossing partitions of [n] per block-size multiset.

    Kreweras' count: a type with k blocks and size multiplicities m_j has
    n! / ((n - k + 1)! * prod_j m_j!) non-crossing partitions.  Keys are
    size tuples sorted largest-first.
    """
    _check_bound(n)
    out = {}
    for sizes in _integer_partitions(n):
        k = len(sizes)
        denom = math.factorial(n - k + 1)
        for j in set(sizes):
            denom *= math.factorial(sizes.count(j))
        cnt, rem = divmod(math.factorial(n), denom)
        assert rem == 0
        out[sizes] = cnt
    return out


def _integer_partitions(n: int, mx: int | None = None):
    if n == 0:
        yield ()
        return
    mx = n if mx is None else mx
    for first in range(min(n, mx), 0, -1):
        for rest in _integer_partitions(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def nc_kreweras_size_pairs(n: int) -> tuple:
    """(block sizes of pi, block sizes of K(pi)) for every pi in NC(n)."""
    if n > 8:
        raise ValueError("Kreweras size-pair table capped at n = 8")
    return tuple((p.block_sizes(), kreweras(p).block_sizes()) for p in enumerate_nc(n))

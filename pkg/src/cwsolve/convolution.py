"""Zeta/Moebius transforms on closure differences (layer by layer over the universe), cover and
componentwise cover products, and join products on powers of a finite lattice.

Two rings are supported: ``"gf2"`` and ``"int"`` (64-bit range, overflow is an
error). Subsets of a universe of size u are bitmasks.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_UNIVERSE = 28
_INT_LIMIT = 1 << 63


class ConvolutionError(ValueError):
    pass


def _check_ring(ring: str) -> None:
    if ring not in ("gf2", "int"):
        raise ConvolutionError(f"unknown ring {ring!r}")


def _reduce(x: int, ring: str) -> int:
    if ring == "gf2":
        return x & 1
    if not -_INT_LIMIT <= x < _INT_LIMIT:
        raise OverflowError("integer ring overflow")
    return x


def _up_closure(u: int, sets: Iterable[int]) -> np.ndarray:
    up = np.zeros(1 << u, dtype=bool)
    up[list(sets)] = True
    for b in range(u):
        view = up.reshape(-1, 2, 1 << b)
        view[:, 1, :] |= view[:, 0, :]
    return up


def _minimal(sets: Iterable[int]) -> tuple[int, ...]:
    ordered = sorted(set(sets), key=lambda s: (bin(s).count("1"), s))
    keep: list[int] = []
    for s in ordered:
        if not any(m & s == m for m in keep):
            keep.append(s)
    return tuple(sorted(keep))


@dataclass(frozen=True)
class SetFamily:
    """Sorted list of subsets of a u-element universe.

    ``witness`` optionally holds (F_plus, F_minus) with F = up(F_plus) minus up(F_minus).
    """

    u: int
    members: tuple[int, ...]
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    def __post_init__(self):
        if self.u > MAX_UNIVERSE:
            raise ConvolutionError(f"universe size {self.u} above {MAX_UNIVERSE}")
        if any(b <= a for a, b in zip(self.members, self.members[1:])):
            raise ConvolutionError("members must be strictly increasing")
        if self.members and (self.members[0] < 0 or self.members[-1] >= 1 << self.u):
            raise ConvolutionError("member outside universe")

    @classmethod
    def from_sets(cls, u: int, sets: Iterable[int]) -> "SetFamily":
        return cls(u, tuple(sorted(set(sets))))

    @classmethod
    def closure_difference(cls, u: int, plus: Sequence[int], minus: Sequence[int]) -> "SetFamily":
        if u > 22:
            raise ConvolutionError("explicit listing limited to universes of size 22")
        keep = _up_closure(u, plus) & ~_up_closure(u, minus)
        return cls(u, tuple(int(x) for x in np.flatnonzero(keep)), (tuple(plus), tuple(minus)))

    def __len__(self) -> int:
        return len(self.members)

    def index(self, s: int) -> int:
        """Position of ``s`` in the member list, or -1."""
        i = bisect.bisect_left(self.members, s)
        return i if i < len(self.members) and self.members[i] == s else -1

    def __contains__(self, s: int) -> bool:
        return self.index(s) >= 0

    @cached_property
    def is_closure_difference(self) -> bool:
        return check_interval_property(self)

    def closure_witness(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if self.witness is not None:
            return self.witness
        if self.u > 22:
            raise ConvolutionError("witness computation limited to universes of size 22")
        up = _up_closure(self.u, self.members)
        inside = np.zeros(1 << self.u, dtype=bool)
        inside[list(self.members)] = True
        outside = np.flatnonzero(up & ~inside)
        return _minimal(self.members), _minimal(int(x) for x in outside)


def check_interval_property(family: SetFamily, samples: int = 20_000, seed: int = 0) -> bool:
    """True iff W <= T <= S with W, S in F forces T in F.

    It suffices to look at T = S minus one element: a hole between W and S can
    always be walked down to one that is directly below a member.
    """
    members = family.members
    if family.u <= 20:
        up = _up_closure(family.u, members)
        for s in members:
            rest = s
            while rest:
                bit = rest & -rest
                rest ^= bit
                t = s ^ bit
                if t not in family and up[t]:
                    return False
        return True
    rng = random.Random(seed)
    for _ in range(samples):
        s = rng.choice(members)
        bits = [1 << j for j in range(family.u) if s >> j & 1]
        if not bits:
            continue
        t = s ^ rng.choice(bits)
        if t not in family and any(w & t == w for w in members):
            return False
    return True


@dataclass
class RingTable:
    family: SetFamily
    values: list[int]
    ring: str = "gf2"

    def __post_init__(self):
        _check_ring(self.ring)
        if len(self.values) != len(self.family):
            raise ConvolutionError("value list not aligned with the family")

    def dump(self) -> str:
        """``<bitstring> <value>`` lines, bit 0 leftmost."""
        u = self.family.u
        return "\n".join(
            f"{''.join('1' if s >> j & 1 else '0' for j in range(u))} {v}"
            for s, v in zip(self.family.members, self.values))


class OpCounter:
    """Counts ring additions made by the layered zeta transform."""

    def __init__(self):
        self.adds = 0


def zeta_transform(table: RingTable, counter: OpCounter | None = None) -> RingTable:
    """(zeta A)(S) = sum of A(T) over members T contained in S, by the layered recurrence
    A_j(S) = A_{j-1}(S) + [j in S and S - j in F] A_{j-1}(S - j)."""
    fam, ring = table.family, table.ring
    if not fam.is_closure_difference:
        raise ConvolutionError("zeta transform needs a closure difference")
    u = fam.u
    order = sorted(range(len(fam)), key=lambda i: bin(fam.members[i]).count("1"))
    layers: list[list[int] | None] = [None] * len(fam)
    adds = 0
    for i in order:
        s = fam.members[i]
        cur = [table.values[i]]
        for j in range(u):
            val = cur[j]
            if s >> j & 1:
                below = fam.index(s ^ (1 << j))
                if below >= 0:
                    val = _reduce(val + layers[below][j], ring)
                    adds += 1
            cur.append(val)
        layers[i] = cur
    if counter is not None:
        counter.adds += adds
    return RingTable(fam, [layers[i][u] for i in range(len(fam))], ring)


def _sigma(table: RingTable) -> RingTable:
    if table.ring == "gf2":
        return RingTable(table.family, list(table.values), table.ring)
    return RingTable(table.family,
                     [-v if bin(s).count("1") & 1 else v
                      for s, v in zip(table.family.members, table.values)], table.ring)


def mobius_transform(table: RingTable, counter: OpCounter | None = None) -> RingTable:
    return _sigma(zeta_transform(_sigma(table), counter))


def cover_product(a: RingTable, b: RingTable) -> RingTable:
    """(A * B)(S) = sum over T1 | T2 = S of A(T1) B(T2)."""
    if a.family != b.family or a.ring != b.ring:
        raise ConvolutionError("cover product of tables over different families or rings")
    za, zb = zeta_transform(a), zeta_transform(b)
    prod = [_reduce(x * y, a.ring) for x, y in zip(za.values, zb.values)]
    return mobius_transform(RingTable(a.family, prod, a.ring))


def build_kF(family: SetFamily, k: int) -> SetFamily:
    """Sets over k disjoint copies of the universe whose every block lies in ``family``.

    Block i occupies bits [i*u, (i+1)*u).
    """
    u = family.u
    if k * u > MAX_UNIVERSE:
        raise ConvolutionError(f"universe size {k * u} above {MAX_UNIVERSE}")
    plus, minus = family.closure_witness()
    members = sorted(sum(s << (i * u) for i, s in enumerate(combo))
                     for combo in itertools.product(family.members, repeat=k))
    kplus = tuple(sorted(sum(s << (i * u) for i, s in enumerate(combo))
                         for combo in itertools.product(plus, repeat=k)))
    kminus = tuple(sorted(y << (i * u) for i in range(k) for y in minus))
    return SetFamily(k * u, tuple(members), (kplus, kminus))


def _tuple_masks(family: SetFamily, k: int) -> list[int]:
    """kF bitmask of every index tuple, in C order of a (|F|,)*k array."""
    u = family.u
    return [sum(family.members[i] << (c * u) for c, i in enumerate(idx))
            for idx in itertools.product(range(len(family)), repeat=k)]


def componentwise_cover_product(a: np.ndarray, b: np.ndarray, family: SetFamily,
                                ring: str = "gf2") -> np.ndarray:
    """Cover product in every coordinate, via the cover product on kF.

    ``a`` and ``b`` have shape (|F|,)*k; position i on an axis means family
    member i in that coordinate.
    """
    if a.shape != b.shape:
        raise ConvolutionError("shape mismatch")
    k = a.ndim
    if k == 0:
        return np.asarray(_reduce(int(a) * int(b), ring))
    big = build_kF(family, k)
    masks = _tuple_masks(family, k)
    pos = [big.index(m) for m in masks]
    va = [0] * len(big)
    vb = [0] * len(big)
    for p, x, y in zip(pos, a.reshape(-1).tolist(), b.reshape(-1).tolist()):
        va[p], vb[p] = int(x), int(y)
    out = cover_product(RingTable(big, va, ring), RingTable(big, vb, ring))
    flat = [out.values[p] for p in pos]
    return np.array(flat, dtype=np.int64).reshape(a.shape)


# -- per-coordinate transforms (used by the solvers) ------------------------

def family_transform_matrices(family: SetFamily) -> tuple[np.ndarray, np.ndarray]:
    """Zeta and Moebius matrices of ``family`` over the integers, obtained by
    running the layered transform on unit vectors. Column j is the image of member j."""
    size = len(family)
    zeta = np.zeros((size, size), dtype=np.int64)
    mob = np.zeros((size, size), dtype=np.int64)
    for j in range(size):
        unit = [0] * size
        unit[j] = 1
        zeta[:, j] = zeta_transform(RingTable(family, unit, "int")).values
        mob[:, j] = mobius_transform(RingTable(family, unit, "int")).values
    return zeta, mob


@lru_cache(maxsize=256)
def _expanded(m_bytes: bytes, s: int, post: int) -> np.ndarray:
    """kron(m, I_post).T for an s x s float32 matrix given by its bytes."""
    m = np.frombuffer(m_bytes, dtype=np.float32).reshape(s, s)
    big = np.ascontiguousarray(np.kron(m, np.eye(post, dtype=np.float32)).T)
    big.flags.writeable = False
    return big


def coordinate_transform(arr: np.ndarray, matrix: np.ndarray, axes: Iterable[int],
                         ring: str = "gf2") -> np.ndarray:
    """Apply ``matrix`` along each listed axis: out[..x..] = sum_y matrix[x, y] arr[..y..]."""
    _check_ring(ring)
    axes = list(axes)
    if ring == "gf2":
        work = np.ascontiguousarray(arr, dtype=np.float32)
        m = (matrix % 2).astype(np.float32)
        rowsum = max(1, int(m.sum(axis=1).max()))
        bound = 1
        for ax in axes:
            # float32 is exact below 2^24; reduce only when the next step could pass it
            if bound * rowsum >= 1 << 24:
                np.remainder(work, 2.0, out=work)
                bound = 1
            shape = work.shape
            pre = math.prod(shape[:ax])
            post = math.prod(shape[ax + 1:])
            if pre == 1 or post > 16:
                work = np.matmul(m, work.reshape(pre, shape[ax], post)).reshape(shape)
            else:
                # a batch of tiny products is slow; one GEMM against kron(m, I) is not
                big = _expanded(m.tobytes(), m.shape[0], post)
                work = (work.reshape(pre, shape[ax] * post) @ big).reshape(shape)
            bound *= rowsum
        return np.remainder(work, 2.0).astype(np.uint8)
    work = arr.astype(np.int64)
    rowsum = int(np.abs(matrix).sum(axis=1).max())
    for ax in axes:
        peak = int(np.abs(work).max(initial=0))
        if peak * rowsum >= _INT_LIMIT // 2:
            raise OverflowError("integer ring overflow")
        work = np.moveaxis(np.tensordot(matrix.astype(np.int64), work, axes=([1], [ax])), 0, ax)
    return work


def componentwise_cover_product_fast(a: np.ndarray, b: np.ndarray, family: SetFamily,
                                     ring: str = "gf2") -> np.ndarray:
    """Same product as :func:`componentwise_cover_product`; the kF zeta transform
    factors into one family transform per coordinate."""
    zeta, mob = family_transform_matrices(family)
    axes = range(a.ndim)
    za = coordinate_transform(a, zeta, axes, ring)
    zb = coordinate_transform(b, zeta, axes, ring)
    prod = za.astype(np.int64) * zb.astype(np.int64)
    if ring == "gf2":
        prod &= 1
    return coordinate_transform(prod, mob, axes, ring)


# -- lattices --------------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    """Finite lattice given by its join table; element i has code i."""

    names: tuple[str, ...]
    join_table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = len(self.names)
        jt = self.join_table
        if len(jt) != m or any(len(row) != m for row in jt):
            raise ConvolutionError("join table must be square")
        for x in range(m):
            if jt[x][x] != x:
                raise ConvolutionError("join must be idempotent")
            for y in range(m):
                if jt[x][y] != jt[y][x]:
                    raise ConvolutionError("join must be commutative")
                for z in range(m):
                    if jt[jt[x][y]][z] != jt[x][jt[y][z]]:
                        raise ConvolutionError("join must be associative")
        if sum(all(jt[x][y] == y for y in range(m)) for x in range(m)) != 1:
            raise ConvolutionError("lattice needs a unique minimum")

    def __len__(self) -> int:
        return len(self.names)

    def join(self, x: int, y: int) -> int:
        return self.join_table[x][y]

    def leq(self, x: int, y: int) -> bool:
        return self.join_table[x][y] == y

    @cached_property
    def bottom(self) -> int:
        m = len(self)
        return next(x for x in range(m) if all(self.join(x, y) == y for y in range(m)))

    @cached_property
    def irreducibles(self) -> tuple[int, ...]:
        """Elements that are not the join of two elements strictly below them (bottom included)."""
        m = len(self)
        reducible = {self.join(a, b) for a in range(m) for b in range(m)
                     if self.join(a, b) not in (a, b)}
        return tuple(x for x in range(m) if x not in reducible)

    @cached_property
    def zeta_matrix(self) -> np.ndarray:
        m = len(self)
        return np.array([[int(self.leq(y, x)) for y in range(m)] for x in range(m)], dtype=np.int64)

    @cached_property
    def mobius_matrix(self) -> np.ndarray:
        """Inverse of the zeta matrix, from the recursion mu(y, x) = -sum_{y <= z < x} mu(y, z)."""
        m = len(self)
        height = [sum(self.leq(y, x) for y in range(m)) for x in range(m)]
        order = sorted(range(m), key=lambda x: height[x])
        mu = np.zeros((m, m), dtype=np.int64)
        for y in range(m):
            for x in order:
                if not self.leq(y, x):
                    continue
                if x == y:
                    mu[x, y] = 1
                else:
                    mu[x, y] = -sum(mu[z, y] for z in range(m)
                                    if z != x and self.leq(y, z) and self.leq(z, x))
        return mu


@dataclass
class PowerLatticeTable:
    """Values on L^k; axis i is coordinate i and position x on it is element code x."""

    lattice: Lattice
    k: int
    values: np.ndarray
    ring: str = "gf2"

    def __post_init__(self):
        _check_ring(self.ring)
        if self.values.shape != (len(self.lattice),) * self.k:
            raise ConvolutionError("table shape does not match |L|^k")


def join_irreducibles_of_power(lattice: Lattice, k: int) -> list[tuple[int, ...]]:
    """All-bottom tuple plus tuples with exactly one non-bottom coordinate, irreducible in L."""
    bot = lattice.bottom
    out = [(bot,) * k]
    for i in range(k):
        for x in lattice.irreducibles:
            if x != bot:
                out.append(tuple(x if c == i else bot for c in range(k)))
    return out


def vee_product(a: PowerLatticeTable, b: PowerLatticeTable) -> PowerLatticeTable:
    """(A * B)(x) = sum over y v z = x of A(y) B(z): coordinatewise zeta, pointwise product,
    coordinatewise Moebius."""
    if a.lattice != b.lattice or a.k != b.k or a.ring != b.ring:
        raise ConvolutionError("vee product of tables over different lattices")
    lat = a.lattice
    axes = range(a.k)
    za = coordinate_transform(a.values, lat.zeta_matrix, axes, a.ring)
    zb = coordinate_transform(b.values, lat.zeta_matrix, axes, a.ring)
    prod = za.astype(np.int64) * zb.astype(np.int64)
    if a.ring == "gf2":
        prod &= 1
    out = coordinate_transform(prod, lat.mobius_matrix, axes, a.ring)
    return PowerLatticeTable(lat, a.k, out, a.ring)

"""Compact groups: finite groups given by Cayley tables, U(1), SU(2) and products.

Group elements travel in batches.  A finite group's elements are integer
arrays of any shape; a Lie group's elements are float arrays whose last axis
holds the coordinates (one angle for U(1), a unit quaternion ``(w, x, y, z)``
for SU(2), the concatenation for products).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "GroupAxiomError",
    "ElementError",
    "HaarScheme",
    "CompactGroup",
    "FiniteGroup",
    "U1Group",
    "SU2Group",
    "ProductGroup",
    "group_mul",
    "group_inv",
    "haar_scheme",
    "build_cyclic",
    "build_dihedral",
    "build_symmetric",
    "build_alternating",
    "build_quaternion8",
    "build_dicyclic",
    "build_from_cayley",
    "direct_product",
    "small_groups",
    "load_cayley_json",
    "QUANTUM",
]

TWO_PI = 2.0 * math.pi
# Coordinate grid used for memo keys and canonical evaluation points.
QUANTUM = 1e-12


class GroupAxiomError(ValueError):
    pass


class ElementError(TypeError):
    pass


@dataclass(frozen=True)
class HaarScheme:
    """Quadrature for the Haar probability measure: nodes and their weights."""

    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)


class CompactGroup:
    kind: str = "abstract"
    is_finite: bool = False
    coord_dim: int = 0

    def mul(self, s, t):
        raise NotImplementedError

    def inv(self, s):
        raise NotImplementedError

    @property
    def identity(self):
        raise NotImplementedError

    def haar_scheme(self) -> HaarScheme:
        raise NotImplementedError

    def random_elements(self, rng: np.random.Generator, count: int):
        raise NotImplementedError

    def canonical(self, s):
        """Snap elements onto the key grid; returns (canonical elements, integer keys)."""
        raise NotImplementedError

    def batch_shape(self, s) -> tuple:
        s = np.asarray(s)
        return s.shape if self.is_finite else s.shape[:-1]

    def take(self, s, idx):
        s = np.asarray(s)
        return s[idx]

    def stack(self, parts):
        return np.concatenate([np.asarray(p).reshape((-1,) + self._tail()) for p in parts])

    def _tail(self) -> tuple:
        return () if self.is_finite else (self.coord_dim,)

    def validate(self, s):
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class FiniteGroup(CompactGroup):
    """A finite group with elements ``0 .. order-1`` and a Cayley table."""

    kind = "finite"
    is_finite = True

    def __init__(self, table, name: str = "G", labels: Sequence[str] | None = None,
                 check: bool = True):
        table = np.array(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise GroupAxiomError(f"Cayley table must be a non-empty square array, got {table.shape}")
        self.table = table
        self.table.setflags(write=False)
        self.order = int(table.shape[0])
        self.name = name
        self.labels = list(labels) if labels is not None else [str(i) for i in range(self.order)]
        self._identity = self._find_identity()
        self.inverse = self._find_inverses()
        self.inverse.setflags(write=False)
        if check and self.order <= 256:
            self._check_associative()

    def _find_identity(self) -> int:
        n = self.order
        if self.table.min() < 0 or self.table.max() >= n:
            raise GroupAxiomError("closure: table entries must lie in [0, order)")
        ar = np.arange(n)
        for e in range(n):
            if np.array_equal(self.table[e], ar) and np.array_equal(self.table[:, e], ar):
                return e
        raise GroupAxiomError("identity: no two-sided identity element")

    def _find_inverses(self) -> np.ndarray:
        hits = self.table == self._identity
        inv = np.argmax(hits, axis=1)
        for s in range(self.order):
            if not hits[s, inv[s]] or self.table[inv[s], s] != self._identity:
                raise GroupAxiomError(f"inverse: element {s} has no two-sided inverse")
        return inv

    def _check_associative(self) -> None:
        t = self.table
        left = t[t, :]          # (s t) u  indexed [s, t, u]
        right = t[:, t]         # s (t u)  indexed [s, t, u]
        bad = np.argwhere(left != right)
        if bad.size:
            s, u, v = (int(i) for i in bad[0])
            raise GroupAxiomError(f"associativity fails for triple ({s}, {u}, {v})")

    @property
    def identity(self) -> int:
        return self._identity

    def elements(self) -> np.ndarray:
        return np.arange(self.order)

    def mul(self, s, t):
        return self.table[s, t]

    def inv(self, s):
        return self.inverse[s]

    def haar_scheme(self) -> HaarScheme:
        return HaarScheme(self.elements(), np.full(self.order, 1.0 / self.order))

    def random_elements(self, rng, count):
        return rng.integers(0, self.order, size=count)

    def canonical(self, s):
        s = np.asarray(s, dtype=np.int64)
        return s, s

    def validate(self, s):
        a = np.asarray(s)
        if not np.issubdtype(a.dtype, np.integer):
            raise ElementError(f"{self.name} expects integer element indices")
        if a.size and (a.min() < 0 or a.max() >= self.order):
            raise ElementError(f"element index out of range [0, {self.order})")
        return a

    def center(self) -> list[int]:
        return [z for z in range(self.order)
                if np.array_equal(self.table[z, :], self.table[:, z])]

    def to_json(self) -> dict:
        return {"kind": "cayley", "order": self.order, "table": self.table.tolist()}

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


class U1Group(CompactGroup):
    """The circle group, elements are angles in [0, 2 pi)."""

    kind = "u1"
    coord_dim = 1

    def __init__(self, nodes: int = 64):
        if nodes < 2:
            raise ValueError("U(1) quadrature needs at least 2 nodes")
        self.nodes = int(nodes)
        self.name = f"U1[{self.nodes}]"

    @property
    def identity(self):
        return np.zeros(1)

    def mul(self, s, t):
        return np.mod(np.asarray(s) + np.asarray(t), TWO_PI)

    def inv(self, s):
        return np.mod(-np.asarray(s), TWO_PI)

    def haar_scheme(self) -> HaarScheme:
        k = np.arange(self.nodes)
        return HaarScheme((TWO_PI * k / self.nodes)[:, None], np.full(self.nodes, 1.0 / self.nodes))

    def random_elements(self, rng, count):
        return rng.uniform(0.0, TWO_PI, size=(count, 1))

    def canonical(self, s):
        s = np.mod(np.asarray(s, dtype=float), TWO_PI)
        keys = np.rint(s / QUANTUM).astype(np.int64)
        return keys * QUANTUM, keys

    def validate(self, s):
        a = np.asarray(s, dtype=float)
        if a.shape[-1:] != (1,):
            raise ElementError("U(1) elements carry exactly one angle coordinate")
        return a

    def to_json(self) -> dict:
        return {"kind": "u1", "nodes": self.nodes}


def _qmul(p, q):
    p = np.asarray(p)
    q = np.asarray(q)
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    return np.stack([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ], axis=-1)


def _normalize(q):
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def quaternion_to_su2(q) -> np.ndarray:
    """The 2x2 special unitary matrix ``w I - i (x sx + y sy + z sz)``."""
    q = np.asarray(q)
    w, x, y, z = np.moveaxis(q, -1, 0)
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = w - 1j * z
    out[..., 0, 1] = -y - 1j * x
    out[..., 1, 0] = y - 1j * x
    out[..., 1, 1] = w + 1j * z
    return out


def euler_to_quaternion(alpha, beta, gamma) -> np.ndarray:
    """Unit quaternion of Rz(alpha) Ry(beta) Rz(gamma)."""
    alpha, beta, gamma = np.broadcast_arrays(alpha, beta, gamma)
    zero = np.zeros_like(alpha)
    qa = np.stack([np.cos(alpha / 2), zero, zero, np.sin(alpha / 2)], axis=-1)
    qb = np.stack([np.cos(beta / 2), zero, np.sin(beta / 2), zero], axis=-1)
    qg = np.stack([np.cos(gamma / 2), zero, zero, np.sin(gamma / 2)], axis=-1)
    return _qmul(_qmul(qa, qb), qg)


class SU2Group(CompactGroup):
    """SU(2) as unit quaternions, with an Euler-angle Haar product rule.

    The rule is trapezoid in alpha and gamma over [0, 4 pi) and Gauss-Legendre
    in cos(beta); grid points describing the same element are merged.  Equal
    alpha and gamma counts divisible by 4 make the node set closed under
    inversion.
    """

    kind = "su2"
    coord_dim = 4

    def __init__(self, alpha_nodes: int = 8, beta_nodes: int = 16, gamma_nodes: int = 8):
        if alpha_nodes != gamma_nodes or alpha_nodes % 4:
            raise ValueError("alpha and gamma node counts must be equal and divisible by 4")
        if beta_nodes < 1:
            raise ValueError("beta_nodes must be positive")
        self.alpha_nodes = int(alpha_nodes)
        self.beta_nodes = int(beta_nodes)
        self.gamma_nodes = int(gamma_nodes)
        self.name = f"SU2[{alpha_nodes},{beta_nodes},{gamma_nodes}]"
        self._scheme = None

    @property
    def identity(self):
        return np.array([1.0, 0.0, 0.0, 0.0])

    def mul(self, s, t):
        return _normalize(_qmul(s, t))

    def inv(self, s):
        return np.asarray(s) * np.array([1.0, -1.0, -1.0, -1.0])

    def haar_scheme(self) -> HaarScheme:
        if self._scheme is None:
            self._scheme = self._build_scheme()
        return self._scheme

    def _build_scheme(self) -> HaarScheme:
        x, wb = np.polynomial.legendre.leggauss(self.beta_nodes)
        beta = np.arccos(x)
        ang = 2.0 * TWO_PI * np.arange(self.alpha_nodes) / self.alpha_nodes
        a, b, g = np.meshgrid(ang, beta, ang, indexing="ij")
        w = np.broadcast_to(wb[None, :, None], a.shape).ravel()
        q = euler_to_quaternion(a.ravel(), b.ravel(), g.ravel())
        _, keys = self.canonical(q)
        merged: dict[bytes, list] = {}
        for qi, wi, ki in zip(q, w, keys):
            k = ki.tobytes()
            if k in merged:
                merged[k][1] += wi
            else:
                merged[k] = [qi, wi]
        nodes = np.array([v[0] for v in merged.values()])
        weights = np.array([v[1] for v in merged.values()])
        weights = weights / math.fsum(weights)
        return HaarScheme(nodes, weights)

    def random_elements(self, rng, count):
        return _normalize(rng.standard_normal(size=(count, 4)))

    def canonical(self, s):
        s = np.asarray(s, dtype=float)
        keys = np.rint(s / QUANTUM).astype(np.int64)
        return _normalize(keys * QUANTUM), keys

    def validate(self, s):
        a = np.asarray(s, dtype=float)
        if a.shape[-1:] != (4,):
            raise ElementError("SU(2) elements are unit quaternions with 4 coordinates")
        if np.any(np.abs(np.linalg.norm(a, axis=-1) - 1.0) > 1e-6):
            raise ElementError("SU(2) element is not a unit quaternion")
        return _normalize(a)

    def to_json(self) -> dict:
        return {"kind": "su2", "alpha_nodes": self.alpha_nodes, "beta_nodes": self.beta_nodes,
                "gamma_nodes": self.gamma_nodes}


class ProductGroup(CompactGroup):
    """Direct product of compact groups with concatenated coordinates.

    Finite factors contribute one coordinate holding the element index.
    """

    kind = "product"

    def __init__(self, factors: Sequence[CompactGroup]):
        if not factors:
            raise ValueError("product of no factors")
        self.factors = list(factors)
        widths = [1 if f.is_finite else f.coord_dim for f in self.factors]
        self._slices = []
        start = 0
        for wdt in widths:
            self._slices.append(slice(start, start + wdt))
            start += wdt
        self.coord_dim = start
        self.name = " x ".join(f.name for f in self.factors)

    def _split(self, s):
        s = np.asarray(s, dtype=float)
        parts = []
        for f, sl in zip(self.factors, self._slices):
            p = s[..., sl]
            parts.append(np.rint(p[..., 0]).astype(np.int64) if f.is_finite else p)
        return parts

    def _join(self, parts):
        cols = [np.asarray(p, dtype=float)[..., None] if f.is_finite else p
                for f, p in zip(self.factors, parts)]
        return np.concatenate(cols, axis=-1)

    @property
    def identity(self):
        return self._join([np.asarray(f.identity) for f in self.factors])

    def mul(self, s, t):
        return self._join([f.mul(a, b) for f, a, b in zip(self.factors, self._split(s), self._split(t))])

    def inv(self, s):
        return self._join([f.inv(a) for f, a in zip(self.factors, self._split(s))])

    def haar_scheme(self) -> HaarScheme:
        schemes = [f.haar_scheme() for f in self.factors]
        nodes, weights = [], []
        for combo in itertools.product(*[range(len(sc)) for sc in schemes]):
            nodes.append(self._join([sc.nodes[i] for sc, i in zip(schemes, combo)]))
            weights.append(math.prod(sc.weights[i] for sc, i in zip(schemes, combo)))
        weights = np.array(weights)
        return HaarScheme(np.array(nodes), weights / math.fsum(weights))

    def random_elements(self, rng, count):
        return self._join([f.random_elements(rng, count) for f in self.factors])

    def canonical(self, s):
        canon, keys = [], []
        for f, p in zip(self.factors, self._split(s)):
            c, k = f.canonical(p)
            canon.append(c)
            keys.append(k[..., None] if f.is_finite else k)
        return self._join(canon), np.concatenate(keys, axis=-1)

    def validate(self, s):
        a = np.asarray(s, dtype=float)
        if a.shape[-1:] != (self.coord_dim,):
            raise ElementError(f"product elements carry {self.coord_dim} coordinates")
        return self._join([f.validate(p) for f, p in zip(self.factors, self._split(a))])

    def to_json(self) -> dict:
        return {"kind": "product", "factors": [f.to_json() for f in self.factors]}


def _check_kind(g: CompactGroup, s):
    try:
        return g.validate(s)
    except ElementError:
        raise
    except (TypeError, ValueError) as exc:
        raise ElementError(str(exc)) from exc


def group_mul(g: CompactGroup, s, t):
    return g.mul(_check_kind(g, s), _check_kind(g, t))


def group_inv(g: CompactGroup, s):
    return g.inv(_check_kind(g, s))


def haar_scheme(g: CompactGroup) -> HaarScheme:
    return g.haar_scheme()


# ---------------------------------------------------------------- builders

def build_cyclic(n: int) -> FiniteGroup:
    """Residues mod n under addition."""
    if n < 1:
        raise ValueError("cyclic group order must be positive")
    i = np.arange(n)
    return FiniteGroup((i[:, None] + i[None, :]) % n, name=f"C{n}")


def build_dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n: rotations r^k (index k) then
    reflections r^k f (index n + k)."""
    if n < 2:
        raise ValueError("dihedral group needs n >= 2")
    size = 2 * n
    table = np.empty((size, size), dtype=np.int64)
    for a in range(size):
        ka, fa = a % n, a // n
        for b in range(size):
            kb, fb = b % n, b // n
            k = (ka + (kb if fa == 0 else -kb)) % n
            table[a, b] = k + n * (fa ^ fb)
    labels = [f"r{k}" for k in range(n)] + [f"r{k}f" for k in range(n)]
    return FiniteGroup(table, name=f"D{n}", labels=labels)


def _perm_group(perms: list[tuple], name: str) -> FiniteGroup:
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    table = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            # (p q)(x) = p(q(x))
            table[i, j] = index[tuple(p[q[x]] for x in range(len(p)))]
    return FiniteGroup(table, name=name, labels=["".join(map(str, p)) for p in perms])


def _parity(p) -> int:
    sign = 0
    seen = [False] * len(p)
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            sign ^= (length - 1) & 1
    return sign


def build_symmetric(n: int) -> FiniteGroup:
    """S_n on lexicographically ordered permutations of 0..n-1 (n <= 5)."""
    if not 1 <= n <= 5:
        raise ValueError("build_symmetric supports 1 <= n <= 5")
    return _perm_group(list(itertools.permutations(range(n))), f"S{n}")


def build_alternating(n: int) -> FiniteGroup:
    if not 1 <= n <= 5:
        raise ValueError("build_alternating supports 1 <= n <= 5")
    perms = [p for p in itertools.permutations(range(n)) if _parity(p) == 0]
    return _perm_group(perms, f"A{n}")


def build_quaternion8() -> FiniteGroup:
    """Q8 ordered as 1, -1, i, -i, j, -j, k, -k."""
    # (sign, unit) with unit in {1, i, j, k} -> index 2*unit + (sign < 0)
    units = {(0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
             (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
             (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
             (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0)}
    table = np.empty((8, 8), dtype=np.int64)
    for a in range(8):
        ua, na = divmod(a, 2)
        for b in range(8):
            ub, nb = divmod(b, 2)
            sign, u = units[(ua, ub)]
            neg = (sign < 0) ^ bool(na) ^ bool(nb)
            table[a, b] = 2 * u + int(neg)
    return FiniteGroup(table, name="Q8", labels=["1", "-1", "i", "-i", "j", "-j", "k", "-k"])


def build_dicyclic(n: int) -> FiniteGroup:
    """Dic_n of order 4n: elements a^k x^e stored at index k + 2n e."""
    if n < 2:
        raise ValueError("dicyclic group needs n >= 2")
    m = 2 * n
    size = 2 * m
    table = np.empty((size, size), dtype=np.int64)
    for p in range(size):
        k, e = p % m, p // m
        for q in range(size):
            j, f = q % m, q // m
            kk = (k + (j if e == 0 else -j)) % m
            if e and f:
                kk, ee = (kk + n) % m, 0
            else:
                ee = e | f
            table[p, q] = kk + m * ee
    return FiniteGroup(table, name=f"Dic{n}")


def build_from_cayley(table, name: str = "G") -> FiniteGroup:
    return FiniteGroup(table, name=name)


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """Finite direct product with (a, b) stored at index a * |h| + b."""
    tg, th = g.table, h.table
    n, m = g.order, h.order
    a = np.arange(n * m)
    ga, hb = a // m, a % m
    table = tg[ga[:, None], ga[None, :]] * m + th[hb[:, None], hb[None, :]]
    return FiniteGroup(table, name=f"{g.name}x{h.name}", check=False)


def load_cayley_json(text: str) -> FiniteGroup:
    doc = json.loads(text)
    order = doc["order"]
    table = doc["table"]
    if len(table) != order or any(len(row) != order for row in table):
        raise GroupAxiomError(f"table shape does not match order {order}")
    return FiniteGroup(table)


def small_groups(max_order: int = 12) -> list[FiniteGroup]:
    """One representative of every isomorphism class of order <= 12."""
    c = build_cyclic
    groups = [c(n) for n in range(1, 13)]
    groups += [
        direct_product(c(2), c(2)),
        build_dihedral(3),
        direct_product(c(2), c(4)),
        direct_product(direct_product(c(2), c(2)), c(2)),
        build_dihedral(4),
        build_quaternion8(),
        direct_product(c(3), c(3)),
        build_dihedral(5),
        direct_product(c(2), c(6)),
        build_dihedral(6),
        build_alternating(4),
        build_dicyclic(3),
    ]
    return [g for g in groups if g.order <= max_order]

"""Cochains G^n -> U (or G^n -> Lie(U)), coboundaries, and averaging homotopies.

On a finite group a cochain is a full table indexed by ``G^n``.  On a Lie
group it is a pure evaluator; group-valued evaluators are memoized on the
coordinate grid of ``groups.QUANTUM`` and always evaluate at the snapped
coordinates, so a cache hit returns exactly what a fresh evaluation would.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .groups import CompactGroup, HaarScheme
from .target import GAction, TargetGroup, act_alg

__all__ = [
    "Cochain",
    "EvaluationSet",
    "DefectResult",
    "ChartError",
    "CochainError",
    "evaluation_set",
    "coboundary",
    "coboundary_values",
    "defect",
    "beta_of",
    "almost_action",
    "twisted_coboundary_values",
    "twisted_cocycle_defect",
    "homotopy_average",
    "homotopy_last_slot",
    "cochain_to_json",
    "cochain_from_json",
]

# Points per chunk when a Lie-group evaluator fans out over Haar nodes.
_CHUNK = 256
_PAIR_BLOCK = 8192


class CochainError(ValueError):
    pass


class ChartError(linalg.BranchCutError):
    """A coboundary value fell outside the logarithm chart."""

    def __init__(self, message: str, witness: tuple | None = None):
        super().__init__(message)
        self.witness = witness


class _Memo:
    def __init__(self, fn: Callable):
        self.fn = fn
        self.store: dict[bytes, np.ndarray] = {}
        self.lock = threading.Lock()


class Cochain:
    """A map ``G^arity -> U`` (group-valued) or ``G^arity -> Lie(U)``."""

    def __init__(self, group: CompactGroup, target: TargetGroup, action: GAction, arity: int,
                 values: str = "group", table: np.ndarray | None = None,
                 fn: Callable | None = None, memo: bool | None = None):
        if arity < 0:
            raise CochainError("arity must be nonnegative")
        if values not in ("group", "algebra"):
            raise CochainError(f"unknown value space {values!r}")
        self.group = group
        self.target = target
        self.action = action
        self.arity = arity
        self.values = values
        self.table = None
        self._memo = None
        self._fn = None
        if table is not None:
            table = np.asarray(table)
            expect = ((group.order,) * arity if group.is_finite else ()) + target.value_shape
            if arity and not group.is_finite:
                raise CochainError("tables are only available for finite groups")
            if table.shape != expect:
                raise CochainError(f"table shape {table.shape} does not match {expect}")
            self.table = target.coerce(table)
            self.table.setflags(write=False)
        elif fn is not None:
            if memo is None:
                memo = values == "group"
            self._fn = fn
            if memo:
                self._memo = _Memo(fn)
        else:
            raise CochainError("a cochain needs a table or an evaluator")

    # ------------------------------------------------------------ builders
    @classmethod
    def from_function(cls, group, target, action, arity, fn, values="group",
                      memo: bool | None = None) -> "Cochain":
        """Tabulate ``fn`` on a finite group, or wrap it as an evaluator otherwise.

        ``fn`` takes ``arity`` batches of elements of equal leading shape and
        returns the stacked values.
        """
        if arity == 0:
            return cls(group, target, action, 0, values, table=np.asarray(fn()))
        if group.is_finite:
            grid = np.indices((group.order,) * arity).reshape(arity, -1)
            flat = np.asarray(fn(*grid))
            table = flat.reshape((group.order,) * arity + target.value_shape)
            return cls(group, target, action, arity, values, table=table)
        return cls(group, target, action, arity, values, fn=fn, memo=memo)

    @classmethod
    def constant(cls, group, target, action, arity, value, values="group") -> "Cochain":
        value = target.coerce(value)

        def fn(*args):
            shape = group.batch_shape(args[0])
            return np.broadcast_to(value, shape + value.shape).copy()

        return cls.from_function(group, target, action, arity,
                                 (lambda: value) if arity == 0 else fn, values)

    @property
    def is_table(self) -> bool:
        return self.table is not None

    def with_values(self, values: str) -> "Cochain":
        """The same data reinterpreted (abelian targets: group and algebra coincide)."""
        if self.is_table:
            return Cochain(self.group, self.target, self.action, self.arity, values, table=self.table)
        return Cochain(self.group, self.target, self.action, self.arity, values, fn=self._fn,
                       memo=values == "group")

    # ---------------------------------------------------------- evaluation
    def __call__(self, *elems) -> np.ndarray:
        if len(elems) != self.arity:
            raise CochainError(f"cochain of arity {self.arity} called with {len(elems)} arguments")
        if self.arity == 0:
            return self.table
        if self.is_table:
            return self.table[tuple(np.asarray(e, dtype=np.int64) for e in elems)]
        g = self.group
        shapes = [g.batch_shape(e) for e in elems]
        shape = np.broadcast_shapes(*shapes)
        flat = [np.broadcast_to(np.asarray(e, dtype=float), shape + (g.coord_dim,)).reshape(-1, g.coord_dim)
                for e in elems]
        out = self._eval_flat(flat)
        return out.reshape(shape + self.target.value_shape)

    def _eval_flat(self, flat: list[np.ndarray]) -> np.ndarray:
        g = self.group
        canon, keys = zip(*(g.canonical(e) for e in flat))
        if self._memo is None:
            return np.asarray(self._fn(*canon))
        memo = self._memo
        keyrows = np.concatenate([k.reshape(len(k), -1) for k in keys], axis=1)
        uniq, first, inverse = np.unique(keyrows, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        results: list = [None] * len(uniq)
        missing = []
        with memo.lock:
            for i, row in enumerate(uniq):
                hit = memo.store.get(row.tobytes())
                if hit is None:
                    missing.append(i)
                else:
                    results[i] = hit
        if missing:
            idx = first[missing]
            vals = np.asarray(memo.fn(*[c[idx] for c in canon]))
            with memo.lock:
                for j, i in enumerate(missing):
                    v = vals[j]
                    v.setflags(write=False)
                    memo.store.setdefault(uniq[i].tobytes(), v)
                    results[i] = v
        stacked = np.stack(results) if results else np.zeros((0,) + self.target.value_shape)
        return stacked[inverse]

    def uncached(self) -> "Cochain":
        """The same evaluator with memoization switched off."""
        if self.is_table:
            return self
        return Cochain(self.group, self.target, self.action, self.arity, self.values,
                       fn=self._fn, memo=False)

    def cache_size(self) -> int:
        return 0 if self._memo is None else len(self._memo.store)

    def __repr__(self) -> str:
        body = "table" if self.is_table else "evaluator"
        return f"Cochain(arity={self.arity}, {self.values}, {body}, G={self.group.name})"


@dataclass(frozen=True)
class EvaluationSet:
    """Tuples of group elements over which sup norms are estimated."""

    tuples: tuple
    provenance: str

    def __len__(self) -> int:
        return len(self.tuples[0]) if self.tuples else 1

    @property
    def size(self) -> int:
        return len(self)

    def points(self, group: CompactGroup) -> np.ndarray:
        """Distinct elements occurring in any slot."""
        if group.is_finite:
            return np.unique(np.concatenate([np.asarray(t).ravel() for t in self.tuples]))
        allpts = np.concatenate([np.asarray(t).reshape(-1, group.coord_dim) for t in self.tuples])
        _, keys = group.canonical(allpts)
        _, first = np.unique(keys.reshape(len(keys), -1), axis=0, return_index=True)
        return allpts[np.sort(first)]


def evaluation_set(group: CompactGroup, size: int, random_count: int = 256, seed: int = 0,
                   node_tuple_cap: int = 4096) -> EvaluationSet:
    """All ``size``-tuples for a finite group; for a Lie group, the Haar node
    tuples (a seeded subsample when there are more than ``node_tuple_cap``)
    plus ``random_count`` seeded uniform tuples."""
    if size == 0:
        return EvaluationSet((), "exhaustive")
    if group.is_finite:
        grid = np.indices((group.order,) * size).reshape(size, -1)
        return EvaluationSet(tuple(grid), "exhaustive")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    nodes = group.haar_scheme().nodes
    n = len(nodes)
    total = n ** size
    if total <= node_tuple_cap:
        idx = np.indices((n,) * size).reshape(size, -1)
        node_part = f"nodes({total})"
    else:
        flat = rng.choice(total, size=node_tuple_cap, replace=False)
        flat.sort()
        idx = np.stack(np.unravel_index(flat, (n,) * size))
        node_part = f"node-sample({node_tuple_cap} of {total})"
    tuples = []
    for k in range(size):
        rand = group.random_elements(rng, random_count)
        tuples.append(np.concatenate([nodes[idx[k]], rand]))
    return EvaluationSet(tuple(tuples),
                         f"{node_part}+random(seed={seed}, count={random_count})")


# ----------------------------------------------------------- coboundaries

def _require_arity(c: Cochain, n: int) -> None:
    if c.arity != n:
        raise CochainError(f"expected a cochain of arity {n}, got {c.arity}")


def coboundary_values(rho: Cochain, tuples) -> np.ndarray:
    """Values of the coboundary of ``rho`` at the given (arity+1)-tuples."""
    g, t, a = rho.group, rho.target, rho.action
    n = rho.arity
    if len(tuples) != n + 1:
        raise CochainError(f"coboundary of an arity-{n} cochain needs {n + 1}-tuples")
    s0 = tuples[0]
    if t.is_abelian:
        return _alternating_sum(rho, tuples, lambda s, x: act_alg(a, s, x))
    if rho.values != "group":
        raise CochainError("non-abelian coboundary needs a group-valued cochain")
    if n == 0:
        x = rho()
        xs = np.broadcast_to(x, g.batch_shape(s0) + x.shape)
        return linalg.inv_batch(xs) @ act_alg(a, s0, xs)
    if n == 1:
        s1 = tuples[1]
        return rho(s0) @ act_alg(a, s0, rho(s1)) @ linalg.inv_batch(rho(g.mul(s0, s1)))
    raise CochainError("non-abelian targets only have coboundaries in degrees 0 and 1")


def _alternating_sum(c: Cochain, tuples, first_op) -> np.ndarray:
    """``op(s0, c(s1..sn)) + sum_i (-1)^i c(.., s_{i-1} s_i, ..) + (-1)^{n+1} c(s0..s_{n-1})``."""
    g = c.group
    n = c.arity
    s = list(tuples)
    shape = g.batch_shape(s[0])
    if n == 0:
        x = np.broadcast_to(c(), shape + c.target.value_shape)
        return first_op(s[0], x) - x
    out = first_op(s[0], c(*s[1:]))
    for i in range(1, n + 1):
        args = s[:i - 1] + [g.mul(s[i - 1], s[i])] + s[i + 1:]
        term = c(*args)
        out = out - term if i % 2 else out + term
    last = c(*s[:n])
    return out - last if (n + 1) % 2 else out + last


def coboundary(rho: Cochain) -> Cochain:
    """The coboundary cochain, arity + 1.

    Abelian targets use the alternating sum with the action on the first
    slot.  Non-abelian targets: ``x^-1 . s(x)`` in degree 0 and
    ``rho(s) . s(rho(t)) . rho(st)^-1`` in degree 1.
    """
    if not rho.target.is_abelian and rho.arity >= 2:
        raise CochainError("non-abelian targets only have coboundaries in degrees 0 and 1")
    return Cochain.from_function(rho.group, rho.target, rho.action, rho.arity + 1,
                                 lambda *tup: coboundary_values(rho, tup), rho.values, memo=False)


@dataclass(frozen=True)
class DefectResult:
    value: float
    witness: tuple

    def __float__(self) -> float:
        return self.value


def _witness(group, tuples, i) -> tuple:
    out = []
    for t in tuples:
        e = np.asarray(t)[i]
        out.append(int(e) if group.is_finite else tuple(float(x) for x in np.atleast_1d(e)))
    return tuple(out)


def _chart_log(target: TargetGroup, values: np.ndarray, group, tuples) -> np.ndarray:
    try:
        return target.log(values)
    except linalg.BranchCutError as exc:
        i = exc.index[0] if getattr(exc, "index", None) else 0
        witness = _witness(group, tuples, i) if tuples else ()
        raise ChartError(f"defect >= chart radius at {witness}: {exc}", witness) from exc


def defect(rho: Cochain, eval_set: EvaluationSet) -> DefectResult:
    """Sup over ``eval_set`` of ``||log(delta rho)||`` (``||delta rho||`` if abelian)."""
    if len(eval_set.tuples) != rho.arity + 1:
        raise CochainError(f"evaluation set has {len(eval_set.tuples)}-tuples, "
                           f"need {rho.arity + 1}")
    vals = coboundary_values(rho, eval_set.tuples)
    if not rho.target.is_abelian:
        vals = _chart_log(rho.target, vals, rho.group, eval_set.tuples)
    norms = np.asarray(rho.target.norm(vals)).reshape(-1)
    i = int(np.argmax(norms))
    return DefectResult(float(norms[i]), _witness(rho.group, eval_set.tuples, i))


# ------------------------------------------------- the non-abelian degree 1

def beta_of(rho: Cochain) -> Cochain:
    """``beta(s, t) = log(rho(s) . s(rho(t)) . rho(st)^-1)``, algebra-valued, arity 2."""
    _require_arity(rho, 1)
    if rho.values != "group":
        raise CochainError("beta_of needs a group-valued cochain")

    def fn(s, t):
        return _chart_log(rho.target, coboundary_values(rho, (s, t)), rho.group, (s, t))

    return Cochain.from_function(rho.group, rho.target, rho.action, 2, fn, "algebra", memo=False)


def almost_action(rho: Cochain, s, x) -> np.ndarray:
    """``s |> x = rho(s) . s(x) . rho(s)^-1`` (abelian targets: just ``s(x)``)."""
    _require_arity(rho, 1)
    sx = act_alg(rho.action, s, x)
    if rho.target.is_abelian:
        return sx
    r = rho(s)
    return r @ sx @ linalg.inv_batch(r)


def twisted_coboundary_values(c: Cochain, rho: Cochain, tuples) -> np.ndarray:
    """Alternating-sum coboundary of an algebra-valued cochain with ``|>`` on the first slot."""
    return _alternating_sum(c, tuples, lambda s, x: almost_action(rho, s, x))


def twisted_cocycle_defect(beta: Cochain, rho: Cochain, eval_set: EvaluationSet) -> DefectResult:
    """Sup of ``||s|>beta(t,u) - beta(st,u) + beta(s,tu) - beta(s,t)||``."""
    _require_arity(beta, 2)
    if len(eval_set.tuples) != 3:
        raise CochainError("twisted cocycle defect needs an evaluation set of triples")
    vals = twisted_coboundary_values(beta, rho, eval_set.tuples)
    norms = np.asarray(beta.target.norm(vals)).reshape(-1)
    i = int(np.argmax(norms))
    return DefectResult(float(norms[i]), _witness(beta.group, eval_set.tuples, i))


def _flat_points(group, t):
    t = np.asarray(t)
    if group.is_finite:
        return t.reshape(-1), t.shape
    return t.reshape(-1, group.coord_dim), t.shape[:-1]


def homotopy_average(beta: Cochain, rho: Cochain, scheme: HaarScheme) -> Cochain:
    """``alpha(t) = - sum_s w_s (s |> beta(s^-1, t))`` over the Haar nodes.

    Node contributions are accumulated one node at a time in scheme order, so
    each output value is independent of how the evaluation batch is formed.
    """
    _require_arity(beta, 2)
    _require_arity(rho, 1)
    g = rho.group
    nodes = scheme.nodes
    weights = scheme.weights
    node_inv = g.inv(nodes)
    conj = None
    if not rho.target.is_abelian:
        r = rho(nodes)
        conj = (r, linalg.inv_batch(r))
    twist = None if rho.action.is_trivial else rho.action.rep(nodes)
    twist_inv = None
    if twist is not None and rho.action.kind == "conjugation":
        twist_inv = linalg.inv_batch(twist)

    nw = len(weights)
    block = max(1, _PAIR_BLOCK // nw)

    def fn(t):
        flat, shape = _flat_points(g, t)
        out = np.empty((len(flat),) + rho.target.value_shape, dtype=rho.target.dtype)
        for lo in range(0, len(flat), block):
            tc = flat[lo:lo + block]
            # one batched evaluation for every (node, point) pair of the block
            si = np.broadcast_to(node_inv[:, None], (nw,) + tc.shape)
            ti = np.broadcast_to(tc[None], (nw,) + tc.shape)
            x = beta(si, ti)
            if twist is not None:
                if twist_inv is not None:
                    x = twist[:, None] @ x @ twist_inv[:, None]
                else:
                    x = np.einsum("nij,nbj->nbi", twist, x)
            if conj is not None:
                x = conj[0][:, None] @ x @ conj[1][:, None]
            acc = np.zeros((len(tc),) + rho.target.value_shape, dtype=rho.target.dtype)
            for i in range(nw):
                acc = acc - weights[i] * x[i]
            out[lo:lo + block] = acc
        return out.reshape(shape + rho.target.value_shape)

    return Cochain.from_function(g, rho.target, rho.action, 1, fn, "algebra", memo=False)


def homotopy_last_slot(gamma: Cochain, scheme: HaarScheme) -> Cochain:
    """``(h gamma)(s_1..s_n) = (-1)^(n+1) sum_u w_u gamma(s_1..s_n, u)``, abelian targets only.

    With this sign ``delta h + h delta`` is the identity on cochains of
    arity >= 1 (exactly for finite groups).
    """
    if not gamma.target.is_abelian:
        raise CochainError("last-slot homotopy needs an abelian target")
    if gamma.arity < 1:
        raise CochainError("last-slot homotopy needs arity >= 1")
    n = gamma.arity - 1
    sign = -1.0 if (n + 1) % 2 else 1.0
    g = gamma.group
    nodes, weights = scheme.nodes, scheme.weights

    if n == 0:
        def const():
            acc = np.zeros(gamma.target.value_shape)
            for i in range(len(weights)):
                acc = acc + weights[i] * gamma(nodes[i:i + 1])[0]
            return sign * acc
        return Cochain.from_function(g, gamma.target, gamma.action, 0, const, gamma.values)

    def fn(*args):
        shape = g.batch_shape(args[0])
        acc = np.zeros(shape + gamma.target.value_shape)
        for i in range(len(weights)):
            u = np.broadcast_to(nodes[i], shape + (() if g.is_finite else (g.coord_dim,)))
            acc = acc + weights[i] * gamma(*args, u)
        return sign * acc

    return Cochain.from_function(g, gamma.target, gamma.action, n, fn, gamma.values, memo=False)


# ---------------------------------------------------------------- JSON

def _encode(v):
    if np.iscomplexobj(v):
        return [[float(z.real), float(z.imag)] for z in v] if v.ndim == 1 else [_encode(r) for r in v]
    return v.tolist()


def cochain_to_json(c: Cochain) -> dict:
    """``{"arity": n, "values": [...]}`` with values flattened row-major over G^n."""
    if not c.group.is_finite:
        raise CochainError("only finite-group cochains serialize to tables")
    flat = c.table.reshape((-1,) + c.target.value_shape)
    return {"arity": c.arity, "values": [_encode(np.asarray(v)) for v in flat]}


def _decode(v, target: TargetGroup) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape == target.value_shape + (2,):
        a = a[..., 0] + 1j * a[..., 1]
    return a


def cochain_from_json(doc: dict, group, target, action, values="group") -> Cochain:
    try:
        arity = int(doc["arity"])
        raw = doc["values"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CochainError(f"cochain JSON needs integer 'arity' and list 'values': {exc}") from exc
    if not group.is_finite:
        raise CochainError("cochain tables need a finite group")
    if arity < 0:
        raise CochainError("arity must be nonnegative")
    expected = group.order ** arity
    if not isinstance(raw, list) or len(raw) != expected:
        raise CochainError(f"'values' must hold {expected} entries for arity {arity}, "
                           f"got {len(raw) if isinstance(raw, list) else type(raw).__name__}")
    decoded = []
    for i, v in enumerate(raw):
        try:
            d = _decode(v, target)
        except (TypeError, ValueError) as exc:
            raise CochainError(f"values[{i}] is not numeric: {exc}") from exc
        if d.shape != target.value_shape:
            raise CochainError(f"values[{i}] has shape {d.shape}, expected {target.value_shape}")
        decoded.append(d)
    table = np.stack(decoded).reshape((group.order,) * arity + target.value_shape)
    if arity == 0:
        table = table.reshape(target.value_shape)
    return Cochain(group, target, action, arity, values, table=table)


def all_tuples(group: CompactGroup, size: int):
    return itertools.product(range(group.order), repeat=size)

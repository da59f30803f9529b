"""Target groups U, their Lie algebras, and group actions on them.

Two families are supported: matrix groups (GL_n over R or C, and U(n)) and
the abelian vector groups R^d.  Values are numpy arrays whose trailing axes
are ``(d, d)`` for matrices and ``(d,)`` for vectors; leading axes index a
batch of group elements.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg
from .groups import CompactGroup

__all__ = [
    "TargetGroup",
    "GAction",
    "ActionError",
    "act",
    "act_alg",
    "exp_u",
    "log_u",
    "ad_operator_norm",
]


class ActionError(ValueError):
    pass


@dataclass(frozen=True)
class TargetGroup:
    kind: str = "matrix"            # "matrix" | "abelian"
    dim: int = 2
    field: str = "real"             # "real" | "complex"
    subtype: str = "general-linear"  # "general-linear" | "unitary"

    def __post_init__(self):
        if self.kind not in ("matrix", "abelian"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("target dimension must be at least 1")
        if self.field not in ("real", "complex"):
            raise ValueError(f"unknown field {self.field!r}")
        if self.subtype not in ("general-linear", "unitary"):
            raise ValueError(f"unknown subtype {self.subtype!r}")
        if self.kind == "abelian" and self.field != "real":
            raise ValueError("abelian targets are real vector groups")
        if self.subtype == "unitary" and self.field != "complex":
            raise ValueError("unitary targets need the complex field")

    @classmethod
    def matrix(cls, dim, field="real", subtype="general-linear") -> "TargetGroup":
        return cls("matrix", dim, field, subtype)

    @classmethod
    def abelian(cls, dim) -> "TargetGroup":
        return cls("abelian", dim)

    @property
    def is_abelian(self) -> bool:
        return self.kind == "abelian"

    @property
    def bracket_constant(self) -> float:
        return 0.0 if self.is_abelian else linalg.BRACKET_CONSTANT

    @property
    def value_shape(self) -> tuple:
        return (self.dim,) if self.is_abelian else (self.dim, self.dim)

    @property
    def dtype(self):
        return complex if self.field == "complex" else float

    @property
    def identity(self) -> np.ndarray:
        if self.is_abelian:
            return np.zeros(self.dim)
        return np.eye(self.dim, dtype=self.dtype)

    def zeros(self, batch=()) -> np.ndarray:
        return np.zeros(tuple(batch) + self.value_shape, dtype=self.dtype)

    def mul(self, u, v):
        return u + v if self.is_abelian else u @ v

    def inv(self, u):
        return -u if self.is_abelian else linalg.inv_batch(u)

    def exp(self, x):
        return np.array(x, dtype=self.dtype) if self.is_abelian else linalg.expm(x)

    def log(self, u):
        return np.array(u, dtype=self.dtype) if self.is_abelian else linalg.logm(u)

    def norm(self, x):
        """Spectral norm for matrices, Euclidean norm for vectors (slice-wise)."""
        if self.is_abelian:
            return np.linalg.norm(x, axis=-1)
        return linalg.op_norm(x, "spectral")

    def coerce(self, value) -> np.ndarray:
        """Cast a batch of values to this target, checking shape and finiteness."""
        a = np.asarray(value)
        if a.shape[a.ndim - len(self.value_shape):] != self.value_shape:
            raise ValueError(f"expected values of shape {self.value_shape}, got {a.shape}")
        if np.iscomplexobj(a) and self.field == "real":
            if np.max(np.abs(a.imag), initial=0.0) > 0:
                raise ValueError("complex values supplied for a real target")
            a = a.real
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite target values")
        return a.astype(self.dtype)

    def check_points(self, u) -> None:
        """Membership check for group-valued data (invertibility, unitarity)."""
        if self.is_abelian:
            return
        u = np.asarray(u)
        cond = np.linalg.cond(u.reshape((-1,) + self.value_shape))
        if np.any(~np.isfinite(cond)) or np.any(cond > 1e14):
            raise linalg.SingularMatrixError(-1, 0.0)
        if self.subtype == "unitary":
            eye = np.eye(self.dim)
            res = linalg.op_norm(np.conj(np.swapaxes(u, -1, -2)) @ u - eye)
            if np.max(res) > 1e-10:
                raise ValueError(f"value is not unitary (residual {np.max(res):.2e})")

    def project_algebra(self, x):
        """Project onto the Lie algebra (skew-Hermitian part for unitary targets)."""
        if self.subtype == "unitary":
            return 0.5 * (x - np.conj(np.swapaxes(x, -1, -2)))
        return x

    def to_json(self) -> dict:
        if self.is_abelian:
            return {"kind": "abelian", "dim": self.dim}
        return {"kind": "matrix", "dim": self.dim, "field": self.field, "subtype": self.subtype}


@dataclass(frozen=True)
class GAction:
    """A continuous action of G on U by automorphisms.

    ``rep`` maps a batch of group elements to matrices.  For ``conjugation``
    the action is ``u -> rep(s) u rep(s)^-1``; for ``linear`` it is
    ``u -> rep(s) u`` on vectors.  The induced algebra action is the same map.
    """

    kind: str = "trivial"           # "trivial" | "conjugation" | "linear"
    rep: Callable | None = None
    spec: dict = field(default_factory=lambda: {"kind": "trivial"}, compare=False)

    @classmethod
    def trivial(cls) -> "GAction":
        return cls()

    @classmethod
    def conjugation(cls, rep, spec=None) -> "GAction":
        return cls("conjugation", rep, spec or {"kind": "conjugation"})

    @classmethod
    def linear(cls, rep, spec=None) -> "GAction":
        return cls("linear", rep, spec or {"kind": "linear"})

    @property
    def is_trivial(self) -> bool:
        return self.kind == "trivial"

    def matrices(self, s):
        return self.rep(s)

    def validate(self, group: CompactGroup, target: TargetGroup, samples: int = 64,
                 seed: int = 0) -> None:
        """Check compatibility and that ``rep`` is a genuine homomorphism."""
        if self.kind == "trivial":
            return
        if self.kind == "conjugation" and target.is_abelian:
            raise ActionError("conjugation action needs a matrix target")
        if self.kind == "linear" and not target.is_abelian:
            raise ActionError("linear action needs an abelian vector target")
        if self.kind not in ("conjugation", "linear"):
            raise ActionError(f"unknown action kind {self.kind!r}")
        if group.is_finite:
            s = np.repeat(group.elements(), group.order)
            t = np.tile(group.elements(), group.order)
        else:
            rng = np.random.default_rng(seed)
            s = group.random_elements(rng, samples)
            t = group.random_elements(rng, samples)
        e = np.asarray(self.rep(np.asarray(group.identity)[None]))[0]
        d = target.dim
        if e.shape != (d, d):
            raise ActionError(f"action matrices must be {d}x{d}, got {e.shape}")
        if linalg.op_norm(e - np.eye(d)) > 1e-12:
            raise ActionError("action does not send the identity to I")
        ps, pt, pst = self.rep(s), self.rep(t), self.rep(group.mul(s, t))
        err = np.max(linalg.op_norm(ps @ pt - pst))
        if err > 1e-10:
            raise ActionError(f"action is not a homomorphism (residual {err:.2e})")
        if self.kind == "linear":
            orth = np.max(linalg.op_norm(np.swapaxes(ps, -1, -2) @ ps - np.eye(d)))
            if orth > 1e-10:
                raise ActionError("linear action must be orthogonal")
        if self.kind == "conjugation" and target.field == "real":
            if np.iscomplexobj(ps) and np.max(np.abs(np.imag(ps))) > 0:
                raise ActionError("complex conjugation action on a real target")

    def to_json(self) -> dict:
        return dict(self.spec)


def act(a: GAction, s, u):
    """Apply the action of a batch of elements ``s`` to target points ``u``."""
    if a.kind == "trivial":
        return u
    p = a.rep(s)
    if a.kind == "conjugation":
        return p @ u @ linalg.inv_batch(p)
    if a.kind == "linear":
        return np.einsum("...ij,...j->...i", p, u)
    raise ActionError(f"unknown action kind {a.kind!r}")


def act_alg(a: GAction, s, x):
    """Induced action on the Lie algebra (the same formula as ``act``)."""
    return act(a, s, x)


def exp_u(t: TargetGroup, x):
    return t.exp(x)


def log_u(t: TargetGroup, u):
    return t.log(u)


def ad_operator_norm(t: TargetGroup, u):
    """Upper bound ``||u|| ||u^-1||`` on the norm of ``x -> u x u^-1``."""
    if t.is_abelian:
        return np.ones(np.shape(u)[:-1]) if np.ndim(u) > 1 else 1.0
    return linalg.op_norm(u) * linalg.op_norm(linalg.inv_batch(np.asarray(u)))

"""Dense matrix kernels used throughout the package.

Matrices are plain numpy arrays.  Every function accepts a single matrix of
shape ``(n, n)`` or a stack of shape ``(..., n, n)`` and works slice-wise, so
that whole evaluation sets can be pushed through ``expm``/``logm`` at once.
"""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

__all__ = [
    "LinalgError",
    "SingularMatrixError",
    "BranchCutError",
    "as_matrix",
    "mat_mul",
    "mat_inv",
    "op_norm",
    "one_norm",
    "bracket",
    "expm",
    "sqrtm_db",
    "logm",
    "bch4",
    "BRACKET_CONSTANT",
]

# ||[x, y]|| <= 2 ||x|| ||y|| in the spectral norm; kept unscaled on purpose.
BRACKET_CONSTANT = 2.0

EXPM_THETA = 0.5
EXPM_MAX_NORM = 1e3
LOGM_ROOT_RADIUS = 0.25
DB_TOL = 1e-14
DB_MAX_STEPS = 50
BRANCH_TOL = 1e-12
PIVOT_MIN = 1e-300

# Degree-13 diagonal Pade coefficients for exp.
_PADE13 = np.array([
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
])

# 7-point Gauss-Legendre rule on [0, 1]; sum_j w_j X (I + x_j X)^{-1} is the
# [7/7] Pade approximant of log(I + X).
_GL_X, _GL_W = np.polynomial.legendre.leggauss(7)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


class LinalgError(ArithmeticError):
    pass


class SingularMatrixError(LinalgError):
    def __init__(self, pivot_index: int, pivot: float):
        super().__init__(f"matrix is singular: pivot {pivot_index} has magnitude {pivot:.3e}")
        self.pivot_index = pivot_index


class BranchCutError(LinalgError):
    """Raised when a logarithm would have to leave the principal branch."""

    def __init__(self, message: str, index: tuple | None = None):
        super().__init__(message)
        self.index = index


def as_matrix(a, dtype=None) -> np.ndarray:
    """Validate and return ``a`` as a 2-d array with finite entries."""
    m = np.array(a, dtype=dtype)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if not np.issubdtype(m.dtype, np.inexact):
        m = m.astype(float)
    return m


def _eye_like(a: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.eye(a.shape[-1], dtype=a.dtype), a.shape).copy()


def mat_mul(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def mat_inv(a, return_residual: bool = False):
    """Inverse through LU with partial pivoting.

    Raises SingularMatrixError naming the first pivot whose magnitude is at or
    below 1e-300.  With ``return_residual`` also returns the spectral norm of
    ``a @ inv - I``.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    bad = np.flatnonzero(pivots <= PIVOT_MIN)
    if bad.size:
        raise SingularMatrixError(int(bad[0]), float(pivots[bad[0]]))
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(a.shape[0], dtype=lu.dtype))
    if return_residual:
        return inv, op_norm(a @ inv - np.eye(a.shape[0]))
    return inv


def inv_batch(a: np.ndarray) -> np.ndarray:
    """Stack inverse; used on hot paths where inputs are already validated."""
    try:
        return np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(-1, 0.0) from exc


def op_norm(a, kind: str = "spectral") -> np.ndarray | float:
    """Spectral or Frobenius norm, slice-wise over the last two axes."""
    a = np.asarray(a)
    if kind == "frobenius":
        out = np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))
    elif kind == "spectral":
        if a.size == 0:
            out = np.zeros(a.shape[:-2])
        else:
            out = np.linalg.svd(a, compute_uv=False)[..., 0]
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    return float(out) if np.ndim(out) == 0 else out


def one_norm(a) -> np.ndarray:
    return np.max(np.sum(np.abs(a), axis=-2), axis=-1)


def bracket(x, y) -> np.ndarray:
    return x @ y - y @ x


def _pade13(a: np.ndarray) -> np.ndarray:
    b = _PADE13
    ident = _eye_like(a)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    # (v - u)^-1 (v + u), written so that a = 0 gives exactly I
    return ident + 2.0 * np.linalg.solve(v - u, u)


def expm(x) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-13 Pade step.

    The scaling exponent is ``max(0, ceil(log2(||x||_1 / 0.5)))``, chosen per
    slice.  Inputs with 1-norm above 1e3 are rejected.
    """
    x = np.asarray(x)
    if not np.issubdtype(x.dtype, np.inexact):
        x = x.astype(float)
    if x.shape[-1] != x.shape[-2]:
        raise ValueError(f"expm needs square matrices, got {x.shape}")
    norms = one_norm(x)
    if np.any(norms > EXPM_MAX_NORM):
        raise OverflowError(f"expm argument norm {np.max(norms):.3e} exceeds {EXPM_MAX_NORM:g}")
    with np.errstate(divide="ignore"):
        s = np.where(norms > EXPM_THETA, np.ceil(np.log2(norms / EXPM_THETA)), 0.0)
    s = s.astype(int)
    scale = np.ldexp(1.0, -s)[..., None, None]
    r = _pade13(x * scale)
    smax = int(np.max(s)) if s.size else 0
    for i in range(smax):
        sq = r @ r
        r = np.where((i < s)[..., None, None], sq, r)
    return r


def sqrtm_db(a: np.ndarray) -> np.ndarray:
    """Principal square root by the Denman-Beavers iteration."""
    y = np.array(a, copy=True)
    z = _eye_like(y)
    active = np.ones(y.shape[:-2], dtype=bool)
    for _ in range(DB_MAX_STEPS):
        if not np.any(active):
            break
        yi = inv_batch(y)
        zi = inv_batch(z)
        y_new = 0.5 * (y + zi)
        z_new = 0.5 * (z + yi)
        change = op_norm(y_new - y, "frobenius") / np.maximum(op_norm(y_new, "frobenius"), 1e-300)
        mask = active[..., None, None]
        y = np.where(mask, y_new, y)
        z = np.where(mask, z_new, z)
        active = active & (change > DB_TOL)
    return y


def _check_branch(u: np.ndarray) -> None:
    ident = _eye_like(u)
    near = op_norm(u - ident, "frobenius") < 1.0
    if np.all(near):
        return
    far = ~np.asarray(near)
    idx = np.argwhere(far) if u.ndim > 2 else None
    cand = u[far] if u.ndim > 2 else u[None]
    ev = np.linalg.eigvals(cand)
    scale = np.maximum(1.0, np.abs(ev))
    on_cut = (np.abs(ev.imag) <= BRANCH_TOL * scale) & (ev.real <= BRANCH_TOL * scale)
    hit = np.flatnonzero(np.any(on_cut, axis=-1))
    if hit.size:
        where = tuple(int(i) for i in idx[hit[0]]) if idx is not None else None
        lam = ev[hit[0]][on_cut[hit[0]]][0]
        raise BranchCutError(
            f"eigenvalue {lam:.6g} lies on the closed negative real axis; "
            "no principal logarithm",
            where,
        )


def logm(u) -> np.ndarray:
    """Principal matrix logarithm by inverse scaling and squaring.

    Square roots are taken until ``||u^(1/2^k) - I|| <= 0.25``, then the [7/7]
    Pade approximant of ``log(I + z)`` is applied and the result scaled by
    ``2^k``.
    """
    u = np.asarray(u)
    if not np.issubdtype(u.dtype, np.inexact):
        u = u.astype(float)
    if u.shape[-1] != u.shape[-2]:
        raise ValueError(f"logm needs square matrices, got {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("logm argument has non-finite entries")
    _check_branch(u)
    ident = _eye_like(u)
    k = np.zeros(u.shape[:-2], dtype=int)
    r = u
    for _ in range(64):
        need = op_norm(r - ident, "frobenius") > LOGM_ROOT_RADIUS
        if not np.any(need):
            break
        if r.ndim == 2:
            r = sqrtm_db(r)
        else:
            r = r.copy()
            r[need] = sqrtm_db(r[need])
        k = k + need
    else:
        raise BranchCutError("square-root phase did not reach the Pade radius")
    z = r - ident
    out = np.zeros_like(z)
    for xj, wj in zip(_GL_X, _GL_W):
        out = out + wj * np.linalg.solve(ident + xj * z, z)
    return out * np.ldexp(1.0, k)[..., None, None]


def bch4(a, b) -> np.ndarray:
    """log(e^a e^b) through the fourth-order terms of the BCH series."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"bch4 needs equal square shapes, got {a.shape} and {b.shape}")
    if np.any(op_norm(a) + op_norm(b) > 0.5):
        raise ValueError("bch4 requires ||a|| + ||b|| <= 0.5")
    ab = bracket(a, b)
    a_ab = bracket(a, ab)
    b_ba = bracket(b, -ab)
    return a + b + 0.5 * ab + (a_ab + b_ba) / 12.0 - bracket(b, a_ab) / 24.0

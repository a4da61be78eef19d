"""Quaternion algebra, quaternionic 2-vectors and 2x2 endomorphisms.

Two layers live here:

* array functions (``qmul``, ``matvec``, ``complexify`` ...) acting on float
  arrays whose trailing axis holds the components ``(w, x, y, z)`` of
  ``w + x i + y j + z k``.  Quaternionic 2-vectors are arrays of shape
  ``(..., 2, 4)`` and endomorphisms of ``H^2`` arrays of shape
  ``(..., 2, 2, 4)``.  Everything broadcasts, so whole grids are handled in
  one call.
* small immutable value classes (:class:`Quaternion`, :class:`HVector2`,
  :class:`HEndo2`) for scalar work and readable tests.

Conventions
-----------
Quaternionic scalars act on vectors from the right (``v h``) and matrices act
from the left (``A v``).  The complex structure on ``H`` is right
multiplication by ``i``; writing ``q = z1 + j z2`` with ``z1, z2`` complex
identifies ``H`` with ``C^2``.  Left multiplication by ``p = a + j b`` is then
the complex matrix ``[[a, -conj(b)], [b, conj(a)]]``, and a vector
``(q1, q2)`` of ``H^2`` maps to ``(z1(q1), z2(q1), z1(q2), z2(q2))`` in
``C^4``.  Multiplier extraction depends on this choice; do not change it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import SingularMatrixError, SingularQuaternionError

DEFAULT_EPS = 1e-12

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])
ZERO = np.zeros(4)


# ----------------------------------------------------------------------------
# array layer
# ----------------------------------------------------------------------------

def qmul(a, b):
    """Hamilton product of quaternion arrays (broadcasting)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qconj(a):
    a = np.asarray(a, dtype=float)
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(a):
    a = np.asarray(a, dtype=float)
    return np.sum(a * a, axis=-1)


def qnorm(a):
    return np.sqrt(qnorm2(a))


def qdot(a, b):
    """Euclidean inner product on R^4 = H."""
    return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1)


def qinv(a, eps=DEFAULT_EPS):
    """Inverse ``conj(a)/|a|^2``; raises if any entry has ``|a| <= eps``."""
    n2 = qnorm2(a)
    if np.any(n2 <= eps * eps):
        raise SingularQuaternionError("singular quaternion")
    return qconj(a) / n2[..., None]


def qscale(a, s):
    """Multiply quaternion array by a real array (broadcast over leading axes)."""
    return np.asarray(a, dtype=float) * np.asarray(s, dtype=float)[..., None]


def real_part(a):
    return np.asarray(a, dtype=float)[..., 0]


def imag_part(a):
    a = np.array(a, dtype=float, copy=True)
    a[..., 0] = 0.0
    return a


def from_complex_pair(z1, z2=0.0):
    """Quaternion ``z1 + j z2`` from complex arrays."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    z1, z2 = np.broadcast_arrays(z1, z2)
    return np.stack([z1.real, z1.imag, z2.real, -z2.imag], axis=-1)


def to_complex_pair(q):
    """Inverse of :func:`from_complex_pair`."""
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] - 1j * q[..., 3]


def from_complex(z):
    """Embed complex numbers as quaternions in ``span{1, i}``."""
    return from_complex_pair(z, 0.0)


def cexp_i(theta):
    """``exp(i theta)`` as a quaternion; ``theta`` may be complex."""
    return from_complex(np.exp(1j * np.asarray(theta)))


def matvec(A, v):
    """``A v`` for ``A`` of shape (..., 2, 2, 4) and ``v`` of shape (..., 2, 4)."""
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    top = qmul(A[..., 0, 0, :], v[..., 0, :]) + qmul(A[..., 0, 1, :], v[..., 1, :])
    bot = qmul(A[..., 1, 0, :], v[..., 0, :]) + qmul(A[..., 1, 1, :], v[..., 1, :])
    return np.stack([top, bot], axis=-2)


def matmul(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    cols = [matvec(A, B[..., :, c, :]) for c in range(2)]
    return np.stack(cols, axis=-2)


def vec_scale(v, h):
    """Right scalar action ``v h`` of a quaternion (array) on 2-vectors."""
    h = np.asarray(h, dtype=float)
    return qmul(np.asarray(v, dtype=float), h[..., None, :])


def vec_norm(v):
    return np.sqrt(np.sum(np.asarray(v, dtype=float) ** 2, axis=(-2, -1)))


def identity_endo(shape=()):
    out = np.zeros(tuple(shape) + (2, 2, 4))
    out[..., 0, 0, 0] = 1.0
    out[..., 1, 1, 0] = 1.0
    return out


def column_matrix(u, v):
    """Endomorphism whose columns are the 2-vectors ``u`` and ``v``."""
    return np.stack([np.asarray(u, float), np.asarray(v, float)], axis=-2)


def complexify_q(q):
    """Left multiplication by ``q`` as a 2x2 complex matrix."""
    a, b = to_complex_pair(q)
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = -np.conj(b)
    out[..., 1, 0] = b
    out[..., 1, 1] = np.conj(a)
    return out


def complexify(A):
    """Image of endomorphisms (..., 2, 2, 4) in complex 4x4 matrices."""
    A = np.asarray(A, dtype=float)
    a, b = to_complex_pair(A)  # (..., 2, 2) each
    out = np.empty(A.shape[:-3] + (4, 4), dtype=complex)
    out[..., 0::2, 0::2] = a
    out[..., 0::2, 1::2] = -np.conj(b)
    out[..., 1::2, 0::2] = b
    out[..., 1::2, 1::2] = np.conj(a)
    return out


def decomplexify(M):
    """Inverse of :func:`complexify` (reads the ``a, b`` entries only)."""
    M = np.asarray(M, dtype=complex)
    return from_complex_pair(M[..., 0::2, 0::2], M[..., 1::2, 0::2])


def complexify_vec(v):
    z1, z2 = to_complex_pair(np.asarray(v, dtype=float))
    out = np.empty(z1.shape[:-1] + (4,), dtype=complex)
    out[..., 0::2] = z1
    out[..., 1::2] = z2
    return out


def decomplexify_vec(c):
    c = np.asarray(c, dtype=complex)
    return from_complex_pair(c[..., 0::2], c[..., 1::2])


def endo_inv_array(A, cond_max=1e12):
    M = complexify(A)
    cond = np.linalg.cond(M)
    if np.any(~np.isfinite(cond)) or np.any(cond > cond_max):
        raise SingularMatrixError("singular quaternionic matrix")
    return decomplexify(np.linalg.inv(M))


def solve_2x2(A, v, cond_max=1e12):
    """Solve ``A m = v`` for quaternionic 2-vectors ``m`` (array layer)."""
    M = complexify(A)
    cond = np.linalg.cond(M)
    if np.any(~np.isfinite(cond)) or np.any(cond > cond_max):
        raise SingularMatrixError("singular quaternionic matrix")
    c = complexify_vec(v)
    return decomplexify_vec(np.linalg.solve(M, c[..., None])[..., 0])


# ----------------------------------------------------------------------------
# value classes
# ----------------------------------------------------------------------------

Scalar = Union[int, float]


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def from_complex(cls, z: complex) -> "Quaternion":
        return cls(z.real, z.imag, 0.0, 0.0)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def real(self) -> float:
        return self.w

    @property
    def imag(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return float(np.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2))

    def inv(self, eps: float = DEFAULT_EPS) -> "Quaternion":
        return quat_inv(self, eps)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quaternion(*(self.array * float(other)))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quaternion(*(self.array * float(other)))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quaternion(*(self.array / float(other)))
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(*(self.array + other.array))
        if isinstance(other, (int, float)):
            return Quaternion(self.w + other, self.x, self.y, self.z)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(*(self.array - other.array))
        if isinstance(other, (int, float)):
            return Quaternion(self.w - other, self.x, self.y, self.z)
        return NotImplemented

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def isclose(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.array - other.array)) <= tol)

    def __repr__(self) -> str:
        return f"Quaternion({self.w:+.6g}, {self.x:+.6g}i, {self.y:+.6g}j, {self.z:+.6g}k)"


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    return Quaternion.from_array(qmul(a.array, b.array))


def quat_inv(a: Quaternion, eps: float = DEFAULT_EPS) -> Quaternion:
    """Inverse of ``a``.  ``eps`` is relative to nothing: the caller scales it."""
    n2 = a.w**2 + a.x**2 + a.y**2 + a.z**2
    if n2 <= eps * eps:
        raise SingularQuaternionError("singular quaternion")
    return Quaternion(a.w / n2, -a.x / n2, -a.y / n2, -a.z / n2)


@dataclass(frozen=True)
class HVector2:
    top: Quaternion
    bottom: Quaternion

    @classmethod
    def from_array(cls, v) -> "HVector2":
        v = np.asarray(v, dtype=float)
        return cls(Quaternion.from_array(v[0]), Quaternion.from_array(v[1]))

    @property
    def array(self) -> np.ndarray:
        return np.stack([self.top.array, self.bottom.array])

    def scale(self, h: Quaternion) -> "HVector2":
        """Right scalar action ``v h``."""
        return HVector2(self.top * h, self.bottom * h)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.top.norm() <= tol and self.bottom.norm() <= tol

    def norm(self) -> float:
        return float(np.sqrt(self.top.norm() ** 2 + self.bottom.norm() ** 2))

    def __add__(self, other: "HVector2") -> "HVector2":
        return HVector2(self.top + other.top, self.bottom + other.bottom)

    def __sub__(self, other: "HVector2") -> "HVector2":
        return HVector2(self.top - other.top, self.bottom - other.bottom)


@dataclass(frozen=True)
class HEndo2:
    a: Quaternion
    b: Quaternion
    c: Quaternion
    d: Quaternion

    @classmethod
    def identity(cls) -> "HEndo2":
        one, zero = Quaternion(1.0), Quaternion()
        return cls(one, zero, zero, one)

    @classmethod
    def from_array(cls, A) -> "HEndo2":
        A = np.asarray(A, dtype=float)
        q = Quaternion.from_array
        return cls(q(A[0, 0]), q(A[0, 1]), q(A[1, 0]), q(A[1, 1]))

    @property
    def array(self) -> np.ndarray:
        return np.array(
            [[self.a.array, self.b.array], [self.c.array, self.d.array]]
        )

    def __matmul__(self, other):
        if isinstance(other, HEndo2):
            return HEndo2.from_array(matmul(self.array, other.array))
        if isinstance(other, HVector2):
            return endo_apply(self, other)
        return NotImplemented

    def inv(self) -> "HEndo2":
        return endo_inv(self)

    def complexify(self) -> np.ndarray:
        return complexify(self.array)


def endo_apply(A: HEndo2, v: HVector2) -> HVector2:
    return HVector2.from_array(matvec(A.array, v.array))


def endo_inv(A: HEndo2) -> HEndo2:
    return HEndo2.from_array(endo_inv_array(A.array))

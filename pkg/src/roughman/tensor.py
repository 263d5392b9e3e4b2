"""Truncated tensor algebra T^N(R^d) and its free nilpotent Lie algebra.

Elements are stored densely, one flat row-major coefficient array per degree.
The degree-0 slot is the scalar part: group-like elements have scalar 1, Lie
elements have scalar 0.  Everything here is pure and allocation-based; stored
arrays are frozen after construction so values can be shared freely.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ContractViolation",
    "TruncatedTensor",
    "LieElement",
    "LieReport",
    "tensor_mul",
    "tensor_exp",
    "tensor_log",
    "group_inverse",
    "signature_piecewise_linear",
    "check_lie",
    "unit_tensor",
    "zero_tensor",
    "letter",
    "from_level1",
    "area_tensor",
    "bracket_tensor",
    "level_norms",
    "homogeneous_norm",
    "tensor_allclose",
    "max_abs_diff",
]

#: Relative tolerance for algebraic identities in double precision.
DEFAULT_TOL = 1e-12


class ContractViolation(ValueError):
    """An operation was called outside its documented domain."""


class TruncatedTensor:
    """Element of T^N(R^d), truncated at degree ``level``.

    ``levels[k]`` is the flat row-major coefficient array of the degree-k
    component, of exact size d**k.  Instances are immutable.
    """

    __slots__ = ("dim", "level", "levels")

    def __init__(self, dim: int, level: int, levels: Sequence[np.ndarray]):
        if dim < 1 or level < 1:
            raise ContractViolation(f"dim and level must be positive, got d={dim}, N={level}")
        if len(levels) != level + 1:
            raise ContractViolation(f"expected {level + 1} degree components, got {len(levels)}")
        frozen = []
        for k, arr in enumerate(levels):
            a = np.ascontiguousarray(arr, dtype=float).reshape(-1)
            if a.size != dim**k:
                raise ContractViolation(f"degree-{k} component has size {a.size}, expected {dim**k}")
            a = a.copy()
            a.flags.writeable = False
            frozen.append(a)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "levels", tuple(frozen))

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedTensor is immutable")

    @property
    def scalar(self) -> float:
        return float(self.levels[0][0])

    def component(self, k: int) -> np.ndarray:
        """Degree-k component reshaped to (d,) * k."""
        return self.levels[k].reshape((self.dim,) * k)

    def __add__(self, other: "TruncatedTensor") -> "TruncatedTensor":
        _check_compatible(self, other)
        return TruncatedTensor(self.dim, self.level,
                               [a + b for a, b in zip(self.levels, other.levels)])

    def __sub__(self, other: "TruncatedTensor") -> "TruncatedTensor":
        _check_compatible(self, other)
        return TruncatedTensor(self.dim, self.level,
                               [a - b for a, b in zip(self.levels, other.levels)])

    def __mul__(self, c: float) -> "TruncatedTensor":
        return TruncatedTensor(self.dim, self.level, [c * a for a in self.levels])

    __rmul__ = __mul__

    def __neg__(self) -> "TruncatedTensor":
        return self * -1.0

    def __matmul__(self, other: "TruncatedTensor") -> "TruncatedTensor":
        return tensor_mul(self, other)

    def __repr__(self) -> str:
        return f"TruncatedTensor(d={self.dim}, N={self.level}, |g|={homogeneous_norm(self):.3g})"

    def to_json_obj(self) -> dict:
        """JSON form: {"dim": d, "level": N, "data": [level0, [level1...], ...]}."""
        data: list = [self.scalar]
        data.extend(self.levels[k].tolist() for k in range(1, self.level + 1))
        return {"dim": self.dim, "level": self.level, "data": data}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @staticmethod
    def from_json_obj(obj: dict) -> "TruncatedTensor":
        d, n = int(obj["dim"]), int(obj["level"])
        data = obj["data"]
        levels = [np.array([float(data[0])])]
        levels.extend(np.asarray(data[k], dtype=float) for k in range(1, n + 1))
        return TruncatedTensor(d, n, levels)

    @staticmethod
    def from_json(text: str) -> "TruncatedTensor":
        return TruncatedTensor.from_json_obj(json.loads(text))


def _check_compatible(a: TruncatedTensor, b: TruncatedTensor) -> None:
    if a.dim != b.dim or a.level != b.level:
        raise ContractViolation(
            f"incompatible tensors: (d={a.dim}, N={a.level}) vs (d={b.dim}, N={b.level})")


def unit_tensor(dim: int, level: int) -> TruncatedTensor:
    """The multiplicative unit (1, 0, ..., 0)."""
    levels = [np.zeros(dim**k) for k in range(level + 1)]
    levels[0][0] = 1.0
    return TruncatedTensor(dim, level, levels)


def zero_tensor(dim: int, level: int) -> TruncatedTensor:
    return TruncatedTensor(dim, level, [np.zeros(dim**k) for k in range(level + 1)])


def from_level1(v: np.ndarray, level: int) -> TruncatedTensor:
    """Tensor with degree-1 component v and all other components zero."""
    v = np.asarray(v, dtype=float).reshape(-1)
    levels = [np.zeros(len(v) ** k) for k in range(level + 1)]
    levels[1] = v
    return TruncatedTensor(len(v), level, levels)


def letter(i: int, dim: int, level: int) -> TruncatedTensor:
    """The basis letter eps_i (0-based) as a degree-1 tensor."""
    v = np.zeros(dim)
    v[i] = 1.0
    return from_level1(v, level)


def area_tensor(a: np.ndarray, level: int) -> TruncatedTensor:
    """Degree-2 tensor sum_ij a_ij eps_i (x) eps_j; Lie iff a is antisymmetric."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    levels = [np.zeros(d**k) for k in range(level + 1)]
    levels[2] = a.reshape(-1)
    return TruncatedTensor(d, level, levels)


def bracket_tensor(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Commutator a (x) b - b (x) a."""
    return tensor_mul(a, b) - tensor_mul(b, a)


def tensor_mul(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Truncated tensor product; degree-k output is sum_{i+j=k} a_i (x) b_j."""
    _check_compatible(a, b)
    out = [np.zeros(a.dim**k) for k in range(a.level + 1)]
    for i, ai in enumerate(a.levels):
        if not ai.any():
            continue
        for j in range(a.level + 1 - i):
            bj = b.levels[j]
            if not bj.any():
                continue
            if i == 0:
                out[j] += ai[0] * bj
            elif j == 0:
                out[i] += bj[0] * ai
            else:
                out[i + j] += np.outer(ai, bj).reshape(-1)
    return TruncatedTensor(a.dim, a.level, out)


def tensor_exp(l: TruncatedTensor) -> TruncatedTensor:
    """Truncated exponential series sum_k l^(x)k / k!.

    Requires zero scalar part; the series terminates at degree ``level``
    because the argument is nilpotent in the truncated algebra.
    """
    if l.scalar != 0.0:
        raise ContractViolation(f"tensor_exp needs scalar part 0, got {l.scalar}")
    result = unit_tensor(l.dim, l.level)
    term = unit_tensor(l.dim, l.level)
    for k in range(1, l.level + 1):
        term = tensor_mul(term, l) * (1.0 / k)
        result = result + term
    return result


def tensor_log(g: TruncatedTensor) -> TruncatedTensor:
    """Truncated logarithm series sum_k (-1)^(k+1) (g - 1)^(x)k / k."""
    if abs(g.scalar - 1.0) > 1e-9:
        raise ContractViolation(f"tensor_log needs scalar part 1, got {g.scalar}")
    x = g - unit_tensor(g.dim, g.level)
    result = x
    term = x
    for k in range(2, g.level + 1):
        term = tensor_mul(term, x)
        result = result + term * ((-1.0) ** (k + 1) / k)
    return result


def group_inverse(g: TruncatedTensor) -> TruncatedTensor:
    """Inverse of an element with scalar part 1, via exp(-log g)."""
    return tensor_exp(-tensor_log(g))


def signature_piecewise_linear(points: np.ndarray, level: int) -> TruncatedTensor:
    """Signature of the polygonal path through ``points``: the product of
    per-segment exponentials exp(increment).  Group-like by construction.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ContractViolation("need at least 2 points of shape (n, d)")
    sig = tensor_exp(from_level1(pts[1] - pts[0], level))
    for a, b in zip(pts[1:-1], pts[2:]):
        sig = tensor_mul(sig, tensor_exp(from_level1(b - a, level)))
    return sig


# ---------------------------------------------------------------------------
# Lie membership: the left-to-right bracketing map on words,
#   w_1 ... w_k  ->  [[[w_1, w_2], w_3], ..., w_k],
# fixes k times every degree-k component of a Lie element and nothing else.

@lru_cache(maxsize=None)
def _dynkin_matrix(dim: int, degree: int) -> np.ndarray:
    if degree == 1:
        return np.eye(dim)
    prev = _dynkin_matrix(dim, degree - 1)
    n = dim ** (degree - 1)
    left = np.zeros((n, dim, n, dim))
    right = np.zeros((dim, n, n, dim))
    for i in range(dim):
        left[:, i, :, i] = prev
        right[i, :, :, i] = prev
    return left.reshape(n * dim, n * dim) - right.reshape(n * dim, n * dim)


def dynkin_map(t: TruncatedTensor) -> TruncatedTensor:
    """Apply the left-to-right bracketing map degree by degree."""
    out = [t.levels[0].copy()]
    out.extend(_dynkin_matrix(t.dim, k) @ t.levels[k] for k in range(1, t.level + 1))
    return TruncatedTensor(t.dim, t.level, out)


@dataclass(frozen=True)
class LieReport:
    """Per-degree relative defect of the bracketing-map criterion."""

    defects: tuple[float, ...]  # index k-1 holds the degree-k defect
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.defects)

    @property
    def max_defect(self) -> float:
        return max(self.defects)

    def failing_degrees(self) -> list[int]:
        return [k + 1 for k, v in enumerate(self.defects) if v > self.tol]


def _lie_defects(t: TruncatedTensor) -> tuple[float, ...]:
    defects = []
    for k in range(1, t.level + 1):
        xk = t.levels[k]
        residual = _dynkin_matrix(t.dim, k) @ xk - k * xk
        scale = max(k * float(np.abs(xk).max(initial=0.0)), 1e-300)
        num = float(np.abs(residual).max(initial=0.0))
        defects.append(num / scale if num else 0.0)
    return tuple(defects)


def check_lie(g: TruncatedTensor, tol: float = 1e-10) -> LieReport:
    """Geometricity test: take the log, then check the per-degree
    bracketing-map criterion.  Returns a report, never raises on failure.
    """
    if abs(g.scalar - 1.0) > 1e-9:
        raise ContractViolation(f"check_lie expects a group element (scalar 1), got {g.scalar}")
    return LieReport(_lie_defects(tensor_log(g)), tol)


class LieElement(TruncatedTensor):
    """A tensor with zero scalar part whose every homogeneous component lies
    in the free Lie subspace (validated on construction).
    """

    __slots__ = ()

    def __init__(self, dim: int, level: int, levels: Sequence[np.ndarray],
                 tol: float = DEFAULT_TOL):
        super().__init__(dim, level, levels)
        if self.scalar != 0.0:
            raise ContractViolation(f"LieElement needs scalar part 0, got {self.scalar}")
        defects = _lie_defects(self)
        worst = max(defects)
        if worst > tol:
            raise ContractViolation(f"not a Lie element: bracketing-map defect {worst:.3g}")

    @staticmethod
    def from_tensor(t: TruncatedTensor, tol: float = DEFAULT_TOL) -> "LieElement":
        return LieElement(t.dim, t.level, t.levels, tol=tol)


# ---------------------------------------------------------------------------
# Norms.  Per degree we use the l1 norm, which is sub-multiplicative for the
# row-major outer product; the homogeneous norm is max_k |g_k|_1^(1/k).

def level_norms(t: TruncatedTensor) -> np.ndarray:
    return np.array([float(np.abs(a).sum()) for a in t.levels])


def homogeneous_norm(t: TruncatedTensor) -> float:
    norms = level_norms(t)
    vals = [norms[k] ** (1.0 / k) for k in range(1, t.level + 1)]
    return max(vals) if vals else 0.0


def max_abs_diff(a: TruncatedTensor, b: TruncatedTensor) -> float:
    _check_compatible(a, b)
    return max(float(np.abs(x - y).max(initial=0.0)) for x, y in zip(a.levels, b.levels))


def tensor_allclose(a: TruncatedTensor, b: TruncatedTensor,
                    rtol: float = DEFAULT_TOL, atol: float = 0.0) -> bool:
    _check_compatible(a, b)
    return all(np.allclose(x, y, rtol=rtol, atol=atol) for x, y in zip(a.levels, b.levels))

"""
Symmetric 3x3 tensors for pressure and relaxation tensors.
Only the six independent entries are stored, so symmetry is structural.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)

DET_TOLERANCE = 1e-300
CONDITION_LIMIT = 1e14
DEGENERATE_SPREAD = 1e-14


class SingularTensor(Exception):
    """Raised when a relaxation tensor cannot be inverted (or is not
    positive-definite where a Gaussian covariance is required)."""

    def __init__(self, message: str, det: float = float('nan')):
        self.det = det
        super().__init__(message)


@dataclass(frozen=True)
class SymTensor3:
    """Symmetric 3x3 tensor in temperature units (k_B = 1)."""

    xx: float
    yy: float
    zz: float
    xy: float = 0.0
    xz: float = 0.0
    yz: float = 0.0

    @classmethod
    def identity(cls, scale: float = 1.0) -> 'SymTensor3':
        return cls(scale, scale, scale)

    @classmethod
    def diag(cls, a: float, b: float, c: float) -> 'SymTensor3':
        return cls(a, b, c)

    @classmethod
    def from_matrix(cls, matrix) -> 'SymTensor3':
        """Build from a 3x3 array; the upper triangle is used."""
        a = np.asarray(matrix, dtype=float)
        return cls(float(a[0, 0]), float(a[1, 1]), float(a[2, 2]),
                   float(a[0, 1]), float(a[0, 2]), float(a[1, 2]))

    @classmethod
    def from_entries(cls, entries) -> 'SymTensor3':
        """Build from (xx, yy, zz, xy, xz, yz)."""
        xx, yy, zz, xy, xz, yz = (float(e) for e in entries)
        return cls(xx, yy, zz, xy, xz, yz)

    def entries(self) -> Tuple[float, float, float, float, float, float]:
        return (self.xx, self.yy, self.zz, self.xy, self.xz, self.yz)

    def as_matrix(self) -> np.ndarray:
        return np.array([
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ])

    def trace(self) -> float:
        return self.xx + self.yy + self.zz

    def scaled(self, factor: float) -> 'SymTensor3':
        return SymTensor3(*(factor * e for e in self.entries()))

    def shifted(self, value: float) -> 'SymTensor3':
        """Add value * identity."""
        return SymTensor3(self.xx + value, self.yy + value, self.zz + value,
                          self.xy, self.xz, self.yz)

    def __add__(self, other: 'SymTensor3') -> 'SymTensor3':
        return SymTensor3(*(a + b for a, b in zip(self.entries(), other.entries())))

    def __sub__(self, other: 'SymTensor3') -> 'SymTensor3':
        return SymTensor3(*(a - b for a, b in zip(self.entries(), other.entries())))

    def max_abs(self) -> float:
        return max(abs(e) for e in self.entries())


def det(t: SymTensor3) -> float:
    """Determinant by cofactor expansion along the first row."""
    return (t.xx * (t.yy * t.zz - t.yz * t.yz)
            - t.xy * (t.xy * t.zz - t.yz * t.xz)
            + t.xz * (t.xy * t.yz - t.yy * t.xz))


def _condition_estimate(t: SymTensor3, inv: SymTensor3) -> float:
    """Frobenius-norm condition estimate ||t|| * ||t^-1||."""
    def frob(s: SymTensor3) -> float:
        return math.sqrt(s.xx ** 2 + s.yy ** 2 + s.zz ** 2
                         + 2.0 * (s.xy ** 2 + s.xz ** 2 + s.yz ** 2))
    return frob(t) * frob(inv)


def inverse(t: SymTensor3) -> SymTensor3:
    """
    Invert via the adjugate.

    Raises:
        SingularTensor: if |det| < 1e-300 or the condition estimate exceeds 1e14
    """
    d = det(t)
    if abs(d) < DET_TOLERANCE or not math.isfinite(d):
        raise SingularTensor(f"Tensor is singular (det={d:.3e})", det=d)

    inv = SymTensor3(
        xx=(t.yy * t.zz - t.yz * t.yz) / d,
        yy=(t.xx * t.zz - t.xz * t.xz) / d,
        zz=(t.xx * t.yy - t.xy * t.xy) / d,
        xy=(t.xz * t.yz - t.xy * t.zz) / d,
        xz=(t.xy * t.yz - t.xz * t.yy) / d,
        yz=(t.xy * t.xz - t.xx * t.yz) / d,
    )

    cond = _condition_estimate(t, inv)
    if cond > CONDITION_LIMIT:
        raise SingularTensor(f"Tensor is ill-conditioned (condition ~{cond:.3e})", det=d)
    return inv


def eigenvalues(t: SymTensor3) -> Tuple[float, float, float]:
    """
    Eigenvalues in ascending order, closed-form trigonometric method.

    Diagonal inputs are returned exactly. When the eigenvalue spread is
    degenerate (below 1e-14 relative) LAPACK's eigvalsh is used instead.
    """
    off = t.xy ** 2 + t.xz ** 2 + t.yz ** 2
    if off == 0.0:
        a, b, c = sorted((t.xx, t.yy, t.zz))
        return (a, b, c)

    q = t.trace() / 3.0
    p2 = (t.xx - q) ** 2 + (t.yy - q) ** 2 + (t.zz - q) ** 2 + 2.0 * off
    p = math.sqrt(p2 / 6.0)
    scale = max(t.max_abs(), 1e-300)
    if p <= DEGENERATE_SPREAD * scale:
        logger.debug("Degenerate eigenvalue spread, falling back to eigvalsh")
        a, b, c = np.linalg.eigvalsh(t.as_matrix())
        return (float(a), float(b), float(c))

    b_tensor = t.shifted(-q).scaled(1.0 / p)
    r = det(b_tensor) / 2.0
    # r may leave [-1, 1] by rounding
    if r <= -1.0:
        phi = math.pi / 3.0
    elif r >= 1.0:
        phi = 0.0
    else:
        phi = math.acos(r) / 3.0

    largest = q + 2.0 * p * math.cos(phi)
    smallest = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    middle = 3.0 * q - largest - smallest
    a, b, c = sorted((smallest, middle, largest))
    return (a, b, c)


def is_positive_definite(t: SymTensor3) -> bool:
    return eigenvalues(t)[0] > 0.0


def require_positive_definite(t: SymTensor3, label: str = "tensor") -> None:
    """Raise SingularTensor unless every eigenvalue of t is > 0."""
    lowest = eigenvalues(t)[0]
    if lowest <= 0.0:
        raise SingularTensor(
            f"{label} is not positive-definite (smallest eigenvalue {lowest:.3e})",
            det=det(t),
        )


def quadratic_form(t: SymTensor3, w) -> np.ndarray:
    """
    w . t . w for a single 3-vector or a (K, 3) batch of vectors.

    Returns:
        float for a single vector, array of shape (K,) for a batch
    """
    w = np.asarray(w, dtype=float)
    x, y, z = w[..., 0], w[..., 1], w[..., 2]
    value = (t.xx * x * x + t.yy * y * y + t.zz * z * z
             + 2.0 * (t.xy * x * y + t.xz * x * z + t.yz * y * z))
    if np.ndim(value) == 0:
        return float(value)
    return value


def convex_combine(a: float, t1: SymTensor3, t2: SymTensor3) -> SymTensor3:
    """a * t1 + (1 - a) * t2."""
    return t1.scaled(a) + t2.scaled(1.0 - a)


def outer(w) -> SymTensor3:
    """w (x) w as a symmetric tensor."""
    x, y, z = (float(c) for c in w)
    return SymTensor3(x * x, y * y, z * z, x * y, x * z, y * z)

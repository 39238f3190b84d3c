"""Scalar geometry: vectors, unit quaternions, poses, axis-aligned boxes.

Everything here is plain float math. The interaction loop calls these
per event, so the types stay small and allocation-light; batch (numpy)
evaluation lives next to the solid evaluators that need it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UNIT_NORM_TOL = 1e-9


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        # coerce ints so equality and serialization are representation-free
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))
        _require_finite("Vec3 component", self.x, self.y, self.z)

    @staticmethod
    def zero() -> "Vec3":
        return Vec3(0.0, 0.0, 0.0)

    @staticmethod
    def from_seq(seq) -> "Vec3":
        a, b, c = seq
        return Vec3(float(a), float(b), float(c))

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def hadamard(self, other: "Vec3") -> "Vec3":
        """Componentwise product (per-axis scaling)."""
        return Vec3(self.x * other.x, self.y * other.y, self.z * other.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance_to(self, other: "Vec3") -> float:
        return (self - other).norm()

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n < 1e-12:
            raise ValueError("cannot normalize a near-zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def min_component(self) -> float:
        return min(self.x, self.y, self.z)

    def max_component(self) -> float:
        return max(self.x, self.y, self.z)


@dataclass(frozen=True, slots=True)
class Rotation:
    """Unit quaternion (w, x, y, z).

    The constructor renormalizes, so the unit-norm invariant holds after
    every operation; inputs further than 1e-6 from unit length are
    rejected as data errors rather than silently rescaled.
    """

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", float(self.w))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))
        _require_finite("quaternion component", self.w, self.x, self.y, self.z)
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"quaternion norm {n} too far from 1")
        if abs(n - 1.0) > UNIT_NORM_TOL:
            object.__setattr__(self, "w", self.w / n)
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_unnormalized(w: float, x: float, y: float, z: float) -> "Rotation":
        n = math.sqrt(w * w + x * x + y * y + z * z)
        if n < 1e-12 or not math.isfinite(n):
            raise ValueError("cannot normalize a near-zero quaternion")
        if abs(n - 1.0) <= UNIT_NORM_TOL:  # already unit: keep bytes stable
            return Rotation(w, x, y, z)
        return Rotation(w / n, x / n, y / n, z / n)

    @staticmethod
    def from_axis_angle(axis: Vec3, angle: float) -> "Rotation":
        u = axis.normalized()
        h = 0.5 * angle
        s = math.sin(h)
        return Rotation(math.cos(h), u.x * s, u.y * s, u.z * s)

    def __mul__(self, other: "Rotation") -> "Rotation":
        """Hamilton product; (a * b).rotate(v) == a.rotate(b.rotate(v))."""
        aw, ax, ay, az = self.w, self.x, self.y, self.z
        bw, bx, by, bz = other.w, other.x, other.y, other.z
        return Rotation(
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        )

    def inverse(self) -> "Rotation":
        return Rotation(self.w, -self.x, -self.y, -self.z)

    def rotate(self, v: Vec3) -> Vec3:
        # q v q* expanded: v + 2 u x (u x v + w v), u = (x, y, z)
        ux, uy, uz = self.x, self.y, self.z
        cx = uy * v.z - uz * v.y + self.w * v.x
        cy = uz * v.x - ux * v.z + self.w * v.y
        cz = ux * v.y - uy * v.x + self.w * v.z
        return Vec3(
            v.x + 2.0 * (uy * cz - uz * cy),
            v.y + 2.0 * (uz * cx - ux * cz),
            v.z + 2.0 * (ux * cy - uy * cx),
        )

    def to_matrix(self) -> tuple[tuple[float, float, float], ...]:
        """Row-major 3x3 rotation matrix."""
        w, x, y, z = self.w, self.x, self.y, self.z
        return (
            (1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)),
            (2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)),
            (2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)),
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    def canonical(self) -> "Rotation":
        """Pick one representative of the {q, -q} double cover (w >= 0)."""
        w, x, y, z = self.w, self.x, self.y, self.z
        flip = w < 0.0 or (w == 0.0 and (x < 0.0 or (x == 0.0 and (y < 0.0 or (y == 0.0 and z < 0.0)))))
        return Rotation(-w, -x, -y, -z) if flip else self

    def twist_angle_about(self, axis: Vec3) -> float:
        """Swing-twist decomposition: signed twist angle about `axis`.

        The twist is the unique rotation about `axis` such that
        self = swing * twist with the swing axis orthogonal to `axis`.
        """
        u = axis.normalized()
        proj = self.x * u.x + self.y * u.y + self.z * u.z
        if proj == 0.0 and self.w == 0.0:
            return 0.0
        return 2.0 * math.atan2(proj, self.w)

    def to_axis_angle(self) -> tuple[Vec3, float]:
        """Axis and angle in [0, 2*pi); identity maps to (+x, 0)."""
        s = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if s < 1e-12:
            return Vec3(1.0, 0.0, 0.0), 0.0
        return Vec3(self.x / s, self.y / s, self.z / s), 2.0 * math.atan2(s, self.w)


SCALE_MIN = 1e-6
SCALE_MAX = 1e6


@dataclass(frozen=True, slots=True)
class Pose:
    """Local-to-world transform: scale, then rotate, then translate."""

    translation: Vec3
    rotation: Rotation
    scale: Vec3

    def __post_init__(self) -> None:
        for c in self.scale.as_tuple():
            if not (SCALE_MIN <= c <= SCALE_MAX):
                raise ValueError(f"scale component {c} outside [{SCALE_MIN}, {SCALE_MAX}]")

    @staticmethod
    def identity() -> "Pose":
        return Pose(Vec3.zero(), Rotation.identity(), Vec3(1.0, 1.0, 1.0))

    def world_point(self, local: Vec3) -> Vec3:
        return self.rotation.rotate(local.hadamard(self.scale)) + self.translation

    def local_point(self, world: Vec3) -> Vec3:
        p = self.rotation.inverse().rotate(world - self.translation)
        return Vec3(p.x / self.scale.x, p.y / self.scale.y, p.z / self.scale.z)


@dataclass(frozen=True, slots=True)
class Aabb:
    min: Vec3
    max: Vec3

    def __post_init__(self) -> None:
        if self.min.x > self.max.x or self.min.y > self.max.y or self.min.z > self.max.z:
            raise ValueError("Aabb min must be componentwise <= max")

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(
            Vec3(min(self.min.x, other.min.x), min(self.min.y, other.min.y), min(self.min.z, other.min.z)),
            Vec3(max(self.max.x, other.max.x), max(self.max.y, other.max.y), max(self.max.z, other.max.z)),
        )

    def intersection(self, other: "Aabb") -> "Aabb | None":
        """Overlap box, or None when the boxes are disjoint."""
        lo = Vec3(max(self.min.x, other.min.x), max(self.min.y, other.min.y), max(self.min.z, other.min.z))
        hi = Vec3(min(self.max.x, other.max.x), min(self.max.y, other.max.y), min(self.max.z, other.max.z))
        if lo.x > hi.x or lo.y > hi.y or lo.z > hi.z:
            return None
        return Aabb(lo, hi)

    def center(self) -> Vec3:
        return Vec3(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
            0.5 * (self.min.z + self.max.z),
        )

    def extents(self) -> Vec3:
        return self.max - self.min

    def diagonal(self) -> float:
        return self.extents().norm()

    def volume(self) -> float:
        e = self.extents()
        return e.x * e.y * e.z

    def contains(self, p: Vec3) -> bool:
        return (
            self.min.x <= p.x <= self.max.x
            and self.min.y <= p.y <= self.max.y
            and self.min.z <= p.z <= self.max.z
        )

"""Population codes for headings, part vectors, displacements, and grid phases.

Four small codes cooperate. A heading keeps a continuous angle next to its
discrete bin so repeated frame transforms never compound quantization error.
Part vectors (agent-to-part offsets) are binned on a log-polar grid: coarse
but unambiguous out to ``r_max``. Displacements between parts use the same
log-polar scheme at lower resolution, with a distinguished ZERO bin for
near-still differences. The grid code is a single-period hexagonal torus:
precise within one period and ambiguous across periods, which is exactly the
complement of the coarse codes above.

All encode/decode functions here are pure; code books are immutable once
constructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OutOfRange

TWO_PI = 2.0 * math.pi
SQRT3 = math.sqrt(3.0)

# Cartesian vector in meters. Egocentric and allocentric vectors share the
# representation; the frame is tracked by usage, not by type.
Vec = tuple[float, float]


def vec_add(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1])


def vec_sub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def vec_neg(a: Vec) -> Vec:
    return (-a[0], -a[1])


def vec_norm(a: Vec) -> float:
    return math.hypot(a[0], a[1])


def vec_dist(a: Vec, b: Vec) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def rotate(v: Vec, angle: float) -> Vec:
    """Rotate ``v`` counterclockwise by ``angle`` radians."""
    c, s = math.cos(angle), math.sin(angle)
    return (v[0] * c - v[1] * s, v[0] * s + v[1] * c)


def wrap_angle(theta: float) -> float:
    """Reduce an angle to [0, 2*pi). The 2*pi boundary wraps to 0."""
    a = math.fmod(theta, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI:  # fmod can round back up to the modulus
        a = 0.0
    return a


@dataclass(frozen=True)
class Heading:
    """A facing direction: continuous angle plus its discrete bin."""

    angle: float
    bin: int


class HeadingCode:
    """Builds headings whose bin is always consistent with the angle."""

    def __init__(self, n_bins: int = 72):
        if n_bins < 1:
            raise ValueError("heading code needs at least one bin")
        self.n_bins = n_bins
        self._width = TWO_PI / n_bins

    def make(self, angle: float) -> Heading:
        a = wrap_angle(angle)
        return Heading(a, min(int(a / self._width), self.n_bins - 1))

    def turned(self, heading: Heading, dtheta: float) -> Heading:
        return self.make(heading.angle + dtheta)


def ego_to_allo(v: Vec, heading: Heading) -> Vec:
    """Egocentric to allocentric: rotate counterclockwise by the heading."""
    return rotate(v, heading.angle)


def allo_to_ego(v: Vec, heading: Heading) -> Vec:
    """Allocentric to egocentric: inverse of :func:`ego_to_allo`."""
    return rotate(v, -heading.angle)


class _LogPolar:
    """Sector-by-annulus binning with antipodally symmetric direction bins.

    Direction bins are half-open sectors of width 2*pi/n_dir starting at
    angle 0. Vectors in the lower half plane are binned by negating them and
    offsetting the result by n_dir/2, so reversing a vector offsets its bin
    by exactly half a turn and decode(negated bin) is the exact negation of
    decode(bin). Ring k spans [r0*growth**k, r0*growth**(k+1)); radii below
    the innermost edge fall into ring 0.
    """

    def __init__(self, n_dir: int, n_ring: int, r0: float, growth: float):
        if n_dir % 2 != 0:
            raise ValueError("direction bin count must be even")
        if n_ring < 1 or r0 <= 0.0 or growth <= 1.0:
            raise ValueError("need n_ring >= 1, r0 > 0, growth > 1")
        self.n_dir = n_dir
        self.n_ring = n_ring
        self.r0 = r0
        self.growth = growth
        self.sector = TWO_PI / n_dir
        self.edges = tuple(r0 * growth**k for k in range(n_ring + 1))
        self._log_g = math.log(growth)

    @property
    def r_max(self) -> float:
        return self.edges[-1]

    def dir_bin(self, v: Vec) -> int:
        x, y = v
        if y < 0.0 or (y == 0.0 and x < 0.0):
            return (self._upper_bin(-x, -y) + self.n_dir // 2) % self.n_dir
        return self._upper_bin(x, y)

    def _upper_bin(self, x: float, y: float) -> int:
        theta = math.atan2(y, x)  # [0, pi] for the upper half plane
        return min(int(theta / self.sector), self.n_dir - 1)

    def ring_of(self, radius: float) -> int:
        if radius <= self.edges[0]:
            return 0
        k = int(math.log(radius / self.r0) / self._log_g)
        # log() can land one bin off right at an edge; nudge into the
        # half-open interval [edges[k], edges[k+1]).
        if k >= self.n_ring:
            k = self.n_ring - 1
        elif k + 1 <= self.n_ring and radius >= self.edges[k + 1]:
            k += 1
        elif radius < self.edges[k]:
            k -= 1
        return max(0, min(k, self.n_ring - 1))

    def unit(self, dir_bin: int) -> Vec:
        # Lower-half units are exact negations of their antipodes by
        # construction, not by trigonometry.
        half = self.n_dir // 2
        if dir_bin >= half:
            ux, uy = self.unit(dir_bin - half)
            return (-ux, -uy)
        theta = (dir_bin + 0.5) * self.sector
        return (math.cos(theta), math.sin(theta))

    def center_radius(self, ring: int) -> float:
        return math.sqrt(self.edges[ring] * self.edges[ring + 1])

    def center(self, dir_bin: int, ring: int) -> Vec:
        r = self.center_radius(ring)
        ux, uy = self.unit(dir_bin)
        return (r * ux, r * uy)

    def half_width(self, ring: int) -> float:
        """Half the radial extent plus the chord of half the angular extent
        at the decoded radius. Upper bound on center-to-member distance."""
        radial = (self.edges[ring + 1] - self.edges[ring]) / 2.0
        chord = 2.0 * self.center_radius(ring) * math.sin(self.sector / 4.0)
        return radial + chord


@dataclass(frozen=True)
class OvcCell:
    """One coarse part-vector cell: direction sector and distance ring."""

    dir_bin: int
    ring: int


class OvcCodebook:
    """Log-polar code for agent-to-part vectors.

    Ring widths grow geometrically, so resolution is fine near the agent and
    coarse at the far edge of the sensing range.
    """

    def __init__(self, n_dir: int = 24, n_ring: int = 10, r0: float = 0.25,
                 growth: float = 1.4):
        self._grid = _LogPolar(n_dir, n_ring, r0, growth)

    @property
    def n_dir(self) -> int:
        return self._grid.n_dir

    @property
    def n_ring(self) -> int:
        return self._grid.n_ring

    @property
    def r_max(self) -> float:
        return self._grid.r_max

    @property
    def ring_edges(self) -> tuple[float, ...]:
        return self._grid.edges

    def encode(self, v: Vec) -> OvcCell:
        r = vec_norm(v)
        if r == 0.0:
            raise OutOfRange("zero vector has no direction")
        if r > self.r_max * (1.0 + 1e-12):
            raise OutOfRange(f"|v|={r:.6g} exceeds r_max={self.r_max:.6g}")
        return OvcCell(self._grid.dir_bin(v), self._grid.ring_of(r))

    def decode(self, cell: OvcCell) -> Vec:
        """Center of the cell: sector midpoint angle, geometric-mean radius."""
        return self._grid.center(cell.dir_bin, cell.ring)

    def half_width(self, ring: int) -> float:
        return self._grid.half_width(ring)

    def cells(self):
        for ring in range(self.n_ring):
            for dir_bin in range(self.n_dir):
                yield OvcCell(dir_bin, ring)


@dataclass(frozen=True)
class DispBin:
    """A coarse displacement bin. ``ring < 0`` marks the ZERO bin."""

    dir_bin: int
    ring: int

    @property
    def is_zero(self) -> bool:
        return self.ring < 0


ZERO_DISP = DispBin(-1, -1)


class DispCodebook:
    """Log-polar code for part-to-part displacements.

    Differences shorter than ``still_threshold`` collapse into the ZERO bin.
    Differences beyond the outermost edge clamp into the outermost ring, so
    encoding never fails.
    """

    def __init__(self, n_dir: int = 12, n_ring: int = 6, d0: float = 0.5,
                 growth: float = 1.6, still_threshold: float = 0.05):
        if still_threshold <= 0.0 or still_threshold >= d0:
            raise ValueError("still threshold must sit inside (0, d0)")
        self._grid = _LogPolar(n_dir, n_ring, d0, growth)
        self.still_threshold = still_threshold

    @property
    def n_dir(self) -> int:
        return self._grid.n_dir

    @property
    def n_ring(self) -> int:
        return self._grid.n_ring

    @property
    def d_max(self) -> float:
        return self._grid.r_max

    @property
    def ring_edges(self) -> tuple[float, ...]:
        return self._grid.edges

    def encode(self, from_vec: Vec, to_vec: Vec) -> DispBin:
        d = vec_sub(to_vec, from_vec)
        r = vec_norm(d)
        if r < self.still_threshold:
            return ZERO_DISP
        return DispBin(self._grid.dir_bin(d), self._grid.ring_of(r))

    def decode(self, b: DispBin) -> Vec:
        if b.is_zero:
            return (0.0, 0.0)
        return self._grid.center(b.dir_bin, b.ring)

    def negate(self, b: DispBin) -> DispBin:
        if b.is_zero:
            return ZERO_DISP
        return DispBin((b.dir_bin + self.n_dir // 2) % self.n_dir, b.ring)

    def half_width(self, ring: int) -> float:
        return self._grid.half_width(ring)

    def bins(self):
        yield ZERO_DISP
        for ring in range(self.n_ring):
            for dir_bin in range(self.n_dir):
                yield DispBin(dir_bin, ring)


@dataclass(frozen=True)
class GridPhase:
    """Fractional coordinates on the rhombic unit cell, each in [0, 1)."""

    u: float
    v: float


@dataclass(frozen=True)
class GridCell:
    """Quantized phase: floor(m * (u, v))."""

    iu: int
    iv: int


class GridModule:
    """Single-module hexagonal grid code.

    Basis vectors b1 = (period, 0) and b2 = (period/2, period*sqrt(3)/2) span
    the lattice. A world point maps to the fractional coordinates of its
    offset in that basis, taken mod 1. Phases are exact up to float rounding;
    the ambiguity is that all lattice translates of a point share a phase.
    """

    def __init__(self, period: float = 2.0, m: int = 20):
        if period <= 0.0 or m < 1:
            raise ValueError("need period > 0 and m >= 1")
        self.period = period
        self.m = m
        self.b1: Vec = (period, 0.0)
        self.b2: Vec = (period / 2.0, period * SQRT3 / 2.0)
        # covering radius of the hex lattice: farthest any point can be
        # from its nearest lattice node
        self.covering_radius = period / SQRT3

    def fractional(self, d: Vec) -> tuple[float, float]:
        """Lattice-basis coordinates of a displacement (unreduced)."""
        x, y = d
        u = (x - y / SQRT3) / self.period
        v = (2.0 * y) / (self.period * SQRT3)
        return u, v

    def lattice_point(self, i: int, j: int) -> Vec:
        return (i * self.b1[0] + j * self.b2[0], i * self.b1[1] + j * self.b2[1])

    def point(self, phase: GridPhase) -> Vec:
        """Canonical Cartesian representative u*b1 + v*b2."""
        return (phase.u * self.b1[0] + phase.v * self.b2[0],
                phase.u * self.b1[1] + phase.v * self.b2[1])

    @staticmethod
    def _mod1(x: float) -> float:
        f = x % 1.0
        return 0.0 if f >= 1.0 else f

    def to_phase(self, p: Vec) -> GridPhase:
        u, v = self.fractional(p)
        return GridPhase(self._mod1(u), self._mod1(v))

    def advance(self, phase: GridPhase, d: Vec) -> GridPhase:
        du, dv = self.fractional(d)
        return GridPhase(self._mod1(phase.u + du), self._mod1(phase.v + dv))

    def diff(self, a: GridPhase, b: GridPhase) -> Vec:
        """Shortest Cartesian displacement d with advance(a, d) == b.

        The fractional difference lies in [0, 1)^2, so the minimal
        representative is reached by one of the 3x3 surrounding translates.
        Ties break toward the lexicographically smallest translate index.
        """
        du = self._mod1(b.u - a.u)
        dv = self._mod1(b.v - a.v)
        best: tuple[float, int, int] | None = None
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                x = (du + i) * self.b1[0] + (dv + j) * self.b2[0]
                y = (du + i) * self.b1[1] + (dv + j) * self.b2[1]
                key = (x * x + y * y, i, j)
                if best is None or key < best:
                    best = key
        _, i, j = best
        x = (du + i) * self.b1[0] + (dv + j) * self.b2[0]
        y = (du + i) * self.b1[1] + (dv + j) * self.b2[1]
        return (x, y)

    def torus_distance(self, a: GridPhase, b: GridPhase) -> float:
        return vec_norm(self.diff(a, b))

    def quantize(self, phase: GridPhase) -> GridCell:
        return GridCell(min(int(phase.u * self.m), self.m - 1),
                        min(int(phase.v * self.m), self.m - 1))

    def cell_center(self, cell: GridCell) -> GridPhase:
        return GridPhase((cell.iu + 0.5) / self.m, (cell.iv + 0.5) / self.m)

    def translates_within(self, base: Vec, radius: float) -> list[Vec]:
        """All lattice translates of ``base`` with norm <= radius.

        Deterministic order (translate indices ascending). ``base`` itself
        appears when in range, as the (0, 0) translate.
        """
        # |i*b1 + j*b2| = period * sqrt(i^2 + i*j + j^2) >= period * max(|i|,|j|) * sqrt(3)/2
        reach = radius + vec_norm(base)
        k = int(reach * 2.0 / (self.period * SQRT3)) + 1
        limit = radius * (1.0 + 1e-12)
        out: list[Vec] = []
        for i in range(-k, k + 1):
            for j in range(-k, k + 1):
                x = base[0] + i * self.b1[0] + j * self.b2[0]
                y = base[1] + i * self.b1[1] + j * self.b2[1]
                if math.hypot(x, y) <= limit:
                    out.append((x, y))
        return out

    def nearest_translate(self, base: Vec, target: Vec) -> Vec:
        """The lattice translate of ``base`` closest to ``target``."""
        ru, rv = self.fractional(vec_sub(target, base))
        i0, j0 = round(ru), round(rv)
        best: tuple[float, int, int] | None = None
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                i, j = i0 + di, j0 + dj
                x = base[0] + i * self.b1[0] + j * self.b2[0]
                y = base[1] + i * self.b1[1] + j * self.b2[1]
                key = ((x - target[0]) ** 2 + (y - target[1]) ** 2, i, j)
                if best is None or key < best:
                    best = key
        _, i, j = best
        return (base[0] + i * self.b1[0] + j * self.b2[0],
                base[1] + i * self.b1[1] + j * self.b2[1])

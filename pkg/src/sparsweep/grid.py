"""Uniform collocation grid, perturbation profiles and incident plane waves.

Fields are stored as complex vectors of length ``N = nx * nz`` in z-major
order: node ``(i, j)`` (1-based) sits at position ``(j - 1) * nx + (i - 1)``,
so ``u.reshape(nz, nx)[j - 1]`` is the constant-z row ``j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_MIN_PPW = 6.0
DEFAULT_MARGIN = 0.1


class GridError(ValueError):
    pass


class MediumError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    nx: int
    nz: int
    h: float
    omega: float
    origin: tuple[float, float] = (0.0, 0.0)

    @property
    def N(self) -> int:
        return self.nx * self.nz

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(nz, nx)`` of a reshaped field."""
        return (self.nz, self.nx)

    @property
    def ppw(self) -> float:
        return 2.0 * math.pi / (self.omega * self.h)

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """Bounding box ``(x0, x1, z0, z1)`` of Omega (half a cell beyond the nodes)."""
        x0, z0 = self.origin
        return (x0 + 0.5 * self.h, x0 + (self.nx + 0.5) * self.h,
                z0 + 0.5 * self.h, z0 + (self.nz + 0.5) * self.h)

    def node(self, i: int, j: int) -> tuple[float, float]:
        return (self.origin[0] + self.h * i, self.origin[1] + self.h * j)

    def index(self, i: int, j: int) -> int:
        if not (1 <= i <= self.nx and 1 <= j <= self.nz):
            raise IndexError(f"node ({i}, {j}) outside {self.nx}x{self.nz} grid")
        return (j - 1) * self.nx + (i - 1)

    def ij(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.N:
            raise IndexError(f"index {k} outside grid of {self.N} nodes")
        j, i = divmod(k, self.nx)
        return (i + 1, j + 1)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Z)`` arrays of shape ``(nz, nx)``."""
        x = self.origin[0] + self.h * np.arange(1, self.nx + 1)
        z = self.origin[1] + self.h * np.arange(1, self.nz + 1)
        return np.meshgrid(x, z)

    def transposed(self) -> "Grid":
        """The same grid with the roles of x and z exchanged."""
        return Grid(self.nz, self.nx, self.h, self.omega, (self.origin[1], self.origin[0]))


def make_grid(nx: int, nz: int, h: float, omega: float,
              origin: Sequence[float] = (0.0, 0.0),
              min_ppw: float = DEFAULT_MIN_PPW) -> Grid:
    if int(nx) != nx or int(nz) != nz or nx < 4 or nz < 4:
        raise GridError(f"grid counts must be integers >= 4, got nx={nx}, nz={nz}")
    if not (h > 0 and math.isfinite(h)):
        raise GridError(f"step size must be positive, got h={h}")
    if not (omega > 0 and math.isfinite(omega)):
        raise GridError(f"frequency must be positive, got omega={omega}")
    ppw = 2.0 * math.pi / (omega * h)
    if ppw < min_ppw * (1 - 1e-12):
        raise GridError(
            f"{ppw:.3f} points per wavelength (omega*h = {omega * h:.3g}) "
            f"is below the minimum of {min_ppw}")
    return Grid(int(nx), int(nz), float(h), float(omega), (float(origin[0]), float(origin[1])))


def unit_square_grid(n: int, omega: float | None = None, **kw) -> Grid:
    """``n x n`` grid on the unit square, ``h = 1/n``; ``omega`` defaults to ``n``."""
    return make_grid(n, n, 1.0 / n, float(n if omega is None else omega), **kw)


@dataclass(frozen=True)
class Medium:
    """Perturbation ``m`` with ``1/c^2 = 1 + m``, sampled on a grid."""
    grid: Grid
    values: np.ndarray
    support_box: tuple[float, float, float, float]
    descriptor: dict = field(default_factory=dict)

    @property
    def array(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def transposed(self) -> "Medium":
        x0, x1, z0, z1 = self.support_box
        vals = np.ascontiguousarray(self.array.T).ravel()
        return Medium(self.grid.transposed(), vals, (z0, z1, x0, x1), self.descriptor)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)


def support_box(grid: Grid, margin: float = DEFAULT_MARGIN) -> tuple[float, float, float, float]:
    x0, x1, z0, z1 = grid.extent
    mx, mz = margin * (x1 - x0), margin * (z1 - z0)
    return (x0 + mx, x1 - mx, z0 + mz, z1 - mz)


def _bump(rho: np.ndarray) -> np.ndarray:
    """C-infinity bump, 1 at rho = 0 and 0 for rho >= 1."""
    out = np.zeros_like(rho)
    inside = rho < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - rho[inside] ** 2))
    return out


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C2 transition from 1 (t <= 0) to 0 (t >= 1)."""
    t = np.clip(t, 0.0, 1.0)
    return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def smooth_bump(X, Z, amplitude, center, radius):
    rho = np.hypot(X - center[0], Z - center[1]) / radius
    return amplitude * _bump(rho)


def plasma_ring(X, Z, inner_amplitude, ring_radius, center, plateau=0.6):
    """Flat-top profile: ``inner_amplitude`` inside ``plateau * ring_radius``,
    a C2 ring-shaped transition, zero beyond ``ring_radius``."""
    rho = np.hypot(X - center[0], Z - center[1]) / ring_radius
    return inner_amplitude * _smoothstep((rho - plateau) / (1.0 - plateau))


def _place_bumps(count, box, width, rng, max_tries=200_000):
    x0, x1, z0, z1 = box
    pad = 4.0 * width
    if x1 - x0 <= 2 * pad or z1 - z0 <= 2 * pad:
        raise MediumError("support box too small for the requested bump width")
    min_dist = 2.0 * width
    centers: list[tuple[float, float]] = []
    tries = 0
    while len(centers) < count:
        tries += 1
        if tries > max_tries:
            raise MediumError(f"could only place {len(centers)} of {count} bumps")
        c = (rng.uniform(x0 + pad, x1 - pad), rng.uniform(z0 + pad, z1 - pad))
        if all(math.hypot(c[0] - p[0], c[1] - p[1]) >= min_dist for p in centers):
            centers.append(c)
    return centers


def gaussian_bumps(X, Z, count, amplitude, seed, min_width, box):
    rng = np.random.default_rng(seed)
    centers = _place_bumps(count, box, min_width, rng)
    widths = min_width * (1.0 + 0.5 * rng.random(count))
    m = np.zeros_like(X)
    for (cx, cz), w in zip(centers, widths):
        r = np.hypot(X - cx, Z - cz)
        # truncated at 4 widths with a smooth roll-off so the support is compact
        m += amplitude * np.exp(-0.5 * (r / w) ** 2) * _smoothstep((r - 3.0 * w) / w)
    return m


PROFILES = ("smooth_bump", "gaussian_bumps", "plasma_ring", "zero")


def make_medium(spec: dict, grid: Grid, margin: float = DEFAULT_MARGIN) -> Medium:
    """Build a medium from a profile descriptor.

    ``spec`` is a mapping with key ``kind`` in :data:`PROFILES`; positions and
    radii are absolute coordinates, defaulting to the centre of the support box.
    """
    spec = dict(spec)
    kind = spec.pop("kind", None)
    box = support_box(grid, margin)
    X, Z = grid.coordinates()
    center = tuple(spec.pop("center", (0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3]))))
    half = 0.5 * min(box[1] - box[0], box[3] - box[2])
    if kind == "zero":
        m = np.zeros_like(X)
        reach = 0.0
    elif kind == "smooth_bump":
        amp = float(spec.pop("amplitude"))
        if "sign" in spec:
            amp = math.copysign(abs(amp), float(spec.pop("sign")))
        radius = float(spec.pop("radius", 0.9 * half))
        m = smooth_bump(X, Z, amp, center, radius)
        reach = radius
        extreme = amp
    elif kind == "plasma_ring":
        amp = float(spec.pop("inner_amplitude"))
        radius = float(spec.pop("ring_radius", 0.9 * half))
        m = plasma_ring(X, Z, amp, radius, center, float(spec.pop("plateau", 0.6)))
        reach = radius
        extreme = amp
    elif kind == "gaussian_bumps":
        amp = float(spec.pop("amplitude"))
        m = gaussian_bumps(X, Z, int(spec.pop("count")), amp, spec.pop("seed", 0),
                           float(spec.pop("min_width")), box)
        reach = None
        extreme = amp
    else:
        raise MediumError(f"unknown profile kind {kind!r}; expected one of {PROFILES}")
    if spec:
        raise MediumError(f"unexpected profile parameters for {kind}: {sorted(spec)}")
    if reach is not None and reach > 0:
        if (center[0] - reach < box[0] - 1e-12 or center[0] + reach > box[1] + 1e-12
                or center[1] - reach < box[2] - 1e-12 or center[1] + reach > box[3] + 1e-12):
            raise MediumError(
                f"{kind} support (radius {reach:g} at {center}) leaves the support box {box}")
    if kind != "zero" and 1.0 + min(extreme, 0.0) * (1.0 + 1e-9) <= 0.0:
        raise MediumError(f"amplitude {extreme} makes 1 + m non-positive")
    if kind != "zero" and np.min(1.0 + m) <= 0.0:
        raise MediumError("profile makes 1 + m non-positive somewhere on the grid")
    outside = (X < box[0]) | (X > box[1]) | (Z < box[2]) | (Z > box[3])
    m[outside] = 0.0
    desc = {"kind": kind}
    return Medium(grid, m.astype(complex).ravel(), box, desc)


def incident_plane_wave(grid: Grid, angle: float) -> np.ndarray:
    """``exp(i omega d . x)`` with direction ``d = (cos angle, sin angle)``."""
    X, Z = grid.coordinates()
    return np.exp(1j * grid.omega * (math.cos(angle) * X + math.sin(angle) * Z)).ravel()


def incident_angles(count: int, seed: int | None = None, jitter: float = 0.0) -> np.ndarray:
    """``count`` angles uniform on [0, 2 pi), optionally jittered by a seeded fraction of the spacing."""
    angles = 2.0 * np.pi * np.arange(count) / count
    if jitter and seed is not None:
        rng = np.random.default_rng(seed)
        angles = angles + jitter * (2.0 * np.pi / count) * (rng.random(count) - 0.5)
    return angles

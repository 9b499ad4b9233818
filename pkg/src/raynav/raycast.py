"""Halton direction sets, truncated ray distance queries, and sensor noise.

Directions come from radical-inverse Halton values in bases 2 and 3 mapped
through the area-uniform sphere parameterization, so the i'th ray direction
is the same on every call and every timestep. Distances are exact analytic
first hits against the world's primitives (or a DDA march for imported
voxel worlds), truncated at max range, with the closed-world boundary
acting as an obstacle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import UsageError
from .rng import SplitMix64
from .worldgen import World


def halton(i: int, base: int) -> float:
    """Radical inverse of i in the given base; i >= 1."""
    if i < 1:
        raise UsageError("halton index starts at 1")
    f = 1.0
    value = 0.0
    while i > 0:
        f /= base
        value += f * (i % base)
        i //= base
    return value


@dataclass(frozen=True)
class DirectionSet:
    """N fixed unit directions with their elevation/azimuth parameters."""

    n: int
    directions: np.ndarray  # (N, 3)
    elevations: np.ndarray
    azimuths: np.ndarray


_direction_cache: dict = {}


def halton_directions(n: int) -> DirectionSet:
    """Quasi-uniform sphere directions; Halton indices 1..n (index 0 is a pole)."""
    if n < 1:
        raise UsageError("need at least one ray")
    if n not in _direction_cache:
        h2 = np.array([halton(i, 2) for i in range(1, n + 1)])
        h3 = np.array([halton(i, 3) for i in range(1, n + 1)])
        phi = np.arccos(1.0 - 2.0 * h2)
        theta = 2.0 * np.pi * h3
        dirs = np.stack([np.sin(phi) * np.cos(theta),
                         np.sin(phi) * np.sin(theta),
                         np.cos(phi)], axis=1)
        dirs.setflags(write=False)
        phi.setflags(write=False)
        theta.setflags(write=False)
        _direction_cache[n] = DirectionSet(n, dirs, phi, theta)
    return _direction_cache[n]


@dataclass
class RayBundle:
    """Truncated distances along a DirectionSet from one origin."""

    origin: np.ndarray
    set: DirectionSet
    distances: np.ndarray
    max_range: float
    sigma: float = 0.0
    step: int = 0

    def min_distance(self) -> float:
        return float(self.distances.min()) if self.distances.size else self.max_range

    def hits(self) -> np.ndarray:
        """Indices of rays that stopped short of max range."""
        return np.nonzero(self.distances < self.max_range)[0]


def ray_distance(world: World, x, r, max_range: float) -> float:
    """Exact first-hit distance along one ray; 0.0 if x starts inside a solid.

    Pure-python reference used for line-of-sight checks and as the oracle
    for the batched kernel.
    """
    x = np.asarray(x, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if abs(np.linalg.norm(r) - 1.0) > 1e-6:
        raise UsageError("ray direction must be unit length")
    if max_range <= 0:
        raise UsageError("max_range must be positive")
    if world.occupancy(x):
        return 0.0
    best = max_range
    # closed world: the boundary is a hit
    for ax in range(3):
        if r[ax] > 1e-15:
            t = (world.bounds_max[ax] - x[ax]) / r[ax]
        elif r[ax] < -1e-15:
            t = (world.bounds_min[ax] - x[ax]) / r[ax]
        else:
            continue
        best = min(best, t)
    if world.voxel_grid is not None:
        d = _kernels.cast_rays_voxel(x, r.reshape(1, 3), world.voxel_grid,
                                     world.bounds_min, world.voxel_cell, max_range)
        return float(min(best, d[0]))
    for prim in world.primitives:
        if prim.kind == "sphere":
            oc = x - prim.center
            b = float(np.dot(oc, r))
            if b >= 0.0:
                continue
            disc = b * b - (float(np.dot(oc, oc)) - prim.extent[0] ** 2)
            if disc <= 0.0:
                continue
            t = -b - np.sqrt(disc)
            if 0.0 <= t < best:
                best = t
        else:
            h = prim.half_extents()
            lo = prim.center - h
            hi = prim.center + h
            tmin, tmax = -np.inf, np.inf
            ok = True
            for ax in range(3):
                if abs(r[ax]) > 1e-15:
                    t1 = (lo[ax] - x[ax]) / r[ax]
                    t2 = (hi[ax] - x[ax]) / r[ax]
                    if t1 > t2:
                        t1, t2 = t2, t1
                    tmin = max(tmin, t1)
                    tmax = min(tmax, t2)
                    if tmin > tmax:
                        ok = False
                        break
                elif not (lo[ax] <= x[ax] <= hi[ax]):
                    ok = False
                    break
            if ok and tmax >= 0.0 and 0.0 <= tmin < best:
                best = tmin
    return float(best)


def cast_bundle(world: World, x, dirset: DirectionSet, max_range: float,
                step: int = 0) -> RayBundle:
    """All-ray distances from x; pure function of (world, x, set, max_range)."""
    x = np.asarray(x, dtype=np.float64)
    if not world.in_bounds(x):
        raise UsageError(f"bundle origin {x} outside world bounds")
    if world.voxel_grid is not None:
        d = _kernels.cast_rays_voxel(x, dirset.directions, world.voxel_grid,
                                     world.bounds_min, world.voxel_cell, max_range)
    else:
        spheres, boxes = world.primitive_arrays()
        d = _kernels.cast_rays(x, dirset.directions, spheres, boxes,
                               world.bounds_min, world.bounds_max, max_range)
    return RayBundle(origin=x, set=dirset, distances=d, max_range=max_range,
                     step=step)


def apply_noise(bundle: RayBundle, sigma: float, rng: SplitMix64,
                floor: float = 0.01) -> RayBundle:
    """Multiplicative gaussian noise per ray: d * (1 + N(0, sigma^2)).

    Results are clamped to (floor, max_range] so the repulsor terms never
    see a zero or out-of-range distance.
    """
    if sigma < 0:
        raise UsageError("noise stddev must be non-negative")
    if sigma == 0.0:
        return bundle
    factors = 1.0 + sigma * rng.normal_array(bundle.distances.size)
    noisy = np.clip(bundle.distances * factors, floor, bundle.max_range)
    return RayBundle(origin=bundle.origin, set=bundle.set, distances=noisy,
                     max_range=bundle.max_range, sigma=sigma, step=bundle.step)

"""Procedural obstacle worlds and their occupancy/distance queries.

Two generated world classes: *sphere_box* (solid spheres and boxes) and
*plane* (thin axis-aligned wall slabs). Worlds are closed: every point
outside the bounding box counts as occupied. Generation draws from the
portable SplitMix64 stream in a fixed order, so a (seed, n) pair yields a
bit-identical primitive list on any platform.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import GenConfig
from .errors import FormatError, SamplingExhaustedError, UsageError
from .rng import SplitMix64
from .serial import FORMAT_VERSION, VOXEL_MAGIC, read_grid_header, write_grid_header

WORLD_SCHEMA_VERSION = 1


@dataclass
class Primitive:
    """One solid obstacle: sphere, box, or wall (a thin box).

    ``extent`` is kind-specific: sphere -> (radius,); box -> half extents
    (hx, hy, hz); wall -> (axis, half_thickness, half_u, half_v) where u, v
    are the two in-plane dimensions in ascending axis order.
    """

    kind: str
    center: np.ndarray
    extent: tuple

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)
        if self.kind == "sphere":
            if self.extent[0] <= 0:
                raise UsageError("sphere radius must be positive")
        elif self.kind == "box":
            if any(h <= 0 for h in self.extent):
                raise UsageError("box half extents must be positive")
        elif self.kind == "wall":
            axis, ht, hu, hv = self.extent
            if axis not in (0, 1, 2):
                raise UsageError("wall axis must be 0, 1, or 2")
            if ht <= 0 or hu <= 0 or hv <= 0:
                raise UsageError("wall extents must be positive")
        else:
            raise UsageError(f"unknown primitive kind {self.kind!r}")

    def half_extents(self) -> np.ndarray:
        """Axis-aligned half extents (spheres: the bounding cube)."""
        if self.kind == "sphere":
            return np.full(3, self.extent[0])
        if self.kind == "box":
            return np.asarray(self.extent, dtype=np.float64)
        axis, ht, hu, hv = self.extent
        h = np.empty(3)
        h[axis] = ht
        others = [a for a in range(3) if a != axis]
        h[others[0]] = hu
        h[others[1]] = hv
        return h

    def contains(self, p: np.ndarray) -> bool:
        if self.kind == "sphere":
            return float(np.dot(p - self.center, p - self.center)) <= self.extent[0] ** 2
        return bool(np.all(np.abs(p - self.center) <= self.half_extents()))

    def distance(self, p: np.ndarray) -> float:
        """Signed distance (negative inside)."""
        if self.kind == "sphere":
            return float(np.linalg.norm(p - self.center)) - self.extent[0]
        q = np.abs(p - self.center) - self.half_extents()
        outside = np.linalg.norm(np.maximum(q, 0.0))
        inside = min(float(q.max()), 0.0)
        return float(outside + inside)

    def to_json(self) -> dict:
        rec = {"kind": self.kind, "center": [float(c) for c in self.center]}
        if self.kind == "sphere":
            rec["radius"] = float(self.extent[0])
        elif self.kind == "box":
            rec["half_extents"] = [float(h) for h in self.extent]
        else:
            axis, ht, hu, hv = self.extent
            rec["axis"] = int(axis)
            rec["thickness"] = float(2 * ht)
            rec["in_plane_half_extents"] = [float(hu), float(hv)]
        return rec

    @staticmethod
    def from_json(rec: dict) -> "Primitive":
        try:
            kind = rec["kind"]
            center = rec["center"]
            if kind == "sphere":
                extent = (float(rec["radius"]),)
            elif kind == "box":
                extent = tuple(float(h) for h in rec["half_extents"])
            elif kind == "wall":
                hu, hv = rec["in_plane_half_extents"]
                extent = (int(rec["axis"]), float(rec["thickness"]) / 2.0,
                          float(hu), float(hv))
            else:
                raise FormatError(f"unknown primitive kind {kind!r}")
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"bad primitive record: {e!r}") from e
        return Primitive(kind=kind, center=np.asarray(center, dtype=np.float64),
                         extent=extent)


@dataclass
class World:
    """Immutable obstacle scene over an axis-aligned bounded volume."""

    bounds_min: np.ndarray
    bounds_max: np.ndarray
    primitives: list
    seed: int = 0
    kind: str = "sphere_box"
    voxel_grid: np.ndarray | None = None  # occupancy for imported worlds
    voxel_cell: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.bounds_min = np.asarray(self.bounds_min, dtype=np.float64)
        self.bounds_max = np.asarray(self.bounds_max, dtype=np.float64)
        if not np.all(self.bounds_max > self.bounds_min):
            raise UsageError("world bounds must have positive volume")

    # -- geometry queries ---------------------------------------------------

    def in_bounds(self, p) -> bool:
        p = np.asarray(p, dtype=np.float64)
        return bool(np.all(p >= self.bounds_min) and np.all(p <= self.bounds_max))

    def occupancy(self, p) -> bool:
        """True iff p is inside an obstacle or outside the (closed) bounds."""
        p = np.asarray(p, dtype=np.float64)
        if not self.in_bounds(p):
            return True
        if self.voxel_grid is not None:
            idx = np.floor((p - self.bounds_min) / self.voxel_cell).astype(int)
            idx = np.minimum(idx, np.array(self.voxel_grid.shape) - 1)
            return bool(self.voxel_grid[tuple(idx)])
        return any(prim.contains(p) for prim in self.primitives)

    def min_distance(self, p) -> float:
        """Distance to the nearest obstacle surface or bounds face (negative inside)."""
        p = np.asarray(p, dtype=np.float64)
        d = float(min(np.min(p - self.bounds_min), np.min(self.bounds_max - p)))
        if self.voxel_grid is not None:
            return min(d, self._voxel_distance(p))
        for prim in self.primitives:
            d = min(d, prim.distance(p))
        return d

    def _voxel_distance(self, p) -> float:
        from scipy import ndimage

        if "edt" not in self._cache:
            free = ~self.voxel_grid
            self._cache["edt"] = ndimage.distance_transform_edt(
                free, sampling=self.voxel_cell)
        idx = np.floor((p - self.bounds_min) / self.voxel_cell).astype(int)
        idx = np.minimum(np.maximum(idx, 0), np.array(self.voxel_grid.shape) - 1)
        return float(self._cache["edt"][tuple(idx)])

    # -- arrays for the batched ray kernels ---------------------------------

    def primitive_arrays(self):
        """(sphere (S,4) [center,r], box (B,6) [min,max]) for the cast kernels."""
        if "arrays" not in self._cache:
            spheres, boxes = [], []
            for prim in self.primitives:
                if prim.kind == "sphere":
                    spheres.append([*prim.center, prim.extent[0]])
                else:
                    h = prim.half_extents()
                    boxes.append([*(prim.center - h), *(prim.center + h)])
            self._cache["arrays"] = (
                np.asarray(spheres, dtype=np.float64).reshape(-1, 4),
                np.asarray(boxes, dtype=np.float64).reshape(-1, 6),
            )
        return self._cache["arrays"]

    def occupancy_grid(self, cell_size: float) -> np.ndarray:
        """Occupancy sampled at cell centers; cached per resolution."""
        key = ("grid", round(cell_size, 9))
        if key not in self._cache:
            dims = np.ceil((self.bounds_max - self.bounds_min) / cell_size - 1e-9).astype(int)
            if self.voxel_grid is not None and abs(cell_size - self.voxel_cell) < 1e-12:
                self._cache[key] = self.voxel_grid.copy()
                return self._cache[key]
            axes = [self.bounds_min[k] + (np.arange(dims[k]) + 0.5) * cell_size
                    for k in range(3)]
            occ = np.zeros(tuple(dims), dtype=bool)
            if self.voxel_grid is not None:
                xs, ys, zs = np.meshgrid(*axes, indexing="ij")
                pts = np.stack([xs, ys, zs], axis=-1)
                idx = np.floor((pts - self.bounds_min) / self.voxel_cell).astype(int)
                for k in range(3):
                    idx[..., k] = np.clip(idx[..., k], 0, self.voxel_grid.shape[k] - 1)
                occ = self.voxel_grid[idx[..., 0], idx[..., 1], idx[..., 2]]
            else:
                for prim in self.primitives:
                    h = prim.half_extents()
                    lo = np.maximum(
                        np.floor((prim.center - h - self.bounds_min) / cell_size).astype(int), 0)
                    hi = np.minimum(
                        np.ceil((prim.center + h - self.bounds_min) / cell_size).astype(int),
                        dims)
                    if np.any(hi <= lo):
                        continue
                    sub = [axes[k][lo[k]:hi[k]] for k in range(3)]
                    xs, ys, zs = np.meshgrid(*sub, indexing="ij")
                    if prim.kind == "sphere":
                        mask = ((xs - prim.center[0]) ** 2 + (ys - prim.center[1]) ** 2
                                + (zs - prim.center[2]) ** 2) <= prim.extent[0] ** 2
                    else:
                        mask = ((np.abs(xs - prim.center[0]) <= h[0])
                                & (np.abs(ys - prim.center[1]) <= h[1])
                                & (np.abs(zs - prim.center[2]) <= h[2]))
                    region = occ[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
                    region |= mask
            self._cache[key] = occ
        return self._cache[key]


# -- generation -------------------------------------------------------------


def gen_sphere_box_world(seed: int, n_obstacles: int, gen: GenConfig | None = None) -> World:
    """Random mix of solid spheres and boxes; deterministic per seed."""
    gen = gen or GenConfig()
    if n_obstacles < 0:
        raise UsageError("n_obstacles must be non-negative")
    if n_obstacles > gen.sphere_box_cap:
        warnings.warn(f"n_obstacles={n_obstacles} exceeds the soft cap "
                      f"{gen.sphere_box_cap}", stacklevel=2)
    rng = SplitMix64(seed)
    lo = np.asarray(gen.bounds_min)
    hi = np.asarray(gen.bounds_max)
    prims = []
    for _ in range(n_obstacles):
        is_sphere = rng.uniform() < 0.5
        center = np.array([rng.uniform(lo[k], hi[k]) for k in range(3)])
        if is_sphere:
            prims.append(Primitive("sphere", center,
                                   (rng.uniform(*gen.sphere_radius),)))
        else:
            half = tuple(rng.uniform(*gen.box_half_extent) for _ in range(3))
            prims.append(Primitive("box", center, half))
    return World(lo, hi, prims, seed=seed, kind="sphere_box")


def gen_plane_world(seed: int, n_obstacles: int, gen: GenConfig | None = None) -> World:
    """Thin axis-aligned wall slabs with random in-plane extents."""
    gen = gen or GenConfig()
    if n_obstacles < 0:
        raise UsageError("n_obstacles must be non-negative")
    if n_obstacles > gen.plane_cap:
        warnings.warn(f"n_obstacles={n_obstacles} exceeds the soft cap "
                      f"{gen.plane_cap}", stacklevel=2)
    rng = SplitMix64(seed)
    lo = np.asarray(gen.bounds_min)
    hi = np.asarray(gen.bounds_max)
    prims = []
    for _ in range(n_obstacles):
        axis = min(int(rng.uniform() * 3), 2)
        center = np.array([rng.uniform(lo[k], hi[k]) for k in range(3)])
        hu = rng.uniform(*gen.wall_extent) / 2.0
        hv = rng.uniform(*gen.wall_extent) / 2.0
        prims.append(Primitive("wall", center,
                               (axis, gen.wall_thickness / 2.0, hu, hv)))
    return World(lo, hi, prims, seed=seed, kind="plane")


def segment_blocked(world: World, a, b) -> bool:
    """True iff the open segment a->b intersects an obstacle."""
    from .raycast import ray_distance

    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    length = float(np.linalg.norm(b - a))
    if length < 1e-12:
        return False
    d = ray_distance(world, a, (b - a) / length, length)
    return d < length - 1e-9


def sample_start_goal(world: World, rng: SplitMix64, min_separation: float,
                      require_no_los: bool, gen: GenConfig | None = None):
    """Two free points with clearance, separation, and optional occlusion.

    Raises SamplingExhaustedError once the attempt budget runs out (dense
    world, or an unsatisfiable constraint such as no-LOS in an empty world).
    """
    gen = gen or GenConfig()
    diam = float(np.linalg.norm(world.bounds_max - world.bounds_min))
    if min_separation >= diam:
        raise UsageError("min_separation must be below the bounds diameter")

    def sample_free():
        p = np.array([rng.uniform(world.bounds_min[k] + gen.clearance,
                                  world.bounds_max[k] - gen.clearance)
                      for k in range(3)])
        return p if world.min_distance(p) > gen.clearance else None

    for _ in range(gen.sample_attempts):
        start = sample_free()
        goal = sample_free()
        if start is None or goal is None:
            continue
        if np.linalg.norm(goal - start) < min_separation:
            continue
        if require_no_los and not segment_blocked(world, start, goal):
            continue
        return start, goal
    raise SamplingExhaustedError(
        f"no valid start/goal pair in {gen.sample_attempts} attempts "
        f"(min_separation={min_separation}, require_no_los={require_no_los})")


# -- serialization ----------------------------------------------------------


def export_world(world: World, path, meta: dict | None = None):
    if world.voxel_grid is not None:
        export_voxel(world, path)
        return
    rec = {
        "version": WORLD_SCHEMA_VERSION,
        "kind": world.kind,
        "seed": int(world.seed),
        "bounds": {"min": [float(v) for v in world.bounds_min],
                   "max": [float(v) for v in world.bounds_max]},
        "primitives": [p.to_json() for p in world.primitives],
    }
    if meta:
        rec["meta"] = meta
    with open(path, "w") as fh:
        json.dump(rec, fh, indent=1)
        fh.write("\n")


def import_world(path) -> World:
    path = str(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == VOXEL_MAGIC:
        return import_voxel(path)
    try:
        with open(path) as fh:
            rec = json.load(fh)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON at line {e.lineno} col {e.colno}") from e
    except UnicodeDecodeError as e:
        raise FormatError(f"{path}: not a world file ({e.reason})") from e
    try:
        version = rec["version"]
    except (KeyError, TypeError) as e:
        raise FormatError(f"{path}: missing version field") from e
    if version != WORLD_SCHEMA_VERSION:
        from .errors import VersionMismatchError

        raise VersionMismatchError(f"{path}: world schema version {version} unsupported")
    try:
        prims = [Primitive.from_json(p) for p in rec["primitives"]]
        return World(np.asarray(rec["bounds"]["min"], dtype=np.float64),
                     np.asarray(rec["bounds"]["max"], dtype=np.float64),
                     prims, seed=int(rec["seed"]), kind=rec["kind"])
    except (KeyError, TypeError) as e:
        raise FormatError(f"{path}: incomplete world record ({e!r})") from e


def export_voxel(world: World, path, cell_size: float = 0.1):
    """Bit-packed occupancy grid with the RNVX header."""
    if world.voxel_grid is not None:
        occ, cell = world.voxel_grid, world.voxel_cell
    else:
        occ, cell = world.occupancy_grid(cell_size), cell_size
    with open(path, "wb") as fh:
        write_grid_header(fh, VOXEL_MAGIC, occ.shape, cell, world.bounds_min)
        fh.write(np.packbits(occ.reshape(-1).astype(np.uint8)).tobytes())


def import_voxel(path) -> World:
    with open(path, "rb") as fh:
        dims, cell, origin = read_grid_header(fh, VOXEL_MAGIC)
        n = int(np.prod(dims))
        packed = np.frombuffer(fh.read(), dtype=np.uint8)
    if packed.size < (n + 7) // 8:
        raise FormatError(f"{path}: voxel payload truncated")
    bits = np.unpackbits(packed)[:n].astype(bool).reshape(dims)
    lo = np.asarray(origin, dtype=np.float64)
    hi = lo + np.asarray(dims) * cell
    return World(lo, hi, [], seed=0, kind="imported",
                 voxel_grid=bits, voxel_cell=float(cell))

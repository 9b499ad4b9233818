"""Obstacle-aware shortest-distance fields on the occupancy grid.

The field G(x) holds the length of the shortest free path from x to the
goal, solved with first-order fast marching (Godunov upwind, 6-connected
narrow band) over the world's occupancy grid. Occupied cells are dilated
by one cell first so interpolated gradients never cut wall corners. Cells
around the goal are seeded with exact Euclidean values, which removes most
of the point-source error of the first-order scheme.

A 26-connected Dijkstra over the same grid serves as the brute-force
reference; it brackets the fast-marching solution from above (grid paths
overestimate the continuous geodesic) while the Euclidean distance brackets
it from below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import csgraph

from . import _kernels
from .errors import GoalInObstacleError, UnreachableCellError
from .serial import FIELD_MAGIC, read_grid_header, write_grid_header
from .worldgen import World

UNREACHED = _kernels.INF / 2  # values above this mark occupied/disconnected cells


@dataclass
class GeodesicField:
    goal: np.ndarray
    values: np.ndarray  # (nx, ny, nz), np.inf on unreached cells
    cell_size: float
    origin: np.ndarray

    @property
    def dims(self):
        return self.values.shape

    def cell_of(self, x) -> tuple:
        idx = np.floor((np.asarray(x) - self.origin) / self.cell_size).astype(int)
        return tuple(np.clip(idx, 0, np.array(self.dims) - 1))

    def reachable(self, x) -> bool:
        return np.isfinite(self.values[self.cell_of(x)])

    def _snap(self, x) -> np.ndarray:
        """x, or the nearest reached cell center within a 1-cell shell."""
        ix, iy, iz = self.cell_of(x)
        if np.isfinite(self.values[ix, iy, iz]):
            return np.asarray(x, dtype=np.float64)
        best = None
        best_d = np.inf
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    jx, jy, jz = ix + dx, iy + dy, iz + dz
                    if not (0 <= jx < self.dims[0] and 0 <= jy < self.dims[1]
                            and 0 <= jz < self.dims[2]):
                        continue
                    if not np.isfinite(self.values[jx, jy, jz]):
                        continue
                    center = self.origin + (np.array([jx, jy, jz]) + 0.5) * self.cell_size
                    d = float(np.linalg.norm(center - x))
                    if d < best_d:
                        best_d, best = d, center
        if best is None:
            raise UnreachableCellError(f"no reached cell near {np.asarray(x)}")
        return best

    def value(self, x) -> float:
        """Trilinearly interpolated distance; snaps out of unreached cells."""
        x = self._snap(x)
        u = (x - self.origin) / self.cell_size - 0.5
        base = np.floor(u).astype(int)
        frac = u - base
        base = np.clip(base, 0, np.array(self.dims) - 2)
        frac = np.clip(u - base, 0.0, 1.0)
        block = self.values[base[0]:base[0] + 2, base[1]:base[1] + 2,
                            base[2]:base[2] + 2].copy()
        finite = np.isfinite(block)
        if not finite.any():
            raise UnreachableCellError(f"interpolation block unreached at {x}")
        if not finite.all():
            # treat blocked corners as locally far: biases gradients away
            block[~finite] = block[finite].max() + self.cell_size
        w = np.array([1.0 - frac, frac])  # (2, 3)
        weights = np.einsum("i,j,k->ijk", w[:, 0], w[:, 1], w[:, 2])
        return float((weights * block).sum())

    def gradient(self, x) -> np.ndarray:
        """Central-difference gradient of the interpolated field at x."""
        x = self._snap(x)
        h = self.cell_size
        g = np.zeros(3)
        for ax in range(3):
            step = np.zeros(3)
            step[ax] = h
            try:
                vp = self.value(x + step)
            except UnreachableCellError:
                vp = None
            try:
                vm = self.value(x - step)
            except UnreachableCellError:
                vm = None
            if vp is not None and vm is not None:
                g[ax] = (vp - vm) / (2 * h)
            elif vp is not None:
                g[ax] = (vp - self.value(x)) / h
            elif vm is not None:
                g[ax] = (self.value(x) - vm) / h
            else:
                raise UnreachableCellError(f"gradient stencil unreached at {x}")
        return g

    def descent_direction(self, x) -> np.ndarray:
        """Unit direction of steepest field decrease; zero at the goal plateau."""
        g = self.gradient(x)
        norm = float(np.linalg.norm(g))
        if norm < 1e-6:
            return np.zeros(3)
        return -g / norm

    def save(self, path):
        with open(path, "wb") as fh:
            write_grid_header(fh, FIELD_MAGIC, self.dims, self.cell_size, self.origin)
            fh.write(np.asarray(self.goal, dtype="<f4").tobytes())
            fh.write(np.asarray(self.values, dtype="<f4").reshape(-1).tobytes())

    @staticmethod
    def load(path) -> "GeodesicField":
        with open(path, "rb") as fh:
            dims, cell, origin = read_grid_header(fh, FIELD_MAGIC)
            goal = np.frombuffer(fh.read(12), dtype="<f4").astype(np.float64)
            n = int(np.prod(dims))
            values = np.frombuffer(fh.read(n * 4), dtype="<f4").astype(np.float64)
        from .errors import FormatError

        if values.size != n:
            raise FormatError(f"{path}: field payload truncated")
        return GeodesicField(goal=goal, values=values.reshape(dims),
                             cell_size=float(cell),
                             origin=np.asarray(origin, dtype=np.float64))


def _prepare_grid(world: World, x_g, cell_size: float):
    x_g = np.asarray(x_g, dtype=np.float64)
    if world.occupancy(x_g):
        raise GoalInObstacleError(f"goal {x_g} lies inside an obstacle")
    occ = world.occupancy_grid(cell_size)
    occ = ndimage.binary_dilation(occ, structure=np.ones((3, 3, 3), dtype=bool))
    gi = tuple(np.clip(np.floor((x_g - world.bounds_min) / cell_size).astype(int),
                       0, np.array(occ.shape) - 1))
    if occ[gi]:
        raise GoalInObstacleError(
            f"goal {x_g} within one dilated cell of an obstacle at resolution {cell_size}")
    return x_g, occ, gi


def _exact_seeds(occ, x_g, origin, cell_size: float, radius_cells: float = 3.0):
    """Cells near the goal seeded with exact Euclidean distance."""
    gi = np.floor((x_g - origin) / cell_size).astype(int)
    r = int(np.ceil(radius_cells))
    lo = np.maximum(gi - r, 0)
    hi = np.minimum(gi + r + 1, occ.shape)
    idx = []
    val = []
    nx, ny, nz = occ.shape
    for ix in range(lo[0], hi[0]):
        for iy in range(lo[1], hi[1]):
            for iz in range(lo[2], hi[2]):
                if occ[ix, iy, iz]:
                    continue
                center = origin + (np.array([ix, iy, iz]) + 0.5) * cell_size
                d = float(np.linalg.norm(center - x_g))
                if d <= radius_cells * cell_size:
                    idx.append((ix * ny + iy) * nz + iz)
                    val.append(d)
    return np.asarray(idx, dtype=np.int64), np.asarray(val, dtype=np.float64)


def compute_field(world: World, x_g, cell_size: float) -> GeodesicField:
    """Fast-marching solution of the unit-speed eikonal equation."""
    x_g, occ, _ = _prepare_grid(world, x_g, cell_size)
    seed_idx, seed_val = _exact_seeds(occ, x_g, world.bounds_min, cell_size)
    if seed_idx.size == 0:
        raise GoalInObstacleError(f"no free cells around goal {x_g}")
    values = _kernels.fmm_solve(occ, seed_idx, seed_val, cell_size)
    values = np.where(values >= UNREACHED, np.inf, values)
    return GeodesicField(goal=x_g, values=values, cell_size=cell_size,
                         origin=world.bounds_min.copy())


_OFFSETS_26 = np.array([(i, j, k)
                        for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)
                        if (i, j, k) != (0, 0, 0)], dtype=np.int64)


def dijkstra_oracle(world: World, x_g, cell_size: float) -> GeodesicField:
    """26-connected grid shortest paths; brute-force reference for the solver.

    Builds the full edge list in memory, so keep it to coarse grids.
    """
    x_g, occ, gi = _prepare_grid(world, x_g, cell_size)
    dims = occ.shape
    n = int(np.prod(dims))
    free = ~occ
    node_id = np.full(n, -1, dtype=np.int64)
    free_flat = free.reshape(-1)
    node_id[free_flat] = np.arange(int(free_flat.sum()))

    coords = np.argwhere(free)
    rows, cols, data = [], [], []
    for off in _OFFSETS_26:
        nb = coords + off
        ok = np.all((nb >= 0) & (nb < dims), axis=1)
        src = coords[ok]
        dst = nb[ok]
        dst_flat = (dst[:, 0] * dims[1] + dst[:, 1]) * dims[2] + dst[:, 2]
        dst_ok = free_flat[dst_flat]
        src = src[dst_ok]
        dst_flat = dst_flat[dst_ok]
        src_flat = (src[:, 0] * dims[1] + src[:, 1]) * dims[2] + src[:, 2]
        w = cell_size * float(np.linalg.norm(off))
        rows.append(node_id[src_flat])
        cols.append(node_id[dst_flat])
        data.append(np.full(len(src_flat), w))
    graph = sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(int(free_flat.sum()),) * 2)

    goal_flat = (gi[0] * dims[1] + gi[1]) * dims[2] + gi[2]
    dist = csgraph.dijkstra(graph, directed=False, indices=node_id[goal_flat])
    goal_center = world.bounds_min + (np.asarray(gi) + 0.5) * cell_size
    dist = dist + float(np.linalg.norm(goal_center - x_g))

    values = np.full(n, np.inf)
    values[free_flat] = dist
    return GeodesicField(goal=x_g, values=values.reshape(dims),
                         cell_size=cell_size, origin=world.bounds_min.copy())

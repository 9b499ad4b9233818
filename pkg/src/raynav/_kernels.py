"""Numba-compiled inner loops: batched ray casts and the eikonal solver.

Everything here is algorithmically owned by the surrounding modules; numba
only removes the interpreter from per-ray/per-cell loops. All kernels are
single-threaded and IEEE-deterministic (fastmath stays off).
"""

import numpy as np
from numba import njit

INF = 1e30


@njit(cache=True)
def cast_rays(origin, dirs, spheres, boxes, bmin, bmax, max_range):
    """First-hit distances for all rays; closed world (boundary is a hit).

    spheres: (S,4) rows [cx, cy, cz, r]; boxes: (B,6) rows [min, max].
    Returns max_range where nothing is hit closer; 0.0 when the origin is
    inside a primitive (collision sentinel).
    """
    n = dirs.shape[0]
    out = np.empty(n)
    ox, oy, oz = origin[0], origin[1], origin[2]

    inside = False
    for j in range(spheres.shape[0]):
        dxs = ox - spheres[j, 0]
        dys = oy - spheres[j, 1]
        dzs = oz - spheres[j, 2]
        if dxs * dxs + dys * dys + dzs * dzs <= spheres[j, 3] * spheres[j, 3]:
            inside = True
            break
    if not inside:
        for j in range(boxes.shape[0]):
            if (boxes[j, 0] <= ox <= boxes[j, 3] and boxes[j, 1] <= oy <= boxes[j, 4]
                    and boxes[j, 2] <= oz <= boxes[j, 5]):
                inside = True
                break
    if inside or not (bmin[0] <= ox <= bmax[0] and bmin[1] <= oy <= bmax[1]
                      and bmin[2] <= oz <= bmax[2]):
        for i in range(n):
            out[i] = 0.0
        return out

    for i in range(n):
        dx, dy, dz = dirs[i, 0], dirs[i, 1], dirs[i, 2]
        best = max_range

        # world boundary exit (closed world)
        for ax in range(3):
            d = dirs[i, ax]
            if d > 1e-15:
                t = (bmax[ax] - origin[ax]) / d
            elif d < -1e-15:
                t = (bmin[ax] - origin[ax]) / d
            else:
                continue
            if t < best:
                best = t

        for j in range(spheres.shape[0]):
            ocx = ox - spheres[j, 0]
            ocy = oy - spheres[j, 1]
            ocz = oz - spheres[j, 2]
            b = ocx * dx + ocy * dy + ocz * dz
            if b >= 0.0:
                continue  # center behind the ray: no forward entry
            r = spheres[j, 3]
            c = ocx * ocx + ocy * ocy + ocz * ocz - r * r
            disc = b * b - c
            if disc <= 0.0:
                continue
            t = -b - np.sqrt(disc)
            if 0.0 <= t < best:
                best = t

        for j in range(boxes.shape[0]):
            tmin = -INF
            tmax = INF
            ok = True
            for ax in range(3):
                o = origin[ax]
                d = dirs[i, ax]
                lo = boxes[j, ax]
                hi = boxes[j, ax + 3]
                if d > 1e-15 or d < -1e-15:
                    t1 = (lo - o) / d
                    t2 = (hi - o) / d
                    if t1 > t2:
                        t1, t2 = t2, t1
                    if t1 > tmin:
                        tmin = t1
                    if t2 < tmax:
                        tmax = t2
                    if tmin > tmax:
                        ok = False
                        break
                elif o < lo or o > hi:
                    ok = False
                    break
            if ok and tmax >= 0.0 and 0.0 <= tmin < best:
                best = tmin

        out[i] = best
    return out


@njit(cache=True)
def cast_rays_voxel(origin, dirs, occ, bmin, cell, max_range):
    """DDA traversal through an occupancy grid; distances to hit-cell entry."""
    n = dirs.shape[0]
    out = np.empty(n)
    nx, ny, nz = occ.shape
    ix0 = int((origin[0] - bmin[0]) / cell)
    iy0 = int((origin[1] - bmin[1]) / cell)
    iz0 = int((origin[2] - bmin[2]) / cell)
    if (ix0 < 0 or iy0 < 0 or iz0 < 0 or ix0 >= nx or iy0 >= ny or iz0 >= nz
            or occ[ix0, iy0, iz0]):
        for i in range(n):
            out[i] = 0.0
        return out

    for i in range(n):
        ix, iy, iz = ix0, iy0, iz0
        tx = ty = tz = INF
        sx = sy = sz = 0
        dtx = dty = dtz = INF
        dx, dy, dz = dirs[i, 0], dirs[i, 1], dirs[i, 2]
        if dx > 1e-15:
            sx = 1
            dtx = cell / dx
            tx = ((ix + 1) * cell + bmin[0] - origin[0]) / dx
        elif dx < -1e-15:
            sx = -1
            dtx = -cell / dx
            tx = (ix * cell + bmin[0] - origin[0]) / dx
        if dy > 1e-15:
            sy = 1
            dty = cell / dy
            ty = ((iy + 1) * cell + bmin[1] - origin[1]) / dy
        elif dy < -1e-15:
            sy = -1
            dty = -cell / dy
            ty = (iy * cell + bmin[1] - origin[1]) / dy
        if dz > 1e-15:
            sz = 1
            dtz = cell / dz
            tz = ((iz + 1) * cell + bmin[2] - origin[2]) / dz
        elif dz < -1e-15:
            sz = -1
            dtz = -cell / dz
            tz = (iz * cell + bmin[2] - origin[2]) / dz

        dist = max_range
        while True:
            if tx <= ty and tx <= tz:
                t = tx
                tx += dtx
                ix += sx
            elif ty <= tz:
                t = ty
                ty += dty
                iy += sy
            else:
                t = tz
                tz += dtz
                iz += sz
            if t >= max_range:
                break
            if ix < 0 or iy < 0 or iz < 0 or ix >= nx or iy >= ny or iz >= nz:
                dist = t  # leaving the grid: closed-world boundary hit
                break
            if occ[ix, iy, iz]:
                dist = t
                break
        out[i] = dist
    return out


@njit(cache=True)
def _heap_push(heap_t, heap_i, size, t, idx):
    k = size
    heap_t[k] = t
    heap_i[k] = idx
    while k > 0:
        parent = (k - 1) >> 1
        if heap_t[parent] <= heap_t[k]:
            break
        heap_t[parent], heap_t[k] = heap_t[k], heap_t[parent]
        heap_i[parent], heap_i[k] = heap_i[k], heap_i[parent]
        k = parent
    return size + 1


@njit(cache=True)
def _heap_pop(heap_t, heap_i, size):
    t = heap_t[0]
    idx = heap_i[0]
    size -= 1
    heap_t[0] = heap_t[size]
    heap_i[0] = heap_i[size]
    k = 0
    while True:
        left = 2 * k + 1
        if left >= size:
            break
        child = left
        right = left + 1
        if right < size and heap_t[right] < heap_t[left]:
            child = right
        if heap_t[k] <= heap_t[child]:
            break
        heap_t[k], heap_t[child] = heap_t[child], heap_t[k]
        heap_i[k], heap_i[child] = heap_i[child], heap_i[k]
        k = child
    return t, idx, size


@njit(cache=True)
def fmm_solve(occ, seed_idx, seed_val, h):
    """First-order Godunov fast marching on a unit-speed occupancy grid.

    occ: blocked cells (never updated). Seeds carry exact initial values.
    Returns distances with INF on unreached cells.
    """
    nx, ny, nz = occ.shape
    n = nx * ny * nz
    occf = occ.reshape(n)
    dist = np.full(n, INF)
    state = np.zeros(n, dtype=np.uint8)  # 0 far, 1 narrow, 2 accepted
    cap = 6 * n + len(seed_idx) + 64  # a cell re-enters once per accepted neighbor
    heap_t = np.empty(cap)
    heap_i = np.empty(cap, dtype=np.int64)
    size = 0

    for s in range(len(seed_idx)):
        idx = seed_idx[s]
        if occf[idx] or seed_val[s] >= dist[idx]:
            continue
        dist[idx] = seed_val[s]
        state[idx] = 1
        size = _heap_push(heap_t, heap_i, size, seed_val[s], idx)

    syz = ny * nz
    while size > 0:
        t, idx, size = _heap_pop(heap_t, heap_i, size)
        if state[idx] == 2:
            continue
        state[idx] = 2
        ix = idx // syz
        iy = (idx % syz) // nz
        iz = idx % nz
        for nb in range(6):
            jx, jy, jz = ix, iy, iz
            if nb == 0:
                jx += 1
            elif nb == 1:
                jx -= 1
            elif nb == 2:
                jy += 1
            elif nb == 3:
                jy -= 1
            elif nb == 4:
                jz += 1
            else:
                jz -= 1
            if jx < 0 or jy < 0 or jz < 0 or jx >= nx or jy >= ny or jz >= nz:
                continue
            jdx = jx * syz + jy * nz + jz
            if state[jdx] == 2 or occf[jdx]:
                continue

            # Godunov upwind update from accepted axis neighbors
            a = INF
            if jx + 1 < nx and state[(jx + 1) * syz + jy * nz + jz] == 2:
                a = dist[(jx + 1) * syz + jy * nz + jz]
            if jx - 1 >= 0 and state[(jx - 1) * syz + jy * nz + jz] == 2:
                v = dist[(jx - 1) * syz + jy * nz + jz]
                if v < a:
                    a = v
            b = INF
            if jy + 1 < ny and state[jx * syz + (jy + 1) * nz + jz] == 2:
                b = dist[jx * syz + (jy + 1) * nz + jz]
            if jy - 1 >= 0 and state[jx * syz + (jy - 1) * nz + jz] == 2:
                v = dist[jx * syz + (jy - 1) * nz + jz]
                if v < b:
                    b = v
            c = INF
            if jz + 1 < nz and state[jx * syz + jy * nz + jz + 1] == 2:
                c = dist[jx * syz + jy * nz + jz + 1]
            if jz - 1 >= 0 and state[jx * syz + jy * nz + jz - 1] == 2:
                v = dist[jx * syz + jy * nz + jz - 1]
                if v < c:
                    c = v

            # sort a <= b <= c
            if a > b:
                a, b = b, a
            if b > c:
                b, c = c, b
            if a > b:
                a, b = b, a
            if a >= INF:
                continue
            new = a + h
            if new > b:
                s2 = a + b
                disc = s2 * s2 - 2.0 * (a * a + b * b - h * h)
                new = 0.5 * (s2 + np.sqrt(disc))
                if new > c:
                    s3 = a + b + c
                    disc = s3 * s3 - 3.0 * (a * a + b * b + c * c - h * h)
                    if disc > 0.0:
                        new = (s3 + np.sqrt(disc)) / 3.0
            if new < dist[jdx]:
                dist[jdx] = new
                state[jdx] = 1
                size = _heap_push(heap_t, heap_i, size, new, jdx)

    return dist.reshape(nx, ny, nz)

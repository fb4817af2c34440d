"""Event-driven growth engine (numba JIT core).

Simulates the jump process exactly by superposition and thinning:

* candidates arrive at rate area * total_mass on a live candidate region,
  centres uniform there, radii from the normalised measure;
* a candidate is accepted iff its ball meets the occupied region;
* the live region excludes the "dead zone": cells whose whole max-radius
  neighbourhood is already covered. Any candidate there would add a ball
  contained in the occupied region, a fixed point of the transition, so
  excluding them leaves the law of the set-valued process unchanged while
  cutting the event count from cubic to roughly quadratic in the run scale.

The dead zone is the erosion of a conservative covered-cell bitmap (cell
pitch R0/4) by a square of half-width ceil(R0/h); it is refreshed every
`rebuild_every` insertions and only ever grows, so staleness is harmless.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import DegenerateIntersectionError, InvalidWindowError
from .events import Window
from .measure import RadiusMeasure
from .occupancy import Disk, HalfPlane, PointSet, SeedRegion, SeedUnion, merge_intervals

# --- integer registers -----------------------------------------------------
(I_NBALLS, I_NCAND, I_NALIVE, I_ECX0, I_ECX1, I_ECY0, I_ECY1, I_TRIGGER,
 I_STOPKIND, I_STOPN, I_SINCE_REBUILD, I_PAUSEPTR, I_NIV, I_SEGON, I_TWOTYPE,
 I_SECTORS, I_NFRONTWALL, I_TRIGWALL, I_CLOGON, I_NCLOG, I_DEGEN, I_BUDGET,
 I_NBX, I_NBY, I_NGX, I_NGY, I_REBUILD_EVERY, I_CLIP) = range(28)
N_IREGS = 28

# --- float registers --------------------------------------------------------
(F_TNOW, F_FRONT, F_THP, F_TPT, F_TSEG, F_HPX, F_PX, F_PY, F_SEGX, F_SEGY,
 F_SEGLEN, F_STOPT, F_BX0, F_BX1, F_BY0, F_BY1, F_H, F_OXF, F_OYF, F_G,
 F_GOXF, F_GOYF, F_CX0, F_CX1, F_CY0, F_CY1, F_MASS, F_R0, F_WALLM,
 F_TTCX, F_TTCY) = range(31)
N_FREGS = 31

# stop kinds
STOP_POINT, STOP_HALFPLANE, STOP_SEGMENT, STOP_TIME, STOP_COUNT = range(5)

# kernel exit statuses
(ST_DONE, ST_REBUILD, ST_GROW_ALLOC, ST_GROW_BALLS, ST_BUDGET, ST_PAUSE,
 ST_GROW_IV, ST_DEGENERATE, ST_GROW_CLOG, ST_GROW_ALIVE) = range(10)

SEED_HALFPLANE, SEED_DISK, SEED_POINT = 0, 1, 2

TWO_TYPE_TRIALS = 100_000
TWO_TYPE_PLAIN_TRIALS = 10_000  # before switching to the segment sampler
TWO_TYPE_MAX_PARTNERS = 64
CELLS_PER_R0 = 4  # bitmap pitch h = R0 / CELLS_PER_R0


@njit(cache=True, nogil=True, inline="always")
def _sample_radius(rng, sm_cum, sm_kind, sm_a, sm_b):
    total = sm_cum[len(sm_cum) - 1]
    while True:
        u = rng.random() * total
        k = 0
        while sm_cum[k] < u:
            k += 1
        if sm_kind[k] == 0:
            return sm_a[k]
        r = sm_a[k] + (sm_b[k] - sm_a[k]) * rng.random()
        if r > 0.0:
            return r


@njit(cache=True, nogil=True, inline="always")
def _seed_ball_hit(x, y, r, seed_kind, seed_p, clipped, cx0, cx1, cy0, cy1):
    for s in range(len(seed_kind)):
        k = seed_kind[s]
        if k == SEED_HALFPLANE:
            x0 = seed_p[s, 0]
            if clipped:
                rx1 = min(x0, cx1)
                if rx1 >= cx0:
                    dx = max(cx0 - x, 0.0, x - rx1)
                    dy = max(cy0 - y, 0.0, y - cy1)
                    if dx * dx + dy * dy <= r * r:
                        return True
            elif x - r <= x0:
                return True
        elif k == SEED_DISK:
            dx = x - seed_p[s, 0]
            dy = y - seed_p[s, 1]
            rr = r + seed_p[s, 2]
            if dx * dx + dy * dy <= rr * rr:
                return True
        else:
            dx = x - seed_p[s, 0]
            dy = y - seed_p[s, 1]
            if dx * dx + dy * dy <= r * r:
                return True
    return False


@njit(cache=True, nogil=True, inline="always")
def _seed_covers(x, y, seed_kind, seed_p):
    for s in range(len(seed_kind)):
        k = seed_kind[s]
        if k == SEED_HALFPLANE:
            if x <= seed_p[s, 0]:
                return True
        elif k == SEED_DISK:
            dx = x - seed_p[s, 0]
            dy = y - seed_p[s, 1]
            if dx * dx + dy * dy <= seed_p[s, 2] * seed_p[s, 2]:
                return True
        else:
            if x == seed_p[s, 0] and y == seed_p[s, 1]:
                return True
    return False


@njit(cache=True, nogil=True, inline="always")
def _balls_hit(x, y, r, regs_f, regs_i, ghead, gnxt, bx, by, br):
    g = regs_f[F_G]
    ngx = regs_i[I_NGX]
    ngy = regs_i[I_NGY]
    gx = int(math.floor((x - regs_f[F_GOXF]) / g))
    gy = int(math.floor((y - regs_f[F_GOYF]) / g))
    for jy in range(max(gy - 1, 0), min(gy + 2, ngy)):
        base = jy * ngx
        for jx in range(max(gx - 1, 0), min(gx + 2, ngx)):
            j = ghead[base + jx]
            while j >= 0:
                dx = bx[j] - x
                dy = by[j] - y
                rr = br[j] + r
                if dx * dx + dy * dy <= rr * rr:
                    return True
                j = gnxt[j]
    return False


@njit(cache=True, nogil=True, inline="always")
def _covering_latest(x, y, regs_f, regs_i, ghead, gnxt, bx, by, br):
    """Largest ball index covering the point, or -1."""
    g = regs_f[F_G]
    ngx = regs_i[I_NGX]
    ngy = regs_i[I_NGY]
    gx = int(math.floor((x - regs_f[F_GOXF]) / g))
    gy = int(math.floor((y - regs_f[F_GOYF]) / g))
    best = -1
    for jy in range(max(gy - 1, 0), min(gy + 2, ngy)):
        base = jy * ngx
        for jx in range(max(gx - 1, 0), min(gx + 2, ngx)):
            j = ghead[base + jx]
            while j >= 0:
                if j > best:
                    dx = bx[j] - x
                    dy = by[j] - y
                    if dx * dx + dy * dy <= br[j] * br[j]:
                        best = j
                j = gnxt[j]
    return best


@njit(cache=True, nogil=True, inline="always")
def _circular_segment_area(r, d):
    """Area of {p in B(0,r) : p.u >= d} for a unit direction u."""
    if d >= r:
        return 0.0
    if d <= -r:
        return math.pi * r * r
    return r * r * math.acos(d / r) - d * math.sqrt(r * r - d * d)


@njit(cache=True, nogil=True)
def _gather_parent_pieces(x, y, r, regs_f, regs_i, ghead, gnxt, bx, by, br,
                          seed_kind, seed_p, pc):
    """Decompose B((x,y),r) & occupied into circular segments / full disks.

    Each row of pc is (cx, cy, rad, ux, uy, cut, area): the region
    {p in B((cx,cy),rad) : (p-c).u >= cut}; cut <= -rad encodes a full disk.
    Returns the number of pieces, or -1 on partner overflow.
    """
    n = 0

    def add_lens(cx1, cy1, r1, cx2, cy2, r2, n):
        # pieces of B1 & B2 split by the radical line; B1 is the event ball
        dx = cx2 - cx1
        dy = cy2 - cy1
        dd = math.sqrt(dx * dx + dy * dy)
        if dd > r1 + r2:
            return n
        if dd <= abs(r1 - r2):
            # one disk inside the other: the lens is the smaller disk
            if r1 <= r2:
                pc[n, 0], pc[n, 1], pc[n, 2] = cx1, cy1, r1
            else:
                pc[n, 0], pc[n, 1], pc[n, 2] = cx2, cy2, r2
            pc[n, 3], pc[n, 4], pc[n, 5] = 1.0, 0.0, -pc[n, 2] - 1.0
            pc[n, 6] = math.pi * pc[n, 2] * pc[n, 2]
            return n + 1
        ux = dx / dd
        uy = dy / dd
        d1 = (dd * dd + r1 * r1 - r2 * r2) / (2.0 * dd)
        d2 = dd - d1
        a1 = _circular_segment_area(r1, d1)
        if a1 > 0.0:
            pc[n, 0], pc[n, 1], pc[n, 2] = cx1, cy1, r1
            pc[n, 3], pc[n, 4], pc[n, 5], pc[n, 6] = ux, uy, d1, a1
            n += 1
        a2 = _circular_segment_area(r2, d2)
        if a2 > 0.0:
            pc[n, 0], pc[n, 1], pc[n, 2] = cx2, cy2, r2
            pc[n, 3], pc[n, 4], pc[n, 5], pc[n, 6] = -ux, -uy, d2, a2
            n += 1
        return n

    g = regs_f[F_G]
    ngx = regs_i[I_NGX]
    ngy = regs_i[I_NGY]
    gx = int(math.floor((x - regs_f[F_GOXF]) / g))
    gy = int(math.floor((y - regs_f[F_GOYF]) / g))
    for jy in range(max(gy - 1, 0), min(gy + 2, ngy)):
        base = jy * ngx
        for jx in range(max(gx - 1, 0), min(gx + 2, ngx)):
            j = ghead[base + jx]
            while j >= 0:
                dxj = bx[j] - x
                dyj = by[j] - y
                rr = br[j] + r
                if dxj * dxj + dyj * dyj <= rr * rr:
                    if n + 2 > len(pc) - 2:
                        return -1
                    n = add_lens(x, y, r, bx[j], by[j], br[j], n)
                j = gnxt[j]
    for s in range(len(seed_kind)):
        k = seed_kind[s]
        if k == SEED_HALFPLANE:
            cut = x - seed_p[s, 0]  # (p-c).(-1,0) >= cx - x0  <=>  px <= x0
            a = _circular_segment_area(r, cut)
            if a > 0.0:
                if n >= len(pc):
                    return -1
                pc[n, 0], pc[n, 1], pc[n, 2] = x, y, r
                pc[n, 3], pc[n, 4], pc[n, 5], pc[n, 6] = -1.0, 0.0, cut, a
                n += 1
        elif k == SEED_DISK:
            if n + 2 > len(pc) - 2:
                return -1
            n = add_lens(x, y, r, seed_p[s, 0], seed_p[s, 1], seed_p[s, 2], n)
    return n


@njit(cache=True, nogil=True)
def _sample_parent_from_pieces(rng, pc, n_pieces):
    """Exact uniform point on the union of the pieces; returns (px, py)."""
    total = 0.0
    for i in range(n_pieces):
        total += pc[i, 6]
    while True:
        u = rng.random() * total
        k = 0
        acc = pc[0, 6]
        while acc < u and k + 1 < n_pieces:
            k += 1
            acc += pc[k, 6]
        cx, cy, rad = pc[k, 0], pc[k, 1], pc[k, 2]
        ux, uy, cut = pc[k, 3], pc[k, 4], pc[k, 5]
        # rejection inside the rotated bounding box of the segment
        lo = max(cut, -rad)
        half = rad if lo <= 0.0 else math.sqrt(rad * rad - lo * lo)
        for _ in range(10_000):
            sx = lo + (rad - lo) * rng.random()
            sy = half * (2.0 * rng.random() - 1.0)
            if sx * sx + sy * sy > rad * rad:
                continue
            px = cx + sx * ux - sy * uy
            py = cy + sx * uy + sy * ux
            # multiplicity correction across overlapping pieces
            q = 0
            for i in range(n_pieces):
                dx = px - pc[i, 0]
                dy = py - pc[i, 1]
                if dx * dx + dy * dy <= pc[i, 2] * pc[i, 2] and \
                        (dx * pc[i, 3] + dy * pc[i, 4]) >= pc[i, 5]:
                    q += 1
            if q >= 1 and rng.random() * q < 1.0:
                return px, py
            break  # resample a piece


@njit(cache=True, nogil=True, inline="always")
def _wake_cells(alive, n_alive, mask, nbx, nby, oxf, oyf, h, x, y, reach):
    """Make every never-seen cell within `reach` of (x, y) live.

    mask: 0 = never enumerated, 1 = live, 2 = dead forever. Cells enter the
    live set exactly when the occupied region comes within candidate reach,
    so the live region follows the shape of the occupied set instead of its
    bounding box.
    """
    jx0 = max(int(math.floor((x - reach - oxf) / h)), 0)
    jx1 = min(int(math.ceil((x + reach - oxf) / h)), nbx)
    jy0 = max(int(math.floor((y - reach - oyf) / h)), 0)
    jy1 = min(int(math.ceil((y + reach - oyf) / h)), nby)
    n = n_alive
    for jy in range(jy0, jy1):
        base = jy * nbx
        for jx in range(jx0, jx1):
            if mask[base + jx] == 0:
                mask[base + jx] = 1
                alive[n] = base + jx
                n += 1
    return n


@njit(cache=True, nogil=True, inline="always")
def _add_interval(ivs, k, lo, hi):
    """Merge the closed interval [lo, hi] into the sorted disjoint list."""
    i = 0
    while i < k and ivs[i, 1] < lo:
        i += 1
    j = i
    nlo = lo
    nhi = hi
    while j < k and ivs[j, 0] <= hi:
        if ivs[j, 0] < nlo:
            nlo = ivs[j, 0]
        if ivs[j, 1] > nhi:
            nhi = ivs[j, 1]
        j += 1
    if j == i:  # no overlap: make room at position i
        for q in range(k, i, -1):
            ivs[q, 0] = ivs[q - 1, 0]
            ivs[q, 1] = ivs[q - 1, 1]
        ivs[i, 0] = nlo
        ivs[i, 1] = nhi
        return k + 1
    ivs[i, 0] = nlo
    ivs[i, 1] = nhi
    shift = j - i - 1
    if shift > 0:
        for q in range(j, k):
            ivs[q - shift, 0] = ivs[q, 0]
            ivs[q - shift, 1] = ivs[q, 1]
    return k - shift


@njit(cache=True, nogil=True)
def _advance(regs_i, regs_f, rng, alive, live_mask, covered, ghead, gnxt,
             bx, by, br, bt, btype, sm_cum, sm_kind, sm_a, sm_b,
             seed_kind, seed_p, ivs, pauses, clog, pieces):
    h = regs_f[F_H]
    oxf = regs_f[F_OXF]
    oyf = regs_f[F_OYF]
    nbx = regs_i[I_NBX]
    nby = regs_i[I_NBY]
    r0 = regs_f[F_R0]
    mass = regs_f[F_MASS]
    clipped = regs_i[I_CLIP] == 1
    stop_kind = regs_i[I_STOPKIND]
    cap_balls = len(bx)
    cap_iv = len(ivs)
    margin_cells = int(math.ceil(2.0 * r0 / h)) + 2

    while True:
        # -- capacity guards (checked before each candidate so an accepted
        #    event can always be committed atomically)
        if regs_i[I_NBALLS] >= cap_balls:
            return ST_GROW_BALLS
        if regs_i[I_SEGON] == 1 and regs_i[I_NIV] + 1 >= cap_iv:
            return ST_GROW_IV
        if regs_i[I_CLOGON] == 1 and regs_i[I_NCLOG] >= len(clog):
            return ST_GROW_CLOG
        # worst-case live-cell appends from one insert (one wake box)
        if regs_i[I_NALIVE] + 4 * margin_cells * margin_cells > len(alive):
            return ST_GROW_ALIVE
        if not clipped:
            # the live hull must keep one wake box of slack inside the allocation
            if (regs_i[I_ECX0] < margin_cells or regs_i[I_ECY0] < margin_cells
                    or regs_i[I_ECX1] > nbx - margin_cells
                    or regs_i[I_ECY1] > nby - margin_cells):
                return ST_GROW_ALLOC
        if regs_i[I_NCAND] >= regs_i[I_BUDGET]:
            return ST_BUDGET
        if regs_i[I_NALIVE] == 0:
            # occupied region saturated the window: no candidate can matter
            return ST_BUDGET

        # -- next candidate time on the current live region
        rate = regs_i[I_NALIVE] * h * h * mass
        t_next = regs_f[F_TNOW] + rng.standard_exponential() / rate
        if regs_i[I_PAUSEPTR] < len(pauses) and t_next > pauses[regs_i[I_PAUSEPTR]]:
            regs_f[F_TNOW] = pauses[regs_i[I_PAUSEPTR]]
            regs_i[I_PAUSEPTR] += 1
            return ST_PAUSE
        if stop_kind == STOP_TIME and t_next > regs_f[F_STOPT]:
            regs_f[F_TNOW] = regs_f[F_STOPT]
            return ST_DONE
        regs_f[F_TNOW] = t_next
        regs_i[I_NCAND] += 1

        # -- candidate position and radius
        cell = alive[rng.integers(0, regs_i[I_NALIVE])]
        iy = cell // nbx
        ix = cell - iy * nbx
        x = oxf + (ix + rng.random()) * h
        y = oyf + (iy + rng.random()) * h
        r = _sample_radius(rng, sm_cum, sm_kind, sm_a, sm_b)
        if regs_i[I_CLOGON] == 1:
            n = regs_i[I_NCLOG]
            clog[n, 0] = t_next
            clog[n, 1] = x
            clog[n, 2] = y
            clog[n, 3] = r
            regs_i[I_NCLOG] = n + 1

        # -- thinning: accept iff the ball meets the occupied region
        if not _balls_hit(x, y, r, regs_f, regs_i, ghead, gnxt, bx, by, br):
            if not _seed_ball_hit(x, y, r, seed_kind, seed_p, clipped,
                                  regs_f[F_CX0], regs_f[F_CX1], regs_f[F_CY0], regs_f[F_CY1]):
                continue

        # -- two-type parent sampling against the pre-insertion state
        ttype = np.int8(0)
        if regs_i[I_TWOTYPE] == 1:
            found = False
            px = 0.0
            py = 0.0
            budget_trials = TWO_TYPE_PLAIN_TRIALS if not clipped else TWO_TYPE_TRIALS
            for trial in range(budget_trials):
                rho = r * math.sqrt(rng.random())
                ang = 2.0 * math.pi * rng.random()
                qx = x + rho * math.cos(ang)
                qy = y + rho * math.sin(ang)
                if clipped and not (regs_f[F_CX0] <= qx <= regs_f[F_CX1]
                                    and regs_f[F_CY0] <= qy <= regs_f[F_CY1]):
                    continue
                if _covering_latest(qx, qy, regs_f, regs_i, ghead, gnxt, bx, by, br) >= 0 \
                        or _seed_covers(qx, qy, seed_kind, seed_p):
                    px, py = qx, qy
                    found = True
                    break
            if not found and not clipped:
                # thin intersection: exact segment-decomposition sampler
                npc = _gather_parent_pieces(x, y, r, regs_f, regs_i, ghead, gnxt,
                                            bx, by, br, seed_kind, seed_p, pieces)
                if npc > 0:
                    total = 0.0
                    for i in range(npc):
                        total += pieces[i, 6]
                    if total > 0.0:
                        px, py = _sample_parent_from_pieces(rng, pieces, npc)
                        found = True
                elif npc < 0:
                    # partner overflow cannot coexist with a thin overlap,
                    # but fall back to plain rejection defensively
                    for trial in range(TWO_TYPE_TRIALS - TWO_TYPE_PLAIN_TRIALS):
                        rho = r * math.sqrt(rng.random())
                        ang = 2.0 * math.pi * rng.random()
                        qx = x + rho * math.cos(ang)
                        qy = y + rho * math.sin(ang)
                        if _covering_latest(qx, qy, regs_f, regs_i, ghead, gnxt,
                                            bx, by, br) >= 0 \
                                or _seed_covers(qx, qy, seed_kind, seed_p):
                            px, py = qx, qy
                            found = True
                            break
            if not found:
                regs_i[I_DEGEN] = TWO_TYPE_TRIALS
                return ST_DEGENERATE
            j = _covering_latest(px, py, regs_f, regs_i, ghead, gnxt, bx, by, br)
            if j >= 0:
                ttype = btype[j]
            else:
                k = regs_i[I_SECTORS]
                if k == 0:
                    ttype = np.int8(0) if px < regs_f[F_TTCX] else np.int8(1)
                elif k == 1:
                    ttype = np.int8(0) if py < regs_f[F_TTCY] else np.int8(1)
                else:
                    ang2 = math.atan2(py - regs_f[F_TTCY], px - regs_f[F_TTCX])
                    sec = int((ang2 + math.pi) / (2.0 * math.pi) * k)
                    if sec >= k:
                        sec = k - 1
                    ttype = np.int8(sec)

        # -- commit the event
        idx = regs_i[I_NBALLS]
        bx[idx] = x
        by[idx] = y
        br[idx] = r
        bt[idx] = t_next
        btype[idx] = ttype
        regs_i[I_NBALLS] = idx + 1

        g = regs_f[F_G]
        gx = int(math.floor((x - regs_f[F_GOXF]) / g))
        gy = int(math.floor((y - regs_f[F_GOYF]) / g))
        gcell = gy * regs_i[I_NGX] + gx
        gnxt[idx] = ghead[gcell]
        ghead[gcell] = idx

        # conservative covered stamping: cells fully inside the ball
        rin = r - h * 0.7071067811865476
        if rin > 0.0:
            rin2 = rin * rin
            jx0 = max(int(math.floor((x - rin - oxf) / h)), 0)
            jx1 = min(int(math.ceil((x + rin - oxf) / h)), nbx)
            jy0 = max(int(math.floor((y - rin - oyf) / h)), 0)
            jy1 = min(int(math.ceil((y + rin - oyf) / h)), nby)
            for jy in range(jy0, jy1):
                cyc = oyf + (jy + 0.5) * h
                dy2 = (cyc - y) * (cyc - y)
                base = jy * nbx
                for jx in range(jx0, jx1):
                    cxc = oxf + (jx + 0.5) * h
                    dx = cxc - x
                    if dx * dx + dy2 <= rin2:
                        covered[base + jx] = 1

        # bbox update (extents clipped to the window in restricted mode)
        ex0, ex1 = x - r, x + r
        ey0, ey1 = y - r, y + r
        if clipped:
            ex0 = max(ex0, regs_f[F_CX0])
            ex1 = min(ex1, regs_f[F_CX1])
            ey0 = max(ey0, regs_f[F_CY0])
            ey1 = min(ey1, regs_f[F_CY1])
        if ex0 < regs_f[F_BX0]:
            regs_f[F_BX0] = ex0
        if ex1 > regs_f[F_BX1]:
            regs_f[F_BX1] = ex1
        if ey0 < regs_f[F_BY0]:
            regs_f[F_BY0] = ey0
        if ey1 > regs_f[F_BY1]:
            regs_f[F_BY1] = ey1

        # wake candidate cells newly within reach of the occupied region
        reach = r + r0 + h
        regs_i[I_NALIVE] = _wake_cells(alive, regs_i[I_NALIVE], live_mask, nbx, nby,
                                       oxf, oyf, h, x, y, reach)
        jx0 = int(math.floor((x - reach - oxf) / h))
        jx1 = int(math.ceil((x + reach - oxf) / h))
        jy0 = int(math.floor((y - reach - oyf) / h))
        jy1 = int(math.ceil((y + reach - oyf) / h))
        if jx0 < regs_i[I_ECX0]:
            regs_i[I_ECX0] = max(jx0, 0)
        if jx1 > regs_i[I_ECX1]:
            regs_i[I_ECX1] = min(jx1, nbx)
        if jy0 < regs_i[I_ECY0]:
            regs_i[I_ECY0] = max(jy0, 0)
        if jy1 > regs_i[I_ECY1]:
            regs_i[I_ECY1] = min(jy1, nby)

        # -- milestones
        front = ex1
        if front > regs_f[F_FRONT]:
            regs_f[F_FRONT] = front
            if not math.isnan(regs_f[F_HPX]) and math.isnan(regs_f[F_THP]) \
                    and regs_f[F_FRONT] >= regs_f[F_HPX]:
                regs_f[F_THP] = t_next
                if clipped:
                    wall = regs_f[F_WALLM]
                    if y - regs_f[F_CY0] <= wall or regs_f[F_CY1] - y <= wall:
                        regs_i[I_NFRONTWALL] += 1
        if not math.isnan(regs_f[F_PX]) and math.isnan(regs_f[F_TPT]):
            dx = x - regs_f[F_PX]
            dy = y - regs_f[F_PY]
            if dx * dx + dy * dy <= r * r:
                regs_f[F_TPT] = t_next
        if regs_i[I_SEGON] == 1 and math.isnan(regs_f[F_TSEG]):
            zx = regs_f[F_SEGX]
            zy = regs_f[F_SEGY]
            ln = regs_f[F_SEGLEN]
            ux = zx / ln
            uy = zy / ln
            s_mid = x * ux + y * uy
            d2 = (x - s_mid * ux) ** 2 + (y - s_mid * uy) ** 2
            if d2 <= r * r:
                half = math.sqrt(r * r - d2)
                lo = max(s_mid - half, 0.0)
                hi = min(s_mid + half, ln)
                if lo <= hi:
                    regs_i[I_NIV] = _add_interval(ivs, regs_i[I_NIV], lo, hi)
                    if regs_i[I_NIV] > 0 and ivs[0, 0] <= 0.0 and ivs[0, 1] >= ln:
                        regs_f[F_TSEG] = t_next

        # -- stop condition
        done = False
        if stop_kind == STOP_POINT:
            done = not math.isnan(regs_f[F_TPT])
        elif stop_kind == STOP_HALFPLANE:
            done = not math.isnan(regs_f[F_THP])
        elif stop_kind == STOP_SEGMENT:
            done = not math.isnan(regs_f[F_TSEG])
        elif stop_kind == STOP_COUNT:
            done = regs_i[I_NBALLS] >= regs_i[I_STOPN]
        if done:
            regs_i[I_TRIGGER] = idx
            if clipped:
                wall = regs_f[F_WALLM]
                if (y - regs_f[F_CY0] <= wall or regs_f[F_CY1] - y <= wall):
                    regs_i[I_TRIGWALL] = 1
            return ST_DONE

        regs_i[I_SINCE_REBUILD] += 1
        if regs_i[I_SINCE_REBUILD] >= regs_i[I_REBUILD_EVERY]:
            return ST_REBUILD


@njit(cache=True, nogil=True)
def _filter_live(alive, n, mask, covered, nbx, nby, m, outside_covered):
    """Drop live cells whose whole (2m+1)^2 neighbourhood is covered.

    Deadness is monotone (coverage only grows), so filtering the current
    live list is equivalent to re-deriving it from scratch. Early exit on
    the first uncovered neighbour keeps this O(live) in practice.
    """
    k = 0
    for i in range(n):
        cell = alive[i]
        cy = cell // nbx
        cx = cell - cy * nbx
        dead = True
        for jy in range(cy - m, cy + m + 1):
            if jy < 0 or jy >= nby:
                if outside_covered:
                    continue
                dead = False
                break
            base = jy * nbx
            row_dead = True
            for jx in range(cx - m, cx + m + 1):
                if jx < 0 or jx >= nbx:
                    if outside_covered:
                        continue
                    row_dead = False
                    break
                if covered[base + jx] == 0:
                    row_dead = False
                    break
            if not row_dead:
                dead = False
                break
        if dead:
            mask[cell] = 2
        else:
            alive[k] = cell
            k += 1
    return k


@njit(cache=True, nogil=True)
def _rebin(ghead, gnxt, bx, by, n, goxf, goyf, g, ngx):
    for i in range(len(ghead)):
        ghead[i] = -1
    for i in range(n):
        gx = int(math.floor((bx[i] - goxf) / g))
        gy = int(math.floor((by[i] - goyf) / g))
        cell = gy * ngx + gx
        gnxt[i] = ghead[cell]
        ghead[cell] = i


class GrowthEngine:
    """Owns the kernel state for one replica and drives it to the stop."""

    def __init__(self, seed_region: SeedRegion, measure: RadiusMeasure,
                 rng: np.random.Generator, *,
                 stop_kind: int, stop_n: int = 0, stop_t: float = math.nan,
                 window: Window | None = None,
                 track_halfplane_x: float | None = None,
                 track_point: tuple | None = None,
                 track_segment: tuple | None = None,
                 two_type_rule: int | None = None,
                 two_type_center: tuple = (0.0, 0.0),
                 budget: int = 1_000_000_000,
                 rebuild_every: int = 4096,
                 log_candidates: bool = False,
                 prune: bool = True,
                 pause_times=()):
        self.seed_region = seed_region
        self.measure = measure
        self.rng = rng
        self.prune = prune
        self.h = measure.max_radius() / CELLS_PER_R0
        self.g = 2.0 * measure.max_radius()
        self.r0 = measure.max_radius()
        self.clipped = window is not None
        if self.clipped:
            window = window.snapped(self.h)
        self.window = window

        sx0, sx1, sy0, sy1 = seed_region.bbox()
        if self.clipped:
            sx0, sx1 = max(sx0, window.x_lo), min(sx1, window.x_hi)
            sy0, sy1 = max(sy0, window.y_lo), min(sy1, window.y_hi)
        if not all(map(math.isfinite, (sx0, sx1, sy0, sy1))):
            raise InvalidWindowError("an unbounded seed region requires a fixed window")

        self.regs_i = np.zeros(N_IREGS, dtype=np.int64)
        self.regs_f = np.full(N_FREGS, math.nan)
        ri, rf = self.regs_i, self.regs_f
        rf[F_TNOW] = 0.0
        rf[F_H] = self.h
        rf[F_G] = self.g
        rf[F_R0] = self.r0
        rf[F_MASS] = measure.total_mass
        rf[F_WALLM] = 2.0 * self.r0
        ri[I_STOPKIND] = stop_kind
        ri[I_STOPN] = stop_n
        rf[F_STOPT] = stop_t
        ri[I_BUDGET] = budget
        ri[I_REBUILD_EVERY] = rebuild_every
        self.rebuild_every = rebuild_every
        ri[I_TRIGGER] = -1
        ri[I_CLIP] = 1 if self.clipped else 0
        ri[I_CLOGON] = 1 if log_candidates else 0
        rf[F_HPX] = math.nan if track_halfplane_x is None else track_halfplane_x
        rf[F_THP] = math.nan
        rf[F_TPT] = math.nan
        rf[F_TSEG] = math.nan
        if track_point is not None:
            rf[F_PX], rf[F_PY] = track_point
            if seed_region.covers(*track_point) and (
                    window is None or window.contains(*track_point)):
                rf[F_TPT] = 0.0
        if track_segment is not None:
            zx, zy = track_segment
            ri[I_SEGON] = 1
            rf[F_SEGX], rf[F_SEGY] = zx, zy
            rf[F_SEGLEN] = math.hypot(zx, zy)
        if two_type_rule is not None:
            ri[I_TWOTYPE] = 1
            ri[I_SECTORS] = two_type_rule
            rf[F_TTCX], rf[F_TTCY] = two_type_center
        if self.clipped:
            rf[F_CX0], rf[F_CX1] = window.x_lo, window.x_hi
            rf[F_CY0], rf[F_CY1] = window.y_lo, window.y_hi

        rf[F_BX0], rf[F_BX1], rf[F_BY0], rf[F_BY1] = sx0, sx1, sy0, sy1
        rf[F_FRONT] = sx1
        if track_halfplane_x is not None and sx1 >= track_halfplane_x:
            rf[F_THP] = 0.0

        self.seed_kind, self.seed_p = _encode_seed(seed_region, window)
        self.sm_cum, self.sm_kind, self.sm_a, self.sm_b = measure.sampling_tables()

        # segment intervals seeded by the initial region
        self.cap_iv = 64
        self.ivs = np.zeros((self.cap_iv, 2))
        if ri[I_SEGON] == 1:
            init = merge_intervals(seed_region.segment_interval(rf[F_SEGX], rf[F_SEGY]))
            for q, (lo, hi) in enumerate(init):
                self.ivs[q, 0], self.ivs[q, 1] = lo, hi
            ri[I_NIV] = len(init)
            if init and init[0][0] <= 0.0 and init[0][1] >= rf[F_SEGLEN]:
                rf[F_TSEG] = 0.0

        self.pieces = np.zeros((2 * TWO_TYPE_MAX_PARTNERS + 4, 7))
        self.pauses = np.asarray(sorted(pause_times), dtype=np.float64)
        self.cap_balls = 1 << 14
        self._alloc_balls(self.cap_balls)
        self.cap_clog = (1 << 16) if log_candidates else 1
        self.clog = np.zeros((self.cap_clog, 4))
        self.on_pause = None
        self.n_rebuilds = 0
        self._alloc_domain(initial=True)

    # -- allocation ----------------------------------------------------------

    def _alloc_balls(self, cap):
        self.bx = np.zeros(cap)
        self.by = np.zeros(cap)
        self.br = np.zeros(cap)
        self.bt = np.zeros(cap)
        self.btype = np.zeros(cap, dtype=np.int8)
        self.gnxt = np.full(cap, -1, dtype=np.int32)
        self.cap_balls = cap

    def _grow_balls(self):
        old = (self.bx, self.by, self.br, self.bt, self.btype, self.gnxt)
        n = self.regs_i[I_NBALLS]
        self._alloc_balls(self.cap_balls * 2)
        for new, prev in zip((self.bx, self.by, self.br, self.bt, self.btype, self.gnxt), old):
            new[: n] = prev[: n]

    def _domain_target(self):
        """World rect the allocation must cover right now (plus padding)."""
        rf = self.regs_f
        pad = 2.0 * self.r0 + 8.0 * self.h
        if self.clipped:
            return (self.window.x_lo, self.window.x_hi, self.window.y_lo, self.window.y_hi)
        x0 = rf[F_BX0] - self.r0 - pad
        x1 = rf[F_BX1] + self.r0 + pad
        y0 = rf[F_BY0] - self.r0 - pad
        y1 = rf[F_BY1] + self.r0 + pad
        # geometric headroom so reallocations stay rare
        w, hgt = x1 - x0, y1 - y0
        x0, x1 = x0 - 0.25 * w, x1 + 0.25 * w
        y0, y1 = y0 - 0.25 * hgt, y1 + 0.25 * hgt
        if hasattr(self, "covered"):
            # the new allocation must contain the old one so the bitmap copy
            # lands at non-negative offsets
            x0 = min(x0, rf[F_OXF])
            y0 = min(y0, rf[F_OYF])
            x1 = max(x1, rf[F_OXF] + self.regs_i[I_NBX] * self.h)
            y1 = max(y1, rf[F_OYF] + self.regs_i[I_NBY] * self.h)
        return (x0, x1, y0, y1)

    def _alloc_domain(self, initial=False):
        ri, rf = self.regs_i, self.regs_f
        x0, x1, y0, y1 = self._domain_target()
        h = self.h
        oxf = math.floor(x0 / h) * h
        oyf = math.floor(y0 / h) * h
        nbx = int(math.ceil((x1 - oxf) / h))
        nby = int(math.ceil((y1 - oyf) / h))
        new_covered = np.zeros(nbx * nby, dtype=np.uint8)
        new_mask = np.zeros(nbx * nby, dtype=np.uint8)
        if not initial:
            # copy the bitmaps into the new frame and remap live cells
            onbx, onby = int(ri[I_NBX]), int(ri[I_NBY])
            sx = int(round((rf[F_OXF] - oxf) / h))
            sy = int(round((rf[F_OYF] - oyf) / h))
            new_covered.reshape(nby, nbx)[sy: sy + onby, sx: sx + onbx] = \
                self.covered.reshape(onby, onbx)
            new_mask.reshape(nby, nbx)[sy: sy + onby, sx: sx + onbx] = \
                self.live_mask.reshape(onby, onbx)
            n_live = int(ri[I_NALIVE])
            cy, cx = np.divmod(self.alive[:n_live], onbx)
            cells = (cy + sy) * nbx + (cx + sx)
            ri[I_ECX0] += sx
            ri[I_ECX1] += sx
            ri[I_ECY0] += sy
            ri[I_ECY1] += sy
        self.covered = new_covered
        self.live_mask = new_mask
        rf[F_OXF], rf[F_OYF] = oxf, oyf
        ri[I_NBX], ri[I_NBY] = nbx, nby
        if initial:
            cells = self._initial_live_cells()
        self.alive = np.empty(len(cells) + (1 << 16), dtype=np.int64)
        self.alive[: len(cells)] = cells
        ri[I_NALIVE] = len(cells)
        self.live_mask[cells] = 1
        if len(cells):
            cy, cx = np.divmod(np.asarray(cells), nbx)
            ri[I_ECX0], ri[I_ECX1] = int(cx.min()), int(cx.max()) + 1
            ri[I_ECY0], ri[I_ECY1] = int(cy.min()), int(cy.max()) + 1
        else:
            ri[I_ECX0] = ri[I_ECY0] = 0
            ri[I_ECX1] = ri[I_ECY1] = 1

        # ball grid over the same domain
        g = self.g
        goxf = oxf - g
        goyf = oyf - g
        ngx = int(math.ceil((oxf + nbx * h - goxf) / g)) + 2
        ngy = int(math.ceil((oyf + nby * h - goyf) / g)) + 2
        rf[F_GOXF], rf[F_GOYF] = goxf, goyf
        ri[I_NGX], ri[I_NGY] = ngx, ngy
        self.ghead = np.full(ngx * ngy, -1, dtype=np.int32)
        _rebin(self.ghead, self.gnxt, self.bx, self.by, int(ri[I_NBALLS]), goxf, goyf, g, ngx)

        if initial:
            self._stamp_seed()
        self._rebuild()

    def _initial_live_cells(self) -> np.ndarray:
        """Cells whose region could host an accepted candidate at t=0.

        Conservative superset: centres within R0 + h of the seed region
        (intersected with the window in restricted mode).
        """
        ri, rf = self.regs_i, self.regs_f
        nbx, nby = int(ri[I_NBX]), int(ri[I_NBY])
        h, reach = self.h, self.r0 + self.h
        xc = rf[F_OXF] + (np.arange(nbx) + 0.5) * h
        yc = rf[F_OYF] + (np.arange(nby) + 0.5) * h
        near = np.zeros((nby, nbx), dtype=bool)
        parts = self.seed_region.parts if isinstance(self.seed_region, SeedUnion) \
            else (self.seed_region,)
        for p in parts:
            if isinstance(p, HalfPlane):
                near |= (xc <= p.x0 + reach)[None, :]
            elif isinstance(p, Disk):
                if self.clipped and not self.window.contains(p.cx, p.cy):
                    continue
                d2 = (xc[None, :] - p.cx) ** 2 + (yc[:, None] - p.cy) ** 2
                near |= d2 <= (p.r + reach) ** 2
            elif isinstance(p, PointSet):
                for px, py in p.points:
                    if self.clipped and not self.window.contains(px, py):
                        continue
                    d2 = (xc[None, :] - px) ** 2 + (yc[:, None] - py) ** 2
                    near |= d2 <= reach * reach
        return np.flatnonzero(near.reshape(-1))

    def _stamp_seed(self):
        """Mark cells fully inside the initial region as covered."""
        ri, rf = self.regs_i, self.regs_f
        nbx, nby = int(ri[I_NBX]), int(ri[I_NBY])
        oxf, oyf, h = rf[F_OXF], rf[F_OYF], self.h
        cov = self.covered.reshape(nby, nbx)
        parts = self.seed_region.parts if isinstance(self.seed_region, SeedUnion) else (self.seed_region,)
        xc = oxf + (np.arange(nbx) + 0.5) * h
        yc = oyf + (np.arange(nby) + 0.5) * h
        for p in parts:
            if isinstance(p, HalfPlane):
                cov[:, xc + 0.5 * h <= p.x0] = 1
            elif isinstance(p, Disk):
                rin = p.r - h * math.sqrt(0.5)
                if rin > 0:
                    d2 = (xc[None, :] - p.cx) ** 2 + (yc[:, None] - p.cy) ** 2
                    cov[d2 <= rin * rin] = 1

    def _rebuild(self):
        """Drop live cells that joined the dead zone since the last pass."""
        ri = self.regs_i
        if self.prune:
            m = int(math.ceil(self.r0 / self.h))
            n = _filter_live(self.alive, int(ri[I_NALIVE]), self.live_mask,
                             self.covered, int(ri[I_NBX]), int(ri[I_NBY]), m,
                             self.clipped)
            ri[I_NALIVE] = n
        ri[I_SINCE_REBUILD] = 0
        # the filter pass is O(live), so keep the dead zone tight: a stale
        # zone lets redundant bulk acceptances pile up behind the front
        ri[I_REBUILD_EVERY] = max(self.rebuild_every, int(ri[I_NALIVE]) // 16)
        self.n_rebuilds += 1

    # -- main loop -------------------------------------------------------------

    def run(self) -> int:
        """Advance to the stop condition; returns the final kernel status."""
        ri = self.regs_i
        if self._stopped_at_init():
            return ST_DONE
        while True:
            status = _advance(
                ri, self.regs_f, self.rng, self.alive, self.live_mask,
                self.covered, self.ghead, self.gnxt, self.bx, self.by, self.br,
                self.bt, self.btype, self.sm_cum, self.sm_kind, self.sm_a,
                self.sm_b, self.seed_kind, self.seed_p, self.ivs, self.pauses,
                self.clog, self.pieces)
            if status == ST_DONE:
                return status
            if status == ST_REBUILD:
                self._rebuild()
            elif status == ST_GROW_ALLOC:
                self._alloc_domain()
            elif status == ST_GROW_BALLS:
                self._grow_balls()
            elif status == ST_GROW_IV:
                grown = np.zeros((self.cap_iv * 2, 2))
                grown[: self.cap_iv] = self.ivs
                self.ivs = grown
                self.cap_iv *= 2
            elif status == ST_GROW_CLOG:
                grown = np.zeros((self.cap_clog * 2, 4))
                grown[: self.cap_clog] = self.clog
                self.clog = grown
                self.cap_clog *= 2
            elif status == ST_GROW_ALIVE:
                n = int(ri[I_NALIVE])
                grown = np.zeros(2 * len(self.alive) + (1 << 15), dtype=np.int64)
                grown[:n] = self.alive[:n]
                self.alive = grown
            elif status == ST_PAUSE:
                if self.on_pause is not None:
                    self.on_pause(self)
            elif status == ST_DEGENERATE:
                raise DegenerateIntersectionError(
                    f"parent sampling exhausted {TWO_TYPE_TRIALS} trials "
                    f"(thin intersection; triangle-condition seed recommended)")
            else:  # ST_BUDGET
                return status

    def _stopped_at_init(self) -> bool:
        ri, rf = self.regs_i, self.regs_f
        kind = ri[I_STOPKIND]
        if kind == STOP_HALFPLANE:
            return not math.isnan(rf[F_THP])
        if kind == STOP_POINT:
            return not math.isnan(rf[F_TPT])
        if kind == STOP_SEGMENT:
            return not math.isnan(rf[F_TSEG])
        if kind == STOP_COUNT:
            return ri[I_STOPN] <= 0
        return False

    # -- views -------------------------------------------------------------

    @property
    def n_events(self) -> int:
        return int(self.regs_i[I_NBALLS])

    def log_arrays(self):
        n = self.n_events
        return self.bt[:n].copy(), self.bx[:n].copy(), self.by[:n].copy(), self.br[:n].copy()

    def candidate_log(self):
        return self.clog[: int(self.regs_i[I_NCLOG])].copy()

    def milestones(self) -> dict:
        rf = self.regs_f

        def val(v):
            return None if math.isnan(v) else float(v)

        return {
            "halfplane": val(rf[F_THP]),
            "point": val(rf[F_TPT]),
            "segment": val(rf[F_TSEG]),
            "front_x": float(rf[F_FRONT]),
        }

    @property
    def truncated(self) -> bool:
        return bool(self.regs_i[I_NFRONTWALL] > 0 or self.regs_i[I_TRIGWALL] == 1)


def _encode_seed(seed: SeedRegion, window: Window | None):
    parts = seed.parts if isinstance(seed, SeedUnion) else (seed,)
    kinds, params = [], []
    for p in parts:
        if isinstance(p, HalfPlane):
            kinds.append(SEED_HALFPLANE)
            params.append((p.x0, 0.0, 0.0))
        elif isinstance(p, Disk):
            if window is not None and not window.contains(p.cx, p.cy):
                raise InvalidWindowError("disk seed centre must lie inside the window")
            kinds.append(SEED_DISK)
            params.append((p.cx, p.cy, p.r))
        elif isinstance(p, PointSet):
            for px, py in p.points:
                if window is not None and not window.contains(px, py):
                    continue  # E intersected with the window drops the point
                kinds.append(SEED_POINT)
                params.append((px, py, 0.0))
        else:
            raise TypeError(f"unsupported seed region {type(p)}")
    if not kinds:
        kinds, params = [SEED_POINT], [(math.inf, math.inf, 0.0)]  # empty seed
    return np.asarray(kinds, dtype=np.uint8), np.asarray(params, dtype=np.float64)

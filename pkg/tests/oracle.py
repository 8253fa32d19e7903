"""Independent scalar re-evaluation of the coverage objective.

Used by the tests as a second route to the same numbers: plain Python floats
and math-module calls, voxel by voxel, no numpy in the arithmetic and no code
shared with the package.  Deliberately slow and literal.
"""

import math

TOTAL_VOXELS = 27_000


def bilinear(alts, cell_size, x, y):
    """alts is a list of rows, row index growing northward (y-up)."""
    h = len(alts)
    w = len(alts[0])
    u = x / cell_size - 0.5
    v = y / cell_size - 0.5
    i0 = int(math.floor(u))
    j0 = int(math.floor(v))
    if i0 < 0:
        i0 = 0
    elif i0 > w - 2:
        i0 = w - 2
    if j0 < 0:
        j0 = 0
    elif j0 > h - 2:
        j0 = h - 2
    fu = u - i0
    fv = v - j0
    if fu < 0.0:
        fu = 0.0
    elif fu > 1.0:
        fu = 1.0
    if fv < 0.0:
        fv = 0.0
    elif fv > 1.0:
        fv = 1.0
    lo = (1.0 - fu) * alts[j0][i0] + fu * alts[j0][i0 + 1]
    hi = (1.0 - fu) * alts[j0 + 1][i0] + fu * alts[j0 + 1][i0 + 1]
    return (1.0 - fv) * lo + fv * hi


def los_clear(alts, cell_size, x0, y0, z0, x1, y1, z1):
    dx = x1 - x0
    dy = y1 - y0
    dist = math.sqrt(dx * dx + dy * dy)
    nseg = int(math.ceil(dist / (cell_size * 0.5)))
    if nseg <= 1:
        return True
    dz = z1 - z0
    for j in range(1, nseg):
        t = j / nseg
        zt = bilinear(alts, cell_size, x0 + t * dx, y0 + t * dy)
        if zt >= z0 + t * dz:
            return False
    return True


def bearing_deg(dx, dy):
    b = math.atan2(dx, dy) * (180.0 / math.pi)
    if b < 0.0:
        b += 360.0
    return b


def circ_diff_deg(a, b):
    d = (a - b + 180.0) % 360.0
    return abs(d - 180.0)


def single_pd(alts, cell_size, phys, radar, zr, ix, iy, theta, los_cache):
    """Detection probability of one radar for the voxel (ix, iy, theta).

    phys: dict of RadarPhysics fields.  radar: dict with kind ("rotating" or
    "staring"), x, y, tilt, staring_angle.  zr: precomputed antenna altitude.
    """
    tx = (ix + 0.5) * cell_size
    ty = (iy + 0.5) * cell_size
    zt = alts[iy][ix] + phys["object_altitude_agl"]
    dx = tx - radar["x"]
    dy = ty - radar["y"]
    dz = zt - zr

    staring = radar["kind"] == "staring"
    if staring:
        if circ_diff_deg(bearing_deg(dx, dy), radar["staring_angle"]) \
                > phys["staring_sector"] * 0.5:
            return 0.0

    dist2 = math.sqrt(dx * dx + dy * dy)
    elev = math.atan2(dz, dist2) * (180.0 / math.pi)
    if elev < radar["tilt"] - phys["vertical_beamwidth"] * 0.5 \
            or elev > radar["tilt"] + phys["vertical_beamwidth"] * 0.5:
        return 0.0

    key = (id(radar), ix, iy)
    hit = los_cache.get(key)
    if hit is None:
        hit = los_clear(alts, cell_size, radar["x"], radar["y"], zr, tx, ty, zt)
        los_cache[key] = hit
    if not hit:
        return 0.0

    r3 = math.sqrt(dx * dx + dy * dy + dz * dz)
    rr = r3 if r3 > 1.0 else 1.0
    snr_ref = phys["snr_ref_staring"] if staring else phys["snr_ref_rotating"]
    aspect = bearing_deg(-dx, -dy)
    snr = (snr_ref - 40.0 * math.log10(rr / phys["reference_range"])
           + phys["rcs_modulation"] * math.cos((theta - aspect) * (math.pi / 180.0)))
    return 1.0 / (1.0 + math.exp(-phys["sigmoid_slope"] * (snr - phys["snr_50"])))


def coverage_count(alts, cell_size, phys, radars, tau):
    """(covered, cover) where cover[itheta][iy][ix] is the boolean map."""
    h = len(alts)
    w = len(alts[0])
    zrs = [bilinear(alts, cell_size, r["x"], r["y"]) + phys["antenna_height"]
           for r in radars]
    los_cache = {}
    covered = 0
    cover = [[[False] * w for _ in range(h)] for _ in range(30)]
    for it in range(30):
        theta = (it + 0.5) * 12.0
        for iy in range(h):
            for ix in range(w):
                prod = 1.0
                for radar, zr in zip(radars, zrs):
                    pd = single_pd(alts, cell_size, phys, radar, zr,
                                   ix, iy, theta, los_cache)
                    prod *= (1.0 - pd)
                if (1.0 - prod) >= tau:
                    cover[it][iy][ix] = True
                    covered += 1
    return covered, cover


def physics_dict(physics):
    """RadarPhysics -> plain dict for the functions above."""
    return {
        "antenna_height": physics.antenna_height,
        "object_altitude_agl": physics.object_altitude_agl,
        "vertical_beamwidth": physics.vertical_beamwidth,
        "staring_sector": physics.staring_sector,
        "reference_range": physics.reference_range,
        "snr_ref_rotating": physics.snr_ref_rotating,
        "snr_ref_staring": physics.snr_ref_staring,
        "snr_50": physics.snr_50,
        "sigmoid_slope": physics.sigmoid_slope,
        "rcs_modulation": physics.rcs_modulation,
    }


def radar_dicts(config):
    """NetworkConfig -> list of plain radar dicts."""
    out = []
    for r in config.radars:
        out.append({
            "kind": "staring" if r.kind == 1 else "rotating",
            "x": r.x, "y": r.y, "tilt": r.tilt,
            "staring_angle": r.staring_angle,
        })
    return out


def oracle_coverage(instance, config):
    """Convenience wrapper taking package objects, returning (covered, map)."""
    alts = [list(map(float, row)) for row in instance.grid.altitudes]
    return coverage_count(alts, instance.grid.cell_size,
                          physics_dict(instance.physics),
                          radar_dicts(config), instance.tau)

"""NumPy reference kernels for the Yee/CPML updates.

These are the fallback backend and the semantic ground truth: the
compiled kernels in _stencil.pyx evaluate the same expression trees per
cell and must produce bitwise-identical fields (the suite asserts exact
equality on random data). Keep expression order in sync between the two.

Field arrays are padded with one ghost plane on every side; bounds are
(i0, i1, j0, j1, k0, k1) half-open index ranges into the padded arrays.
"""

from __future__ import annotations

BACKEND = "numpy"


def _s(b):
    return slice(b[0], b[1]), slice(b[2], b[3]), slice(b[4], b[5])


def _shift(b, axis, off):
    lo, hi = b[2 * axis] + off, b[2 * axis + 1] + off
    idx = [slice(b[0], b[1]), slice(b[2], b[3]), slice(b[4], b[5])]
    idx[axis] = slice(lo, hi)
    return tuple(idx)


def update_e(ex, ey, ez, hx, hy, hz, aex, aey, aez, ik_x, ik_y, ik_z, bounds):
    b = bounds["ex"]
    c = _s(b)
    ex[c] += aex[c] * (
        (hz[c] - hz[_shift(b, 1, -1)]) * ik_y[b[2] : b[3]][None, :, None]
        - (hy[c] - hy[_shift(b, 2, -1)]) * ik_z[b[4] : b[5]][None, None, :]
    )
    b = bounds["ey"]
    c = _s(b)
    ey[c] += aey[c] * (
        (hx[c] - hx[_shift(b, 2, -1)]) * ik_z[b[4] : b[5]][None, None, :]
        - (hz[c] - hz[_shift(b, 0, -1)]) * ik_x[b[0] : b[1]][:, None, None]
    )
    b = bounds["ez"]
    c = _s(b)
    ez[c] += aez[c] * (
        (hy[c] - hy[_shift(b, 0, -1)]) * ik_x[b[0] : b[1]][:, None, None]
        - (hx[c] - hx[_shift(b, 1, -1)]) * ik_y[b[2] : b[3]][None, :, None]
    )


def update_h(ex, ey, ez, hx, hy, hz, dt, ik_x, ik_y, ik_z, bounds):
    b = bounds["hx"]
    c = _s(b)
    hx[c] += dt * (
        (ey[_shift(b, 2, 1)] - ey[c]) * ik_z[b[4] : b[5]][None, None, :]
        - (ez[_shift(b, 1, 1)] - ez[c]) * ik_y[b[2] : b[3]][None, :, None]
    )
    b = bounds["hy"]
    c = _s(b)
    hy[c] += dt * (
        (ez[_shift(b, 0, 1)] - ez[c]) * ik_x[b[0] : b[1]][:, None, None]
        - (ex[_shift(b, 2, 1)] - ex[c]) * ik_z[b[4] : b[5]][None, None, :]
    )
    b = bounds["hz"]
    c = _s(b)
    hz[c] += dt * (
        (ex[_shift(b, 1, 1)] - ex[c]) * ik_y[b[2] : b[3]][None, :, None]
        - (ey[_shift(b, 0, 1)] - ey[c]) * ik_x[b[0] : b[1]][:, None, None]
    )


def _plane(arr, axis, idx, b1, b2):
    sl = [None, None, None]
    sl["xyz".index("xyz"[axis])] = idx
    out = [slice(b1[0], b1[1]), slice(b2[0], b2[1])]
    out.insert(axis, idx)
    return arr[tuple(out)]


def _tb(bounds, comp, axis):
    """Transverse (j, k) bound pairs of a component, skipping `axis`."""
    b = bounds[comp]
    pairs = [(b[0], b[1]), (b[2], b[3]), (b[4], b[5])]
    return [p for i, p in enumerate(pairs) if i != axis]


def cpml_update_e(ex, ey, ez, hx, hy, hz, aex, aey, aez, face, psi1, psi2, bounds):
    """Apply one absorbing face to the two E components it affects.

    Face on axis x acts on (Ey via psi1=psi_eyx with -, Ez via psi2=psi_ezx
    with +); axis y on (Ez -, Ex +); axis z on (Ex -, Ey +). The psi arrays
    are indexed [t, transverse, transverse] with t the slab plane offset.
    """
    ax = face.axis
    comps = {
        0: (("ey", ey, aey, hz, -1.0), ("ez", ez, aez, hy, +1.0)),
        1: (("ez", ez, aez, hx, -1.0), ("ex", ex, aex, hz, +1.0)),
        2: (("ex", ex, aex, hy, -1.0), ("ey", ey, aey, hx, +1.0)),
    }[ax]
    for (name, e, a, h, sign), psi in zip(comps, (psi1, psi2)):
        (t10, t11), (t20, t21) = _tb(bounds, name, ax)
        for t in range(face.thickness):
            i = face.start_e + t
            idx = [slice(t10, t11), slice(t20, t21)]
            idx.insert(ax, i)
            idx = tuple(idx)
            prev = [slice(t10, t11), slice(t20, t21)]
            prev.insert(ax, i - 1)
            prev = tuple(prev)
            ps = psi[t, t10:t11, t20:t21]
            ps *= face.b_e[t]
            ps += face.c_e[t] * (h[idx] - h[prev])
            e[idx] += sign * (a[idx] * ps)


def cpml_update_h(ex, ey, ez, hx, hy, hz, dt, face, psi1, psi2, bounds):
    """Apply one absorbing face to the two H components it affects.

    Axis x: (Hy via psi1 with +, Hz via psi2 with -); axis y: (Hz +, Hx -);
    axis z: (Hx +, Hy -).
    """
    ax = face.axis
    comps = {
        0: (("hy", hy, ez, +1.0), ("hz", hz, ey, -1.0)),
        1: (("hz", hz, ex, +1.0), ("hx", hx, ez, -1.0)),
        2: (("hx", hx, ey, +1.0), ("hy", hy, ex, -1.0)),
    }[ax]
    for (name, h, e, sign), psi in zip(comps, (psi1, psi2)):
        (t10, t11), (t20, t21) = _tb(bounds, name, ax)
        for t in range(face.thickness):
            i = face.start_h + t
            idx = [slice(t10, t11), slice(t20, t21)]
            idx.insert(ax, i)
            idx = tuple(idx)
            nxt = [slice(t10, t11), slice(t20, t21)]
            nxt.insert(ax, i + 1)
            nxt = tuple(nxt)
            ps = psi[t, t10:t11, t20:t21]
            ps *= face.b_h[t]
            ps += face.c_h[t] * (e[nxt] - e[idx])
            h[idx] += sign * (dt * ps)

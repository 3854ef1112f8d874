# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Yee/CPML kernels.

Semantics mirror kernels_py expression-for-expression; built with
-ffp-contract=off so results are bitwise identical to the NumPy backend
(asserted by the test suite). Inner loops release the GIL so chunked
updates can run on a thread pool.
"""

import numpy as np

cimport numpy as cnp

BACKEND = "compiled"

ctypedef double f8


cdef void _e_comp(f8[:, :, ::1] e, f8[:, :, ::1] a,
                  f8[:, :, ::1] h1, f8[:, :, ::1] h2,
                  f8[::1] ik1, f8[::1] ik2,
                  int d1, int d2,
                  Py_ssize_t i0, Py_ssize_t i1, Py_ssize_t j0, Py_ssize_t j1,
                  Py_ssize_t k0, Py_ssize_t k1) noexcept nogil:
    # e += a * ((h1 - h1[shift -1 on d1]) * ik1 - (h2 - h2[shift -1 on d2]) * ik2)
    # d1/d2 select the difference axis (0=x, 1=y, 2=z) for each curl term
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t s1i = 1 if d1 == 0 else 0
    cdef Py_ssize_t s1j = 1 if d1 == 1 else 0
    cdef Py_ssize_t s1k = 1 if d1 == 2 else 0
    cdef Py_ssize_t s2i = 1 if d2 == 0 else 0
    cdef Py_ssize_t s2j = 1 if d2 == 1 else 0
    cdef Py_ssize_t s2k = 1 if d2 == 2 else 0
    cdef f8 t1, t2, w1, w2
    for i in range(i0, i1):
        for j in range(j0, j1):
            for k in range(k0, k1):
                w1 = ik1[i] if d1 == 0 else (ik1[j] if d1 == 1 else ik1[k])
                w2 = ik2[i] if d2 == 0 else (ik2[j] if d2 == 1 else ik2[k])
                t1 = (h1[i, j, k] - h1[i - s1i, j - s1j, k - s1k]) * w1
                t2 = (h2[i, j, k] - h2[i - s2i, j - s2j, k - s2k]) * w2
                e[i, j, k] = e[i, j, k] + a[i, j, k] * (t1 - t2)


cdef void _h_comp(f8[:, :, ::1] h, f8 dt,
                  f8[:, :, ::1] e1, f8[:, :, ::1] e2,
                  f8[::1] ik1, f8[::1] ik2,
                  int d1, int d2,
                  Py_ssize_t i0, Py_ssize_t i1, Py_ssize_t j0, Py_ssize_t j1,
                  Py_ssize_t k0, Py_ssize_t k1) noexcept nogil:
    # h += dt * ((e1[shift +1 on d1] - e1) * ik1 - (e2[shift +1 on d2] - e2) * ik2)
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t s1i = 1 if d1 == 0 else 0
    cdef Py_ssize_t s1j = 1 if d1 == 1 else 0
    cdef Py_ssize_t s1k = 1 if d1 == 2 else 0
    cdef Py_ssize_t s2i = 1 if d2 == 0 else 0
    cdef Py_ssize_t s2j = 1 if d2 == 1 else 0
    cdef Py_ssize_t s2k = 1 if d2 == 2 else 0
    cdef f8 t1, t2, w1, w2
    for i in range(i0, i1):
        for j in range(j0, j1):
            for k in range(k0, k1):
                w1 = ik1[i] if d1 == 0 else (ik1[j] if d1 == 1 else ik1[k])
                w2 = ik2[i] if d2 == 0 else (ik2[j] if d2 == 1 else ik2[k])
                t1 = (e1[i + s1i, j + s1j, k + s1k] - e1[i, j, k]) * w1
                t2 = (e2[i + s2i, j + s2j, k + s2k] - e2[i, j, k]) * w2
                h[i, j, k] = h[i, j, k] + dt * (t1 - t2)


def update_e(ex, ey, ez, hx, hy, hz, aex, aey, aez, ik_x, ik_y, ik_z, bounds):
    cdef f8[:, :, ::1] _ex = ex, _ey = ey, _ez = ez
    cdef f8[:, :, ::1] _hx = hx, _hy = hy, _hz = hz
    cdef f8[:, :, ::1] _ax = aex, _ay = aey, _az = aez
    cdef f8[::1] ikx = ik_x, iky = ik_y, ikz = ik_z
    cdef Py_ssize_t i0, i1, j0, j1, k0, k1
    i0, i1, j0, j1, k0, k1 = bounds["ex"]
    with nogil:
        _e_comp(_ex, _ax, _hz, _hy, iky, ikz, 1, 2, i0, i1, j0, j1, k0, k1)
    i0, i1, j0, j1, k0, k1 = bounds["ey"]
    with nogil:
        _e_comp(_ey, _ay, _hx, _hz, ikz, ikx, 2, 0, i0, i1, j0, j1, k0, k1)
    i0, i1, j0, j1, k0, k1 = bounds["ez"]
    with nogil:
        _e_comp(_ez, _az, _hy, _hx, ikx, iky, 0, 1, i0, i1, j0, j1, k0, k1)


def update_h(ex, ey, ez, hx, hy, hz, dt, ik_x, ik_y, ik_z, bounds):
    cdef f8[:, :, ::1] _ex = ex, _ey = ey, _ez = ez
    cdef f8[:, :, ::1] _hx = hx, _hy = hy, _hz = hz
    cdef f8[::1] ikx = ik_x, iky = ik_y, ikz = ik_z
    cdef f8 _dt = dt
    cdef Py_ssize_t i0, i1, j0, j1, k0, k1
    i0, i1, j0, j1, k0, k1 = bounds["hx"]
    with nogil:
        _h_comp(_hx, _dt, _ey, _ez, ikz, iky, 2, 1, i0, i1, j0, j1, k0, k1)
    i0, i1, j0, j1, k0, k1 = bounds["hy"]
    with nogil:
        _h_comp(_hy, _dt, _ez, _ex, ikx, ikz, 0, 2, i0, i1, j0, j1, k0, k1)
    i0, i1, j0, j1, k0, k1 = bounds["hz"]
    with nogil:
        _h_comp(_hz, _dt, _ex, _ey, iky, ikx, 1, 0, i0, i1, j0, j1, k0, k1)


cdef void _cpml_e_plane(f8[:, :, ::1] e, f8[:, :, ::1] a, f8[:, :, ::1] h,
                        f8[:, :, ::1] psi, f8 b, f8 c, f8 sign,
                        int axis, Py_ssize_t plane, Py_ssize_t t,
                        Py_ssize_t u0, Py_ssize_t u1,
                        Py_ssize_t v0, Py_ssize_t v1) noexcept nogil:
    # psi[t] = b*psi[t] + c*(h[plane] - h[plane-1]); e[plane] += sign*a*psi
    cdef Py_ssize_t u, v
    cdef f8 d, p
    for u in range(u0, u1):
        for v in range(v0, v1):
            if axis == 0:
                d = h[plane, u, v] - h[plane - 1, u, v]
                p = b * psi[t, u, v] + c * d
                psi[t, u, v] = p
                e[plane, u, v] = e[plane, u, v] + sign * (a[plane, u, v] * p)
            elif axis == 1:
                d = h[u, plane, v] - h[u, plane - 1, v]
                p = b * psi[t, u, v] + c * d
                psi[t, u, v] = p
                e[u, plane, v] = e[u, plane, v] + sign * (a[u, plane, v] * p)
            else:
                d = h[u, v, plane] - h[u, v, plane - 1]
                p = b * psi[t, u, v] + c * d
                psi[t, u, v] = p
                e[u, v, plane] = e[u, v, plane] + sign * (a[u, v, plane] * p)


cdef void _cpml_h_plane(f8[:, :, ::1] h, f8 dt, f8[:, :, ::1] e,
                        f8[:, :, ::1] psi, f8 b, f8 c, f8 sign,
                        int axis, Py_ssize_t plane, Py_ssize_t t,
                        Py_ssize_t u0, Py_ssize_t u1,
                        Py_ssize_t v0, Py_ssize_t v1) noexcept nogil:
    # psi[t] = b*psi[t] + c*(e[plane+1] - e[plane]); h[plane] += sign*dt*psi
    cdef Py_ssize_t u, v
    cdef f8 d, p
    for u in range(u0, u1):
        for v in range(v0, v1):
            if axis == 0:
                d = e[plane + 1, u, v] - e[plane, u, v]
                p = b * psi[t, u, v] + c * d
                psi[t, u, v] = p
                h[plane, u, v] = h[plane, u, v] + sign * (dt * p)
            elif axis == 1:
                d = e[u, plane + 1, v] - e[u, plane, v]
                p = b * psi[t, u, v] + c * d
                psi[t, u, v] = p
                h[u, plane, v] = h[u, plane, v] + sign * (dt * p)
            else:
                d = e[u, v, plane + 1] - e[u, v, plane]
                p = b * psi[t, u, v] + c * d
                psi[t, u, v] = p
                h[u, v, plane] = h[u, v, plane] + sign * (dt * p)


def _transverse_bounds(bounds, comp, axis):
    b = bounds[comp]
    pairs = [(b[0], b[1]), (b[2], b[3]), (b[4], b[5])]
    return [p for i, p in enumerate(pairs) if i != axis]


def cpml_update_e(ex, ey, ez, hx, hy, hz, aex, aey, aez, face, psi1, psi2, bounds):
    cdef f8[:, :, ::1] _psi
    cdef f8[:, :, ::1] _e, _a, _h
    cdef int axis = face.axis
    cdef Py_ssize_t t, plane
    arrays = {"ex": (ex, aex), "ey": (ey, aey), "ez": (ez, aez)}
    hmap = {"hx": hx, "hy": hy, "hz": hz}
    comps = {
        0: (("ey", "hz", -1.0), ("ez", "hy", 1.0)),
        1: (("ez", "hx", -1.0), ("ex", "hz", 1.0)),
        2: (("ex", "hy", -1.0), ("ey", "hx", 1.0)),
    }[axis]
    cdef f8 bcoef, ccoef, sign
    cdef Py_ssize_t u0, u1, v0, v1
    for (ename, hname, sgn), psi in zip(comps, (psi1, psi2)):
        (u0, u1), (v0, v1) = _transverse_bounds(bounds, ename, axis)
        _e, _a = arrays[ename]
        _h = hmap[hname]
        _psi = psi
        sign = sgn
        for t in range(face.thickness):
            plane = face.start_e + t
            bcoef = face.b_e[t]
            ccoef = face.c_e[t]
            with nogil:
                _cpml_e_plane(_e, _a, _h, _psi, bcoef, ccoef, sign,
                              axis, plane, t, u0, u1, v0, v1)


def cpml_update_h(ex, ey, ez, hx, hy, hz, dt, face, psi1, psi2, bounds):
    cdef f8[:, :, ::1] _psi
    cdef f8[:, :, ::1] _h, _e
    cdef int axis = face.axis
    cdef Py_ssize_t t, plane
    cdef f8 _dt = dt
    hmap = {"hx": hx, "hy": hy, "hz": hz}
    emap = {"ex": ex, "ey": ey, "ez": ez}
    comps = {
        0: (("hy", "ez", 1.0), ("hz", "ey", -1.0)),
        1: (("hz", "ex", 1.0), ("hx", "ez", -1.0)),
        2: (("hx", "ey", 1.0), ("hy", "ex", -1.0)),
    }[axis]
    cdef f8 bcoef, ccoef, sign
    cdef Py_ssize_t u0, u1, v0, v1
    for (hname, ename, sgn), psi in zip(comps, (psi1, psi2)):
        (u0, u1), (v0, v1) = _transverse_bounds(bounds, hname, axis)
        _h = hmap[hname]
        _e = emap[ename]
        _psi = psi
        sign = sgn
        for t in range(face.thickness):
            plane = face.start_h + t
            bcoef = face.b_h[t]
            ccoef = face.c_h[t]
            with nogil:
                _cpml_h_plane(_h, _dt, _e, _psi, bcoef, ccoef, sign,
                              axis, plane, t, u0, u1, v0, v1)

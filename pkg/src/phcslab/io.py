"""File formats: the PHCF binary field container and the CSV tables.

PHCF layout (little-endian): 4-byte magic "PHCF", u32 version (1),
u32 Nx, Ny, Nz, u32 component count, f64 dx_nm, then each component
row-major with index (ix*Ny + iy)*Nz + iz as f64. Trivially parseable
anywhere; round-trips byte-exactly.

CSV conventions: header row mandatory, '.' decimal separator, newline
terminated rows, floats written with shortest round-trip repr so files
are byte-stable across runs.
"""

from __future__ import annotations

import csv
import struct

import numpy as np

PHCF_MAGIC = b"PHCF"
PHCF_VERSION = 1


def write_phcf(path, arrays, dx_nm: float):
    """Write field component arrays (all same shape) to a PHCF file."""
    arrays = [np.ascontiguousarray(a, dtype="<f8") for a in arrays]
    if not arrays:
        raise ValueError("need at least one component array")
    shape = arrays[0].shape
    if len(shape) != 3 or any(a.shape != shape for a in arrays):
        raise ValueError("all components must share one 3D shape")
    with open(path, "wb") as fh:
        fh.write(PHCF_MAGIC)
        fh.write(struct.pack("<IIIII", PHCF_VERSION, *shape, len(arrays)))
        fh.write(struct.pack("<d", float(dx_nm)))
        for a in arrays:
            fh.write(a.tobytes(order="C"))


def read_phcf(path):
    """Read a PHCF file; returns (list of arrays, dx_nm)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != PHCF_MAGIC:
            raise ValueError(f"not a PHCF file (magic {magic!r})")
        version, nx, ny, nz, ncomp = struct.unpack("<IIIII", fh.read(20))
        if version != PHCF_VERSION:
            raise ValueError(f"unsupported PHCF version {version}")
        (dx_nm,) = struct.unpack("<d", fh.read(8))
        count = nx * ny * nz
        arrays = []
        for _ in range(ncomp):
            buf = fh.read(8 * count)
            if len(buf) != 8 * count:
                raise ValueError("truncated PHCF payload")
            arrays.append(np.frombuffer(buf, dtype="<f8").reshape(nx, ny, nz).copy())
        return arrays, dx_nm


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def write_holes_csv(path, holes):
    write_csv(path, ["x_nm", "y_nm", "r_nm"], [tuple(row) for row in holes])


def write_timeseries_csv(path, steps, t_fs, values):
    write_csv(
        path,
        ["step", "t_fs", "value"],
        zip(steps.tolist(), t_fs.tolist(), values.tolist()),
    )


def read_timeseries_csv(path):
    steps, t_fs, values = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            steps.append(int(row["step"]))
            t_fs.append(float(row["t_fs"]))
            values.append(float(row["value"]))
    return np.asarray(steps), np.asarray(t_fs), np.asarray(values)


def write_modes_csv(path, modes, volume=None, purcell=None):
    """Modes table; Vm and Purcell columns filled on the first row when known."""
    rows = []
    for i, m in enumerate(modes):
        vm = volume.Vm_normalized if (i == 0 and volume is not None) else None
        fp = purcell if i == 0 else None
        rows.append((m.wavelength, m.Q, m.amplitude, m.phase, vm, fp))
    write_csv(
        path,
        ["wavelength_nm", "Q", "amplitude", "phase_rad", "Vm_lambda_n3", "purcell"],
        rows,
    )


def read_modes_csv(path):
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                {
                    "wavelength_nm": float(row["wavelength_nm"]),
                    "Q": float(row["Q"]),
                    "amplitude": float(row["amplitude"]),
                    "phase_rad": float(row["phase_rad"]),
                    "Vm_lambda_n3": float(row["Vm_lambda_n3"]) if row["Vm_lambda_n3"] else None,
                    "purcell": float(row["purcell"]) if row["purcell"] else None,
                }
            )
    return out


def write_spectrum_csv(path, spectrum):
    write_csv(
        path,
        ["wavelength_nm", "amplitude"],
        zip(spectrum.wavelength.tolist(), spectrum.amplitude.tolist()),
    )


def write_bands_csv(path, diagram):
    rows = []
    nk, nb = diagram.frequencies.shape
    for ik in range(nk):
        for band in range(nb):
            rows.append(
                (ik, diagram.k_path_fraction[ik], band, diagram.frequencies[ik, band])
            )
    write_csv(path, ["k_index", "k_frac_path", "band_index", "a_over_lambda"], rows)


def write_gaps_csv(path, rows):
    write_csv(path, ["r_over_a", "gap_lo", "gap_hi"], rows)


def write_sweep_csv(path, rows):
    write_csv(
        path,
        ["value", "wavelength_nm", "Q", "Vm_lambda_n3", "purcell", "error"],
        rows,
    )

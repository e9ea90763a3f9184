"""Uniform periodic grids on [-box, box)^n and sampled vector fields."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import ShapeMismatchError

MAGIC = b"OPGF"
VERSION = 1


@dataclass(frozen=True, eq=False)
class GridField:
    """Values have shape ``(dim, N, ..., N)``; node j sits at ``-box + j h``.

    With ``cell_centered`` the nodes are shifted by half a cell.
    """

    n: int
    box_halfwidth: float
    points_per_axis: int
    values: np.ndarray
    origin_excluded: bool = False
    cell_centered: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values)
        expect = (self.points_per_axis,) * self.n
        if v.ndim != self.n + 1 or v.shape[1:] != expect:
            raise ShapeMismatchError(f"values must have shape (dim, {', '.join(map(str, expect))}), got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return 2 * self.box_halfwidth / self.points_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.n

    def axis(self) -> np.ndarray:
        return axis_points(self.points_per_axis, self.box_halfwidth, self.cell_centered)

    def coords(self) -> list[np.ndarray]:
        a = self.axis()
        return np.meshgrid(*([a] * self.n), indexing="ij")

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords()))

    def with_values(self, values, **changes) -> GridField:
        params = dict(
            n=self.n,
            box_halfwidth=self.box_halfwidth,
            points_per_axis=self.points_per_axis,
            values=values,
            origin_excluded=self.origin_excluded,
            cell_centered=self.cell_centered,
        )
        params.update(changes)
        return GridField(**params)

    def sample(self, points: np.ndarray) -> np.ndarray:
        """Periodic cubic interpolation at physical points of shape (n, m)."""
        idx = (np.asarray(points) + self.box_halfwidth) / self.spacing
        if self.cell_centered:
            idx = idx - 0.5
        return np.stack([map_coordinates(c, idx, order=3, mode="grid-wrap") for c in self.values])

    # -- binary export -----------------------------------------------------

    def save(self, path: str | Path) -> tuple[Path, Path]:
        path = Path(path)
        header = MAGIC + struct.pack("<IIIId", VERSION, self.n, self.dim, self.points_per_axis, self.box_halfwidth)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
        sidecar = path.with_suffix(path.suffix + ".json")
        info = {
            "format": "OPGF",
            "version": VERSION,
            "n": self.n,
            "dim": self.dim,
            "points_per_axis": self.points_per_axis,
            "box_halfwidth": self.box_halfwidth,
            "origin_excluded": self.origin_excluded,
            "cell_centered": self.cell_centered,
            "layout": "C order, component axis first, little-endian float64",
            "meta": _jsonable(self.meta),
        }
        sidecar.write_text(json.dumps(info, sort_keys=True, indent=2))
        return path, sidecar

    @classmethod
    def load(cls, path: str | Path) -> GridField:
        path = Path(path)
        raw = path.read_bytes()
        size = 4 + struct.calcsize("<IIIId")
        if raw[:4] != MAGIC:
            raise ValueError("not an OPGF grid file")
        version, n, dim, npts, box = struct.unpack("<IIIId", raw[4:size])
        if version != VERSION:
            raise ValueError(f"unsupported grid file version {version}")
        values = np.frombuffer(raw[size:], dtype="<f8").reshape((dim,) + (npts,) * n).copy()
        flags = {}
        sidecar = path.with_suffix(path.suffix + ".json")
        if sidecar.exists():
            info = json.loads(sidecar.read_text())
            flags = {"origin_excluded": info.get("origin_excluded", False), "cell_centered": info.get("cell_centered", False)}
        return cls(n, box, npts, values, **flags)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def axis_points(npts: int, box: float, cell_centered: bool = False) -> np.ndarray:
    h = 2 * box / npts
    return -box + h * (np.arange(npts) + (0.5 if cell_centered else 0.0))


def wavenumbers(n: int, npts: int, box: float) -> list[np.ndarray]:
    k = 2 * np.pi * np.fft.fftfreq(npts, 2 * box / npts)
    return np.meshgrid(*([k] * n), indexing="ij")


def spectral_monomials(exps, n: int, npts: int, box: float) -> np.ndarray:
    """(i xi)^beta on the FFT grid for each exponent; zeroes the Nyquist planes for odd powers."""
    ks = wavenumbers(n, npts, box)
    out = []
    for beta in exps:
        m = np.ones((npts,) * n, dtype=complex)
        for axis, (kk, b) in enumerate(zip(ks, beta)):
            if b:
                factor = (1j * kk) ** b
                if b % 2 and npts % 2 == 0:
                    # the Nyquist mode has no consistent odd derivative
                    sl = [slice(None)] * n
                    sl[axis] = npts // 2
                    factor = factor.copy()
                    factor[tuple(sl)] = 0
                m = m * factor
        out.append(m)
    return np.array(out)

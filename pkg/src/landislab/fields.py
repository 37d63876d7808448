"""Uniform-grid fields on a rectangle with square cells.

Real and complex fields are sampled at the nodes of an axis-aligned grid.
Derivatives are centered second-order differences in the interior and
one-sided second-order stencils at the edges, so derivative fields keep
the grid shape.  Off-node queries use bilinear interpolation, matching
the O(h^2) accuracy of the stencils.

Fields are immutable after construction (the value arrays are locked),
so any number of readers may share them.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

_HEADER_FMT = "<5d"  # nx, ny, h, x0, y0 as IEEE-754 doubles


class RegionError(ValueError):
    """A region does not intersect the grid it is evaluated on."""


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned grid: ``nx`` by ``ny`` square cells of spacing ``h``.

    Nodes sit at ``(x0 + i*h, y0 + j*h)`` for ``0 <= i <= nx``,
    ``0 <= j <= ny``; value arrays are indexed ``[j, i]`` (row = y).
    """

    x0: float
    y0: float
    nx: int
    ny: int
    h: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        if self.nx < 8 or self.ny < 8:
            raise ValueError("grid needs at least 8 cells per direction")

    @classmethod
    def square(cls, radius: float, n: int) -> "GridSpec":
        """Square grid covering [-radius, radius]^2 with n cells per side.

        Even n puts a node at the origin; odd n puts the origin at a cell
        center (used for fundamental-solution grids so the pole avoids
        the nodes).
        """
        h = 2.0 * radius / n
        return cls(-radius, -radius, n, n, h)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny + 1, self.nx + 1)

    @property
    def width(self) -> float:
        return self.nx * self.h

    @property
    def height(self) -> float:
        return self.ny * self.h

    @property
    def xmax(self) -> float:
        return self.x0 + self.width

    @property
    def ymax(self) -> float:
        return self.y0 + self.height

    def xs(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.nx + 1)

    def ys(self) -> np.ndarray:
        return self.y0 + self.h * np.arange(self.ny + 1)

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid arrays X, Y of node coordinates, shape (ny+1, nx+1)."""
        return np.meshgrid(self.xs(), self.ys())

    def covers_ball(self, cx: float, cy: float, r: float) -> bool:
        return (self.x0 <= cx - r and cx + r <= self.xmax
                and self.y0 <= cy - r and cy + r <= self.ymax)

    def contains(self, x, y, tol: float = 1e-12) -> np.ndarray:
        pad = tol * max(self.width, self.height)
        return ((np.asarray(x) >= self.x0 - pad) & (np.asarray(x) <= self.xmax + pad)
                & (np.asarray(y) >= self.y0 - pad) & (np.asarray(y) <= self.ymax + pad))

    def close_to(self, other: "GridSpec", tol: float = 1e-12) -> bool:
        return (self.nx == other.nx and self.ny == other.ny
                and abs(self.h - other.h) <= tol * self.h
                and abs(self.x0 - other.x0) <= tol * max(1.0, abs(self.x0))
                and abs(self.y0 - other.y0) <= tol * max(1.0, abs(self.y0)))


def _lock(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class ScalarField:
    """Real field sampled at grid nodes."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        v = np.array(values, dtype=float)
        if v.shape != spec.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {spec.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        self.spec = spec
        self.values = _lock(v)

    @classmethod
    def from_function(cls, spec: GridSpec, fn) -> "ScalarField":
        X, Y = spec.nodes()
        return cls(spec, np.broadcast_to(fn(X, Y), spec.shape))

    @classmethod
    def full(cls, spec: GridSpec, value: float) -> "ScalarField":
        return cls(spec, np.full(spec.shape, float(value)))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __repr__(self):
        return f"ScalarField({self.spec.nx}x{self.spec.ny}, h={self.spec.h:.4g})"


class ComplexField:
    """Complex field sampled at grid nodes; re/im views are read-only."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        v = np.array(values, dtype=complex)
        if v.shape != spec.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {spec.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        self.spec = spec
        self.values = _lock(v)

    @classmethod
    def from_function(cls, spec: GridSpec, fn) -> "ComplexField":
        X, Y = spec.nodes()
        return cls(spec, np.broadcast_to(fn(X + 1j * Y), spec.shape))

    @classmethod
    def from_parts(cls, re: ScalarField, im: ScalarField) -> "ComplexField":
        if not re.spec.close_to(im.spec):
            raise ValueError("re/im grids differ")
        return cls(re.spec, re.values + 1j * im.values)

    @property
    def re(self) -> np.ndarray:
        return self.values.real

    @property
    def im(self) -> np.ndarray:
        return self.values.imag

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __repr__(self):
        return f"ComplexField({self.spec.nx}x{self.spec.ny}, h={self.spec.h:.4g})"


Field = ScalarField | ComplexField


def field_like(f: Field, values) -> Field:
    """Wrap an array as a field on the same grid as f."""
    if np.iscomplexobj(values):
        return ComplexField(f.spec, values)
    return ScalarField(f.spec, values)


# ----------------------------------------------------------------------
# derivatives

def diff_x(values: np.ndarray, h: float) -> np.ndarray:
    return np.gradient(values, h, axis=1, edge_order=2)


def diff_y(values: np.ndarray, h: float) -> np.ndarray:
    return np.gradient(values, h, axis=0, edge_order=2)


def partial_x(f: Field) -> Field:
    return field_like(f, diff_x(f.values, f.spec.h))


def partial_y(f: Field) -> Field:
    return field_like(f, diff_y(f.values, f.spec.h))


def wirtinger(f: ComplexField) -> tuple[ComplexField, ComplexField]:
    """Both Wirtinger derivatives (df, dbar_f).

    df = (d/dx - i d/dy)/2, dbar_f = (d/dx + i d/dy)/2.
    """
    fx = diff_x(f.values, f.spec.h)
    fy = diff_y(f.values, f.spec.h)
    return (ComplexField(f.spec, 0.5 * (fx - 1j * fy)),
            ComplexField(f.spec, 0.5 * (fx + 1j * fy)))


def gradient(f: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    return diff_x(f.values, f.spec.h), diff_y(f.values, f.spec.h)


def interior_mask(spec: GridSpec, margin: int = 1) -> np.ndarray:
    """Boolean node mask excluding `margin` layers at each edge."""
    m = np.zeros(spec.shape, dtype=bool)
    m[margin:spec.ny + 1 - margin, margin:spec.nx + 1 - margin] = True
    return m


# ----------------------------------------------------------------------
# interpolation

def sample(f: Field, x, y):
    """Bilinear interpolation of f at points (x, y) inside the grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    spec = f.spec
    fx = (x - spec.x0) / spec.h
    fy = (y - spec.y0) / spec.h
    eps = 1e-9
    if np.any(fx < -eps) or np.any(fx > spec.nx + eps) \
            or np.any(fy < -eps) or np.any(fy > spec.ny + eps):
        raise RegionError("sample points outside grid")
    fx = np.clip(fx, 0.0, spec.nx)
    fy = np.clip(fy, 0.0, spec.ny)
    i0 = np.minimum(fx.astype(int), spec.nx - 1)
    j0 = np.minimum(fy.astype(int), spec.ny - 1)
    tx = fx - i0
    ty = fy - j0
    v = f.values
    return ((1 - tx) * (1 - ty) * v[j0, i0] + tx * (1 - ty) * v[j0, i0 + 1]
            + (1 - tx) * ty * v[j0 + 1, i0] + tx * ty * v[j0 + 1, i0 + 1])


# ----------------------------------------------------------------------
# regions

@dataclass(frozen=True)
class Ball:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("ball radius must be positive")


class Polyline:
    """Closed polyline given by an (n, 2) vertex array (x, y)."""

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polyline needs an (n>=3, 2) vertex array")
        # store without a duplicated closing vertex
        if np.allclose(v[0], v[-1]):
            v = v[:-1]
        self.vertices = _lock(v)

    def __len__(self):
        return len(self.vertices)

    def contains(self, x, y) -> np.ndarray:
        return points_in_polygon(x, y, self.vertices)

    def inradius(self, cx: float = 0.0, cy: float = 0.0) -> float:
        """Distance from (cx, cy) to the polyline (largest inscribed ball)."""
        return float(np.min(_dist_to_segments(self.vertices, cx, cy)))

    def circumradius(self, cx: float = 0.0, cy: float = 0.0) -> float:
        d = np.hypot(self.vertices[:, 0] - cx, self.vertices[:, 1] - cy)
        return float(np.max(d))

    def edge_midpoints(self) -> np.ndarray:
        v = self.vertices
        return 0.5 * (v + np.roll(v, -1, axis=0))

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y"])
            for x, y in self.vertices:
                w.writerow([f"{x:.17g}", f"{y:.17g}"])

    @classmethod
    def load_csv(cls, path) -> "Polyline":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        return cls(data)


def points_in_polygon(x, y, vertices: np.ndarray) -> np.ndarray:
    """Even-odd rule point-in-polygon test, vectorized over points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    xi = vertices[:, 0]
    yi = vertices[:, 1]
    xj = np.roll(xi, -1)
    yj = np.roll(yi, -1)
    inside = np.zeros(x.shape, dtype=bool)
    # chunk the points to bound the (points x edges) intermediate
    n = x.size
    flat_x = x.ravel()
    flat_y = y.ravel()
    flat_in = inside.ravel()
    step = max(1, 8_000_000 // max(len(xi), 1))
    for k in range(0, n, step):
        px = flat_x[k:k + step, None]
        py = flat_y[k:k + step, None]
        crosses = (yi > py) != (yj > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = (xj - xi) * (py - yi) / (yj - yi) + xi
        hits = crosses & (px < xcross)
        flat_in[k:k + step] = (hits.sum(axis=1) % 2).astype(bool)
    return inside


def _dist_to_segments(vertices: np.ndarray, cx: float, cy: float) -> np.ndarray:
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    ab = b - a
    ap = np.array([cx, cy]) - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", ap, ab) / np.where(denom == 0, 1, denom), 0, 1)
    proj = a + t[:, None] * ab
    return np.hypot(proj[:, 0] - cx, proj[:, 1] - cy)


def sup_norm(f: Field, region) -> float:
    """Max of |f| over grid nodes inside the region plus bilinearly
    sampled points along the region boundary.

    region is a Ball, a Polyline, or None for the whole grid.
    """
    if region is None:
        return f.max_abs()
    spec = f.spec
    X, Y = spec.nodes()
    if isinstance(region, Ball):
        node_mask = (X - region.cx) ** 2 + (Y - region.cy) ** 2 <= region.r ** 2
        k = max(64, int(np.ceil(2 * np.pi * region.r / spec.h)))
        th = 2 * np.pi * np.arange(k) / k
        bx = region.cx + region.r * np.cos(th)
        by = region.cy + region.r * np.sin(th)
    elif isinstance(region, Polyline):
        v = region.vertices
        lo = v.min(axis=0)
        hi = v.max(axis=0)
        box = (X >= lo[0]) & (X <= hi[0]) & (Y >= lo[1]) & (Y <= hi[1])
        node_mask = np.zeros(spec.shape, dtype=bool)
        if box.any():
            node_mask[box] = region.contains(X[box], Y[box])
        mids = region.edge_midpoints()
        bx = np.concatenate([v[:, 0], mids[:, 0]])
        by = np.concatenate([v[:, 1], mids[:, 1]])
    else:
        raise TypeError(f"unsupported region {type(region)!r}")
    keep = spec.contains(bx, by)
    best = -np.inf
    if node_mask.any():
        best = float(np.max(np.abs(f.values[node_mask])))
    if keep.any():
        best = max(best, float(np.max(np.abs(sample(f, bx[keep], by[keep])))))
    if not np.isfinite(best):
        raise RegionError("region does not intersect the grid")
    return best


# ----------------------------------------------------------------------
# serialization

def save_binary(f: Field, path):
    """Flat binary snapshot: 5-double header (nx, ny, h, x0, y0) then
    row-major values (re block then im block for complex fields)."""
    spec = f.spec
    with open(path, "wb") as fh:
        fh.write(struct.pack(_HEADER_FMT, spec.nx, spec.ny, spec.h, spec.x0, spec.y0))
        if isinstance(f, ComplexField):
            fh.write(np.ascontiguousarray(f.re).tobytes())
            fh.write(np.ascontiguousarray(f.im).tobytes())
        else:
            fh.write(np.ascontiguousarray(f.values).tobytes())


def load_binary(path) -> Field:
    with open(path, "rb") as fh:
        raw = fh.read()
    nx, ny, h, x0, y0 = struct.unpack_from(_HEADER_FMT, raw)
    spec = GridSpec(x0, y0, int(nx), int(ny), h)
    count = (spec.nx + 1) * (spec.ny + 1)
    body = np.frombuffer(raw, dtype=float, offset=struct.calcsize(_HEADER_FMT))
    if body.size == count:
        return ScalarField(spec, body.reshape(spec.shape))
    if body.size == 2 * count:
        re = body[:count].reshape(spec.shape)
        im = body[count:].reshape(spec.shape)
        return ComplexField(spec, re + 1j * im)
    raise ValueError("corrupt field snapshot: unexpected payload size")


def save_csv(f: Field, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        X, Y = f.spec.nodes()
        if isinstance(f, ComplexField):
            w.writerow(["x", "y", "re", "im"])
            for x, y, re, im in zip(X.ravel(), Y.ravel(), f.re.ravel(), f.im.ravel()):
                w.writerow([f"{x:.17g}", f"{y:.17g}", f"{re:.17g}", f"{im:.17g}"])
        else:
            w.writerow(["x", "y", "value"])
            for x, y, v in zip(X.ravel(), Y.ravel(), f.values.ravel()):
                w.writerow([f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"])

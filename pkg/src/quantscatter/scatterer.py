"""Susceptibility models and their momentum-space transforms.

The transform convention is ``eps[q] = integral d^3r exp(i q.r) eps(r)``.
Every ``ft`` accepts a single wavevector of shape ``(3,)`` or a stack of
shape ``(..., 3)`` and returns complex matrices of shape ``(..., 3, 3)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SERIES_SWITCH = 1e-3
VOXEL_MAGIC = "quantscatter-voxels v1"


def _as_lambda(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.shape == ():
        lam = lam * np.eye(3)
    if lam.shape != (3, 3):
        raise ValueError(f"lambda must be a scalar or 3x3 matrix, got shape {lam.shape}")
    if not np.allclose(lam, lam.T, atol=1e-12):
        raise ValueError("lambda must be symmetric")
    return lam


def _as_q(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 3:
        raise ValueError(f"wavevectors must have a trailing dimension of 3, got {q.shape}")
    return q


@dataclass(frozen=True)
class TwoPointCenters:
    """Two point scatterers with common tensor strength at +a and -a."""

    lam: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", _as_lambda(self.lam))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(3))

    def ft(self, q) -> np.ndarray:
        return ft_two_points(self, q)

    def scaled(self, c: float) -> "TwoPointCenters":
        return TwoPointCenters(c * self.lam, self.a)

    @property
    def size(self) -> float:
        return 2.0 * float(np.linalg.norm(self.a))


@dataclass(frozen=True)
class TwoPointFamily:
    """A batch of two-point models sharing ``lam``, one per row of ``a``.

    ``ft`` takes a single wavevector and returns shape ``(B, 3, 3)``; the
    closed-form correlators then return one value per batch member.
    """

    lam: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", _as_lambda(self.lam))
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 2 or a.shape[1] != 3:
            raise ValueError("a must have shape (B, 3)")
        object.__setattr__(self, "a", a)

    def ft(self, q) -> np.ndarray:
        q = _as_q(q)
        if q.shape != (3,):
            raise ValueError("a model family accepts one wavevector at a time")
        return 2.0 * np.cos(self.a @ q)[:, None, None] * self.lam

    def member(self, k: int) -> TwoPointCenters:
        return TwoPointCenters(self.lam, self.a[k])


@dataclass(frozen=True)
class Sphere:
    """Homogeneous ball of radius ``radius`` centered at the origin."""

    lam: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "lam", _as_lambda(self.lam))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def ft(self, q) -> np.ndarray:
        return ft_sphere(self, q)

    def scaled(self, c: float) -> "Sphere":
        return Sphere(c * self.lam, self.radius)

    @property
    def size(self) -> float:
        return float(self.radius)


@dataclass(frozen=True)
class NumericGrid:
    """Samples of eps_ij(r) on a regular grid.

    ``samples`` has shape ``(nx, ny, nz, 3, 3)``; grid node ``(i, j, k)`` sits
    at ``origin + (i, j, k) * spacing``.
    """

    samples: np.ndarray
    spacing: tuple
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 5 or samples.shape[3:] != (3, 3):
            raise ValueError("samples must have shape (nx, ny, nz, 3, 3)")
        if samples.size == 0:
            raise ValueError("empty grid")
        spacing = np.broadcast_to(np.asarray(self.spacing, dtype=float), (3,))
        if np.any(spacing <= 0):
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "spacing", tuple(float(h) for h in spacing))
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))

    @property
    def dims(self) -> tuple:
        return self.samples.shape[:3]

    def axes(self) -> list[np.ndarray]:
        return [self.origin[d] + self.spacing[d] * np.arange(self.dims[d]) for d in range(3)]

    def ft(self, q) -> np.ndarray:
        return ft_numeric(self, q)

    def scaled(self, c: float) -> "NumericGrid":
        return NumericGrid(c * self.samples, self.spacing, self.origin)

    @property
    def size(self) -> float:
        return 0.5 * float(np.max(np.array(self.dims) * np.array(self.spacing)))


def ft_two_points(model: TwoPointCenters, q) -> np.ndarray:
    """2 lambda_ij cos(q.a)."""
    q = _as_q(q)
    c = np.cos(q @ model.a)
    return 2.0 * c[..., None, None] * model.lam


def _sphere_shape(x: np.ndarray) -> np.ndarray:
    """(sin x - x cos x) / x^3 with a 5-term series below the switchover."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < SERIES_SWITCH
    xs = x[small]
    x2 = xs * xs
    # sum_k (-1)^(k+1) 2k/(2k+1)! x^(2k-2), k = 1..5
    coeffs = [(-1) ** (k + 1) * 2 * k / math.factorial(2 * k + 1) for k in range(1, 6)]
    acc = np.zeros_like(xs)
    for c in reversed(coeffs):
        acc = acc * x2 + c
    out[small] = acc
    xl = x[~small]
    out[~small] = (np.sin(xl) - xl * np.cos(xl)) / xl**3
    return out


def ft_sphere(model: Sphere, q) -> np.ndarray:
    """4 pi lambda_ij q^-3 (sin qa - qa cos qa), q = |q|, a = radius."""
    q = _as_q(q)
    x = np.linalg.norm(q, axis=-1) * model.radius
    shape = 4.0 * np.pi * model.radius**3 * _sphere_shape(x)
    return shape[..., None, None] * model.lam.astype(complex)


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    if n > 1:
        w[0] = w[-1] = 0.5 * h
    return w


def ft_numeric(model: NumericGrid, q) -> np.ndarray:
    """Trapezoidal sum of exp(i q.r) eps_ij(r) over the grid.

    The phase factorizes over the three axes, so each wavevector costs one
    tensor contraction of the samples.
    """
    q = _as_q(q)
    flat = q.reshape(-1, 3)
    axes = model.axes()
    weights = [_trapezoid_weights(len(ax), h) for ax, h in zip(axes, model.spacing)]
    out = np.empty((len(flat), 3, 3), dtype=complex)
    for k, qk in enumerate(flat):
        px, py, pz = (w * np.exp(1j * qk[d] * ax) for d, (ax, w) in enumerate(zip(axes, weights)))
        out[k] = np.einsum("x,y,z,xyzij->ij", px, py, pz, model.samples, optimize=True)
    return out.reshape(q.shape[:-1] + (3, 3))


def gaussian_two_point_grid(model: TwoPointCenters, width: float, spacing: float,
                            margin: float = 6.0) -> NumericGrid:
    """Sample the two-point model with each delta replaced by a unit-mass Gaussian.

    The exact transform of the smoothed model is
    ``ft_two_points(model, q) * exp(-|q|^2 width^2 / 2)``.
    """
    if width <= 0 or spacing <= 0:
        raise ValueError("width and spacing must be positive")
    half = np.abs(model.a) + margin * width
    axes = [np.arange(-h, h + 0.5 * spacing, spacing) for h in half]
    axes = [ax - 0.5 * (ax[0] + ax[-1]) for ax in axes]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    r = np.stack([X, Y, Z], axis=-1)
    norm = (2.0 * np.pi * width**2) ** -1.5
    dens = sum(norm * np.exp(-np.sum((r - c) ** 2, axis=-1) / (2 * width**2))
               for c in (model.a, -model.a))
    samples = dens[..., None, None] * model.lam
    origin = np.array([ax[0] for ax in axes])
    return NumericGrid(samples, spacing, origin)


def voxelize_sphere(model: Sphere, spacing: float, supersample: int = 4,
                    margin: int = 2) -> NumericGrid:
    """Sample the ball with fractional voxel occupancy.

    Occupancy is estimated on a ``supersample**3`` sub-lattice per voxel,
    which keeps the surface staircase error well below the voxel size.
    """
    n_half = int(np.ceil(model.radius / spacing)) + margin
    ax = spacing * np.arange(-n_half, n_half + 1)
    sub = (np.arange(supersample) + 0.5) / supersample - 0.5
    occ = np.zeros((len(ax),) * 3)
    for dx in sub:
        for dy in sub:
            for dz in sub:
                X, Y, Z = np.meshgrid(ax + dx * spacing, ax + dy * spacing, ax + dz * spacing,
                                      indexing="ij")
                occ += (X**2 + Y**2 + Z**2) <= model.radius**2
    occ /= supersample**3
    samples = occ[..., None, None] * model.lam
    return NumericGrid(samples, spacing, np.full(3, ax[0]))


def born_parameter(model, omega: float) -> float:
    """Rough size of |E_scattered| / |E_incident| inside the scatterer.

    Estimated as ``omega^2 |eps[0]| / (4 pi L)`` with ``L`` the model's
    linear size. Purely diagnostic; the first-order expansion is trusted
    when this is well below one.
    """
    eps0 = np.linalg.norm(model.ft(np.zeros(3)), 2)
    L = max(model.size, 1.0 / abs(omega))
    return float(omega**2 * eps0 / (4.0 * np.pi * L))


def save_voxels(model: NumericGrid, path) -> None:
    """Write ``.npz`` (binary) or ``.csv`` depending on the suffix."""
    path = Path(path)
    if path.suffix == ".npz":
        np.savez(path, magic=VOXEL_MAGIC, dims=np.array(model.dims), spacing=np.array(model.spacing),
                 origin=model.origin, samples=model.samples.reshape(-1, 9))
        return
    with open(path, "w", newline="") as fh:
        fh.write(f"# {VOXEL_MAGIC}\n")
        fh.write("# dims %d %d %d\n" % model.dims)
        fh.write("# spacing %r %r %r\n" % tuple(float(h) for h in model.spacing))
        fh.write("# origin %r %r %r\n" % tuple(float(o) for o in model.origin))
        w = csv.writer(fh)
        w.writerow(["ix", "iy", "iz"] + [f"e{i}{j}" for i in range(1, 4) for j in range(1, 4)])
        for idx in np.ndindex(*model.dims):
            w.writerow(list(idx) + [repr(float(v)) for v in model.samples[idx].ravel()])


def load_voxels(path) -> NumericGrid:
    """Read a voxel file written by :func:`save_voxels`."""
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as data:
            if str(data["magic"]) != VOXEL_MAGIC:
                raise ValueError(f"{path}: not a voxel file")
            dims = tuple(int(d) for d in data["dims"])
            samples = data["samples"].reshape(dims + (3, 3))
            return NumericGrid(samples, tuple(data["spacing"]), data["origin"])
    header = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != f"# {VOXEL_MAGIC}":
        raise ValueError(f"{path}: missing voxel header")
    body = []
    for line in lines[1:]:
        if line.startswith("#"):
            key, *vals = line[1:].split()
            header[key] = vals
        else:
            body.append(line)
    try:
        dims = tuple(int(v) for v in header["dims"])
        spacing = tuple(float(v) for v in header["spacing"])
        origin = np.array([float(v) for v in header["origin"]])
    except KeyError as exc:
        raise ValueError(f"{path}: header field {exc} missing") from None
    samples = np.zeros(dims + (3, 3))
    rows = list(csv.reader(body))[1:]
    if len(rows) != int(np.prod(dims)):
        raise ValueError(f"{path}: expected {np.prod(dims)} voxels, found {len(rows)}")
    for row in rows:
        idx = tuple(int(v) for v in row[:3])
        samples[idx] = np.array([float(v) for v in row[3:]]).reshape(3, 3)
    return NumericGrid(samples, spacing, origin)

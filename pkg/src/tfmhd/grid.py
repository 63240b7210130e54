"""Periodic spectral fields on a 2D square box: transforms, calculus, projection.

Fields live on an n x n uniform lattice over [0, length]^2 and are represented
either by real samples or by normalized Fourier coefficients (DFT / n^2), with
both representations cached lazily.  Quadratic nonlinearities are evaluated
with the two-thirds dealiasing mask so that products restricted to the
retained band are Galerkin-exact, which is what makes the discrete
skew-symmetry identities of the advection terms hold to rounding.

All operations are pure: inputs are never mutated and results are fresh
fields whose backing arrays are marked read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic sample/wavenumber lattice for a square domain.

    ``n`` samples per dimension (even, at least 8), domain edge ``length``.
    Mode ``j`` carries the integer frequency ``j`` for ``j < n/2`` and
    ``j - n`` otherwise, scaled by ``2*pi/length``.  The dealias mask keeps
    integer frequencies with ``|k| <= n // 3`` in each direction.
    """

    n: int
    length: float = TWO_PI

    freq: np.ndarray = dc_field(init=False, repr=False, compare=False)
    kx: np.ndarray = dc_field(init=False, repr=False, compare=False)
    ky: np.ndarray = dc_field(init=False, repr=False, compare=False)
    k2: np.ndarray = dc_field(init=False, repr=False, compare=False)
    dealias_mask: np.ndarray = dc_field(init=False, repr=False, compare=False)
    x: np.ndarray = dc_field(init=False, repr=False, compare=False)
    y: np.ndarray = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 8:
            raise ValueError(f"grid needs n >= 8, got n={self.n}")
        if self.n % 2 != 0:
            raise ValueError(f"grid needs even n, got n={self.n}")
        if not self.length > 0.0:
            raise ValueError(f"domain length must be positive, got {self.length}")

        freq = np.fft.fftfreq(self.n, d=1.0 / self.n)  # integer frequencies
        scale = TWO_PI / self.length
        fi, fj = np.meshgrid(freq, freq, indexing="ij")
        kx = scale * fi
        ky = scale * fj
        kcut = self.n // 3
        mask = (np.abs(fi) <= kcut) & (np.abs(fj) <= kcut)

        xs = np.arange(self.n) * (self.length / self.n)
        x, y = np.meshgrid(xs, xs, indexing="ij")

        for name, arr in (
            ("freq", freq),
            ("kx", kx),
            ("ky", ky),
            ("k2", kx**2 + ky**2),
            ("dealias_mask", mask),
            ("x", x),
            ("y", y),
        ):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def area(self) -> float:
        return self.length * self.length

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)


def make_grid(n: int, length: float = TWO_PI) -> Grid:
    """Build a periodic grid; rejects odd or too-small n."""
    return Grid(int(n), float(length))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class ScalarField:
    """Real scalar field with lazily synced sample/spectral representations.

    The spectral array holds normalized Fourier coefficients ``c_k`` with
    ``f(x) = sum_k c_k exp(i k.x)``, so conjugate symmetry ``c(-k) =
    conj(c(k))`` encodes real-valuedness.  ``dealiased`` marks fields known
    to be supported on the retained two-thirds band, letting ``dealias``
    skip the copy.
    """

    __slots__ = ("grid", "_spec", "_phys", "dealiased")

    def __init__(self, grid: Grid, *, spec=None, phys=None, dealiased: bool = False):
        if spec is None and phys is None:
            raise ValueError("field needs samples or coefficients")
        self.grid = grid
        self._spec = spec
        self._phys = phys
        self.dealiased = dealiased

    @classmethod
    def from_samples(cls, grid: Grid, values) -> "ScalarField":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise ValueError(f"samples shaped {values.shape}, grid needs {grid.shape}")
        return cls(grid, phys=_readonly(values.copy()))

    @classmethod
    def from_spectral(cls, grid: Grid, coeffs, *, dealiased: bool = False) -> "ScalarField":
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != grid.shape:
            raise ValueError(f"coefficients shaped {coeffs.shape}, grid needs {grid.shape}")
        return cls(grid, spec=_readonly(coeffs.copy()), dealiased=dealiased)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, spec=_readonly(np.zeros(grid.shape, dtype=np.complex128)), dealiased=True)

    @property
    def spec(self) -> np.ndarray:
        if self._spec is None:
            self._spec = _readonly(np.fft.fft2(self._phys) / self.grid.n**2)
        return self._spec

    @property
    def phys(self) -> np.ndarray:
        if self._phys is None:
            self._phys = _readonly(np.real(np.fft.ifft2(self._spec)) * self.grid.n**2)
        return self._phys

    def _binary(self, other: "ScalarField", op) -> "ScalarField":
        if not isinstance(other, ScalarField):
            return NotImplemented
        _require_same_grid(self, other)
        return ScalarField(
            self.grid,
            spec=_readonly(op(self.spec, other.spec)),
            dealiased=self.dealiased and other.dealiased,
        )

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, a):
        if not np.isscalar(a):
            return NotImplemented
        return ScalarField(self.grid, spec=_readonly(self.spec * a), dealiased=self.dealiased)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)


@dataclass(frozen=True)
class VectorField2:
    """Two-component field; carries velocity, magnetic field and forcings."""

    x: ScalarField
    y: ScalarField

    def __post_init__(self) -> None:
        _require_same_grid(self.x, self.y)

    @property
    def grid(self) -> Grid:
        return self.x.grid

    @property
    def dealiased(self) -> bool:
        return self.x.dealiased and self.y.dealiased

    @classmethod
    def from_samples(cls, grid: Grid, vx, vy) -> "VectorField2":
        return cls(ScalarField.from_samples(grid, vx), ScalarField.from_samples(grid, vy))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField2":
        return cls(ScalarField.zeros(grid), ScalarField.zeros(grid))

    def __add__(self, other):
        return VectorField2(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return VectorField2(self.x - other.x, self.y - other.y)

    def __mul__(self, a):
        return VectorField2(self.x * a, self.y * a)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)


Field = ScalarField | VectorField2


def _grid_of(f: Field) -> Grid:
    return f.grid


def _require_same_grid(*fields) -> Grid:
    grid = _grid_of(fields[0])
    for f in fields[1:]:
        if _grid_of(f) != grid:
            raise ValueError("fields are on mismatched grids")
    return grid


def gradient(f: ScalarField) -> VectorField2:
    """Exact spectral gradient of a scalar field."""
    g = f.grid
    return VectorField2(
        ScalarField.from_spectral(g, 1j * g.kx * f.spec, dealiased=f.dealiased),
        ScalarField.from_spectral(g, 1j * g.ky * f.spec, dealiased=f.dealiased),
    )


def divergence(w: VectorField2) -> ScalarField:
    """Exact spectral divergence of a vector field."""
    g = w.grid
    return ScalarField.from_spectral(
        g, 1j * (g.kx * w.x.spec + g.ky * w.y.spec), dealiased=w.dealiased
    )


def laplacian(f: ScalarField) -> ScalarField:
    """Exact spectral Laplacian of a scalar field."""
    g = f.grid
    return ScalarField.from_spectral(g, -g.k2 * f.spec, dealiased=f.dealiased)


def curl2d(w: VectorField2) -> ScalarField:
    """Scalar curl d(w_y)/dx - d(w_x)/dy of a planar vector field."""
    g = w.grid
    return ScalarField.from_spectral(
        g, 1j * (g.kx * w.y.spec - g.ky * w.x.spec), dealiased=w.dealiased
    )


def leray_project(w: VectorField2) -> VectorField2:
    """Orthogonal projection onto divergence-free fields.

    Removes the pure-gradient part mode by mode; the k = 0 (mean) mode is
    passed through unchanged.  Idempotent and self-adjoint.
    """
    g = w.grid
    k2 = np.where(g.k2 == 0.0, 1.0, g.k2)
    kdotw = (g.kx * w.x.spec + g.ky * w.y.spec) / k2
    return VectorField2(
        ScalarField.from_spectral(g, w.x.spec - g.kx * kdotw, dealiased=w.x.dealiased),
        ScalarField.from_spectral(g, w.y.spec - g.ky * kdotw, dealiased=w.y.dealiased),
    )


def dealias(f: Field) -> Field:
    """Zero all modes outside the two-thirds band (no-op on tagged fields)."""
    if isinstance(f, VectorField2):
        if f.dealiased:
            return f
        return VectorField2(dealias(f.x), dealias(f.y))
    if f.dealiased:
        return f
    return ScalarField.from_spectral(f.grid, f.spec * f.grid.dealias_mask, dealiased=True)


def dealiased_product(f: ScalarField, g: ScalarField) -> ScalarField:
    """Pointwise product whose retained-band coefficients are alias-free.

    Both inputs are truncated to the two-thirds band before multiplying on
    the collocation grid, and the output is truncated again; the surviving
    coefficients then agree exactly with the Galerkin projection of the true
    product.
    """
    grid = _require_same_grid(f, g)
    fm = dealias(f)
    gm = dealias(g)
    return dealias(ScalarField.from_samples(grid, fm.phys * gm.phys))


def inner_product(f: Field, g: Field) -> float:
    """L2 inner product over the physical domain (Parseval form)."""
    grid = _require_same_grid(f, g)
    if isinstance(f, VectorField2) != isinstance(g, VectorField2):
        raise ValueError("cannot pair scalar and vector fields")
    if isinstance(f, VectorField2):
        total = np.vdot(g.x.spec, f.x.spec) + np.vdot(g.y.spec, f.y.spec)
    else:
        total = np.vdot(g.spec, f.spec)
    return float(grid.area * np.real(total))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(max(inner_product(f, f), 0.0)))


def _h1_sums(f: Field, weight: np.ndarray) -> float:
    grid = _grid_of(f)
    comps = (f.x, f.y) if isinstance(f, VectorField2) else (f,)
    total = 0.0
    for c in comps:
        total += float(np.sum(weight * (c.spec.real**2 + c.spec.imag**2)))
    return grid.area * total


def h1_seminorm_sq(f: Field) -> float:
    """Squared L2 norm of the (full) gradient, summed over components."""
    return _h1_sums(f, _grid_of(f).k2)


def h1_norm(f: Field) -> float:
    """H1 norm: sqrt(l2_norm^2 + sum of component gradient norms squared)."""
    return float(np.sqrt(_h1_sums(f, 1.0 + _grid_of(f).k2)))


def grad_inner(w: Field, z: Field) -> float:
    """Inner product of gradients, (grad w, grad z), summed over components."""
    grid = _require_same_grid(w, z)
    if isinstance(w, VectorField2) != isinstance(z, VectorField2):
        raise ValueError("cannot pair scalar and vector fields")
    pairs = ((w.x, z.x), (w.y, z.y)) if isinstance(w, VectorField2) else ((w, z),)
    total = 0.0
    for a, b in pairs:
        total += float(np.real(np.sum(grid.k2 * a.spec * np.conj(b.spec))))
    return grid.area * total


def relative_divergence(w: VectorField2) -> float:
    """Spectral divergence norm relative to the field's own norm."""
    scale = l2_norm(w)
    if scale == 0.0:
        return 0.0
    return l2_norm(divergence(w)) / scale

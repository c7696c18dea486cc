"""Quadrature, spectral transforms and the mean-zero Poisson solve on S^1 / S^2.

Scalars on the circle use a plain Fourier series
``s = a_0 + sum_k a_k cos(k t) + b_k sin(k t)``; scalars on S^2 use real
orthonormal spherical harmonics (see :mod:`annulus_div._legendre`).  The S^2
grid is a Gauss-Legendre (colatitude) x uniform (longitude) product grid, so
forward transforms are exact quadratures for band-limited data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._legendre import lm_index, lm_pairs, n_coeffs, real_sph_harm
from .exceptions import DomainError, ResolutionError, ShapeError, SolvabilityError

__all__ = [
    "SphereGrid",
    "SphereScalar",
    "SphereSpectrum",
    "TangentField",
    "sphere_area",
    "to_angles",
    "forward_transform",
    "inverse_transform",
    "poisson_solve",
    "circle_antiderivative",
    "correction_tangent_field",
    "integrate",
    "fibonacci_directions",
    "circle_directions",
]

_CHUNK = 4096
MEAN_TOL = 1e-10


def sphere_area(n):
    if n == 2:
        return 2.0 * np.pi
    if n == 3:
        return 4.0 * np.pi
    raise DomainError(f"only S^1 and S^2 are supported, got n={n}")


def to_angles(directions):
    """Angles of unit vectors: ``theta`` for n=2, ``(theta, phi)`` for n=3."""
    d = np.asarray(directions, dtype=float)
    if d.shape[-1] == 2:
        return np.arctan2(d[..., 1], d[..., 0])
    if d.shape[-1] == 3:
        theta = np.arccos(np.clip(d[..., 2] / np.linalg.norm(d, axis=-1), -1.0, 1.0))
        return theta, np.arctan2(d[..., 1], d[..., 0])
    raise ShapeError(f"directions must have 2 or 3 components, got {d.shape[-1]}")


def fibonacci_directions(count):
    """Nearly uniform unit vectors on S^2 (golden-angle spiral)."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(1.0 - z * z)
    ang = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=-1)


def circle_directions(count, offset=0.5):
    t = 2.0 * np.pi * (np.arange(count) + offset) / count
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature grid on S^{n-1}.

    ``points`` has shape ``shape + (n,)``; ``weights`` has shape ``shape`` and
    sums to the sphere area.
    """

    n: int
    shape: tuple
    weights: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    phi: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def circle(cls, m):
        if m < 1:
            raise ResolutionError("circle grid needs at least one node")
        theta = 2.0 * np.pi * np.arange(m) / m
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return cls(2, (m,), np.full(m, 2.0 * np.pi / m), pts, theta)

    @classmethod
    def gauss(cls, n_lat, n_lon):
        x, w = np.polynomial.legendre.leggauss(n_lat)
        theta1 = np.arccos(x)
        phi1 = 2.0 * np.pi * np.arange(n_lon) / n_lon
        theta, phi = np.meshgrid(theta1, phi1, indexing="ij")
        weights = np.outer(w, np.full(n_lon, 2.0 * np.pi / n_lon))
        st = np.sin(theta)
        pts = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
        return cls(3, (n_lat, n_lon), weights, pts, theta, phi)

    @classmethod
    def for_band(cls, n, band):
        """Smallest grid on which a band-``band`` transform is exact."""
        if n == 2:
            return cls.circle(2 * band + 2)
        if n == 3:
            return cls.gauss(band + 1, 2 * band + 2)
        raise DomainError(f"only S^1 and S^2 are supported, got n={n}")

    def max_band(self):
        if self.n == 2:
            return (self.shape[0] - 1) // 2
        return min(self.shape[0] - 1, (self.shape[1] - 1) // 2)

    def __eq__(self, other):
        return isinstance(other, SphereGrid) and (self.n, self.shape) == (other.n, other.shape)

    def __hash__(self):
        return hash((self.n, self.shape))


@dataclass(frozen=True)
class SphereScalar:
    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ShapeError(f"values of shape {values.shape} do not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("sphere scalar values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, grid, func):
        """Sample ``func(points)`` on the grid nodes."""
        return cls(grid, func(grid.points))

    def mean(self):
        return integrate(self) / sphere_area(self.grid.n)

    def sup_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True)
class TangentField:
    """Tangent vectors at grid nodes, ambient Cartesian components."""

    grid: SphereGrid
    components: np.ndarray

    def radial_part(self):
        return np.einsum("...i,...i->...", self.components, self.grid.points)


@dataclass(frozen=True, eq=False)
class SphereSpectrum:
    """Band-limited scalar on S^{n-1}.

    n=2: ``coeffs`` has shape ``(2, K+1)`` holding ``a_k`` and ``b_k`` (``b_0 = 0``).
    n=3: ``coeffs`` has shape ``((L+1)**2,)`` ordered by ``l*l + l + m``.
    ``projected_mean`` records a zero mode removed before solving, if any.
    """

    n: int
    band: int
    coeffs: np.ndarray
    projected_mean: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        expected = (2, self.band + 1) if self.n == 2 else (n_coeffs(self.band),)
        if c.shape != expected:
            raise ShapeError(f"coefficient array {c.shape} does not match band {self.band} (expected {expected})")
        object.__setattr__(self, "coeffs", c)

    def coefficient(self, *index):
        """``a_k``/``b_k`` via ``('a', k)``/``('b', k)``; ``c_lm`` via ``(l, m)``."""
        if self.n == 2:
            kind, k = index
            return self.coeffs[0 if kind == "a" else 1, k]
        l, m = index
        return self.coeffs[lm_index(l, m)]

    def eigenvalues(self):
        """Eigenvalues of ``-Laplacian`` matching ``coeffs``."""
        if self.n == 2:
            k = np.arange(self.band + 1, dtype=float)
            return np.stack([k * k, k * k])
        return np.array([l * (l + 1.0) for l, _ in lm_pairs(self.band)])

    def scaled(self, factor):
        """Spectrum with each coefficient multiplied by ``factor`` (same shape)."""
        return SphereSpectrum(self.n, self.band, self.coeffs * factor)

    def laplacian_spectrum(self):
        return self.scaled(-self.eigenvalues())

    def mean(self):
        if self.n == 2:
            return float(self.coeffs[0, 0])
        return float(self.coeffs[0]) / np.sqrt(4.0 * np.pi)

    def _chunks(self, directions):
        d = np.asarray(directions, dtype=float)
        if d.shape[-1] != self.n:
            raise ShapeError(f"expected {self.n}-vectors, got shape {d.shape}")
        flat = d.reshape(-1, self.n)
        for start in range(0, flat.shape[0], _CHUNK):
            yield flat[start : start + _CHUNK]

    def evaluate(self, directions, what="value"):
        """Evaluate at unit vectors; ``what`` in {value, gradient, laplacian, derivative}.

        ``gradient`` is the surface gradient in Cartesian components; for
        n=2, ``derivative`` is ``d/dtheta``.
        """
        d = np.asarray(directions, dtype=float)
        lead = d.shape[:-1]
        parts = [self._evaluate_flat(chunk, what) for chunk in self._chunks(d)]
        out = np.concatenate(parts, axis=0) if parts else np.empty((0,) + ((self.n,) if what == "gradient" else ()))
        return out.reshape(lead + out.shape[1:])

    def evaluate_fields(self, directions):
        """Value, surface gradient and Laplacian in one pass (n=3 shares the Legendre tables)."""
        d = np.asarray(directions, dtype=float)
        lead = d.shape[:-1]
        parts = [self._fields_flat(chunk) for chunk in self._chunks(d)]
        if not parts:
            return np.empty(lead), np.empty(lead + (self.n,)), np.empty(lead)
        val, grad, lap = (np.concatenate(p, axis=0) for p in zip(*parts))
        return val.reshape(lead), grad.reshape(lead + (self.n,)), lap.reshape(lead)

    def _fields_flat(self, d):
        if self.n == 2:
            return self._eval_circle(d, "value"), self._eval_circle(d, "gradient"), self.laplacian_spectrum()._eval_circle(d, "value")
        theta, phi = to_angles(d)
        y, dth, dph = real_sph_harm(self.band, theta, phi, derivatives=True)
        ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
        e_th = np.stack([ct * cp, ct * sp, -st], axis=-1)
        e_ph = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
        grad = (dth @ self.coeffs)[:, None] * e_th + (dph @ self.coeffs)[:, None] * e_ph
        return y @ self.coeffs, grad, y @ (-self.eigenvalues() * self.coeffs)

    def _evaluate_flat(self, d, what):
        if what == "laplacian":
            return self.laplacian_spectrum()._evaluate_flat(d, "value")
        if self.n == 2:
            return self._eval_circle(d, what)
        return self._eval_sphere(d, what)

    def _eval_circle(self, d, what):
        theta = to_angles(d)
        k = np.arange(self.band + 1)
        kt = np.outer(theta, k)
        a, b = self.coeffs
        if what == "value":
            return np.cos(kt) @ a + np.sin(kt) @ b
        deriv = np.sin(kt) @ (-k * a) + np.cos(kt) @ (k * b)
        if what == "derivative":
            return deriv
        if what == "gradient":
            return deriv[:, None] * np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
        raise ValueError(f"unknown evaluation {what!r}")

    def _eval_sphere(self, d, what):
        theta, phi = to_angles(d)
        if what == "value":
            return real_sph_harm(self.band, theta, phi) @ self.coeffs
        if what != "gradient":
            raise ValueError(f"unknown evaluation {what!r}")
        return self._fields_flat(d)[1]


def integrate(s):
    """Quadrature of a sphere scalar against the solid-angle measure."""
    return float(np.sum(s.grid.weights * s.values))


def _basis_matrix(grid, band):
    return real_sph_harm(band, grid.theta, grid.phi).reshape(-1, n_coeffs(band))


def forward_transform(s, band):
    """Project a sampled scalar onto the band-limited basis."""
    grid = s.grid
    if band < 0 or band > grid.max_band():
        raise ResolutionError(f"band {band} exceeds what grid {grid.shape} resolves (max {grid.max_band()})")
    if grid.n == 2:
        k = np.arange(band + 1)
        kt = np.outer(grid.theta, k)
        ws = grid.weights * s.values
        a = (np.cos(kt).T @ ws) / np.pi
        b = (np.sin(kt).T @ ws) / np.pi
        a[0] *= 0.5
        b[0] = 0.0
        return SphereSpectrum(2, band, np.stack([a, b]))
    y = _basis_matrix(grid, band)
    return SphereSpectrum(3, band, y.T @ (grid.weights * s.values).ravel())


def inverse_transform(spec, grid):
    return SphereScalar(grid, spec.evaluate(grid.points))


def _check_mean(g, mean_tol, scale):
    mean = g.mean()
    ref = g.sup_norm() if scale is None else max(g.sup_norm(), scale)
    if abs(mean) > mean_tol * ref:
        raise SolvabilityError(
            f"source has nonzero sphere mean {mean:.3e} (tolerance {mean_tol:.1e} x {ref:.3e})", mean=mean
        )
    return mean


def poisson_solve(g, band, mean_tol=MEAN_TOL, scale=None):
    """Mean-zero solution of ``-Laplacian(phi) = g`` on S^{n-1}.

    ``|mean(g)|`` must not exceed ``mean_tol * max(|g|_inf, scale)``; the
    accepted residual mean is projected out and stored on the result.
    """
    mean = _check_mean(g, mean_tol, scale)
    spec = forward_transform(SphereScalar(g.grid, g.values - mean), band)
    lam = spec.eigenvalues()
    inv = np.divide(1.0, lam, out=np.zeros_like(lam), where=lam > 0)
    return SphereSpectrum(spec.n, band, spec.coeffs * inv, projected_mean=mean)


def circle_antiderivative(g, band, mean_tol=MEAN_TOL, scale=None):
    """Mean-zero ``h`` on S^1 with ``dh/dtheta = g``."""
    if g.grid.n != 2:
        raise DomainError("circle_antiderivative needs a scalar on S^1")
    mean = _check_mean(g, mean_tol, scale)
    spec = forward_transform(SphereScalar(g.grid, g.values - mean), band)
    a, b = spec.coeffs
    k = np.arange(band + 1, dtype=float)
    k[0] = 1.0
    ha, hb = -b / k, a / k
    ha[0] = hb[0] = 0.0
    return SphereSpectrum(2, band, np.stack([ha, hb]), projected_mean=mean)


def correction_tangent_field(spec, grid=None):
    """Data for the divergence-free correction, sampled on ``grid``.

    n=3: the tangent field dual to ``beta = -*d(phi)``, i.e. the surface
    gradient rotated by -90 degrees, ``grad(phi) x y``.
    n=2: the antiderivative ``h`` itself (a 0-form), as a sphere scalar.
    """
    if grid is None:
        grid = SphereGrid.for_band(spec.n, spec.band)
    if spec.n == 2:
        return SphereScalar(grid, spec.evaluate(grid.points))
    grad = spec.evaluate(grid.points, "gradient")
    return TangentField(grid, np.cross(grad, grid.points))

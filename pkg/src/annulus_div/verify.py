"""Independent numerical oracles and verification reports.

Nothing here reuses the assembly's formulas: divergences and curls come from
central finite differences of the evaluators, integrals from a separate
product Gauss quadrature, and boundary values from direct sampling.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import DomainError, StencilError
from .sphere import SphereGrid, circle_directions, fibonacci_directions

__all__ = [
    "CheckRecord",
    "VerificationReport",
    "VerifyConfig",
    "DEFAULT_TOLERANCES",
    "fd_divergence",
    "fd_divergence_richardson",
    "fd_curl",
    "boundary_directions",
    "interior_points",
    "random_interior_points",
    "annulus_quadrature",
    "run_suite",
]

# 4th-order central difference weights at offsets -2..2 (times 1/step)
_OFFSETS = (-2, -1, 1, 2)
_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)

DEFAULT_TOLERANCES = {
    "divergence_residual": 1e-6,
    "boundary_norm": 1e-8,
    "mean_zero_f": 1e-10,
    "mean_zero_tilde_f": 1e-10,
    "mean_zero_g": 1e-10,
    "correction_divergence_free": 1e-7,
    "lambda_boundary_vanishing": 1e-12,
    "q_annulus_integral": 1e-10,
    "q_boundary_match": 1e-12,
    "tilde_f_boundary_trace": 1e-12,
    "decomposition_moment": 1e-6,
    "decomposition_lambda": 1e-6,
}


def _check_stencil(x, step, domain):
    if domain is None:
        return
    rho = np.linalg.norm(x, axis=-1)
    reach = 2.0 * step
    if np.any(rho - reach < domain.r1 * (1.0 - 1e-12)) or np.any(rho + reach > domain.r2 * (1.0 + 1e-12)):
        raise StencilError(f"finite-difference stencil of reach {reach:.3g} leaves the annulus")


def _partial(field, x, step, axis, component):
    e = np.zeros(x.shape[-1])
    e[axis] = step
    total = 0.0
    for off, w in zip(_OFFSETS, _WEIGHTS):
        try:
            val = np.asarray(field(x + off * e))
        except DomainError as exc:
            raise StencilError(f"stencil point outside the evaluator's domain: {exc}") from exc
        total = total + w * (val[..., component] if component is not None else val)
    return total / step


def fd_divergence(field, x, step, domain=None):
    """Fourth-order central-difference divergence of ``field`` at points ``x``.

    With ``domain`` given, stencils that leave the closed annulus raise
    :class:`StencilError`.
    """
    x = np.asarray(x, dtype=float)
    if not step > 0:
        raise ValueError("step must be positive")
    _check_stencil(x, step, domain)
    return sum(_partial(field, x, step, i, i) for i in range(x.shape[-1]))


def fd_divergence_richardson(field, x, step, domain=None):
    """Richardson pair (step, step/2): returns ``(extrapolated, error_estimate)``."""
    coarse = fd_divergence(field, x, step, domain)
    fine = fd_divergence(field, x, step / 2.0, domain)
    extrapolated = (16.0 * fine - coarse) / 15.0
    return extrapolated, np.abs(extrapolated - fine)


def fd_curl(field, x, step, domain=None):
    """Fourth-order central-difference curl of a 3-vector field."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise ValueError("curl needs 3-vectors")
    _check_stencil(x, step, domain)

    def d(comp, axis):
        return _partial(field, x, step, axis, comp)

    return np.stack([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)], axis=-1)


def boundary_directions(n, count):
    if n == 2:
        return circle_directions(count)
    return fibonacci_directions(count)


def interior_points(domain, radial, directions, collar):
    """Tensor grid of ``radial`` radii x ``directions`` directions inside the collar."""
    lo, hi = domain.r1 + collar, domain.r2 - collar
    if not lo < hi:
        raise StencilError("boundary collar swallows the annulus")
    radii = lo + (hi - lo) * (np.arange(radial) + 0.5) / radial
    dirs = boundary_directions(domain.n, directions)
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, domain.n)


def random_interior_points(domain, count, collar, seed=0):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(count, domain.n))
    d /= np.linalg.norm(d, axis=1)[:, None]
    radii = rng.uniform(domain.r1 + collar, domain.r2 - collar, size=count)
    return d * radii[:, None]


def annulus_quadrature(func, domain, band, radial_nodes):
    """Product Gauss rule for ``int_A func``; exact for band-limited x polynomial integrands."""
    grid = SphereGrid.for_band(domain.n, band)
    x, w = np.polynomial.legendre.leggauss(radial_nodes)
    radii = domain.r1 + 0.5 * domain.width * (1.0 + x)
    wr = 0.5 * domain.width * w * radii ** (domain.n - 1)
    pts = radii[:, None, None] * grid.points.reshape(1, -1, domain.n)
    vals = np.asarray(func(pts.reshape(-1, domain.n))).reshape(radial_nodes, -1)
    return float(np.sum(wr[:, None] * vals * grid.weights.reshape(1, -1)))


@dataclass
class CheckRecord:
    name: str
    value: float
    tol: float
    passed: bool
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "value": self.value, "tol": self.tol, "pass": self.passed, "meta": self.meta}

    @classmethod
    def from_dict(cls, d):
        return cls(d["name"], float(d["value"]), float(d["tol"]), bool(d["pass"]), dict(d.get("meta", {})))

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (tol {self.tol:.1e})"


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def add(self, name, value, tol, meta):
        value = float(value)
        self.checks.append(CheckRecord(name, value, float(tol), bool(value <= tol), meta))

    def to_dict(self):
        return {"checks": [c.to_dict() for c in self.checks], "pass": self.passed}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        return cls([CheckRecord.from_dict(c) for c in d["checks"]])

    def lines(self):
        return [c.line() for c in self.checks]


@dataclass
class VerifyConfig:
    radial_samples: int = 8
    direction_samples: int = 64
    boundary_samples: int = 256
    random_points: int = 100
    quadrature_nodes: int = 128
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.tolerances or {})
        unknown = set(merged) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance names {sorted(unknown)}")
        if any(not v > 0 for v in merged.values()):
            raise ValueError("all tolerances must be positive")
        self.tolerances = merged
        if min(self.radial_samples, self.direction_samples, self.boundary_samples, self.random_points) < 1:
            raise ValueError("sample counts must be positive")

    def to_dict(self):
        return asdict(self)


def _max_abs(a):
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def run_suite(solution, source=None, config=None):
    """Run every check on an assembled solution; failures are recorded, never raised."""
    cfg = config or VerifyConfig()
    tol = cfg.tolerances
    source = source if source is not None else solution.source
    dom = solution.domain
    res = solution.resolution
    step = res.fd_step
    meta = {"band": res.band, "radial_nodes": res.radial_nodes, "fd_step": step}
    report = VerificationReport()

    pts = interior_points(dom, cfg.radial_samples, cfg.direction_samples, 2.0 * step)
    bdirs = boundary_directions(dom.n, cfg.boundary_samples)
    inner, outer = dom.r1 * bdirs, dom.r2 * bdirs
    f_in = source(pts)
    f_scale = max(_max_abs(f_in), _max_abs(source(inner)), _max_abs(source(outer)), solution.source_scale)
    rel = f_scale if f_scale > 0 else 1.0
    interior_meta = dict(meta, points=int(pts.shape[0]), collar=2.0 * step, f_norm=f_scale)
    boundary_meta = dict(meta, directions=cfg.boundary_samples)

    div_u = fd_divergence(solution, pts, step, dom)
    report.add("divergence_residual", _max_abs(div_u - f_in) / rel, tol["divergence_residual"], interior_meta)

    u_bd = np.concatenate([solution(inner), solution(outer)])
    report.add(
        "boundary_norm", _max_abs(np.linalg.norm(u_bd, axis=-1)) / (rel * dom.r2), tol["boundary_norm"], boundary_meta
    )

    quad_meta = dict(meta, quadrature_nodes=cfg.quadrature_nodes)
    vol_scale = rel * dom.volume()
    qband = max(res.band, 8)
    int_f = annulus_quadrature(source, dom, qband, cfg.quadrature_nodes)
    report.add("mean_zero_f", abs(int_f) / vol_scale, tol["mean_zero_f"], quad_meta)
    int_tf = annulus_quadrature(solution.tilde_f, dom, qband, cfg.quadrature_nodes)
    report.add("mean_zero_tilde_f", abs(int_tf) / vol_scale, tol["mean_zero_tilde_f"], quad_meta)
    g_mean = solution.g.mean()
    report.add(
        "mean_zero_g",
        abs(g_mean) / (rel * dom.shell_moment()),
        tol["mean_zero_g"],
        dict(meta, projected_mean=float(solution.spectrum.projected_mean)),
    )

    rpts = random_interior_points(dom, cfg.random_points, 2.0 * step, cfg.seed)
    div_w = fd_divergence(solution.correction_part, rpts, step, dom)
    report.add(
        "correction_divergence_free",
        _max_abs(div_w),
        tol["correction_divergence_free"],
        dict(meta, points=cfg.random_points, seed=cfg.seed, absolute=True),
    )

    lam = np.concatenate([solution.lambda_value(inner), solution.lambda_value(outer)])
    report.add("lambda_boundary_vanishing", _max_abs(lam) / (rel * dom.r2), tol["lambda_boundary_vanishing"], boundary_meta)

    int_q = annulus_quadrature(solution.tilde_f.polynomial, dom, qband, cfg.quadrature_nodes)
    report.add("q_annulus_integral", abs(int_q) / vol_scale, tol["q_annulus_integral"], quad_meta)

    q_err = np.concatenate(
        [solution.tilde_f.polynomial(p) - source(p) for p in (inner, outer)]
    )
    report.add("q_boundary_match", _max_abs(q_err) / rel, tol["q_boundary_match"], boundary_meta)
    tf_bd = np.concatenate([solution.tilde_f(inner), solution.tilde_f(outer)])
    report.add("tilde_f_boundary_trace", _max_abs(tf_bd) / rel, tol["tilde_f_boundary_trace"], boundary_meta)

    tf_in = solution.tilde_f(pts)
    div_v = fd_divergence(solution.moment_part, pts, step, dom)
    report.add("decomposition_moment", _max_abs(div_v - tf_in) / rel, tol["decomposition_moment"], interior_meta)
    div_l = fd_divergence(solution.lambda_part, pts, step, dom)
    report.add("decomposition_lambda", _max_abs(div_l - (f_in - tf_in)) / rel, tol["decomposition_lambda"], interior_meta)
    return report

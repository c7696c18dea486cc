import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from annulus_div.assembly import (
    CORRECTION_SIGN,
    AnnulusDomain,
    Resolution,
    assemble_solution,
    build_tilde_f,
    correction_field,
    correction_potential,
    cumulative_moment,
    cutoff_chi,
    cutoff_chi_prime,
    lambda_field,
    radial_moment_g,
)
from annulus_div.coefficients import build_correction
from annulus_div.exceptions import ConfigurationError, DomainError, SolvabilityError
from annulus_div.sources import make_source
from annulus_div.sphere import SphereGrid, SphereSpectrum, circle_directions, fibonacci_directions
from annulus_div.verify import annulus_quadrature, fd_curl, fd_divergence, random_interior_points

from conftest import KINDS

# (rho - 1)(2 - rho): vanishes on both spheres of A(1, 2)
ZERO_TRACE = {"kind": "poly", "coeffs": [-2.0, 3.0, -1.0]}


def dirs(n, count=256):
    return fibonacci_directions(count) if n == 3 else circle_directions(count)


def test_domain_validation():
    with pytest.raises(DomainError):
        AnnulusDomain(3, 2.0, 1.0)
    with pytest.raises(DomainError):
        AnnulusDomain(4, 1.0, 2.0)
    with pytest.raises(DomainError):
        AnnulusDomain(2, 0.0, 1.0)
    assert AnnulusDomain(3, 1, 2).volume() == pytest.approx(4 * np.pi * 7 / 3)


def test_cutoff_values():
    assert cutoff_chi(1.0, 1.0, 2.0) == 0.0
    assert cutoff_chi(2.0, 1.0, 2.0) == pytest.approx(1.0, abs=1e-16)
    assert cutoff_chi(1.5, 1.0, 2.0) == pytest.approx(2**-1.5, abs=1e-15)
    assert cutoff_chi(1.5, 1.0, 2.0) == pytest.approx(0.353553, abs=1e-6)
    assert cutoff_chi_prime(2.0, 1.0, 2.0) == 0.0
    assert cutoff_chi_prime(1.0, 1.0, 2.0) == 0.0
    assert cutoff_chi(0.5, 1.0, 2.0) == 0.0 and cutoff_chi(3.0, 1.0, 2.0) == 1.0
    with pytest.raises(DomainError):
        cutoff_chi(0.0, 1.0, 2.0)


@pytest.mark.parametrize("l", [0, 1])
def test_cutoff_derivative(l):
    rho = np.linspace(1.05, 2.95, 17)
    h = 1e-6
    num = (cutoff_chi(rho + h, 1.0, 3.0, l) - cutoff_chi(rho - h, 1.0, 3.0, l)) / (2 * h)
    assert_allclose(cutoff_chi_prime(rho, 1.0, 3.0, l), num, atol=1e-9)


def _coeffs_for(src, dom, band=8):
    grid = SphereGrid.for_band(dom.n, band)
    return build_correction(0, dom.n, dom.r1, dom.r2, src.traces(grid))


@pytest.mark.parametrize("n", [2, 3])
def test_tilde_f_equals_f_when_traces_vanish(n, rng):
    dom = AnnulusDomain(n, 1.0, 2.0)
    src = make_source("harmonic_radial", n, 1.0, 2.0, {"profile": ZERO_TRACE})
    tf = build_tilde_f(src, dom, _coeffs_for(src, dom))
    x = random_interior_points(dom, 50, 0.0, seed=1)
    assert_allclose(tf(x), src(x), atol=1e-14)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", KINDS)
def test_tilde_f_boundary_and_integral(n, kind):
    dom = AnnulusDomain(n, 1.0, 2.0)
    src = make_source(kind, n, 1.0, 2.0)
    tf = build_tilde_f(src, dom, _coeffs_for(src, dom))
    d = dirs(n)
    fnorm = max(np.max(np.abs(src(dom.r1 * d))), np.max(np.abs(src(1.5 * d))), 1.0)
    for r in (dom.r1, dom.r2):
        assert np.max(np.abs(tf(r * d))) <= 1e-12 * fnorm
    assert abs(annulus_quadrature(tf, dom, 8, 160)) <= 1e-10 * fnorm * dom.volume()


def test_tilde_f_rejects_mismatched_coefficients():
    dom = AnnulusDomain(3, 1.0, 2.0)
    src = make_source("boundary_loaded", 3, 1.0, 2.0)
    other = make_source("harmonic_radial", 3, 1.0, 2.0)
    with pytest.raises(ConfigurationError):
        build_tilde_f(src, dom, _coeffs_for(other, dom))
    grid = SphereGrid.for_band(3, 4)
    wrong = build_correction(0, 3, 1.0, 3.0, make_source("boundary_loaded", 3, 1.0, 3.0).traces(grid))
    with pytest.raises(ConfigurationError):
        build_tilde_f(src, dom, wrong)


@pytest.mark.parametrize("n", [2, 3])
def test_radial_moment_polynomial_profile(n):
    dom = AnnulusDomain(n, 1.0, 2.0)
    params = {"profile": ZERO_TRACE} if n == 2 else {"l": 2, "m": 1, "profile": ZERO_TRACE}
    src = make_source("harmonic_radial", n, 1.0, 2.0, params)
    grid = SphereGrid.for_band(n, 6)
    g = radial_moment_g(build_tilde_f(src, dom, _coeffs_for(src, dom)), dom, grid, nodes=8)
    # int_1^2 (rho-1)(2-rho) rho^(n-1)
    moment = {2: 1.0 / 4.0, 3: 23.0 / 60.0}[n]
    angular = src(grid.points * 1.5) / (0.5 * 0.5)
    assert_allclose(g.values, angular * moment, atol=1e-14)
    assert abs(g.mean()) < 1e-14


def test_radial_moment_zero():
    dom = AnnulusDomain(3, 1.0, 2.0)
    src = make_source("zero", 3, 1.0, 2.0)
    g = radial_moment_g(build_tilde_f(src, dom, _coeffs_for(src, dom)), dom, SphereGrid.for_band(3, 4))
    assert np.all(g.values == 0)


@pytest.mark.parametrize("n", [2, 3])
def test_cumulative_moment(n, solution_cache):
    sol = solution_cache("boundary_loaded", n)
    dom, tf = sol.domain, sol.tilde_f
    y = dirs(n, 5)
    assert cumulative_moment(tf, dom.r1 * y[0], dom) == 0.0
    assert cumulative_moment(tf, 0.5 * y[0], dom) == 0.0
    with pytest.raises(DomainError):
        cumulative_moment(tf, np.zeros(n), dom)
    # beyond the outer sphere the full moment scales like |x|^-n
    full = cumulative_moment(tf, dom.r2 * y[1], dom)
    assert cumulative_moment(tf, 3.0 * y[1], dom) == pytest.approx(full * (dom.r2 / 3.0) ** n, rel=1e-12)
    # the fixed-node evaluator agrees with the adaptive reference
    for x in random_interior_points(dom, 8, 0.0, seed=4):
        ref = cumulative_moment(tf, x, dom)
        mine = sol.moment_part(x[None])[0] @ x / (x @ x)
        assert mine == pytest.approx(ref, abs=1e-11 * sol.source_scale)


def test_cumulative_moment_closed_form():
    dom = AnnulusDomain(3, 1.0, 2.0)
    src = make_source("harmonic_radial", 3, 1.0, 2.0, {"profile": ZERO_TRACE})
    tf = build_tilde_f(src, dom, _coeffs_for(src, dom))
    y = np.array([0.6, 0.0, 0.8])
    rho = 1.7
    angular = src(1.5 * y) / 0.25
    # int_1^rho (s-1)(2-s) s^2 ds
    prim = lambda s: -2 * s**3 / 3 + 3 * s**4 / 4 - s**5 / 5
    expected = angular * (prim(rho) - prim(1.0)) / rho**3
    assert cumulative_moment(tf, rho * y, dom) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_lambda_vanishes_on_both_spheres(n):
    dom = AnnulusDomain(n, 1.0, 2.0)
    src = make_source("boundary_loaded", n, 1.0, 2.0)
    cc = _coeffs_for(src, dom)
    d = dirs(n)
    for r in (dom.r1, dom.r2):
        assert np.max(np.abs(lambda_field(src, cc, dom, r * d))) <= 1e-12 * dom.r2


def test_lambda_midpoint_matches_quadrature():
    dom = AnnulusDomain(3, 1.0, 2.0)
    src = make_source("boundary_loaded", 3, 1.0, 2.0)
    cc = _coeffs_for(src, dom)
    tf = build_tilde_f(src, dom, cc)
    y = np.array([0.0, 0.6, 0.8])
    rho = 1.5
    ref, _ = integrate.quad(lambda s: tf.polynomial(s * y) * s**2, 1.0, rho, epsrel=1e-13)
    assert lambda_field(src, cc, dom, rho * y) == pytest.approx(ref / rho**2, rel=1e-12)


def test_lambda_outside_is_domain_error():
    dom = AnnulusDomain(2, 1.0, 2.0)
    src = make_source("boundary_loaded", 2, 1.0, 2.0)
    with pytest.raises(DomainError):
        lambda_field(src, _coeffs_for(src, dom), dom, np.array([2.5, 0.0]))


@pytest.mark.parametrize("n", [2, 3])
def test_correction_field_zero_spectrum(n):
    dom = AnnulusDomain(n, 1.0, 2.0)
    shape = (2, 5) if n == 2 else (25,)
    spec = SphereSpectrum(n, 4, np.zeros(shape))
    x = random_interior_points(dom, 10, 0.0)
    assert np.all(correction_field(spec, dom, x) == 0)


@pytest.mark.parametrize("n", [2, 3])
def test_correction_field_divergence_free(n, solution_cache):
    sol = solution_cache("boundary_loaded", n, band=16, nodes=32)
    x = random_interior_points(sol.domain, 40, 1e-3, seed=2)
    div = fd_divergence(lambda p: correction_field(sol.spectrum, sol.domain, p), x, 1e-4, sol.domain)
    assert np.max(np.abs(div)) < 1e-8


def test_correction_field_matches_fd_curl(solution_cache):
    sol = solution_cache("boundary_loaded", 3, band=16, nodes=32)
    dom = sol.domain
    x = random_interior_points(dom, 30, 1e-3, seed=3)
    analytic = correction_field(sol.spectrum, dom, x)
    numeric = fd_curl(lambda p: correction_potential(sol.spectrum, dom, p), x, 1e-5 * dom.r1)
    assert np.max(np.abs(analytic - numeric)) < 1e-8 * max(1.0, np.max(np.abs(analytic)))


def test_correction_field_is_rotated_gradient_n2(solution_cache):
    sol = solution_cache("boundary_loaded", 2, band=16, nodes=32)
    dom = sol.domain
    x = random_interior_points(dom, 30, 1e-3, seed=5)
    h = 1e-5
    grad = np.stack(
        [
            (correction_potential(sol.spectrum, dom, x + h * e) - correction_potential(sol.spectrum, dom, x - h * e))
            / (2 * h)
            for e in np.eye(2)
        ],
        axis=-1,
    )
    rotated = np.stack([-grad[:, 1], grad[:, 0]], axis=-1)
    assert_allclose(correction_field(sol.spectrum, dom, x), rotated, atol=1e-8)


def test_sign_constant_is_pinned():
    assert CORRECTION_SIGN == {2: 1.0, 3: -1.0}


@pytest.mark.parametrize("n", [2, 3])
def test_wrong_sign_breaks_boundary_not_divergence(n):
    dom = AnnulusDomain(n, 1.0, 2.0)
    src = make_source("harmonic_radial", n, 1.0, 2.0)
    res = Resolution(16, 32)
    good = assemble_solution(src, dom, res)
    bad = assemble_solution(src, dom, res, correction_sign=-CORRECTION_SIGN[n])
    d = dirs(n)
    assert np.max(np.abs(good(2.0 * d))) < 1e-12
    assert np.max(np.linalg.norm(bad(2.0 * d), axis=-1)) / good.source_scale > 1e-2
    # the correction is divergence-free, so the sign is invisible to the divergence
    x = random_interior_points(dom, 20, 1e-3)
    dg = fd_divergence(good, x, 1e-4, dom)
    db = fd_divergence(bad, x, 1e-4, dom)
    assert np.max(np.abs(dg - db)) < 1e-8


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", KINDS)
def test_boundary_vanishing(n, kind, solution_cache):
    sol = solution_cache(kind, n)
    d = dirs(n)
    u = np.concatenate([sol(sol.domain.r1 * d), sol(sol.domain.r2 * d)])
    assert np.max(np.linalg.norm(u, axis=-1)) <= 1e-8 * max(sol.source_scale, 1e-300) * sol.domain.r2


@pytest.mark.parametrize("n", [2, 3])
def test_zero_source_gives_zero_field(n, solution_cache):
    sol = solution_cache("zero", n, band=8, nodes=16)
    x = random_interior_points(sol.domain, 20, 0.0)
    assert np.all(sol(x) == 0)


@pytest.mark.parametrize("n", [2, 3])
def test_interior_divergence(n, solution_cache):
    sol = solution_cache("boundary_loaded", n)
    x = random_interior_points(sol.domain, 60, 2e-4, seed=9)
    div = fd_divergence(sol, x, 1e-4, sol.domain)
    assert np.max(np.abs(div - sol.source(x))) <= 1e-6 * sol.source_scale


@pytest.mark.parametrize("n", [2, 3])
def test_linearity(n):
    dom = AnnulusDomain(n, 1.0, 2.0)
    res = Resolution(12, 24)
    f1 = make_source("harmonic_radial", n, 1.0, 2.0)
    f2 = make_source("boundary_loaded", n, 1.0, 2.0)
    u1, u2 = assemble_solution(f1, dom, res), assemble_solution(f2, dom, res)
    u12 = assemble_solution(1.5 * f1 - 0.25 * f2, dom, res)
    x = random_interior_points(dom, 30, 0.0, seed=11)
    assert_allclose(u12(x), 1.5 * u1(x) - 0.25 * u2(x), atol=1e-12 * max(u1.source_scale, u2.source_scale))


def test_rotation_equivariance():
    dom = AnnulusDomain(3, 1.0, 2.0)
    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    res = Resolution(16, 32)
    src = make_source("boundary_loaded", 3, 1.0, 2.0)
    u = assemble_solution(src, dom, res)
    u_rot = assemble_solution(src.rotated(rot), dom, res)
    x = random_interior_points(dom, 30, 0.0, seed=12)
    assert_allclose(u_rot(x @ rot.T), u(x) @ rot.T, atol=1e-9)


def test_evaluation_domain():
    sol = assemble_solution(make_source("harmonic_radial", 2, 1.0, 2.0), AnnulusDomain(2, 1.0, 2.0), Resolution(8, 16))
    with pytest.raises(DomainError):
        sol(np.zeros((1, 2)))
    with pytest.raises(DomainError):
        sol(np.array([[0.5, 0.0]]))
    with pytest.raises(DomainError):
        sol(np.array([[1.0, 0.0, 0.0]]))
    assert np.all(np.isfinite(sol(np.array([[0.9999, 0.0], [2.5, 0.0]]))))


def test_threads_do_not_change_results(monkeypatch):
    sol = assemble_solution(make_source("boundary_loaded", 3, 1.0, 2.0), AnnulusDomain(3, 1.0, 2.0), Resolution(8, 16))
    x = random_interior_points(sol.domain, 5000, 0.0, seed=13)
    one = sol.evaluate(x, threads=1)
    many = sol.evaluate(x, threads=4)
    assert np.array_equal(one, many)
    monkeypatch.setenv("ANNULUS_DIV_THREADS", "3")
    assert np.array_equal(sol(x), one)


def test_source_domain_mismatch():
    with pytest.raises(ConfigurationError):
        assemble_solution(make_source("zero", 3, 1.0, 2.0), AnnulusDomain(3, 1.0, 3.0))


class _BiasedSource:
    """Duck-typed source whose annulus mean is not zero."""

    n, r1, r2 = 2, 1.0, 2.0

    def __call__(self, x):
        return np.ones(np.shape(x)[:-1])

    def exact_mean(self):
        return 1.0

    def traces(self, grid):
        return make_source("zero", 2, 1.0, 2.0).traces(grid)


def test_nonzero_mean_source_is_rejected():
    with pytest.raises(SolvabilityError):
        assemble_solution(_BiasedSource(), AnnulusDomain(2, 1.0, 2.0), Resolution(8, 16))

"""Orthonormal real spherical harmonics on S^2 and their angular derivatives.

Associated Legendre functions are computed with the standard fully
normalized three-term recurrence, without the Condon-Shortley phase.
Derivatives use ladder identities that stay finite at the poles, so no
division by ``sin(theta)`` ever happens.
"""

import numpy as np

__all__ = ["n_coeffs", "lm_index", "lm_pairs", "normalized_legendre", "real_sph_harm"]


def n_coeffs(lmax):
    return (lmax + 1) ** 2


def lm_index(l, m):
    return l * l + l + m


def lm_pairs(lmax):
    return [(l, m) for l in range(lmax + 1) for m in range(-l, l + 1)]


def normalized_legendre(lmax, theta):
    """``pbar[l, m]`` = N_lm P_l^m(cos theta) for ``0 <= m <= l <= lmax``.

    ``N_lm = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!)``; entries with ``m > l`` are 0.
    """
    theta = np.asarray(theta, dtype=float)
    x, s = np.cos(theta), np.sin(theta)
    out = np.zeros((lmax + 1, lmax + 1) + theta.shape)
    out[0, 0] = np.sqrt(1.0 / (4.0 * np.pi))
    for m in range(1, lmax + 1):
        out[m, m] = np.sqrt((2 * m + 1) / (2.0 * m)) * s * out[m - 1, m - 1]
    for m in range(0, lmax):
        out[m + 1, m] = np.sqrt(2.0 * m + 3) * x * out[m, m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1) ** 2 - 1))
            out[l, m] = a * (x * out[l - 1, m] - b * out[l - 2, m])
    return out


def real_sph_harm(lmax, theta, phi, derivatives=False):
    """Real orthonormal harmonics sampled at ``(theta, phi)``.

    Returns an array of shape ``theta.shape + ((lmax+1)**2,)`` ordered by
    :func:`lm_index`.  Negative ``m`` carries ``sin(|m| phi)``, positive ``m``
    carries ``cos(m phi)``.  With ``derivatives=True`` also returns
    ``dY/dtheta`` and ``(1/sin theta) dY/dphi``.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    p = normalized_legendre(lmax + 1, theta)
    shape = theta.shape + (n_coeffs(lmax),)
    y = np.empty(shape)
    if derivatives:
        dth = np.empty(shape)
        dph = np.empty(shape)
    sqrt2 = np.sqrt(2.0)
    for m in range(lmax + 1):
        cm, sm = np.cos(m * phi), np.sin(m * phi)
        for l in range(m, lmax + 1):
            pl = p[l, m]
            if m == 0:
                y[..., lm_index(l, 0)] = pl
            else:
                y[..., lm_index(l, m)] = sqrt2 * pl * cm
                y[..., lm_index(l, -m)] = sqrt2 * pl * sm
            if not derivatives:
                continue
            if m == 0:
                dp = -np.sqrt(l * (l + 1.0)) * p[l, 1] if l > 0 else np.zeros_like(pl)
                dth[..., lm_index(l, 0)] = dp
                dph[..., lm_index(l, 0)] = 0.0
                continue
            # m >= 1 ladder identities in normalized form
            down = np.sqrt((l + m) * (l - m + 1.0)) * p[l, m - 1]
            up = np.sqrt((l - m) * (l + m + 1.0)) * p[l, m + 1] if m + 1 <= l else 0.0
            dp = 0.5 * (down - up)
            c = 0.5 * np.sqrt((2 * l + 1.0) / (2 * l + 3.0))
            m_over_sin = c * (
                np.sqrt((l + m + 1.0) * (l + m + 2.0)) * p[l + 1, m + 1]
                + np.sqrt((l - m + 1.0) * (l - m + 2.0)) * p[l + 1, m - 1]
            )
            dth[..., lm_index(l, m)] = sqrt2 * dp * cm
            dth[..., lm_index(l, -m)] = sqrt2 * dp * sm
            dph[..., lm_index(l, m)] = -sqrt2 * m_over_sin * sm
            dph[..., lm_index(l, -m)] = sqrt2 * m_over_sin * cm
    if derivatives:
        return y, dth, dph
    return y

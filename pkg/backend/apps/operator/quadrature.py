"""
Translation-invariant quadrature for the singular kernel |z|^(-n-2s).

The discrete nonlocal operator acting on a grid function f is

    (L f)_i = sum_{j != i} w_{i-j} (f_i - f_j)          cells inside the box
            + sum_axes c_a (2 f_i - f_{i+e_a} - f_{i-e_a})  own cell, Taylor-subtracted
            + t_i f_i                                      exterior tail

where L approximates 2 * P.V. int (f(x) - f(y)) |x-y|^(-n-2s) dy, so that
f^T (cell_measure * L) f approximates the double integral
int int |f(x) - f(y)|^2 / |x-y|^(n+2s) over R^n x R^n.

The computational box is the union of interior cells, [a + h/2, b - h/2] per
axis; f is taken as zero outside it.
"""

import numpy as np
from scipy import integrate
from scipy.special import beta, betainc

GAUSS_POINTS = 8


####################
# 1D
####################


def cell_weights_1d(n: int, h: float, s: float, band: int) -> np.ndarray:
    """w[k], k = 0..n-1, with w[0] = 0 (the own cell is handled separately)."""
    k = np.arange(n, dtype=float)
    w = np.zeros(n)
    near = (k >= 1) & (k <= band)
    lo, hi = (k[near] - 0.5) * h, (k[near] + 0.5) * h
    w[near] = 2.0 * (lo ** (-2.0 * s) - hi ** (-2.0 * s)) / (2.0 * s)
    far = k > band
    w[far] = 2.0 * h * (k[far] * h) ** (-1.0 - 2.0 * s)
    return w


def self_correction_1d(h: float, s: float) -> float:
    # 2 * int_{-h/2}^{h/2} (f_i - f(y)) |y|^{-1-2s} dy ~= -f'' * S, S = int r^2 |r|^{-1-2s}
    second_moment = 2.0 * (0.5 * h) ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    return second_moment / (h * h)


def exterior_tail_1d(x: np.ndarray, lo: float, hi: float, s: float) -> np.ndarray:
    """2 * int_{R \\ [lo,hi]} |x - y|^(-1-2s) dy, in closed form."""
    return 2.0 * ((x - lo) ** (-2.0 * s) + (hi - x) ** (-2.0 * s)) / (2.0 * s)


####################
# 2D
####################


def cell_weights_2d(
    n: tuple[int, int], h: tuple[float, float], s: float, band: int
) -> np.ndarray:
    """Table w[k0, k1] over nonnegative offsets; w[0, 0] = 0."""
    (n0, n1), (h0, h1) = n, h
    k0, k1 = np.meshgrid(np.arange(n0), np.arange(n1), indexing="ij")
    r2 = (k0 * h0) ** 2 + (k1 * h1) ** 2
    w = np.zeros((n0, n1))

    far = np.maximum(k0, k1) > band
    w[far] = 2.0 * h0 * h1 * r2[far] ** (-1.0 - s)

    near = (np.maximum(k0, k1) <= band) & (r2 > 0)
    x, gw = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    # tensor Gauss-Legendre over each near cell
    px = (k0[near][:, None, None] + 0.5 * x[None, :, None]) * h0
    py = (k1[near][:, None, None] + 0.5 * x[None, None, :]) * h1
    integrand = (px**2 + py**2) ** (-1.0 - s)
    cell = 0.25 * h0 * h1 * np.einsum("cij,i,j->c", integrand, gw, gw)
    w[near] = 2.0 * cell
    return w


def self_correction_2d(h: tuple[float, float], s: float) -> tuple[float, float]:
    """
    c_a = S_a / h_a^2 with S_a = int_cell r_a^2 |r|^{-2-2s} dr, evaluated in polar
    coordinates: 4 * int_0^{pi/2} trig^2(theta) R(theta)^{2-2s} / (2-2s) dtheta.
    """
    h0, h1 = h
    kink = np.arctan2(h1, h0)

    def radius(theta):
        c, sn = np.cos(theta), np.sin(theta)
        return min(
            0.5 * h0 / c if c > 0 else np.inf,
            0.5 * h1 / sn if sn > 0 else np.inf,
        )

    def moment(trig):
        value, _ = integrate.quad(
            lambda t: trig(t) ** 2 * radius(t) ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s),
            0.0,
            0.5 * np.pi,
            points=[kink],
            limit=200,
        )
        return 4.0 * value

    return moment(np.cos) / h0**2, moment(np.sin) / h1**2


def _cos_power_integral(phi: np.ndarray, s: float) -> np.ndarray:
    # int_0^phi cos^{2s} t dt for phi in [0, pi/2]
    return 0.5 * beta(0.5, s + 0.5) * betainc(0.5, s + 0.5, np.sin(phi) ** 2)


def exterior_tail_2d(
    x: np.ndarray, y: np.ndarray, box: tuple[tuple[float, float], ...], s: float
) -> np.ndarray:
    """
    2 * int_{R^2 \\ box} |p - q|^(-2-2s) dq per node p = (x, y). Each side of the
    box at normal distance d, seen under angles alpha and beta from the normal,
    contributes d^{-2s} / (2s) * (F(alpha) + F(beta)).
    """
    (lo0, hi0), (lo1, hi1) = box
    sides = [
        (x - lo0, y - lo1, hi1 - y),
        (hi0 - x, y - lo1, hi1 - y),
        (y - lo1, x - lo0, hi0 - x),
        (hi1 - y, x - lo0, hi0 - x),
    ]
    tail = np.zeros_like(x, dtype=float)
    for d, left, right in sides:
        alpha, beta_ = np.arctan2(left, d), np.arctan2(right, d)
        tail += (
            d ** (-2.0 * s)
            / (2.0 * s)
            * (_cos_power_integral(alpha, s) + _cos_power_integral(beta_, s))
        )
    return 2.0 * tail

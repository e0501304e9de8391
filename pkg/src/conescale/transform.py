"""Fourier-Laplace transforms along rotated, offset rays.

The transform pair implemented here maps samples on a time-side ray
``e^{-i psi} R + w`` to samples on the frequency-side ray
``e^{i psi} R + zeta`` and back:

    forward:  Fhat(lam) = e^{-i zeta w} / sqrt(2 pi) * integral e^{-i lam z} F(z) dz
    inverse:  F(z)      = e^{+i zeta w} / sqrt(2 pi) * integral e^{+i z lam} Fhat(lam) dlam

with the normalizing factor chosen so the pair is an isometry between the
weighted L2 spaces (see parseval_check).  Quadrature is a direct O(N*M)
oscillatory sum rather than an FFT: rays are rotated and weights are
exponential in complex directions, and at desk scale correctness wins over
speed.  The phase kernel separates as

    e^{-i lam z} = e^{-i xi t} * (pure diagonal phases in xi and t),

so one dense kernel exp(-i xi t) per grid pair serves every (psi, zeta, w)
combination and is cached.

Grids are paired commensurately (dxi * dt = 2 pi / M); then the discrete
forward and inverse are exact inverses of each other at the nodes, for any
sampled data, which is what the round-trip contract asks for.  The uniform
quadrature weights used here agree with composite trapezoid whenever the
integrand has decayed at the window ends, which the preconditions require.
"""

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, WeightOverflowError
from .geometry import (FREQUENCY, LOG_OVERFLOW_BOUND, TIME, Grid, Ray,
                       RayFunction, weighted_l2_norm)
from .stencils import derivative_uniform

_SQRT2PI = math.sqrt(2.0 * math.pi)

_KERNEL_CACHE = OrderedDict()
_KERNEL_CACHE_MAX = 3


def dual_grid(grid, count=None):
    """Frequency grid commensurate with `grid`: dxi * dt = 2 pi / count.

    Commensurate spacing makes the discrete transform pair unitary (up to
    the isometry factor), hence round trips exact at the nodes.
    """
    count = grid.count if count is None else int(count)
    dxi = 2.0 * math.pi / (count * grid.spacing)
    return Grid(half_width=0.5 * (count - 1) * dxi, count=count)


def _kernel(src_grid, dst_grid):
    """Cached M x N matrix exp(-i * outer(xi, t))."""
    key = (src_grid, dst_grid)
    if key in _KERNEL_CACHE:
        _KERNEL_CACHE.move_to_end(key)
        return _KERNEL_CACHE[key]
    E = np.exp(-1j * np.outer(dst_grid.nodes, src_grid.nodes))
    _KERNEL_CACHE[key] = E
    while len(_KERNEL_CACHE) > _KERNEL_CACHE_MAX:
        _KERNEL_CACHE.popitem(last=False)
    return E


def scaled_values(values, exponents):
    """values * exp(exponents), evaluated safely when either factor alone
    would overflow or underflow; zeros stay zeros."""
    values = np.asarray(values, dtype=complex)
    exponents = np.asarray(exponents, dtype=complex)
    mag = np.abs(values)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mag = np.where(mag > 0.0, np.log(np.where(mag > 0.0, mag, 1.0)), -np.inf)
        phase = np.where(mag > 0.0, values / np.where(mag > 0.0, mag, 1.0), 0.0)
    if exponents.ndim < values.ndim:
        exponents = exponents.reshape(exponents.shape + (1,) * (values.ndim - exponents.ndim))
    total = exponents + log_mag
    out = np.where(np.isneginf(total.real), 0.0, np.exp(np.where(np.isneginf(total.real), 0.0, total)))
    return out * phase


@dataclass(frozen=True)
class TransformContext:
    """Grids plus the (psi, zeta, w) parameters of one transform pair."""

    psi: float
    zeta: complex = 0j
    w: complex = 0j
    src_grid: Grid = None
    dst_grid: Grid = None

    def __post_init__(self):
        if self.src_grid is None:
            raise ConfigurationError("transform context needs a source grid")
        if self.dst_grid is None:
            object.__setattr__(self, "dst_grid", dual_grid(self.src_grid))
        object.__setattr__(self, "zeta", complex(self.zeta))
        object.__setattr__(self, "w", complex(self.w))
        tol = 1.0 + 1e-9
        if self.dst_grid.spacing > tol * math.pi / self.src_grid.half_width:
            raise ConfigurationError(
                "frequency spacing violates the Nyquist bound pi / T for the "
                "source grid extent"
            )
        if self.src_grid.spacing > tol * math.pi / self.dst_grid.half_width:
            raise ConfigurationError(
                "time spacing violates the Nyquist bound pi / T for the "
                "frequency grid extent"
            )

    @property
    def time_ray(self):
        return Ray(self.psi, self.w, TIME)

    @property
    def frequency_ray(self):
        return Ray(self.psi, self.zeta, FREQUENCY)

    # separable pieces of Im(lam * z) = a*xi + b*t + c on the two grids
    def _phase_slopes(self):
        dir_f = self.frequency_ray.direction
        dir_t = self.time_ray.direction
        a = (dir_f * self.w).imag
        b = (self.zeta * dir_t).imag
        c = (self.zeta * self.w).imag
        return a, b, c

    def _check_pair_overflow(self, sign, xi, t, xi_log, t_log):
        # |e^{-i lam z}| = e^{+Im(lam z)} on the forward pass (sign +1),
        # |e^{+i z lam}| = e^{-Im(lam z)} on the inverse pass (sign -1)
        a, b, c = self._phase_slopes()
        xi_part = sign * a * xi + xi_log
        t_part = sign * b * t + t_log
        worst = np.max(xi_part) + np.max(t_part) + sign * c
        if worst > LOG_OVERFLOW_BOUND:
            i = int(np.argmax(xi_part))
            k = int(np.argmax(t_part))
            raise WeightOverflowError(
                (i, k),
                (self.frequency_ray.points(xi[i]), self.time_ray.points(t[k])),
                float(worst),
            )

    def _data_log(self, values):
        mag = np.max(np.abs(values), axis=1)
        with np.errstate(divide="ignore"):
            return np.where(mag > 0, np.log(np.where(mag > 0, mag, 1.0)), -np.inf)

    def forward(self, f):
        """Time side to frequency side.

        Returns samples of the transform on the frequency ray; the weight
        order is carried over and the frequency-side weight number is w.
        """
        self._require_ray(f, self.time_ray)
        t = self.src_grid.nodes
        xi = self.dst_grid.nodes
        self._check_pair_overflow(1.0, xi, t, 0.0, self._data_log(f.values))
        dir_t = self.time_ray.direction
        dir_f = self.frequency_ray.direction
        inner = scaled_values(f.values, -1j * self.zeta * dir_t * t)
        E = _kernel(self.src_grid, self.dst_grid)
        sums = E @ inner
        prefactor = (
            self.src_grid.spacing / _SQRT2PI * dir_t
            * np.exp(-2j * self.zeta * self.w)
        )
        out = scaled_values(sums * prefactor, -1j * self.w * dir_f * xi)
        return RayFunction(self.frequency_ray, self.dst_grid, out,
                           f.weight_order, self.w)

    def inverse(self, fhat):
        """Frequency side back to the time side (mirror of forward)."""
        self._require_ray(fhat, self.frequency_ray)
        t = self.src_grid.nodes
        xi = self.dst_grid.nodes
        self._check_pair_overflow(-1.0, xi, t, self._data_log(fhat.values), 0.0)
        dir_t = self.time_ray.direction
        dir_f = self.frequency_ray.direction
        inner = scaled_values(fhat.values, 1j * self.w * dir_f * xi)
        E = _kernel(self.src_grid, self.dst_grid)
        sums = np.conj(E.T @ np.conj(inner))
        prefactor = (
            self.dst_grid.spacing / _SQRT2PI * dir_f
            * np.exp(2j * self.zeta * self.w)
        )
        out = scaled_values(sums * prefactor, 1j * self.zeta * dir_t * t)
        return RayFunction(self.time_ray, self.src_grid, out,
                           fhat.weight_order, self.zeta)

    def pullback_spectrum(self, f):
        """Fourier transform of the weighted pullback of a time-side function.

        Returns (xi, spectrum, dxi) where spectrum samples
        (2 pi)^{-1/2} * integral e^{-i xi t} e^{-i zeta z(t)} F(z(t)) dt
        on the real frequency parameters of the destination grid.
        """
        self._require_ray(f, self.time_ray)
        t = self.src_grid.nodes
        dir_t = self.time_ray.direction
        b = (self.zeta * dir_t).imag
        log_data = self._data_log(f.values)
        worst = np.max(b * t + log_data) + (self.zeta * self.w).imag
        if worst > LOG_OVERFLOW_BOUND:
            k = int(np.argmax(b * t + log_data))
            raise WeightOverflowError(k, self.time_ray.points(t[k]), float(worst))
        inner = scaled_values(f.values, -1j * self.zeta * (dir_t * t + self.w))
        E = _kernel(self.src_grid, self.dst_grid)
        spectrum = (self.src_grid.spacing / _SQRT2PI) * (E @ inner)
        return self.dst_grid.nodes, spectrum, self.dst_grid.spacing

    def evaluate_continuation(self, fhat, z_points):
        """Inverse transform evaluated at arbitrary complex points.

        Used to analytically continue a solution off its ray from the
        frequency-side data.  Exponents are combined with the data
        magnitudes in log space, so growing phase factors are harmless
        whenever the products stay representable.
        """
        self._require_ray(fhat, self.frequency_ray)
        z = np.asarray(z_points, dtype=complex)
        lam = fhat.points
        log_data = self._data_log(fhat.values)
        expo = 1j * np.outer(z, lam)
        combined = expo.real + log_data[None, :]
        worst = float(np.max(combined))
        if worst > LOG_OVERFLOW_BOUND:
            flat = int(np.argmax(combined))
            raise WeightOverflowError(flat % lam.size, lam[flat % lam.size], worst)
        mag = np.abs(fhat.values)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_mag = np.where(mag > 0, np.log(np.where(mag > 0, mag, 1.0)), -np.inf)
            phase = np.where(mag > 0, fhat.values / np.where(mag > 0, mag, 1.0), 0.0)
        out = np.zeros((z.size, fhat.dim), dtype=complex)
        for comp in range(fhat.dim):
            total = expo + log_mag[None, :, comp]
            term = np.where(np.isneginf(total.real), 0.0,
                            np.exp(np.where(np.isneginf(total.real), 0.0, total)))
            out[:, comp] = term @ phase[:, comp]
        prefactor = (self.dst_grid.spacing / _SQRT2PI
                     * self.frequency_ray.direction
                     * np.exp(1j * self.zeta * self.w))
        return out * prefactor

    def _require_ray(self, f, ray):
        got = f.ray
        if got.side != ray.side or abs(got.direction - ray.direction) > 1e-12 \
                or abs(got.offset - ray.offset) > 1e-12 * max(1.0, abs(ray.offset)):
            raise ConfigurationError(
                f"ray function lives on {got}, context expects {ray}"
            )

    def sample_time(self, evaluator, weight_order=0.0):
        """Sample an analytic evaluator on the context's time ray."""
        values = evaluator(self.time_ray.points(self.src_grid.nodes))
        return RayFunction(self.time_ray, self.src_grid, values,
                           weight_order, self.zeta)


@dataclass(frozen=True)
class ParsevalReport:
    lhs: float
    rhs: float
    rel_err: float


def parseval_check(ctx, f):
    """Isometry check: frequency-side and time-side weighted norms agree.

    The frequency side carries the weight number w, the time side -zeta
    (the two sides swap roles under the transform); both norms are order 0.
    """
    fhat = ctx.forward(f)
    lhs = weighted_l2_norm(fhat, order=0.0, number=ctx.w)
    rhs = weighted_l2_norm(f, order=0.0, number=-ctx.zeta)
    denom = max(lhs, rhs)
    rel = abs(lhs - rhs) / denom if denom > 0.0 else 0.0
    return ParsevalReport(lhs, rhs, rel)


def apply_derivative_rule(ctx, fhat, j, tail_tol=1e-8):
    """Inverse transform of lam^j * Fhat, realizing D^j on the time side.

    Refuses to proceed when lam^j * Fhat has not decayed at the frequency
    window ends, since the quadrature would silently truncate it.
    """
    j = int(j)
    if j < 0:
        raise ValueError("derivative order must be nonnegative")
    lam = fhat.points
    scaled = fhat.values * (lam ** j)[:, None]
    peak = float(np.max(np.abs(scaled)))
    if peak > 0.0:
        edge = float(max(np.max(np.abs(scaled[0])), np.max(np.abs(scaled[-1]))))
        if edge > tail_tol * peak:
            raise ConfigurationError(
                f"lam^{j} * Fhat has tail mass {edge / peak:.2e} at the "
                f"frequency window ends; enlarge the grid"
            )
    return ctx.inverse(fhat.with_values(scaled))


def derivative_rule_deviation(ctx, fhat, j, acc=2):
    """Max-abs gap between the derivative rule and finite differences.

    Compares D^j of the inverse transform (centered differences of the
    stated accuracy along the time ray) with the inverse transform of
    lam^j * Fhat, over the stencil-valid interior.
    """
    via_rule = apply_derivative_rule(ctx, fhat, j)
    base = ctx.inverse(fhat)
    deriv, core = derivative_uniform(base.values, base.grid.spacing, j, acc=acc)
    dir_inv = 1.0 / base.ray.direction
    deriv = deriv * (-1j * dir_inv) ** j
    gap = np.abs(deriv[core] - via_rule.values[core])
    return float(np.max(gap)) if gap.size else 0.0

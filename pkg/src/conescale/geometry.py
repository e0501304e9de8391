"""Rays, cones, grids, and weighted norms along lines in the complex plane.

Everything downstream is built on four primitives.  A Ray is a rotated,
offset copy of the real line; frequency-side rays turn counterclockwise
(points ``offset + e^{i*angle} t``) while time-side rays turn clockwise
(``offset + e^{-i*angle} t``).  A Cone is the double-napped sector swept by
such rays.  A Grid is a uniform sampling of the ray parameter, and a
RayFunction couples samples of a vector-valued function on a ray with the
weight metadata (order ``ell`` and a complex weight number) that define its
weighted L2 and Sobolev norms.

Norms are computed by composite trapezoid quadrature over the grid, with an
exponential-weight log-magnitude pre-pass so overflow surfaces as a
structured error instead of inf, and a tail-mass diagnostic so truncation
problems surface as warnings.
"""

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import WeightOverflowError
from .stencils import derivative_uniform

# exp() overflows near 709.78 for float64; stay clear of it
LOG_OVERFLOW_BOUND = 700.0
# warn when the norm integrand has not decayed by this factor at the grid ends
TAIL_WARN = 1e-10

TIME = "time"
FREQUENCY = "frequency"


def normalize_angle(psi):
    """Map an angle to the canonical interval [-pi, pi)."""
    out = math.fmod(float(psi) + math.pi, 2.0 * math.pi)
    if out < 0.0:
        out += 2.0 * math.pi
    return out - math.pi


def exp_weight(z, zeta):
    """The exponential weight exp(-i*zeta*z)."""
    return np.exp(-1j * np.asarray(zeta) * np.asarray(z))


def exp_weight_log(z, zeta):
    """log |exp(-i*zeta*z)|, i.e. Re(-i*zeta*z); use to test for overflow."""
    return np.real(-1j * np.asarray(zeta) * np.asarray(z))


@dataclass(frozen=True)
class Ray:
    """A line ``offset + direction * R`` with side-dependent direction.

    ``side`` resolves the rotation convention: frequency-side rays use
    direction ``e^{i*angle}``, time-side rays ``e^{-i*angle}``.
    """

    angle: float
    offset: complex = 0j
    side: str = FREQUENCY

    def __post_init__(self):
        if self.side not in (TIME, FREQUENCY):
            raise ValueError(f"unknown ray side {self.side!r}")
        object.__setattr__(self, "angle", normalize_angle(self.angle))
        object.__setattr__(self, "offset", complex(self.offset))

    @property
    def direction(self):
        sign = 1.0 if self.side == FREQUENCY else -1.0
        return cmath.exp(1j * sign * self.angle)

    def points(self, t):
        """Complex points at ray parameters ``t``."""
        return self.offset + self.direction * np.asarray(t)

    def parameter(self, z, tol=1e-9):
        """Ray parameter of a point on the ray; rejects off-ray points."""
        u = (complex(z) - self.offset) / self.direction
        scale = max(1.0, abs(u))
        if abs(u.imag) > tol * scale:
            raise ValueError(f"point {z} is not on the ray (offset {u.imag:.3g})")
        return u.real

    def contains(self, z, tol=1e-9):
        u = (complex(z) - self.offset) / self.direction
        return abs(u.imag) <= tol * max(1.0, abs(u))


@dataclass(frozen=True)
class Cone:
    """Open double-napped cone with vertex, opening angle, and orientation.

    Orientation +1 sweeps counterclockwise from the real direction (local
    angles in (0, angle) mod pi), orientation -1 sweeps clockwise.  With
    angle = pi the cone is the plane slit along the line through the vertex.
    """

    angle: float
    vertex: complex = 0j
    orientation: int = 1

    def __post_init__(self):
        if not 0.0 < self.angle <= math.pi:
            raise ValueError("cone angle must lie in (0, pi]")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        object.__setattr__(self, "vertex", complex(self.vertex))

    def _local_angle(self, lam):
        return (self.orientation * cmath.phase(complex(lam) - self.vertex)) % math.pi

    def contains(self, lam):
        """Open membership: boundary rays and the vertex are excluded."""
        lam = complex(lam)
        if lam == self.vertex:
            return False
        theta = self._local_angle(lam)
        return 0.0 < theta < self.angle

    def contains_closed(self, lam, margin=0.0):
        """Closed membership with an angular safety margin (radians)."""
        lam = complex(lam)
        if abs(lam - self.vertex) <= max(margin, 0.0) * max(1.0, abs(self.vertex)):
            return True
        theta = self._local_angle(lam)
        return theta <= self.angle + margin or theta >= math.pi - margin

    def ray(self, psi_local, side=FREQUENCY):
        """The ray at local angle ``psi_local`` in [0, angle] through the vertex.

        The Ray's own side convention absorbs the rotation direction, so the
        same signed angle serves both the frequency cone and its time-side
        dual.
        """
        if not 0.0 <= psi_local <= self.angle + 1e-15:
            raise ValueError("local angle outside [0, cone angle]")
        return Ray(self.orientation * psi_local, self.vertex, side)

    def boundary_rays(self, side=FREQUENCY):
        return self.ray(0.0, side), self.ray(self.angle, side)


@dataclass(frozen=True)
class Disk:
    """Closed disk |z - center| <= radius, used as a spectrum region."""

    center: complex
    radius: float

    def contains_closed(self, lam, margin=0.0):
        return abs(complex(lam) - self.center) <= self.radius + margin


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid t_k = -T + k * (2T / (N-1)), k = 0..N-1."""

    half_width: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("grid needs at least 2 nodes")
        if not self.half_width > 0.0:
            raise ValueError("grid half-width must be positive")

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.count - 1)

    @property
    def nodes(self):
        return -self.half_width + self.spacing * np.arange(self.count)

    def trapezoid_weights(self):
        w = np.ones(self.count)
        w[0] = w[-1] = 0.5
        return w


@dataclass(frozen=True)
class RayFunction:
    """Samples of a vector-valued function on a ray, with weight metadata.

    ``values`` has one row per grid node; scalar data may be passed 1-D and
    is stored as a single column.  ``weight_order`` is the polynomial weight
    exponent ell, ``weight_number`` the complex number in the exponential
    weight (zeta on the time side, w on the frequency side).
    """

    ray: Ray
    grid: Grid
    values: np.ndarray
    weight_order: float = 0.0
    weight_number: complex = 0j

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] != self.grid.count:
            raise ValueError(
                f"values must have shape ({self.grid.count}, n), got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            bad = int(np.argwhere(~np.isfinite(vals))[0][0])
            raise ValueError(f"non-finite sample at node {bad}")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "weight_number", complex(self.weight_number))
        object.__setattr__(self, "weight_order", float(self.weight_order))

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def points(self):
        return self.ray.points(self.grid.nodes)

    def with_values(self, values):
        return RayFunction(self.ray, self.grid, values,
                           self.weight_order, self.weight_number)


@dataclass(frozen=True)
class NormReport:
    """A norm value together with its truncation diagnostic."""

    value: float
    tail_mass: float


def _quadratic_form(values, form):
    """<H v, v> per node, real and clipped at zero.

    Infs are allowed to propagate: the norm overflow check downstream turns
    them into a structured error.
    """
    with np.errstate(over="ignore"):
        if form is None:
            q = np.sum(np.abs(values) ** 2, axis=1)
        else:
            q = np.real(np.einsum("ki,ij,kj->k", np.conj(values), form, values))
    return np.maximum(q, 0.0)


def _weighted_integrand_log(f, order, number, form, mask=None):
    """(log integrand, quadratic form) for the weighted L2 norm squared.

    Splitting into log weight + data keeps huge weights representable until
    we know the product is safe; the caller adds quadrature weights.
    """
    z = f.points
    log_w = -2.0 * np.imag(number * z) + order * np.log1p(np.abs(z) ** 2)
    q = _quadratic_form(f.values, form)
    if mask is not None:
        q = np.where(mask, q, 0.0)
    return log_w, q


def weighted_l2_report(f, form=None, order=None, number=None, mask=None):
    """Weighted L2 norm of a RayFunction plus a tail-mass diagnostic.

    Computes ( integral |exp(2 i w lam)| (1+|lam|^2)^ell <H f, f> |dlam| )^(1/2)
    by composite trapezoid along the ray, where w/ell default to the
    function's weight metadata.  ``mask`` restricts to a node subset (used
    for half-line norms).  Raises WeightOverflowError naming the first node
    whose integrand would overflow.
    """
    order = f.weight_order if order is None else float(order)
    number = f.weight_number if number is None else complex(number)
    log_w, q = _weighted_integrand_log(f, order, number, form, mask)
    with np.errstate(divide="ignore"):
        log_total = log_w + np.where(q > 0.0, np.log(np.where(q > 0, q, 1.0)), -np.inf)
    if np.any(log_total > LOG_OVERFLOW_BOUND):
        k = int(np.argmax(log_total))
        raise WeightOverflowError(k, f.points[k], float(log_total[k]))
    integrand = np.exp(log_w) * q
    w = f.grid.trapezoid_weights()
    total = float(np.sum(w * integrand) * f.grid.spacing)
    peak = float(np.max(integrand)) if integrand.size else 0.0
    if peak > 0.0:
        tail = float(max(integrand[0], integrand[-1]) / peak)
    else:
        tail = 0.0
    return NormReport(math.sqrt(max(total, 0.0)), tail)


def weighted_l2_norm(f, form=None, order=None, number=None):
    """Weighted L2 norm along a ray; see weighted_l2_report for the formula.

    Warns when the integrand has not decayed at the grid ends, since the
    quadrature silently truncates there.
    """
    report = weighted_l2_report(f, form, order=order, number=number)
    if report.tail_mass > TAIL_WARN:
        warnings.warn(
            f"norm integrand tail mass {report.tail_mass:.2e} exceeds "
            f"{TAIL_WARN:.0e}; the grid window may truncate the integral",
            RuntimeWarning,
            stacklevel=2,
        )
    return report.value


def sobolev_norm_spectral(f, ell, ctx, form=None):
    """Sobolev norm of a time-side RayFunction via its frequency content.

    Pulls the exponentially weighted samples back to the real parameter,
    takes their Fourier transform on the context's frequency grid, and
    integrates (1+xi^2)^ell there.  Works for any real ell; for nonnegative
    integer ell (and zero weight number) it agrees with the derivative-form
    norm to quadrature accuracy.
    """
    if f.ray.side != TIME:
        raise ValueError("spectral Sobolev norm expects a time-side ray function")
    xi, spectrum, dxi = ctx.pullback_spectrum(f)
    q = _quadratic_form(spectrum, form)
    weight = (1.0 + xi ** 2) ** float(ell)
    w = np.ones(xi.size)
    w[0] = w[-1] = 0.5
    total = float(np.sum(w * weight * q) * dxi)
    return math.sqrt(max(total, 0.0))


def sobolev_norm_derivative(f, ell, form=None, acc=8):
    """Sobolev norm from weighted derivatives along the ray.

    For integer ell >= 0 this evaluates

        sum_j C(ell, j) * integral |e^{-i zeta z} D^j f(z)|^2 |dz|

    with D the complex derivative along the ray, approximated by centered
    finite differences; the binomial weights make the value coincide with
    the spectral-side norm (weight (1+xi^2)^ell) when the weight number is
    zero, so the two routes can cross-check each other.  Quadrature covers
    the stencil-valid interior, which is harmless for the decaying corpus.
    """
    ell = _check_integer_order(ell)
    grid = f.grid
    if grid.count < 2 * ell + 2:
        raise ValueError("grid too short for the requested derivative order")
    z = f.points
    log_w = -2.0 * np.imag(f.weight_number * z)
    if np.any(log_w > LOG_OVERFLOW_BOUND):
        k = int(np.argmax(log_w))
        raise WeightOverflowError(k, z[k], float(log_w[k]))
    weight = np.exp(log_w)
    dir_inv = 1.0 / f.ray.direction
    total = 0.0
    valid_lo, valid_hi = 0, grid.count
    terms = []
    for j in range(ell + 1):
        deriv, core = derivative_uniform(f.values, grid.spacing, j, acc=acc)
        deriv = deriv * (-1j * dir_inv) ** j
        valid_lo = max(valid_lo, core.start)
        valid_hi = min(valid_hi, core.stop)
        terms.append((math.comb(ell, j), deriv))
    sl = slice(valid_lo, valid_hi)
    w = np.ones(valid_hi - valid_lo)
    w[0] = w[-1] = 0.5
    for coeff, deriv in terms:
        q = _quadratic_form(deriv[sl], form)
        total += coeff * float(np.sum(w * weight[sl] * q) * grid.spacing)
    return math.sqrt(max(total, 0.0))


def _check_integer_order(ell):
    if isinstance(ell, float) and not ell.is_integer():
        raise ValueError("derivative-form norm needs a nonnegative integer order")
    ell = int(ell)
    if ell < 0:
        raise ValueError("derivative-form norm needs a nonnegative integer order")
    return ell

"""Numerical certificates for Hardy-class behavior over cones.

A ConeFunction samples an analytic candidate on a fan of rays through a
cone.  The operations here never prove membership (a finite scan cannot);
they certify consistency: per-ray weighted norms stay uniformly bounded
relative to the boundary norms (membership_scan), the function is
reproduced from its boundary data by a Cauchy contour integral
(cauchy_reconstruct), half-line projections behave like projections
(project_halfline and friends), and support on a half-line corresponds to
bounded norms on lines sweeping a half-plane (paley_wiener_check,
entire_window_check).
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedKernelError, WeightOverflowError
from .geometry import (FREQUENCY, LOG_OVERFLOW_BOUND, TIME, Cone, Grid, Ray,
                       RayFunction, weighted_l2_report)
from .transform import TransformContext, scaled_values

_SQRT2PI = math.sqrt(2.0 * math.pi)

RATIO_BOUND = 10.0
PW_BOUND = 1.5
WINDOW_BOUND = 10.0
# a norm integrand that has not decayed to this fraction of its peak by the
# grid ends is treated as divergent, not merely inaccurate
DIVERGENCE_TAIL = 1e-6
DIST_MIN_FACTOR = 5.0


@dataclass(frozen=True)
class ConeFunction:
    """Per-angle ray samples of a function on a frequency-side cone."""

    cone: Cone
    angles: tuple
    rays: tuple
    weight_order: float = 0.0
    weight_number: complex = 0j

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        if len(angles) != len(self.rays):
            raise ValueError("need one ray function per angle")
        if sorted(angles) != list(angles):
            raise ValueError("angle grid must be sorted")
        if abs(angles[0]) > 1e-12 or abs(angles[-1] - self.cone.angle) > 1e-9:
            raise ValueError("angle grid must include both boundary angles")
        dims = {rf.dim for rf in self.rays}
        if len(dims) != 1:
            raise ValueError("all rays must share the value dimension")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "rays", tuple(self.rays))
        object.__setattr__(self, "weight_number", complex(self.weight_number))

    @classmethod
    def from_callable(cls, cone, func, grid, n_angles=7,
                      weight_order=0.0, weight_number=0j):
        """Sample an analytic callable on n_angles rays through the cone."""
        angles = np.linspace(0.0, cone.angle, n_angles)
        rays = []
        for psi in angles:
            ray = cone.ray(psi, FREQUENCY)
            vals = func(ray.points(grid.nodes))
            rays.append(RayFunction(ray, grid, vals, weight_order, weight_number))
        return cls(cone, tuple(angles), tuple(rays), weight_order, weight_number)

    @property
    def boundary(self):
        return self.rays[0], self.rays[-1]


@dataclass(frozen=True)
class MembershipReport:
    per_angle_norms: tuple
    sup_norm: float
    boundary_norm_sum: float
    ratio: float
    verdict: str
    diagnostics: tuple = ()


def membership_scan(f, ratio_bound=RATIO_BOUND, divergence_tail=DIVERGENCE_TAIL):
    """Scan per-angle weighted norms and compare to the boundary norm sum.

    The verdict is only ever "member-consistent on this grid": rays whose
    integrand overflows or has not decayed inside the window count as
    divergent and force "violated"; otherwise the sup over the sampled
    angles must stay within ratio_bound times the boundary norm sum.
    """
    if len(f.angles) < 5:
        raise ValueError("membership scan needs at least 5 angles")
    norms = []
    diagnostics = []
    divergent = False
    for psi, rf in zip(f.angles, f.rays):
        try:
            rep = weighted_l2_report(rf)
        except WeightOverflowError as exc:
            norms.append(math.inf)
            diagnostics.append(f"psi={psi:.6g}: weight overflow ({exc})")
            divergent = True
            continue
        norms.append(rep.value)
        if rep.tail_mass > divergence_tail:
            diagnostics.append(
                f"psi={psi:.6g}: integrand tail mass {rep.tail_mass:.2e}, "
                f"ray norm divergent on this window"
            )
            divergent = True
    sup_norm = max(norms)
    boundary_sum = norms[0] + norms[-1]
    if boundary_sum > 0.0:
        ratio = sup_norm / boundary_sum
    else:
        ratio = 0.0 if sup_norm == 0.0 else math.inf
    ok = (not divergent) and np.isfinite(sup_norm) and ratio <= ratio_bound
    return MembershipReport(
        per_angle_norms=tuple(norms),
        sup_norm=sup_norm,
        boundary_norm_sum=boundary_sum,
        ratio=ratio,
        verdict="member-consistent" if ok else "violated",
        diagnostics=tuple(diagnostics),
    )


@dataclass(frozen=True)
class CauchyResult:
    value: np.ndarray
    tail_estimate: float


def _nappe_of(cone, lam):
    theta = (cone.orientation * cmath.phase(complex(lam) - cone.vertex)) % (2 * math.pi)
    if 0.0 < theta < cone.angle:
        return "+"
    if math.pi < theta < math.pi + cone.angle:
        return "-"
    raise ValueError("reconstruction point is not strictly inside the cone")


def cauchy_reconstruct(f, lam, s=0, eta=None, dist_min_factor=DIST_MIN_FACTOR):
    """Recover f(lam) from its boundary-ray samples by a contour integral.

    Integrates the kernel e^{i w (mu - lam)} (mu - eta)^s / (2 pi i
    (lam - eta)^s (mu - lam)) against the boundary data of the half-cone
    containing lam, oriented counterclockwise around it.  ``s`` must be an
    integer <= the weight order (the kernel gains |mu|^s decay); for s != 0
    ``eta`` must lie strictly inside the opposite half-cone.  Truncation at
    the grid extent is summarized in the returned tail estimate.
    """
    lam = complex(lam)
    cone = f.cone
    w = f.weight_number
    if not float(s).is_integer():
        raise ValueError("only integer kernel orders are supported")
    s = int(s)
    if s > f.weight_order + 1e-12:
        raise ValueError("kernel order s must not exceed the weight order")
    nappe = _nappe_of(cone, lam)
    if s != 0:
        if eta is None:
            raise ValueError("s != 0 needs the auxiliary point eta")
        if _nappe_of_or_none(cone, eta) != ("-" if nappe == "+" else "+"):
            raise ValueError("eta must lie strictly inside the opposite half-cone")
    rf0, rf1 = f.boundary
    grid = rf0.grid
    spacing = grid.spacing
    # the kernel's near-singularity 1/(mu - lam) must stay resolved
    for rf in (rf0, rf1):
        u = (lam - rf.ray.offset) / rf.ray.direction
        if abs(u.imag) < dist_min_factor * spacing:
            raise IllConditionedKernelError(
                f"point {lam} is within {dist_min_factor} node spacings of a "
                f"boundary ray"
            )
    sigma0 = (1 if nappe == "+" else -1) * cone.orientation
    total = np.zeros(rf0.dim, dtype=complex)
    tail = 0.0
    for rf, sigma in ((rf0, sigma0), (rf1, -sigma0)):
        contrib, edge_tail = _edge_quadrature(rf, lam, s, eta, w, nappe, sigma)
        total += contrib
        tail += edge_tail
    return CauchyResult(total, tail)


def _nappe_of_or_none(cone, lam):
    try:
        return _nappe_of(cone, lam)
    except ValueError:
        return None


def _edge_quadrature(rf, lam, s, eta, w, nappe, sigma):
    """One boundary edge of the Cauchy contour, outward-oriented times sigma."""
    t = rf.grid.nodes
    keep = t >= 0.0 if nappe == "+" else t <= 0.0
    tt = t[keep]
    order = np.argsort(np.abs(tt))
    tt = tt[order]
    mu = rf.ray.points(tt)
    vals = rf.values[keep][order]
    kernel_log = 1j * w * (mu - lam)
    if s != 0:
        kernel_log = kernel_log + s * (np.log(mu - eta) - np.log(lam - eta))
    base = 1.0 / (2j * math.pi * (mu - lam))
    weights = np.full(tt.size, rf.grid.spacing)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    if abs(tt[0]) > 0.25 * rf.grid.spacing:
        # no vertex node on this grid: close the gap [0, |t_0|] with a
        # one-sided trapezoid panel using the nearest sample
        weights[0] += abs(tt[0]) * 0.5
    scaled = scaled_values(vals * base[:, None], kernel_log)
    contrib = sigma * rf.ray.direction * (weights @ scaled)
    # crude truncation diagnostic: |integrand| at the far end times |t_end|
    tail = float(np.max(np.abs(scaled[-1]))) * abs(tt[-1])
    return contrib, tail


def _context_for(F, ctx=None):
    # a time-side Ray already encodes the clockwise convention in its side,
    # so its stored angle is exactly the context psi
    if ctx is None:
        ctx = TransformContext(
            psi=F.ray.angle,
            zeta=F.weight_number,
            w=F.ray.offset,
            src_grid=F.grid,
        )
    return ctx


def _cut_parameter(F, v):
    return F.ray.parameter(v)


def halfline_projection(F, s, eta=None, v=0j, ctx=None, extra_power=0):
    """P^s cutting a time-side ray function to the forward half-line past v.

    s = 0 is exactly the node indicator of {t >= t_v}.  For other integer s
    the operator is realized in its factored form: divide the transform by
    (lam - eta)^s, cut with the indicator, multiply back; ``extra_power``
    additionally multiplies by lam^extra_power on the way back (used to fold
    a derivative into the same pass).
    """
    if F.ray.side != TIME:
        raise ValueError("half-line projections act on time-side ray functions")
    if not float(s).is_integer():
        raise ValueError(f"unsupported projection order {s}: must be an integer")
    s = int(s)
    t_v = _cut_parameter(F, v)
    mask = F.grid.nodes >= t_v - 1e-12 * max(1.0, abs(t_v))
    if s == 0 and extra_power == 0:
        return F.with_values(np.where(mask[:, None], F.values, 0.0))
    ctx = _context_for(F, ctx)
    fhat = ctx.forward(F)
    lam = fhat.points
    if s != 0:
        if eta is None:
            raise ValueError("s != 0 needs the auxiliary point eta")
        offside = np.min(np.abs(np.imag((eta - ctx.zeta)
                                        / ctx.frequency_ray.direction)))
        if offside < 1e-9:
            raise ValueError("eta must lie off the frequency-side ray")
        ghat = fhat.with_values(fhat.values * ((lam - eta) ** s)[:, None])
    else:
        ghat = fhat
    g = ctx.inverse(ghat)
    cut = g.with_values(np.where(mask[:, None], g.values, 0.0))
    hhat = ctx.forward(cut)
    mult = np.ones_like(lam)
    if s != 0:
        mult = mult / (lam - eta) ** s
    if extra_power:
        mult = mult * lam ** extra_power
    return ctx.inverse(hhat.with_values(hhat.values * mult[:, None]))


def project_halfline(F, s, eta=None, v=0j, ctx=None):
    """Public half-line projection, restricted to integer orders s <= 0.

    Positive fractional orders would need branch cuts of (lam - eta)^s;
    only the integer, nonpositive range is part of the supported surface.
    """
    if not float(s).is_integer() or s > 0:
        raise ValueError(f"unsupported projection order {s}: need integer s <= 0")
    return halfline_projection(F, int(s), eta=eta, v=v, ctx=ctx)


@dataclass(frozen=True)
class IdempotenceReport:
    max_deviation: float
    first_norm: float


def projection_idempotence_check(F, s, r, eta, v=0j, ctx=None):
    """Check P^r P^s = P^s (r <= s) on concrete data; reports the gap."""
    if r > s:
        raise ValueError("idempotence requires r <= s")
    ctx = _context_for(F, ctx)
    first = project_halfline(F, s, eta=eta, v=v, ctx=ctx)
    second = project_halfline(first, r, eta=eta, v=v, ctx=ctx)
    dev = float(np.max(np.abs(second.values - first.values)))
    return IdempotenceReport(dev, float(np.max(np.abs(first.values))))


@dataclass(frozen=True)
class PaleyWienerReport:
    support_leakage: float
    ray_norm_table: tuple
    verdict: str
    opposite_verdict: str


def paley_wiener_check(F, side, cut=0.0, offsets=(0.0, 0.25, 0.5, 0.75, 1.5, 2.0),
                       pw_bound=PW_BOUND, ctx=None):
    """Support on a half-line versus analyticity in a half-plane.

    For ``side="backward-support"`` the samples should vanish for t > cut
    and the transform should have uniformly bounded norms on lines shifted
    into the upper half-plane (the forward case mirrors this).  The report
    carries both sweeps: the predicted side must stay within ``pw_bound``
    of the boundary norm, the opposite side is expected to blow past it;
    overflow on the opposite side counts as blow-up data.
    """
    if side not in ("backward-support", "forward-support"):
        raise ValueError(f"unknown side {side!r}")
    if F.ray.side != TIME:
        raise ValueError("support checks act on time-side ray functions")
    ctx = _context_for(F, ctx)
    t = F.grid.nodes
    t_cut = _cut_parameter(F, cut) if isinstance(cut, complex) else float(cut)
    mass = np.sum(np.abs(F.values) ** 2, axis=1)
    wrong = t > t_cut if side == "backward-support" else t < t_cut
    total = float(np.sum(mass))
    leakage = math.sqrt(float(np.sum(mass[wrong])) / total) if total > 0 else 0.0
    sign = 1.0 if side == "backward-support" else -1.0
    table = []
    norms = {+1: [], -1: []}
    for direction in (+1.0, -1.0):
        for d in offsets:
            eta = ctx.zeta + 1j * sign * direction * d * ctx.frequency_ray.direction
            shifted = TransformContext(ctx.psi, eta, ctx.w,
                                       ctx.src_grid, ctx.dst_grid)
            try:
                fhat = shifted.forward(F)
                norm = weighted_l2_report(fhat, order=0.0, number=ctx.w).value
            except WeightOverflowError:
                norm = math.inf
            half = "predicted" if direction > 0 else "opposite"
            table.append((half, float(d), norm))
            norms[int(direction)].append(norm)
    boundary = norms[+1][0] if norms[+1] else 0.0
    scale = max(boundary, 1e-300)
    bounded = all(n <= pw_bound * scale for n in norms[+1])
    rejected = any(not np.isfinite(n) or n > pw_bound * scale for n in norms[-1])
    consistent = bounded and leakage < 1e-8
    return PaleyWienerReport(
        support_leakage=leakage,
        ray_norm_table=tuple(table),
        verdict="consistent" if consistent else "inconsistent",
        opposite_verdict="correctly-rejected" if rejected else "not-rejected",
    )


def _forward_continuation(F, lam_points):
    """Transform of a compactly supported F evaluated at arbitrary lam.

    For samples that vanish near the grid ends the defining integral
    converges for every complex lam, so the quadrature sum itself is the
    entire continuation.  Exponents combine with data magnitudes in log
    space; a genuinely overflowing value raises.
    """
    t = F.grid.nodes
    z = F.points
    lam = np.asarray(lam_points, dtype=complex)
    mag = np.max(np.abs(F.values), axis=1)
    with np.errstate(divide="ignore"):
        log_data = np.where(mag > 0, np.log(np.where(mag > 0, mag, 1.0)), -np.inf)
    expo = -1j * np.outer(lam, z)
    worst = float(np.max(expo.real + log_data[None, :]))
    if worst > LOG_OVERFLOW_BOUND:
        raise WeightOverflowError(int(np.argmax(np.max(expo.real + log_data, axis=0))),
                                  None, worst)
    out = np.zeros((lam.size, F.dim), dtype=complex)
    for comp in range(F.dim):
        vals = F.values[:, comp]
        m = np.abs(vals)
        with np.errstate(divide="ignore", invalid="ignore"):
            lm = np.where(m > 0, np.log(np.where(m > 0, m, 1.0)), -np.inf)
            ph = np.where(m > 0, vals / np.where(m > 0, m, 1.0), 0.0)
        tot = expo + lm[None, :]
        term = np.where(np.isneginf(tot.real), 0.0,
                        np.exp(np.where(np.isneginf(tot.real), 0.0, tot)))
        out[:, comp] = term @ ph
    return out * (F.ray.direction * F.grid.spacing / _SQRT2PI)


@dataclass(frozen=True)
class WindowReport:
    support: tuple
    ray_norm_table: tuple
    verdict: str


def entire_window_check(F, n_angles=7, bound=WINDOW_BOUND,
                        threshold=1e-12, freq_grid=None):
    """Compact support versus entire transform with two-sided growth bounds.

    The numerical support hull [a, b] is read off the samples; the
    transform is then evaluated on rays sweeping both half-planes and its
    half-ray norms are weighted with the endpoint weight numbers (b on the
    positive halves, a on the negative halves).  Bounded sweeps are
    consistent with compact support in [a, b]; unweighted-growth blow-up
    (including overflow) is flagged.
    """
    if F.ray.side != TIME:
        raise ValueError("window checks act on time-side ray functions")
    mass = np.max(np.abs(F.values), axis=1)
    peak = float(np.max(mass))
    if peak == 0.0:
        return WindowReport((0.0, 0.0), (), "bounded")
    nz = np.nonzero(mass > threshold * peak)[0]
    t = F.grid.nodes
    a, b = float(t[nz[0]]), float(t[nz[-1]])
    if freq_grid is None:
        freq_grid = Grid(half_width=40.0, count=513)
    r = freq_grid.nodes
    pos, neg = r > 0, r < 0
    angles = np.linspace(math.pi / (n_angles + 1), math.pi, n_angles,
                         endpoint=False)
    table = []
    ref_pos = ref_neg = None
    flagged = False
    for psi in angles:
        ray = Ray(psi, 0j, FREQUENCY)
        try:
            vals = _forward_continuation(F, ray.points(r))
            rf = RayFunction(ray, freq_grid, vals, F.weight_order, 0j)
            n_pos = weighted_l2_report(rf, number=b, mask=pos).value
            n_neg = weighted_l2_report(rf, number=a, mask=neg).value
        except (WeightOverflowError, ValueError):
            table.append((float(psi), math.inf, math.inf))
            flagged = True
            continue
        table.append((float(psi), n_neg, n_pos))
        ref_pos = n_pos if ref_pos is None else ref_pos
        ref_neg = n_neg if ref_neg is None else ref_neg
        if n_pos > bound * max(ref_pos, 1e-300) or \
                n_neg > bound * max(ref_neg, 1e-300):
            flagged = True
    return WindowReport((a, b), tuple(table),
                        "flagged" if flagged else "bounded")


@dataclass(frozen=True)
class DecayProfile:
    tables: tuple
    monotone: bool


def decay_profile(f, ell, n_levels=8):
    """Tabulate |e^{i w lam}| (1+|lam|)^ell |lam - zeta|^(1/2) |F(lam)|.

    Only rays at angular distance >= angle/10 from the boundary are used.
    The running maximum of the profile over |lam - zeta| >= L must strictly
    decrease along the sampled upper range of L for the decay claim to be
    consistent.
    """
    margin = f.cone.angle / 10.0
    tables = []
    monotone = True
    for psi, rf in zip(f.angles, f.rays):
        if psi < margin - 1e-12 or psi > f.cone.angle - margin + 1e-12:
            continue
        t = rf.grid.nodes
        lam = rf.points
        norms = np.sqrt(np.sum(np.abs(rf.values) ** 2, axis=1))
        profile = (np.exp(-np.imag(f.weight_number * lam))
                   * (1.0 + np.abs(lam)) ** float(ell)
                   * np.sqrt(np.abs(t)) * norms)
        tables.append((float(psi), np.abs(t), profile))
        if np.max(profile) == 0.0:
            continue
        levels = np.linspace(0.5 * np.max(np.abs(t)), np.max(np.abs(t)) * 0.95,
                             n_levels)
        running = [float(np.max(profile[np.abs(t) >= L])) for L in levels]
        if any(running[i + 1] >= running[i] * (1.0 - 1e-12)
               for i in range(len(running) - 1)):
            monotone = False
    return DecayProfile(tuple(tables), monotone)

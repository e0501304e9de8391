"""Polynomial matrix pencils over nested finite-dimensional spaces.

A pencil is A(lam) = sum_j A_j lam^(m-j) with complex n x n coefficients
A_0..A_m and positive-definite Hermitian forms H_0..H_m that define the
nested norms |u|_j = <H_j u, u>^(1/2), |u|_j <= |u|_(j+1).  The module
provides evaluation, resolvent solves with residual certification, the full
finite spectrum by block companion linearization, cone-clearance tests, and
an empirical probe of the resolvent growth bound

    sum_j |lam|^j |A(lam)^{-1} f|_(m-j) <= c |f|_0

over sampled lam in a closed cone pair.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EigenSolverError, NearEigenvalueError
from .geometry import Disk

TOL_CLUSTER = 1e-7
TOL_MARGIN = 1e-9
TOL_INF = 1e-8
RESOLVENT_TOL = 1e-10
# probe points for the must-be-invertible-somewhere check; an identically
# singular det would vanish at all of them, a generic one at none
_PROBES = (0.0, 1.0, -1.0, 1j, 0.7548271 + 0.3712994j)


@dataclass(frozen=True)
class MatrixPencil:
    """Coefficients A_0..A_m (A_j multiplies lam^(m-j)) plus norm forms."""

    coefficients: tuple
    norm_forms: tuple = None

    def __post_init__(self):
        coeffs = tuple(np.asarray(c, dtype=complex) for c in self.coefficients)
        if len(coeffs) < 2:
            raise ValueError("a pencil needs degree >= 1 (at least two coefficients)")
        n = coeffs[0].shape[0]
        for c in coeffs:
            if c.shape != (n, n):
                raise ValueError("all coefficients must be square with a common size")
            c.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)
        if self.norm_forms is None:
            forms = tuple(np.eye(n) for _ in coeffs)
        else:
            forms = tuple(np.asarray(h, dtype=complex) for h in self.norm_forms)
            if len(forms) != len(coeffs):
                raise ValueError("need one norm form per coefficient")
            for j, h in enumerate(forms):
                if h.shape != (n, n):
                    raise ValueError("norm forms must match the pencil dimension")
                if np.max(np.abs(h - h.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(h))):
                    raise ValueError(f"norm form {j} is not Hermitian")
                try:
                    np.linalg.cholesky(h)
                except np.linalg.LinAlgError:
                    raise ValueError(f"norm form {j} is not positive definite")
                h.flags.writeable = False
            # nested-norm axiom |u|_j <= |u|_{j+1}: H_{j+1} - H_j must be PSD
            for j in range(len(forms) - 1):
                gap = np.linalg.eigvalsh(forms[j + 1] - forms[j])
                if gap[0] < -1e-10 * max(1.0, float(np.max(np.abs(forms[j + 1])))):
                    raise ValueError(
                        f"norm forms are not nested: H_{j + 1} - H_{j} has a "
                        f"negative eigenvalue {gap[0]:.3g}"
                    )
        object.__setattr__(self, "norm_forms", forms)
        if not any(abs(np.linalg.det(evaluate(self, lam))) > 0.0 for lam in _PROBES):
            raise ValueError("pencil is singular at every probe point")

    @property
    def degree(self):
        return len(self.coefficients) - 1

    @property
    def dim(self):
        return self.coefficients[0].shape[0]

    def coefficient_scale(self):
        return max(float(np.linalg.norm(c)) for c in self.coefficients)

    def vector_norm(self, u, j):
        h = self.norm_forms[j]
        return math.sqrt(max(float(np.real(np.conj(u) @ (h @ u))), 0.0))

    def scaled(self, phi):
        """The pencil of A(e^{i phi} lam): coefficients A_j e^{i phi (m-j)}."""
        m = self.degree
        coeffs = tuple(c * cmath.exp(1j * phi * (m - j))
                       for j, c in enumerate(self.coefficients))
        return MatrixPencil(coeffs, self.norm_forms)


def evaluate(p, lam):
    """A(lam) by Horner's scheme on the matrix coefficients."""
    out = np.array(p.coefficients[0], dtype=complex)
    for c in p.coefficients[1:]:
        out = out * lam + c
    return out


def evaluate_batch(p, lams):
    """A(lam) for a vector of lams, stacked as (len(lams), n, n)."""
    lams = np.asarray(lams, dtype=complex)
    out = np.broadcast_to(p.coefficients[0], (lams.size, p.dim, p.dim)).copy()
    for c in p.coefficients[1:]:
        out = out * lams[:, None, None] + c
    return out


def resolvent_apply(p, lam, f, tol=RESOLVENT_TOL):
    """Solve A(lam) u = f densely, certifying the residual."""
    f = np.asarray(f, dtype=complex)
    a = evaluate(p, lam)
    try:
        u = np.linalg.solve(a, f)
    except np.linalg.LinAlgError:
        raise NearEigenvalueError(lam)
    scale = float(np.linalg.norm(f))
    residual = float(np.linalg.norm(a @ u - f))
    if not np.all(np.isfinite(u)) or residual > tol * max(scale, 1e-300):
        raise NearEigenvalueError(lam, residual / max(scale, 1e-300))
    return u


def resolvent_apply_batch(p, lams, rhs):
    """A(lam)^{-1} applied nodewise to stacked right-hand sides.

    ``rhs`` has shape (len(lams), n); nodes where the solve fails its
    residual check raise NearEigenvalueError with the offending lam.
    """
    lams = np.asarray(lams, dtype=complex)
    mats = evaluate_batch(p, lams)
    try:
        sols = np.linalg.solve(mats, rhs[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        raise NearEigenvalueError("batched solve hit a singular node")
    res = np.linalg.norm(np.einsum("kij,kj->ki", mats, sols) - rhs, axis=1)
    scale = np.maximum(np.linalg.norm(rhs, axis=1), 1e-300)
    bad = np.nonzero(~np.isfinite(res) | (res > RESOLVENT_TOL * scale))[0]
    # fully zero rows trivially pass; only data-bearing nodes can fail
    bad = [k for k in bad if scale[k] > 1e-280]
    if bad:
        k = int(bad[0])
        raise NearEigenvalueError(lams[k], float(res[k] / scale[k]))
    return sols


@dataclass(frozen=True)
class SpectrumReport:
    """Clustered finite eigenvalues with residual certificates."""

    eigenvalues: tuple
    multiplicities: tuple
    residuals: tuple
    notes: tuple = ()

    def __iter__(self):
        return iter(zip(self.eigenvalues, self.multiplicities, self.residuals))


def _companion_eigenvalues(p):
    """All finite eigenvalues via the block companion pencil."""
    m, n = p.degree, p.dim
    # pencil lam * B - A with A holding the companion blocks and B carrying
    # the leading coefficient, so a singular A_0 shows up as infinite lams
    A = np.zeros((m * n, m * n), dtype=complex)
    B = np.eye(m * n, dtype=complex)
    for k in range(m - 1):
        A[k * n:(k + 1) * n, (k + 1) * n:(k + 2) * n] = np.eye(n)
    for k in range(m):
        # row of powers: -A_m, -A_{m-1}, ..., -A_1
        A[(m - 1) * n:, k * n:(k + 1) * n] = -p.coefficients[m - k]
    B[(m - 1) * n:, (m - 1) * n:] = p.coefficients[0]
    try:
        vals = scipy.linalg.eigvals(A, B)
    except Exception as exc:  # pragma: no cover - LAPACK failure is exotic
        raise EigenSolverError(f"companion eigenvalue solve failed: {exc}")
    return vals


def _cluster(values, tol):
    """Greedy chaining of sorted values into clusters of diameter ~tol."""
    order = np.lexsort((values.imag, values.real))
    vals = values[order]
    clusters = []
    for v in vals:
        if clusters and abs(v - clusters[-1][-1]) <= tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return clusters


def spectrum(p, region=None, tol_cluster=TOL_CLUSTER, tol_inf=TOL_INF):
    """Finite spectrum of the pencil, clustered and residual-certified.

    Eigenvalues beyond 1/tol_inf in magnitude are treated as infinite and
    dropped with a note (they appear when A_0 is singular).  Multiplicity is
    the cluster size under absolute distance tol_cluster; Jordan structure
    is not resolved, clusters of size > 1 are flagged instead.
    """
    raw = _companion_eigenvalues(p)
    finite = raw[np.isfinite(raw)]
    kept = finite[np.abs(finite) <= 1.0 / tol_inf]
    notes = []
    dropped = raw.size - kept.size
    if dropped:
        notes.append(f"dropped {dropped} eigenvalue(s) at or near infinity")
    scale = p.coefficient_scale()
    eigenvalues, multiplicities, residuals = [], [], []
    for cluster in _cluster(kept, tol_cluster):
        lam = complex(np.mean(cluster))
        if region is not None and not region.contains_closed(lam):
            continue
        sing = np.linalg.svd(evaluate(p, lam), compute_uv=False)
        eigenvalues.append(lam)
        multiplicities.append(len(cluster))
        residuals.append(float(sing[-1]))
        if sing[-1] > 1e-8 * scale:
            notes.append(
                f"eigenvalue {lam} fails its residual certificate: smallest "
                f"singular value {sing[-1]:.3e} vs scale {scale:.3e}"
            )
        if len(cluster) > 1:
            notes.append(
                f"cluster at {lam}: multiplicity {len(cluster)} by distance; "
                f"Jordan chains unresolved, may be defective"
            )
    order = np.lexsort((np.array([v.imag for v in eigenvalues]),
                        np.array([v.real for v in eigenvalues]))) \
        if eigenvalues else []
    return SpectrumReport(
        tuple(eigenvalues[i] for i in order),
        tuple(multiplicities[i] for i in order),
        tuple(residuals[i] for i in order),
        tuple(notes),
    )


@dataclass(frozen=True)
class ClearanceReport:
    clear: bool
    violations: tuple
    spectrum: SpectrumReport

    @property
    def verdict(self):
        return "clear" if self.clear else "violated"


def cone_clearance(p, cone, search_radius, tol_margin=TOL_MARGIN):
    """Is the closed cone free of pencil eigenvalues?

    Membership is tested against the closed cone (boundary rays and vertex
    included) widened by an angular margin, so grazing eigenvalues count as
    violations.  Only eigenvalues within ``search_radius`` of the vertex are
    examined; the caller is responsible for a radius that covers every
    eigenvalue that could matter (>= 2x the largest magnitude is a safe
    habit).
    """
    spec = spectrum(p, region=Disk(cone.vertex, search_radius))
    violations = tuple(lam for lam in spec.eigenvalues
                       if cone.contains_closed(lam, margin=tol_margin))
    return ClearanceReport(not violations, violations, spec)


def line_distance(ray, lam):
    """Distance from a point to the full line carrying a ray."""
    u = (complex(lam) - ray.offset) / ray.direction
    return abs(u.imag)


@dataclass(frozen=True)
class GrowthReport:
    max_ratio: float
    band_maxima: tuple
    samples: tuple
    skipped: tuple
    verdict: str


def verify_growth_condition(p, cone_pair, R, sample_count=8,
                            angle_count=5, slack=0.05):
    """Empirically bound sum_j |lam|^j |A^{-1}(lam) f|_{m-j} / |f|_0.

    Samples lam over the two closed cones in three dyadic radius bands
    [R, 2R], [2R, 4R], [4R, 8R] and f over an H_0-orthonormal basis.  The
    verdict is "plausible" when the per-band maxima have stabilized
    (non-increasing up to ``slack``), "growing" otherwise.  This is an
    empirical probe, never a proof.
    """
    m = p.degree
    h0 = p.norm_forms[0]
    basis = np.linalg.inv(np.linalg.cholesky(h0)).conj().T  # H_0-orthonormal columns
    band_edges = [(R, 2 * R), (2 * R, 4 * R), (4 * R, 8 * R)]
    band_maxima = []
    samples = []
    skipped = []
    spec = spectrum(p)
    for lo, hi in band_edges:
        radii = np.geomspace(lo, hi, sample_count)
        worst = 0.0
        for cone in cone_pair:
            locals_ = np.linspace(0.0, cone.angle, angle_count)
            for r in radii:
                for psi in locals_:
                    for nappe in (0.0, math.pi):
                        lam = cone.vertex + r * cmath.exp(
                            1j * (cone.orientation * psi + nappe))
                        if any(abs(lam - ev) < 10 * TOL_CLUSTER
                               for ev in spec.eigenvalues):
                            skipped.append(lam)
                            continue
                        for col in range(basis.shape[1]):
                            f = basis[:, col]
                            try:
                                u = resolvent_apply(p, lam, f)
                            except NearEigenvalueError:
                                skipped.append(lam)
                                break
                            num = sum(abs(lam) ** j * p.vector_norm(u, m - j)
                                      for j in range(m + 1))
                            ratio = num / max(p.vector_norm(f, 0), 1e-300)
                            worst = max(worst, ratio)
                            samples.append((lam, ratio))
        band_maxima.append(worst)
    stable = all(band_maxima[i + 1] <= band_maxima[i] * (1.0 + slack)
                 for i in range(len(band_maxima) - 1))
    return GrowthReport(
        max_ratio=max(band_maxima),
        band_maxima=tuple(band_maxima),
        samples=tuple(samples),
        skipped=tuple(skipped),
        verdict="plausible" if stable else "growing",
    )

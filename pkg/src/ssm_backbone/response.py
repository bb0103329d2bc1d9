"""Closed-form forced-response analysis on the reduced dynamics.

Steady T-periodic states of the polar reduced dynamics satisfy

    f(rho, Omega) = a(rho)^2 + (b(rho) - Omega)^2 rho^2 - (eps*r)^2 = 0,

which becomes a degree-(2M+1) polynomial in u = rho^2.  All roots come from
companion-matrix eigenvalues of that polynomial (no seeding or
continuation), then get polished by a couple of safeguarded Newton steps on
f itself.  Phase, stability, backbone, maximal amplitude, sweep
parameterization, stability boundaries and physical harmonic content follow
in closed form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .forced import ForcedSSM
from .manifold import SlowDynamics
from .spectral import Spectrum

__all__ = [
    "ResponsePoint",
    "BackbonePoint",
    "FRFBranch",
    "HarmonicSpectrum",
    "StabilityBoundaries",
    "response_amplitudes",
    "phase_shift",
    "stability",
    "backbone_curve",
    "max_amplitude",
    "frf_sweep",
    "stability_boundaries",
    "physical_harmonics",
    "modal_amplitude",
    "coordinate_amplitude",
]

COMPLEX_ROOT_TOL = 1e-9
ARCCOS_CLAMP = 1e-9


@dataclass(frozen=True)
class ResponsePoint:
    omega: float
    rho: float
    psi: float
    stable: bool
    jac_eigs: tuple  # two complex eigenvalues of the polar Jacobian


@dataclass(frozen=True)
class BackbonePoint:
    rho: float
    omega: float
    psi: float = np.pi / 2


@dataclass(frozen=True)
class FRFBranch:
    points: tuple  # ResponsePoint, ordered along the rho grid
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class StabilityBoundaries:
    rho: np.ndarray
    omega_minus: np.ndarray  # NaN where the radicand is negative
    omega_plus: np.ndarray
    critical_rho: tuple  # amplitudes where the trace condition flips


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Complex amplitudes x_j of e^{i j Omega t} in physical coordinates."""

    amplitudes: dict  # {int j: (2N,) complex}
    omega: float

    def reconstruct(self, t):
        t = np.asarray(t, dtype=float)
        dim = next(iter(self.amplitudes.values())).size
        out = np.zeros(t.shape + (dim,), dtype=complex)
        for j, vec in self.amplitudes.items():
            out += np.multiply.outer(np.exp(1j * j * self.omega * t), vec)
        return out


def _f_value(sd: SlowDynamics, rho, r, epsilon, omega):
    a = sd.a(rho)
    b = sd.b(rho)
    return a * a + (b - omega) ** 2 * rho * rho - (epsilon * r) ** 2


def _f_rho_derivative(sd: SlowDynamics, rho, omega):
    a, ap = sd.a(rho), sd.a_prime(rho)
    b, bp = sd.b(rho), sd.b_prime(rho)
    return 2 * a * ap + 2 * (b - omega) * bp * rho * rho + 2 * (b - omega) ** 2 * rho


def _positive_roots(poly_u, check, polish=None):
    """Positive real roots rho = sqrt(u) of a polynomial in u = rho^2."""
    coeffs = np.trim_zeros(np.asarray(poly_u, dtype=float), "b")
    if coeffs.size <= 1:
        return []
    roots = npoly.polyroots(coeffs)
    scale = np.maximum(1.0, np.abs(roots.real))
    out = []
    for u, s in zip(roots, scale):
        if abs(u.imag) >= COMPLEX_ROOT_TOL * s:
            if abs(u.imag) < 1e-6 * s:
                warnings.warn(f"borderline complex root u={u:.3e} near the real axis", stacklevel=3)
            continue
        if u.real <= 0.0:
            continue
        rho = float(np.sqrt(u.real))
        if polish is not None:
            rho = polish(rho)
        out.append(rho)
    out.sort()
    dedup = []
    for rho in out:
        if not dedup or abs(rho - dedup[-1]) > 1e-12 * max(1.0, rho):
            dedup.append(rho)
    return [rho for rho in dedup if check(rho)]


def response_amplitudes(sd: SlowDynamics, r, epsilon, omega):
    """All amplitudes rho > 0 of T-periodic responses at frequency omega."""
    if r == 0.0:
        raise ValueError("degenerate forcing, response is origin")
    pa = np.asarray(sd.a_coeffs, dtype=float)
    pb = np.asarray(sd.b_coeffs, dtype=float).copy()
    pb[0] -= omega
    f_u = npoly.polyadd(npoly.polymul(pa, pa), npoly.polymul(pb, pb))
    poly = np.concatenate([[-((epsilon * r) ** 2)], f_u])  # multiply by u, subtract (eps r)^2

    target = max(abs(epsilon * r) ** 2 * 1e-8, 1e-300)

    def polish(rho):
        for _ in range(2):
            fv = _f_value(sd, rho, r, epsilon, omega)
            dfv = _f_rho_derivative(sd, rho, omega)
            if dfv == 0.0:
                break
            step = fv / dfv
            if abs(step) > 0.1 * max(rho, 1e-12):
                break
            cand = rho - step
            if cand <= 0.0:
                break
            if abs(_f_value(sd, cand, r, epsilon, omega)) < abs(fv):
                rho = cand
        return rho

    def check(rho):
        return abs(_f_value(sd, rho, r, epsilon, omega)) < max(target, 1e-7 * max(1.0, rho) ** 2)

    return _positive_roots(poly, check, polish)


def phase_shift(sd: SlowDynamics, rho, r, epsilon, omega):
    """Phase lag psi in [0, pi] between the response and the forcing."""
    arg = (omega - sd.b(rho)) * rho / (epsilon * r)
    if abs(arg) > 1.0 + ARCCOS_CLAMP:
        raise ValueError(f"inconsistent (rho, Omega) pair, not a response point (cos psi = {arg:.6g})")
    return float(np.arccos(np.clip(arg, -1.0, 1.0)))


def stability(sd: SlowDynamics, rho, omega):
    """Asymptotic stability of the periodic response of amplitude rho.

    Builds the polar Jacobian and applies the Routh-Hurwitz conditions
    (trace < 0 and determinant > 0).  Returns (stable, eigenvalues).
    """
    if rho <= 0.0:
        raise ValueError("stability requires rho > 0")
    a, ap = float(sd.a(rho)), float(sd.a_prime(rho))
    b, bp = float(sd.b(rho)), float(sd.b_prime(rho))
    jac = np.array(
        [
            [ap, (omega - b) * rho],
            [bp - (omega - b) / rho, a / rho],
        ]
    )
    eigs = np.linalg.eigvals(jac)
    stable = jac.trace() < 0.0 and np.linalg.det(jac) > 0.0
    return bool(stable), tuple(eigs)


def backbone_curve(sd: SlowDynamics, rho_grid):
    """Maximal-amplitude locus Omega_max(rho) = b(rho), phase pi/2.

    Forcing amplitude and direction do not enter: the curve is a property of
    the unforced reduced dynamics.
    """
    return [BackbonePoint(float(rho), float(sd.b(rho))) for rho in np.asarray(rho_grid, dtype=float)]


def max_amplitude(sd: SlowDynamics, r, epsilon):
    """Amplitudes where the response curve touches the backbone: a(rho)^2 = (eps r)^2."""
    if r == 0.0:
        raise ValueError("degenerate forcing, response is origin")
    pa = np.asarray(sd.a_coeffs, dtype=float)
    poly = np.concatenate([[-((epsilon * r) ** 2)], npoly.polymul(pa, pa)])
    target = max(abs(epsilon * r) ** 2 * 1e-8, 1e-300)

    def check(rho):
        return abs(float(sd.a(rho)) ** 2 - (epsilon * r) ** 2) < max(target, 1e-7)

    return _positive_roots(poly, check)


def frf_sweep(sd: SlowDynamics, r, epsilon, rho_grid, metadata=None):
    """Response branches Omega+-(rho) = b +- sqrt((eps r)^2 - a^2)/rho.

    Grid points with negative radicand are dropped; contiguous runs form
    branches (one per sign), ordered minus side first.  Every emitted point
    carries phase and stability data.
    """
    if r == 0.0:
        raise ValueError("degenerate forcing, response is origin")
    rho_grid = np.asarray(rho_grid, dtype=float)
    base_meta = dict(metadata or {})
    branches = []
    for sign, label in ((-1.0, "minus"), (1.0, "plus")):
        run = []
        for rho in rho_grid:
            rad = (epsilon * r) ** 2 - float(sd.a(rho)) ** 2
            if rad < 0.0 or rho <= 0.0:
                if run:
                    branches.append(FRFBranch(tuple(run), {**base_meta, "side": label}))
                    run = []
                continue
            omega = float(sd.b(rho)) + sign * np.sqrt(rad) / rho
            psi = phase_shift(sd, rho, r, epsilon, omega)
            stab, eigs = stability(sd, rho, omega)
            run.append(ResponsePoint(omega, float(rho), psi, stab, eigs))
        if run:
            branches.append(FRFBranch(tuple(run), {**base_meta, "side": label}))
    return tuple(branches)


def stability_boundaries(sd: SlowDynamics, rho_grid):
    """Critical frequencies where the determinant condition flips.

    Omega_crit+-(rho) = b + rho*b'/2 +- sqrt((rho*b'/2)^2 - (a/rho) a').
    Also reports the amplitudes where the trace condition changes sign
    (at most M of them).
    """
    rho_grid = np.asarray(rho_grid, dtype=float)
    om_minus = np.full(rho_grid.shape, np.nan)
    om_plus = np.full(rho_grid.shape, np.nan)
    for i, rho in enumerate(rho_grid):
        if rho <= 0.0:
            continue
        s = float(rho * sd.b_prime(rho)) / 2.0
        rad = s * s - float(sd.a(rho)) / rho * float(sd.a_prime(rho))
        if rad < 0.0:
            continue
        root = np.sqrt(rad)
        om_minus[i] = float(sd.b(rho)) + s - root
        om_plus[i] = float(sd.b(rho)) + s + root

    # trace condition: Re(lam) + sum (m+1) Re(beta_m) u^m = 0
    trace_poly = np.array([(m + 1) * c for m, c in enumerate(sd.a_coeffs)], dtype=float)
    crit = _positive_roots(trace_poly, check=lambda rho: True)
    return StabilityBoundaries(rho_grid, om_minus, om_plus, tuple(crit))


def physical_harmonics(fssm: ForcedSSM, rho, psi) -> HarmonicSpectrum:
    """Complex amplitudes of every harmonic of the steady physical response.

    Harmonic j collects all manifold monomials with index difference j,
    weighted rho^{2m+j} e^{i j psi}; the first harmonic additionally carries
    the time-varying corrections eps*W+-.  Coefficients beyond the computed
    order are zero.
    """
    ssm = fssm.base
    if ssm is None:
        raise ValueError("forced model lacks autonomous coefficients")
    dim = ssm.dim
    max_j = 2 * ssm.order_m + 1
    amps = {}
    for j in range(0, max_j + 1):
        vec = np.zeros(dim, dtype=complex)
        m = 0
        while (m + j, m) in ssm.w0:
            vec += rho ** (2 * m + j) * np.exp(1j * j * psi) * ssm.w0[(m + j, m)]
            m += 1
        if j == 1:
            vec += fssm.epsilon * fssm.w_plus
        amps[j] = vec
        if j > 0:
            mvec = np.zeros(dim, dtype=complex)
            m = 0
            while (m, m + j) in ssm.w0:
                mvec += rho ** (2 * m + j) * np.exp(-1j * j * psi) * ssm.w0[(m, m + j)]
                m += 1
            if j == 1:
                mvec += fssm.epsilon * fssm.w_minus
            amps[-j] = mvec
    return HarmonicSpectrum(amps, fssm.omega)


def modal_amplitude(spec: Spectrum, harmonics: HarmonicSpectrum, mode, harmonic=1):
    """Oscillation amplitude of modal displacement coordinate ``mode`` at a harmonic.

    Displacements are projected on the mode-shape basis; the amplitude of
    harmonic j >= 1 is 2|p_j| (the j = 0 component is a static shift of
    magnitude |p_0|).
    """
    n = spec.n_modes
    vec = harmonics.amplitudes.get(harmonic)
    if vec is None:
        return 0.0
    p = np.linalg.solve(spec.mode_shapes, vec[:n])
    amp = abs(p[mode])
    return float(amp if harmonic == 0 else 2.0 * amp)


def coordinate_amplitude(harmonics: HarmonicSpectrum, coord, harmonic=1):
    """Oscillation amplitude of one physical displacement coordinate at a harmonic."""
    vec = harmonics.amplitudes.get(harmonic)
    if vec is None:
        return 0.0
    amp = abs(vec[coord])
    return float(amp if harmonic == 0 else 2.0 * amp)

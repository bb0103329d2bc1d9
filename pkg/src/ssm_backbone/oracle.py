"""Independent ground truth: time integration, shooting, continuation, FFT.

Nothing in here touches the manifold algebra.  Periodic orbits of the full
system come from Newton iteration on the period map, their stability from
monodromy (variational-equation) eigenvalues, and branches from
pseudo-arclength continuation in (initial state, forcing frequency).  This
machinery is the benchmark the reduced model is judged against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import FirstOrderSystem
from .response import HarmonicSpectrum
from .spectral import Spectrum

__all__ = [
    "PeriodicOrbit",
    "Branch",
    "integrate",
    "find_periodic_orbit",
    "continue_branch",
    "harmonic_amplitudes",
    "modal_displacement_coefficient",
]

DEFAULT_RTOL = 1e-10
SHOOTING_TOL = 1e-9
MAX_NEWTON = 25


@dataclass(frozen=True)
class PeriodicOrbit:
    period: float
    omega: float
    initial_state: np.ndarray
    times: np.ndarray  # uniform grid over one period, endpoint excluded
    samples: np.ndarray  # (n_samples, 2N)
    floquet_multipliers: np.ndarray
    converged: bool
    residual: float
    newton_iterations: int

    @property
    def stable(self):
        return bool(np.all(np.abs(self.floquet_multipliers) < 1.0))


@dataclass(frozen=True)
class Branch:
    orbits: tuple  # ((omega, PeriodicOrbit), ...) in arclength order
    fold_points: tuple  # omega values where d(omega)/ds changes sign
    exhausted: bool  # True if the corrector failed at minimum step


class _Compiled:
    """Kernel argument pack for one system + single-harmonic forcing."""

    def __init__(self, fos: FirstOrderSystem, epsilon=None):
        self.dim = fos.dim
        self.a_mat = np.ascontiguousarray(fos.a_matrix, dtype=float)
        nl = fos.nonlinearity
        if not nl.is_real(1e-14):
            raise ValueError("time integration expects a real nonlinearity")
        exps, coefs = nl.as_arrays()
        self.exps = np.ascontiguousarray(exps, dtype=np.int64)
        self.coefs = np.ascontiguousarray(np.real(coefs), dtype=float)
        jexps, jcoefs, jvars = [], [], []
        for t in range(self.exps.shape[0]):
            for v in range(self.dim):
                e = self.exps[t, v]
                if e == 0:
                    continue
                row = self.exps[t].copy()
                row[v] -= 1
                jexps.append(row)
                jcoefs.append(e * self.coefs[t])
                jvars.append(v)
        self.jexps = np.asarray(jexps, dtype=np.int64).reshape(len(jexps), self.dim)
        self.jcoefs = np.asarray(jcoefs, dtype=float).reshape(len(jcoefs), self.dim)
        self.jvars = np.asarray(jvars, dtype=np.int64)

        g1 = np.zeros(self.dim, dtype=complex)
        for k, g in fos.forcing_harmonics:
            if k == (1,):
                g1 = np.asarray(g, dtype=complex)
        self.g_cos = np.ascontiguousarray(2.0 * g1.real)
        self.g_sin = np.ascontiguousarray(-2.0 * g1.imag)
        self.epsilon = fos.epsilon if epsilon is None else float(epsilon)
        self.tableau = kernels.tableau()

    def run(self, y0, t0, t1, omega, rtol, atol, t_eval, with_var, max_steps=20_000_000):
        c_nodes, a_tab, b5, err_w = self.tableau
        y_eval, y_final, n_steps, status = kernels.integrate_core(
            np.ascontiguousarray(y0, dtype=float),
            float(t0),
            float(t1),
            self.dim,
            self.a_mat,
            self.exps,
            self.coefs,
            self.jexps,
            self.jcoefs,
            self.jvars,
            self.g_cos,
            self.g_sin,
            self.epsilon,
            float(omega),
            with_var,
            float(rtol),
            float(atol),
            np.ascontiguousarray(t_eval, dtype=float),
            c_nodes,
            a_tab,
            b5,
            err_w,
            max_steps,
        )
        if status != kernels.STATUS_OK:
            raise RuntimeError("stiff or singular dynamics: integrator step underflow")
        return y_eval, y_final, n_steps


def integrate(fos: FirstOrderSystem, x0, t_span, rtol=DEFAULT_RTOL, atol=None, t_eval=None, omega=None, epsilon=None):
    """Adaptive integration of the forced system; returns (times, states).

    ``t_eval`` defaults to the span endpoints.  Forcing is the system's own
    single-harmonic definition (cosine), with optional frequency/amplitude
    overrides.
    """
    pack = _Compiled(fos, epsilon=epsilon)
    if omega is None:
        omega = fos.base_frequencies[0] if fos.base_frequencies else 1.0
    if atol is None:
        atol = rtol * 1e-2
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t_eval is None:
        t_eval = np.array([t1])
    t_eval = np.asarray(t_eval, dtype=float)
    y_eval, _, _ = pack.run(np.asarray(x0, dtype=float), t0, t1, omega, rtol, atol, t_eval, with_var=False)
    return t_eval, y_eval


def _period_map(pack, x0, omega, rtol, atol):
    """One period with tangent flow: returns (x_T, monodromy)."""
    dim = pack.dim
    period = 2.0 * np.pi / omega
    y0 = np.concatenate([x0, np.eye(dim).ravel()])
    _, y_final, _ = pack.run(y0, 0.0, period, omega, rtol, atol, np.array([period]), with_var=True)
    return y_final[:dim], y_final[dim:].reshape(dim, dim)


def find_periodic_orbit(fos: FirstOrderSystem, omega, x_guess, tol=SHOOTING_TOL, rtol=DEFAULT_RTOL, n_samples=256, epsilon=None, max_newton=MAX_NEWTON) -> PeriodicOrbit:
    """Newton shooting for a T-periodic orbit at forcing frequency omega."""
    pack = _Compiled(fos, epsilon=epsilon)
    atol = rtol * 1e-2
    x = np.asarray(x_guess, dtype=float).copy()
    dim = pack.dim
    converged = False
    res = np.inf
    mono = np.eye(dim)
    iters = 0
    for iters in range(1, max_newton + 1):
        x_t, mono = _period_map(pack, x, omega, rtol, atol)
        g = x_t - x
        res = float(np.linalg.norm(g))
        if res < tol:
            converged = True
            break
        try:
            dx = np.linalg.solve(mono - np.eye(dim), -g)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(dx)) or np.linalg.norm(dx) > 1e6 * max(1.0, np.linalg.norm(x)):
            break
        x = x + dx
    if not converged:
        raise RuntimeError(f"no orbit from this guess (residual {res:.3e} after {iters} iterations)")

    period = 2.0 * np.pi / omega
    times = np.arange(n_samples) * (period / n_samples)
    t_eval = np.concatenate([times, [period]])
    y_eval, _, _ = pack.run(x, 0.0, period, omega, rtol, atol, t_eval, with_var=False)
    samples = y_eval[:-1]
    multipliers = np.linalg.eigvals(mono)
    return PeriodicOrbit(
        period=period,
        omega=float(omega),
        initial_state=x,
        times=times,
        samples=samples,
        floquet_multipliers=multipliers,
        converged=True,
        residual=res,
        newton_iterations=iters,
    )


def continue_branch(
    fos: FirstOrderSystem,
    omega_range,
    seed_orbit: PeriodicOrbit,
    initial_step=1e-3,
    min_step=1e-8,
    max_step=2e-2,
    max_points=2000,
    tol=SHOOTING_TOL,
    rtol=DEFAULT_RTOL,
    n_samples=128,
    epsilon=None,
) -> Branch:
    """Pseudo-arclength continuation of periodic orbits in (x0, Omega).

    The corrector is a bordered Newton iteration on the period-map residual
    plus the arclength constraint; steps halve on corrector failure (> 4
    iterations) and grow after easy points.  Fold points register as sign
    changes of the tangent's Omega component.
    """
    if not seed_orbit.converged:
        raise ValueError("seed orbit not converged")
    pack = _Compiled(fos, epsilon=epsilon)
    atol = rtol * 1e-2
    dim = pack.dim
    om_lo, om_hi = sorted(float(w) for w in omega_range)
    fd_h = 1e-6

    def period_residual(x, omega):
        period = 2.0 * np.pi / omega
        _, y_final, _ = pack.run(x, 0.0, period, omega, rtol, atol, np.array([period]), with_var=False)
        return y_final - x

    def residual_and_jac(x, omega):
        x_t, mono = _period_map(pack, x, omega, rtol, atol)
        g = x_t - x
        gx = mono - np.eye(dim)
        g_om = (period_residual(x, omega + fd_h) - g) / fd_h
        return g, gx, g_om, mono

    def make_orbit(x, omega, mono, res, iters):
        period = 2.0 * np.pi / omega
        times = np.arange(n_samples) * (period / n_samples)
        y_eval, _, _ = pack.run(x, 0.0, period, omega, rtol, atol, times, with_var=False)
        return PeriodicOrbit(period, float(omega), x.copy(), times, y_eval, np.linalg.eigvals(mono), True, res, iters)

    x = seed_orbit.initial_state.copy()
    omega = seed_orbit.omega
    g, gx, g_om, mono = residual_and_jac(x, omega)
    orbits = [(omega, make_orbit(x, omega, mono, float(np.linalg.norm(g)), 0))]
    folds = []
    exhausted = False

    # initial tangent: prefer increasing omega direction inside the range
    tangent = _null_tangent(gx, g_om, np.concatenate([np.zeros(dim), [1.0]]))
    if omega >= om_hi - 1e-12:
        tangent = -tangent
    ds = float(initial_step)

    for _ in range(max_points):
        accepted = False
        while not accepted:
            u_pred = np.concatenate([x, [omega]]) + ds * tangent
            xi, omi = u_pred[:dim].copy(), float(u_pred[dim])
            iters_used = 0
            ok = False
            for it in range(1, 5):
                g, gx, g_om, mono = residual_and_jac(xi, omi)
                arc = tangent @ (np.concatenate([xi, [omi]]) - u_pred)
                rhs_norm = np.linalg.norm(g)
                if rhs_norm < tol and abs(arc) < 1e-10:
                    iters_used = it - 1
                    ok = True
                    break
                big = np.zeros((dim + 1, dim + 1))
                big[:dim, :dim] = gx
                big[:dim, dim] = g_om
                big[dim, :] = tangent
                try:
                    du = np.linalg.solve(big, -np.concatenate([g, [arc]]))
                except np.linalg.LinAlgError:
                    break
                xi += du[:dim]
                omi += du[dim]
                iters_used = it
            else:
                g, gx, g_om, mono = residual_and_jac(xi, omi)
                ok = np.linalg.norm(g) < tol
            if ok:
                accepted = True
            else:
                ds *= 0.5
                if ds < min_step:
                    exhausted = True
                    break
        if exhausted:
            break

        x, omega = xi, omi
        orbits.append((omega, make_orbit(x, omega, mono, float(np.linalg.norm(g)), iters_used)))
        new_tangent = _null_tangent(gx, g_om, tangent)
        if new_tangent[dim] * tangent[dim] < 0.0 and abs(tangent[dim]) > 1e-12:
            folds.append(float(omega))
        tangent = new_tangent
        if iters_used <= 2 and ds < max_step:
            ds = min(max_step, ds * 1.3)
        if not om_lo - 1e-9 <= omega <= om_hi + 1e-9:
            break

    return Branch(tuple(orbits), tuple(folds), exhausted)


def _null_tangent(gx, g_om, previous):
    """Unit tangent of the solution curve, oriented along ``previous``."""
    dim = gx.shape[0]
    big = np.zeros((dim + 1, dim + 1))
    big[:dim, :dim] = gx
    big[:dim, dim] = g_om
    big[dim, :] = previous
    rhs_vec = np.zeros(dim + 1)
    rhs_vec[dim] = 1.0
    try:
        t = np.linalg.solve(big, rhs_vec)
    except np.linalg.LinAlgError:
        t = previous.copy()
    norm = np.linalg.norm(t)
    if norm == 0.0:
        return previous
    t /= norm
    if t @ previous < 0.0:
        t = -t
    return t


def harmonic_amplitudes(orbit: PeriodicOrbit, j_max) -> HarmonicSpectrum:
    """Two-sided Fourier coefficients of the orbit, x(t) = sum_j c_j e^{i j Omega t}."""
    samples = orbit.samples
    ns = samples.shape[0]
    if j_max >= ns // 2:
        raise ValueError("j_max too large for the sample count")
    coefs = np.fft.fft(samples, axis=0) / ns
    energy_time = float(np.sum(samples**2) / ns)
    energy_freq = float(np.sum(np.abs(coefs) ** 2))
    if abs(energy_time - energy_freq) > 1e-8 * max(energy_time, 1e-30):
        raise RuntimeError("Parseval check failed on orbit spectrum")
    amps = {}
    for j in range(-j_max, j_max + 1):
        amps[j] = coefs[j % ns]
    return HarmonicSpectrum(amps, orbit.omega)


def modal_displacement_coefficient(spec: Spectrum, orbit: PeriodicOrbit, mode, harmonic=1, j_max=None):
    """Complex Fourier coefficient of one modal displacement coordinate.

    Projects the displacement block of the orbit samples onto the mode-shape
    basis before transforming, so phases are directly comparable with the
    reduced-model prediction.  Also returns the time-domain max as a second
    value (the two notions of "modal amplitude" used for benchmarking).
    """
    n = spec.n_modes
    disp = orbit.samples[:, :n]
    p = np.linalg.solve(spec.mode_shapes, disp.T).T  # (ns, N) modal histories
    series = p[:, mode]
    ns = series.size
    coef = np.fft.fft(series)[harmonic % ns] / ns
    return complex(coef), float(np.max(np.abs(series)))

"""High-level assembly: model -> spectrum -> manifold -> forced reduction.

One call produces everything the response formulas need for a given master
mode and expansion order; the CLI and the verification workflow build on
this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forced import ForcedSSM, resonant_correction
from .manifold import SSMCoefficients, SlowDynamics, compute_ssm_general, diagonalize_nonlinearity, slow_dynamics
from .model import FirstOrderSystem, MechanicalSystem, first_order_form
from .response import HarmonicSpectrum, physical_harmonics, phase_shift, response_amplitudes, stability
from .spectral import ResonanceReport, Spectrum, check_nonresonance, compute_spectrum, first_harmonic_vector, normalize_for_imaginary_rc

__all__ = ["ReducedModel", "build_reduced"]


@dataclass(frozen=True)
class ReducedModel:
    model: MechanicalSystem
    fos: FirstOrderSystem
    spectrum: Spectrum  # phase-normalized for the master mode
    report: ResonanceReport
    ssm: SSMCoefficients
    slow: SlowDynamics
    r: float
    mode: int
    order_m: int

    def forced_at(self, omega) -> ForcedSSM:
        """Time-varying correction for one forcing frequency."""
        return resonant_correction(self.spectrum, self.fos, self.mode, omega=omega, base=self.ssm)

    def response_points(self, omega):
        """All steady responses at a frequency, as (rho, psi, stable, eigs)."""
        eps = self.fos.epsilon
        out = []
        for rho in response_amplitudes(self.slow, self.r, eps, omega):
            psi = phase_shift(self.slow, rho, self.r, eps, omega)
            stab, eigs = stability(self.slow, rho, omega)
            out.append((rho, psi, stab, eigs))
        return out

    def harmonics_at(self, omega, rho, psi) -> HarmonicSpectrum:
        return physical_harmonics(self.forced_at(omega), rho, psi)

    def seed_state(self, omega, rho, psi):
        """Full-system initial condition predicted for this response point.

        Evaluates the manifold and its time-varying correction at t = 0,
        where z = rho * e^{i psi}.
        """
        z = rho * np.exp(1j * psi)
        x = self.ssm.evaluate(z)
        fssm = self.forced_at(omega)
        x = x + fssm.epsilon * (fssm.w_plus + fssm.w_minus)
        return np.real(x)


def build_reduced(model: MechanicalSystem, mode=0, order_m=1, tol_abs=1e-6, tol_near=None, enforce_gate=True) -> ReducedModel:
    """Run the full reduction for one master mode.

    ``order_m`` is the number of retained near-resonant terms (expansion
    order 2*order_m + 1).  With ``enforce_gate`` the low-order resonance
    conditions must pass; violations raise ValueError.
    """
    fos = first_order_form(model)
    spec = compute_spectrum(fos)
    g1 = first_harmonic_vector(fos)
    spec = normalize_for_imaginary_rc(spec, g1, mode)
    report = check_nonresonance(spec, mode, tol_abs=tol_abs, tol_near=tol_near)
    if enforce_gate and not report.passed:
        raise ValueError(f"resonance conditions violated for mode {mode}: inner={report.inner_violations} near={report.near_violations}")
    g = diagonalize_nonlinearity(fos, spec)
    ssm = compute_ssm_general(g, spec, mode, order_m)
    sd = slow_dynamics(ssm)
    r_c = spec.v_inverse[mode] @ g1
    return ReducedModel(
        model=model,
        fos=fos,
        spectrum=spec,
        report=report,
        ssm=ssm,
        slow=sd,
        r=float(r_c.imag),
        mode=mode,
        order_m=order_m,
    )

"""Time-periodic corrections of the invariant manifold under forcing.

Away from resonance the leading correction is the classical harmonic
response of the linearized system (one term per forcing harmonic).  When
the forcing frequency lies close to a master eigenfrequency, the two
resonant modal rows are masked out of that solve and their effect moves
into the reduced dynamics through the scalar r; this keeps all denominators
bounded below by the master decay rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifold import SSMCoefficients
from .model import FirstOrderSystem, ForcingDefinition
from .spectral import Spectrum, first_harmonic_vector, reduced_forcing_scalar

__all__ = [
    "QuasiPeriodicCorrection",
    "ForcedSSM",
    "quasiperiodic_correction",
    "resonant_correction",
    "RESONANT_SWITCH_FACTOR",
]

# |Omega - Im(lam_l)| < 10 |Re(lam_l)| selects the resonant construction.
RESONANT_SWITCH_FACTOR = 10.0


@dataclass(frozen=True)
class QuasiPeriodicCorrection:
    """O(eps) time-varying manifold shift: harmonics of e^{i<k, Omega> t}."""

    harmonics: tuple  # ((k tuple, (2N,) complex amplitude), ...)
    base_frequencies: tuple

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if not self.harmonics:
            return np.zeros(t.shape + (0,), dtype=complex)
        dim = self.harmonics[0][1].size
        out = np.zeros(t.shape + (dim,), dtype=complex)
        for k, amp in self.harmonics:
            freq = float(np.dot(k, self.base_frequencies))
            out += np.multiply.outer(np.exp(1j * freq * t), amp)
        return out


@dataclass(frozen=True)
class ForcedSSM:
    """Reduced model of one master pair under near-resonant cosine forcing."""

    base: SSMCoefficients
    w_plus: np.ndarray  # (2N,) complex amplitude of e^{+i Omega t}
    w_minus: np.ndarray  # (2N,) complex amplitude of e^{-i Omega t}
    r: float  # Im(r_c) >= 0 after phase normalization
    omega: float
    epsilon: float

    def correction(self, t):
        """Real time-domain correction eps*(W+ e^{iwt} + W- e^{-iwt})."""
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * self.omega * t)
        return self.epsilon * (np.multiply.outer(phase, self.w_plus) + np.multiply.outer(np.conj(phase), self.w_minus))


def quasiperiodic_correction(spec: Spectrum, fos: FirstOrderSystem, min_denominator=None) -> QuasiPeriodicCorrection:
    """Per-harmonic correction V (i<k,Omega> I - Lam)^-1 V^-1 g^k.

    Valid only when every harmonic is non-resonant; a harmonic falling
    within ``min_denominator`` of an eigenvalue raises with a pointer to
    :func:`resonant_correction`.  The reduced dynamics receives no
    correction in this regime.
    """
    lam = spec.eigenvalues
    if min_denominator is None:
        min_denominator = RESONANT_SWITCH_FACTOR * float(np.min(np.abs(lam.real)))
    out = []
    for k, g in fos.forcing_harmonics:
        freq = float(np.dot(k, fos.base_frequencies))
        gaps = np.abs(1j * freq - lam)
        if np.min(gaps) < min_denominator:
            j = int(np.argmin(gaps))
            raise ValueError(f"harmonic {k} is near-resonant with mode {j}: use resonant_correction")
        amp = spec.v_matrix @ ((spec.v_inverse @ g) / (1j * freq - lam))
        out.append((k, amp))
    return QuasiPeriodicCorrection(tuple(out), tuple(fos.base_frequencies))


def resonant_correction(spec: Spectrum, fos: FirstOrderSystem, l, omega=None, base: SSMCoefficients = None, rc_tol=1e-9) -> ForcedSSM:
    """Masked first-harmonic correction W+- and reduced forcing scalar r.

    W+- = V S+- (+-i Omega I - Lam)^-1 V^-1 g^{+-1} with S+ (S-) the identity
    with the (l, l) ((l+N, l+N)) entry zeroed, so the resonant modal rows
    never enter the solve.  Requires single-harmonic forcing and a spectrum
    already phase-normalized so that r_c is purely imaginary.
    """
    kset = {k for k, _ in fos.forcing_harmonics}
    if kset != {(1,), (-1,)}:
        raise ValueError("resonant correction requires single-harmonic forcing")
    if omega is None:
        omega = fos.base_frequencies[0]
    n = spec.n_modes
    lam = spec.eigenvalues
    g1 = first_harmonic_vector(fos)

    r_c = reduced_forcing_scalar(spec, g1, l)
    if abs(r_c) == 0.0:
        raise ValueError("forcing orthogonal to master subspace: origin is the response")
    if abs(r_c.real) > rc_tol * abs(r_c):
        raise ValueError("spectrum not phase-normalized: apply normalize_for_imaginary_rc first")

    modal = spec.v_inverse @ g1
    plus = modal / (1j * omega - lam)
    plus[l] = 0.0  # S+ masks the resonant row
    w_plus = spec.v_matrix @ plus

    modal_m = spec.v_inverse @ np.conj(g1)
    minus = modal_m / (-1j * omega - lam)
    minus[l + n] = 0.0  # S- masks the conjugate row
    w_minus = spec.v_matrix @ minus

    return ForcedSSM(
        base=base,
        w_plus=w_plus,
        w_minus=w_minus,
        r=float(r_c.imag),
        omega=float(omega),
        epsilon=float(fos.epsilon),
    )

"""Eigen-analysis of the state-space matrix and resonance checks.

Eigenvalues are stored with the positive-imaginary representative of each
conjugate pair in the first N slots (sorted by frequency), with
``lam[j + N] = conj(lam[j])``.  Columns of V carry the structure
``v_j = (e_j, lam_j e_j)`` built from the displacement mode shape ``e_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import FirstOrderSystem

__all__ = [
    "Spectrum",
    "ResonanceReport",
    "compute_spectrum",
    "normalize_for_imaginary_rc",
    "spectral_quotient",
    "check_nonresonance",
    "first_harmonic_vector",
    "reduced_forcing_scalar",
]

SIGMA_CAP = 20
RECON_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # (2N,) complex
    v_matrix: np.ndarray  # (2N, 2N) complex, columns v_j
    v_inverse: np.ndarray  # (2N, 2N) complex, rows t_j
    mode_shapes: np.ndarray  # (N, N) complex, columns e_j for j < N
    lambda_min_index: int  # index (into 0..N-1) of most negative real part

    @property
    def n_modes(self):
        return self.eigenvalues.size // 2

    @property
    def natural_frequencies(self):
        """Undamped natural frequencies |lam_j| of the first N modes."""
        return np.abs(self.eigenvalues[: self.n_modes])

    @property
    def damping_ratios(self):
        lam = self.eigenvalues[: self.n_modes]
        return -lam.real / np.abs(lam)

    def row(self, j):
        """j-th row of V^-1 (left eigenvector, scaled)."""
        return self.v_inverse[j]


@dataclass(frozen=True)
class ResonanceReport:
    master_index: int
    sigma: int
    sigma_capped: bool
    inner_ok: bool
    inner_violations: tuple  # ((order m, mode n), ...)
    outer_ok: bool
    outer_violations: tuple  # ((m1, m2, target), ...)
    near_ok: bool
    near_violations: tuple  # ((m1, m2, mode j), ...)
    margins: dict  # {"inner": float, "outer": float, "near": float}

    @property
    def passed(self):
        return self.inner_ok and self.near_ok


def compute_spectrum(fos: FirstOrderSystem) -> Spectrum:
    """Eigen-decompose A and order/scale the result.

    Raises ValueError on overdamped (real) modes, on eigenvalues with
    nonnegative real part, and on defective A.
    """
    a = fos.a_matrix
    dim = a.shape[0]
    n = dim // 2
    scale = np.linalg.norm(a)
    lam_raw, vec_raw = np.linalg.eig(a)

    im_tol = 1e-10 * max(scale, 1.0)
    if np.any(np.abs(lam_raw.imag) <= im_tol):
        raise ValueError("overdamped mode: real eigenvalue detected")
    if np.any(lam_raw.real >= -0.0):
        raise ValueError("unstable or undamped origin: eigenvalue with nonnegative real part")
    _check_semisimple(a, lam_raw, scale)

    pos = np.where(lam_raw.imag > 0)[0]
    if pos.size != n:
        raise ValueError("eigenvalues do not form N conjugate pairs")
    order = pos[np.argsort(lam_raw.imag[pos])]

    lam = np.empty(dim, dtype=complex)
    v = np.empty((dim, dim), dtype=complex)
    shapes = np.empty((n, n), dtype=complex)
    for slot, idx in enumerate(order):
        lam_j = lam_raw[idx]
        top = vec_raw[:n, idx]
        bottom = vec_raw[n:, idx]
        if np.linalg.norm(bottom - lam_j * top) > 1e-6 * max(scale, 1.0) * np.linalg.norm(top):
            raise ValueError("eigenvector lacks (e, lam*e) companion structure")
        e = top / np.linalg.norm(top)
        # deterministic phase: largest-magnitude entry made real positive
        pivot = int(np.argmax(np.abs(e)))
        e = e * np.exp(-1j * np.angle(e[pivot]))
        lam[slot] = lam_j
        lam[slot + n] = np.conj(lam_j)
        shapes[:, slot] = e
        v[:n, slot] = e
        v[n:, slot] = lam_j * e
        v[:, slot + n] = np.conj(v[:, slot])

    v_inv = np.linalg.inv(v)
    if np.linalg.norm(a @ v - v * lam[None, :]) > RECON_TOL * max(scale, 1.0) * 10:
        raise ValueError("eigendecomposition failed reconstruction check")
    lam_min = int(np.argmin(lam[:n].real))
    return Spectrum(lam, v, v_inv, shapes, lam_min)


def _check_semisimple(a, lam, scale):
    dim = a.shape[0]
    tol = 1e-8 * max(scale, 1.0)
    used = np.zeros(dim, dtype=bool)
    for i in range(dim):
        if used[i]:
            continue
        cluster = np.abs(lam - lam[i]) < 1e-8 * max(np.abs(lam[i]), 1.0)
        mult = int(np.sum(cluster))
        used |= cluster
        if mult == 1:
            continue
        sv = np.linalg.svd(a - lam[i] * np.eye(dim), compute_uv=False)
        geo = int(np.sum(sv < tol))
        if geo < mult:
            raise ValueError("matrix not semisimple")


def first_harmonic_vector(fos: FirstOrderSystem):
    """Lifted k=+1 forcing amplitude g^(1) = (0, M^-1 f/2)."""
    for k, g in fos.forcing_harmonics:
        if k == (1,):
            return g
    raise ValueError("forcing has no k=+1 harmonic")


def reduced_forcing_scalar(spec: Spectrum, g1, l):
    """Modal participation r_c = t_l . g^(1) of the forcing in the master pair."""
    return complex(spec.v_inverse[l] @ np.asarray(g1, dtype=complex))


def normalize_for_imaginary_rc(spec: Spectrum, g1, l) -> Spectrum:
    """Rotate the master eigenvector pair so that r_c = i*|r_c|.

    Columns l and l+N of V pick up unit-modulus factors (and the matching
    rows of V^-1 the inverse factors), leaving the invariant subspaces and
    |r_c| unchanged.  Raises if the forcing is orthogonal to the master
    subspace (r_c = 0: the response is the origin).
    """
    n = spec.n_modes
    r_c = reduced_forcing_scalar(spec, g1, l)
    if abs(r_c) == 0.0:
        raise ValueError("forcing orthogonal to master subspace")
    s = r_c / (1j * abs(r_c))  # rotating column l by s maps r_c -> i*|r_c|
    if s == 1.0:
        return spec
    v = spec.v_matrix.copy()
    v_inv = spec.v_inverse.copy()
    shapes = spec.mode_shapes.copy()
    v[:, l] *= s
    v[:, l + n] *= np.conj(s)
    v_inv[l, :] /= s
    v_inv[l + n, :] /= np.conj(s)
    shapes[:, l] *= s
    return replace(spec, v_matrix=v, v_inverse=v_inv, mode_shapes=shapes)


def spectral_quotient(spec: Spectrum, l, cap=SIGMA_CAP):
    """Integer part of Re(lam_min)/Re(lam_l), capped at ``cap``."""
    sigma, _ = _sigma_with_flag(spec, l, cap)
    return sigma


def _sigma_with_flag(spec, l, cap):
    lam = spec.eigenvalues
    ratio = lam[spec.lambda_min_index].real / lam[l].real
    sigma = int(ratio)
    if sigma > cap:
        return cap, True
    return sigma, False


def check_nonresonance(spec: Spectrum, l, tol_abs=1e-6, tol_near=None, cap=SIGMA_CAP) -> ResonanceReport:
    """Evaluate the low-order resonance conditions gating the 2D reduction.

    * inner: m * Re(lam_l) != Re(lam_n) for n != l, 2 <= m <= Sigma
      (absolute tolerance ``tol_abs`` on the real-part distance);
    * outer: m1*lam_l + m2*conj(lam_l) != lam_n for n in {l, l+N},
      2 <= m1+m2 <= Sigma;
    * near:  m1*lam_l + m2*conj(lam_l) away from every other eigenvalue for
      1 <= m1+m2 <= Sigma (tolerance ``tol_near``, default
      0.05*|Im(lam_l)|).
    """
    n = spec.n_modes
    lam = spec.eigenvalues
    lam_l = lam[l]
    if tol_near is None:
        tol_near = 0.05 * abs(lam_l.imag)
    sigma, capped = _sigma_with_flag(spec, l, cap)

    inner_viol = []
    inner_margin = np.inf
    for m in range(2, sigma + 1):
        for mode in range(n):
            if mode == l:
                continue
            dist = abs(m * lam_l.real - lam[mode].real)
            inner_margin = min(inner_margin, dist)
            if dist < tol_abs:
                inner_viol.append((m, mode))

    outer_viol = []
    outer_margin = np.inf
    for m1 in range(0, sigma + 1):
        for m2 in range(0, sigma + 1 - m1):
            if m1 + m2 < 2:
                continue
            combo = m1 * lam_l + m2 * np.conj(lam_l)
            for target in (l, l + n):
                dist = abs(combo - lam[target])
                outer_margin = min(outer_margin, dist)
                if dist < tol_abs:
                    outer_viol.append((m1, m2, target))

    near_viol = []
    near_margin = np.inf
    for m1 in range(0, sigma + 1):
        for m2 in range(0, sigma + 1 - m1):
            if not 1 <= m1 + m2 <= sigma:
                continue
            combo = m1 * lam_l + m2 * np.conj(lam_l)
            for j in range(2 * n):
                if j in (l, l + n):
                    continue
                dist = abs(combo - lam[j])
                near_margin = min(near_margin, dist)
                if dist < tol_near:
                    near_viol.append((m1, m2, j))

    return ResonanceReport(
        master_index=l,
        sigma=sigma,
        sigma_capped=capped,
        inner_ok=not inner_viol,
        inner_violations=tuple(inner_viol),
        outer_ok=not outer_viol,
        outer_violations=tuple(outer_viol),
        near_ok=not near_viol,
        near_violations=tuple(near_viol),
        margins={"inner": float(inner_margin), "outer": float(outer_margin), "near": float(near_margin)},
    )

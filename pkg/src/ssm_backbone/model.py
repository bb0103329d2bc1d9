"""Mechanical systems and their first-order state-space form.

The second-order template is

    M q'' + (C + G) q' + (K + N) q + f_nl(q, q') = eps * f_ext(t),

with M symmetric positive definite, K and C symmetric positive
semi-definite, G and N skew-symmetric, and f_nl polynomial of total degree
at least two.  Three classical benchmark systems ship as builtins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .polyfield import PolynomialField

__all__ = [
    "MechanicalSystem",
    "ForcingDefinition",
    "FirstOrderSystem",
    "first_order_form",
    "validate_model",
    "builtin_model",
    "evaluate_field",
    "BUILTIN_NAMES",
]

MATRIX_TOL = 1e-10
MASS_CONDITION_CAP = 1e12


@dataclass(frozen=True)
class ForcingDefinition:
    """External forcing as a finite Fourier sum over k base frequencies.

    ``harmonics`` maps integer wave vectors to complex amplitude vectors of
    length N; conjugate pairs (k, -k) must both be present so the physical
    signal is real.  For cosine forcing ``f*cos(Omega*t)`` the two stored
    amplitudes are ``f/2``.
    """

    harmonics: tuple = ()  # ((k tuple, complex ndarray), ...)
    base_frequencies: tuple = ()
    epsilon: float = 0.0

    @classmethod
    def none(cls, n_dof):
        del n_dof
        return cls()

    @classmethod
    def single_harmonic(cls, f_vec, omega, epsilon):
        """Canonical cosine forcing: harmonics k = +-1 with amplitude f/2."""
        f_vec = np.asarray(f_vec, dtype=complex)
        half = f_vec / 2.0
        return cls(
            harmonics=(((1,), half), ((-1,), np.conj(half))),
            base_frequencies=(float(omega),),
            epsilon=float(epsilon),
        )

    @property
    def is_single_harmonic(self):
        kset = {k for k, _ in self.harmonics}
        return kset == {(1,), (-1,)} and len(self.base_frequencies) == 1

    def cosine_amplitude(self):
        """Recover f from the k=+1 Fourier amplitude (single-harmonic only)."""
        if not self.is_single_harmonic:
            raise ValueError("not single-harmonic forcing")
        for k, amp in self.harmonics:
            if k == (1,):
                return 2.0 * amp
        raise ValueError("missing k=+1 harmonic")

    def signal(self, t):
        """Physical forcing vector at time(s) t (without the epsilon factor)."""
        t = np.asarray(t, dtype=float)
        n = len(self.harmonics[0][1]) if self.harmonics else 0
        out = np.zeros(t.shape + (n,), dtype=complex)
        for k, amp in self.harmonics:
            freq = float(np.dot(k, self.base_frequencies))
            out += np.multiply.outer(np.exp(1j * freq * t), amp)
        return out


@dataclass(frozen=True)
class MechanicalSystem:
    n_dof: int
    mass: np.ndarray
    damping: np.ndarray
    gyroscopic: np.ndarray
    stiffness: np.ndarray
    follower: np.ndarray
    nonlinearity: PolynomialField  # over (q, qdot), outputs length n_dof
    forcing: ForcingDefinition
    name: str = "custom"

    def __post_init__(self):
        n = self.n_dof
        for label in ("mass", "damping", "gyroscopic", "stiffness", "follower"):
            mat = np.asarray(getattr(self, label), dtype=float)
            if mat.shape != (n, n):
                raise ValueError(f"{label} matrix has shape {mat.shape}, expected ({n}, {n})")
            object.__setattr__(self, label, mat)
        if self.nonlinearity.n_vars != 2 * n or self.nonlinearity.n_out != n:
            raise ValueError("nonlinearity must map 2N state variables to N outputs")


@dataclass(frozen=True)
class FirstOrderSystem:
    """State-space equivalent x' = A x + g_nl(x) + eps * sum_k g^k e^{i<k,Omega>t}."""

    dim: int
    a_matrix: np.ndarray
    nonlinearity: PolynomialField  # over x = (q, qdot), outputs length 2N
    forcing_harmonics: tuple  # ((k tuple, complex ndarray length 2N), ...)
    base_frequencies: tuple
    epsilon: float
    model: MechanicalSystem = field(repr=False, default=None)

    @property
    def n_dof(self):
        return self.dim // 2


def first_order_form(sys: MechanicalSystem) -> FirstOrderSystem:
    """Convert to first-order form with x = (q, qdot).

    A = [[0, I], [-M^-1 (K+N), -M^-1 (C+G)]]; the nonlinearity and each
    forcing harmonic are lifted with a zero upper block.  Moving f_nl to the
    right-hand side flips its sign in the lifted field.
    """
    n = sys.n_dof
    mass = sys.mass
    if np.linalg.cond(mass) > MASS_CONDITION_CAP:
        raise ValueError("mass matrix not invertible")
    m_inv = np.linalg.inv(mass)
    a = np.zeros((2 * n, 2 * n))
    a[:n, n:] = np.eye(n)
    a[n:, :n] = -m_inv @ (sys.stiffness + sys.follower)
    a[n:, n:] = -m_inv @ (sys.damping + sys.gyroscopic)

    lift = np.zeros((2 * n, n))
    lift[n:, :] = -m_inv  # f_nl enters the acceleration with a minus sign
    g_nl = sys.nonlinearity.project(lift)

    harm = []
    for k, amp in sys.forcing.harmonics:
        g = np.zeros(2 * n, dtype=complex)
        g[n:] = m_inv @ np.asarray(amp, dtype=complex)
        harm.append((tuple(k), g))
    return FirstOrderSystem(
        dim=2 * n,
        a_matrix=a,
        nonlinearity=g_nl,
        forcing_harmonics=tuple(harm),
        base_frequencies=tuple(sys.forcing.base_frequencies),
        epsilon=sys.forcing.epsilon,
        model=sys,
    )


def validate_model(sys: MechanicalSystem):
    """Check the structural matrix assumptions; returns a list of diagnostics.

    An empty list means all invariants hold within 1e-10 (absolute, on
    entries and on eigenvalues of the symmetric parts).
    """
    diags = []
    tol = MATRIX_TOL

    def _sym(mat, label):
        if np.max(np.abs(mat - mat.T)) > tol:
            diags.append(f"{label} not symmetric")
            return False
        return True

    def _skew(mat, label):
        if np.max(np.abs(mat + mat.T)) > tol:
            diags.append(f"{label} not skew-symmetric")

    if _sym(sys.mass, "mass"):
        if np.min(np.linalg.eigvalsh(sys.mass)) <= tol:
            diags.append("mass not positive definite")
    if _sym(sys.stiffness, "stiffness"):
        if np.min(np.linalg.eigvalsh(sys.stiffness)) < -tol:
            diags.append("stiffness not positive semi-definite")
    if _sym(sys.damping, "damping"):
        if np.min(np.linalg.eigvalsh(sys.damping)) < -tol:
            diags.append("damping not positive semi-definite")
    _skew(sys.gyroscopic, "gyroscopic")
    _skew(sys.follower, "follower")

    if sys.nonlinearity.terms and sys.nonlinearity.min_degree() < 2:
        diags.append("nonlinearity contains terms of total degree < 2")

    pairs = dict(sys.forcing.harmonics)
    for k, amp in pairs.items():
        mk = tuple(-ki for ki in k)
        partner = pairs.get(mk)
        if partner is None or np.max(np.abs(np.conj(amp) - partner)) > tol:
            diags.append(f"forcing harmonic {k} lacks a conjugate partner")
    if any(w <= 0 for w in sys.forcing.base_frequencies):
        diags.append("forcing base frequencies must be positive")
    if sys.forcing.epsilon < 0:
        diags.append("forcing amplitude scale must be nonnegative")
    return diags


def evaluate_field(field_: PolynomialField, x):
    """Evaluate a polynomial field at state x (plain function wrapper)."""
    return field_.evaluate(x)


# -- builtin benchmark systems ----------------------------------------------


def _cubic_on(n, dof_index, coef_vec):
    """Field with a single term kappa * q_j^3 placed in the given equations."""
    key = [0] * (2 * n)
    key[dof_index] = 3
    return PolynomialField(2 * n, n, {tuple(key): np.asarray(coef_vec, dtype=float)})


def _shaw_pierre(params):
    defaults = {"m": 1.0, "k": 1.0, "c1": 0.003, "c2": 0.003 / np.sqrt(3.0), "kappa": 0.5, "epsilon": 0.003, "omega": 1.0, "mode": 1}
    p = {**defaults, **params}
    m, k, c1, c2, kappa = p["m"], p["k"], p["c1"], p["c2"], p["kappa"]
    mass = m * np.eye(2)
    damping = np.array([[c1 + c2, -c2], [-c2, c1 + c2]])
    stiffness = np.array([[2 * k, -k], [-k, 2 * k]])
    nl = _cubic_on(2, 0, [kappa, 0.0])
    # First-mode forcing f1 = f2 = eps/sqrt(2) by default; mode=2 flips the sign.
    direction = np.array([1.0, 1.0]) if p["mode"] == 1 else np.array([1.0, -1.0])
    f_vec = direction / np.sqrt(2.0)
    forcing = ForcingDefinition.single_harmonic(f_vec, p["omega"], p["epsilon"])
    return MechanicalSystem(2, mass, damping, np.zeros((2, 2)), stiffness, np.zeros((2, 2)), nl, forcing, name="shaw_pierre")


def _spring_system(params):
    defaults = {"omega1": 2.0, "omega2": 4.5, "d1": 0.01, "d2": 0.2, "f1": 1.0, "epsilon": 0.02, "omega": 2.0}
    p = {**defaults, **params}
    w1s, w2s = p["omega1"] ** 2, p["omega2"] ** 2
    mass = np.eye(2)
    damping = np.diag([2 * p["d1"] * p["omega1"], 2 * p["d2"] * p["omega2"]])
    stiffness = np.diag([w1s, w2s])
    n = 2
    half = (w1s + w2s) / 2.0

    def key(e1, e2):
        return (e1, e2, 0, 0)

    terms = {
        key(2, 0): np.array([1.5 * w1s, 0.5 * w2s]),
        key(0, 2): np.array([0.5 * w1s, 1.5 * w2s]),
        key(1, 1): np.array([w2s, w1s]),
        key(3, 0): np.array([half, 0.0]),
        key(1, 2): np.array([half, 0.0]),
        key(2, 1): np.array([0.0, half]),
        key(0, 3): np.array([0.0, half]),
    }
    nl = PolynomialField(2 * n, n, terms)
    forcing = ForcingDefinition.single_harmonic([p["f1"], 0.0], p["omega"], p["epsilon"])
    return MechanicalSystem(2, mass, damping, np.zeros((2, 2)), stiffness, np.zeros((2, 2)), nl, forcing, name="spring_system")


def _oscillator_chain(params):
    defaults = {"n": 5, "m": 1.0, "c": 0.005, "k": 1.0, "kappa": 0.5, "epsilon": 0.004, "omega": None}
    p = {**defaults, **params}
    n = int(p["n"])
    if n < 2:
        raise ValueError("oscillator chain needs n >= 2")
    m, c, k, kappa = p["m"], p["c"], p["k"], p["kappa"]
    mass = m * np.eye(n)
    lap = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    stiffness = k * lap
    # Uniform modal damping ratio c/2 on every mode: C = c * M^(1/2) sqrt(M^-1/2 K M^-1/2) M^(1/2).
    # For the chain of identical dampers this reduces to c * sqrtm(K/m) * m.
    evals, evecs = np.linalg.eigh(stiffness / m)
    omegas = np.sqrt(evals)
    damping = m * c * (evecs @ np.diag(omegas) @ evecs.T)
    damping = 0.5 * (damping + damping.T)
    nl = _cubic_on(n, 0, [kappa] + [0.0] * (n - 1))
    omega = p["omega"] if p["omega"] is not None else omegas[0]
    f_vec = np.zeros(n)
    f_vec[0] = 1.0
    forcing = ForcingDefinition.single_harmonic(f_vec, omega, p["epsilon"])
    return MechanicalSystem(n, mass, damping, np.zeros((n, n)), stiffness, np.zeros((n, n)), nl, forcing, name="oscillator_chain")


_BUILTINS = {
    "shaw_pierre": _shaw_pierre,
    "spring_system": _spring_system,
    "oscillator_chain": _oscillator_chain,
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_model(name, params=None) -> MechanicalSystem:
    """Construct one of the benchmark systems; defaults follow the sources."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin model {name!r}; choose from {BUILTIN_NAMES}") from None
    return factory(dict(params or {}))

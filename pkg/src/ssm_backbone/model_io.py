"""Model file parsing and serialization (JSON schema).

Schema (all matrices row-major nested lists):

    {
      "dof": 2,
      "mass": [[...], ...],
      "damping": [[...], ...],
      "stiffness": [[...], ...],
      "gyroscopic": [[...], ...],      // optional, default zero
      "follower": [[...], ...],        // optional, default zero
      "nonlinear": [                    // optional
        {"equation": 1,                 // 1-based equation/row index
         "q_exponents": [3, 0],
         "qdot_exponents": [0, 0],
         "coefficient": 0.5}
      ],
      "forcing": {"vector": [...], "epsilon": 0.003, "frequency": 1.0}
      // or: {"harmonics": [{"k": [1], "real": [...], "imag": [...]}, ...],
      //      "base_frequencies": [...], "epsilon": ...}
    }

Duplicate nonlinear terms (same equation and exponents) are merged by
summing coefficients, with a warning.
"""

from __future__ import annotations

import hashlib
import json
import warnings

import numpy as np

from .model import ForcingDefinition, MechanicalSystem
from .polyfield import PolynomialField

__all__ = ["parse_model", "parse_model_dict", "serialize_model", "model_hash", "ModelFormatError"]


class ModelFormatError(ValueError):
    """Schema violation in a model file, with the offending field named."""


def parse_model(path) -> MechanicalSystem:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    return parse_model_dict(data, origin=str(path))


def _matrix(data, name, n, origin, required=True):
    raw = data.get(name)
    if raw is None:
        if required:
            raise ModelFormatError(f"{origin}: missing field '{name}'")
        return np.zeros((n, n))
    try:
        mat = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise ModelFormatError(f"{origin}: field '{name}' is not a numeric matrix") from None
    if mat.shape != (n, n):
        raise ModelFormatError(f"{origin}: field '{name}' has shape {mat.shape}, expected ({n}, {n})")
    return mat


def parse_model_dict(data, origin="<dict>") -> MechanicalSystem:
    if "dof" not in data:
        raise ModelFormatError(f"{origin}: missing field 'dof'")
    n = int(data["dof"])
    if n < 1:
        raise ModelFormatError(f"{origin}: 'dof' must be positive")

    mass = _matrix(data, "mass", n, origin)
    damping = _matrix(data, "damping", n, origin)
    stiffness = _matrix(data, "stiffness", n, origin)
    gyro = _matrix(data, "gyroscopic", n, origin, required=False)
    follower = _matrix(data, "follower", n, origin, required=False)

    terms = {}
    for idx, item in enumerate(data.get("nonlinear", [])):
        where = f"{origin}: nonlinear[{idx}]"
        try:
            eq = int(item["equation"])
            qe = [int(v) for v in item["q_exponents"]]
            de = [int(v) for v in item["qdot_exponents"]]
            coef = float(item["coefficient"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"{where}: {exc}") from None
        if not 1 <= eq <= n:
            raise ModelFormatError(f"{where}: equation index {eq} outside 1..{n}")
        if len(qe) != n or len(de) != n:
            raise ModelFormatError(f"{where}: exponent lists must have length {n}")
        key = tuple(qe) + tuple(de)
        vec = np.zeros(n)
        vec[eq - 1] = coef
        if key in terms and terms[key][eq - 1] != 0.0:
            warnings.warn(f"{where}: duplicate nonlinear term for equation {eq}, coefficients summed", stacklevel=2)
        terms[key] = terms.get(key, np.zeros(n)) + vec
    nl = PolynomialField(2 * n, n, terms)

    fdata = data.get("forcing")
    if fdata is None:
        forcing = ForcingDefinition.none(n)
    elif "vector" in fdata:
        try:
            vec = np.asarray(fdata["vector"], dtype=float)
            eps = float(fdata["epsilon"])
            freq = float(fdata["frequency"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"{origin}: forcing: {exc}") from None
        if vec.shape != (n,):
            raise ModelFormatError(f"{origin}: forcing vector must have length {n}")
        forcing = ForcingDefinition.single_harmonic(vec, freq, eps)
    else:
        try:
            base = tuple(float(w) for w in fdata["base_frequencies"])
            eps = float(fdata["epsilon"])
            harmonics = []
            for item in fdata["harmonics"]:
                k = tuple(int(v) for v in item["k"])
                re = np.asarray(item["real"], dtype=float)
                im = np.asarray(item.get("imag", np.zeros(n)), dtype=float)
                if re.shape != (n,) or im.shape != (n,) or len(k) != len(base):
                    raise ValueError("harmonic shape mismatch")
                harmonics.append((k, re + 1j * im))
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"{origin}: forcing: {exc}") from None
        forcing = ForcingDefinition(tuple(harmonics), base, eps)

    return MechanicalSystem(n, mass, damping, gyro, stiffness, follower, nl, forcing, name=str(data.get("name", "custom")))


def serialize_model(sys: MechanicalSystem) -> dict:
    """Dictionary form of a model; inverse of :func:`parse_model_dict`."""
    n = sys.n_dof
    nonlinear = []
    for key in sorted(sys.nonlinearity.terms):
        vec = sys.nonlinearity.terms[key]
        for eq in range(n):
            if vec[eq] != 0.0:
                nonlinear.append(
                    {
                        "equation": eq + 1,
                        "q_exponents": list(key[:n]),
                        "qdot_exponents": list(key[n:]),
                        "coefficient": float(np.real(vec[eq])),
                    }
                )
    data = {
        "name": sys.name,
        "dof": n,
        "mass": sys.mass.tolist(),
        "damping": sys.damping.tolist(),
        "stiffness": sys.stiffness.tolist(),
        "nonlinear": nonlinear,
    }
    if np.any(sys.gyroscopic):
        data["gyroscopic"] = sys.gyroscopic.tolist()
    if np.any(sys.follower):
        data["follower"] = sys.follower.tolist()
    f = sys.forcing
    if f.is_single_harmonic:
        vec = f.cosine_amplitude()
        data["forcing"] = {
            "vector": [float(v) for v in vec.real],
            "epsilon": f.epsilon,
            "frequency": float(f.base_frequencies[0]),
        }
    elif f.harmonics:
        data["forcing"] = {
            "base_frequencies": list(f.base_frequencies),
            "epsilon": f.epsilon,
            "harmonics": [
                {"k": list(k), "real": [float(v) for v in amp.real], "imag": [float(v) for v in amp.imag]}
                for k, amp in f.harmonics
            ],
        }
    return data


def model_hash(sys: MechanicalSystem) -> str:
    """Stable content hash of a model (provenance stamp for CSV headers)."""
    blob = json.dumps(serialize_model(sys), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]

"""Sparse multivariate polynomial maps.

A :class:`PolynomialField` stores a polynomial map ``R^n_vars -> C^n_out``
(or real outputs) as a dictionary from exponent multi-indices to coefficient
vectors.  The systems treated here have at most a handful of monomials, so
sparse exponent arithmetic beats any dense tensor representation and keeps
order-5 manifold algebra exact.
"""

from __future__ import annotations

import numpy as np

__all__ = ["PolynomialField"]


def _as_exponents(key, n_vars):
    key = tuple(int(k) for k in key)
    if len(key) != n_vars:
        raise ValueError(f"exponent tuple {key} has length {len(key)}, expected {n_vars}")
    if any(k < 0 for k in key):
        raise ValueError(f"negative exponent in {key}")
    return key


class PolynomialField:
    """Polynomial map stored as ``{exponent tuple: coefficient vector}``.

    Zero coefficient vectors are never stored.  Instances are immutable by
    convention: all operations return new fields.
    """

    __slots__ = ("n_vars", "n_out", "terms")

    def __init__(self, n_vars, n_out, terms=None):
        self.n_vars = int(n_vars)
        self.n_out = int(n_out)
        clean = {}
        for key, vec in (terms or {}).items():
            key = _as_exponents(key, self.n_vars)
            vec = np.asarray(vec)
            if vec.shape != (self.n_out,):
                raise ValueError(f"coefficient for {key} has shape {vec.shape}, expected ({self.n_out},)")
            if not np.iscomplexobj(vec):
                vec = vec.astype(float)
            if np.all(vec == 0):
                continue
            if key in clean:
                vec = clean[key] + vec
                if np.all(vec == 0):
                    del clean[key]
                    continue
            clean[key] = vec
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n_vars, n_out):
        return cls(n_vars, n_out, {})

    def with_term(self, exponents, coef):
        """Return a copy with ``coef`` added to the term ``exponents``."""
        terms = dict(self.terms)
        key = _as_exponents(exponents, self.n_vars)
        vec = np.asarray(coef)
        terms[key] = terms.get(key, 0) + vec
        return PolynomialField(self.n_vars, self.n_out, terms)

    # -- queries -----------------------------------------------------------

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, PolynomialField):
            return NotImplemented
        if (self.n_vars, self.n_out) != (other.n_vars, other.n_out):
            return False
        if set(self.terms) != set(other.terms):
            return False
        return all(np.array_equal(self.terms[k], other.terms[k]) for k in self.terms)

    def is_real(self, tol=0.0):
        return all(np.max(np.abs(v.imag)) <= tol if np.iscomplexobj(v) else True for v in self.terms.values())

    def min_degree(self):
        return min((sum(k) for k in self.terms), default=0)

    def max_degree(self):
        return max((sum(k) for k in self.terms), default=0)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, x):
        """Evaluate the field at state ``x`` (length ``n_vars``)."""
        x = np.asarray(x)
        if x.shape != (self.n_vars,):
            raise ValueError(f"state has shape {x.shape}, expected ({self.n_vars},)")
        complex_out = np.iscomplexobj(x) or any(np.iscomplexobj(v) for v in self.terms.values())
        out = np.zeros(self.n_out, dtype=complex if complex_out else float)
        for key, vec in self.terms.items():
            mono = 1.0
            for xi, ki in zip(x, key):
                if ki:
                    mono = mono * xi**ki
            out = out + vec * mono
        return out

    # -- calculus / algebra -------------------------------------------------

    def derivative(self, var):
        """Partial derivative with respect to variable ``var``."""
        terms = {}
        for key, vec in self.terms.items():
            k = key[var]
            if k == 0:
                continue
            dkey = key[:var] + (k - 1,) + key[var + 1 :]
            terms[dkey] = terms.get(dkey, 0) + k * vec
        return PolynomialField(self.n_vars, self.n_out, terms)

    def jacobian(self, x):
        """Jacobian matrix at ``x``: shape ``(n_out, n_vars)``."""
        x = np.asarray(x)
        complex_out = np.iscomplexobj(x) or any(np.iscomplexobj(v) for v in self.terms.values())
        jac = np.zeros((self.n_out, self.n_vars), dtype=complex if complex_out else float)
        for v in range(self.n_vars):
            d = self.derivative(v)
            if d.terms:
                jac[:, v] = d.evaluate(x)
        return jac

    def scale(self, factor):
        return PolynomialField(self.n_vars, self.n_out, {k: factor * v for k, v in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, PolynomialField):
            return NotImplemented
        if (self.n_vars, self.n_out) != (other.n_vars, other.n_out):
            raise ValueError("field shape mismatch")
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return PolynomialField(self.n_vars, self.n_out, terms)

    def project(self, matrix):
        """Left-multiply every coefficient vector by ``matrix``."""
        matrix = np.asarray(matrix)
        if matrix.shape[1] != self.n_out:
            raise ValueError("projection matrix shape mismatch")
        return PolynomialField(self.n_vars, matrix.shape[0], {k: matrix @ v for k, v in self.terms.items()})

    def compose_linear(self, m_in):
        """Substitute ``x = m_in @ y``; returns a field in ``y``.

        ``m_in`` has shape ``(n_vars, n_new)``.  Exact exponent arithmetic,
        no truncation.
        """
        m_in = np.asarray(m_in)
        if m_in.shape[0] != self.n_vars:
            raise ValueError("substitution matrix shape mismatch")
        n_new = m_in.shape[1]
        rows = [{_unit(n_new, j): m_in[i, j] for j in range(n_new) if m_in[i, j] != 0} for i in range(self.n_vars)]
        out = {}
        for key, vec in self.terms.items():
            mono = {(0,) * n_new: 1.0}
            for i, k in enumerate(key):
                if k:
                    mono = poly_mul(mono, poly_pow(rows[i], k))
            for p, s in mono.items():
                out[p] = out.get(p, 0) + s * vec
        return PolynomialField(n_new, self.n_out, out)

    def as_arrays(self):
        """Flatten to ``(exponents int64 (nt, n_vars), coefs (nt, n_out))``.

        Term order is lexicographic in the exponent tuples, so downstream
        kernels see a deterministic layout.
        """
        keys = sorted(self.terms)
        exps = np.array(keys, dtype=np.int64).reshape(len(keys), self.n_vars)
        complex_out = any(np.iscomplexobj(self.terms[k]) for k in keys)
        coefs = np.array([self.terms[k] for k in keys], dtype=complex if complex_out else float)
        coefs = coefs.reshape(len(keys), self.n_out)
        return exps, coefs


def _unit(n, j):
    key = [0] * n
    key[j] = 1
    return tuple(key)


# -- scalar polynomial helpers (dict {exponent tuple: scalar}) --------------


def poly_mul(p, q, max_deg=None):
    out = {}
    for kp, vp in p.items():
        dp = sum(kp)
        for kq, vq in q.items():
            if max_deg is not None and dp + sum(kq) > max_deg:
                continue
            key = tuple(a + b for a, b in zip(kp, kq))
            out[key] = out.get(key, 0) + vp * vq
    return {k: v for k, v in out.items() if v != 0}


def poly_pow(p, k, max_deg=None):
    if k == 0:
        n = len(next(iter(p))) if p else 0
        return {(0,) * n: 1.0}
    result = p
    for _ in range(k - 1):
        result = poly_mul(result, p, max_deg=max_deg)
    return result

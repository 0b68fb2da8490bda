"""Sparse multivariate polynomials.

A polynomial in ``nx`` variables with ``ncoefs`` monomials is stored as

  powers : int64 array, shape (ncoefs, nx)   row i = exponents of monomial i
  coefs  : float64 array, shape (ncoefs,)

so that P(x) = sum_i coefs[i] * prod_j x[j] ** powers[i, j].

Duplicate rows are allowed; their contributions simply add up.  ``0 ** 0``
is taken to be 1, so a monomial with a zero exponent never depends on that
variable.

Restricting a polynomial to one coordinate (all others frozen) gives a
:class:`ScalarPoly`, stored with coefficients in descending degree order
like ``numpy.poly1d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyPolynomial,
    IndexOutOfRange,
    NegativePower,
    NonFiniteCoef,
    SchemaViolation,
    ValidationError,
)

# Upper bound on the number of intermediate floats eval_batch materialises.
_EVAL_CHUNK = 1 << 22


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Immutable sparse polynomial; build with :func:`new_polynomial`."""

    powers: np.ndarray
    coefs: np.ndarray
    nx: int = field(init=False)
    ncoefs: int = field(init=False)
    deg: int = field(init=False)

    def __post_init__(self):
        powers, coefs = _validate(self.powers, self.coefs)
        object.__setattr__(self, "powers", _frozen(powers))
        object.__setattr__(self, "coefs", _frozen(coefs))
        object.__setattr__(self, "nx", int(powers.shape[1]))
        object.__setattr__(self, "ncoefs", int(powers.shape[0]))
        object.__setattr__(self, "deg", int(powers.sum(axis=1).max()))

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            self.powers.shape == other.powers.shape
            and bool(np.array_equal(self.powers, other.powers))
            and bool(np.array_equal(self.coefs, other.coefs))
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"Polynomial(nx={self.nx}, ncoefs={self.ncoefs}, deg={self.deg})"

    def eval(self, X) -> np.ndarray:
        return eval_batch(self, X)

    def extract_scalar(self, x0, ix: int) -> "ScalarPoly":
        return extract_scalar(self, x0, ix)

    def to_record(self, xmin=None, xmax=None) -> dict:
        return to_record(self, xmin, xmax)

    def to_table(self) -> list[tuple[list[int], float]]:
        return to_table(self)

    def solve(self, xmin, xmax, **options):
        """Shortcut for :func:`polybox.solver.solve` on this polynomial."""
        from .solver import Box, SolveOptions, solve

        return solve(self, Box(xmin, xmax), SolveOptions(**options))


def _validate(powers, coefs) -> tuple[np.ndarray, np.ndarray]:
    try:
        p = np.asarray(powers)
        c = np.asarray(coefs, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"cannot interpret powers/coefs as arrays: {exc}") from exc
    if p.ndim != 2:
        if p.size == 0:
            raise EmptyPolynomial("powers must contain at least one monomial")
        raise DimensionMismatch(f"powers must be a 2-D matrix, got {p.ndim} dimension(s)")
    if c.ndim != 1:
        raise DimensionMismatch(f"coefs must be a vector, got {c.ndim} dimension(s)")
    if p.shape[0] == 0 or p.shape[1] == 0:
        raise EmptyPolynomial(f"powers has shape {p.shape}; need at least one monomial and one variable")
    if p.shape[0] != c.shape[0]:
        raise DimensionMismatch(f"powers has {p.shape[0]} rows but coefs has {c.shape[0]} entries")
    if p.dtype.kind not in "iu":
        if p.dtype.kind != "f" or not np.all(np.isfinite(p)) or np.any(p != np.round(p)):
            raise ValidationError("powers must be integers")
    if np.any(p < 0):
        i, j = np.argwhere(p < 0)[0]
        raise NegativePower(f"powers[{i}][{j}] = {p[i, j]} is negative")
    if not np.all(np.isfinite(c)):
        i = int(np.flatnonzero(~np.isfinite(c))[0])
        raise NonFiniteCoef(f"coefs[{i}] = {c[i]} is not finite")
    return p.astype(np.int64), c


def new_polynomial(powers, coefs) -> Polynomial:
    return Polynomial(powers, coefs)


def eval_batch(p: Polynomial, X) -> np.ndarray:
    """Evaluate ``p`` at every row of ``X`` (shape ``(m, nx)``).

    A 1-D ``X`` of length ``nx`` is treated as a single point.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else X.reshape(0, p.nx)
    if X.ndim != 2 or X.shape[1] != p.nx:
        raise DimensionMismatch(f"points must have {p.nx} components, got shape {X.shape}")
    m = X.shape[0]
    out = np.empty(m)
    step = max(1, _EVAL_CHUNK // max(1, p.ncoefs))
    for start in range(0, m, step):
        block = X[start:start + step]
        mono = np.ones((block.shape[0], p.ncoefs))
        for j in range(p.nx):
            pj = p.powers[:, j]
            if pj.any():
                mono *= block[:, j, None] ** pj
        out[start:start + step] = mono @ p.coefs
    return out


@dataclass(frozen=True, eq=False)
class ScalarPoly:
    """Univariate polynomial, coefficients ``[a_d, ..., a_1, a_0]``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=np.float64))
        if c.ndim != 1 or c.size == 0:
            raise DimensionMismatch("scalar polynomial needs a non-empty coefficient vector")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, ts) -> np.ndarray:
        return eval_scalar(self, ts)

    def __eq__(self, other):
        if not isinstance(other, ScalarPoly):
            return NotImplemented
        return bool(np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"ScalarPoly({self.coeffs.tolist()})"


def extract_scalar(p: Polynomial, x0, ix: int) -> ScalarPoly:
    """Restrict ``p`` to coordinate ``ix`` with the others frozen at ``x0``."""
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (p.nx,):
        raise DimensionMismatch(f"x0 must have {p.nx} components, got shape {x0.shape}")
    if not 0 <= ix < p.nx:
        raise IndexOutOfRange(f"component index {ix} outside [0, {p.nx})")
    factors = x0 ** p.powers
    factors[:, ix] = 1.0
    partial = p.coefs * factors.prod(axis=1)
    ascending = np.bincount(p.powers[:, ix], weights=partial)
    return ScalarPoly(ascending[::-1])


def eval_scalar(q: ScalarPoly, ts) -> np.ndarray:
    """Horner evaluation of ``q`` at every entry of ``ts``."""
    t = np.asarray(ts, dtype=np.float64)
    c = q.coeffs
    acc = np.full(t.shape, c[0])
    for a in c[1:]:
        np.multiply(acc, t, out=acc)
        acc += a
    return acc


# -- serialization ---------------------------------------------------------

_NUM_VECTOR = {"type": "array", "items": {"type": "number"}}

PROBLEM_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "powers": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 1,
                "items": {"type": "integer", "minimum": 0},
            },
        },
        "coefs": dict(_NUM_VECTOR, minItems=1),
        "xmin": _NUM_VECTOR,
        "xmax": _NUM_VECTOR,
        "nx": {"type": "integer"},
        "ncoefs": {"type": "integer"},
        "deg": {"type": "integer"},
    },
    "required": ["powers", "coefs"],
    "additionalProperties": False,
}


def _json_path(parts) -> str:
    out = ""
    for part in parts:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def validate_record(doc: Any) -> None:
    """Raise :class:`SchemaViolation` unless ``doc`` is a valid problem document."""
    import jsonschema

    validator = jsonschema.Draft202012Validator(PROBLEM_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise SchemaViolation(_json_path(err.absolute_path), err.message)

    powers, coefs = doc["powers"], doc["coefs"]
    nx = len(powers[0])
    for i, row in enumerate(powers):
        if len(row) != nx:
            raise SchemaViolation(f"powers[{i}]", f"row has {len(row)} entries, expected {nx}")
    if len(coefs) != len(powers):
        raise SchemaViolation("coefs", f"has {len(coefs)} entries but powers has {len(powers)} rows")
    for i, c in enumerate(coefs):
        if not np.isfinite(c):
            raise SchemaViolation(f"coefs[{i}]", "coefficient is not finite")
    for key in ("xmin", "xmax"):
        if key in doc:
            vec = doc[key]
            if len(vec) != nx:
                raise SchemaViolation(key, f"has {len(vec)} entries, expected {nx}")
            for i, v in enumerate(vec):
                if not np.isfinite(v):
                    raise SchemaViolation(f"{key}[{i}]", "bound is not finite")
    # derived fields are optional but must not contradict the data
    derived = {"nx": nx, "ncoefs": len(powers), "deg": max(int(sum(r)) for r in powers)}
    for key, value in derived.items():
        if key in doc and doc[key] != value:
            raise SchemaViolation(key, f"is {doc[key]} but the powers matrix implies {value}")


def to_record(p: Polynomial, xmin=None, xmax=None) -> dict:
    doc: dict[str, Any] = {
        "powers": p.powers.tolist(),
        "coefs": p.coefs.tolist(),
        "nx": p.nx,
        "ncoefs": p.ncoefs,
        "deg": p.deg,
    }
    if xmin is not None:
        doc["xmin"] = np.broadcast_to(np.asarray(xmin, dtype=float), (p.nx,)).tolist()
    if xmax is not None:
        doc["xmax"] = np.broadcast_to(np.asarray(xmax, dtype=float), (p.nx,)).tolist()
    return doc


def from_record(doc: Mapping) -> Polynomial:
    validate_record(doc)
    return Polynomial([[int(v) for v in row] for row in doc["powers"]], doc["coefs"])


def problem_from_record(doc: Mapping) -> tuple[Polynomial, np.ndarray | None, np.ndarray | None]:
    """Like :func:`from_record`, also returning the optional box bounds."""
    pol = from_record(doc)
    xmin = np.asarray(doc["xmin"], dtype=float) if "xmin" in doc else None
    xmax = np.asarray(doc["xmax"], dtype=float) if "xmax" in doc else None
    return pol, xmin, xmax


def to_table(p: Polynomial) -> list[tuple[list[int], float]]:
    return [(row.tolist(), float(c)) for row, c in zip(p.powers, p.coefs)]


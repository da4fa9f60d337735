"""Scalar fields over coordinate charts.

A scalar field is an ordinary sympy expression in coordinate symbols and
parameter symbols.  This module adds what the rest of the package needs on
top of sympy: charts with reality tags, the parameter block, checked
differentiation, fast complex point evaluation (compiled and cached) and
derivative jets used by the pointwise curvature code.
"""
from __future__ import annotations

import cmath
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import sympy as sp


class DomainError(ValueError):
    """Raised for malformed requests: unknown coordinates, bad parameters."""


class EvaluationError(ArithmeticError):
    """A field could not be evaluated at a point (pole, log of zero, ...)."""

    def __init__(self, message: str, subtree: sp.Expr | None = None):
        super().__init__(message)
        self.subtree = subtree


# -- symbols -----------------------------------------------------------------

# null coordinates on the four-manifold and their Euclidean partners
w, z, wt, zt = sp.symbols("w z wt zt")
wb, zb = sp.symbols("wb zb")
# reduction coordinates
t, u, v = sp.symbols("t u v")
# Berger sphere
theta, phi, psi = sp.symbols("theta phi psi")
# two-dimensional reductions
s, xi, j, J, R = sp.symbols("s xi j J R")
x, y = sp.symbols("x y")
# fiber coordinates for the symmetry analysis
Gc, Q, Qb = sp.symbols("G Q Qb")
# spectral parameters
lam, lamt = sp.symbols("lam lamt")

# parameters
ALPHA, ETA, RHO, M, MT, B = sp.symbols("alpha eta rho m mt b")

PARAMETER_SYMBOLS = {sym.name: sym for sym in (ALPHA, ETA, RHO, M, MT, B)}


def parameter(name: str) -> sp.Symbol:
    """Symbol for an auxiliary constant (``C``, ``Cb``, ``alpha1`` ...)."""
    sym = PARAMETER_SYMBOLS.get(name)
    if sym is None:
        sym = sp.Symbol(name)
        PARAMETER_SYMBOLS[name] = sym
    return sym


# -- charts --------------------------------------------------------------------

REAL = "real"
COMPLEX = "complex"


@dataclass(frozen=True)
class Chart:
    """An ordered coordinate system.

    ``reality`` holds one tag per coordinate: ``"real"``, ``"complex"``, or a
    pair ``("conj", k)`` / ``("negconj", k)`` meaning the coordinate is bound
    to ``conj(x_k)`` (resp. ``-conj(x_k)``) on the real slice.  Conjugate
    partners must point at each other.
    """

    name: str
    coords: tuple[sp.Symbol, ...]
    reality: tuple = ()

    def __post_init__(self):
        if not self.reality:
            object.__setattr__(self, "reality", (COMPLEX,) * len(self.coords))
        names = [c.name for c in self.coords]
        if len(set(names)) != len(names):
            raise DomainError(f"chart {self.name}: duplicate coordinates {names}")
        if not 2 <= len(self.coords) <= 6:
            raise DomainError(f"chart {self.name}: dimension {len(self.coords)} out of range")
        if len(self.reality) != len(self.coords):
            raise DomainError(f"chart {self.name}: reality tags do not match coordinates")
        for i, tag in enumerate(self.reality):
            if isinstance(tag, tuple):
                kind, k = tag
                if kind not in ("conj", "negconj") or not 0 <= k < len(self.coords):
                    raise DomainError(f"chart {self.name}: bad reality tag {tag}")
                other = self.reality[k]
                if not (isinstance(other, tuple) and other[1] == i and other[0] == kind):
                    raise DomainError(f"chart {self.name}: conjugate partners of {names[i]} not mutual")
            elif tag not in (REAL, COMPLEX):
                raise DomainError(f"chart {self.name}: bad reality tag {tag}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, coord: sp.Symbol) -> int:
        try:
            return self.coords.index(coord)
        except ValueError:
            raise DomainError(f"{coord} is not a coordinate of chart {self.name}") from None

    @property
    def conjugate_pairs(self) -> int:
        return sum(1 for i, tag in enumerate(self.reality) if isinstance(tag, tuple) and tag[1] > i)

    def complete(self, values: Mapping[sp.Symbol, complex]) -> dict[sp.Symbol, complex]:
        """Fill in conjugate partners missing from ``values``."""
        out = dict(values)
        for i, tag in enumerate(self.reality):
            c = self.coords[i]
            if c in out or not isinstance(tag, tuple):
                continue
            partner = self.coords[tag[1]]
            if partner in out:
                val = complex(out[partner]).conjugate()
                out[c] = -val if tag[0] == "negconj" else val
        return out

    def sample(self, n: int, seed: int = 0, box: Mapping | None = None,
               reject=None, max_tries: int = 50) -> list[dict[sp.Symbol, complex]]:
        """Quasi-random points on the real slice of the chart.

        ``box`` maps a coordinate (or its name) to ``(lo, hi)``; complex
        coordinates use the same interval for real and imaginary parts.
        ``reject(point)`` may veto a point (e.g. near-singular metric).
        """
        from scipy.stats import qmc

        box = {(k.name if isinstance(k, sp.Symbol) else k): val for k, val in (box or {}).items()}
        free = []
        for i, tag in enumerate(self.reality):
            if isinstance(tag, tuple) and tag[1] < i:
                continue
            free.append(i)
        ndim = sum(1 if self.reality[i] == REAL else 2 for i in free)
        sampler = qmc.Halton(d=ndim, scramble=True, seed=seed)
        points: list[dict] = []
        tries = 0
        while len(points) < n and tries < max_tries:
            tries += 1
            raw = sampler.random(max(2 * n, 8))
            for row in raw:
                k = 0
                vals = {}
                for i in free:
                    lo, hi = box.get(self.coords[i].name, (-0.8, 0.8))
                    if self.reality[i] == REAL:
                        vals[self.coords[i]] = complex(lo + (hi - lo) * row[k])
                        k += 1
                    else:
                        re = lo + (hi - lo) * row[k]
                        im = lo + (hi - lo) * row[k + 1]
                        vals[self.coords[i]] = complex(re, im)
                        k += 2
                pt = self.complete(vals)
                if reject is not None and reject(pt):
                    continue
                points.append(pt)
                if len(points) == n:
                    break
        if len(points) < n:
            raise DomainError(f"chart {self.name}: could not find {n} admissible sample points")
        return points


# -- parameters ---------------------------------------------------------------

@dataclass(frozen=True)
class Params:
    """Constant block.

    ``eta = (m + mt)/2`` and ``rho = (m - mt)/2`` always hold; the
    Euclidean slice has ``eta = cos(alpha)``, ``rho = i sin(alpha)``.
    """

    alpha: float = 0.0
    eta: complex = 1.0
    rho: complex = 0.0
    m: complex = 1.0
    mtilde: complex = 1.0
    b: float = 1.0
    extra: Mapping[str, complex] = field(default_factory=dict)
    reality: str = "complex"

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError(f"b must be positive, got {self.b}")
        if abs(self.eta - (self.m + self.mtilde) / 2) > 1e-12 or abs(self.rho - (self.m - self.mtilde) / 2) > 1e-12:
            raise DomainError("inconsistent constants: need eta=(m+mt)/2, rho=(m-mt)/2")

    @classmethod
    def euclidean(cls, alpha: float = -math.pi / 4, b: float = 1.0, **extra) -> "Params":
        if not -math.pi / 2 - 1e-12 <= alpha <= 1e-12:
            raise DomainError(f"alpha must lie in [-pi/2, 0], got {alpha}")
        m = cmath.exp(1j * alpha)
        return cls(alpha=alpha, eta=math.cos(alpha), rho=1j * math.sin(alpha), m=m,
                   mtilde=m.conjugate(), b=b, extra=dict(extra), reality="euclidean")

    @classmethod
    def ultrahyperbolic(cls, alpha: float = 0.3, b: float = 1.0, **extra) -> "Params":
        eta, rho = math.sinh(alpha), math.cosh(alpha)
        return cls(alpha=alpha, eta=eta, rho=rho, m=eta + rho, mtilde=eta - rho, b=b,
                   extra=dict(extra), reality="ultrahyperbolic")

    @classmethod
    def from_m(cls, m: complex, mtilde: complex, b: float = 1.0, **extra) -> "Params":
        if m == 0 or mtilde == 0:
            raise DomainError("m and mt must be non-zero")
        return cls(eta=(m + mtilde) / 2, rho=(m - mtilde) / 2, m=m, mtilde=mtilde, b=b, extra=dict(extra))

    def with_extra(self, **extra) -> "Params":
        merged = dict(self.extra)
        merged.update(extra)
        return Params(self.alpha, self.eta, self.rho, self.m, self.mtilde, self.b, merged, self.reality)

    def bindings(self) -> dict[sp.Symbol, complex]:
        out = {ALPHA: self.alpha, ETA: self.eta, RHO: self.rho, M: self.m, MT: self.mtilde, B: self.b}
        for name, val in self.extra.items():
            out[parameter(name)] = val
        return out


def _bindings(params) -> dict:
    if params is None:
        return {}
    if isinstance(params, Params):
        return params.bindings()
    return {(parameter(k) if isinstance(k, str) else k): val for k, val in params.items()}


# -- differentiation ----------------------------------------------------------

def differentiate(f: sp.Expr, coord: sp.Symbol, order: int = 1, chart: Chart | None = None) -> sp.Expr:
    """Exact partial derivative.

    Conjugate-pair coordinates are independent symbols, so ``d/dw`` of an
    expression in ``wb`` vanishes (Wirtinger convention).
    """
    if chart is not None:
        chart.index(coord)
    elif not isinstance(coord, sp.Symbol) or coord in PARAMETER_SYMBOLS.values():
        raise DomainError(f"cannot differentiate with respect to {coord!r}")
    if not 1 <= order <= 6:
        raise DomainError(f"derivative order must be in 1..6, got {order}")
    return sp.diff(sp.sympify(f), coord, order)


# -- evaluation ---------------------------------------------------------------

_MODULES = [{"conjugate": np.conjugate, "atanh": np.arctanh, "acoth": lambda x: np.arctanh(1 / x)}, "numpy"]


@functools.lru_cache(maxsize=4096)
def _compiled(exprs: tuple, args: tuple):
    return sp.lambdify(args, list(exprs), modules=_MODULES, cse=True)


def _ordered_args(exprs: Iterable[sp.Expr]) -> tuple:
    syms = set()
    for e in exprs:
        syms |= sp.sympify(e).free_symbols
    return tuple(sorted(syms, key=lambda q: q.name))


def evaluate_many(exprs: Sequence[sp.Expr], point: Mapping, params=None) -> np.ndarray:
    """Evaluate several fields at one point; returns a complex array."""
    exprs = tuple(sp.sympify(e) for e in exprs)
    values = dict(_bindings(params))
    values.update(point)
    args = _ordered_args(exprs)
    missing = [a for a in args if a not in values]
    if missing:
        raise DomainError(f"unbound symbols {missing}")
    fn = _compiled(exprs, args)
    argv = [np.complex128(values[a]) for a in args]
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            out = np.array(fn(*argv), dtype=np.complex128)
    except (FloatingPointError, ZeroDivisionError, OverflowError) as exc:
        for e in exprs:
            bad = _locate_failure(e, values)
            if bad is not None:
                raise EvaluationError(f"cannot evaluate {bad} at {point}", bad) from exc
        raise EvaluationError(f"evaluation failed at {point}") from exc
    if not np.all(np.isfinite(out)):
        bad = next((b for b in (_locate_failure(e, values) for e in exprs) if b is not None), None)
        raise EvaluationError(f"non-finite value at {point}", bad)
    return out


def evaluate(f: sp.Expr, point: Mapping, params=None) -> complex:
    return complex(evaluate_many((f,), point, params)[0])


def _node_value(expr, values):
    args = _ordered_args((expr,))
    fn = _compiled((expr,), args)
    with np.errstate(divide="raise", invalid="raise", over="raise"):
        val = complex(np.complex128(fn(*[np.complex128(values[a]) for a in args])[0]))
    if not cmath.isfinite(val):
        raise FloatingPointError
    return val


def _locate_failure(expr, values):
    """Smallest subtree of ``expr`` that fails to evaluate, or None."""
    try:
        _node_value(expr, values)
        return None
    except (FloatingPointError, ZeroDivisionError, OverflowError, TypeError):
        pass
    for arg in expr.args:
        bad = _locate_failure(arg, values)
        if bad is not None:
            return bad
    return expr


# -- jets ---------------------------------------------------------------------

def _multi_indices(n: int, order: int):
    return list(itertools.combinations_with_replacement(range(n), order))


@functools.lru_cache(maxsize=512)
def _jet_exprs(exprs: tuple, coords: tuple, order: int) -> tuple:
    table = []
    for e in exprs:
        cur = {(): e}
        table.append(e)
        for k in range(1, order + 1):
            nxt = {}
            for idx in _multi_indices(len(coords), k):
                parent = cur[idx[:-1]]
                nxt[idx] = sp.diff(parent, coords[idx[-1]])
                table.append(nxt[idx])
            cur.update(nxt)
    return tuple(table)


def jet(exprs: Sequence[sp.Expr], coords: Sequence[sp.Symbol], point: Mapping, params=None,
        order: int = 2) -> list[np.ndarray]:
    """All partial derivatives of ``exprs`` up to ``order`` at a point.

    Returns ``[D0, D1, ..., D_order]`` with ``Dk`` of shape
    ``(len(exprs),) + (n,)*k``, symmetric in the derivative slots.
    """
    exprs = tuple(sp.sympify(e) for e in exprs)
    coords = tuple(coords)
    n = len(coords)
    flat = evaluate_many(_jet_exprs(exprs, coords, order), point, params)
    out = [np.zeros((len(exprs),) + (n,) * k, dtype=np.complex128) for k in range(order + 1)]
    pos = 0
    for a in range(len(exprs)):
        out[0][a] = flat[pos]
        pos += 1
        for k in range(1, order + 1):
            for idx in _multi_indices(n, k):
                val = flat[pos]
                pos += 1
                for perm in set(itertools.permutations(idx)):
                    out[k][(a,) + perm] = val
    return out


# -- finite-difference oracle -------------------------------------------------

@dataclass(frozen=True)
class FDCheck:
    symbolic: complex
    numeric: complex
    gap: float


def central_difference(fn, x0: complex, step: float) -> complex:
    """Fourth-order central difference of a complex function of one variable."""
    h = step
    return (-fn(x0 + 2 * h) + 8 * fn(x0 + h) - 8 * fn(x0 - h) + fn(x0 - 2 * h)) / (12 * h)


def fd_check(f: sp.Expr, coord: sp.Symbol, point: Mapping, params=None, step: float = 1e-3) -> FDCheck:
    """Compare the symbolic derivative with a fourth-order central difference."""
    f = sp.sympify(f)
    symbolic = evaluate(sp.diff(f, coord), point, params)

    def shifted(val):
        pt = dict(point)
        pt[coord] = val
        return evaluate(f, pt, params)

    numeric = central_difference(shifted, complex(point[coord]), step)
    return FDCheck(symbolic, numeric, abs(symbolic - numeric))

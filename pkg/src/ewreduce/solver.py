"""Finite differences for the alterform equation (damped Newton) and a
direct solve for the linear f(xi, v) equation.

Grids are uniform; unknowns are the interior nodes, Dirichlet values sit
on the boundary layer.  Difference operators are assembled once per grid as
sparse matrices on the full node set, so residual and Jacobian share them.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
import sympy as sp

from .scalar import DomainError, Params, evaluate_many, v, w, wb, xi


@dataclass(frozen=True)
class Grid3:
    """Nodes over (x, y, v) with w = x + i y.  Shapes are (nx, ny, nv)."""

    nx: int = 17
    ny: int = 17
    nv: int = 9
    xbox: tuple = (-1.0, 1.0)
    ybox: tuple = (-1.0, 1.0)
    vbox: tuple = (-1.0, 1.0)

    def __post_init__(self):
        for n in (self.nx, self.ny, self.nv):
            if n < 9 or n % 2 == 0:
                raise DomainError(f"grid sizes must be odd and at least 9, got {(self.nx, self.ny, self.nv)}")

    @property
    def shape(self):
        return (self.nx, self.ny, self.nv)

    @property
    def axes(self):
        return (np.linspace(*self.xbox, self.nx), np.linspace(*self.ybox, self.ny), np.linspace(*self.vbox, self.nv))

    @property
    def spacing(self):
        return tuple((b[1] - b[0]) / (n - 1) for b, n in zip((self.xbox, self.ybox, self.vbox), self.shape))

    def mesh(self):
        return np.meshgrid(*self.axes, indexing="ij")

    def interior(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[1:-1, 1:-1, 1:-1] = True
        return mask

    def refine(self) -> "Grid3":
        return Grid3(2 * self.nx - 1, 2 * self.ny - 1, 2 * self.nv - 1, self.xbox, self.ybox, self.vbox)


def sample_field(G, grid: Grid3, params: Params) -> np.ndarray:
    """Values of a symbolic G(w, wb, v) on the grid (real part; real solutions)."""
    X, Y, Vv = grid.mesh()
    W = X + 1j * Y
    vals = evaluate_many([G], {w: W, wb: np.conj(W), v: Vv.astype(complex)}, params)[0]
    vals = np.broadcast_to(vals, grid.shape)
    if np.max(np.abs(np.imag(vals))) > 1e-10 * max(1.0, float(np.max(np.abs(vals)))):
        raise DomainError("field is not real on the grid")
    return np.real(vals).copy()


# -- difference operators ----------------------------------------------------------

def _d1(n, h):
    return sps.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1], shape=(n, n)) / (2 * h)


def _d2(n, h):
    return sps.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], shape=(n, n)) / h ** 2


def _eye(n):
    return sps.identity(n, format="csr")


class Operators3:
    """Second-order central differences on the full node set (rows at the
    boundary are meaningless and never used)."""

    def __init__(self, grid: Grid3):
        nx, ny, nv = grid.shape
        hx, hy, hv = grid.spacing
        Ix, Iy, Iv = _eye(nx), _eye(ny), _eye(nv)

        def k3(a, b, c):
            return sps.kron(sps.kron(a, b), c, format="csr")

        self.x = k3(_d1(nx, hx), Iy, Iv)
        self.y = k3(Ix, _d1(ny, hy), Iv)
        self.v = k3(Ix, Iy, _d1(nv, hv))
        self.vv = k3(Ix, Iy, _d2(nv, hv))
        self.lap = k3(_d2(nx, hx), Iy, Iv) + k3(Ix, _d2(ny, hy), Iv)
        self.vx = k3(_d1(nx, hx), Iy, _d1(nv, hv))
        self.vy = k3(Ix, _d1(ny, hy), _d1(nv, hv))
        self.I = k3(Ix, Iy, Iv)


_OPS: dict = {}


def operators(grid: Grid3) -> Operators3:
    if grid not in _OPS:
        _OPS[grid] = Operators3(grid)
    return _OPS[grid]


def _alter_terms(g: np.ndarray, ops: Operators3, alpha: float):
    """Residual of the alterform equation on all nodes and the partials of
    the pointwise residual with respect to each difference quantity."""
    s = math.sin(alpha)
    ea = np.exp(1j * alpha)
    G, Gv, Gvv, L = g, ops.v @ g, ops.vv @ g, ops.lap @ g
    Gx, Gy, Gvx, Gvy = ops.x @ g, ops.y @ g, ops.vx @ g, ops.vy @ g
    # G_wb = (Gx + i Gy)/2; A = e^{ia} G_wb - i G_vwb; |A|^2 = A conj(A) for real G
    cx, cy, dx, dy = ea / 2, 1j * ea / 2, -0.5j, 0.5
    A = cx * Gx + cy * Gy + dx * Gvx + dy * Gvy
    coef = G + Gvv - 2 * s * Gv
    res = coef * L / 4 - np.abs(A) ** 2 - 4
    partials = {
        "I": L / 4, "vv": L / 4, "v": -2 * s * L / 4, "lap": coef / 4,
        "x": -2 * np.real(np.conj(A) * cx), "y": -2 * np.real(np.conj(A) * cy),
        "vx": -2 * np.real(np.conj(A) * dx), "vy": -2 * np.real(np.conj(A) * dy),
    }
    return res, partials


def discrete_residual(G: np.ndarray, grid: Grid3, params: Params) -> np.ndarray:
    """Interior residual array of shape (nx-2, ny-2, nv-2)."""
    if G.shape != grid.shape:
        raise DomainError(f"field shape {G.shape} does not match grid {grid.shape}")
    res, _ = _alter_terms(G.ravel(), operators(grid), params.alpha)
    return res.reshape(grid.shape)[1:-1, 1:-1, 1:-1]


def _jacobian(g, grid, params, idx):
    ops = operators(grid)
    res, parts = _alter_terms(g, ops, params.alpha)
    J = None
    for name, d in parts.items():
        block = sps.diags(d[idx]) @ getattr(ops, name)[idx][:, idx]
        J = block if J is None else J + block
    return res[idx], J.tocsc()


@dataclass
class NewtonResult:
    G: np.ndarray
    history: list
    converged: bool
    iterations: int
    message: str = ""
    steps: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"converged": self.converged, "iterations": self.iterations,
                           "history": [float(h) for h in self.history],
                           "steps": [float(s) for s in self.steps], "message": self.message}, indent=1)


def solve_newton(initial: np.ndarray, grid: Grid3, params: Params, tol: float = 1e-10, max_iter: int = 20,
                 armijo: float = 1e-4, min_step: float = 1e-6) -> NewtonResult:
    """Damped Newton on the interior nodes; the boundary of ``initial`` is kept."""
    if initial.shape != grid.shape:
        raise DomainError(f"field shape {initial.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(initial)):
        raise DomainError("initial guess is not finite")
    idx = np.flatnonzero(grid.interior())
    g = initial.astype(float).ravel().copy()
    history, steps = [], []
    msg = ""
    for it in range(max_iter + 1):
        r, J = _jacobian(g, grid, params, idx)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(J.data))):
            msg = "residual or Jacobian not finite"
            history.append(float("inf"))
            break
        norm_sup = float(np.max(np.abs(r)))
        history.append(norm_sup)
        if norm_sup < tol:
            return NewtonResult(g.reshape(grid.shape), history, True, it, "converged", steps)
        if it == max_iter:
            msg = "maximum iterations reached"
            break
        delta = None
        absJ = abs(J)
        # SuperLU writes BLAS errors to stderr on structurally singular input
        if absJ.sum(axis=1).min() > 0 and absJ.sum(axis=0).min() > 0:
            try:
                lu = spla.splu(J)
                if np.all(lu.U.diagonal() != 0):
                    delta = lu.solve(-r)
            except RuntimeError:
                pass
        if delta is None or not np.all(np.isfinite(delta)):
            # singular Jacobian: fall back to the steepest-descent direction
            delta = -(J.T @ r)
            msg = "singular Jacobian, gradient step used"
        f0 = float(r @ r)
        step = 1.0
        while step >= min_step:
            trial = g.copy()
            trial[idx] += step * delta
            rt, _ = _alter_terms(trial, operators(grid), params.alpha)
            if np.all(np.isfinite(rt[idx])) and float(rt[idx] @ rt[idx]) <= (1 - 2 * armijo * step) * f0:
                break
            step /= 2
        else:
            msg = "line search failed"
            break
        steps.append(step)
        g = trial
    return NewtonResult(g.reshape(grid.shape), history, False, len(history) - 1, msg, steps)


def smooth_perturbation(grid: Grid3, amplitude: float = 0.05) -> np.ndarray:
    """Relative bump vanishing on the boundary."""
    X, Y, Vv = grid.mesh()
    bumps = []
    for A, (lo, hi) in zip((X, Y, Vv), (grid.xbox, grid.ybox, grid.vbox)):
        bumps.append(np.sin(np.pi * (A - lo) / (hi - lo)))
    return amplitude * bumps[0] * bumps[1] * bumps[2]


def convergence_order(coarse: float, fine: float) -> float:
    """Observed order for errors on grids with spacing h and h/2."""
    return math.log2(coarse / fine)


def residual_order(G, grid: Grid3, params: Params) -> tuple[float, float, float]:
    """Sup interior residual of an exact solution on grid and its refinement,
    and the observed order."""
    e1 = float(np.max(np.abs(discrete_residual(sample_field(G, grid, params), grid, params))))
    fine = grid.refine()
    e2 = float(np.max(np.abs(discrete_residual(sample_field(G, fine, params), fine, params))))
    return e1, e2, convergence_order(e1, e2)


# -- the linear f(xi, v) equation -----------------------------------------------

@dataclass(frozen=True)
class Grid2:
    nxi: int = 17
    nv: int = 17
    xibox: tuple = (-0.5, 0.5)
    vbox: tuple = (-1.0, 1.0)

    def __post_init__(self):
        for n in (self.nxi, self.nv):
            if n < 9 or n % 2 == 0:
                raise DomainError(f"grid sizes must be odd and at least 9, got {(self.nxi, self.nv)}")

    @property
    def shape(self):
        return (self.nxi, self.nv)

    @property
    def spacing(self):
        return ((self.xibox[1] - self.xibox[0]) / (self.nxi - 1), (self.vbox[1] - self.vbox[0]) / (self.nv - 1))

    def mesh(self):
        return np.meshgrid(np.linspace(*self.xibox, self.nxi), np.linspace(*self.vbox, self.nv), indexing="ij")

    def refine(self) -> "Grid2":
        return Grid2(2 * self.nxi - 1, 2 * self.nv - 1, self.xibox, self.vbox)


def flinear_operator(grid: Grid2, params: Params):
    """Sparse matrix of 4 e^{-2 xi}(f_xixi - f_xi) + f_vv + 2 sin(a) f_xiv + f_xixi."""
    n1, n2 = grid.shape
    h1, h2 = grid.spacing
    I1, I2 = _eye(n1), _eye(n2)
    Dx, Dxx = sps.kron(_d1(n1, h1), I2), sps.kron(_d2(n1, h1), I2)
    Dvv = sps.kron(I1, _d2(n2, h2))
    Dxv = sps.kron(_d1(n1, h1), _d1(n2, h2))
    XI, _ = grid.mesh()
    e = sps.diags(4 * np.exp(-2 * XI.ravel()))
    return (e @ (Dxx - Dx) + Dvv + 2 * math.sin(params.alpha) * Dxv + Dxx).tocsr()


def solve_linear_f(grid: Grid2, params: Params, bc: np.ndarray, source: np.ndarray | None = None) -> np.ndarray:
    """Dirichlet problem L f = source with boundary values taken from ``bc``."""
    if bc.shape != grid.shape:
        raise DomainError("boundary array does not match the grid")
    L = flinear_operator(grid, params)
    mask = np.zeros(grid.shape, dtype=bool)
    mask[1:-1, 1:-1] = True
    inner, outer = np.flatnonzero(mask), np.flatnonzero(~mask)
    rhs = np.zeros(inner.size) if source is None else source.ravel()[inner].astype(float)
    rhs = rhs - L[inner][:, outer] @ bc.ravel()[outer]
    try:
        sol = spla.splu(L[inner][:, inner].tocsc()).solve(rhs)
    except RuntimeError as exc:
        raise DomainError(f"singular system: {exc}") from None
    f = bc.astype(float).copy().ravel()
    f[inner] = sol
    return f.reshape(grid.shape)


def sample_2d(f, grid: Grid2, params: Params) -> np.ndarray:
    XI, Vv = grid.mesh()
    vals = evaluate_many([f], {xi: XI.astype(complex), v: Vv.astype(complex)}, params)[0]
    return np.real(np.broadcast_to(vals, grid.shape)).copy()


def manufactured_error(fstar, grid: Grid2, params: Params) -> float:
    """Sup error of the discrete solution against f* with source L f*."""
    from .twodim import residual_expression
    exact = sample_2d(fstar, grid, params)
    src = sample_2d(residual_expression("flinear", sp.sympify(fstar)), grid, params)
    sol = solve_linear_f(grid, params, exact, src)
    return float(np.max(np.abs(sol - exact)))


# -- dumps -------------------------------------------------------------------------

def field_csv(G: np.ndarray, grid: Grid3) -> str:
    X, Y, Vv = grid.mesh()
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x", "y", "v", "G"])
    for a, b, c, d in zip(X.ravel(), Y.ravel(), Vv.ravel(), G.ravel()):
        wr.writerow([repr(float(a)), repr(float(b)), repr(float(c)), repr(float(d))])
    return buf.getvalue()

"""Uniform periodic grid on the unit torus with discrete differential operators.

Fields are cell-centered samples at h_i = i/n; all integrals are midpoint
sums, the quadrature consistent with the symmetric 3-point stencil.  Two
second-derivative operators are supported: ``fd3`` (3-point centered, the
default; keeps near-singular states sign-controlled locally) and
``spectral`` (exact on resolved modes, for smooth-regime accuracy studies).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import NonZeroMean

D2_KINDS = ("fd3", "spectral")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: n cells on [0,1), spacing dh = 1/n."""

    n: int
    d2_kind: str = "fd3"

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid needs n >= 8, got n={self.n}")
        if self.d2_kind not in D2_KINDS:
            raise ValueError(f"unknown d2_kind {self.d2_kind!r}, expected one of {D2_KINDS}")

    @property
    def dh(self) -> float:
        return 1.0 / self.n

    def centers(self) -> np.ndarray:
        return np.arange(self.n) / self.n


@dataclass(frozen=True)
class Field:
    """Periodic grid function; value-semantic (backing array is read-only)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"field length {vals.shape} does not match grid n={self.grid.n}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.grid.n

    def mean(self) -> float:
        # midpoint sum over [0,1): dh * sum == plain mean
        return float(np.mean(self.values))

    def is_mean_zero(self, scale_tol: float = 1e-12) -> bool:
        return abs(self.mean()) <= scale_tol * (1.0 + float(np.max(np.abs(self.values), initial=0.0)))


class Norms(NamedTuple):
    l2: float
    tilde_v: float


def zero_field(grid: Grid) -> Field:
    return Field(grid, np.zeros(grid.n))


def cosine_field(grid: Grid, k: int = 1, eps: float = 1.0, phase: float = 0.0) -> Field:
    """eps * cos(2*pi*k*h + phase), sampled at cell centers (mean-zero for k >= 1)."""
    h = grid.centers()
    return Field(grid, eps * np.cos(2.0 * math.pi * k * h + phase))


def project_mean(values: np.ndarray) -> np.ndarray:
    return values - values.mean()


@lru_cache(maxsize=None)
def _d2_symbol(n: int, d2_kind: str) -> np.ndarray:
    """Eigenvalues of the second-derivative operator on rfft modes (all <= 0)."""
    k = np.arange(n // 2 + 1)
    if d2_kind == "fd3":
        dh = 1.0 / n
        sym = -(2.0 / dh**2) * (1.0 - np.cos(2.0 * math.pi * k * dh))
    else:
        sym = -((2.0 * math.pi * k) ** 2)
    sym.setflags(write=False)
    return sym


def d2_symbol(grid: Grid, k: int) -> float:
    """Symbol of the grid's second-derivative operator at integer mode k."""
    if not 0 <= k <= grid.n // 2:
        raise ValueError(f"mode k={k} outside resolved range [0, {grid.n // 2}]")
    return float(_d2_symbol(grid.n, grid.d2_kind)[k])


@lru_cache(maxsize=None)
def d2_matrix(n: int, d2_kind: str) -> np.ndarray:
    """Dense second-derivative operator (symmetric circulant), for Jacobians."""
    if d2_kind == "fd3":
        dh2 = (1.0 / n) ** 2
        mat = (-2.0 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)) / dh2
        mat[0, -1] += 1.0 / dh2
        mat[-1, 0] += 1.0 / dh2
    else:
        # columns are the operator applied to unit vectors
        eye = np.eye(n)
        mat = np.column_stack([d2_values(Grid(n, "spectral"), eye[:, j]) for j in range(n)])
        mat = 0.5 * (mat + mat.T)  # symmetrize away fp asymmetry
    mat.setflags(write=False)
    return mat


def d2_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Discrete second derivative of a raw value array; output projected to zero mean."""
    if grid.d2_kind == "fd3":
        out = (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) * (grid.n**2)
    else:
        spec = np.fft.rfft(values)
        spec *= _d2_symbol(grid.n, grid.d2_kind)
        out = np.fft.irfft(spec, n=grid.n)
    return project_mean(out)


def d2(f: Field) -> Field:
    """Second derivative on the torus; symmetric w.r.t. the discrete L2 inner product."""
    return Field(f.grid, d2_values(f.grid, f.values))


def d4_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Discrete biharmonic d2(d2(.)) fused into one pass.

    Agrees with the composition to floating-point noise; used in explicit
    inner loops where two separate passes double the cost.
    """
    if grid.d2_kind == "fd3":
        n4 = float(grid.n) ** 4
        out = (np.roll(values, -2) - 4.0 * np.roll(values, -1) + 6.0 * values
               - 4.0 * np.roll(values, 1) + np.roll(values, 2)) * n4
    else:
        spec = np.fft.rfft(values)
        spec *= _d2_symbol(grid.n, grid.d2_kind) ** 2
        out = np.fft.irfft(spec, n=grid.n)
    return project_mean(out)


def d1_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    """First derivative (centered difference / spectral), used only for snapshots."""
    if grid.d2_kind == "fd3":
        return (np.roll(values, -1) - np.roll(values, 1)) * (0.5 * grid.n)
    spec = np.fft.rfft(values)
    k = np.arange(grid.n // 2 + 1)
    spec *= 1j * 2.0 * math.pi * k
    if grid.n % 2 == 0:
        spec[-1] = 0.0  # Nyquist mode has no well-defined odd derivative
    return np.fft.irfft(spec, n=grid.n)


def inner(a: Field | np.ndarray, b: Field | np.ndarray, grid: Grid | None = None) -> float:
    """Discrete L2 inner product dh * sum(a_i b_i)."""
    av = a.values if isinstance(a, Field) else a
    bv = b.values if isinstance(b, Field) else b
    n = grid.n if grid is not None else (a.grid.n if isinstance(a, Field) else len(av))
    return float(np.dot(av, bv)) / n


def l2_norm(values: np.ndarray) -> float:
    return math.sqrt(float(np.dot(values, values)) / len(values))


def norms(f: Field) -> Norms:
    """l2 = sqrt(dh*sum f^2); tilde_v = dh*sum |d2 f| (total-mass proxy for the curvature measure)."""
    return Norms(
        l2=l2_norm(f.values),
        tilde_v=float(np.mean(np.abs(d2_values(f.grid, f.values)))),
    )


def poisson_solve(rhs: Field) -> Field:
    """Unique mean-zero g with d2(g) = rhs.

    The periodic operator is circulant, so the solve divides by its exact
    eigenvalues mode-by-mode (fd3 symbol or spectral symbol); the mean is
    pinned by projection.  Raises NonZeroMean when the compatibility
    condition fails.
    """
    vals = rhs.values
    scale = 1.0 + float(np.max(np.abs(vals), initial=0.0))
    if abs(float(np.mean(vals))) > 1e-10 * scale:
        raise NonZeroMean(f"poisson rhs mean {np.mean(vals):.3e} exceeds compatibility tolerance")
    spec = np.fft.rfft(vals)
    sym = _d2_symbol(rhs.grid.n, rhs.grid.d2_kind).copy()
    sym[0] = 1.0  # zero mode pinned below
    spec /= sym
    spec[0] = 0.0
    out = np.fft.irfft(spec, n=rhs.grid.n)
    return Field(rhs.grid, project_mean(out))


# --- snapshot CSV (header h,w[,w_h,w_hh[,u]], 17 significant digits) ---

def format_float(x: float) -> str:
    return f"{x:.17g}"


def write_snapshot(path, f: Field, u: np.ndarray | None = None) -> None:
    h = f.grid.centers()
    w = f.values
    wh = d1_values(f.grid, w)
    whh = d2_values(f.grid, w)
    cols = [h, w, wh, whh]
    header = "h,w,w_h,w_hh"
    if u is not None:
        cols.append(np.asarray(u))
        header += ",u"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in zip(*cols):
            fh.write(",".join(format_float(x) for x in row) + "\n")


def read_snapshot(path, grid: Grid) -> Field:
    data = np.genfromtxt(path, delimiter=",", names=True)
    w = np.atleast_1d(data["w"])
    if len(w) != grid.n:
        raise ValueError(f"snapshot has {len(w)} rows, grid expects {grid.n}")
    return Field(grid, w)

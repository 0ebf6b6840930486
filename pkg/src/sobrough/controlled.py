"""Controlled paths of Sobolev type at level 2: remainders, the two
remainder norms (partition-variation and dyadic), the controlled-path
norm, composition with smooth polynomial maps, and rough integration
by compensated Riemann sums on dyadic grids.

A controlled pair (Y, Y') has Y on the grid with values of any shape
``vshape`` and Y' of shape ``vshape + (d,)``; the remainder is
R_{s,t} = Y_t - Y_s - Y'_s x_{s,t} with x the level-1 driver increment.
Integration requires values in L(R^d, R^w), i.e. vshape = (w, d).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _kernels
from .fields import PolyVectorField
from .paths import (IntervalFunction, PathError, SampledRoughPath, VectorPath,
                    sobolev_norm_dyadic)

#: derivative self-test threshold for smooth maps (relative, vs finite differences)
SELF_TEST_TOL = 1e-6

SmoothMap = PolyVectorField


class ControlledPath:
    """Pair (Y, Y') on the grid of a level-2 rough path X."""

    def __init__(self, X: SampledRoughPath, Y: np.ndarray, Yprime: np.ndarray):
        Y = np.asarray(Y, dtype=np.float64)
        Yprime = np.asarray(Yprime, dtype=np.float64)
        n = X.n_nodes
        if Y.ndim < 2 or Y.shape[0] != n:
            raise PathError(f"Y must be (n_nodes, ...) with n_nodes={n}")
        if Yprime.shape != Y.shape + (X.alg.dim,):
            raise PathError(f"Yprime shape {Yprime.shape}, expected {Y.shape + (X.alg.dim,)}")
        if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(Yprime))):
            raise PathError("non-finite controlled-path values")
        self.X = X
        self.Y = Y
        self.Yprime = Yprime
        self._remainder = None

    @property
    def vshape(self) -> tuple:
        return self.Y.shape[1:]

    def sub(self, other: "ControlledPath") -> "ControlledPath":
        if other.X is not self.X:
            raise PathError("difference pairs must share the driver")
        return ControlledPath(self.X, self.Y - other.Y, self.Yprime - other.Yprime)


def coordinate_controlled(X: SampledRoughPath) -> ControlledPath:
    """The canonical pair (pi_1 X, Id): exact Gubinelli derivative, zero remainder."""
    d = X.alg.dim
    x1 = X.nodes[:, X.alg.slice(1)].copy()
    Yp = np.tile(np.eye(d), (X.n_nodes, 1, 1))
    return ControlledPath(X, x1, Yp)


def remainder(cp: ControlledPath) -> IntervalFunction:
    """R^Y on all grid intervals: R_{s,t} = Y_{s,t} - Y'_s x_{s,t}."""
    if cp._remainder is None:
        x1 = cp.X.nodes[:, cp.X.alg.slice(1)]
        xinc = x1[None, :, :] - x1[:, None, :]          # (u, v, d)
        lin = np.einsum("u...j,uvj->uv...", cp.Yprime, xinc)
        R = cp.Y[None, :, ...] - cp.Y[:, None, ...] - lin
        n = cp.X.n_nodes
        tri = np.triu(np.ones((n, n), dtype=bool), k=1)
        R = np.where(tri.reshape((n, n) + (1,) * len(cp.vshape)), R, 0.0)
        cp._remainder = IntervalFunction(n, pair=R)
    return cp._remainder


def remainder_norm_tildeV(R: IntervalFunction, alpha: float, p: float) -> float:
    """Mixed variation norm of a two-parameter function:

        ( sup_P sum_{[u,v] in P} ||R||_{1/(2 alpha)-var;[u,v]}^{p/2} / |v-u|^{alpha p - 1} )^{2/p}

    with the inner variation taken over grid partitions of [u, v]."""
    if not alpha > 1.0 / p:
        raise PathError(f"inadmissible parameters alpha={alpha}, p={p}")
    mags = R.pair_norms()
    n = R.n_nodes
    if n < 2:
        return 0.0
    w = mags ** (1.0 / (2.0 * alpha))
    inner = _kernels.interval_dp_table(np.ascontiguousarray(w))
    # inner[u,v]^(2 alpha) is the 1/(2 alpha)-variation of R over [u, v]
    h = 1.0 / (n - 1)
    gaps = (np.arange(n)[None, :] - np.arange(n)[:, None]).astype(float)
    np.fill_diagonal(gaps, 1.0)
    outer_w = inner ** (alpha * p) / np.abs(gaps * h) ** (alpha * p - 1.0)
    best = _kernels.partition_dp_max(np.ascontiguousarray(outer_w))
    return best ** (2.0 / p)


def remainder_norm_hatW(R: IntervalFunction, alpha: float, p: float) -> float:
    """Dyadic remainder norm

        ( sum_{j<=J} 2^{j(alpha p - 1)} sum_i |R on level-j interval i|^{p/2} )^{2/p}
    """
    if not alpha > 1.0 / p:
        raise PathError(f"inadmissible parameters alpha={alpha}, p={p}")
    terms = []
    for j in range(R.depth + 1):
        vals = R.dyadic_level(j)
        mags = np.linalg.norm(vals.reshape(vals.shape[0], -1), axis=1)
        terms.append(2.0 ** (j * (alpha * p - 1.0)) * float(np.sum(mags ** (p / 2.0))))
    return math.fsum(terms) ** (2.0 / p)


def controlled_norm(cp: ControlledPath, alpha: float | None = None,
                    p: float | None = None) -> float:
    """|Y_0| + |Y'_0| + ||Y'||_{W^alpha_p (dyadic)} + ||R||_tildeV + ||R||_hatW."""
    alpha = cp.X.alpha if alpha is None else alpha
    p = cp.X.p if p is None else p
    R = remainder(cp)
    yp = sobolev_norm_dyadic(VectorPath(cp.Yprime.reshape(cp.X.n_nodes, -1)), alpha, p).value
    return (float(np.linalg.norm(cp.Y[0])) + float(np.linalg.norm(cp.Yprime[0]))
            + yp + remainder_norm_tildeV(R, alpha, p) + remainder_norm_hatW(R, alpha, p))


def compose_smooth(F: SmoothMap, cp: ControlledPath) -> ControlledPath:
    """(F(Y), DF(Y) Y') for a polynomial F: R^e -> L(R^d, R^e)."""
    if cp.vshape != (F.e,):
        raise PathError(f"controlled path has vshape {cp.vshape}, field expects ({F.e},)")
    if F.self_test() > SELF_TEST_TOL:
        raise PathError("smooth map failed its derivative self-test")
    FY = F.eval_batch(cp.Y)                                     # (n, e, d)
    DF = F.fmap.jacobian().eval_batch(cp.Y)                     # (n, e, d, e)
    FpY = np.einsum("naib,nbj->naij", DF, cp.Yprime)            # (n, e, d, d)
    return ControlledPath(cp.X, FY, FpY)


class RoughIntegral(NamedTuple):
    values: np.ndarray          # integral path I on the grid, I[0] = 0
    gubinelli: np.ndarray       # the integrand Y: Gubinelli derivative of I
    remainder: IntervalFunction  # R^I_{s,t} = I_{s,t} - Y_s pi_1(X_{s,t})
    refinement: np.ndarray      # full-interval compensated sums at depths 0..J
    refinement_order: float     # fitted decay order of coarse-to-fine increments


def _compensated_terms(cp: ControlledPath, j: int) -> np.ndarray:
    """Per-interval terms Y_u pi_1(X_{u,v}) + Y'_u pi_2(X_{u,v}) at dyadic level j."""
    X = cp.X
    d = X.alg.dim
    incs = X.dyadic_increments(j)
    pi1 = incs[:, X.alg.slice(1)]
    pi2 = incs[:, X.alg.slice(2)].reshape(-1, d, d)
    stride = 1 << (X.depth - j)
    Yl = cp.Y[:-1:stride]
    Ypl = cp.Yprime[:-1:stride]
    return (np.einsum("n...j,nj->n...", Yl, pi1)
            + np.einsum("n...kj,njk->n...", Ypl, pi2))


def rough_integral(cp: ControlledPath, X: SampledRoughPath | None = None,
                   diagnostics: bool = True) -> RoughIntegral:
    """Rough integral of a controlled integrand with values in L(R^d, R^w),
    as the deepest-grid compensated Riemann sum

        I_t = sum over finest intervals [u,v] <= t of  Y_u pi_1(X_{u,v}) + Y'_u pi_2(X_{u,v}).

    The refinement diagnostic records the full-interval sums at every dyadic
    depth; on exact lifts their increments decay at the sewing rate."""
    X = cp.X if X is None else X
    if X is not cp.X:
        raise PathError("integrand is controlled by a different driver")
    if X.alg.level != 2:
        raise PathError("rough integration needs a level-2 driver")
    if X.depth == 0:
        raise PathError("depth-0 grid admits no refinement")
    if len(cp.vshape) < 2 or cp.vshape[-1] != X.alg.dim:
        raise PathError(f"integrand values must lie in L(R^{X.alg.dim}, R^w), got vshape {cp.vshape}")
    terms = _compensated_terms(cp, X.depth)
    wshape = cp.vshape[:-1]
    values = np.zeros((X.n_nodes,) + wshape)
    np.cumsum(terms, axis=0, out=values[1:])

    x1 = X.nodes[:, X.alg.slice(1)]
    xinc = x1[None, :, :] - x1[:, None, :]
    lin = np.einsum("u...j,uvj->uv...", cp.Y, xinc)
    RI = values[None, :, ...] - values[:, None, ...] - lin
    n = X.n_nodes
    tri = np.triu(np.ones((n, n), dtype=bool), k=1)
    RI = np.where(tri.reshape((n, n) + (1,) * len(wshape)), RI, 0.0)

    refinement = np.zeros((X.depth + 1,) + wshape)
    order = math.nan
    if diagnostics:
        for j in range(X.depth + 1):
            refinement[j] = np.sum(_compensated_terms(cp, j), axis=0)
        deltas = np.linalg.norm(
            (refinement[1:] - refinement[:-1]).reshape(X.depth, -1), axis=1)
        # median of successive log-ratios: robust to the occasional
        # accidentally-small delta (e.g. loops with zero net increment)
        rates = [math.log2(a / b) for a, b in zip(deltas[:-1], deltas[1:])
                 if a > 0 and b > 0]
        if rates:
            order = float(np.median(rates))
    return RoughIntegral(values, cp.Y, IntervalFunction(n, pair=RI), refinement, order)

"""Sampled group-valued paths on dyadic grids and the norms/distances on them.

Paths live on the uniform grid t_i = i * 2^-J of [0, 1].  Partition suprema
are taken over grid points only ("grid variation"), which is exact for
grid-sampled data.  The double-integral Sobolev norm is approximated by the
off-diagonal grid double sum with cell weight (2^-J)^2; dyadic sums truncate
at the path's depth J.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _kernels
from . import algebra
from .algebra import GroupElement, TensorAlgebra

#: relative slack for superadditivity checks (absorbs quadrature noise)
CTRL_TOL = 1e-9

_BLOCK = 128
_CACHE_MAX_NODES = 2049  # cache full pairwise matrices up to this grid size


class PathError(ValueError):
    """Rejected path input: grid mismatch, bad window, bad parameters."""


def _floor_bracket(r: float) -> int:
    """[r] = sup{n : n <= r}."""
    return int(math.floor(r + 1e-12))


class SampledRoughPath:
    """Group-valued path sampled on the dyadic grid of depth J.

    nodes[0] is the identity; node i is the running signature over [0, t_i],
    so the group increment between grid times is nodes[u]^-1 (x) nodes[v].
    """

    def __init__(self, alg: TensorAlgebra, depth: int, nodes: np.ndarray,
                 alpha: float, p: float, trusted: bool = False):
        n = (1 << depth) + 1
        nodes = np.ascontiguousarray(nodes, dtype=np.float64)
        if nodes.shape != (n, alg.length):
            raise PathError(f"expected {n} packed nodes of length {alg.length}, got {nodes.shape}")
        if not np.all(np.isfinite(nodes)):
            raise PathError("non-finite node coefficients")
        if not (0.0 < alpha < 1.0):
            raise PathError(f"alpha={alpha} outside (0, 1)")
        if not (1.0 < p):
            raise PathError(f"p={p} must exceed 1")
        if not alpha > 1.0 / p:
            raise PathError(f"inadmissible parameters: alpha={alpha} <= 1/p={1.0 / p}")
        ident = np.zeros(alg.length)
        ident[0] = 1.0
        if not np.array_equal(nodes[0], ident):
            raise PathError("nodes[0] must be the identity")
        if np.any(nodes[:, 0] != 1.0):
            raise PathError("every node must have scalar level 1")
        self.alg = alg
        self.depth = depth
        self.alpha = float(alpha)
        self.p = float(p)
        self.nodes = nodes
        self.nodes.setflags(write=False)
        self._inv_cache = None
        self._dist_cache = None
        self._dyadic_cache = {}
        if not trusted:
            self._validate_geometricity()

    def _validate_geometricity(self):
        if self.alg.level > 3:
            raise PathError("cannot verify geometricity for N > 3; construct via signatures")
        worst = 0.0
        d = self.alg.dim
        if self.alg.level >= 2:
            g1 = self.nodes[:, self.alg.slice(1)]
            G2 = self.nodes[:, self.alg.slice(2)].reshape(-1, d, d)
            sym = 0.5 * (G2 + np.transpose(G2, (0, 2, 1)))
            viol = sym - 0.5 * np.einsum("ni,nj->nij", g1, g1)
            worst = max(worst, float(np.max(np.abs(viol))))
        if self.alg.level >= 3:
            g1 = self.nodes[:, self.alg.slice(1)]
            G2 = self.nodes[:, self.alg.slice(2)].reshape(-1, d, d)
            G3 = self.nodes[:, self.alg.slice(3)].reshape(-1, d, d, d)
            lhs = G3 + np.transpose(G3, (0, 2, 1, 3)) + np.transpose(G3, (0, 3, 1, 2))
            rhs = np.einsum("ni,njk->nijk", g1, G2)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        if worst > algebra.GEO_TOL:
            raise PathError(f"nodes fail geometricity check: violation {worst:.3e}")

    # ------------------------------------------------------------------ grid

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def h(self) -> float:
        return 2.0 ** (-self.depth)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.h

    def index_of(self, t: float) -> int:
        x = t * (self.n_nodes - 1)
        i = int(round(x))
        if abs(x - i) > 1e-6 or not (0 <= i < self.n_nodes):
            raise PathError(f"time {t} is not a grid point at depth {self.depth}")
        return i

    # ----------------------------------------------------------- group views

    def node(self, i: int) -> GroupElement:
        return GroupElement(self.alg, self.nodes[i].copy())

    @property
    def inv_nodes(self) -> np.ndarray:
        if self._inv_cache is None:
            inv = _kernels.inverse_batch(self.nodes, self.alg.dim, self.alg.level)
            inv.setflags(write=False)
            self._inv_cache = inv
        return self._inv_cache

    def increment_packed(self, rows, cols) -> np.ndarray:
        """Packed group increments nodes[rows]^-1 (x) nodes[cols], row-wise."""
        return _kernels.rowwise_mul(self.inv_nodes[rows], self.nodes[cols],
                                    self.alg.dim, self.alg.level)

    def increment(self, i: int, j: int) -> GroupElement:
        return GroupElement(self.alg, self.increment_packed([i], [j])[0])

    def dist_block(self, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        return _kernels.hom_dist_block(self.inv_nodes[r0:r1], self.nodes[c0:c1],
                                       self.alg.dim, self.alg.level)

    def dist_matrix(self, i0: int, i1: int) -> np.ndarray:
        """Homogeneous-norm increment distances over the window [i0, i1)."""
        if self.n_nodes <= _CACHE_MAX_NODES:
            if self._dist_cache is None:
                full = _kernels.hom_dist_matrix(self.nodes, self.inv_nodes,
                                                self.alg.dim, self.alg.level,
                                                0, self.n_nodes)
                full.setflags(write=False)
                self._dist_cache = full
            return self._dist_cache[i0:i1, i0:i1]
        return _kernels.hom_dist_matrix(self.nodes, self.inv_nodes,
                                        self.alg.dim, self.alg.level, i0, i1)

    def pair_sum(self, p: float, expo: float, i0: int, i1: int) -> float:
        return _kernels.sobolev_pair_sum(self.nodes, self.inv_nodes,
                                         self.alg.dim, self.alg.level,
                                         p, expo, self.h, i0, i1)

    def dyadic_increments(self, j: int) -> np.ndarray:
        """Packed increments over the 2^j intervals of dyadic level j."""
        if j not in self._dyadic_cache:
            stride = 1 << (self.depth - j)
            idx = np.arange(0, self.n_nodes, stride)
            incs = self.increment_packed(idx[:-1], idx[1:])
            incs.setflags(write=False)
            self._dyadic_cache[j] = incs
        return self._dyadic_cache[j]

    def dyadic_dists(self, j: int) -> np.ndarray:
        incs = self.dyadic_increments(j)
        out = np.zeros(incs.shape[0])
        for k in range(1, self.alg.level + 1):
            block = incs[:, self.alg.slice(k)]
            out += np.einsum("nc,nc->n", block, block) ** (0.5 / k)
        return out

    def subsample(self, depth: int) -> "SampledRoughPath":
        """Restriction to the coarser dyadic grid (running signatures restrict)."""
        if depth > self.depth:
            raise PathError(f"cannot refine depth {self.depth} to {depth}")
        stride = 1 << (self.depth - depth)
        return SampledRoughPath(self.alg, depth, self.nodes[::stride].copy(),
                                self.alpha, self.p, trusted=True)

    # ---------------------------------------------------------- constructors

    @classmethod
    def from_samples(cls, points, level: int, alpha: float, p: float,
                     depth: int | None = None) -> "SampledRoughPath":
        """Step-N lift of R^d samples on a dyadic grid (piecewise-linear signature)."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.ndim != 2:
            raise PathError("samples must be a (n_nodes, d) array")
        n = pts.shape[0]
        J = int(round(math.log2(n - 1))) if depth is None else depth
        if (1 << J) + 1 != n:
            raise PathError(f"{n} samples do not fill a dyadic grid (need 2^J + 1)")
        alg = TensorAlgebra(pts.shape[1], level)
        packed = algebra.signature_path_packed(pts, alg)
        return cls(alg, J, packed, alpha, p, trusted=True)

    @classmethod
    def from_group_elements(cls, elements, depth: int, alpha: float, p: float,
                            trusted: bool = False) -> "SampledRoughPath":
        alg = elements[0].alg
        packed = np.stack([g.data for g in elements])
        return cls(alg, depth, packed, alpha, p, trusted=trusted)


class VectorPath:
    """Adapter giving an R^m-valued path on a uniform grid over [0, 1] the
    same norm interface (Euclidean increment distances).  Dyadic sums need
    2^J + 1 samples; the variation and Hoelder norms work on any grid."""

    def __init__(self, values: np.ndarray):
        vals = np.asarray(values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals[:, None]
        self.values = vals.reshape(vals.shape[0], -1)
        n = self.values.shape[0]
        if n < 2:
            raise PathError("a path needs at least two samples")
        J = int(round(math.log2(n - 1)))
        self.depth = J if (1 << J) + 1 == n else None

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 1.0 / (self.values.shape[0] - 1)

    def index_of(self, t: float) -> int:
        x = t * (self.n_nodes - 1)
        i = int(round(x))
        if abs(x - i) > 1e-6 or not (0 <= i < self.n_nodes):
            raise PathError(f"time {t} is not a grid point at depth {self.depth}")
        return i

    def dist_block(self, r0, r1, c0, c1) -> np.ndarray:
        diff = self.values[r0:r1, None, :] - self.values[None, c0:c1, :]
        return np.sqrt(np.einsum("mnc,mnc->mn", diff, diff))

    def dist_matrix(self, i0: int, i1: int) -> np.ndarray:
        return self.dist_block(i0, i1, i0, i1)

    def pair_sum(self, p: float, expo: float, i0: int, i1: int) -> float:
        parts = []
        for r0 in range(i0, i1, _BLOCK):
            r1 = min(r0 + _BLOCK, i1)
            dist = self.dist_block(r0, r1, r0, i1)
            gap = (np.arange(r0, i1)[None, :] - np.arange(r0, r1)[:, None]).astype(float)
            mask = gap > 0
            gap[~mask] = 1.0
            term = np.where(mask, dist**p * (gap * self.h) ** (-expo), 0.0)
            parts.append(float(np.sum(term)))
        return math.fsum(parts)

    def dyadic_dists(self, j: int) -> np.ndarray:
        if self.depth is None:
            raise PathError(f"{self.n_nodes} samples do not fill a dyadic grid")
        stride = 1 << (self.depth - j)
        vals = self.values[::stride]
        return np.linalg.norm(np.diff(vals, axis=0), axis=1)


def _as_grid(path):
    if isinstance(path, (SampledRoughPath, VectorPath)):
        return path
    return VectorPath(np.asarray(path, dtype=np.float64))


def _window_indices(grid, window) -> tuple[int, int]:
    if window is None:
        return 0, grid.n_nodes
    s, t = window
    a, b = grid.index_of(s), grid.index_of(t)
    if not a < b:
        raise PathError(f"empty window {window}")
    return a, b + 1


# ---------------------------------------------------------------------- norms

def qvar_norm(path, q: float, window=None) -> float:
    """q-variation over grid partitions of the window, by dynamic programming."""
    if q < 1:
        raise PathError(f"q={q} must be >= 1")
    grid = _as_grid(path)
    a, b = _window_indices(grid, window)
    if b - a < 2:
        return 0.0
    dist = grid.dist_matrix(a, b)
    best = _kernels.partition_dp_max(np.ascontiguousarray(dist**q))
    return best ** (1.0 / q)


def holder_norm(path, alpha: float, window=None) -> float:
    """max over grid pairs u < v of d(X_u, X_v) / (v - u)^alpha."""
    if not (0.0 < alpha < 1.0):
        raise PathError(f"alpha={alpha} outside (0, 1)")
    grid = _as_grid(path)
    a, b = _window_indices(grid, window)
    worst = 0.0
    for r0 in range(a, b, _BLOCK):
        r1 = min(r0 + _BLOCK, b)
        dist = grid.dist_block(r0, r1, a, b)
        gap = (np.arange(a, b)[None, :] - np.arange(r0, r1)[:, None]).astype(float)
        mask = gap > 0
        gap[~mask] = 1.0
        ratios = np.where(mask, dist / (gap * grid.h) ** alpha, 0.0)
        worst = max(worst, float(np.max(ratios)))
    return worst


def sobolev_norm_integral(path, alpha: float, p: float, window=None) -> float:
    """Grid double-sum approximation of the fractional Sobolev norm,

        ( sum_{u != v} d(X_u, X_v)^p / |t_v - t_u|^{alpha p + 1} * h^2 )^{1/p},

    diagonal cells excluded (singular integrand, measure zero)."""
    if p == math.inf:
        return holder_norm(path, alpha, window)
    if not alpha > 1.0 / p:
        raise PathError(f"inadmissible parameters alpha={alpha}, p={p}")
    grid = _as_grid(path)
    a, b = _window_indices(grid, window)
    if b - a < 2:
        return 0.0
    s = grid.pair_sum(p, alpha * p + 1.0, a, b)
    return (2.0 * s * grid.h * grid.h) ** (1.0 / p)


class DyadicNorm(NamedTuple):
    value: float
    tail: float  # norm contribution of the deepest level, for truncation diagnostics


def sobolev_norm_dyadic(path, alpha: float, p: float) -> DyadicNorm:
    """Discrete fractional Sobolev norm truncated at the path's depth:

        ( sum_{j=0}^{J} 2^{j(alpha p - 1)} sum_m d(X_{m 2^-j}, X_{(m+1) 2^-j})^p )^{1/p}
    """
    if not alpha > 1.0 / p:
        raise PathError(f"inadmissible parameters alpha={alpha}, p={p}")
    grid = _as_grid(path)
    if grid.depth is None:
        raise PathError("dyadic norm needs 2^J + 1 samples")
    terms = []
    for j in range(grid.depth + 1):
        dist = grid.dyadic_dists(j)
        terms.append(2.0 ** (j * (alpha * p - 1.0)) * float(np.sum(dist**p)))
    total = math.fsum(terms)
    return DyadicNorm(total ** (1.0 / p), terms[-1] ** (1.0 / p))


# ------------------------------------------------------------------ distances

def _check_pair(X1: SampledRoughPath, X2: SampledRoughPath):
    if not isinstance(X1, SampledRoughPath) or not isinstance(X2, SampledRoughPath):
        raise PathError("inhomogeneous distances need SampledRoughPath inputs")
    if X1.alg != X2.alg or X1.depth != X2.depth:
        raise PathError("paths must share dimension, level and grid depth")


def _dist_levels(alpha: float, N: int) -> range:
    return range(1, min(N, _floor_bracket(1.0 / alpha)) + 1)


def _dyadic_level_diffs(X1: SampledRoughPath, X2: SampledRoughPath, k: int, j: int) -> np.ndarray:
    """|pi_k(X1-increment - X2-increment)| over the 2^j dyadic intervals."""
    sl = X1.alg.slice(k)
    lev = X1.dyadic_increments(j)[:, sl] - X2.dyadic_increments(j)[:, sl]
    return np.linalg.norm(lev, axis=1)


def _pair_level_diff_matrix(X1: SampledRoughPath, X2: SampledRoughPath, k: int,
                            a: int, b: int) -> np.ndarray:
    out = np.empty((b - a, b - a))
    for r0 in range(a, b, _BLOCK):
        r1 = min(r0 + _BLOCK, b)
        out[r0 - a:r1 - a] = _kernels.level_diff_block(
            X1.inv_nodes[r0:r1], X1.nodes[a:b],
            X2.inv_nodes[r0:r1], X2.nodes[a:b],
            X1.alg.dim, X1.alg.level, k)
    return out


class InhomSobolevDist(NamedTuple):
    levels: tuple
    total: float


def inhom_sobolev_dist(X1: SampledRoughPath, X2: SampledRoughPath,
                       alpha: float, p: float) -> InhomSobolevDist:
    """Per-level dyadic Sobolev distances

        rho_k = ( sum_j 2^{j(alpha p - 1)} sum_i |pi_k(Delta^1 - Delta^2)|^{p/k} )^{k/p}

    over dyadic-interval increments Delta, and their sum over k = 1..[1/alpha]."""
    _check_pair(X1, X2)
    if not alpha > 1.0 / p:
        raise PathError(f"inadmissible parameters alpha={alpha}, p={p}")
    levels = []
    for k in _dist_levels(alpha, X1.alg.level):
        terms = []
        for j in range(X1.depth + 1):
            diffs = _dyadic_level_diffs(X1, X2, k, j)
            terms.append(2.0 ** (j * (alpha * p - 1.0)) * float(np.sum(diffs ** (p / k))))
        levels.append(math.fsum(terms) ** (k / p))
    return InhomSobolevDist(tuple(levels), math.fsum(levels))


def inhom_qvar_dist(X1: SampledRoughPath, X2: SampledRoughPath,
                    alpha: float, window=None) -> tuple:
    """Per-level inhomogeneous 1/alpha-variation distances over grid partitions:

        rho_k = ( sup_P sum |pi_k(Delta^1 - Delta^2)|^{1/(alpha k)} )^{alpha k}
    """
    _check_pair(X1, X2)
    a, b = _window_indices(X1, window)
    out = []
    for k in _dist_levels(alpha, X1.alg.level):
        if b - a < 2:
            out.append(0.0)
            continue
        w = _pair_level_diff_matrix(X1, X2, k, a, b) ** (1.0 / (alpha * k))
        best = _kernels.partition_dp_max(np.ascontiguousarray(w))
        out.append(best ** (alpha * k))
    return tuple(out)


class MixedDist(NamedTuple):
    levels: tuple
    value: float


def mixed_dist(X1: SampledRoughPath, X2: SampledRoughPath,
               alpha: float, p: float) -> MixedDist:
    """Inhomogeneous mixed Hoelder-variation distance: per level k,

        sup_P ( sum_{[u,v] in P} rho_k,1/alpha-var;[u,v]^{p/k} / |v-u|^{alpha p - 1} )^{k/p}

    maximised over k.  Inner variations and the outer supremum are grid DPs."""
    _check_pair(X1, X2)
    if not alpha > 1.0 / p:
        raise PathError(f"inadmissible parameters alpha={alpha}, p={p}")
    n = X1.n_nodes
    h = X1.h
    gaps = (np.arange(n)[None, :] - np.arange(n)[:, None]).astype(float)
    np.fill_diagonal(gaps, 1.0)
    levels = []
    for k in _dist_levels(alpha, X1.alg.level):
        w = _pair_level_diff_matrix(X1, X2, k, 0, n) ** (1.0 / (alpha * k))
        inner = _kernels.interval_dp_table(np.ascontiguousarray(w))
        # inner[u, v] = rho_k,1/alpha-var;[u,v] ^ (1/(alpha k))
        outer_w = inner ** (alpha * p) / np.abs(gaps * h) ** (alpha * p - 1.0)
        best = _kernels.partition_dp_max(np.ascontiguousarray(outer_w))
        levels.append(best ** (k / p))
    return MixedDist(tuple(levels), max(levels) if levels else 0.0)


# ----------------------------------------------------------- interval objects

class IntervalFunction:
    """Two-parameter function on grid intervals.

    Storage is either the full pair array (shape (n, n, *vshape), upper
    triangle meaningful) or the dyadic interval family only (one array of
    shape (2^j, *vshape) per level j <= J).
    """

    def __init__(self, n_nodes: int, pair: np.ndarray | None = None,
                 dyadic: list | None = None):
        J = int(round(math.log2(n_nodes - 1)))
        if (1 << J) + 1 != n_nodes:
            raise PathError("interval functions need a dyadic grid")
        self.n_nodes = n_nodes
        self.depth = J
        self.pair = pair
        self.dyadic = dyadic
        if pair is None and dyadic is None:
            raise PathError("no values given")
        if pair is not None and not np.all(np.isfinite(pair)):
            raise PathError("non-finite interval values")

    @classmethod
    def from_pair_matrix(cls, pair: np.ndarray) -> "IntervalFunction":
        return cls(pair.shape[0], pair=np.asarray(pair, dtype=np.float64))

    @classmethod
    def from_dyadic(cls, levels: list) -> "IntervalFunction":
        levels = [np.asarray(v, dtype=np.float64) for v in levels]
        J = len(levels) - 1
        for j, v in enumerate(levels):
            if v.shape[0] != (1 << j):
                raise PathError(f"dyadic level {j} has {v.shape[0]} values, expected {1 << j}")
            if not np.all(np.isfinite(v)):
                raise PathError(f"non-finite interval value at dyadic level {j}")
        return cls((1 << J) + 1, dyadic=levels)

    @classmethod
    def from_callable(cls, n_nodes: int, fn) -> "IntervalFunction":
        """fn(i, j) -> value on [t_i, t_j], evaluated on index grids."""
        ii, jj = np.meshgrid(np.arange(n_nodes), np.arange(n_nodes), indexing="ij")
        pair = np.asarray(fn(ii, jj), dtype=np.float64)
        tri = np.triu(np.ones((n_nodes, n_nodes), dtype=bool), k=1)
        pair = np.where(tri.reshape(tri.shape + (1,) * (pair.ndim - 2)), pair, 0.0)
        return cls(n_nodes, pair=pair)

    @property
    def vshape(self) -> tuple:
        if self.pair is not None:
            return self.pair.shape[2:]
        return self.dyadic[0].shape[1:]

    def dyadic_level(self, j: int) -> np.ndarray:
        if self.dyadic is not None:
            return self.dyadic[j]
        stride = 1 << (self.depth - j)
        idx = np.arange(0, self.n_nodes - 1, stride)
        return self.pair[idx, idx + stride]

    def pair_norms(self) -> np.ndarray:
        """(n, n) Euclidean magnitudes; requires full pair storage."""
        if self.pair is None:
            raise PathError("this interval function stores dyadic values only")
        flat = self.pair.reshape(self.n_nodes, self.n_nodes, -1)
        return np.sqrt(np.einsum("uvc,uvc->uv", flat, flat))

    def __sub__(self, other: "IntervalFunction") -> "IntervalFunction":
        if self.n_nodes != other.n_nodes:
            raise PathError("grid mismatch")
        if self.pair is not None and other.pair is not None:
            return IntervalFunction(self.n_nodes, pair=self.pair - other.pair)
        return IntervalFunction.from_dyadic(
            [self.dyadic_level(j) - other.dyadic_level(j) for j in range(self.depth + 1)])


class ControlReport(NamedTuple):
    ok: bool
    worst: float  # largest relative superadditivity excess over dyadic triples


def control_check(omega: IntervalFunction, tol: float = CTRL_TOL) -> ControlReport:
    """Superadditivity check on dyadic triples:
    omega(s,u) + omega(u,t) <= omega(s,t) * (1 + tol) for children [s,u], [u,t]."""
    worst = -math.inf
    for j in range(omega.depth):
        parent = np.asarray(omega.dyadic_level(j), dtype=np.float64)
        child = np.asarray(omega.dyadic_level(j + 1), dtype=np.float64)
        if parent.ndim != 1:
            raise PathError("control_check needs scalar interval values")
        ssum = child[0::2] + child[1::2]
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(parent > 0, ssum / np.maximum(parent, 1e-300) - 1.0,
                           np.where(ssum > 0, math.inf, 0.0))
        worst = max(worst, float(np.max(rel)))
    if worst == -math.inf:
        worst = 0.0
    return ControlReport(worst <= tol, worst)


def integral_norm_interval_function(path, alpha: float, p: float) -> IntervalFunction:
    """sobolev_norm_integral(.)^p restricted to the dyadic interval family
    (a control function; used with control_check)."""
    grid = _as_grid(path)
    n = grid.n_nodes
    dist = grid.dist_matrix(0, n)
    gap = np.abs(np.arange(n)[None, :] - np.arange(n)[:, None]).astype(float)
    np.fill_diagonal(gap, 1.0)
    w = dist**p / (gap * grid.h) ** (alpha * p + 1.0)
    np.fill_diagonal(w, 0.0)
    pref = np.zeros((n + 1, n + 1))
    pref[1:, 1:] = np.cumsum(np.cumsum(w, axis=0), axis=1)
    levels = []
    for j in range(grid.depth + 1):
        stride = 1 << (grid.depth - j)
        lo = np.arange(0, n - 1, stride)
        hi = lo + stride + 1
        sums = (pref[hi, hi] - pref[lo, hi] - pref[hi, lo] + pref[lo, lo])
        levels.append(sums * grid.h * grid.h)
    return IntervalFunction.from_dyadic(levels)

"""Packing configurations into single matrix points, Gale duality, and
orbit equivalence testing.

A configuration of nonzero items in Q^n (d = 1) packs into the n x (sum k_i)
matrix of concatenated canonical bases; the kernel of that matrix, re-blocked
by rows, is the Gale dual configuration.  Orbit equivalence of two
configurations is decided through the joint linear system g B_i = B'_i C_i.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .config import WeightedConfiguration
from .linalg import RationalMatrix, kernel, meet, span


class PackedPointError(ValueError):
    pass


class BlockDegenerateError(PackedPointError):
    pass


@dataclass(frozen=True)
class PackedPoint:
    """Full-rank n x (sum k_i) matrix with a block structure and the
    weights riding along as linearization bookkeeping."""

    matrix: RationalMatrix
    blocks: tuple[int, ...]
    weights: Optional[tuple[Fraction, ...]] = None

    def __post_init__(self):
        if sum(self.blocks) != self.matrix.cols:
            raise PackedPointError("block widths must sum to the column count")
        if any(k < 1 for k in self.blocks):
            raise PackedPointError("block widths must be positive")
        if self.weights is not None and len(self.weights) != len(self.blocks):
            raise PackedPointError("one weight per block required")
        if self.matrix.rank() != self.matrix.rows:
            raise PackedPointError("matrix must have full row rank")
        for i, (lo, hi) in enumerate(self._block_ranges()):
            block = RationalMatrix.from_columns(
                [self.matrix.column(j) for j in range(lo, hi)]
            )
            if block.rank() != hi - lo:
                raise BlockDegenerateError(f"block {i} is rank-deficient")

    def _block_ranges(self):
        out = []
        start = 0
        for k in self.blocks:
            out.append((start, start + k))
            start += k
        return out

    def block(self, i: int) -> RationalMatrix:
        lo, hi = self._block_ranges()[i]
        return RationalMatrix.from_columns(
            [self.matrix.column(j) for j in range(lo, hi)]
        )


def gm_forward(c: WeightedConfiguration) -> PackedPoint:
    """Concatenate the items' canonical bases into one full-rank matrix."""
    if c.d != 1:
        raise PackedPointError("packing is defined for d = 1 configurations")
    total = sum(sub.dim for sub, _ in c.items)
    if c.n >= total:
        raise PackedPointError("requires n < sum of item dimensions")
    cols = []
    blocks = []
    for idx, (sub, _) in enumerate(c.items):
        if sub.is_zero:
            raise PackedPointError(f"item {idx} is zero")
        for row in sub.rows:
            cols.append(list(row))
        blocks.append(sub.dim)
    matrix = RationalMatrix.from_columns(cols)
    return PackedPoint(matrix, tuple(blocks), tuple(w for _, w in c.items))


def gm_backward(p: PackedPoint, weights=None) -> WeightedConfiguration:
    """Block column spans, with weights from the argument or the point."""
    ws = weights if weights is not None else p.weights
    if ws is None:
        raise PackedPointError("weights required")
    if len(ws) != len(p.blocks):
        raise PackedPointError("one weight per block required")
    items = []
    for i in range(len(p.blocks)):
        block = p.block(i)
        items.append((span(block.column_list(), p.matrix.rows), ws[i]))
    return WeightedConfiguration(p.matrix.rows, 1, tuple(items))


def gale_transform(c: WeightedConfiguration) -> WeightedConfiguration:
    """Kernel of the packed matrix, rows re-blocked by the item dimensions.

    Item i of the dual is the span of its block of kernel-basis rows in
    Q^(sum k_i - n), with the original weight.  Dual blocks may be
    rank-deficient; the dual item is then simply lower-dimensional.
    """
    p = gm_forward(c)
    ker = kernel(p.matrix)
    dual_dim = p.matrix.cols - p.matrix.rows
    if ker.dim != dual_dim:
        raise AssertionError("kernel dimension mismatch for a full-rank matrix")
    # kernel basis as columns: row j of that matrix is coordinate j of every
    # basis vector
    rows_of_kernel = [
        [vec[j] for vec in ker.rows] for j in range(p.matrix.cols)
    ]
    items = []
    start = 0
    for (sub, w) in c.items:
        k = sub.dim
        block_rows = rows_of_kernel[start : start + k]
        items.append((span(block_rows, dual_dim), w))
        start += k
    return WeightedConfiguration(dual_dim, 1, tuple(items))


class OrbitStatus(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class OrbitEquivalence:
    status: OrbitStatus
    witness: Optional[RationalMatrix] = None


def _intersection_pattern(c: WeightedConfiguration):
    subs = [s for s, _ in c.items]
    dims = tuple(s.dim for s in subs)
    meets = tuple(
        meet(subs[i], subs[j]).dim
        for i in range(len(subs))
        for j in range(i + 1, len(subs))
    )
    return dims, meets


def orbit_equivalent(
    a: WeightedConfiguration,
    b: WeightedConfiguration,
    trials: int = 16,
    seed: int = 0,
) -> OrbitEquivalence:
    """Is there an invertible change of V-basis carrying a's items onto b's?

    The joint system g B_i = B'_i C_i is solved exactly; random rational
    points of the solution space are tested for invertible g (certified by
    exact determinant).  No solution space means No; failing to sample an
    invertible point within `trials` means Inconclusive.
    """
    if (a.n, a.d, a.m) != (b.n, b.d, b.m):
        raise ValueError("configurations must share (n, d, m)")
    dims_a = tuple(s.dim for s, _ in a.items)
    dims_b = tuple(s.dim for s, _ in b.items)
    if dims_a != dims_b:
        raise ValueError("configurations must share item dimensions")
    if _intersection_pattern(a)[1] != _intersection_pattern(b)[1]:
        return OrbitEquivalence(OrbitStatus.NO)
    n, d = a.n, a.d
    nd = n * d
    g_vars = n * n
    c_offsets = []
    off = g_vars
    for k in dims_a:
        c_offsets.append(off)
        off += k * k
    n_vars = off
    zero = Fraction(0)
    rows = []
    for i, ((sub_a, _), (sub_b, _)) in enumerate(zip(a.items, b.items)):
        k = sub_a.dim
        ba_cols = [list(row) for row in sub_a.rows]  # column vectors of B_i
        bb_cols = [list(row) for row in sub_b.rows]
        for col in range(k):
            bvec = ba_cols[col]
            for r in range(nd):
                u, l = divmod(r, d)
                row = [zero] * n_vars
                for v in range(n):
                    coeff = bvec[v * d + l]
                    if coeff:
                        row[u * n + v] = coeff
                for s in range(k):
                    coeff = bb_cols[s][r]
                    if coeff:
                        row[c_offsets[i] + s * k + col] = -coeff
                rows.append(row)
    if not rows:
        return OrbitEquivalence(OrbitStatus.YES, witness=RationalMatrix.identity(n))
    sol = kernel(RationalMatrix.from_rows(rows))
    if sol.dim == 0:
        return OrbitEquivalence(OrbitStatus.NO)
    rng = random.Random(seed)
    for _ in range(max(1, trials)):
        coeffs = [rng.randint(-9, 9) for _ in range(sol.dim)]
        if not any(coeffs):
            coeffs[rng.randrange(sol.dim)] = 1
        point = [zero] * n_vars
        for coef, vec in zip(coeffs, sol.rows):
            if coef:
                point = [p + coef * x for p, x in zip(point, vec)]
        g = RationalMatrix(n, n, tuple(point[:g_vars]))
        if g.det() != 0:
            return OrbitEquivalence(OrbitStatus.YES, witness=g)
    return OrbitEquivalence(OrbitStatus.INCONCLUSIVE)

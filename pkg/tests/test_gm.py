import random
from fractions import Fraction

import pytest

from gitstab.config import apply_gl, configuration
from gitstab.gm import (
    BlockDegenerateError,
    OrbitStatus,
    PackedPoint,
    PackedPointError,
    gale_transform,
    gm_backward,
    gm_forward,
    orbit_equivalent,
)
from gitstab.linalg import RationalMatrix, full_subspace, span

from util import rand_config, rand_invertible, transform_subspace

F = Fraction


def line(n, *coords):
    return span([[F(x) for x in coords]], n)


def _mat(rows):
    return RationalMatrix.from_rows([[F(x) for x in row] for row in rows])


class TestPackedPoint:
    def test_block_sum_checked(self):
        with pytest.raises(PackedPointError):
            PackedPoint(_mat([[1, 0, 1], [0, 1, 1]]), (1, 1))

    def test_positive_widths(self):
        with pytest.raises(PackedPointError):
            PackedPoint(_mat([[1, 0], [0, 1]]), (2, 0))

    def test_weight_count(self):
        with pytest.raises(PackedPointError):
            PackedPoint(_mat([[1, 0], [0, 1]]), (1, 1), (F(1),))

    def test_full_row_rank_required(self):
        with pytest.raises(PackedPointError):
            PackedPoint(_mat([[1, 1, 0], [1, 1, 0]]), (1, 1, 1))

    def test_block_rank_message(self):
        with pytest.raises(BlockDegenerateError, match="block 1 is rank-deficient"):
            PackedPoint(_mat([[1, 1, 1, 0], [0, 1, 1, 1]]), (1, 2, 1))

    def test_block_accessor(self):
        p = PackedPoint(_mat([[1, 0, 1], [0, 1, 1]]), (1, 1, 1))
        assert p.block(2).column(0) == (F(1), F(1))


class TestGMForward:
    def test_requires_d_one(self):
        c = configuration(2, 2, [(full_subspace(4), 1)])
        with pytest.raises(PackedPointError):
            gm_forward(c)

    def test_requires_enough_columns(self):
        c = configuration(2, 1, [(line(2, 1, 0), 1)])
        with pytest.raises(PackedPointError):
            gm_forward(c)

    def test_packs_blocks(self):
        c = configuration(
            2, 1, [(line(2, 1, 0), 2), (line(2, 0, 1), 1), (line(2, 1, 1), 1)]
        )
        p = gm_forward(c)
        assert p.blocks == (1, 1, 1)
        assert p.weights == (F(2), F(1), F(1))
        assert p.matrix.rows == 2 and p.matrix.cols == 3

    def test_roundtrip(self):
        rng = random.Random(81)
        done = 0
        while done < 20:
            c = rand_config(rng)
            if c.n >= sum(s.dim for s, _ in c.items):
                continue
            done += 1
            back = gm_backward(gm_forward(c))
            assert back == c

    def test_backward_weight_override(self):
        c = configuration(
            2, 1, [(line(2, 1, 0), 1), (line(2, 0, 1), 1), (line(2, 1, 1), 1)]
        )
        p = gm_forward(c)
        back = gm_backward(p, weights=[F(5), F(6), F(7)])
        assert back.weights() == [F(5), F(6), F(7)]

    def test_backward_requires_weights(self):
        p = PackedPoint(_mat([[1, 0, 1], [0, 1, 1]]), (1, 1, 1))
        with pytest.raises(PackedPointError):
            gm_backward(p)


class TestGale:
    def test_three_lines_dual(self):
        c = configuration(
            2, 1, [(line(2, 1, 0), 1), (line(2, 0, 1), 2), (line(2, 1, 1), 3)]
        )
        dual = gale_transform(c)
        assert dual.n == 1
        assert dual.weights() == [F(1), F(2), F(3)]
        assert all(sub.is_full for sub in dual.subspaces())

    def test_dual_dimension(self):
        rng = random.Random(82)
        done = 0
        while done < 10:
            c = rand_config(rng)
            total = sum(s.dim for s, _ in c.items)
            if c.n >= total:
                continue
            done += 1
            dual = gale_transform(c)
            assert dual.n == total - c.n
            assert dual.m == c.m

    def test_double_dual_orbit_equivalent(self):
        rng = random.Random(83)
        done = 0
        while done < 10:
            n = rng.randint(2, 3)
            m = rng.randint(n + 1, n + 3)
            items = []
            for _ in range(m):
                items.append(
                    (
                        span([[F(rng.randint(-9, 9)) for _ in range(n)]], n),
                        F(rng.randint(1, 4)),
                    )
                )
            if any(s.dim != 1 for s, _ in items):
                continue
            c = configuration(n, 1, items)
            try:
                dd = gale_transform(gale_transform(c))
            except PackedPointError:
                continue
            done += 1
            assert dd.n == c.n
            r = orbit_equivalent(c, dd)
            assert r.status == OrbitStatus.YES
            for (sa, _), (sb, _) in zip(c.items, dd.items):
                assert transform_subspace(r.witness, sa) == sb


class TestOrbitEquivalent:
    def test_self_equivalence(self):
        c = configuration(
            2, 1, [(line(2, 1, 0), 1), (line(2, 0, 1), 1), (line(2, 1, 1), 1)]
        )
        r = orbit_equivalent(c, c)
        assert r.status == OrbitStatus.YES
        for sub, _ in c.items:
            assert transform_subspace(r.witness, sub) == sub

    def test_transported_config(self):
        rng = random.Random(84)
        for _ in range(8):
            c = rand_config(rng, n_max=3, m_max=3)
            g = rand_invertible(rng, c.n)
            moved = apply_gl(c, g)
            r = orbit_equivalent(c, moved)
            assert r.status == OrbitStatus.YES
            for (sa, _), (sb, _) in zip(c.items, moved.items):
                assert transform_subspace(r.witness, sa) == sb

    def test_intersection_pattern_shortcut(self):
        a = configuration(
            2, 1, [(line(2, 1, 0), 1), (line(2, 0, 1), 1), (line(2, 1, 1), 1)]
        )
        b = configuration(
            2, 1, [(line(2, 1, 0), 1), (line(2, 0, 1), 1), (line(2, 1, 0), 1)]
        )
        r = orbit_equivalent(a, b)
        assert r.status == OrbitStatus.NO
        assert r.witness is None

    def test_cross_ratio_obstruction(self):
        # four points on the line: (0, inf, 1, 2) vs (0, inf, 1, 3); the
        # joint linear system only admits g = 0, an exact No
        def quad(t):
            return configuration(
                2,
                1,
                [
                    (line(2, 1, 0), 1),
                    (line(2, 0, 1), 1),
                    (line(2, 1, 1), 1),
                    (line(2, 1, t), 1),
                ],
            )

        r = orbit_equivalent(quad(2), quad(3))
        assert r.status == OrbitStatus.NO

    def test_shape_mismatch_raises(self):
        a = configuration(2, 1, [(line(2, 1, 0), 1), (line(2, 0, 1), 1)])
        b = configuration(3, 1, [(line(3, 1, 0, 0), 1), (line(3, 0, 1, 0), 1)])
        with pytest.raises(ValueError):
            orbit_equivalent(a, b)

    def test_item_dims_must_match(self):
        a = configuration(2, 1, [(line(2, 1, 0), 1), (line(2, 0, 1), 1)])
        b = configuration(2, 1, [(full_subspace(2), 1), (line(2, 0, 1), 1)])
        with pytest.raises(ValueError):
            orbit_equivalent(a, b)

    def test_tensor_factor_action(self):
        k = span(
            [
                [F(1), F(0), F(0), F(1)],
                [F(0), F(1), F(1), F(0)],
            ],
            4,
        )
        c = configuration(2, 2, [(k, 1), (line(4, 1, 2, 3, 4), 1)])
        g = _mat([[1, 1], [0, 1]])
        moved = apply_gl(c, g)
        r = orbit_equivalent(c, moved)
        assert r.status == OrbitStatus.YES

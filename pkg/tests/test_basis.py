import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multicheb.basis import (
    Basis,
    DimensionError,
    Domain,
    Monomial,
    NamedFunction,
    SampleSet,
    enumerate_monomials,
    evaluate_basis,
    format_basis_spec,
    generate_grid,
    parse_basis_spec,
    parse_domain,
    sample_function,
    truncate_basis,
)


def exps(basis):
    return [fn.exponents for fn in basis]


class TestMonomial:
    def test_degree_is_exponent_sum(self):
        assert Monomial((2, 0, 3)).degree == 5

    def test_constant_is_one_everywhere(self):
        pts = np.random.default_rng(1).normal(size=(7, 3))
        np.testing.assert_array_equal(Monomial((0, 0, 0))(pts), np.ones(7))

    def test_rejects_negative_exponent(self):
        with pytest.raises(ValueError):
            Monomial((1, -1))

    @pytest.mark.parametrize(
        "e,label", [((0, 0), "1"), ((1, 0), "x"), ((2, 1), "x^2*y"), ((0, 0, 3), "x3^3")]
    )
    def test_label(self, e, label):
        assert Monomial(e).label() == label


class TestEnumerate:
    def test_l2_m2_grlex(self):
        b = enumerate_monomials(2, 2)
        assert len(b) == 6
        assert exps(b)[:3] == [(0, 0), (1, 0), (0, 1)]
        assert {e for e in exps(b)[3:]} == {(2, 0), (1, 1), (0, 2)}

    def test_univariate_ladder(self):
        assert exps(enumerate_monomials(1, 3)) == [(0,), (1,), (2,), (3,)]

    def test_l3_m2_count(self):
        brute = [e for e in itertools.product(range(3), repeat=3) if sum(e) <= 2]
        assert len(brute) == 10
        assert sorted(exps(enumerate_monomials(3, 2))) == sorted(brute)

    def test_paper2d_order(self):
        labels = enumerate_monomials(2, 4, "paper2d").labels()
        assert labels[:11] == [
            "1", "x", "y", "x^2", "y^2", "x*y", "x^3", "y^3", "x^2*y", "x*y^2", "x^4",
        ]
        assert len(labels) == 15

    @pytest.mark.parametrize("l", range(1, 5))
    @pytest.mark.parametrize("m", range(0, 7))
    def test_count_matches_brute_force(self, l, m):
        brute = {e for e in itertools.product(range(m + 1), repeat=l) if sum(e) <= m}
        got = exps(enumerate_monomials(l, m))
        assert len(got) == math.comb(l + m, l) == len(brute)
        assert set(got) == brute
        degrees = [sum(e) for e in got]
        assert degrees == sorted(degrees)

    def test_errors(self):
        with pytest.raises(ValueError):
            enumerate_monomials(0, 2)
        with pytest.raises(ValueError):
            enumerate_monomials(3, 2, "paper2d")
        with pytest.raises(ValueError):
            enumerate_monomials(2, -1)


class TestTruncate:
    def test_paper_table_basis_ends_at_x4(self):
        b = truncate_basis(enumerate_monomials(2, 4, "paper2d"), 11)
        assert len(b) == 11
        assert b[-1].exponents == (4, 0)

    def test_identity(self):
        b = enumerate_monomials(2, 3)
        assert truncate_basis(b, len(b)) == b

    def test_grlex_eleventh(self):
        full = enumerate_monomials(2, 4)
        order = sorted(
            (e for e in itertools.product(range(5), repeat=2) if sum(e) <= 4),
            key=lambda e: (sum(e), tuple(-v for v in e)),
        )
        assert truncate_basis(full, 11)[-1].exponents == order[10]

    @pytest.mark.parametrize("k", [0, 16])
    def test_out_of_range(self, k):
        with pytest.raises(ValueError):
            truncate_basis(enumerate_monomials(2, 4), k)


class TestGrid:
    def test_paper_grid(self):
        pts = generate_grid(Domain.cube(-1, 1, 2), 0.01)
        assert pts.shape == (40401, 2)
        assert pts[0].tolist() == [-1.0, -1.0]
        assert pts[-1].tolist() == [1.0, 1.0]
        axis = np.unique(pts[:, 0])
        assert axis.size == 201

    def test_two_endpoints(self):
        np.testing.assert_array_equal(generate_grid(Domain((0.0,), (1.0,)), 1.0), [[0.0], [1.0]])

    def test_half_step(self):
        assert len(generate_grid(Domain.cube(-1, 1, 2), 0.5)) == 25

    def test_lexicographic_order(self):
        pts = generate_grid(Domain((0, 0), (1, 2)), 1.0)
        assert pts.tolist() == [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]]

    def test_index_based_not_accumulated(self):
        pts = generate_grid(Domain((-1.0,), (1.0,)), 0.01)[:, 0]
        np.testing.assert_array_equal(pts[:-1], -1.0 + np.arange(200) * 0.01)

    @pytest.mark.parametrize("step", [0.0, -0.1])
    def test_bad_step(self, step):
        with pytest.raises(ValueError):
            generate_grid(Domain.cube(0, 1, 1), step)

    def test_step_longer_than_axis(self):
        with pytest.raises(ValueError):
            generate_grid(Domain((0, 0), (1, 0.5)), 0.75)

    @settings(max_examples=60, deadline=None)
    @given(
        lo=st.lists(st.floats(-5, 5), min_size=1, max_size=3),
        span=st.lists(st.floats(0.5, 3), min_size=3, max_size=3),
        step=st.floats(0.05, 0.5),
    )
    def test_cardinality_and_containment(self, lo, span, step):
        hi = [a + s for a, s in zip(lo, span)]
        dom = Domain(tuple(lo), tuple(hi))
        pts = generate_grid(dom, step)
        counts = [len(np.unique(pts[:, i])) for i in range(dom.dimension)]
        assert len(pts) == math.prod(counts)
        slack = step * 1e-9
        assert np.all(pts >= np.array(lo) - slack)
        assert np.all(pts <= np.array(hi) + slack)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            Domain((0, 1), (1, 1))
        assert parse_domain("-1,1;-2,2") == Domain((-1, -2), (1, 2))


class TestSample:
    def test_corner_and_origin(self):
        s = sample_function("sqrt_abs_sum", [[1.0, 1.0], [0.0, 0.0]])
        assert s.values[0] == pytest.approx(math.sqrt(2), abs=1e-12)
        assert s.values[1] == 0.0

    def test_paper_grid_range(self, paper_samples):
        assert paper_samples.values.min() == 0.0
        assert paper_samples.values.max() == pytest.approx(math.sqrt(2), abs=1e-15)

    def test_constant_and_abs(self):
        assert sample_function("constant:2.5", np.zeros((3, 4))).values.tolist() == [2.5] * 3
        assert sample_function("abs_x", [[-3.0, 1.0, 1.0]]).values.tolist() == [3.0]

    def test_errors(self):
        with pytest.raises(KeyError):
            sample_function("nope", [[0.0, 0.0]])
        with pytest.raises(DimensionError):
            sample_function("runge2d", [[0.0, 0.0, 0.0]])
        with pytest.raises(ValueError):
            SampleSet(np.zeros((2, 1)), [1.0, np.inf])

    def test_non_finite_target(self):
        from multicheb.basis import register_function

        register_function("_test_pole", lambda p: np.abs(p[:, 0]) ** -1.0, 1)
        with np.errstate(divide="ignore"), pytest.raises(ValueError, match="not finite"):
            sample_function("_test_pole", [[1.0], [0.0]])


class TestEvaluate:
    def test_paper_basis_hand_values(self):
        b = enumerate_monomials(2, 2, "paper2d")
        np.testing.assert_array_equal(evaluate_basis(b, (2, 3)), [1, 2, 3, 4, 9, 6])

    def test_origin(self):
        v = evaluate_basis(enumerate_monomials(3, 3), (0, 0, 0))
        assert v[0] == 1 and not v[1:].any()

    def test_even_power(self):
        b = Basis.from_exponents([(0,), (2,)])
        np.testing.assert_array_equal(evaluate_basis(b, (-2,)), [1, 4])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            evaluate_basis(enumerate_monomials(2, 1), (1, 2, 3))

    @settings(max_examples=40, deadline=None)
    @given(
        e=st.lists(st.integers(0, 5), min_size=1, max_size=4),
        seed=st.integers(0, 2**31),
    )
    def test_multiplicative(self, e, seed):
        x = np.random.default_rng(seed).uniform(-2, 2, size=len(e))
        naive = 1.0
        for xi, ei in zip(x, e):
            for _ in range(ei):
                naive *= xi
        got = evaluate_basis(Basis.from_exponents([e]), x)[0]
        assert got == pytest.approx(naive, rel=1e-12, abs=1e-300)

    def test_order_stable(self):
        b = enumerate_monomials(2, 3, "paper2d")
        x = (0.3, -0.7)
        first = evaluate_basis(b, x)
        for _ in range(3):
            np.testing.assert_array_equal(evaluate_basis(b, x), first)
        for i, fn in enumerate(b):
            assert first[i] == pytest.approx(fn(np.array([x]))[0])

    def test_named_functions_mixed(self):
        b = parse_basis_spec("(0,0);abs_x;(0,1)", 2)
        np.testing.assert_allclose(evaluate_basis(b, (-0.5, 2.0)), [1.0, 0.5, 2.0])


class TestBasisSpec:
    def test_explicit(self):
        b = parse_basis_spec("(0,0);(1,0);(0,1);(2,0);(0,2);(1,1)", 2)
        assert b == enumerate_monomials(2, 2, "paper2d")
        assert format_basis_spec(b) == "(0,0);(1,0);(0,1);(2,0);(0,2);(1,1)"

    def test_named_shorthand(self):
        assert len(parse_basis_spec("paper2d:4:11", 2)) == 11
        assert parse_basis_spec("grlex:3", 3) == enumerate_monomials(3, 3)

    def test_dimension_checked(self):
        with pytest.raises(DimensionError):
            parse_basis_spec("(0,0);(1,0,0)", 2)
        with pytest.raises(DimensionError):
            NamedFunction("sqrt_abs_sum", 3)

    def test_constant_index(self):
        assert parse_basis_spec("(1,0);(0,0)", 2).constant_index() == 1
        assert parse_basis_spec("(1,0)", 2).constant_index() is None
        assert parse_basis_spec("(1,0);constant:3", 2).constant_index() == 1

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clustercap import is_redundant_hull, is_redundant_lp, reduce_to_minimal
from clustercap.errors import DomainError
from clustercap.redundancy import lp_problem_for
from clustercap import lp

# three known minimal cuts for three chambers over columns (A, B, C, AB, AC, BC)
CUT_1 = (1.0, 1.0, 0.0, 1.0, 0.0, 0.0)
CUT_2 = (1.0, 1.0, 1.0, 0.0, 0.0, 0.0)
CUT_3 = (1.0, 1.0, 0.5, 0.5, 0.0, 0.0)  # the average of the two above


def halves(dim):
    return st.lists(
        st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0]), min_size=dim, max_size=dim
    ).map(tuple)


def vector_sets(min_dim=2, max_dim=8, max_vecs=6):
    return st.integers(min_value=min_dim, max_value=max_dim).flatmap(
        lambda d: st.tuples(
            halves(d), st.lists(halves(d), min_size=1, max_size=max_vecs, unique=True)
        )
    )


class TestKnownCuts:
    def test_average_cut_is_redundant_lp(self):
        verdict = is_redundant_lp(CUT_3, [CUT_1, CUT_2])
        assert verdict.redundant
        assert verdict.criterion == "lp"

    def test_average_cut_is_redundant_hull_with_half_half_weights(self):
        verdict = is_redundant_hull(CUT_3, [CUT_1, CUT_2])
        assert verdict.redundant
        assert verdict.witness == pytest.approx((0.5, 0.5), abs=1e-9)

    def test_first_cut_not_redundant_vs_second(self):
        # unit mass on the AB column separates: <CUT_1 - CUT_2, e_AB> = 1
        verdict = is_redundant_lp(CUT_1, [CUT_2])
        assert not verdict.redundant
        x = np.array(verdict.witness)
        assert np.dot(np.array(CUT_1) - np.array(CUT_2), x) >= 1 - 1e-7
        assert is_redundant_hull(CUT_1, [CUT_2]).redundant is False


class TestEdgeCases:
    def test_member_of_set_is_redundant(self):
        assert is_redundant_lp(CUT_1, [CUT_1, CUT_2]).redundant

    def test_dominated_by_single_member(self):
        # the criterion asks for a convex combination that covers b from above
        a = (2.0, 3.0, 4.0)
        b = (1.0, 2.0, 3.0)
        assert is_redundant_lp(b, [a]).redundant
        verdict = is_redundant_hull(b, [a])
        assert verdict.redundant
        assert verdict.witness == pytest.approx((1.0,), abs=1e-9)

    def test_vector_above_the_set_is_not_redundant_here(self):
        # mirrored case: nothing in the set covers b from above
        a = (1.0, 2.0, 3.0)
        b = (2.0, 3.0, 4.0)
        verdict = is_redundant_lp(b, [a])
        assert not verdict.redundant
        assert verdict.witness is not None

    def test_orthogonal_unit_vectors_not_redundant(self):
        assert not is_redundant_hull((1.0, 0.0), [(0.0, 1.0)]).redundant
        assert not is_redundant_lp((1.0, 0.0), [(0.0, 1.0)]).redundant

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError, match="dimension"):
            is_redundant_lp((1.0, 0.0), [(0.0, 1.0, 2.0)])

    def test_empty_reference_set(self):
        with pytest.raises(DomainError, match="nonempty"):
            is_redundant_lp((1.0, 0.0), [])

    def test_negative_entries_rejected(self):
        with pytest.raises(DomainError, match="nonnegative"):
            is_redundant_hull((1.0, -0.5), [(0.0, 1.0)])


class TestSeparationProblemObject:
    def test_known_redundant_case_is_infeasible(self):
        sol = lp.solve(lp_problem_for(CUT_3, [CUT_1, CUT_2]))
        assert sol.status == lp.INFEASIBLE

    def test_problem_object_agrees_with_fast_path(self):
        for b, a_set in [
            (CUT_1, [CUT_2]),
            (CUT_3, [CUT_1, CUT_2]),
            ((1.0, 0.0), [(0.0, 1.0)]),
            ((2.0, 2.0), [(1.0, 1.0)]),
        ]:
            sol = lp.solve(lp_problem_for(b, a_set))
            assert (sol.status == lp.INFEASIBLE) == is_redundant_lp(b, a_set).redundant


@given(vector_sets())
def test_lp_and_hull_criteria_agree(case):
    b, a_set = case
    assert is_redundant_lp(b, a_set).redundant == is_redundant_hull(b, a_set).redundant


@given(vector_sets())
def test_witnesses_are_valid(case):
    b, a_set = case
    b_arr = np.array(b)
    a_arr = np.array(a_set)
    for verdict in (is_redundant_lp(b, a_set), is_redundant_hull(b, a_set)):
        if verdict.witness is None:
            continue
        w = np.array(verdict.witness)
        if verdict.redundant:
            assert np.all(w >= -1e-9)
            assert w.sum() == pytest.approx(1.0, abs=1e-7)
            assert np.all(w @ a_arr >= b_arr - 1e-7)
        else:
            assert np.all(w >= -1e-9)
            assert np.all((b_arr - a_arr) @ w >= 1 - 1e-7)


class TestReduction:
    def test_two_chamber_rows_lose_their_average(self):
        rows = [(1.0, 0.0, 1.0), (0.0, 1.0, 1.0), (0.5, 0.5, 1.0)]
        assert set(reduce_to_minimal(rows)) == {(1.0, 0.0, 1.0), (0.0, 1.0, 1.0)}

    def test_already_minimal_set_unchanged(self):
        rows = [(1.0, 0.0), (0.0, 1.0)]
        assert set(reduce_to_minimal(rows)) == set(rows)

    def test_idempotent(self):
        rows = [
            (1.0, 1.0, 0.0, 1.0),
            (1.0, 1.0, 1.0, 0.0),
            (1.0, 1.0, 0.5, 0.5),
            (2.0, 2.0, 2.0, 2.0),
        ]
        once = reduce_to_minimal(rows)
        assert reduce_to_minimal(once) == once

    @given(
        st.integers(min_value=2, max_value=4),
        st.data(),
    )
    @settings(max_examples=40)
    def test_minimum_is_preserved_on_cut_rows(self, n, data):
        from clustercap import build_parallel_graph, cuts_to_matrix, double_graph
        from clustercap import enumerate_minimal_cuts

        g = build_parallel_graph(n)
        raw = cuts_to_matrix(g, enumerate_minimal_cuts(double_graph(g))).rows
        picked = data.draw(
            st.lists(st.sampled_from(raw), min_size=1, max_size=len(raw), unique=True)
        )
        x = np.array(
            data.draw(
                st.lists(
                    st.floats(min_value=0, max_value=10),
                    min_size=len(raw[0]),
                    max_size=len(raw[0]),
                )
            )
        )
        kept = reduce_to_minimal(picked)
        before = min(float(np.dot(r, x)) for r in picked)
        after = min(float(np.dot(r, x)) for r in kept)
        assert before == pytest.approx(after, abs=1e-7)

    @given(st.lists(halves(3), min_size=1, max_size=8, unique=True))
    @settings(max_examples=40)
    def test_result_is_minimal(self, rows):
        kept = reduce_to_minimal(rows)
        for i, row in enumerate(kept):
            others = kept[:i] + kept[i + 1 :]
            if others:
                assert not is_redundant_lp(row, others).redundant

import random

import pytest
from hypothesis import given, strategies as st

from itersum.human_eval import (
    AnnotationRecord,
    BlindingKey,
    DegenerateInput,
    InsufficientData,
    NoCommonEntries,
    NOT_SELECTED,
    PREFERENCE,
    SELECTED,
    UndefinedAlpha,
    agreement_overlap,
    kendall_tau,
    krippendorff_alpha,
    task1_alpha_encoding,
)

from oracles import alpha_oracle, tau_b_oracle


class TestKrippendorffAlpha:
    def test_perfect_agreement_is_exactly_one(self):
        matrix = [[str(i % 3)] * 3 for i in range(10)]
        assert krippendorff_alpha(matrix) == 1.0

    def test_single_category_is_undefined(self):
        with pytest.raises(UndefinedAlpha):
            krippendorff_alpha([["x", "x", "x"]] * 4)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            krippendorff_alpha([["a", None, None], [None, "b", None]])

    def test_units_with_single_value_excluded(self):
        base = [["a", "a", "b"], ["b", "b", "b"], ["a", "b", None]]
        padded = base + [["a", None, None]]
        assert krippendorff_alpha(base) == krippendorff_alpha(padded)

    def test_matches_oracle_on_random_matrices(self):
        rng = random.Random(20240810)
        for _ in range(200):
            units = rng.randint(2, 20)
            categories = [str(c) for c in range(rng.randint(2, 4))]
            matrix = [
                [
                    None if rng.random() < 0.1 else rng.choice(categories)
                    for _ in range(3)
                ]
                for _ in range(units)
            ]
            try:
                actual = krippendorff_alpha(matrix)
            except UndefinedAlpha:
                with pytest.raises(ZeroDivisionError):
                    alpha_oracle(matrix)
                continue
            except InsufficientData:
                continue
            assert actual == pytest.approx(alpha_oracle(matrix), abs=1e-9)

    def test_category_renaming_invariance(self):
        matrix = [["a", "b", "a"], ["b", "b", None], ["a", "a", "a"], ["b", "a", "b"]]
        renamed = [[{"a": "x", "b": "y"}.get(v) if v else None for v in row] for row in matrix]
        assert krippendorff_alpha(matrix) == pytest.approx(
            krippendorff_alpha(renamed), abs=1e-12
        )

    def test_row_permutation_invariance(self):
        matrix = [["a", "b", "a"], ["b", "b", "b"], ["a", "a", "b"], ["b", "a", None]]
        shuffled = list(matrix)
        random.Random(3).shuffle(shuffled)
        assert krippendorff_alpha(matrix) == pytest.approx(
            krippendorff_alpha(shuffled), abs=1e-12
        )

    def test_never_exceeds_one(self):
        rng = random.Random(7)
        for _ in range(100):
            matrix = [
                [rng.choice(["a", "b"]) for _ in range(3)] for _ in range(rng.randint(2, 8))
            ]
            try:
                assert krippendorff_alpha(matrix) <= 1.0
            except UndefinedAlpha:
                pass


class TestKendallTau:
    def test_identity(self):
        assert kendall_tau([(i, i) for i in range(5)]) == 1.0

    def test_reversal(self):
        assert kendall_tau([(i, 5 - i) for i in range(5)]) == -1.0

    def test_matches_oracle_with_ties(self):
        pairs = [(1, 2), (1, 3), (2, 2), (3, 1), (3, 3), (4, 1), (4, 4), (2, 2)]
        assert kendall_tau(pairs) == pytest.approx(tau_b_oracle(pairs), abs=1e-12)

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateInput):
            kendall_tau([(1, 2)])
        with pytest.raises(DegenerateInput):
            kendall_tau([(1, 1), (1, 2), (1, 3)])
        with pytest.raises(DegenerateInput):
            kendall_tau([(1, 9), (2, 9), (3, 9)])

    @given(
        st.lists(
            st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=2, max_size=12
        )
    )
    def test_symmetry_and_sign_flip(self, pairs):
        xs = {x for x, _ in pairs}
        ys = {y for _, y in pairs}
        if len(xs) == 1 or len(ys) == 1:
            return
        tau = kendall_tau(pairs)
        assert tau == pytest.approx(kendall_tau([(y, x) for x, y in pairs]), abs=1e-12)
        assert tau == pytest.approx(-kendall_tau([(x, -y) for x, y in pairs]), abs=1e-12)


class TestAgreementOverlap:
    def test_identical(self):
        verdicts = {f"e{i}": "YES" for i in range(4)}
        assert agreement_overlap(verdicts, dict(verdicts)) == 1.0

    def test_fully_disjoint_verdicts(self):
        human = {"e1": "YES", "e2": "NO"}
        judge = {"e1": "NO", "e2": "YES"}
        assert agreement_overlap(human, judge) == 0.0

    def test_paper_shaped_fixture(self):
        human = {f"e{i}": "YES" for i in range(100)}
        judge = {f"e{i}": ("YES" if i < 69 else "NO") for i in range(100)}
        assert agreement_overlap(human, judge) == 0.69

    def test_no_common_entries(self):
        with pytest.raises(NoCommonEntries):
            agreement_overlap({"a": "YES"}, {"b": "YES"})


def _key(entry_ids):
    key = BlindingKey(task=PREFERENCE, meta={"model_id": "m", "seed": 0})
    for entry_id in entry_ids:
        item_id = f"preference-{entry_id}"
        key.origins[item_id] = {"1": "turn1", "2": "turn2", "3": "turn3"}
        key.entry_ids[item_id] = entry_id
    return key


def _record(assessor, entry_id, most, least):
    return AnnotationRecord(
        assessor_id=assessor,
        item_id=f"preference-{entry_id}",
        selection={"most": most, "least": least},
    )


class TestTask1AlphaEncoding:
    def test_unanimous_most_gives_alpha_one(self):
        key = _key(["NDA1"])
        records = [_record(a, "NDA1", ["3"], []) for a in ("p1", "p2", "p3")]
        matrix_most, matrix_least = task1_alpha_encoding(records, key)
        assert matrix_most.units == (("NDA1", "turn1"), ("NDA1", "turn2"), ("NDA1", "turn3"))
        assert matrix_most.values == (
            (NOT_SELECTED,) * 3,
            (NOT_SELECTED,) * 3,
            (SELECTED,) * 3,
        )
        assert krippendorff_alpha(matrix_most.rows()) == 1.0

    def test_partial_overlap_encoding(self):
        key = _key(["NDA1"])
        records = [
            _record("p1", "NDA1", ["2", "3"], []),
            _record("p2", "NDA1", ["3"], []),
            _record("p3", "NDA1", ["3"], []),
        ]
        matrix_most, _ = task1_alpha_encoding(records, key)
        row_turn2 = matrix_most.values[matrix_most.units.index(("NDA1", "turn2"))]
        assert row_turn2 == (SELECTED, NOT_SELECTED, NOT_SELECTED)

    def test_empty_least_encodes_not_selected(self):
        key = _key(["NDA1"])
        records = [_record(a, "NDA1", ["1"], []) for a in ("p1", "p2", "p3")]
        _, matrix_least = task1_alpha_encoding(records, key)
        assert all(v == NOT_SELECTED for row in matrix_least.values for v in row)

    def test_missing_assessor_is_missing_cell(self):
        key = _key(["NDA1", "NDA2"])
        records = [
            _record("p1", "NDA1", ["1"], []),
            _record("p2", "NDA1", ["1"], []),
            _record("p1", "NDA2", ["2"], []),
        ]
        matrix_most, _ = task1_alpha_encoding(records, key)
        row = matrix_most.values[matrix_most.units.index(("NDA2", "turn2"))]
        assert row == (SELECTED, None)

    def test_deterministic(self):
        key = _key(["NDA1", "NDA2"])
        records = [
            _record(a, e, ["1"], ["3"]) for e in ("NDA1", "NDA2") for a in ("p1", "p2", "p3")
        ]
        one = task1_alpha_encoding(records, key)
        two = task1_alpha_encoding(list(reversed(records)), key)
        assert one == two

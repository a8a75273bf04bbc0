import pytest

from itersum.human_eval import (
    AnnotationRecord,
    BlindingKey,
    EvalItem,
    MODEL_1_WON,
    MODEL_2_WON,
    PAIRWISE,
    PREFERENCE,
    TIE,
    UnknownItem,
    ValidationError,
    VoteCountMismatch,
    majority_vote_consistency,
    majority_vote_pairwise,
    validate_selection,
    vote_distribution_task1,
)


def _pairwise_key(a="chatgpt", b="gpt4"):
    key = BlindingKey(task=PAIRWISE, meta={"models": ["chatgpt", "gpt4"]})
    key.origins["pairwise-NDA001"] = {"A": a, "B": b}
    key.entry_ids["pairwise-NDA001"] = "NDA001"
    return key


class TestValidateSelection:
    def _pref_item(self):
        return EvalItem("preference-x", PREFERENCE, "x", {"summaries": {"1": "a", "2": "b", "3": "c"}})

    def test_valid_preference(self):
        validate_selection(self._pref_item(), {"most": ["2"], "least": ["1"]})

    def test_least_may_be_empty(self):
        validate_selection(self._pref_item(), {"most": ["3"], "least": []})

    def test_most_must_be_non_empty(self):
        with pytest.raises(ValidationError):
            validate_selection(self._pref_item(), {"most": [], "least": ["1"]})

    def test_overlap_rejected(self):
        with pytest.raises(ValidationError):
            validate_selection(self._pref_item(), {"most": ["1"], "least": ["1"]})

    def test_unknown_label_rejected(self):
        with pytest.raises(ValidationError):
            validate_selection(self._pref_item(), {"most": ["4"], "least": []})

    def test_repeated_label_rejected(self):
        with pytest.raises(ValidationError):
            validate_selection(self._pref_item(), {"most": ["1", "1"], "least": []})

    def test_pairwise_choices(self):
        item = EvalItem("pairwise-x", PAIRWISE, "x", {"summaries": {"A": "a", "B": "b"}})
        validate_selection(item, "A")
        validate_selection(item, "TIE")
        with pytest.raises(ValidationError):
            validate_selection(item, "C")

    def test_consistency_choices(self):
        item = EvalItem("consistency-x", "CONSISTENCY", "x", {"reference": "r", "candidate": "c"})
        validate_selection(item, "YES")
        with pytest.raises(ValidationError):
            validate_selection(item, "maybe")


class TestMajorityVotePairwise:
    def test_footnote_rule_three_way_split(self):
        key = _pairwise_key()
        # A -> chatgpt (model_1), B -> gpt4 (model_2), plus an explicit tie
        result = majority_vote_pairwise(["A", "TIE", "B"], key, "pairwise-NDA001")
        assert result == TIE

    def test_unanimous(self):
        key = _pairwise_key()
        assert majority_vote_pairwise(["A", "A", "A"], key, "pairwise-NDA001") == MODEL_1_WON

    def test_two_of_three(self):
        key = _pairwise_key()
        assert majority_vote_pairwise(["B", "B", "TIE"], key, "pairwise-NDA001") == MODEL_2_WON

    def test_vote_count_mismatch(self):
        key = _pairwise_key()
        with pytest.raises(VoteCountMismatch):
            majority_vote_pairwise(["A", "B"], key, "pairwise-NDA001")

    def test_label_permutation_invariance(self):
        votes = ["A", "A", "B"]
        flipped_votes = ["B", "B", "A"]
        straight = majority_vote_pairwise(votes, _pairwise_key("chatgpt", "gpt4"), "pairwise-NDA001")
        flipped = majority_vote_pairwise(
            flipped_votes, _pairwise_key("gpt4", "chatgpt"), "pairwise-NDA001"
        )
        assert straight == flipped

    def test_unknown_item(self):
        with pytest.raises(UnknownItem):
            majority_vote_pairwise(["A", "A", "A"], _pairwise_key(), "pairwise-NDA999")

    def test_unblinding_drives_majority(self):
        # two assessors pick different labels that map to the same model
        key = _pairwise_key("gpt4", "chatgpt")
        assert majority_vote_pairwise(["A", "A", "B"], key, "pairwise-NDA001") == MODEL_2_WON

    def test_generalizes_to_larger_odd_panels(self):
        key = _pairwise_key()
        votes = ["A", "A", "A", "TIE", "B"]
        assert majority_vote_pairwise(votes, key, "pairwise-NDA001", panel_size=5) == MODEL_1_WON
        # 2/2/1 split has no strict majority
        split = ["A", "A", "B", "B", "TIE"]
        assert majority_vote_pairwise(split, key, "pairwise-NDA001", panel_size=5) == TIE

    def test_even_panels_rejected(self):
        key = _pairwise_key()
        with pytest.raises(ValueError):
            majority_vote_pairwise(["A", "B"], key, "pairwise-NDA001", panel_size=2)


class TestMajorityVoteConsistency:
    def test_two_of_three_yes(self):
        assert majority_vote_consistency(["YES", "YES", "NO"]) == "YES"

    def test_unanimous_no(self):
        assert majority_vote_consistency(["NO", "NO", "NO"]) == "NO"

    def test_count_mismatch(self):
        with pytest.raises(VoteCountMismatch):
            majority_vote_consistency(["YES"])

    def test_paper_shaped_rate(self):
        panels = [["YES", "YES", "NO"]] * 85 + [["NO", "NO", "YES"]] * 15
        verdicts = [majority_vote_consistency(p) for p in panels]
        assert sum(1 for v in verdicts if v == "YES") / len(verdicts) == 0.85

    def test_generalizes_to_larger_odd_panels(self):
        assert majority_vote_consistency(["YES", "NO", "NO", "YES", "NO"], panel_size=5) == "NO"


def _task1_key(entry_ids):
    key = BlindingKey(task=PREFERENCE, meta={"model_id": "m", "seed": 0})
    for entry_id in entry_ids:
        item_id = f"preference-{entry_id}"
        key.origins[item_id] = {"1": "turn2", "2": "turn3", "3": "turn1"}
        key.entry_ids[item_id] = entry_id
    return key


def _record(assessor, entry_id, most, least):
    return AnnotationRecord(
        assessor_id=assessor,
        item_id=f"preference-{entry_id}",
        selection={"most": most, "least": least},
    )


class TestVoteDistribution:
    def test_unanimous_turn3(self):
        entries = [f"NDA{i}" for i in range(5)]
        key = _task1_key(entries)
        records = [
            _record(a, e, most=["2"], least=["3"])  # label 2 -> turn3, label 3 -> turn1
            for e in entries
            for a in ("p1", "p2", "p3")
        ]
        distribution = vote_distribution_task1(records, key)
        assert distribution["most"]["turn3"] == 15
        assert distribution["least"]["turn1"] == 15
        assert distribution["unanimous_most"]["turn3"] == 5
        assert distribution["unanimous_most"]["turn1"] == 0

    def test_empty_least_contributes_nothing(self):
        key = _task1_key(["NDA1"])
        records = [
            _record("p1", "NDA1", most=["2"], least=[]),
            _record("p2", "NDA1", most=["2"], least=["1"]),
            _record("p3", "NDA1", most=["2"], least=["1"]),
        ]
        distribution = vote_distribution_task1(records, key)
        assert sum(distribution["least"].values()) == 2

    def test_multi_select_counts_each_turn_once(self):
        key = _task1_key(["NDA1"])
        records = [_record("p1", "NDA1", most=["1", "2"], least=[])]
        distribution = vote_distribution_task1(records, key)
        assert distribution["most"]["turn2"] == 1  # label 1
        assert distribution["most"]["turn3"] == 1  # label 2
        assert distribution["most"]["turn1"] == 0

    def test_incomplete_panels_not_unanimous(self):
        key = _task1_key(["NDA1"])
        records = [
            _record("p1", "NDA1", most=["2"], least=[]),
            _record("p2", "NDA1", most=["2"], least=[]),
        ]
        distribution = vote_distribution_task1(records, key)
        assert distribution["unanimous_most"]["turn3"] == 0

    def test_unknown_item(self):
        key = _task1_key(["NDA1"])
        with pytest.raises(UnknownItem):
            vote_distribution_task1([_record("p1", "NDA9", ["1"], [])], key)

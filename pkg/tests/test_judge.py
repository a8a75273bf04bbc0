from pathlib import Path

import pytest

from itersum.judge import (
    A_WON,
    B_WON,
    CONSISTENCY_TEMPLATE,
    EmptyInput,
    MODEL_1_WON,
    MODEL_2_WON,
    PAIRWISE_TEMPLATE,
    ParseFailure,
    TIE,
    build_consistency_prompt,
    build_pairwise_prompt,
    judge_consistency,
    judge_pair_debiased,
    parse_verdict,
    win_rate,
)
from itersum.llm_client import ChatMessage, MockChatClient, ModelConfig

GOLDEN = Path(__file__).parent / "golden"

_JUDGE = ModelConfig(model_id="gpt-4", temperature=0.0)


class TestTemplates:
    def test_pairwise_matches_golden(self):
        rendered = PAIRWISE_TEMPLATE.format(reference="", summary_a="", summary_b="")
        assert rendered == (GOLDEN / "judge_pairwise.txt").read_text(encoding="utf-8")

    def test_consistency_matches_golden(self):
        rendered = CONSISTENCY_TEMPLATE.format(reference="", candidate="")
        assert rendered == (GOLDEN / "judge_consistency.txt").read_text(encoding="utf-8")


class TestBuildPairwisePrompt:
    def test_contains_verdict_instruction(self):
        [message] = build_pairwise_prompt("R", "X", "Y")
        assert (
            'Begin by stating either "A won", "B won", or "Tie" on a single line.'
            in message.content
        )

    def test_payloads_inside_fences(self):
        [message] = build_pairwise_prompt("R", "X", "Y")
        text = message.content
        a_block = text.split("[The Start of Summary A]")[1].split("[The End of Summary A]")[0]
        b_block = text.split("[The Start of Summary B]")[1].split("[The End of Summary B]")[0]
        assert "X" in a_block and "Y" not in a_block
        assert "Y" in b_block and "X" not in b_block

    def test_swapping_payloads_preserves_template(self):
        [one] = build_pairwise_prompt("R", "X", "Y")
        [two] = build_pairwise_prompt("R", "Y", "X")
        assert one.content.replace("X", "@").replace("Y", "X").replace("@", "Y") == two.content

    def test_single_user_message(self):
        messages = build_pairwise_prompt("R", "X", "Y")
        assert len(messages) == 1 and messages[0].role == "user"

    def test_system_role_delivery_switch(self):
        [message] = build_pairwise_prompt("R", "X", "Y", role="system")
        assert message.role == "system"

    def test_rejects_empty_inputs(self):
        with pytest.raises(ValueError):
            build_pairwise_prompt("", "X", "Y")

    def test_braces_in_payload_are_inert(self):
        [message] = build_pairwise_prompt("R", "{weird} braces", "Y")
        assert "{weird} braces" in message.content


class TestBuildConsistencyPrompt:
    def test_contains_instruction_phrase(self):
        [message] = build_consistency_prompt("R", "C")
        assert "factually consistent with the reference summary provided above" in message.content

    def test_block_order(self):
        [message] = build_consistency_prompt("REFTEXT", "CANDTEXT")
        text = message.content
        assert (
            text.index("[Reference Summary]")
            < text.index("REFTEXT")
            < text.index("[Model-generated Summary]")
            < text.index("CANDTEXT")
            < text.index("[System]")
        )

    def test_pure(self):
        assert build_consistency_prompt("R", "C") == build_consistency_prompt("R", "C")


class TestParseVerdict:
    def test_pairwise_a_won(self):
        verdict = parse_verdict("A won\nSummary A includes the Tmax shift.", "pairwise")
        assert verdict.verdict == A_WON
        assert verdict.explanation == "Summary A includes the Tmax shift."

    def test_normalization_strips_punctuation_and_case(self):
        assert parse_verdict("tie.", "pairwise").verdict == TIE
        assert parse_verdict('"B won"', "pairwise").verdict == B_WON
        assert parse_verdict("  A WON  \nrest", "pairwise").verdict == A_WON

    def test_leading_blank_lines_skipped(self):
        assert parse_verdict("\n\nTie\nexplanation", "pairwise").verdict == TIE

    def test_unparseable(self):
        with pytest.raises(ParseFailure):
            parse_verdict("The summaries are comparable", "pairwise")

    def test_consistency_yes_no(self):
        assert parse_verdict("Yes\nAll PK values match.", "consistency").consistent is True
        assert parse_verdict("No\nThe summary omits Tmax.", "consistency").consistent is False

    def test_consistency_unparseable(self):
        with pytest.raises(ParseFailure):
            parse_verdict("Maybe", "consistency")

    def test_empty_response(self):
        with pytest.raises(ParseFailure):
            parse_verdict("", "pairwise")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            parse_verdict("Yes", "overall")


def _compare(script, **kwargs):
    mock = MockChatClient(script)
    comparison = judge_pair_debiased(
        mock, _JUDGE, "ref", "summary one", "summary two", "NDA001",
        model_1="chatgpt", model_2="gpt4", **kwargs
    )
    return comparison, mock


class TestJudgePairDebiased:
    def test_pure_position_bias_becomes_tie(self):
        comparison, _ = _compare(["A won\nwhy", "A won\nwhy"])
        assert comparison.score_model_1 == 0.5
        assert comparison.final == TIE

    def test_consistent_preference_wins_outright(self):
        comparison, _ = _compare(["A won\nwhy", "B won\nwhy"])
        assert comparison.score_model_1 == 1.0
        assert comparison.final == MODEL_1_WON

    def test_double_tie(self):
        comparison, _ = _compare(["Tie", "Tie"])
        assert comparison.score_model_1 == 0.5
        assert comparison.final == TIE

    def test_consistent_preference_for_model_2(self):
        comparison, _ = _compare(["B won", "A won"])
        assert comparison.score_model_1 == 0.0
        assert comparison.final == MODEL_2_WON

    def test_quarter_scores(self):
        comparison, _ = _compare(["Tie", "A won"])  # order 2 favors model_2
        assert comparison.score_model_1 == 0.25
        assert comparison.final == MODEL_2_WON

    def test_order_assignments_recorded(self):
        comparison, _ = _compare(["A won", "B won"])
        assert comparison.order_results[0].assignment == {"A": "chatgpt", "B": "gpt4"}
        assert comparison.order_results[1].assignment == {"A": "gpt4", "B": "chatgpt"}

    def test_unparseable_order_invalidates(self):
        comparison, mock = _compare(["Maybe", "Still maybe", "A won"])
        assert not comparison.valid
        assert comparison.score_model_1 is None and comparison.final is None
        assert mock.calls == 3  # two attempts order 1, one attempt order 2

    def test_temperature_guard(self):
        mock = MockChatClient(["A won", "B won"])
        config = ModelConfig(model_id="gpt-4", temperature=0.7)
        with pytest.raises(ValueError):
            judge_pair_debiased(mock, config, "r", "s1", "s2", "e")
        assert mock.calls == 0

    def test_label_symmetry(self):
        # content-sensitive mock: prefers whichever slot holds "alpha"
        class PreferAlpha:
            def complete(self, config, messages):
                text = messages[-1].content
                a_block = text.split("[The Start of Summary A]")[1].split(
                    "[The End of Summary A]"
                )[0]
                return ChatMessage("assistant", "A won" if "alpha" in a_block else "B won")

        judge_config = _JUDGE
        forward = judge_pair_debiased(
            PreferAlpha(), judge_config, "r", "alpha text", "beta text", "e"
        )
        backward = judge_pair_debiased(
            PreferAlpha(), judge_config, "r", "beta text", "alpha text", "e"
        )
        assert forward.score_model_1 + backward.score_model_1 == 1.0
        assert (forward.final == TIE) == (backward.final == TIE)

    def test_score_always_in_allowed_set(self):
        answers = ("A won", "B won", "Tie")
        for first in answers:
            for second in answers:
                comparison, _ = _compare([first, second])
                assert comparison.score_model_1 in (0.0, 0.25, 0.5, 0.75, 1.0)


class TestJudgeConsistency:
    def test_yes(self):
        mock = MockChatClient(["Yes\nAll PK values match."])
        verdict = judge_consistency(mock, _JUDGE, "ref", "cand", "NDA001")
        assert verdict.consistent is True
        assert verdict.explanation == "All PK values match."

    def test_no(self):
        mock = MockChatClient(["No\nThe summary omits Tmax."])
        verdict = judge_consistency(mock, _JUDGE, "ref", "cand", "NDA001")
        assert verdict.consistent is False

    def test_retry_then_unparseable(self):
        mock = MockChatClient(["Maybe", "Maybe"])
        with pytest.raises(ParseFailure):
            judge_consistency(mock, _JUDGE, "ref", "cand", "NDA001")
        assert mock.calls == 2

    def test_retry_recovers(self):
        mock = MockChatClient(["Maybe", "Yes\nok"])
        verdict = judge_consistency(mock, _JUDGE, "ref", "cand", "NDA001")
        assert verdict.consistent is True
        assert mock.calls == 2

    def test_temperature_guard(self):
        mock = MockChatClient(["Yes"])
        with pytest.raises(ValueError):
            judge_consistency(
                mock, ModelConfig(model_id="gpt-4", temperature=1.0), "r", "c", "e"
            )
        assert mock.calls == 0


def _comparison_with(final):
    comparison, _ = _compare(
        {"m1": ["A won", "B won"], "tie": ["Tie", "Tie"], "m2": ["B won", "A won"]}[final]
    )
    return comparison


class TestWinRate:
    def test_paper_shaped_split(self):
        comparisons = (
            [_comparison_with("m1")] * 43
            + [_comparison_with("tie")] * 45
            + [_comparison_with("m2")] * 12
        )
        rates = win_rate(comparisons)
        assert rates == {"model_1_rate": 0.43, "tie_rate": 0.45, "model_2_rate": 0.12}
        assert abs(sum(rates.values()) - 1.0) < 1e-12

    def test_all_tie(self):
        rates = win_rate([_comparison_with("tie")] * 5)
        assert rates == {"model_1_rate": 0.0, "tie_rate": 1.0, "model_2_rate": 0.0}

    def test_empty(self):
        with pytest.raises(EmptyInput):
            win_rate([])

    def test_invalid_excluded(self):
        invalid, _ = _compare(["Maybe", "Maybe", "Nope", "Nope"])
        with pytest.raises(EmptyInput):
            win_rate([invalid])
        rates = win_rate([invalid, _comparison_with("m1")])
        assert rates["model_1_rate"] == 1.0

"""LLM-as-judge evaluation: pairwise comparison and consistency checking.

The judge sees each pair twice, once per presentation order, and the two
verdicts are remapped to model identities and averaged; this neutralizes
the judge's position bias. Judge calls are locked to temperature 0 so a
rerun reproduces the same verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import mean

from .llm_client import ChatMessage, ModelConfig

# The bracketed headings are literal text inside a single prompt. By default
# the whole block is sent as one user message; set role="system" on the
# build functions to deliver it as a system message instead.
PAIRWISE_TEMPLATE = """[System]

Please evaluate the performance of two automatically generated summaries of food effect study related text and determine which summary provides the most accurate and concise information, similar to the reference summary provided below.

Begin by stating either "A won", "B won", or "Tie" on a single line. Following that, please provide an impartial and comprehensive explanation of your evaluation, taking care to avoid any potential biases and ensuring that the order in which the summaries are presented does not influence your judgment.

[Reference Summary]

{reference}

[The Start of Summary A]

{summary_a}

[The End of Summary A]

[The Start of Summary B]

{summary_b}

[The End of Summary B]"""

CONSISTENCY_TEMPLATE = """[Reference Summary]

{reference}

[Model-generated Summary]

{candidate}

[System]

To evaluate the model-generated summary of food effect study related text, please determine if it is factually consistent with the reference summary provided above.

Your evaluation should begin with a one-line answer of either "Yes" or "No". After that, please provide an unbiased and comprehensive explanation of your evaluation, taking care to avoid any potential biases."""

A_WON = "A_WON"
B_WON = "B_WON"
TIE = "TIE"
MODEL_1_WON = "MODEL_1_WON"
MODEL_2_WON = "MODEL_2_WON"

_STRIP_CHARS = " \t\r\n.,;:!?*_()[]{}<>\"'`“”‘’«»"

_PAIRWISE_VERDICTS = {"a won": A_WON, "b won": B_WON, "tie": TIE}
_CONSISTENCY_VERDICTS = {"yes": True, "no": False}


class JudgeError(Exception):
    pass


class ParseFailure(JudgeError):
    """First line of the judge response matched no known verdict."""

    def __init__(self, kind: str, first_line: str):
        super().__init__(f"cannot parse {kind} verdict from {first_line!r}")
        self.kind = kind
        self.first_line = first_line


class EmptyInput(JudgeError):
    pass


@dataclass(frozen=True)
class PairwiseVerdict:
    verdict: str  # A_WON | B_WON | TIE
    explanation: str
    raw_response: str


@dataclass(frozen=True)
class ConsistencyVerdict:
    consistent: bool
    explanation: str
    raw_response: str


@dataclass(frozen=True)
class OrderResult:
    """One presentation order: which model sat behind each display label."""

    assignment: dict[str, str]  # label "A"/"B" -> model identity
    verdict: PairwiseVerdict | None  # None when unparseable after retry
    raw_response: str

    def to_dict(self) -> dict:
        return {
            "assignment": dict(self.assignment),
            "verdict": self.verdict.verdict if self.verdict else None,
            "explanation": self.verdict.explanation if self.verdict else None,
            "raw_response": self.raw_response,
        }


@dataclass(frozen=True)
class DebiasedComparison:
    entry_id: str
    model_1: str
    model_2: str
    order_results: tuple[OrderResult, OrderResult]
    score_model_1: float | None
    final: str | None  # MODEL_1_WON | MODEL_2_WON | TIE
    valid: bool

    def to_dict(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "model_1": self.model_1,
            "model_2": self.model_2,
            "order_results": [o.to_dict() for o in self.order_results],
            "score_model_1": self.score_model_1,
            "final": self.final,
            "valid": self.valid,
        }


def _single_message(text: str, role: str) -> list[ChatMessage]:
    if role not in ("user", "system"):
        raise ValueError("judge prompts are delivered as user or system messages")
    return [ChatMessage(role, text)]


def build_pairwise_prompt(
    reference: str, summary_a: str, summary_b: str, *, role: str = "user"
) -> list[ChatMessage]:
    for name, value in (("reference", reference), ("summary_a", summary_a), ("summary_b", summary_b)):
        if not value:
            raise ValueError(f"{name} must be non-empty")
    text = PAIRWISE_TEMPLATE.format(
        reference=reference, summary_a=summary_a, summary_b=summary_b
    )
    return _single_message(text, role)


def build_consistency_prompt(
    reference: str, candidate: str, *, role: str = "user"
) -> list[ChatMessage]:
    for name, value in (("reference", reference), ("candidate", candidate)):
        if not value:
            raise ValueError(f"{name} must be non-empty")
    text = CONSISTENCY_TEMPLATE.format(reference=reference, candidate=candidate)
    return _single_message(text, role)


def parse_verdict(response: str, kind: str) -> PairwiseVerdict | ConsistencyVerdict:
    """Read the verdict off the first non-blank line of a judge response.

    The line is stripped of surrounding punctuation and quotes and
    case-folded before matching; everything after it is the explanation.
    """
    lines = response.splitlines()
    first_index = next((i for i, line in enumerate(lines) if line.strip()), None)
    if first_index is None:
        raise ParseFailure(kind, "")
    first_line = lines[first_index]
    normalized = " ".join(first_line.strip(_STRIP_CHARS).casefold().split())
    explanation = "\n".join(lines[first_index + 1 :]).strip()

    if kind == "pairwise":
        if normalized not in _PAIRWISE_VERDICTS:
            raise ParseFailure(kind, first_line)
        return PairwiseVerdict(_PAIRWISE_VERDICTS[normalized], explanation, response)
    if kind == "consistency":
        if normalized not in _CONSISTENCY_VERDICTS:
            raise ParseFailure(kind, first_line)
        return ConsistencyVerdict(_CONSISTENCY_VERDICTS[normalized], explanation, response)
    raise ValueError(f"unknown verdict kind {kind!r}")


def _require_deterministic(config: ModelConfig) -> None:
    if config.temperature != 0:
        raise ValueError(
            f"judge runs require temperature 0, got {config.temperature}"
        )


def _ask_with_retry(client, config, messages, kind):
    """One judge call, retried once verbatim on a parse failure.

    Returns (verdict-or-None, last raw response).
    """
    raw = ""
    for _ in range(2):
        reply = client.complete(config, messages)
        raw = reply.content
        try:
            return parse_verdict(raw, kind), raw
        except ParseFailure:
            continue
    return None, raw


def judge_pair_debiased(
    client,
    config: ModelConfig,
    reference: str,
    summary_1: str,
    summary_2: str,
    entry_id: str,
    *,
    model_1: str = "model_1",
    model_2: str = "model_2",
) -> DebiasedComparison:
    """Judge a pair in both presentation orders and average the outcomes.

    Per order, model_1 scores 1 for a win, 0.5 for a tie, 0 for a loss;
    score_model_1 is the mean over the two orders, so it always lands in
    {0, 0.25, 0.5, 0.75, 1}. If either order stays unparseable after the
    retry, the comparison is returned invalid and carries no score.
    """
    _require_deterministic(config)
    orders = (
        ({"A": model_1, "B": model_2}, summary_1, summary_2),
        ({"A": model_2, "B": model_1}, summary_2, summary_1),
    )
    results: list[OrderResult] = []
    for assignment, first, second in orders:
        messages = build_pairwise_prompt(reference, first, second)
        verdict, raw = _ask_with_retry(client, config, messages, "pairwise")
        results.append(OrderResult(assignment, verdict, raw))

    if any(result.verdict is None for result in results):
        return DebiasedComparison(
            entry_id, model_1, model_2, tuple(results), None, None, valid=False
        )

    def order_score(result: OrderResult) -> float:
        if result.verdict.verdict == TIE:
            return 0.5
        winner = result.assignment["A" if result.verdict.verdict == A_WON else "B"]
        return 1.0 if winner == model_1 else 0.0

    score = mean(order_score(result) for result in results)
    if score > 0.5:
        final = MODEL_1_WON
    elif score < 0.5:
        final = MODEL_2_WON
    else:
        final = TIE
    return DebiasedComparison(
        entry_id, model_1, model_2, tuple(results), score, final, valid=True
    )


def judge_consistency(
    client, config: ModelConfig, reference: str, candidate: str, entry_id: str
) -> ConsistencyVerdict:
    """One consistency judgment; raises ParseFailure if unparseable twice."""
    _require_deterministic(config)
    messages = build_consistency_prompt(reference, candidate)
    verdict, raw = _ask_with_retry(client, config, messages, "consistency")
    if verdict is None:
        raise ParseFailure("consistency", raw.splitlines()[0] if raw else "")
    return verdict


def win_rate(comparisons: list[DebiasedComparison]) -> dict:
    """Fractions of valid comparisons won by each side or tied."""
    valid = [c for c in comparisons if c.valid]
    if not valid:
        raise EmptyInput("no valid comparisons")
    total = len(valid)
    return {
        "model_1_rate": sum(1 for c in valid if c.final == MODEL_1_WON) / total,
        "tie_rate": sum(1 for c in valid if c.final == TIE) / total,
        "model_2_rate": sum(1 for c in valid if c.final == MODEL_2_WON) / total,
    }

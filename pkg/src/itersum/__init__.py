"""itersum: iterative-prompting summarization pipeline and its evaluation
apparatus (ROUGE, LLM-as-judge with order debiasing, blinded human
annotation, and agreement statistics)."""

from .corpus import (
    CorpusEntry,
    ValidationReport,
    count_sentences,
    estimate_tokens,
    load_corpus,
    save_corpus,
    validate_entry,
)
from .llm_client import (
    ChatMessage,
    HttpChatClient,
    MockChatClient,
    ModelConfig,
    SyntheticChatClient,
    complete,
)
from .metrics import RougeScore, RougeTable, rouge_l, rouge_n, score_transcripts, tokenize
from .prompting import (
    PromptScript,
    SessionTranscript,
    check_length_compliance,
    default_script,
    run_batch,
    run_session,
)

__version__ = "0.1.0"

__all__ = [
    "ChatMessage",
    "CorpusEntry",
    "HttpChatClient",
    "MockChatClient",
    "ModelConfig",
    "PromptScript",
    "RougeScore",
    "RougeTable",
    "SessionTranscript",
    "SyntheticChatClient",
    "ValidationReport",
    "check_length_compliance",
    "complete",
    "count_sentences",
    "default_script",
    "estimate_tokens",
    "load_corpus",
    "rouge_l",
    "rouge_n",
    "run_batch",
    "run_session",
    "save_corpus",
    "score_transcripts",
    "tokenize",
    "validate_entry",
]

"""Blinded human evaluation: task generation, voting, agreement statistics."""

from .agreement import (
    AgreementError,
    AgreementStats,
    DegenerateInput,
    InsufficientData,
    NoCommonEntries,
    NOT_SELECTED,
    ReliabilityMatrix,
    SELECTED,
    UndefinedAlpha,
    agreement_overlap,
    kendall_tau,
    krippendorff_alpha,
    task1_alpha_encoding,
)
from .tasks import (
    BlindingKey,
    CONSISTENCY,
    EvalItem,
    IncompleteTranscript,
    MissingEntry,
    MissingModel,
    PAIRWISE,
    PREFERENCE,
    PREFERENCE_LABELS,
    PAIRWISE_LABELS,
    TASKS,
    TaskGenerationError,
    consistency_key,
    derived_rng,
    generate_task1,
    generate_task2,
    generate_task3,
)
from .votes import (
    AnnotationRecord,
    CONSISTENCY_CHOICES,
    MODEL_1_WON,
    MODEL_2_WON,
    PAIRWISE_CHOICES,
    TIE,
    UnknownItem,
    ValidationError,
    VoteCountMismatch,
    VoteError,
    majority_vote_consistency,
    majority_vote_pairwise,
    unblind_pairwise_vote,
    validate_selection,
    vote_distribution_task1,
)

__all__ = [
    "AgreementError",
    "AgreementStats",
    "AnnotationRecord",
    "BlindingKey",
    "CONSISTENCY",
    "CONSISTENCY_CHOICES",
    "DegenerateInput",
    "EvalItem",
    "IncompleteTranscript",
    "InsufficientData",
    "MODEL_1_WON",
    "MODEL_2_WON",
    "MissingEntry",
    "MissingModel",
    "NoCommonEntries",
    "NOT_SELECTED",
    "PAIRWISE",
    "PAIRWISE_CHOICES",
    "PAIRWISE_LABELS",
    "PREFERENCE",
    "PREFERENCE_LABELS",
    "ReliabilityMatrix",
    "SELECTED",
    "TASKS",
    "TIE",
    "TaskGenerationError",
    "UndefinedAlpha",
    "UnknownItem",
    "ValidationError",
    "VoteCountMismatch",
    "VoteError",
    "agreement_overlap",
    "consistency_key",
    "derived_rng",
    "generate_task1",
    "generate_task2",
    "generate_task3",
    "kendall_tau",
    "krippendorff_alpha",
    "majority_vote_consistency",
    "majority_vote_pairwise",
    "task1_alpha_encoding",
    "unblind_pairwise_vote",
    "validate_selection",
    "vote_distribution_task1",
]

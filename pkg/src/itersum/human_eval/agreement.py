"""Inter-annotator agreement statistics: Krippendorff's alpha, Kendall tau-b,
and plain verdict overlap.

Alpha uses the nominal metric over a units x annotators matrix with missing
cells allowed; tau-b is the tie-corrected rank correlation.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations

from .tasks import BlindingKey
from .votes import AnnotationRecord, UnknownItem

SELECTED = "SELECTED"
NOT_SELECTED = "NOT_SELECTED"


class AgreementError(Exception):
    pass


class UndefinedAlpha(AgreementError):
    """Expected disagreement is zero: every observed value is identical."""


class InsufficientData(AgreementError):
    pass


class DegenerateInput(AgreementError):
    pass


class NoCommonEntries(AgreementError):
    pass


def krippendorff_alpha(matrix) -> float:
    """Nominal Krippendorff's alpha over rows = units, columns = annotators.

    Cells may be None (missing); units with fewer than two values drop out.
    alpha = 1 - D_o/D_e with the usual pairable-value weighting. Raises
    UndefinedAlpha when D_e = 0 rather than reporting a misleading 1.0.
    """
    units = [[v for v in row if v is not None] for row in matrix]
    units = [u for u in units if len(u) >= 2]
    if not units:
        raise InsufficientData("no unit has two or more values")
    n = sum(len(u) for u in units)

    observed = 0.0
    for unit in units:
        disagreements = sum(1 for a, b in combinations(unit, 2) if a != b)
        observed += 2 * disagreements / (len(unit) - 1)  # ordered pairs
    observed /= n

    pooled = Counter(v for unit in units for v in unit)
    expected = sum(count * (n - count) for count in pooled.values()) / (n * (n - 1))
    if expected == 0:
        raise UndefinedAlpha("all observed values are identical")
    return 1.0 - observed / expected


def kendall_tau(pairs) -> float:
    """Kendall's tau-b over (x, y) pairs, correcting for ties in either rank."""
    pairs = list(pairs)
    n = len(pairs)
    if n < 2:
        raise DegenerateInput("need at least two pairs")
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        raise DegenerateInput("all x or all y values are identical")

    concordant = discordant = 0
    for (x1, y1), (x2, y2) in combinations(pairs, 2):
        product = (x1 > x2) - (x1 < x2)
        product *= (y1 > y2) - (y1 < y2)
        if product > 0:
            concordant += 1
        elif product < 0:
            discordant += 1

    n0 = n * (n - 1) // 2
    tied_x = sum(t * (t - 1) // 2 for t in Counter(xs).values())
    tied_y = sum(t * (t - 1) // 2 for t in Counter(ys).values())
    return (concordant - discordant) / math.sqrt((n0 - tied_x) * (n0 - tied_y))


def agreement_overlap(human: dict, judge: dict) -> float:
    """Fraction of shared keys on which the two verdict maps agree."""
    common = set(human) & set(judge)
    if not common:
        raise NoCommonEntries("verdict maps share no entries")
    return sum(1 for k in common if human[k] == judge[k]) / len(common)


@dataclass(frozen=True)
class ReliabilityMatrix:
    """Units x annotators nominal values, with stable orderings for hashing."""

    annotators: tuple[str, ...]
    units: tuple[tuple[str, str], ...]  # (entry_id, turn_name)
    values: tuple[tuple[str | None, ...], ...]

    def rows(self) -> list[list[str | None]]:
        return [list(row) for row in self.values]

    def to_dict(self) -> dict:
        return {
            "annotators": list(self.annotators),
            "units": [list(u) for u in self.units],
            "values": [list(row) for row in self.values],
        }


def task1_alpha_encoding(
    records: list[AnnotationRecord], key: BlindingKey
) -> tuple[ReliabilityMatrix, ReliabilityMatrix]:
    """Binary reliability data for preference votes: one unit per (entry, turn).

    An annotator's value for a unit is SELECTED when the unblinded turn sits
    in their most (resp. least) set, NOT_SELECTED otherwise; an annotator
    with no record for the item is missing on all three of its units. Empty
    least sets therefore encode as NOT_SELECTED across the entry's turns.
    """
    annotators = tuple(sorted({r.assessor_id for r in records}))
    turn_names = sorted({t for origins in key.origins.values() for t in origins.values()})

    selected: dict[str, dict[str, tuple[set, set]]] = {}
    for record in records:
        if record.item_id not in key.origins:
            raise UnknownItem(f"no key entry for item {record.item_id!r}")
        origins = key.origins[record.item_id]
        most = {origins[label] for label in record.selection["most"]}
        least = {origins[label] for label in record.selection["least"]}
        selected.setdefault(record.item_id, {})[record.assessor_id] = (most, least)

    units: list[tuple[str, str]] = []
    rows_most: list[tuple] = []
    rows_least: list[tuple] = []
    for item_id in sorted(selected, key=lambda i: key.entry_ids[i]):
        entry_id = key.entry_ids[item_id]
        for turn in turn_names:
            units.append((entry_id, turn))
            row_m, row_l = [], []
            for annotator in annotators:
                picked = selected[item_id].get(annotator)
                if picked is None:
                    row_m.append(None)
                    row_l.append(None)
                else:
                    row_m.append(SELECTED if turn in picked[0] else NOT_SELECTED)
                    row_l.append(SELECTED if turn in picked[1] else NOT_SELECTED)
            rows_most.append(tuple(row_m))
            rows_least.append(tuple(row_l))

    units_tuple = tuple(units)
    return (
        ReliabilityMatrix(annotators, units_tuple, tuple(rows_most)),
        ReliabilityMatrix(annotators, units_tuple, tuple(rows_least)),
    )


@dataclass
class AgreementStats:
    """Agreement panel for the report; None fields carry a note explaining why."""

    alpha_most: float | None = None
    alpha_least: float | None = None
    alpha_pairwise: float | None = None
    alpha_consistency: float | None = None
    alpha_human_judge: float | None = None
    tau_most: float | None = None
    tau_least: float | None = None
    human_judge_overlap: float | None = None
    notes: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "alpha_most": self.alpha_most,
            "alpha_least": self.alpha_least,
            "alpha_pairwise": self.alpha_pairwise,
            "alpha_consistency": self.alpha_consistency,
            "alpha_human_judge": self.alpha_human_judge,
            "tau_most": self.tau_most,
            "tau_least": self.tau_least,
            "human_judge_overlap": self.human_judge_overlap,
            "notes": dict(sorted(self.notes.items())),
        }

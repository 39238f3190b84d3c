"""Voice-control surface: a fixed utterance lexicon parsed into typed
commands, plus recognition-rate bookkeeping.

Recognition itself (audio -> text) is upstream and out of scope; this
layer is deterministic by construction. Unrecognized text is a
first-class outcome (`parse_command` returns None), never an error.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum

from .csg import OpKind


class TransformKind(Enum):
    TRANSLATE = "translate"
    ROTATE = "rotate"
    SCALE = "scale"


@dataclass(frozen=True, slots=True)
class EnterSelection:
    pass


@dataclass(frozen=True, slots=True)
class Append:
    pass


@dataclass(frozen=True, slots=True)
class Remove:
    pass


@dataclass(frozen=True, slots=True)
class Group:
    pass


@dataclass(frozen=True, slots=True)
class Ungroup:
    pass


@dataclass(frozen=True, slots=True)
class SetTransform:
    kind: TransformKind


@dataclass(frozen=True, slots=True)
class ChangeOperator:
    kind: OpKind


Command = EnterSelection | Append | Remove | Group | Ungroup | SetTransform | ChangeOperator


def normalize_utterance(text: str) -> str:
    """Trim, lowercase, collapse internal whitespace."""
    return " ".join(text.lower().split())


# the full lexicon with the explanations shown on the information board
LEXICON: tuple[tuple[str, Command, str], ...] = (
    ("select", EnterSelection(), "enter selection mode"),
    ("append", Append(), "add the highlighted primitives to the selection"),
    ("remove", Remove(), "drop the highlighted primitives from the selection"),
    ("group", Group(), "group all selected primitives"),
    ("un-group", Ungroup(), "dissolve a group"),
    ("translate", SetTransform(TransformKind.TRANSLATE), "enter manipulation mode: translate"),
    ("rotate", SetTransform(TransformKind.ROTATE), "enter manipulation mode: rotate"),
    ("scale", SetTransform(TransformKind.SCALE), "enter manipulation mode: scale"),
    ("change to union", ChangeOperator(OpKind.UNION), "set the grabbed tree node to union"),
    ("change to inter", ChangeOperator(OpKind.INTERSECTION), "set the grabbed tree node to intersection"),
    ("change to sub", ChangeOperator(OpKind.DIFFERENCE), "set the grabbed tree node to difference"),
)

_TABLE: dict[str, Command] = {utterance: cmd for utterance, cmd, _ in LEXICON}
# '-' and ' ' are interchangeable in "un-group"
_TABLE["un group"] = Ungroup()


def parse_command(utterance: str) -> Command | None:
    """Exact-match the normalized utterance; None means not recognized.

    Total over all strings: anything outside the 11-entry lexicon
    (modulo normalization) maps to None.
    """
    return _TABLE.get(normalize_utterance(utterance))


def command_explanations() -> tuple[tuple[str, str], ...]:
    """(utterance, explanation) pairs, all 11, in fixed order."""
    return tuple((utterance, expl) for utterance, _, expl in LEXICON)


# --------------------------------------------------------------------------
# recognition statistics


class EmptyInputError(ValueError):
    pass


class ZeroTotalError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class RecognitionRecord:
    user_label: str
    recognized_count: int
    unrecognized_count: int

    def __post_init__(self) -> None:
        if self.recognized_count < 0 or self.unrecognized_count < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return self.recognized_count + self.unrecognized_count


@dataclass(frozen=True, slots=True)
class StatsReport:
    user_labels: tuple[str, ...]
    per_user_rate: tuple[float, ...]  # percentages, 1 decimal
    mean_rate: float  # unweighted mean of per-user rates, 1 decimal
    total_recognized: int
    total_unrecognized: int


def _round1(x: float) -> float:
    """Round half up to 1 decimal (76.65 -> 76.7, not banker's 76.6)."""
    return float(Decimal(repr(x)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def recognition_stats(records: list[RecognitionRecord]) -> StatsReport:
    """Per-user recognition percentages and their unweighted mean.

    The mean averages the already-rounded per-user rates; pooling all
    counts into one ratio is a different statistic and is not used.
    """
    if not records:
        raise EmptyInputError("no recognition records")
    for rec in records:
        if rec.total == 0:
            raise ZeroTotalError(f"record {rec.user_label!r} has zero total utterances")
    rates = tuple(_round1(rec.recognized_count / rec.total * 100.0) for rec in records)
    mean = _round1(math.fsum(rates) / len(rates))
    return StatsReport(
        user_labels=tuple(rec.user_label for rec in records),
        per_user_rate=rates,
        mean_rate=mean,
        total_recognized=sum(rec.recognized_count for rec in records),
        total_unrecognized=sum(rec.unrecognized_count for rec in records),
    )


def read_records_csv(text: str) -> list[RecognitionRecord]:
    """Parse 'user_label,recognized,unrecognized' rows (no header)."""
    records: list[RecognitionRecord] = []
    for row_no, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ValueError(f"row {row_no}: expected 3 fields, got {len(row)}")
        label = row[0].strip()
        try:
            recognized = int(row[1])
            unrecognized = int(row[2])
        except ValueError as exc:
            raise ValueError(f"row {row_no}: counts must be integers") from exc
        try:
            records.append(RecognitionRecord(label, recognized, unrecognized))
        except ValueError as exc:
            raise ValueError(f"row {row_no}: {exc}") from exc
    return records

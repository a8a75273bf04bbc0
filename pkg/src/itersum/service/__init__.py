"""CLI orchestration, HTTP annotation service, and report assembly."""

from .report import MetricReport, build_report, render_text
from .store import (
    DataStore,
    Duplicate,
    StoreError,
    TaskNotGenerated,
    UnknownAssessor,
    UnknownItemId,
    UnknownTask,
    resolve_task,
)

__all__ = [
    "DataStore",
    "Duplicate",
    "MetricReport",
    "StoreError",
    "TaskNotGenerated",
    "UnknownAssessor",
    "UnknownItemId",
    "UnknownTask",
    "build_report",
    "render_text",
    "resolve_task",
]

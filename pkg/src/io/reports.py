from __future__ import annotations
"""Transcript and summary writers.

Output files are written by a single collector in trial order with sorted
keys and fixed float formatting so two runs with the same seed produce
byte-identical files.
"""
import csv
import io
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from ..core.logging_utils import JsonLogger
from ..core.models import CaseStudyTranscript, VerifierTranscript

Transcript = Union[VerifierTranscript, CaseStudyTranscript]


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.12g}"


def write_transcripts(path: Path, transcripts: Iterable[Transcript]) -> Path:
    writer = JsonLogger.for_file(path, stamp=False)
    writer.truncate()
    writer.write_many({"trial": i, **t.to_dict()} for i, t in enumerate(transcripts))
    return writer.base


def counter_columns(transcripts: Sequence[VerifierTranscript]) -> List[str]:
    keys: List[str] = []
    for t in transcripts[:1]:
        keys = sorted(t.counters, key=lambda k: tuple(int(p) for p in k.split(":")))
    return [f"K_{k.replace(':', '_')}" for k in keys]


def summary_rows(transcripts: Sequence[Transcript]) -> List[List[str]]:
    if not transcripts:
        return [["trial", "decision"]]
    first = transcripts[0]
    if isinstance(first, VerifierTranscript):
        keys = sorted(first.counters, key=lambda k: tuple(int(p) for p in k.split(":")))
        rows = [["trial", "decision", *counter_columns(transcripts), "target_fidelity"]]  # type: ignore[arg-type]
        for i, t in enumerate(transcripts):
            assert isinstance(t, VerifierTranscript)
            rows.append([str(i), "accept" if t.decision else "reject",
                         *(str(t.counters.get(k, 0)) for k in keys), _fmt(t.target_fidelity)])
        return rows
    rows = [["trial", "decision", "computation_register", "bad_escaped", "target_fidelity"]]
    for i, t in enumerate(transcripts):
        assert isinstance(t, CaseStudyTranscript)
        rows.append([str(i), "accept" if t.decision else "reject", str(t.computation_register),
                     str(t.bad_escaped).lower(), _fmt(t.target_fidelity)])
    return rows


def rows_to_csv(rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def write_csv(path: Path, rows: Sequence[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(rows), encoding="utf-8")
    return path


def outcome_rows(passed: Sequence[bool], syndromes: Sequence[str], outcomes: Sequence[str]) -> List[List[str]]:
    rows = [["shot", "passed", "syndrome", "outcomes"]]
    for i, (p, s, o) in enumerate(zip(passed, syndromes, outcomes)):
        rows.append([str(i), str(bool(p)).lower(), s, o])
    return rows


def key_value_rows(data: Dict[str, Any]) -> List[List[str]]:
    rows = [["key", "value"]]
    for key, value in data.items():
        rows.append([key, _fmt(value) if isinstance(value, float) else str(value)])
    return rows

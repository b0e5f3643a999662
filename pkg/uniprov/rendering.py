"""
Deterministic text and JSON output for the command line.
"""

from typing import Any, Dict, List, Optional, Sequence

from uniprov.annotations import to_witness_basis
from uniprov.bridge import IdDatabase
from uniprov.data.model import SnapshotDiff
from uniprov.query.evaluator import AnnotatedResult, ResultRow
from uniprov.questions.model import Answer, Question


def render_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Column-aligned table, cells joined by ``" | "``, trailing blanks stripped."""
    widths = [len(name) for name in header]
    for row in rows:
        widths = [max(width, len(cell)) for width, cell in zip(widths, row)]
    lines = [
        " | ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
        for line in [list(header), *rows]
    ]
    return "\n".join(lines)


def _provenance_cell(row: ResultRow, provenance: str, idb: Optional[IdDatabase]) -> str:
    if provenance == "how":
        return str(idb.lift(row.polynomial) if idb is not None else row.polynomial)
    if provenance == "why":
        basis = to_witness_basis(row.polynomial)
        return str(idb.lift_witnesses(basis) if idb is not None else basis)
    # where
    parts = []
    for attribute, cells in row.where.items():
        if idb is not None:
            files = idb.records_for(cell.id for cell in cells)
            parts.append(f"{attribute}: {', '.join(r.file_id for r in files)}")
        else:
            parts.append(f"{attribute}: {', '.join(str(c) for c in sorted(cells))}")
    return "; ".join(parts)


def render_result(
    result: AnnotatedResult, provenance: Optional[str] = None, idb: Optional[IdDatabase] = None
) -> str:
    """Result table, optionally with a provenance column.

    ``provenance`` is one of how, why, where or what; ``idb`` lifts the
    column to file level. What-provenance is printed below the table.
    """
    header = list(result.schema.attribute_names)
    with_column = provenance in ("how", "why", "where")
    if with_column:
        header.append(provenance)  # type: ignore[arg-type]
    rows = []
    for row in result.rows:
        cells = [str(value) for value in row.values]
        if with_column:
            cells.append(_provenance_cell(row, provenance, idb))  # type: ignore[arg-type]
        rows.append(cells)
    text = render_table(header, rows)
    if provenance == "what":
        types = "\n".join(f"{name}: {origin}" for name, origin in result.type_map.items())
        text = f"{text}\n\nwhat:\n{types}"
    return text


def result_document(result: AnnotatedResult) -> Dict[str, Any]:
    return {
        "attributes": list(result.schema.attribute_names),
        "rows": [
            {
                "values": [str(value) for value in row.values],
                "how": str(row.polynomial),
                "why": [
                    [str(pid) for pid in witness]
                    for witness in to_witness_basis(row.polynomial).sorted_witnesses()
                ],
            }
            for row in result.rows
        ],
    }


def envelope(question: Question, answer: Answer) -> Dict[str, Any]:
    """Machine-readable answer: ``{"kind", "scope", "answer"}``."""
    return {
        "kind": question.kind.value,
        "scope": question.scope.value,
        "answer": answer.to_dict(),
    }


def render_answer(question: Question, answer: Answer) -> str:
    return f"{question.kind.value} ({question.scope.value}):\n{answer.render()}"


def render_diff(diff: SnapshotDiff) -> str:
    lines: List[str] = [f"t{diff.t_from} -> t{diff.t_to}"]
    if diff.is_empty:
        lines.append("no changes")
        return "\n".join(lines)
    for relation, added in diff.added.items():
        for item in added:
            values = ", ".join(str(v) for v in item.values)
            lines.append(f"+ {relation} {item.id}: ({values})")
    for relation, changed in diff.changed.items():
        for change in changed:
            before = ", ".join(str(v) for v in change.before.values)
            after = ", ".join(str(v) for v in change.after.values)
            lines.append(
                f"~ {relation} {change.before.id} -> {change.after.id}: ({before}) -> ({after})"
            )
    return "\n".join(lines)

"""
JSON document IO

Documents are encoded with orjson. A single document is replaced through a
temporary file and a rename; a batch is written into a fresh directory that
the caller switches to with one such replace.
"""

import os
import shutil
from pathlib import Path
from tempfile import NamedTemporaryFile, mkdtemp
from typing import Any, Mapping

import orjson

from uniprov.common.logging import get_logger

logger = get_logger(__name__)

_DUMP_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_APPEND_NEWLINE


def dumps(document: Any) -> bytes:
    """Encode a document as indented JSON bytes with a trailing newline."""
    return orjson.dumps(document, option=_DUMP_OPTIONS)


def dumps_text(document: Any) -> str:
    return dumps(document).decode("utf-8")


def loads(data: bytes | str) -> Any:
    """Decode JSON bytes or text.

    Raises:
        ValueError: If the input is not valid JSON.
    """
    try:
        return orjson.loads(data)
    except orjson.JSONDecodeError as exc:
        raise ValueError(f"Invalid JSON document: {exc}") from exc


def read_document(path: Path) -> Any:
    return loads(Path(path).read_bytes())


def _write_synced(path: Path, data: bytes) -> None:
    with open(path, "wb") as stream:
        stream.write(data)
        stream.flush()
        os.fsync(stream.fileno())


def write_document(path: Path, document: Any) -> None:
    """Replace one document atomically.

    The document is written to a temporary file next to ``path`` and renamed
    over it, so readers see either the old or the new content.
    """
    path = Path(path)
    data = dumps(document)
    with NamedTemporaryFile(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False
    ) as tmp:
        tmp_name = tmp.name
    try:
        _write_synced(Path(tmp_name), data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    logger.debug("Wrote %s", path)


def write_generation(parent: Path, prefix: str, documents: Mapping[str, Any]) -> Path:
    """Write a batch of documents into a new directory under ``parent``.

    Nothing outside the new directory is touched, so a batch becomes visible
    only once the caller points at it (see :func:`write_document`). If any
    document fails to encode or write, the directory is removed.

    Args:
        parent: Directory to create the generation in
        prefix: Name prefix of the generation directory
        documents: Mapping of file name to JSON-serializable document

    Returns:
        Path: The complete generation directory
    """
    generation = Path(mkdtemp(dir=parent, prefix=prefix))
    try:
        for name, document in documents.items():
            _write_synced(generation / name, dumps(document))
    except BaseException:
        shutil.rmtree(generation, ignore_errors=True)
        raise
    logger.debug("Wrote %d documents to %s", len(documents), generation)
    return generation

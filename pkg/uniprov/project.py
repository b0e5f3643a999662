"""
Project directory holding the persistent uniprov state.

A project is a directory with a manifest and one state directory holding the
versioned database, the ID database and the workflow graph. Mutations happen
under a file lock. A save writes a new state directory and then replaces the
manifest, which names the current one, so a project is never seen half saved.
"""

import shutil
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Union

from filelock import FileLock, Timeout

from uniprov import __version__
from uniprov.bridge import IdDatabase
from uniprov.common.errors import ProjectError, ProjectLockedError, ProvenanceError
from uniprov.common.jsonio import read_document, write_document, write_generation
from uniprov.common.logging import get_logger
from uniprov.data.model import VersionedDatabase
from uniprov.questions.model import Context
from uniprov.workflow.graph import ProvGraph

logger = get_logger(__name__)

FORMAT_NAME = "uniprov-project"
FORMAT_VERSION = 1

MANIFEST_FILE = "uniprov.json"
DATABASE_FILE = "database.json"
IDDB_FILE = "iddb.json"
GRAPH_FILE = "graph.json"
LOCK_FILE = ".uniprov.lock"
STATE_PREFIX = "state-"


class Project:
    """Loaded project state. Use :meth:`init` or :meth:`open` to obtain one."""

    def __init__(
        self,
        root: Path,
        database: VersionedDatabase,
        idb: IdDatabase,
        graph: ProvGraph,
        state: Optional[str] = None,
    ):
        self.root = root
        self.database = database
        self.idb = idb
        self.graph = graph
        self.state = state

    @property
    def state_dir(self) -> Path:
        if self.state is None:
            raise ProjectError(f"project {self.root} has not been saved")
        return self.root / self.state

    def manifest(self) -> Dict[str, Any]:
        return {
            "format": FORMAT_NAME,
            "format_version": FORMAT_VERSION,
            "tool_version": __version__,
            "state": self.state,
        }

    @classmethod
    def init(cls, root: Union[str, Path], versioned: bool = False) -> "Project":
        """Create an empty project in ``root`` (created if missing).

        Raises:
            ProjectError: If ``root`` already holds a project.
        """
        root = Path(root)
        if (root / MANIFEST_FILE).exists():
            raise ProjectError(f"{root} already contains a uniprov project")
        try:
            root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ProjectError(f"cannot create project directory {root}: {exc}") from exc
        project = cls(root, VersionedDatabase(versioned=versioned), IdDatabase(), ProvGraph())
        project.save()
        logger.info("Initialized project in %s", root)
        return project

    @classmethod
    def open(cls, root: Union[str, Path]) -> "Project":
        """Load and validate every document of the project in ``root``.

        Raises:
            ProjectError: If the directory is not a project, the manifest does
                not match this tool, or a document fails to load.
        """
        root = Path(root)
        manifest_path = root / MANIFEST_FILE
        if not manifest_path.exists():
            raise ProjectError(f"{root} is not a uniprov project (run init first)")
        manifest = cls._read(manifest_path)
        if not isinstance(manifest, dict) or manifest.get("format") != FORMAT_NAME:
            raise ProjectError(f"{manifest_path} is not a uniprov manifest")
        if manifest.get("format_version") != FORMAT_VERSION:
            raise ProjectError(
                f"project format version {manifest.get('format_version')} is not supported "
                f"(expected {FORMAT_VERSION})"
            )
        state = manifest.get("state")
        if not isinstance(state, str) or not state.startswith(STATE_PREFIX) or "/" in state:
            raise ProjectError(f"{manifest_path} names no valid state directory")
        try:
            database = VersionedDatabase.from_document(cls._read(root / state / DATABASE_FILE))
            idb = IdDatabase.from_document(cls._read(root / state / IDDB_FILE))
            graph = ProvGraph.deserialize(cls._read(root / state / GRAPH_FILE))
        except ProjectError:
            raise
        except ProvenanceError as exc:
            raise ProjectError(f"invalid project state in {root}: {exc}") from exc
        return cls(root, database, idb, graph, state)

    @staticmethod
    def _read(path: Path) -> Any:
        try:
            return read_document(path)
        except FileNotFoundError:
            raise ProjectError(f"missing project document: {path}") from None
        except (OSError, ValueError) as exc:
            raise ProjectError(f"cannot read {path}: {exc}") from exc

    def save(self) -> None:
        """Write a new state directory and switch the manifest to it.

        Replacing the manifest is the single commit point: until it succeeds,
        the project still opens with the previous state. Superseded state
        directories are removed afterwards.
        """
        generation = write_generation(
            self.root,
            STATE_PREFIX,
            {
                DATABASE_FILE: self.database.to_document(),
                IDDB_FILE: self.idb.to_document(),
                GRAPH_FILE: self.graph.serialize(),
            },
        )
        previous, self.state = self.state, generation.name
        try:
            write_document(self.root / MANIFEST_FILE, self.manifest())
        except BaseException:
            self.state = previous
            shutil.rmtree(generation, ignore_errors=True)
            raise
        for stale in self.root.glob(f"{STATE_PREFIX}*"):
            if stale.name != self.state:
                shutil.rmtree(stale, ignore_errors=True)
        logger.info("Saved project %s at t%d", self.root, self.database.current_version)

    def context(self) -> Context:
        return Context(database=self.database, graph=self.graph, idb=self.idb)


@contextmanager
def locked(root: Union[str, Path], timeout: float) -> Iterator[None]:
    """Hold the project lock for the duration of the block.

    Raises:
        ProjectLockedError: If the lock is not acquired within ``timeout`` seconds.
    """
    root = Path(root)
    if not root.is_dir():
        raise ProjectError(f"{root} is not a uniprov project (run init first)")
    lock = FileLock(str(root / LOCK_FILE), timeout=timeout)
    try:
        with lock:
            yield
    except Timeout:
        raise ProjectLockedError(
            f"project {root} is locked by another process (waited {timeout:g}s)"
        ) from None

"""
uniprov command line

Every command works on a project directory (``--project``, default from
UNIPROV_PROJECT or the current directory). Domain errors are reported as a
single ``error: <message>`` line on stderr; the exit status is 1 for user
errors and 2 for query and data errors.
"""

import csv
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import click

from uniprov import __version__
from uniprov.common.config import (
    ENV_DEBUG,
    ENV_LOCK_TIMEOUT,
    ENV_PROJECT,
    ENV_VERSIONED,
    Settings,
    load_settings,
)
from uniprov.common.errors import (
    InputFileError,
    ProvenanceError,
    SchemaError,
    SubjectError,
    UnknownTupleError,
)
from uniprov.common.jsonio import dumps_text, read_document, write_document
from uniprov.common.logging import configure_logging, get_logger
from uniprov.bridge import hash_file
from uniprov.data.model import Schema
from uniprov.data.types import ProvenanceId
from uniprov.project import Project, locked
from uniprov.query.evaluator import evaluate
from uniprov.query.parser import parse_query
from uniprov.query.why_not import parse_expectation, why_not
from uniprov.questions.model import (
    EntitySubject,
    ExpectationSubject,
    Granularity,
    Question,
    QuestionKind,
    RowSubject,
    Scope,
    Subject,
    WhyNotAnswer,
)
from uniprov.questions.scopes import ask, check_supported, get_scope_names
from uniprov.rendering import (
    envelope,
    render_answer,
    render_diff,
    render_result,
    result_document,
)
from uniprov.workflow.graph import ProvGraph

logger = get_logger(__name__)

_KIND_CHOICES = [kind.value for kind in QuestionKind] + ["why-not"]
_GRANULARITY = click.Choice([g.value for g in Granularity])
_FORMAT = click.Choice(["text", "json"])


class _State:
    """Per-invocation settings passed to every command."""

    def __init__(self, settings: Settings):
        self.settings = settings

    @property
    def root(self) -> Path:
        return self.settings.project

    @contextmanager
    def project(self, mutate: bool = False) -> Iterator[Project]:
        with locked(self.root, self.settings.lock_timeout):
            project = Project.open(self.root)
            yield project
            if mutate:
                project.save()


pass_state = click.make_pass_decorator(_State)


def _emit(text: str) -> None:
    click.echo(text.rstrip("\n"))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--project",
    "-C",
    "project_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help=f"Project directory (env: {ENV_PROJECT}, default: current directory)",
)
@click.option(
    "--debug", is_flag=True, default=None, help=f"Enable debug logging (env: {ENV_DEBUG})"
)
@click.option(
    "--lock-timeout",
    type=click.FloatRange(min=0),
    default=None,
    help=f"Seconds to wait for the project lock (env: {ENV_LOCK_TIMEOUT}, default: 5)",
)
@click.version_option(__version__, prog_name="uniprov")
@click.pass_context
def cli(
    ctx: click.Context,
    project_dir: Optional[Path],
    debug: Optional[bool],
    lock_timeout: Optional[float],
) -> None:
    """Unified workflow and data provenance."""
    settings: Settings = ctx.obj if isinstance(ctx.obj, Settings) else load_settings()
    updates = {}
    if project_dir is not None:
        updates["project"] = project_dir
    if debug:
        updates["debug"] = True
    if lock_timeout is not None:
        updates["lock_timeout"] = lock_timeout
    settings = settings.model_copy(update=updates)
    configure_logging(debug=settings.debug)
    ctx.obj = _State(settings)


# -- project state --------------------------------------------------------------


@cli.command()
@click.argument("directory", required=False, type=click.Path(file_okay=False, path_type=Path))
@click.option(
    "--versioned/--no-versioned",
    default=None,
    help=f"Render every provenance id with its timestamp (env: {ENV_VERSIONED})",
)
@pass_state
def init(state: _State, directory: Optional[Path], versioned: Optional[bool]) -> None:
    """Create a new project in DIRECTORY."""
    root = directory if directory is not None else state.root
    mode = state.settings.versioned if versioned is None else versioned
    root.mkdir(parents=True, exist_ok=True)
    with locked(root, state.settings.lock_timeout):
        Project.init(root, versioned=mode)
    _emit(f"initialized project in {root}")


def _read_csv(path: Path) -> Tuple[List[str], List[List[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as stream:
            rows = [row for row in csv.reader(stream) if row]
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise InputFileError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputFileError(f"{path} has no header row")
    return [name.strip() for name in rows[0]], rows[1:]


@cli.command("load-csv")
@click.option("--relation", required=True, help="Target relation")
@click.option(
    "--schema",
    "schema_text",
    help='Attribute list, e.g. "sample_id:int,voltage_1:decimal(3,1)"; needed for a new relation',
)
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@pass_state
def load_csv(state: _State, relation: str, schema_text: Optional[str], file: Path) -> None:
    """Insert the rows of a CSV file (with header) into a relation."""
    with state.project(mutate=True) as project:
        database = project.database
        if relation in database.relation_names:
            schema = database.schema(relation)
            if schema_text is not None and Schema.parse(relation, schema_text) != schema:
                raise SchemaError(f"--schema does not match the schema of {relation}")
        else:
            if schema_text is None:
                raise SchemaError(f"relation {relation} is new; --schema is required")
            schema = Schema.parse(relation, schema_text)
            database.define_relation(schema)
        header, rows = _read_csv(file)
        if sorted(header) != sorted(schema.attribute_names):
            raise SchemaError(
                f"CSV header ({', '.join(header)}) does not match {relation} "
                f"({', '.join(schema.attribute_names)})"
            )
        order = [header.index(name) for name in schema.attribute_names]
        ids = []
        for line, row in enumerate(rows, start=2):
            if len(row) != len(header):
                raise InputFileError(f"{file}:{line}: expected {len(header)} fields")
            ids.append(database.insert_tuple(relation, [row[i] for i in order]))
    _emit(f"loaded {len(ids)} tuples into {relation}: {', '.join(str(pid) for pid in ids)}")


@cli.command()
@click.option("--relation", required=True, help="Relation of the tuple")
@click.option("--id", "base", required=True, help="Base identifier of the tuple, e.g. r2")
@click.option("--values", required=True, help='Comma-separated new values, e.g. "2,41.033,1.4"')
@pass_state
def update(state: _State, relation: str, base: str, values: str) -> None:
    """Store a new version of a tuple; the database version advances."""
    parsed = next(csv.reader([values]), [])
    with state.project(mutate=True) as project:
        pid = project.database.update_tuple(relation, ProvenanceId.parse(base).base, parsed)
    _emit(f"updated {base} -> {pid}")


def _expand_ids(project: Project, relation: str, ids_text: str) -> List[ProvenanceId]:
    """Pin ids to stored versions; a bare base stands for every version of the tuple."""
    expanded: List[ProvenanceId] = []
    for text in (part.strip() for part in ids_text.split(",")):
        if not text:
            continue
        pid = ProvenanceId.parse(text)
        versions = project.database.stored_ids(relation, pid.base)
        if pid.version is None:
            expanded.extend(versions)
        elif pid in versions:
            expanded.append(pid)
        else:
            raise UnknownTupleError(f"relation {relation} has no tuple {pid}")
    return expanded


@cli.command("register-file")
@click.option("--relation", required=True, help="Relation the file's tuples were loaded into")
@click.option("--ids", "ids_text", required=True, help="Comma-separated tuple ids, e.g. r1,r2")
@click.option("--entity", help="Workflow entity representing the file")
@click.option("--file-id", help="Explicit file id (default: f<n>)")
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@pass_state
def register_file(
    state: _State,
    relation: str,
    ids_text: str,
    entity: Optional[str],
    file_id: Optional[str],
    file: Path,
) -> None:
    """Record FILE in the ID database as the source of tuple ids."""
    try:
        content_hash = hash_file(file)
    except OSError as exc:
        raise InputFileError(f"cannot read {file}: {exc}") from exc
    with state.project(mutate=True) as project:
        ids = _expand_ids(project, relation, ids_text)
        if entity is not None:
            project.graph.entity(entity)
        record = project.idb.register_file(
            name=file.name,
            path=str(file),
            content_hash=content_hash,
            relation=relation,
            tuple_ids=ids,
            workflow_entity=entity,
            file_id=file_id,
        )
    _emit(f"registered {file.name} as {record.file_id} ({', '.join(record.tuple_ids)})")


# -- workflow graph -------------------------------------------------------------


@cli.group()
def prov() -> None:
    """Import, export and inspect the workflow graph."""


@prov.command("import")
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@pass_state
def prov_import(state: _State, file: Path) -> None:
    """Replace the workflow graph with a graph document."""
    try:
        document = read_document(file)
    except (OSError, ValueError) as exc:
        raise InputFileError(f"cannot read {file}: {exc}") from exc
    graph = ProvGraph.deserialize(document)
    with state.project(mutate=True) as project:
        for record in project.idb.records:
            if record.workflow_entity is not None:
                graph.entity(record.workflow_entity)
        project.graph = graph
    _emit(
        f"imported graph: {graph.node_count} nodes, {len(graph.edges())} edges, "
        f"{len(graph.notes())} notes"
    )


@prov.command("export")
@click.argument("file", type=click.Path(dir_okay=False, path_type=Path))
@pass_state
def prov_export(state: _State, file: Path) -> None:
    """Write the workflow graph document to FILE ("-" for stdout)."""
    with state.project() as project:
        document = project.graph.serialize()
    if str(file) == "-":
        click.echo(dumps_text(document), nl=False)
    else:
        write_document(file, document)
        _emit(f"exported graph to {file}")


@prov.command("affected")
@click.argument("entity")
@pass_state
def prov_affected(state: _State, entity: str) -> None:
    """List the entities downstream of ENTITY."""
    with state.project() as project:
        affected = project.graph.affected_entities(entity)
    _emit("\n".join(affected) if affected else "(no affected entities)")


# -- queries --------------------------------------------------------------------


@cli.command()
@click.option("--sql", required=True, help="Query text")
@click.option("--at-time", type=click.IntRange(min=0), help="Snapshot version (default: current)")
@click.option("--provenance", type=click.Choice(["how", "why", "where", "what"]))
@click.option("--granularity", type=_GRANULARITY, default="fine", show_default=True)
@click.option("--format", "output_format", type=_FORMAT, default="text", show_default=True)
@pass_state
def query(
    state: _State,
    sql: str,
    at_time: Optional[int],
    provenance: Optional[str],
    granularity: str,
    output_format: str,
) -> None:
    """Run a query and show its result with provenance."""
    expr = parse_query(sql)
    with state.project() as project:
        database = project.database
        snapshot = database.snapshot_at(database.current_version if at_time is None else at_time)
        result = evaluate(expr, snapshot)
        if output_format == "json":
            document = {"query": str(expr), "version": snapshot.version}
            _emit(dumps_text({**document, **result_document(result)}))
            return
        idb = project.idb if granularity == Granularity.COARSE.value else None
        _emit(render_result(result, provenance, idb))


@cli.command("why-not")
@click.option("--sql", required=True, help="Query text")
@click.option("--expect", required=True, help='Missing values, e.g. "voltage_2=1.3"')
@click.option("--at-time", type=click.IntRange(min=0), help="Snapshot version (default: current)")
@click.option("--format", "output_format", type=_FORMAT, default="text", show_default=True)
@pass_state
def why_not_command(
    state: _State, sql: str, expect: str, at_time: Optional[int], output_format: str
) -> None:
    """Explain why expected values are missing from a query result."""
    expr = parse_query(sql)
    expectation = parse_expectation(expect)
    with state.project() as project:
        database = project.database
        snapshot = database.snapshot_at(database.current_version if at_time is None else at_time)
        explanation = why_not(expr, snapshot, expectation)
    if output_format == "json":
        _emit(dumps_text(explanation.to_dict()))
    else:
        _emit(WhyNotAnswer(explanation).render())


def _subject(
    kind: QuestionKind,
    scope: Scope,
    sql: Optional[str],
    row: Optional[int],
    entity: Optional[str],
    expect: Optional[str],
    attribute: Optional[str],
    at_time: Optional[int],
) -> Subject:
    if scope is Scope.WORKFLOW:
        if entity is None:
            raise SubjectError("workflow questions need --entity")
        return EntitySubject(entity)
    if sql is None:
        raise SubjectError(f"{scope.value} questions need --sql")
    if kind is QuestionKind.WHY_NOT:
        if expect is None:
            raise SubjectError("why_not questions need --expect")
        pairs: Dict[str, str] = parse_expectation(expect)
        return ExpectationSubject(sql, tuple(pairs.items()), at_time)
    if row is None:
        raise SubjectError(f"{kind.value} questions with {scope.value} scope need --row")
    return RowSubject(sql, row, attribute, at_time)


@cli.command("ask")
@click.option("--kind", "kind_text", required=True, type=click.Choice(_KIND_CHOICES))
@click.option("--scope", "scope_text", required=True, type=click.Choice(get_scope_names()))
@click.option("--sql", help="Query whose result row is asked about")
@click.option("--row", type=click.IntRange(min=1), help="1-based row of the sorted result")
@click.option("--entity", help="Workflow entity asked about")
@click.option("--expect", help="Missing values for why_not questions")
@click.option("--attribute", help="Restrict where/what answers to one attribute")
@click.option("--at-time", type=click.IntRange(min=0), help="Snapshot version (default: current)")
@click.option("--granularity", type=_GRANULARITY, default="fine", show_default=True)
@click.option("--format", "output_format", type=_FORMAT, default="text", show_default=True)
@pass_state
def ask_command(
    state: _State,
    kind_text: str,
    scope_text: str,
    sql: Optional[str],
    row: Optional[int],
    entity: Optional[str],
    expect: Optional[str],
    attribute: Optional[str],
    at_time: Optional[int],
    granularity: str,
    output_format: str,
) -> None:
    """Ask a W7+1 provenance question."""
    kind, scope = QuestionKind.parse(kind_text), Scope(scope_text)
    check_supported(kind, scope)
    subject = _subject(kind, scope, sql, row, entity, expect, attribute, at_time)
    question = Question(kind, scope, subject, Granularity(granularity))
    with state.project() as project:
        answer = ask(question, project.context())
    if output_format == "json":
        _emit(dumps_text(envelope(question, answer)))
    else:
        _emit(render_answer(question, answer))


@cli.command()
@click.option("--from", "t_from", required=True, type=click.IntRange(min=0))
@click.option("--to", "t_to", required=True, type=click.IntRange(min=0))
@pass_state
def diff(state: _State, t_from: int, t_to: int) -> None:
    """Show tuples added or changed between two snapshots."""
    with state.project() as project:
        _emit(render_diff(project.database.diff_snapshots(t_from, t_to)))


# -- entry points ---------------------------------------------------------------


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return its exit status.

    Domain errors become a one-line diagnostic on stderr.
    """
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        settings = load_settings()
        outcome = cli.main(args=args, prog_name="uniprov", standalone_mode=False, obj=settings)
    except ProvenanceError as exc:
        logger.debug("Command failed", exc_info=True)
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.Abort:
        click.echo("error: aborted", err=True)
        return 1
    except ValueError as exc:
        # settings from the environment that fail validation
        click.echo(f"error: {exc}", err=True)
        return 1
    return outcome if isinstance(outcome, int) else 0


def main() -> None:
    """Console script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()

import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Dict, List, Optional, Tuple

import typer

import config
from models.checker import CollisionAbsence, Coverage, NearbyDevices, check, export_collision, resolve_triggers
from models.errors import PlantSpaceError, UnknownOwner
from models.event_pipeline import Pipeline, load_plant_models
from models.geometry import region_of
from models.invariant import OCCUPANCY_ATOMS, BigAnd, list_owners, normalize
from models.sat import solve_dimacs
from models.scenario import ScenarioConfig, generate_events, write_fixtures
from models.temporal import facts_to_model, flatten, fold_points_to_interval, fold_windows, parse_clock
from models.topology import connected, connectivity_windows, graph_from_model
from utils.dsl_text import ParseError, parse_model, print_model
from utils.file_operations import (
    load_model, read_event_log, save_text, write_dead_letters, write_display_files,
    write_display_stream, write_event_log, join_documents,
)
from utils.reports import dead_letter_report, format_verdict

logger = logging.getLogger("plantspace")

app = typer.Typer(
    help="Spatio-temporal model checking for industrial plant models.",
    add_completion=False,
    no_args_is_help=True,
)

EXIT_OK, EXIT_VIOLATED, EXIT_ERROR = 0, 1, 2

DEFAULT_REPLAY_MODELS = ("comm_model.bsd", "site_graphs.bsd", "trajectory_default.bsd")


@dataclass
class RunConfig:
    resolution: int = config.DEFAULT_RESOLUTION
    horizon: int = config.DEFAULT_HORIZON
    output_format: str = config.OUTPUT_FORMAT


def _configure_logging(level: str):
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler()
        ]
    )


def _fail(message: str, code: int = EXIT_ERROR):
    typer.echo(message, err=True)
    raise typer.Exit(code)


@contextmanager
def _errors(path=None):
    """Map model, parse and file errors to exit code 2 with a message on stderr."""
    try:
        yield
    except ParseError as e:
        _fail(f"{path}:{e}" if path else f"parse error: {e}")
    except (PlantSpaceError, ValueError) as e:
        _fail(f"error: {e}")
    except OSError as e:
        _fail(f"error: {e.strerror or e}: {e.filename or path}")


def _load(paths: List[Path]):
    models = []
    for path in paths:
        with _errors(path):
            models.append(load_model(path))
    return models


def _triggers(values: Optional[List[str]]) -> Dict[str, int]:
    """Parse repeated ``EVENT=TICK`` options; the tick may be a clock literal."""
    triggers = {}
    for value in values or []:
        event, sep, tick = value.partition("=")
        if not sep or not event:
            _fail(f"invalid trigger '{value}', expected EVENT=TICK")
        with _errors():
            triggers[event] = parse_clock(tick)
    return triggers


def _given(value) -> bool:
    if isinstance(value, tuple):
        return all(v is not None for v in value)
    return bool(value)


def _settings(ctx: typer.Context) -> RunConfig:
    return ctx.obj if isinstance(ctx.obj, RunConfig) else RunConfig()


@app.callback()
def main_options(
    ctx: typer.Context,
    resolution: Annotated[int, typer.Option("--resolution", min=1, help="Grid cell size used for grounding")] = config.DEFAULT_RESOLUTION,
    horizon: Annotated[int, typer.Option("--horizon", min=0, help="Last tick considered (inclusive)")] = config.DEFAULT_HORIZON,
    output_format: Annotated[str, typer.Option("--format", help="Report format: text or json")] = config.OUTPUT_FORMAT,
    log_level: Annotated[str, typer.Option("--log-level", help="Logging level")] = config.LOG_LEVEL,
):
    """Options shared by every command."""
    if output_format not in ("text", "json"):
        _fail(f"unknown format '{output_format}', expected text or json")
    _configure_logging(log_level)
    ctx.obj = RunConfig(resolution, horizon, output_format)


@app.command("parse")
def parse_cmd(paths: Annotated[List[Path], typer.Argument(help="Model files (.bsd)")]):
    """Parse model files and report their owners."""
    for path, model in zip(paths, _load(paths)):
        owners = sorted(list_owners(model))
        typer.echo(f"{path}: ok, {len(owners)} owners" + (f" ({', '.join(owners)})" if owners else ""))


@app.command("print")
def print_cmd(
    path: Annotated[Path, typer.Argument(help="Model file (.bsd)")],
    clock: Annotated[bool, typer.Option("--clock", help="Print ticks of the day as TStandardGMTDay(hh, mm, ss)")] = False,
):
    """Print a model in canonical form."""
    (model,) = _load([path])
    typer.echo(print_model(model, clock=clock))


def _target_region(text: str):
    with _errors():
        atom = parse_model(text)
        if not isinstance(atom, OCCUPANCY_ATOMS):
            raise ValueError(f"--target must be an occupancy atom, got {text}")
        return region_of(atom)


def _connected_report(settings: RunConfig, model, a: str, b: str, at: int, graph: str):
    if graph not in list_owners(model):
        raise UnknownOwner(graph)
    holds = connected(graph_from_model(model, graph), a, b, at)
    if settings.output_format == "json":
        text = json.dumps({"query": {"type": "Connected", "a": a, "b": b, "t": at, "graph": graph},
                           "holds": holds}, indent=2, sort_keys=True)
    else:
        text = f"query: Connected(a={a}, b={b}, t={at}, graph={graph})\nholds: {'true' if holds else 'false'}"
    return holds, text


@app.command("check")
def check_cmd(
    ctx: typer.Context,
    paths: Annotated[List[Path], typer.Argument(help="Model files (.bsd)")],
    collision: Annotated[Optional[Tuple[str, str]], typer.Option("--collision", help="Owners that must never share a cell")] = None,
    coverage: Annotated[Optional[List[str]], typer.Option("--coverage", help="Sensor owner (repeatable)")] = None,
    target: Annotated[Optional[str], typer.Option("--target", help="Region to cover, e.g. OccupyBox(0, 0, 10, 10)")] = None,
    connected_pair: Annotated[Optional[Tuple[str, str]], typer.Option("--connected", help="Nodes to test for a path")] = None,
    nearby: Annotated[Optional[str], typer.Option("--nearby", help="Owner whose neighbours are listed")] = None,
    at: Annotated[Optional[str], typer.Option("--at", help="Tick or hh:mm:ss for --connected and --nearby")] = None,
    radius: Annotated[int, typer.Option("--radius", min=0, help="Chebyshev radius for --nearby")] = config.NEARBY_RADIUS,
    graph: Annotated[str, typer.Option("--graph", help="Owner of the graph used by --connected")] = config.COMM_GRAPH_OWNER,
    trigger: Annotated[Optional[List[str]], typer.Option("--trigger", help="Bind EVENT=TICK (repeatable)")] = None,
    workers: Annotated[int, typer.Option("--workers", min=1, help="Threads used to ground owners")] = 1,
):
    """Decide one query; exit 0 if it holds, 1 if it is violated."""
    settings = _settings(ctx)
    chosen = [name for name, value in (("--collision", collision), ("--coverage", coverage),
                                       ("--connected", connected_pair), ("--nearby", nearby)) if _given(value)]
    if len(chosen) != 1:
        _fail("choose exactly one of --collision, --coverage, --connected, --nearby")
    if chosen[0] in ("--connected", "--nearby") and at is None:
        _fail(f"{chosen[0]} needs --at")
    if coverage and target is None:
        _fail("--coverage needs --target")

    models = _load(paths)
    triggers = _triggers(trigger)
    with _errors():
        model = resolve_triggers(normalize(BigAnd(tuple(models))), triggers)
        if chosen[0] == "--connected":
            holds, text = _connected_report(settings, model, *connected_pair, parse_clock(at), graph)
            typer.echo(text)
            raise typer.Exit(EXIT_OK if holds else EXIT_VIOLATED)
        if chosen[0] == "--collision":
            query = CollisionAbsence(collision[0], collision[1], settings.horizon, settings.resolution)
        elif chosen[0] == "--coverage":
            query = Coverage(tuple(coverage), _target_region(target), settings.horizon, settings.resolution)
        else:
            query = NearbyDevices(nearby, parse_clock(at), radius)
        verdict = check(query, [model], workers=workers)
    typer.echo(format_verdict(verdict, settings.output_format))
    raise typer.Exit(EXIT_OK if verdict.holds else EXIT_VIOLATED)


@app.command("export")
def export_cmd(
    ctx: typer.Context,
    paths: Annotated[List[Path], typer.Argument(help="Model files (.bsd)")],
    collision: Annotated[Tuple[str, str], typer.Option("--collision", help="Owners whose collision is the SAT goal")],
    out: Annotated[Path, typer.Option("--out", help="DIMACS file to write")],
    trigger: Annotated[Optional[List[str]], typer.Option("--trigger", help="Bind EVENT=TICK (repeatable)")] = None,
    solve: Annotated[bool, typer.Option("--solve", help="Also solve the exported goal")] = False,
    solver: Annotated[str, typer.Option("--solver", help="builtin or sympy")] = config.SAT_SOLVER,
):
    """Export a collision goal as DIMACS CNF (satisfiable iff the owners collide)."""
    settings = _settings(ctx)
    models = _load(paths)
    triggers = _triggers(trigger)
    with _errors(out):
        model = resolve_triggers(normalize(BigAnd(tuple(models))), triggers)
        query = CollisionAbsence(collision[0], collision[1], settings.horizon, settings.resolution)
        text = export_collision([model], query)
        save_text(text, out)
    header = text.split("\n", 1)[0].split()
    typer.echo(f"wrote {out}: {header[2]} variables, {header[3]} clauses")
    if solve:
        with _errors():
            result = solve_dimacs(text, solver)
        # an empty formula has no collision goal at all
        collides = result.satisfiable and header[3] != "0"
        typer.echo(f"satisfiable: {'true' if result.satisfiable else 'false'}")
        typer.echo(f"holds: {'false' if collides else 'true'}")
        raise typer.Exit(EXIT_VIOLATED if collides else EXIT_OK)


@app.command("windows")
def windows_cmd(
    ctx: typer.Context,
    path: Annotated[Path, typer.Argument(help="Model file (.bsd)")],
    a: Annotated[str, typer.Argument(help="First node")],
    b: Annotated[str, typer.Argument(help="Second node")],
    graph: Annotated[str, typer.Option("--graph", help="Owner of the graph")] = config.COMM_GRAPH_OWNER,
):
    """List the maximal tick intervals during which two nodes are connected."""
    settings = _settings(ctx)
    (model,) = _load([path])
    with _errors():
        if graph not in list_owners(model):
            raise UnknownOwner(graph)
        windows = connectivity_windows(graph_from_model(model, graph), a, b, settings.horizon)
    if settings.output_format == "json":
        typer.echo(json.dumps(windows))
    else:
        for start, end in windows:
            typer.echo(f"[{start}, {end}]")


@app.command("abstract")
def abstract_cmd(
    path: Annotated[Path, typer.Argument(help="Model file (.bsd)")],
    owner: Annotated[str, typer.Argument(help="Owner whose point facts are folded")],
    window: Annotated[Optional[int], typer.Option("--window", min=1, help="Fold per window of ticks instead of once")] = None,
    trigger: Annotated[Optional[List[str]], typer.Option("--trigger", help="Bind EVENT=TICK (repeatable)")] = None,
    clock: Annotated[bool, typer.Option("--clock", help="Print ticks of the day as clock values")] = False,
):
    """Fold an owner's point-timed occupancy into interval facts and print the result."""
    (model,) = _load([path])
    triggers = _triggers(trigger)
    with _errors():
        facts = flatten(resolve_triggers(model, triggers))
        folded = fold_windows(facts, owner, window) if window else [fold_points_to_interval(facts, owner)]
    typer.echo(print_model(normalize(facts_to_model(folded)), clock=clock))


@app.command("replay")
def replay_cmd(
    ctx: typer.Context,
    event_log: Annotated[Path, typer.Argument(help="Newline-delimited JSON event log")],
    paths: Annotated[Optional[List[Path]], typer.Argument(help="Model files; defaults to the bundled plant models")] = None,
    out_dir: Annotated[Optional[Path], typer.Option("--out-dir", help="Write displays here instead of stdout")] = None,
    split: Annotated[bool, typer.Option("--split", help="One <event id>.xml file per event")] = False,
    trigger: Annotated[Optional[List[str]], typer.Option("--trigger", help="Bind EVENT=TICK (repeatable)")] = None,
    workers: Annotated[int, typer.Option("--workers", min=1, help="Concurrent handler threads")] = config.HANDLER_WORKERS,
    k: Annotated[int, typer.Option("--confidence-k", min=1, help="Events needed to pass the confidence gate")] = config.CONFIDENCE_K,
    window: Annotated[int, typer.Option("--confidence-window", min=0, help="Confidence window in ticks")] = config.CONFIDENCE_WINDOW,
    target: Annotated[str, typer.Option("--target", help="Display target")] = config.DISPLAY_TARGET,
):
    """Replay an event log through the alarm pipeline and emit XML display commands."""
    settings = _settings(ctx)
    if target not in config.DISPLAY_TARGETS:
        _fail(f"unknown display target '{target}', expected one of {', '.join(config.DISPLAY_TARGETS)}")
    model_paths = paths or [config.FIXTURES_DIR / name for name in DEFAULT_REPLAY_MODELS]
    with _errors(event_log):
        lines = read_event_log(event_log)
    models = _load(model_paths)
    triggers = _triggers(trigger)
    with _errors():
        plant = load_plant_models(models, triggers)
        result = Pipeline(plant, k=k, window=window, workers=workers, target=target,
                          horizon=settings.horizon).run(lines)

    with _errors(out_dir):
        if out_dir is None:
            if result.outputs:
                typer.echo(join_documents(result.documents), nl=False)
        elif split:
            write_display_files(result.outputs, out_dir)
        else:
            write_display_stream(result.documents, out_dir)
        if result.batch.dead_letters and out_dir is not None:
            write_dead_letters(dead_letter_report(result.batch.dead_letters), out_dir)

    if result.batch.dead_letters:
        report = dead_letter_report(result.batch.dead_letters)
        typer.echo(json.dumps(report, indent=2, ensure_ascii=False), err=True)
        raise typer.Exit(EXIT_VIOLATED)


@app.command("scenario")
def scenario_cmd(
    out_dir: Annotated[Path, typer.Option("--out-dir", help="Directory for the generated models")],
    events: Annotated[int, typer.Option("--events", min=0, help="Also write a synthetic event log of this size")] = 0,
    seed: Annotated[int, typer.Option("--seed", help="Seed for the synthetic event log")] = config.DEFAULT_SCENARIO["seed"],
):
    """Generate the plant models (and optionally a synthetic event log)."""
    settings = {**config.DEFAULT_SCENARIO, "seed": seed}
    with _errors(out_dir):
        cfg = ScenarioConfig(**settings)
        written = write_fixtures(out_dir, cfg)
        if events:
            owners = sorted(config.DEFAULT_DEVICE_MAP)
            written.append(write_event_log(generate_events(cfg, events, owners), out_dir / "events.ndlog"))
    for path in written:
        typer.echo(str(path))

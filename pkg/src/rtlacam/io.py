"""MovingAI ``.map`` / ``.scen`` readers and writers, plus the path trace format.

Path traces are one line per timestep, ``t:(x0,y0)(x1,y1)...``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from os import PathLike
from pathlib import Path

from .core import AgentTask, Configuration, GridMap, Instance, InstanceError, MapfError

PASSABLE_CHARS = frozenset(".G")
BLOCKED_CHARS = frozenset("@TOW")


class ParseError(MapfError, ValueError):
    """Malformed input file; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, message: str, line: int = 0) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _as_text(data: str | bytes) -> str:
    return data.decode("utf-8") if isinstance(data, bytes) else data


def parse_map(data: str | bytes) -> GridMap:
    """Parse a MovingAI ``.map`` file.

    Raises:
        ParseError: on a malformed header, wrong row count or length, or an
            unknown cell character.
    """
    lines = _as_text(data).splitlines()
    header: dict[str, int] = {}
    i = 0
    saw_type = False
    while i < len(lines):
        lineno = i + 1
        parts = lines[i].split()
        i += 1
        if not parts:
            continue
        key = parts[0].lower()
        if key == "map":
            break
        if key == "type":
            saw_type = True
        elif key in ("height", "width"):
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) <= 0:
                raise ParseError(f"bad {key} line {lines[lineno - 1]!r}", lineno)
            header[key] = int(parts[1])
        else:
            raise ParseError(f"unexpected header line {lines[lineno - 1]!r}", lineno)
    else:
        raise ParseError("missing 'map' line", len(lines))
    if not saw_type:
        raise ParseError("missing 'type' line", 1)
    for key in ("height", "width"):
        if key not in header:
            raise ParseError(f"missing '{key}' line", i)
    height, width = header["height"], header["width"]

    passable: list[bool] = []
    rows = 0
    for j in range(i, len(lines)):
        row = lines[j].rstrip("\r\n")
        lineno = j + 1
        if not row.strip():
            if rows == height:
                continue
            raise ParseError("blank line inside map body", lineno)
        if rows == height:
            raise ParseError(f"more than {height} map rows", lineno)
        if len(row) != width:
            raise ParseError(f"row has length {len(row)}, expected {width}", lineno)
        for x, c in enumerate(row):
            if c in PASSABLE_CHARS:
                passable.append(True)
            elif c in BLOCKED_CHARS:
                passable.append(False)
            else:
                raise ParseError(f"unknown cell character {c!r} at column {x}", lineno)
        rows += 1
    if rows != height:
        raise ParseError(f"found {rows} map rows, expected {height}", len(lines))
    return GridMap(width, height, tuple(passable))


def serialize_map(grid: GridMap) -> str:
    rows = [
        "".join("." if grid.passable[y * grid.width + x] else "@" for x in range(grid.width))
        for y in range(grid.height)
    ]
    return "\n".join(["type octile", f"height {grid.height}", f"width {grid.width}", "map", *rows]) + "\n"


def load_map(path: str | PathLike[str]) -> GridMap:
    return parse_map(Path(path).read_bytes())


@dataclass(frozen=True)
class ScenarioRow:
    bucket: int
    map_name: str
    width: int
    height: int
    start: tuple[int, int]
    goal: tuple[int, int]
    optimal_length: float


def parse_scenario_rows(data: str | bytes) -> list[ScenarioRow]:
    lines = _as_text(data).splitlines()
    if not lines or not lines[0].lower().startswith("version"):
        raise ParseError("missing 'version' line", 1)
    rows = []
    for j, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        parts = [p.strip() for p in parts]
        if len(parts) != 9:
            raise ParseError(f"expected 9 fields, got {len(parts)}", j)
        try:
            bucket, w, h, sx, sy, gx, gy = (int(parts[k]) for k in (0, 2, 3, 4, 5, 6, 7))
            opt = float(parts[8])
        except ValueError as exc:
            raise ParseError(f"non-numeric field: {exc}", j) from None
        rows.append(ScenarioRow(bucket, parts[1], w, h, (sx, sy), (gx, gy), opt))
    return rows


def parse_scenario(data: str | bytes, grid: GridMap, n_agents: int, name: str = "") -> Instance:
    """Build an instance from the first ``n_agents`` rows of a ``.scen`` file.

    Raises:
        ParseError: malformed file or fewer than ``n_agents`` rows.
        InstanceError: start/goal off the map or blocked, or duplicate
            starts/goals among the selected agents.
    """
    rows = parse_scenario_rows(data)
    if n_agents < 0:
        raise ValueError("n_agents must be nonnegative")
    if len(rows) < n_agents:
        raise ParseError(f"scenario has {len(rows)} rows, {n_agents} agents requested")
    tasks = []
    for i, row in enumerate(rows[:n_agents]):
        if (row.width, row.height) != (grid.width, grid.height):
            raise InstanceError(
                f"agent {i}: scenario row is for a {row.width}x{row.height} map, "
                f"got {grid.width}x{grid.height}"
            )
        for label, v in (("start", row.start), ("goal", row.goal)):
            if not grid.is_passable(v):
                raise InstanceError(f"agent {i}: {label} {v} is blocked or out of bounds")
        tasks.append(AgentTask(i, row.start, row.goal))
    return Instance(grid, tuple(tasks), name)


def serialize_scenario(
    rows: Sequence[ScenarioRow],
) -> str:
    out = ["version 1"]
    for r in rows:
        out.append(
            "\t".join(
                str(f)
                for f in (
                    r.bucket,
                    r.map_name,
                    r.width,
                    r.height,
                    r.start[0],
                    r.start[1],
                    r.goal[0],
                    r.goal[1],
                    f"{r.optimal_length:.8f}",
                )
            )
        )
    return "\n".join(out) + "\n"


def load_instance(
    map_path: str | PathLike[str], scen_path: str | PathLike[str], n_agents: int
) -> Instance:
    grid = load_map(map_path)
    name = f"{Path(scen_path).name}:{n_agents}"
    return parse_scenario(Path(scen_path).read_bytes(), grid, n_agents, name)


def format_paths(configs: Sequence[Configuration]) -> str:
    """Render a configuration sequence in the ``t:(x,y)(x,y)...`` trace format."""
    if not configs:
        raise ValueError("cannot write an empty trace")
    return "".join(
        f"{t}:" + "".join(f"({x},{y})" for x, y in config) + "\n" for t, config in enumerate(configs)
    )


def dump_paths(configs: Sequence[Configuration], out: str | PathLike[str]) -> Path:
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_paths(configs))
    return path


def parse_paths(data: str | bytes) -> list[Configuration]:
    configs: list[Configuration] = []
    for j, line in enumerate(_as_text(data).splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        t_str, sep, body = line.partition(":")
        if not sep or not t_str.strip().isdigit():
            raise ParseError("expected 't:' prefix", j)
        if int(t_str) != len(configs):
            raise ParseError(f"timestep {t_str} out of sequence", j)
        config = []
        for chunk in body.replace(",(", "(").split("(")[1:]:
            coords = chunk.rstrip(",").rstrip(")").split(",")
            try:
                x, y = (int(c) for c in coords)
            except ValueError:
                raise ParseError(f"bad coordinate {chunk!r}", j) from None
            config.append((x, y))
        if configs and len(config) != len(configs[0]):
            raise ParseError(f"{len(config)} agents, expected {len(configs[0])}", j)
        configs.append(tuple(config))
    if not configs:
        raise ParseError("empty path file")
    return configs


def load_paths(path: str | PathLike[str]) -> list[Configuration]:
    return parse_paths(Path(path).read_bytes())

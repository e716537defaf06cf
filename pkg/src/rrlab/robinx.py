"""Read and write instances and solutions in the ITC2021 XML dialect of
RobinX, plus the canonical performance-metadata CSV.

The supported XML subset is documented byte-exactly in docs/file-formats.md;
attributes that the nine constraint types do not use are ignored with a
warning so RobinX superset files still parse. Team/slot sets are
semicolon-separated index lists, GA1 meetings are ``home,away`` pairs.
"""
from __future__ import annotations

import csv
import io
import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .model import (
    BR1,
    BR2,
    CA1,
    CA2,
    CA3,
    CA4,
    FA2,
    GA1,
    SE1,
    Constraint,
    Hardness,
    Instance,
    InvalidInstanceError,
    Mode,
    Scope,
    Timetable,
)
from .selection import CLOCK_SPEED_RATIOS, PerformanceRecord


class ParseError(ValueError):
    """Base for all instance/solution/metadata parse failures."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class MalformedXMLError(ParseError):
    pass


class UnknownConstraintError(ParseError):
    pass


class OddTeamCountError(ParseError):
    pass


class ReferenceRangeError(ParseError):
    pass


class DuplicateGameError(ParseError):
    pass


class MetadataError(ParseError):
    pass


@dataclass
class MetadataTable:
    """Performance records, optionally joined with per-instance features."""

    rows: list[PerformanceRecord]
    feature_rows: list[tuple[str, dict[str, float]]] | None = None


_MODES = {
    "H": Mode.HOME,
    "A": Mode.AWAY,
    "HA": Mode.ANY,
    "HOME": Mode.HOME,
    "AWAY": Mode.AWAY,
    "ANY": Mode.ANY,
}
_SCOPES = {
    "GLOBAL": Scope.GLOBAL,
    "EVERY": Scope.PER_SLOT,
    "PER_SLOT": Scope.PER_SLOT,
}
_MODE_OUT = {Mode.HOME: "H", Mode.AWAY: "A", Mode.ANY: "HA"}
_SCOPE_OUT = {Scope.GLOBAL: "GLOBAL", Scope.PER_SLOT: "EVERY"}

# Attributes each constraint tag may carry; anything else draws a warning.
_KNOWN_ATTRS = {
    "CA1": {"teams", "slots", "mode", "mode1", "min", "max", "type", "penalty", "cost"},
    "CA2": {"teams1", "teams2", "slots", "mode1", "mode2", "min", "max", "type", "penalty", "cost"},
    "CA3": {"teams1", "teams2", "mode1", "mode2", "min", "max", "intp", "type", "penalty", "cost"},
    "CA4": {"teams1", "teams2", "slots", "mode1", "mode2", "min", "max", "type", "penalty", "cost"},
    "GA1": {"meetings", "slots", "min", "max", "type", "penalty", "cost"},
    "BR1": {"teams", "slots", "mode", "mode1", "mode2", "intp", "type", "penalty", "cost"},
    "BR2": {"teams", "slots", "homeMode", "mode1", "mode2", "intp", "type", "penalty", "cost"},
    "FA2": {"teams", "slots", "mode", "intp", "type", "penalty", "cost"},
    "SE1": {"teams", "min", "mode1", "type", "penalty", "cost"},
}


def _line_of(xml_text: str, tag: str, occurrence: int) -> int | None:
    """Line of the n-th ``<tag`` occurrence, for error context."""
    pos = -1
    for _ in range(occurrence + 1):
        pos = xml_text.find(f"<{tag}", pos + 1)
        if pos < 0:
            return None
    return xml_text.count("\n", 0, pos) + 1


def _parse_xml(xml_text: str) -> ET.Element:
    try:
        return ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line = exc.position[0] if exc.position else None
        raise MalformedXMLError(f"malformed XML: {exc.msg}", line) from exc


def _int_list(raw: str | None) -> list[int]:
    if raw is None or raw.strip() == "":
        return []
    return [int(x) for x in raw.strip().strip(";").split(";")]


def _meeting_list(raw: str | None) -> list[tuple[int, int]]:
    pairs = []
    if raw:
        for chunk in raw.strip().strip(";").split(";"):
            if not chunk:
                continue
            h, a = chunk.split(",")
            pairs.append((int(h), int(a)))
    return pairs


def _require(el: ET.Element, attr_options: tuple[str, ...], tag: str, line: int | None) -> str:
    for attr in attr_options:
        if attr in el.attrib:
            return el.attrib[attr]
    raise ReferenceRangeError(
        f"{tag} constraint missing required attribute {attr_options[0]!r}", line
    )


def _mode_of(raw: str, tag: str, line: int | None, allowed: tuple[Mode, ...]) -> Mode:
    mode = _MODES.get(raw.upper())
    if mode is None or mode not in allowed:
        raise ReferenceRangeError(f"{tag} has unsupported mode {raw!r}", line)
    return mode


def _check_range(values, limit: int, what: str, tag: str, line: int | None) -> None:
    for v in values:
        if not 0 <= v < limit:
            raise ReferenceRangeError(
                f"{tag} references {what} {v} out of range 0..{limit - 1}", line
            )


def _parse_constraint_el(
    el: ET.Element, n_teams: int, n_slots: int, line: int | None
) -> list[Constraint]:
    tag = el.tag
    if tag not in _KNOWN_ATTRS:
        raise UnknownConstraintError(f"unknown constraint tag <{tag}>", line)
    for attr in el.attrib:
        if attr not in _KNOWN_ATTRS[tag]:
            warnings.warn(f"ignoring attribute {attr!r} on <{tag}>", stacklevel=2)

    raw_type = el.get("type", "SOFT").upper()
    try:
        hardness = Hardness(raw_type)
    except ValueError as exc:
        raise ReferenceRangeError(f"{tag} has unsupported type {raw_type!r}", line) from exc
    penalty = int(el.get("penalty", el.get("cost", "0")))

    def result(params_list) -> list[Constraint]:
        try:
            return [Constraint(hardness, penalty, p) for p in params_list]
        except InvalidInstanceError as exc:
            raise ReferenceRangeError(f"{tag}: {exc}", line) from exc

    if tag == "CA1":
        teams = _int_list(_require(el, ("teams",), tag, line))
        slots = _int_list(_require(el, ("slots",), tag, line))
        _check_range(teams, n_teams, "team", tag, line)
        _check_range(slots, n_slots, "slot", tag, line)
        mode = _mode_of(el.get("mode", el.get("mode1", "H")), tag, line, (Mode.HOME, Mode.AWAY))
        lo, hi = int(el.get("min", "0")), int(el.get("max", "0"))
        return result(
            CA1(team=t, slots=frozenset(slots), mode=mode, min=lo, max=hi) for t in teams
        )
    if tag == "CA2":
        teams1 = _int_list(_require(el, ("teams1",), tag, line))
        teams2 = _int_list(_require(el, ("teams2",), tag, line))
        slots = _int_list(_require(el, ("slots",), tag, line))
        _check_range(teams1 + teams2, n_teams, "team", tag, line)
        _check_range(slots, n_slots, "slot", tag, line)
        mode = _mode_of(el.get("mode1", "HA"), tag, line, (Mode.HOME, Mode.AWAY, Mode.ANY))
        lo, hi = int(el.get("min", "0")), int(el.get("max", "0"))
        return result(
            CA2(team=t, opponents=frozenset(teams2), slots=frozenset(slots), mode=mode, min=lo, max=hi)
            for t in teams1
        )
    if tag == "CA3":
        teams1 = _int_list(_require(el, ("teams1",), tag, line))
        teams2 = _int_list(_require(el, ("teams2",), tag, line))
        _check_range(teams1 + teams2, n_teams, "team", tag, line)
        mode = _mode_of(el.get("mode1", "HA"), tag, line, (Mode.HOME, Mode.AWAY, Mode.ANY))
        window = int(_require(el, ("intp",), tag, line))
        return result(
            CA3(team=t, opponents=frozenset(teams2), mode=mode, max=int(el.get("max", "0")), window=window)
            for t in teams1
        )
    if tag == "CA4":
        teams1 = _int_list(_require(el, ("teams1",), tag, line))
        teams2 = _int_list(_require(el, ("teams2",), tag, line))
        slots = _int_list(_require(el, ("slots",), tag, line))
        _check_range(teams1 + teams2, n_teams, "team", tag, line)
        _check_range(slots, n_slots, "slot", tag, line)
        mode = _mode_of(el.get("mode1", "HA"), tag, line, (Mode.HOME, Mode.AWAY, Mode.ANY))
        raw_scope = el.get("mode2", "GLOBAL").upper()
        if raw_scope not in _SCOPES:
            raise ReferenceRangeError(f"CA4 has unsupported mode2 {raw_scope!r}", line)
        return result(
            [
                CA4(
                    teams1=frozenset(teams1),
                    teams2=frozenset(teams2),
                    slots=frozenset(slots),
                    mode=mode,
                    scope=_SCOPES[raw_scope],
                    max=int(el.get("max", "0")),
                )
            ]
        )
    if tag == "GA1":
        meetings = _meeting_list(_require(el, ("meetings",), tag, line))
        slots = _int_list(_require(el, ("slots",), tag, line))
        _check_range([t for g in meetings for t in g], n_teams, "team", tag, line)
        _check_range(slots, n_slots, "slot", tag, line)
        return result(
            [
                GA1(
                    games=frozenset(meetings),
                    slots=frozenset(slots),
                    min=int(el.get("min", "0")),
                    max=int(el.get("max", "0")),
                )
            ]
        )
    if tag == "BR1":
        teams = _int_list(_require(el, ("teams",), tag, line))
        slots = _int_list(_require(el, ("slots",), tag, line))
        _check_range(teams, n_teams, "team", tag, line)
        _check_range(slots, n_slots, "slot", tag, line)
        raw_mode = el.get("mode2", el.get("mode1", el.get("mode", "HA")))
        mode = _mode_of(raw_mode, tag, line, (Mode.HOME, Mode.AWAY, Mode.ANY))
        breaks = int(_require(el, ("intp",), tag, line))
        return result(
            BR1(team=t, slots=frozenset(slots), break_mode=mode, max_breaks=breaks)
            for t in teams
        )
    if tag == "BR2":
        teams = _int_list(_require(el, ("teams",), tag, line))
        slots = _int_list(_require(el, ("slots",), tag, line))
        _check_range(teams, n_teams, "team", tag, line)
        _check_range(slots, n_slots, "slot", tag, line)
        return result(
            [
                BR2(
                    teams=frozenset(teams),
                    slots=frozenset(slots),
                    max_breaks=int(_require(el, ("intp",), tag, line)),
                )
            ]
        )
    if tag == "FA2":
        teams = _int_list(_require(el, ("teams",), tag, line))
        slots = _int_list(_require(el, ("slots",), tag, line))
        _check_range(teams, n_teams, "team", tag, line)
        _check_range(slots, n_slots, "slot", tag, line)
        return result(
            [
                FA2(
                    teams=frozenset(teams),
                    slots=frozenset(slots),
                    bound=int(el.get("intp", "2")),
                )
            ]
        )
    # SE1
    teams = _int_list(_require(el, ("teams",), tag, line))
    _check_range(teams, n_teams, "team", tag, line)
    return result(
        [SE1(teams=frozenset(teams), min_separation=int(el.get("min", "10")))]
    )


def parse_instance(xml_text: str) -> Instance:
    """Parse an ITC2021 instance file into an :class:`Instance`."""
    root = _parse_xml(xml_text)
    if root.tag != "Instance":
        raise MalformedXMLError(f"expected <Instance> root, found <{root.tag}>")

    name_el = root.find("./MetaData/InstanceName")
    instance_id = (name_el.text or "").strip() if name_el is not None else "unnamed"

    teams = root.findall("./Resources/Teams/team")
    slots = root.findall("./Resources/Slots/slot")
    n_teams = len(teams)
    if n_teams % 2 != 0 or n_teams < 2:
        raise OddTeamCountError(
            f"odd team count: {n_teams} teams declared", _line_of(xml_text, "Teams", 0)
        )
    n_slots = len(slots)
    if n_slots != 2 * n_teams - 2:
        raise ReferenceRangeError(
            f"{n_slots} slots declared, compact 2RR needs {2 * n_teams - 2}",
            _line_of(xml_text, "Slots", 0),
        )
    team_names = tuple(t.get("name", f"Team {t.get('id', i)}") for i, t in enumerate(teams))
    slot_names = tuple(s.get("name", f"Slot {s.get('id', i)}") for i, s in enumerate(slots))

    game_mode = root.findtext("./Structure/Format/gameMode", default="NP")
    phased = game_mode.strip().upper() in ("P", "PHASED")

    constraints: list[Constraint] = []
    seen: dict[str, int] = {}
    constraints_el = root.find("Constraints")
    if constraints_el is not None:
        for group in constraints_el:
            for el in group:
                occurrence = seen.get(el.tag, 0)
                seen[el.tag] = occurrence + 1
                line = _line_of(xml_text, el.tag, occurrence)
                constraints.extend(_parse_constraint_el(el, n_teams, n_slots, line))

    try:
        return Instance(
            id=instance_id,
            n_teams=n_teams,
            phased=phased,
            constraints=tuple(constraints),
            team_names=team_names,
            slot_names=slot_names,
        )
    except InvalidInstanceError as exc:
        raise ReferenceRangeError(str(exc)) from exc


_GROUP_OF = {
    "CA1": "CapacityConstraints",
    "CA2": "CapacityConstraints",
    "CA3": "CapacityConstraints",
    "CA4": "CapacityConstraints",
    "GA1": "GameConstraints",
    "BR1": "BreakConstraints",
    "BR2": "BreakConstraints",
    "FA2": "FairnessConstraints",
    "SE1": "SeparationConstraints",
}
_GROUP_ORDER = (
    "CapacityConstraints",
    "GameConstraints",
    "BreakConstraints",
    "FairnessConstraints",
    "SeparationConstraints",
)


def _fmt_ints(values) -> str:
    return ";".join(str(v) for v in sorted(values))


def _fmt_meetings(games) -> str:
    return ";".join(f"{h},{a}" for h, a in sorted(games))


def _constraint_attrs(c: Constraint) -> dict[str, str]:
    p = c.params
    attrs: dict[str, str] = {}
    if isinstance(p, CA1):
        attrs = {
            "teams": str(p.team),
            "slots": _fmt_ints(p.slots),
            "mode": _MODE_OUT[p.mode],
            "min": str(p.min),
            "max": str(p.max),
        }
    elif isinstance(p, CA2):
        attrs = {
            "teams1": str(p.team),
            "teams2": _fmt_ints(p.opponents),
            "slots": _fmt_ints(p.slots),
            "mode1": _MODE_OUT[p.mode],
            "mode2": "GLOBAL",
            "min": str(p.min),
            "max": str(p.max),
        }
    elif isinstance(p, CA3):
        attrs = {
            "teams1": str(p.team),
            "teams2": _fmt_ints(p.opponents),
            "mode1": _MODE_OUT[p.mode],
            "mode2": "SLOTS",
            "max": str(p.max),
            "intp": str(p.window),
        }
    elif isinstance(p, CA4):
        attrs = {
            "teams1": _fmt_ints(p.teams1),
            "teams2": _fmt_ints(p.teams2),
            "slots": _fmt_ints(p.slots),
            "mode1": _MODE_OUT[p.mode],
            "mode2": _SCOPE_OUT[p.scope],
            "max": str(p.max),
        }
    elif isinstance(p, GA1):
        attrs = {
            "meetings": _fmt_meetings(p.games),
            "slots": _fmt_ints(p.slots),
            "min": str(p.min),
            "max": str(p.max),
        }
    elif isinstance(p, BR1):
        attrs = {
            "teams": str(p.team),
            "slots": _fmt_ints(p.slots),
            "mode2": _MODE_OUT[p.break_mode],
            "intp": str(p.max_breaks),
        }
    elif isinstance(p, BR2):
        attrs = {
            "teams": _fmt_ints(p.teams),
            "slots": _fmt_ints(p.slots),
            "intp": str(p.max_breaks),
        }
    elif isinstance(p, FA2):
        attrs = {
            "teams": _fmt_ints(p.teams),
            "slots": _fmt_ints(p.slots),
            "intp": str(p.bound),
            "mode": "H",
        }
    else:  # SE1
        attrs = {"teams": _fmt_ints(p.teams), "min": str(p.min_separation), "mode1": "SLOTS"}
    attrs["type"] = c.hardness.value
    attrs["penalty"] = str(c.penalty)
    return attrs


def _serialize(root: ET.Element) -> str:
    ET.indent(root, space="  ")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def write_instance(inst: Instance) -> str:
    """Serialize an instance; ``parse_instance(write_instance(x)) == x``."""
    root = ET.Element("Instance")
    meta = ET.SubElement(root, "MetaData")
    ET.SubElement(meta, "InstanceName").text = inst.id

    resources = ET.SubElement(root, "Resources")
    teams_el = ET.SubElement(resources, "Teams")
    for t in range(inst.n_teams):
        name = inst.team_names[t] if inst.team_names else f"Team {t}"
        ET.SubElement(teams_el, "team", {"id": str(t), "league": "0", "name": name})
    slots_el = ET.SubElement(resources, "Slots")
    for s in range(inst.n_slots):
        name = inst.slot_names[s] if inst.slot_names else f"Slot {s}"
        ET.SubElement(slots_el, "slot", {"id": str(s), "name": name})

    structure = ET.SubElement(root, "Structure")
    fmt = ET.SubElement(structure, "Format", {"leagueIds": "0"})
    ET.SubElement(fmt, "numberRoundRobin").text = "2"
    ET.SubElement(fmt, "compactness").text = "C"
    ET.SubElement(fmt, "gameMode").text = "P" if inst.phased else "NP"

    constraints_el = ET.SubElement(root, "Constraints")
    # one group element per consecutive run of same-group constraints, so
    # the document preserves the constraint list order exactly
    current_group = None
    group_el = None
    for c in inst.constraints:
        group = _GROUP_OF[c.ctype]
        if group != current_group:
            group_el = ET.SubElement(constraints_el, group)
            current_group = group
        ET.SubElement(group_el, c.ctype, _constraint_attrs(c))
    return _serialize(root)


def parse_solution(xml_text: str, inst: Instance) -> Timetable:
    """Parse a solution file; structural validation is left to the caller."""
    root = _parse_xml(xml_text)
    slot_of: dict[tuple[int, int], int] = {}
    matches = root.findall(".//ScheduledMatch")
    for occurrence, el in enumerate(matches):
        line = _line_of(xml_text, "ScheduledMatch", occurrence)
        try:
            h, a, s = int(el.get("home")), int(el.get("away")), int(el.get("slot"))
        except (TypeError, ValueError) as exc:
            raise ReferenceRangeError(f"bad ScheduledMatch attributes: {exc}", line) from exc
        if not (0 <= h < inst.n_teams and 0 <= a < inst.n_teams) or h == a:
            raise ReferenceRangeError(f"unknown team pair ({h}, {a})", line)
        if not 0 <= s < inst.n_slots:
            raise ReferenceRangeError(f"unknown slot {s}", line)
        if (h, a) in slot_of:
            raise DuplicateGameError(f"game ({h}, {a}) scheduled twice", line)
        slot_of[(h, a)] = s
    return Timetable(slot_of)


def write_solution(tt: Timetable, inst: Instance) -> str:
    """Serialize a timetable; round-trips with :func:`parse_solution`."""
    root = ET.Element("Solution")
    meta = ET.SubElement(root, "MetaData")
    ET.SubElement(meta, "InstanceName").text = inst.id
    games = ET.SubElement(root, "Games")
    for (h, a), s in sorted(tt.slot_of.items(), key=lambda kv: (kv[1], kv[0])):
        ET.SubElement(
            games, "ScheduledMatch", {"home": str(h), "away": str(a), "slot": str(s)}
        )
    return _serialize(root)


METADATA_COLUMNS = ("instance", "algorithm", "objective", "feasible", "wall_minutes", "cpu_minutes")
NO_SOLUTION = "-"
_TRUTHY = {"feasible", "true", "1", "yes"}
_FALSY = {"infeasible", "false", "0", "no", NO_SOLUTION}


def parse_metadata(csv_text: str) -> MetadataTable:
    """Parse the canonical performance CSV
    (``instance,algorithm,objective,feasible,wall_minutes,cpu_minutes``).

    ``-`` marks a missing solution; times are minutes. The clock-speed
    ratio is filled from the published per-algorithm table, 1.0 for
    algorithms not in it.
    """
    reader = csv.DictReader(io.StringIO(csv_text))
    header = tuple(reader.fieldnames or ())
    for col in header:
        if col not in METADATA_COLUMNS:
            raise MetadataError(f"unknown column {col!r}", line=1)
    for col in METADATA_COLUMNS:
        if col not in header:
            raise MetadataError(f"missing column {col!r}", line=1)

    rows: list[PerformanceRecord] = []
    seen: set[tuple[str, str]] = set()
    for lineno, row in enumerate(reader, start=2):
        raw_obj = (row["objective"] or "").strip()
        raw_feas = (row["feasible"] or "").strip().lower()
        if raw_feas not in _TRUTHY | _FALSY:
            raise MetadataError(f"bad feasible value {row['feasible']!r}", lineno)
        feasible = raw_feas in _TRUTHY
        if raw_obj == NO_SOLUTION:
            objective = None
            feasible = False
        else:
            try:
                objective = int(raw_obj)
            except ValueError as exc:
                raise MetadataError(f"bad objective {raw_obj!r}", lineno) from exc
            if objective < 0:
                raise MetadataError(f"negative objective {objective}", lineno)
            if not feasible:
                raise MetadataError(
                    f"objective {objective} given for an infeasible row", lineno
                )
        key = (row["instance"], row["algorithm"])
        if key in seen:
            raise MetadataError(f"duplicate row for {key}", lineno)
        seen.add(key)
        try:
            rows.append(
                PerformanceRecord(
                    instance_id=row["instance"],
                    algorithm=row["algorithm"],
                    objective=objective,
                    feasible=feasible,
                    wall_minutes=float(row["wall_minutes"]),
                    cpu_minutes=float(row["cpu_minutes"]),
                    clock_ratio=CLOCK_SPEED_RATIOS.get(row["algorithm"], 1.0),
                )
            )
        except ValueError as exc:
            raise MetadataError(str(exc), lineno) from exc
    return MetadataTable(rows=rows)


def write_metadata(table: MetadataTable) -> str:
    """Serialize performance records back to the canonical CSV (LF, UTF-8)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(METADATA_COLUMNS)
    for r in table.rows:
        writer.writerow(
            [
                r.instance_id,
                r.algorithm,
                NO_SOLUTION if r.objective is None else r.objective,
                "feasible" if r.feasible else "infeasible",
                _fmt_float(r.wall_minutes),
                _fmt_float(r.cpu_minutes),
            ]
        )
    return out.getvalue()


def _fmt_float(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def parse_feature_rows(csv_text: str) -> list[tuple[str, dict[str, float]]]:
    """Parse a per-instance feature CSV: ``instance`` column plus one column
    per feature name (may include precomputed ``z1``/``z2`` coordinates)."""
    reader = csv.DictReader(io.StringIO(csv_text))
    if not reader.fieldnames or reader.fieldnames[0] != "instance":
        raise MetadataError("feature CSV must start with an 'instance' column", line=1)
    rows = []
    for lineno, row in enumerate(reader, start=2):
        values = {}
        for name in reader.fieldnames[1:]:
            raw = (row[name] or "").strip()
            if raw == "":
                continue
            try:
                values[name] = float(raw)
            except ValueError as exc:
                raise MetadataError(f"bad value {raw!r} for {name}", lineno) from exc
        rows.append((row["instance"], values))
    return rows


def write_feature_rows(rows: list[tuple[str, dict[str, float]]]) -> str:
    names: list[str] = []
    for _, values in rows:
        for name in values:
            if name not in names:
                names.append(name)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["instance"] + names)
    for instance_id, values in rows:
        writer.writerow([instance_id] + [_fmt_float(values[n]) if n in values else "" for n in names])
    return out.getvalue()

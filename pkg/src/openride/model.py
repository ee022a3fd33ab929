"""Core problem model: requests, instances, schedules, and traces.

An instance is a metric space, a capacity (a positive integer or None
for unbounded), and a list of transportation requests.  A schedule is a
start position plus a sequence of Move/Load/Unload/Wait actions; a trace
is the record of one simulated online run.

The JSON wire formats are:

  instance  {"metric": {"type": "line"} | {"type": "halfline"}
                       | {"type": "matrix", "d": [[...], ...]},
             "capacity": <positive int> | "inf",
             "requests": [{"a": .., "b": .., "t": ..}, ...]}

  trace     {"schedules": [{"i", "t", "p", "length", "interrupted",
                            "requests"}, ...],
             "events": [{"t", "kind", ...}, ...],
             "completion": <float>}

Request ids are assigned by input order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .metric import HALF_LINE, LINE, MATRIX, MetricSpace, Point, matrix_space
from .numeric import tolerance


class InstanceError(ValueError):
    """Base class for instance parsing and validation failures."""


class ParseError(InstanceError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        loc = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(f"{message}{loc}")
        self.line = line
        self.col = col


class SemanticError(InstanceError):
    def __init__(self, message: str, where: str):
        super().__init__(f"{message} (at {where})")
        self.where = where


@dataclass(frozen=True)
class Request:
    """One transportation request: pick up at a, drop off at b, released at t."""

    id: int
    a: Point
    b: Point
    release: float

    def is_point_to_point(self) -> bool:
        return self.a == self.b


@dataclass(frozen=True)
class Instance:
    space: MetricSpace
    capacity: int | None  # None means unbounded
    requests: tuple[Request, ...]

    def __post_init__(self) -> None:
        if self.capacity is not None and (not isinstance(self.capacity, int) or self.capacity < 1):
            raise SemanticError("capacity must be a positive integer or None", "capacity")
        seen: set[int] = set()
        for r in self.requests:
            if r.id in seen:
                raise SemanticError(f"duplicate request id {r.id}", f"requests[{r.id}]")
            seen.add(r.id)
            for label, p in (("a", r.a), ("b", r.b)):
                if not self.space.is_point(p):
                    raise SemanticError(
                        f"{p!r} is not a point of the {self.space.kind} space",
                        f"requests[{r.id}].{label}",
                    )
            if r.release < 0:
                raise SemanticError("release time must be nonnegative", f"requests[{r.id}].t")
        # kept sorted by release time, ties by id, so release prefixes are contiguous
        object.__setattr__(
            self, "requests", tuple(sorted(self.requests, key=lambda r: (r.release, r.id)))
        )

    @property
    def effective_capacity(self) -> int:
        return len(self.requests) if self.capacity is None else self.capacity

    def request(self, rid: int) -> Request:
        for r in self.requests:
            if r.id == rid:
                return r
        raise KeyError(rid)


def make_instance(space: MetricSpace, capacity: int | None, triples) -> Instance:
    """Build an instance from (a, b, t) triples, ids by position."""
    reqs = tuple(Request(i, a, b, float(t)) for i, (a, b, t) in enumerate(triples))
    return Instance(space, capacity, reqs)


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class Move:
    start: Point
    end: Point
    distance: float


@dataclass(frozen=True)
class Load:
    request_id: int


@dataclass(frozen=True)
class Unload:
    request_id: int


@dataclass(frozen=True)
class Wait:
    until: float  # absolute time


Action = Move | Load | Unload | Wait


@dataclass(frozen=True)
class Schedule:
    start_pos: Point
    actions: tuple[Action, ...]


def schedule_length(sched: Schedule) -> float:
    """Total travel distance of a schedule (waiting contributes nothing)."""
    return sum(a.distance for a in sched.actions if isinstance(a, Move))


@dataclass(frozen=True)
class ScheduleViolation:
    rule: str
    action_index: int
    detail: str


def validate_schedule(
    inst: Instance,
    sched: Schedule,
    start_time: float = 0.0,
    released_only_before: float | None = None,
):
    """Replay a schedule against an instance.

    Returns the finish time of the action sequence if every rule holds,
    otherwise a ScheduleViolation naming the first broken rule.  Rules:
    moves chain, loads happen at the request pickup point no earlier
    than its release, unloads at the dropoff after the load, the load
    count never exceeds capacity, and the schedule serves exactly the
    requests in scope (all of them, or those released up to
    released_only_before).
    """
    space = inst.space
    by_id = {r.id: r for r in inst.requests}
    if released_only_before is None:
        scope = set(by_id)
    else:
        scope = {r.id for r in inst.requests if r.release <= released_only_before + tolerance()}
    cap = inst.effective_capacity
    pos = sched.start_pos
    t = start_time
    loaded: set[int] = set()
    served: set[int] = set()
    for i, act in enumerate(sched.actions):
        if isinstance(act, Move):
            if not space.same_point(act.start, pos):
                return ScheduleViolation("move-chain", i, f"move starts at {act.start!r}, server at {pos!r}")
            t += space.distance(act.start, act.end)
            pos = act.end
        elif isinstance(act, Wait):
            if act.until > t:
                t = act.until
        elif isinstance(act, Load):
            r = by_id.get(act.request_id)
            if r is None:
                return ScheduleViolation("unknown-request", i, f"no request {act.request_id}")
            if r.id not in scope:
                return ScheduleViolation("out-of-scope", i, f"request {r.id} released after the cutoff")
            if r.id in loaded or r.id in served:
                return ScheduleViolation("double-load", i, f"request {r.id} loaded twice")
            if not space.same_point(pos, r.a):
                return ScheduleViolation("load-position", i, f"load of {r.id} at {pos!r}, pickup is {r.a!r}")
            if t < r.release - tolerance():
                return ScheduleViolation("load-before-release", i, f"load of {r.id} at {t}, released {r.release}")
            if len(loaded) + 1 > cap:
                return ScheduleViolation("capacity", i, f"{len(loaded) + 1} loaded exceeds capacity {cap}")
            loaded.add(r.id)
        elif isinstance(act, Unload):
            r = by_id.get(act.request_id)
            if r is None:
                return ScheduleViolation("unknown-request", i, f"no request {act.request_id}")
            if r.id not in loaded:
                return ScheduleViolation("unload-not-loaded", i, f"request {r.id} is not on board")
            if not space.same_point(pos, r.b):
                return ScheduleViolation("unload-position", i, f"unload of {r.id} at {pos!r}, dropoff is {r.b!r}")
            loaded.remove(r.id)
            served.add(r.id)
        else:
            return ScheduleViolation("unknown-action", i, repr(act))
    if served != scope:
        missing = sorted(scope - served)
        return ScheduleViolation("incomplete", len(sched.actions), f"requests {missing} not served")
    return t


# ---------------------------------------------------------------------------
# traces


@dataclass
class ScheduleRecord:
    """One planned schedule of an online run."""

    index: int
    start_time: float
    start_pos: Any  # Point, or {"edge": [u, v], "offset": s} after encoding
    request_ids: tuple[int, ...]
    length: float
    interrupted: bool
    schedule: Schedule | None = None  # kept for replay checks, not serialized


@dataclass(frozen=True)
class TraceEvent:
    time: float
    kind: str
    data: dict = field(default_factory=dict)


@dataclass
class Trace:
    algo: str
    alpha: float | None
    schedules: list[ScheduleRecord]
    events: list[TraceEvent]
    completion: float


# ---------------------------------------------------------------------------
# JSON


def instance_from_dict(obj: dict) -> Instance:
    if not isinstance(obj, dict):
        raise SemanticError("instance must be a JSON object", "$")
    for key in ("metric", "capacity", "requests"):
        if key not in obj:
            raise SemanticError(f"missing field {key!r}", "$")
    m = obj["metric"]
    if not isinstance(m, dict) or "type" not in m:
        raise SemanticError("metric must be an object with a 'type'", "metric")
    kind = m["type"]
    if kind == LINE:
        space = MetricSpace(LINE)
    elif kind == HALF_LINE:
        space = MetricSpace(HALF_LINE)
    elif kind == MATRIX:
        if "d" not in m:
            raise SemanticError("matrix metric needs entries under 'd'", "metric.d")
        space = matrix_space(m["d"])
        bad = space.validate()
        if bad is not None:
            raise SemanticError(f"invalid distance matrix: {bad.reason}: {bad.detail}", "metric.d")
    else:
        raise SemanticError(f"unknown metric type {kind!r}", "metric.type")
    cap = obj["capacity"]
    if cap == "inf":
        capacity = None
    elif isinstance(cap, int) and not isinstance(cap, bool) and cap >= 1:
        capacity = cap
    else:
        raise SemanticError("capacity must be a positive integer or \"inf\"", "capacity")
    reqs = obj["requests"]
    if not isinstance(reqs, list):
        raise SemanticError("requests must be an array", "requests")
    triples = []
    for i, r in enumerate(reqs):
        if not isinstance(r, dict) or not all(k in r for k in ("a", "b", "t")):
            raise SemanticError("request needs fields a, b, t", f"requests[{i}]")
        a, b = r["a"], r["b"]
        if kind == MATRIX:
            if not isinstance(a, int) or not isinstance(b, int) or isinstance(a, bool) or isinstance(b, bool):
                raise SemanticError("matrix points must be integer node indices", f"requests[{i}]")
        else:
            a, b = float(a), float(b)
        triples.append((a, b, r["t"]))
    return make_instance(space, capacity, triples)


def instance_to_dict(inst: Instance) -> dict:
    if inst.space.kind == MATRIX:
        m = {"type": MATRIX, "d": [list(row) for row in inst.space.matrix]}
    else:
        m = {"type": inst.space.kind}
    return {
        "metric": m,
        "capacity": "inf" if inst.capacity is None else inst.capacity,
        "requests": [{"a": r.a, "b": r.b, "t": r.release} for r in inst.requests],
    }


def parse_instance(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno, e.colno) from e
    return instance_from_dict(obj)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def action_to_obj(act: Action) -> list:
    if isinstance(act, Move):
        return ["move", act.start, act.end]
    if isinstance(act, Load):
        return ["load", act.request_id]
    if isinstance(act, Unload):
        return ["unload", act.request_id]
    return ["wait", act.until]


def schedule_to_obj(sched: Schedule) -> dict:
    return {"start": sched.start_pos, "actions": [action_to_obj(a) for a in sched.actions]}


def trace_to_dict(trace: Trace) -> dict:
    return {
        "algo": trace.algo,
        "alpha": trace.alpha,
        "schedules": [
            {
                "i": rec.index,
                "t": rec.start_time,
                "p": rec.start_pos,
                "length": rec.length,
                "interrupted": rec.interrupted,
                "requests": list(rec.request_ids),
            }
            for rec in trace.schedules
        ],
        "events": [{"t": ev.time, "kind": ev.kind, **ev.data} for ev in trace.events],
        "completion": trace.completion,
    }

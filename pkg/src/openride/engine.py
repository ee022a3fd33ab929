"""Online simulation engine.

The simulator runs a discrete event loop with two event sources:
request releases (grouped into batches of equal release time) and
command boundaries of the single server.  Policies react through two
handlers, mirroring how an online algorithm is specified:

* on_request fires after a release batch is added to the pending set,
  whatever the server is doing;
* on_idle fires when the server finishes a command, and again after a
  batch if the server is left without a command, so an idle server
  reconsiders as soon as anything changes.

At equal timestamps releases are processed before command completions,
so the idle handler always sees the updated pending set and the
request handler sees the server state before any same-instant action.

Between nodes of a matrix space the server occupies a point strictly
inside an edge, tracked as EdgePos; the induced distance from such a
point to a node w is min(offset + d(u, w), rest + d(v, w)), which is
how interrupted routes are re-planned mid-edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .metric import MATRIX, MetricSpace, Point
from .model import (
    Instance,
    Load,
    Move,
    Request,
    Schedule,
    ScheduleRecord,
    Trace,
    TraceEvent,
    Unload,
    schedule_length,
)
from .numeric import TIE_EPS, tolerance
from .offline import (
    DEFAULT_SEARCH_CAP,
    OptCache,
    fastest_delivery_and_return,
    shortest_schedule,
)


class EngineError(RuntimeError):
    """The simulation violated an internal invariant."""


@dataclass(frozen=True)
class EdgePos:
    """Position strictly inside edge (u, v) of a matrix space."""

    u: int
    v: int
    offset: float  # distance travelled from u toward v


Position = Point | EdgePos


def encode_pos(pos: Position):
    if isinstance(pos, EdgePos):
        return {"edge": [pos.u, pos.v], "offset": pos.offset}
    return pos


# command steps
@dataclass
class MoveStep:
    frm: Position
    to: Point
    dur: float


@dataclass
class WaitStep:
    until: float


@dataclass
class LoadStep:
    rid: int


@dataclass
class UnloadStep:
    rid: int


@dataclass
class Command:
    kind: str  # "wait" | "schedule" | "return"
    steps: list
    schedule_no: int | None = None  # index into the trace's schedule records
    idx: int = 0
    moved: float = 0.0  # progress inside the current move step


def _steps_of_schedule(sched: Schedule) -> list:
    steps: list = []
    for act in sched.actions:
        if isinstance(act, Move):
            steps.append(MoveStep(act.start, act.end, act.distance))
        elif isinstance(act, Load):
            steps.append(LoadStep(act.request_id))
        elif isinstance(act, Unload):
            steps.append(UnloadStep(act.request_id))
        else:
            raise EngineError("planned schedules never wait")
    return steps


class Simulation:
    """State of one online run: clock, server, pending requests, command."""

    def __init__(self, inst: Instance, policy, opt_cache: OptCache | None = None,
                 search_cap: int = DEFAULT_SEARCH_CAP):
        self.inst = inst
        self.space = inst.space
        self.policy = policy
        self.search_cap = search_cap
        self.req_by_id = {r.id: r for r in inst.requests}
        self.time = 0.0
        self.pos: Position = inst.space.origin
        self.pending: set[int] = set()  # released, not yet served (loaded included)
        self.loaded: set[int] = set()
        self.served: set[int] = set()
        self.released_count = 0
        self.cmd: Command | None = None
        self.records: list[ScheduleRecord] = []
        self.events: list[TraceEvent] = []
        self.schedule_counter = 0
        self.last_unload = 0.0
        self._opt_cache = opt_cache

    # -- queries used by policies ------------------------------------

    @property
    def opt_cache(self) -> OptCache:
        if self._opt_cache is None:
            self._opt_cache = OptCache(self.inst, self.search_cap)
        return self._opt_cache

    def opt_now(self) -> float:
        """Optimal completion over everything released so far."""
        return self.opt_cache.value(self.released_count)

    def fastest_return_plan(self):
        """Duration and steps of the quickest deliver-all-and-go-home route."""
        dests = sorted({self.req_by_id[rid].b for rid in self.loaded})
        pos = self.pos
        if isinstance(pos, EdgePos):
            duv = self.space.distance(pos.u, pos.v)
            du, route_u = fastest_delivery_and_return(dests, pos.u, self.space, self.search_cap)
            dv, route_v = fastest_delivery_and_return(dests, pos.v, self.space, self.search_cap)
            if pos.offset + du <= (duv - pos.offset) + dv + TIE_EPS:
                total, node, route = pos.offset + du, pos.u, route_u
                first = MoveStep(pos, pos.u, pos.offset)
            else:
                total, node, route = (duv - pos.offset) + dv, pos.v, route_v
                first = MoveStep(pos, pos.v, duv - pos.offset)
            return total, [first] + self._route_steps(node, route)
        dur, route = fastest_delivery_and_return(dests, pos, self.space, self.search_cap)
        return dur, self._route_steps(pos, route)

    def _route_steps(self, start: Point, route) -> list:
        """Moves along route waypoints, unloading at matching dropoffs."""
        steps: list = []
        cur = start
        left = sorted(self.loaded)
        for w in route[:-1]:
            if not self.space.same_point(cur, w):
                steps.append(MoveStep(cur, w, self.space.distance(cur, w)))
                cur = w
            for rid in list(left):
                if self.space.same_point(self.req_by_id[rid].b, w):
                    steps.append(UnloadStep(rid))
                    left.remove(rid)
        origin = route[-1]
        if not self.space.same_point(cur, origin):
            steps.append(MoveStep(cur, origin, self.space.distance(cur, origin)))
        return steps

    # -- commands issued by policies ---------------------------------

    def log(self, kind: str, **data) -> None:
        self.events.append(TraceEvent(self.time, kind, data))

    def start_wait(self, until: float) -> None:
        self.cmd = Command("wait", [WaitStep(until)])
        self.log("wait", until=until)

    def note_idle(self) -> None:
        self.cmd = None
        self.log("idle")

    def start_deliver_return(self, steps: list) -> None:
        if self.cmd is not None and self.cmd.kind == "schedule":
            rec = self.records[self.cmd.schedule_no]
            rec.interrupted = True
            self.log("interrupt", schedule=rec.index)
        self.cmd = Command("return", steps)
        self.log("return")

    def start_pending_schedule(self) -> None:
        """Plan and follow a shortest schedule over the pending set."""
        if isinstance(self.pos, EdgePos) or self.loaded:
            raise EngineError("schedules start empty-handed at a node")
        reqs = [self.req_by_id[rid] for rid in sorted(self.pending)]
        sched = shortest_schedule(reqs, self.pos, self.space, self.inst.capacity,
                                  search_cap=self.search_cap, start_time=self.time)
        self._follow(sched, schedule_length(sched), self.pos, _steps_of_schedule(sched))

    def start_replan_schedule(self) -> None:
        """Re-plan over all unserved requests, keeping what is on board."""
        if self.cmd is not None and self.cmd.kind == "schedule":
            rec = self.records[self.cmd.schedule_no]
            rec.interrupted = True
            self.log("interrupt", schedule=rec.index)
        reqs = [self.req_by_id[rid] for rid in sorted(self.pending)]
        loaded = sorted(self.loaded)
        pos = self.pos
        if isinstance(pos, EdgePos):
            duv = self.space.distance(pos.u, pos.v)
            su = shortest_schedule(reqs, pos.u, self.space, self.inst.capacity, loaded,
                                   self.search_cap, self.time)
            sv = shortest_schedule(reqs, pos.v, self.space, self.inst.capacity, loaded,
                                   self.search_cap, self.time)
            lu = pos.offset + schedule_length(su)
            lv = (duv - pos.offset) + schedule_length(sv)
            if lu <= lv + TIE_EPS:
                first, sched, total = MoveStep(pos, pos.u, pos.offset), su, lu
            else:
                first, sched, total = MoveStep(pos, pos.v, duv - pos.offset), sv, lv
            self._follow(sched, total, pos, [first] + _steps_of_schedule(sched))
        else:
            sched = shortest_schedule(reqs, pos, self.space, self.inst.capacity, loaded,
                                      self.search_cap, self.time)
            self._follow(sched, schedule_length(sched), pos, _steps_of_schedule(sched))

    def _follow(self, sched: Schedule, length: float, pos: Position, steps: list) -> None:
        self.schedule_counter += 1
        rec = ScheduleRecord(
            index=self.schedule_counter,
            start_time=self.time,
            start_pos=encode_pos(pos),
            request_ids=tuple(sorted(self.pending)),
            length=length,
            interrupted=False,
            schedule=sched,
        )
        self.records.append(rec)
        self.cmd = Command("schedule", steps, schedule_no=len(self.records) - 1)
        self.log("schedule", i=rec.index, length=length)

    # -- event loop ---------------------------------------------------

    def _boundary(self) -> float:
        step = self.cmd.steps[self.cmd.idx]
        if isinstance(step, MoveStep):
            return self.time + (step.dur - self.cmd.moved)
        if isinstance(step, WaitStep):
            return max(self.time, step.until)
        return self.time

    def _interpolate(self, step: MoveStep, moved: float) -> Position:
        if moved >= step.dur - TIE_EPS:
            return step.to
        if moved <= TIE_EPS:
            return step.frm
        frm = step.frm
        if self.space.kind != MATRIX:
            return frm + (moved if step.to > frm else -moved)
        if isinstance(frm, EdgePos):
            if step.to == frm.u:
                return EdgePos(frm.u, frm.v, frm.offset - moved)
            return EdgePos(frm.u, frm.v, frm.offset + moved)
        return EdgePos(frm, step.to, moved)

    def _advance_to(self, t: float) -> None:
        if t > self.time and self.cmd is not None and self.cmd.idx < len(self.cmd.steps):
            step = self.cmd.steps[self.cmd.idx]
            if isinstance(step, MoveStep):
                self.cmd.moved += t - self.time
                self.pos = self._interpolate(step, self.cmd.moved)
        self.time = t

    def _finish_step(self) -> None:
        cmd = self.cmd
        step = cmd.steps[cmd.idx]
        if isinstance(step, MoveStep):
            self.pos = step.to
            cmd.moved = 0.0
        elif isinstance(step, LoadStep):
            rid = step.rid
            if rid not in self.pending or rid in self.loaded:
                raise EngineError(f"load of request {rid} out of order")
            if len(self.loaded) >= self.inst.effective_capacity:
                raise EngineError("capacity exceeded")
            if not self.space.same_point(self.pos, self.req_by_id[rid].a):
                raise EngineError(f"load of request {rid} away from its pickup")
            self.loaded.add(rid)
            self.log("load", id=rid)
        elif isinstance(step, UnloadStep):
            rid = step.rid
            if rid not in self.loaded:
                raise EngineError(f"unload of request {rid} not on board")
            if not self.space.same_point(self.pos, self.req_by_id[rid].b):
                raise EngineError(f"unload of request {rid} away from its dropoff")
            self.loaded.remove(rid)
            self.pending.remove(rid)
            self.served.add(rid)
            self.last_unload = self.time
            self.log("unload", id=rid)
        cmd.idx += 1

    def _process_batch(self, batch) -> None:
        _, reqs = batch
        for r in reqs:
            self.pending.add(r.id)
            self.released_count += 1
            self.log("arrival", id=r.id)
        self.policy.on_request(self)
        if self.cmd is None:
            self.policy.on_idle(self)

    def run(self) -> Trace:
        reqs = self.inst.requests
        batches = []
        i = 0
        while i < len(reqs):
            j = i
            while j < len(reqs) and reqs[j].release == reqs[i].release:
                j += 1
            batches.append((reqs[i].release, reqs[i:j]))
            i = j
        bi = 0
        guard = 0
        limit = 200 * (len(reqs) + 1) + 1000
        while True:
            guard += 1
            if guard > limit:
                raise EngineError("simulation failed to make progress")
            if self.cmd is not None and self.cmd.idx >= len(self.cmd.steps):
                done = self.cmd
                self.cmd = None
                self.log(f"{done.kind}-end")
                self.policy.on_idle(self)
                continue
            next_rel = batches[bi][0] if bi < len(batches) else None
            if self.cmd is None:
                if next_rel is None:
                    break
                self.time = next_rel
                self._process_batch(batches[bi])
                bi += 1
                continue
            tb = self._boundary()
            if next_rel is not None and next_rel <= tb:
                self._advance_to(next_rel)
                self._process_batch(batches[bi])
                bi += 1
                continue
            self._advance_to(tb)
            self._finish_step()
        if len(self.served) != len(reqs):
            raise EngineError("run ended with unserved requests")
        return Trace(
            algo=self.policy.name,
            alpha=getattr(self.policy, "alpha", None),
            schedules=self.records,
            events=self.events,
            completion=self.last_unload,
        )


# ---------------------------------------------------------------------------
# policies


class LazyPolicy:
    """Wait-then-serve online algorithm with waiting parameter alpha.

    On every release the server checks whether it can finish dropping
    off what it carries and be back at the origin by alpha times the
    current clairvoyant optimum; if so it abandons its plan and does
    exactly that.  When idle it waits until the clock catches up with
    alpha times the optimum, then serves everything pending via a
    shortest schedule.
    """

    name = "lazy"

    def __init__(self, alpha: float):
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        self.alpha = alpha

    def on_request(self, sim: Simulation) -> None:
        dur, steps = sim.fastest_return_plan()
        if sim.time + dur <= self.alpha * sim.opt_now() + tolerance():
            sim.start_deliver_return(steps)

    def on_idle(self, sim: Simulation) -> None:
        target = self.alpha * sim.opt_now()
        if sim.time < target - tolerance():
            sim.start_wait(target)
        elif sim.pending:
            sim.start_pending_schedule()
        else:
            sim.note_idle()


class ReplanPolicy:
    """Re-plan a minimal-completion schedule at every release epoch."""

    name = "replan"

    def on_request(self, sim: Simulation) -> None:
        sim.start_replan_schedule()

    def on_idle(self, sim: Simulation) -> None:
        if sim.pending:
            sim.start_pending_schedule()
        else:
            sim.note_idle()


class IgnorePolicy:
    """Serve the pending set when idle; never react while busy."""

    name = "ignore"

    def on_request(self, sim: Simulation) -> None:
        pass

    def on_idle(self, sim: Simulation) -> None:
        if sim.pending:
            sim.start_pending_schedule()
        else:
            sim.note_idle()


def simulate(inst: Instance, policy, opt_cache: OptCache | None = None,
             search_cap: int = DEFAULT_SEARCH_CAP) -> Trace:
    """Run a policy on an instance; deterministic for fixed inputs."""
    return Simulation(inst, policy, opt_cache, search_cap).run()


# ---------------------------------------------------------------------------
# trace checkers


@dataclass(frozen=True)
class GoodnessRow:
    index: int
    opt_value: float
    length_ok: bool
    deadline_ok: bool

    @property
    def ok(self) -> bool:
        return self.length_ok and self.deadline_ok


def check_alpha_good(trace: Trace, inst: Instance, alpha: float, tol: float = 1e-6,
                     cache: OptCache | None = None) -> list[GoodnessRow]:
    """Check each schedule of a lazy trace against the two-part bound.

    Schedule i starting at time t with optimum value opt = OPT(t) is
    good when its length is at most opt and it finishes by
    (1 + alpha) * opt, both up to tol.
    """
    if cache is None:
        cache = OptCache(inst)
    rows = []
    for rec in trace.schedules:
        opt_val = cache.value(cache.prefix_for(rec.start_time))
        rows.append(
            GoodnessRow(
                index=rec.index,
                opt_value=opt_val,
                length_ok=rec.length <= opt_val + tol,
                deadline_ok=rec.start_time + rec.length <= (1 + alpha) * opt_val + tol,
            )
        )
    return rows


def check_lazy_starts(trace: Trace, inst: Instance, tol: float = 1e-6,
                       cache: OptCache | None = None) -> list[dict]:
    """Consecutive-schedule inequalities of a lazy trace.

    For schedules i-1, i: OPT(t_i) >= t_{i-1} and
    t_{i-1} >= alpha * OPT(t_{i-1}).  Returns the list of violations
    (empty when the trace is consistent).
    """
    if trace.alpha is None:
        raise ValueError("start checks need a lazy trace with its alpha")
    if cache is None:
        cache = OptCache(inst)
    alpha = trace.alpha
    bad = []
    recs = trace.schedules
    for rec in recs:
        opt_rec = cache.value(cache.prefix_for(rec.start_time))
        if rec.start_time < alpha * opt_rec - tol:
            bad.append({"i": rec.index, "rule": "start-after-alpha-opt",
                        "lhs": rec.start_time, "rhs": alpha * opt_rec})
    for prev, cur in zip(recs, recs[1:]):
        opt_cur = cache.value(cache.prefix_for(cur.start_time))
        if opt_cur < prev.start_time - tol:
            bad.append({"i": cur.index, "rule": "opt-dominates-previous-start",
                        "lhs": opt_cur, "rhs": prev.start_time})
    return bad

"""Experiments: adversarial instances, ratio measurement, fuzzing.

The fuzzer draws random instances from a seeded generator, runs a
policy on each, and compares the online completion time against the
exact offline optimum.  Generation is deterministic per (seed, index),
so any worst case found can be regenerated from its index alone; the
parallel path returns bare numbers from workers and rebuilds the worst
instance in the parent for exactly this reason.

Coordinates and release times are snapped to small integers with some
probability.  That is deliberate: coincident points, zero legs and
simultaneous releases are where tie-breaking and batching bugs live,
and purely continuous draws would never hit them.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .engine import IgnorePolicy, LazyPolicy, ReplanPolicy, check_alpha_good, check_lazy_starts, simulate
from .metric import HALF_LINE, LINE, MATRIX, MetricSpace, half_line, line, matrix_space
from .model import Instance, Load, Schedule, Trace, Unload, make_instance, validate_schedule
from .numeric import tolerance
from .offline import OptCache

# best waiting parameters and the half-line impossibility threshold
OPTIMAL_ALPHA_GENERAL = 0.5 + math.sqrt(11.0 / 12.0)
OPTIMAL_ALPHA_HALF_LINE = (1.0 + math.sqrt(3.0)) / 2.0
HALF_LINE_LOWER_BOUND = (3.0 + math.sqrt(3.0)) / 2.0


def gen_halfline_lb(alpha: float, epsilon: float = 1e-4, capacity: int | None = 1) -> Instance:
    """Half-line instance forcing a waiting policy with this alpha high.

    Needs 1 <= alpha < (1 + sqrt(3)) / 2, the range in which the late
    lone request still cannot be folded into the first schedule.  The
    ratio approaches (3 + sqrt(3)) / 2 as alpha approaches the upper
    end and epsilon approaches zero.
    """
    if not 1.0 <= alpha < OPTIMAL_ALPHA_HALF_LINE:
        raise ValueError("alpha must lie in [1, (1+sqrt(3))/2)")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    far = 4.0 * alpha - 2.0
    return make_instance(
        half_line(),
        capacity,
        [
            (0.0, 1.0, 0.0),
            (1.0, 0.0, 0.0),
            (1.0, 2.0 - epsilon, 0.0),
            (far, far, 4.0 * alpha),
        ],
    )


def make_policy(algo: str, alpha: float | None):
    if algo == "lazy":
        if alpha is None:
            raise ValueError("the lazy policy needs an alpha")
        return LazyPolicy(alpha)
    if algo == "replan":
        return ReplanPolicy()
    if algo == "ignore":
        return IgnorePolicy()
    raise ValueError(f"unknown algorithm {algo!r}")


def competitive_ratio(inst: Instance, algo: str, alpha: float | None = None,
                      opt_cache: OptCache | None = None) -> float:
    """Online completion divided by the offline optimum for one instance."""
    cache = opt_cache if opt_cache is not None else OptCache(inst)
    trace = simulate(inst, make_policy(algo, alpha), cache)
    opt = cache.value(len(inst.requests))
    if opt <= tolerance():
        return 1.0 if trace.completion <= tolerance() else math.inf
    return trace.completion / opt


# ---------------------------------------------------------------------------
# fuzzing


@dataclass(frozen=True)
class FuzzConfig:
    count: int = 100
    seed: int = 0
    spaces: tuple[str, ...] = (LINE, HALF_LINE, MATRIX)
    max_requests: int = 5
    capacities: tuple[int | None, ...] = (1, 2, None)
    matrix_nodes: tuple[int, int] = (2, 5)
    span: float = 10.0
    horizon: float = 10.0
    same_point_prob: float = 0.25
    alpha: float | None = None
    workers: int | None = None
    check_schedules: bool = False


@dataclass(frozen=True)
class RatioReport:
    algo: str
    alpha: float | None
    count: int
    worst: float
    worst_index: int
    mean: float
    violations: int
    worst_instance: Instance | None = field(default=None, compare=False)


def _coord(rng: random.Random, cfg: FuzzConfig, lo: float) -> float:
    if rng.random() < 0.25:
        x = float(rng.randint(-3, 3))
        return abs(x) if lo == 0.0 else x
    return rng.uniform(lo, cfg.span)


def _release(rng: random.Random, cfg: FuzzConfig) -> float:
    u = rng.random()
    if u < 0.2:
        return 0.0
    if u < 0.4:
        return float(rng.randint(0, 4))
    return rng.uniform(0.0, cfg.horizon)


def _random_matrix(rng: random.Random, nodes: tuple[int, int]) -> MetricSpace:
    n = rng.randint(*nodes)
    d = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w = float(rng.randint(1, 9)) if rng.random() < 0.5 else rng.uniform(1.0, 9.0)
            d[i][j] = d[j][i] = w
    for k in range(n):  # shortest-path closure restores the triangle inequality
        for i in range(n):
            for j in range(n):
                via = d[i][k] + d[k][j]
                if via < d[i][j]:
                    d[i][j] = via
    return matrix_space(d)


def generate_instance(cfg: FuzzConfig, index: int) -> Instance:
    """Instance number `index` of the stream defined by cfg.seed."""
    rng = random.Random(cfg.seed * 1_000_003 + index)
    kind = rng.choice(cfg.spaces)
    if kind == LINE:
        space, lo = line(), -cfg.span
    elif kind == HALF_LINE:
        space, lo = half_line(), 0.0
    else:
        space, lo = _random_matrix(rng, cfg.matrix_nodes), 0.0
    n = rng.randint(1, cfg.max_requests)
    capacity = rng.choice(cfg.capacities)
    triples = []
    for _ in range(n):
        if kind == MATRIX:
            a = rng.randrange(space.size)
            b = a if rng.random() < cfg.same_point_prob else rng.randrange(space.size)
        else:
            a = _coord(rng, cfg, lo)
            b = a if rng.random() < cfg.same_point_prob else _coord(rng, cfg, lo)
        triples.append((a, b, _release(rng, cfg)))
    return make_instance(space, capacity, triples)


def _replayable(sched: Schedule) -> bool:
    seen = set()
    for act in sched.actions:
        if isinstance(act, Load):
            seen.add(act.request_id)
        elif isinstance(act, Unload) and act.request_id not in seen:
            return False  # started with requests already on board
    return True


def _check_trace(inst: Instance, trace: Trace, algo: str, alpha: float | None,
                 cache: OptCache) -> int:
    """Structural checks on one run; returns the number of violations."""
    bad = 0
    opt = cache.value(len(inst.requests))
    if trace.completion < opt - 1e-6:
        bad += 1  # an online run can never beat the clairvoyant optimum
    for rec in trace.schedules:
        if rec.interrupted or rec.schedule is None:
            continue
        if isinstance(rec.start_pos, dict) or not _replayable(rec.schedule):
            continue
        sub = Instance(inst.space, inst.capacity,
                       tuple(inst.request(rid) for rid in rec.request_ids))
        finish = validate_schedule(sub, rec.schedule, start_time=rec.start_time)
        if not isinstance(finish, float):
            bad += 1
        elif abs(finish - (rec.start_time + rec.length)) > 1e-6:
            bad += 1
    if algo == "lazy" and alpha is not None and alpha >= 1.0:
        if any(not row.ok for row in check_alpha_good(trace, inst, alpha, cache=cache)):
            bad += 1
        if check_lazy_starts(trace, inst, cache=cache):
            bad += 1
    return bad


def _fuzz_task(args) -> tuple[float, int]:
    cfg, algo, index = args
    inst = generate_instance(cfg, index)
    cache = OptCache(inst)
    policy = make_policy(algo, cfg.alpha)
    trace = simulate(inst, policy, cache)
    opt = cache.value(len(inst.requests))
    if opt <= tolerance():
        ratio = 1.0 if trace.completion <= tolerance() else math.inf
    else:
        ratio = trace.completion / opt
    bad = _check_trace(inst, trace, algo, cfg.alpha, cache) if cfg.check_schedules else 0
    return ratio, bad


def fuzz(cfg: FuzzConfig, algo: str) -> RatioReport:
    """Run `algo` over cfg.count random instances and report the ratios."""
    tasks = [(cfg, algo, i) for i in range(cfg.count)]
    if cfg.workers and cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_fuzz_task, tasks,
                                    chunksize=max(1, cfg.count // (cfg.workers * 8))))
    else:
        results = [_fuzz_task(t) for t in tasks]
    worst, worst_index = -math.inf, -1
    total = 0.0
    violations = 0
    for i, (ratio, bad) in enumerate(results):
        total += ratio
        violations += bad
        if ratio > worst:
            worst, worst_index = ratio, i
    return RatioReport(
        algo=algo,
        alpha=cfg.alpha,
        count=cfg.count,
        worst=worst,
        worst_index=worst_index,
        mean=total / cfg.count if cfg.count else 0.0,
        violations=violations,
        worst_instance=generate_instance(cfg, worst_index) if worst_index >= 0 else None,
    )


# ---------------------------------------------------------------------------
# lower-bound sweep


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    bound: float
    source: str


def sweep_lower_bounds(alphas) -> list[SweepRow]:
    """Best known half-line ratio lower bound per waiting parameter.

    Every alpha is subject to bound 1 + alpha.  Below 1 an eager
    server can be lured arbitrarily far out, giving 1 + 3 / (alpha + 1);
    between 1 and (1 + sqrt(3)) / 2 the four-request family gives
    2 + 1 / (2 alpha).  The reported source is the binding expression.
    """
    rows = []
    for alpha in alphas:
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        candidates = [("1+alpha", 1.0 + alpha)]
        if alpha < 1.0:
            candidates.append(("1+3/(alpha+1)", 1.0 + 3.0 / (alpha + 1.0)))
        elif alpha < OPTIMAL_ALPHA_HALF_LINE:
            candidates.append(("2+1/(2*alpha)", 2.0 + 1.0 / (2.0 * alpha)))
        source, bound = max(candidates, key=lambda c: c[1])
        rows.append(SweepRow(alpha=alpha, bound=bound, source=source))
    return rows

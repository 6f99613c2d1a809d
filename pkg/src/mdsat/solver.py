"""The measurement-driven solver: state preparation, readout, orchestration.

State preparation drives |+>^n toward the ground space by clause checks,
restarting from scratch whenever a check fails.  Conditioned on passing, the
state after j checks is a fixed vector, so the whole preparation is simulated
exactly from the all-pass trajectory: per-step pass probabilities are
precomputed once, restart counts follow a geometric law in the cumulative
pass probability, and the position of the first failure within a failed
attempt is sampled from the induced categorical distribution.  This is
distribution-identical to sampling every check one by one and keeps
measurement counting exact at desk scale.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import spectral
from .config import STATE_CAP, check_cap
from .encoding import Unsatisfiable, check_angle, clause_projectors
from .formula import UNSAT, Formula, count_solutions, evaluate, propagate
from .phf import build_layers, noncommuting_degree
from .statevec import apply_check_unnormalized, plus_state, prob_one, sample_basis

_MU_ZERO = 1e-12
_MIN_GEOMETRIC_P = 1e-12


class RestartsExhausted(RuntimeError):
    """State preparation never survived a full run of cycles."""


class BudgetExhausted(RuntimeError):
    """The measurement budget ran out (probable UNSAT)."""


class ReadoutFailed(RuntimeError):
    """A readout produced an inconsistent or non-satisfying assignment."""


class MeasurementCounter:
    """Tallies projective measurements against an optional budget."""

    def __init__(self, budget: int | None = None):
        self.used = 0
        self.budget = budget

    def spend(self, count: int) -> None:
        self.used += int(count)
        if self.budget is not None and self.used > self.budget:
            self.used = self.budget  # the run halts the moment the budget is hit
            raise BudgetExhausted(f"measurement budget {self.budget} exhausted")


@dataclass(frozen=True)
class Schedule:
    """Rotation-angle schedule: constant, or cubic ramp up to pi/2.

    The cubic ramp runs cycles c = 0..c_q, starting exactly at theta_init and
    ending exactly at pi/2.
    """

    kind: str = "fixed"
    theta_init: float = 0.47 * math.pi / 2
    c_q: int = 0

    def __post_init__(self):
        if self.kind not in ("fixed", "cubic"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        check_angle(self.theta_init)
        if self.kind == "cubic" and self.c_q < 1:
            raise ValueError("cubic schedule needs a target cycle count >= 1")


def schedule_angle(s: Schedule, c: int | float) -> float:
    if s.kind == "fixed":
        return s.theta_init
    if not 0 <= c <= s.c_q:
        raise ValueError(f"cycle {c} outside schedule range 0..{s.c_q}")
    return s.theta_init + (math.pi / 2 - s.theta_init) * (c / s.c_q) ** 3


@dataclass(frozen=True)
class PrepConfig:
    """How to run the state preparation routine."""

    theta: float | Schedule
    epsilon: float = 0.01
    mu_source: str = "empirical"  # empirical | dl_bound | user
    mu: float | None = None
    max_restarts: int = 1_000_000
    mode: str = "monte_carlo"  # monte_carlo | deterministic
    plan: str = "sequential"  # sequential | layered

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("tolerance must lie in (0, 1)")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be >= 1")
        if self.mu_source not in ("empirical", "dl_bound", "user"):
            raise ValueError(f"unknown mu_source {self.mu_source!r}")
        if self.mode not in ("monte_carlo", "deterministic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.plan not in ("sequential", "layered"):
            raise ValueError(f"unknown plan {self.plan!r}")
        if isinstance(self.theta, Schedule):
            if self.theta.kind == "fixed":
                check_angle(self.theta.theta_init)
        else:
            check_angle(self.theta)

    @property
    def is_scheduled(self) -> bool:
        return isinstance(self.theta, Schedule) and self.theta.kind == "cubic"

    def fixed_theta(self) -> float:
        if isinstance(self.theta, Schedule):
            if self.theta.kind != "fixed":
                raise ValueError("config uses an evolving angle")
            return self.theta.theta_init
        return self.theta

    def readout_theta(self) -> float:
        """Angle at which the prepared state is read out."""
        return math.pi / 2 if self.is_scheduled else self.fixed_theta()


def cycles_required(theta: float, n: int, epsilon: float, mu: float) -> int:
    """Cycle count guaranteeing ||P_GS psi_out|| >= 1 - epsilon when ``mu``
    upper-bounds the true convergence rate."""
    check_angle(theta)
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"convergence rate must lie in [0, 1), got {mu}")
    if mu <= _MU_ZERO:
        return 1
    target = math.log(1.0 / (epsilon * math.cos(theta / 2) ** n))
    return max(1, math.ceil(target / math.log(1.0 / mu)))


def resolve_mu(f: Formula, cfg: PrepConfig) -> tuple[float, str]:
    """Convergence-rate input for the cycle bound, per the configured policy."""
    if cfg.mu_source == "user":
        if cfg.mu is None:
            raise ValueError("mu_source='user' requires an explicit mu")
        if not 0.0 <= cfg.mu < 1.0:
            raise ValueError("mu must lie in [0, 1)")
        return cfg.mu, "user"
    theta = cfg.fixed_theta()
    if cfg.mu_source == "empirical":
        # Commuting checks make the product equal the ground-space projector,
        # so mu vanishes with no dense computation: unate supports commute at
        # every angle, and at theta = pi/2 the perpendicular states become
        # orthogonal basis states.
        if noncommuting_degree(f) == 0 or abs(theta - math.pi / 2) < 1e-12:
            if count_solutions(f) == 0:
                raise Unsatisfiable("no ground space to converge to")
            return 0.0, "empirical"
        order = None
        if cfg.plan == "layered":
            layers = build_layers(f, theta)
            order = [ci for layer in layers for ci in layer.members]
        mu = spectral.convergence_rate(f, theta, order=order)
        return (0.0 if mu <= _MU_ZERO else min(mu, 1.0 - 1e-15)), "empirical"
    gap = spectral.spectral_gap(f, theta)
    g = noncommuting_degree(f)
    mu = 0.0 if g == 0 else max(0.0, 1.0 - gap / (4.0 * g**2))
    return mu, "dl_bound"


@dataclass
class Trajectory:
    """All-pass evolution of one preparation attempt."""

    final_state: np.ndarray
    step_pass_probs: np.ndarray  # one entry per measurement
    steps_per_cycle: int
    cycles: int

    @property
    def length(self) -> int:
        return self.step_pass_probs.size

    @property
    def success_probability(self) -> float:
        return float(np.prod(self.step_pass_probs))

    def cumulative_pass(self) -> np.ndarray:
        return np.cumprod(self.step_pass_probs)


def _plan_steps(f: Formula, theta: float, plan: str) -> list[list[int]]:
    if plan == "layered":
        return [list(layer.members) for layer in build_layers(f, theta)]
    return [[i] for i in range(f.m)]


def allpass_trajectory(f: Formula, cfg: PrepConfig, cycles: int) -> Trajectory:
    """Evolve |+>^n through ``cycles`` all-pass cycles, recording the pass
    probability of every measurement.  Once a pass probability hits exactly
    zero the remaining entries are zero and the state stops evolving."""
    check_cap(f.n, STATE_CAP, "state preparation")
    psi = plus_state(f.n)
    probs: list[float] = []
    steps_per_cycle = None
    dead = False
    angles = (
        [schedule_angle(cfg.theta, c) for c in range(cycles)]
        if cfg.is_scheduled
        else [cfg.fixed_theta()] * cycles
    )
    projs = None
    last_angle = None
    for angle in angles:
        if projs is None or angle != last_angle:
            projs = clause_projectors(f, angle)
            steps = _plan_steps(f, angle, cfg.plan)
            last_angle = angle
        if steps_per_cycle is None:
            steps_per_cycle = len(steps)
        for step in steps:
            if dead:
                probs.append(0.0)
                continue
            out = psi
            for ci in step:
                out = apply_check_unnormalized(out, projs[ci])
            p = float(np.dot(out, out))
            probs.append(min(p, 1.0))
            if p <= 0.0:
                dead = True
                continue
            psi = out / math.sqrt(p)
    return Trajectory(
        final_state=psi,
        step_pass_probs=np.array(probs),
        steps_per_cycle=steps_per_cycle or 0,
        cycles=cycles,
    )


@dataclass
class PrepResult:
    state: np.ndarray
    success_probability: float
    r_star: int
    restarts: int
    measurements: int
    mu: float | None
    mu_source: str


class TraceWriter:
    """Streams one CSV row per performed clause/layer measurement.

    Sequential plans use the clause index as the check id, layered plans the
    layer index.  Only completed preparations are logged; a run cut short by
    the budget or the restart allowance ends the trace at the previous
    preparation.
    """

    COLUMNS = ("preparation", "attempt", "cycle", "check", "outcome", "probability")

    def __init__(self, fh):
        self._writer = csv.writer(fh)
        self._writer.writerow(self.COLUMNS)
        self.preparation = -1

    def next_preparation(self) -> None:
        self.preparation += 1

    def emit_attempt(self, traj: "Trajectory", attempt: int, fail_pos: int | None) -> None:
        spc = max(traj.steps_per_cycle, 1)
        end = traj.length if fail_pos is None else fail_pos + 1
        for pos in range(end):
            p_pass = float(traj.step_pass_probs[pos])
            failed = fail_pos is not None and pos == fail_pos
            self._writer.writerow(
                [
                    self.preparation,
                    attempt,
                    pos // spc,
                    pos % spc,
                    "fail" if failed else "pass",
                    f"{(1.0 - p_pass) if failed else p_pass:.17g}",
                ]
            )


def _sample_restart_costs(
    traj: Trajectory,
    rng: np.random.Generator,
    max_restarts: int,
    counter: MeasurementCounter | None,
    collect_trace: bool,
):
    """Sample the number of failed attempts and their measurement cost.

    Returns (restarts, measurements, fail_positions or None); raises
    RestartsExhausted or BudgetExhausted with the cost already counted.
    """
    length = traj.length
    if length == 0:
        return 0, 0, []
    p_s = traj.success_probability
    if p_s >= _MIN_GEOMETRIC_P:
        restarts = int(rng.geometric(p_s)) - 1
    else:
        restarts = max_restarts  # success is unobservable at desk scale
    exhausted = restarts >= max_restarts
    n_fail = min(restarts, max_restarts)
    cum = traj.cumulative_pass()
    prefix = np.concatenate(([1.0], cum[:-1]))
    fail_pmf = prefix * (1.0 - traj.step_pass_probs)
    total_fail = fail_pmf.sum()
    measurements = 0
    positions = [] if collect_trace else None
    if n_fail and total_fail > 0:
        pmf = fail_pmf / total_fail
        remaining = n_fail
        while remaining:
            chunk = min(remaining, 65536)
            draws = rng.choice(length, size=chunk, p=pmf)
            cost = int(draws.sum()) + chunk  # failing measurement included
            measurements += cost
            if counter is not None:
                counter.spend(cost)
            if positions is not None:
                positions.extend(int(d) for d in draws)
            remaining -= chunk
    if exhausted:
        raise RestartsExhausted(
            f"no successful preparation within {max_restarts} restarts"
        )
    return restarts, measurements, positions


class Preparer:
    """Prepares ground-space approximations, caching per-formula trajectories.

    One instance serves many preparation calls within a solve run; the
    trajectory (and the convergence-rate input) is computed once per distinct
    formula and reused, while Monte Carlo restart counts are sampled fresh on
    every call.
    """

    def __init__(
        self,
        cfg: PrepConfig,
        rng: np.random.Generator,
        counter: MeasurementCounter | None = None,
        trace: TraceWriter | None = None,
    ):
        self.cfg = cfg
        self.rng = rng
        self.counter = counter
        self.trace = trace
        self._trajectories: dict[str, Trajectory] = {}
        self._mu: dict[str, tuple[float, str]] = {}

    def _resolve_mu(self, f: Formula) -> tuple[float | None, str]:
        if self.cfg.is_scheduled:
            return None, "schedule"
        key = f.to_dimacs()
        if key not in self._mu:
            self._mu[key] = resolve_mu(f, self.cfg)
        return self._mu[key]

    def cached_mu(self, f: Formula) -> float | None:
        """The convergence-rate input already resolved for ``f``, if any."""
        cached = self._mu.get(f.to_dimacs())
        return cached[0] if cached is not None else None

    def trajectory(self, f: Formula, epsilon: float | None = None) -> tuple[Trajectory, float | None, str, int]:
        epsilon = self.cfg.epsilon if epsilon is None else epsilon
        mu, source = self._resolve_mu(f)
        if self.cfg.is_scheduled:
            cycles = self.cfg.theta.c_q + 1
        else:
            cycles = cycles_required(self.cfg.fixed_theta(), f.n, epsilon, mu)
        key = f"{f.to_dimacs()}|{cycles}|{self.cfg.plan}"
        if key not in self._trajectories:
            self._trajectories[key] = allpass_trajectory(f, self.cfg, cycles)
        return self._trajectories[key], mu, source, cycles

    def prepare(self, f: Formula, epsilon: float | None = None) -> PrepResult:
        traj, mu, source, cycles = self.trajectory(f, epsilon)
        if self.trace is not None:
            self.trace.next_preparation()
        if self.cfg.mode == "deterministic":
            if self.counter is not None:
                self.counter.spend(traj.length)
            if self.trace is not None:
                self.trace.emit_attempt(traj, 0, None)
            return PrepResult(
                state=traj.final_state,
                success_probability=traj.success_probability,
                r_star=cycles,
                restarts=0,
                measurements=traj.length,
                mu=mu,
                mu_source=source,
            )
        restarts, spent, positions = _sample_restart_costs(
            traj, self.rng, self.cfg.max_restarts, self.counter,
            collect_trace=self.trace is not None,
        )
        if self.counter is not None:
            self.counter.spend(traj.length)
        if self.trace is not None:
            for attempt, pos in enumerate(positions):
                self.trace.emit_attempt(traj, attempt, int(pos))
            self.trace.emit_attempt(traj, restarts, None)
        return PrepResult(
            state=traj.final_state,
            success_probability=traj.success_probability,
            r_star=cycles,
            restarts=restarts,
            measurements=spent + traj.length,
            mu=mu,
            mu_source=source,
        )


def prepare_state(
    f: Formula,
    cfg: PrepConfig,
    rng: np.random.Generator,
    counter: MeasurementCounter | None = None,
    trace: TraceWriter | None = None,
) -> PrepResult:
    """One-shot state preparation under ``cfg`` (see :class:`Preparer`)."""
    return Preparer(cfg, rng, counter, trace).prepare(f)


def unique_readout_parameters(theta: float, n: int, delta: float) -> tuple[float, int]:
    """(epsilon, copies) for the majority-vote readout of a unique solution."""
    check_angle(theta)
    eps = (1.0 - 1.0 / math.sqrt(2.0)) ** 2 / 8.0 * math.sin(theta) ** 2
    copies = math.ceil(
        2.0 * math.log(n / delta) / math.log(2.0 / (1.0 + math.cos(theta) ** 2))
    )
    return eps, max(1, copies)


def multiple_readout_parameters(theta: float, n: int, delta: float) -> tuple[float, int]:
    """(epsilon, shots-per-variable) for the variable-by-variable readout."""
    check_angle(theta)
    s2 = math.sin(theta) ** 2
    eps = s2 / 8.0
    shots = math.ceil(8.0 * math.log(2.0 * n / delta) / s2)
    return eps, max(1, shots)


@dataclass
class ReadoutStats:
    preparations: int = 0
    restarts: int = 0
    shots: int = 0
    measurements: int = 0


def readout_unique(
    f: Formula,
    theta: float,
    delta: float,
    rng: np.random.Generator,
    preparer: Preparer | None = None,
    counter: MeasurementCounter | None = None,
    stats: ReadoutStats | None = None,
) -> str:
    """Majority-vote readout; requires the caller's promise of a unique
    solution.  The returned assignment is verified against the formula."""
    if preparer is None:
        preparer = Preparer(PrepConfig(theta=theta, mode="deterministic"), rng, counter)
    eps, copies = unique_readout_parameters(theta, f.n, delta)
    votes = np.zeros(f.n, dtype=np.int64)
    for _ in range(copies):
        prep = preparer.prepare(f, epsilon=eps)
        if counter is not None:
            counter.spend(f.n)
        index = int(sample_basis(prep.state, rng, 1)[0])
        bits = np.array([(index >> (f.n - q)) & 1 for q in range(1, f.n + 1)])
        votes += 2 * bits - 1  # outcome +1 on |1>, -1 on |0>
        if stats is not None:
            stats.preparations += 1
            stats.restarts += prep.restarts
            stats.shots += f.n
            stats.measurements += prep.measurements + f.n
    assignment = "".join("1" if v > 0 else "0" for v in votes)  # tie -> FALSE
    if not evaluate(f, assignment):
        raise ReadoutFailed("majority vote produced a non-satisfying assignment")
    return assignment


def readout_multiple(
    f: Formula,
    theta: float,
    delta: float,
    rng: np.random.Generator,
    preparer: Preparer | None = None,
    counter: MeasurementCounter | None = None,
    stats: ReadoutStats | None = None,
) -> str:
    """Variable-by-variable readout for instances with any number of
    solutions.  Fixes each variable from a Z estimate on the current first
    qubit, propagates, and re-encodes the shrunken formula; a propagation
    that hits an empty clause is the readout's failure event."""
    if preparer is None:
        preparer = Preparer(PrepConfig(theta=theta, mode="deterministic"), rng, counter)
    eps, shots = multiple_readout_parameters(theta, f.n, delta)
    sin_t = math.sin(theta)
    bits: list[str] = []
    cur = f
    for _ in range(f.n):
        occurs = any(l.var == 1 for c in cur.clauses for l in c.literals)
        if not occurs:
            # Unconstrained variable: fixed FALSE by convention, no shots.
            nxt = propagate(cur, 1, False)
            assert nxt is not UNSAT
            bits.append("0")
            cur = nxt
            continue
        total = 0
        for _ in range(shots):
            prep = preparer.prepare(cur, epsilon=eps)
            if counter is not None:
                counter.spend(1)
            outcome = 1 if rng.random() < prob_one(prep.state, 1) else -1
            total += outcome
            if stats is not None:
                stats.preparations += 1
                stats.restarts += prep.restarts
                stats.shots += 1
                stats.measurements += prep.measurements + 1
        p_hat = total / shots
        value = abs(p_hat + sin_t) > abs(p_hat - sin_t)  # TRUE iff -sin ruled out
        nxt = propagate(cur, 1, value)
        if nxt is UNSAT:
            raise ReadoutFailed(
                f"fixing variable {len(bits) + 1} to {value} emptied a clause"
            )
        bits.append("1" if value else "0")
        cur = nxt
    assignment = "".join(bits)
    if not evaluate(f, assignment):
        raise ReadoutFailed("assembled assignment does not satisfy the formula")
    return assignment


@dataclass
class BoundReport:
    """Numeric evaluation of the runtime guarantees (bounds, not predictions)."""

    theta: float
    n: int
    m: int
    delta: float
    q: int
    readout: str
    mu: float | None
    ln_inv_mu: float
    epsilon: float
    cycle_bound: int
    prep_cost: float
    readout_cost: float
    total_cost: float
    unrotated_cost: float

    def to_json(self) -> str:
        return json.dumps({"schema": "mdsat-bounds/1", **asdict(self)}, indent=2)


def theory_bounds(
    theta: float,
    n: int,
    m: int,
    delta: float,
    q: int = 1,
    mu: float | None = None,
    uniform_gap: float | None = None,
    g: int | None = None,
    d_sol: int = 1,
    readout: str = "multiple",
) -> BoundReport:
    """Evaluate the preparation/readout cost bounds with constants as stated.

    ``mu`` or (``uniform_gap``, ``g``) selects how ln(1/mu) is bounded; the
    gap route uses ln(1/mu) >= gap / (4 g^2).
    """
    check_angle(theta)
    if q not in (1, 2):
        raise ValueError("q must be 1 (default) or 2 (amplitude-amplified)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if readout not in ("unique", "multiple"):
        raise ValueError(f"unknown readout {readout!r}")
    if mu is not None:
        if not 0.0 <= mu < 1.0:
            raise ValueError("mu must lie in [0, 1)")
        ln_inv_mu = math.inf if mu <= _MU_ZERO else math.log(1.0 / mu)
    elif uniform_gap is not None:
        if g is None or g < 0:
            raise ValueError("the gap route needs the non-commutation degree g")
        if uniform_gap <= 0:
            raise ValueError("uniform gap must be positive")
        ln_inv_mu = math.inf if g == 0 else uniform_gap / (4.0 * g**2)
    else:
        raise ValueError("supply mu or uniform_gap")
    if readout == "unique":
        epsilon, _ = unique_readout_parameters(theta, n, delta)
        readout_cost = 2.0 * math.log(n / delta) / math.log(
            2.0 / (1.0 + math.cos(theta) ** 2)
        )
    else:
        epsilon, _ = multiple_readout_parameters(theta, n, delta)
        readout_cost = 8.0 * math.log(2.0 * n / delta) / math.sin(theta) ** 2
    if math.isinf(ln_inv_mu):
        cycle_bound = 1
    else:
        cycle_bound = max(
            1,
            math.ceil(
                (math.log(1.0 / epsilon) + n * math.log(1.0 / math.cos(theta / 2)))
                / ln_inv_mu
            ),
        )
    amplification = (2.0 / (1.0 + math.cos(theta))) ** (n / q)
    prep_cost = m * cycle_bound * math.log(1.0 / delta) * amplification
    unrotated = m * math.log(1.0 / delta) * ((2.0**n) / d_sol) ** (1.0 / q)
    return BoundReport(
        theta=theta,
        n=n,
        m=m,
        delta=delta,
        q=q,
        readout=readout,
        mu=mu,
        ln_inv_mu=ln_inv_mu,
        epsilon=epsilon,
        cycle_bound=cycle_bound,
        prep_cost=prep_cost,
        readout_cost=readout_cost,
        total_cost=prep_cost * readout_cost,
        unrotated_cost=unrotated,
    )


def success_probability_floor(theta: float, n: int) -> float:
    """((1 + cos theta)/2)^n, the all-cycles success probability floor."""
    return ((1.0 + math.cos(theta)) / 2.0) ** n


@dataclass
class RunReport:
    """Outcome of one solve run."""

    status: str  # SAT | UNSAT
    assignment: str | None
    n: int
    m: int
    k: int
    theta: float | None
    schedule: dict | None
    delta: float
    readout: str
    mode: str
    plan: str
    mu: float | None
    mu_source: str
    cycles_per_attempt: int | None
    restarts: int
    preparations: int
    readout_attempts: int
    measurements: int
    budget: int | None
    seed: int | None
    verified: bool
    wall_time_s: float
    notes: list[str] = field(default_factory=list)

    def to_json(self, include_timing: bool = True) -> str:
        data = {"schema": "mdsat-report/1", **asdict(self)}
        if not include_timing:
            data.pop("wall_time_s")
        return json.dumps(data, indent=2)


def solve(
    f: Formula,
    theta: float | Schedule,
    delta: float = 0.1,
    readout: str = "multiple",
    seed: int = 0,
    mode: str = "monte_carlo",
    plan: str = "sequential",
    mu_source: str = "empirical",
    mu: float | None = None,
    budget: int | None = None,
    max_restarts: int | None = None,
    max_readout_attempts: int = 64,
    trace_file: str | None = None,
) -> RunReport:
    """Run preparation plus readout until a verified assignment or exhaustion.

    The UNSAT verdict is emitted when the measurement budget (default: ten
    times the theory estimate with a generic convergence rate) or the restart
    allowance (default: ten times the inverse success-probability floor) runs
    out before any readout verifies.  ``trace_file`` streams a CSV log of
    every preparation measurement.
    """
    if readout not in ("unique", "multiple"):
        raise ValueError(f"unknown readout {readout!r}")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    theta_probe = theta.theta_init if isinstance(theta, Schedule) else theta
    if max_restarts is None:
        floor = success_probability_floor(
            math.pi / 2 if isinstance(theta, Schedule) and theta.kind == "cubic"
            else theta_probe,
            f.n,
        )
        max_restarts = max(
            1_000_000, math.ceil(10.0 * math.log(1.0 / delta) / max(floor, 1e-15))
        )
    cfg = PrepConfig(
        theta=theta,
        mu_source=mu_source,
        mu=mu,
        max_restarts=max_restarts,
        mode=mode,
        plan=plan,
    )
    theta_ro = cfg.readout_theta()
    if budget is None:
        est = theory_bounds(
            theta_ro, f.n, max(f.m, 1), delta, mu=mu if mu is not None else 0.5,
            readout=readout,
        )
        budget = max(1000, math.ceil(10.0 * est.total_cost))
    counter = MeasurementCounter(budget)
    notes: list[str] = []

    effective_cfg = cfg
    if not cfg.is_scheduled and cfg.mu_source != "user" and count_solutions(f) == 0:
        # No ground space to measure a convergence rate against; fall back to
        # a generic user rate so the run can exhaust its budget honestly.
        effective_cfg = replace(cfg, mu_source="user", mu=0.5)
        notes.append("mu fallback: no satisfying assignment found by oracle")

    trace_fh = open(trace_file, "w", encoding="utf-8", newline="") if trace_file else None
    tracer = TraceWriter(trace_fh) if trace_fh else None
    preparer = Preparer(effective_cfg, rng, counter, tracer)
    stats = ReadoutStats()
    readout_fn = readout_unique if readout == "unique" else readout_multiple
    mu_used: float | None = None
    mu_src = effective_cfg.mu_source
    cycles: int | None = None
    assignment = None
    attempts = 0
    try:
        while attempts < max_readout_attempts:
            attempts += 1
            try:
                assignment = readout_fn(
                    f, theta_ro, delta, rng,
                    preparer=preparer, counter=counter, stats=stats,
                )
                break
            except ReadoutFailed as exc:
                notes.append(f"readout attempt {attempts} failed: {exc}")
                continue
    except (RestartsExhausted, BudgetExhausted) as exc:
        notes.append(str(exc))
    finally:
        if trace_fh is not None:
            trace_fh.close()
    if not effective_cfg.is_scheduled:
        mu_used = preparer.cached_mu(f)
        if mu_used is not None:
            params = (
                unique_readout_parameters
                if readout == "unique"
                else multiple_readout_parameters
            )
            eps_ro = params(theta_ro, f.n, delta)[0]
            cycles = cycles_required(
                effective_cfg.fixed_theta(), f.n, eps_ro, mu_used
            )
    verified = assignment is not None and evaluate(f, assignment)
    return RunReport(
        status="SAT" if verified else "UNSAT",
        assignment=assignment if verified else None,
        n=f.n,
        m=f.m,
        k=f.k,
        theta=None if cfg.is_scheduled else cfg.fixed_theta(),
        schedule=(
            {"kind": "cubic", "theta_init": cfg.theta.theta_init, "c_q": cfg.theta.c_q}
            if cfg.is_scheduled
            else None
        ),
        delta=delta,
        readout=readout,
        mode=mode,
        plan=plan,
        mu=mu_used,
        mu_source=mu_src,
        cycles_per_attempt=cycles,
        restarts=stats.restarts,
        preparations=stats.preparations,
        readout_attempts=attempts,
        measurements=counter.used,
        budget=budget,
        seed=seed,
        verified=verified,
        wall_time_s=time.perf_counter() - start,
        notes=notes,
    )

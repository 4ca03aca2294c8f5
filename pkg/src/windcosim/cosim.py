"""Fixed-step co-simulation master and component contract.

Components expose scalar variables (real, integer, boolean) through a
get/set interface and advance in fixed macro steps; the master owns the
wiring and moves values between components.  Two coupling schemes are
supported:

``serial``
    Components step once per macro step in ascending priority order.
    Immediately before a component steps, each of its inputs is
    refreshed from the *latest available* value of its source.  A
    connection from a lower-priority to a higher-priority component
    therefore carries the current step's value (fresh), while a
    back-edge carries the previous step's value (one-step lag).

``parallel``
    All inputs are latched from the previous macro step's outputs
    before any component steps, so every connection carries a
    one-step lag (Jacobi style).

Neither scheme iterates within a step and no component is ever asked to
roll back, so any topology, cyclic or not, completes without deadlock.

Initialization runs a staged protocol before the first step:

1. every component publishes nominal outputs from its own setpoints
   (``publish_setpoints``),
2. in priority order, with inputs refreshed before each call, every
   component solves its internal equilibrium (``equilibrate``) -- the
   grid runs a power flow here and publishes terminal voltages,
3. in priority order again, every component commits state consistent
   with the final exchanged values (``finish_init``).

A disturbance-free run started this way stays at its operating point.
"""

from __future__ import annotations

import enum
import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import errors as err
from .trace import TraceSet


class VarKind(enum.Enum):
    REAL = "real"
    INT = "int"
    BOOL = "bool"


class Direction(enum.Enum):
    INPUT = "input"
    OUTPUT = "output"


@dataclass(frozen=True)
class VariableRef:
    """Fully qualified handle for one scalar variable of one component."""

    component_id: str
    name: str
    direction: Direction
    kind: VarKind

    def __str__(self) -> str:
        return f"{self.component_id}.{self.name}"


@dataclass(frozen=True)
class Connection:
    """Directed signal path ``sink value := gain * source value + offset``.

    The affine transform is only meaningful for real signals; integer and
    boolean connections must use the identity transform.
    """

    source: VariableRef
    sink: VariableRef
    gain: float = 1.0
    offset: float = 0.0

    def apply(self, value):
        if self.source.kind is VarKind.REAL:
            return self.gain * value + self.offset
        return value


class SimComponent:
    """Base class for steppable components.

    Subclasses declare variables in ``__init__`` and implement
    ``_do_step(t, dt)``; the three initialization hooks default to
    no-ops so trivial components only need the step body.
    """

    def __init__(self, component_id: str):
        self.component_id = component_id
        self.current_time = 0.0
        self._vars: dict[str, VariableRef] = {}
        self._values: dict[str, object] = {}

    # -- declaration -------------------------------------------------------

    def declare_input(self, name: str, kind: VarKind = VarKind.REAL, start=0.0) -> VariableRef:
        return self._declare(name, Direction.INPUT, kind, start)

    def declare_output(self, name: str, kind: VarKind = VarKind.REAL, start=0.0) -> VariableRef:
        return self._declare(name, Direction.OUTPUT, kind, start)

    def _declare(self, name, direction, kind, start) -> VariableRef:
        if name in self._vars:
            raise err.WiringError(f"{self.component_id}: variable '{name}' declared twice")
        ref = VariableRef(self.component_id, name, direction, kind)
        self._vars[name] = ref
        self._values[name] = start
        return ref

    # -- access ------------------------------------------------------------

    def ref(self, name: str) -> VariableRef:
        try:
            return self._vars[name]
        except KeyError:
            raise err.UnknownVariableError(
                f"{self.component_id} has no variable '{name}'"
            ) from None

    def variables(self) -> list[VariableRef]:
        return list(self._vars.values())

    def get(self, name: str):
        self.ref(name)
        return self._values[name]

    def set(self, name: str, value) -> None:
        ref = self.ref(name)
        if ref.kind is VarKind.REAL:
            value = float(value)
        elif ref.kind is VarKind.INT:
            value = int(value)
        else:
            value = bool(value)
        self._values[name] = value

    # -- lifecycle ---------------------------------------------------------

    def publish_setpoints(self) -> None:
        """Stage 1: publish nominal outputs computed without any inputs."""

    def equilibrate(self) -> None:
        """Stage 2: solve internal equilibrium from current input values."""

    def finish_init(self) -> None:
        """Stage 3: commit state consistent with the final exchanged values."""

    def step(self, t: float, dt: float) -> None:
        if dt <= 0.0:
            raise err.ComponentStepError(self.component_id, t, f"non-positive dt {dt}")
        if t < self.current_time - 1e-12:
            raise err.ComponentStepError(
                self.component_id, t, f"time moved backwards (component at {self.current_time})"
            )
        self._do_step(t, dt)
        self.current_time = t + dt

    def _do_step(self, t: float, dt: float) -> None:
        raise NotImplementedError


class Scheme(enum.Enum):
    SERIAL = "serial"
    PARALLEL = "parallel"


@dataclass
class MasterConfig:
    """Orchestration settings for one run."""

    macro_step: float = 1e-3
    t_end: float = 2.0
    scheme: Scheme = Scheme.SERIAL
    record: list[str] = field(default_factory=list)

    def __post_init__(self):
        if isinstance(self.scheme, str):
            self.scheme = Scheme(self.scheme)
        if self.macro_step <= 0.0:
            raise ValueError(f"macro_step must be positive, got {self.macro_step}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")


@dataclass
class RunMetadata:
    scenario: str = ""
    scheme: str = ""
    macro_step: float = 0.0
    t_end: float = 0.0
    steps: int = 0
    components: int = 0
    wall_clock_s: float = 0.0
    events: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


class Master:
    """Registers components, wires them, and drives the macro-step loop."""

    def __init__(self, config: MasterConfig):
        self.config = config
        self._components: dict[str, SimComponent] = {}
        self._priorities: dict[str, int] = {}
        self._connections: list[Connection] = []
        self._by_sink: dict[str, list[Connection]] = {}
        self._driven: set[VariableRef] = set()
        self._latest: dict[VariableRef, object] = {}
        self._order: list[SimComponent] = []
        self._initialized = False
        self.current_step = 0

    # -- construction ------------------------------------------------------

    def register(self, component: SimComponent, priority: int) -> SimComponent:
        cid = component.component_id
        if cid in self._components:
            raise err.DuplicateComponentError(f"component id '{cid}' already registered")
        if priority in self._priorities.values():
            raise err.DuplicatePriorityError(f"priority {priority} already taken")
        self._components[cid] = component
        self._priorities[cid] = priority
        self._order = sorted(self._components.values(), key=lambda c: self._priorities[c.component_id])
        return component

    def resolve(self, qualified: str) -> VariableRef:
        """Resolve a ``component.variable`` string against the registry."""
        comp_id, _, var = qualified.partition(".")
        if not var or comp_id not in self._components:
            raise err.UnknownVariableError(f"cannot resolve '{qualified}'")
        return self._components[comp_id].ref(var)

    def connect(self, source, sink, gain: float = 1.0, offset: float = 0.0) -> Connection:
        if isinstance(source, str):
            source = self.resolve(source)
        if isinstance(sink, str):
            sink = self.resolve(sink)
        if source.direction is not Direction.OUTPUT:
            raise err.DirectionMismatchError(f"connection source {source} is not an output")
        if sink.direction is not Direction.INPUT:
            raise err.DirectionMismatchError(f"connection sink {sink} is not an input")
        if source.kind is not sink.kind:
            raise err.KindMismatchError(
                f"{source} ({source.kind.value}) cannot drive {sink} ({sink.kind.value})"
            )
        if sink in self._driven:
            raise err.SinkAlreadyDrivenError(f"{sink} is already driven")
        if not (math.isfinite(gain) and math.isfinite(offset)) or gain == 0.0:
            raise err.WiringError(f"transform gain={gain} offset={offset} is not usable")
        if source.kind is not VarKind.REAL and (gain != 1.0 or offset != 0.0):
            raise err.KindMismatchError(
                f"{source.kind.value} connection {source} -> {sink} must use the identity transform"
            )
        conn = Connection(source, sink, gain, offset)
        self._connections.append(conn)
        self._by_sink.setdefault(sink.component_id, []).append(conn)
        self._driven.add(sink)
        return conn

    def component(self, component_id: str) -> SimComponent:
        return self._components[component_id]

    def execution_order(self) -> list[str]:
        return [c.component_id for c in self._order]

    # -- value movement ----------------------------------------------------

    def _publish(self, comp: SimComponent, t: float) -> None:
        """Pull a component's outputs into the exchange cache, checking finiteness."""
        for ref in comp.variables():
            if ref.direction is Direction.OUTPUT:
                value = comp._values[ref.name]
                if ref.kind is VarKind.REAL and not math.isfinite(value):
                    raise err.ComponentStepError(
                        comp.component_id, t, f"output '{ref.name}' is not finite ({value!r})"
                    )
                self._latest[ref] = value

    def _refresh_inputs(self, comp: SimComponent) -> None:
        for conn in self._by_sink.get(comp.component_id, ()):
            if conn.source in self._latest:
                comp.set(conn.sink.name, conn.apply(self._latest[conn.source]))

    def _exchange_all(self) -> None:
        for comp in self._order:
            self._refresh_inputs(comp)

    # -- lifecycle ---------------------------------------------------------

    def initialize(self) -> None:
        if not self._components:
            raise err.InitializationError("no components registered")
        t0 = 0.0
        for comp in self._order:
            comp.publish_setpoints()
            self._publish(comp, t0)
        for comp in self._order:
            self._refresh_inputs(comp)
            comp.equilibrate()
            self._publish(comp, t0)
        for comp in self._order:
            self._refresh_inputs(comp)
            comp.finish_init()
            self._publish(comp, t0)
        self._exchange_all()
        self._initialized = True
        self.current_step = 0

    def step_macro(self) -> None:
        if not self._initialized:
            raise err.InitializationError("step_macro before initialize")
        dt = self.config.macro_step
        t = self.current_step * dt
        if self.config.scheme is Scheme.SERIAL:
            for comp in self._order:
                self._refresh_inputs(comp)
                comp.step(t, dt)
                self._publish(comp, t + dt)
        else:
            for comp in self._order:
                self._refresh_inputs(comp)
            for comp in self._order:
                comp.step(t, dt)
            for comp in self._order:
                self._publish(comp, t + dt)
        self.current_step += 1

    # -- recording ---------------------------------------------------------

    def _record_refs(self) -> list[VariableRef]:
        return [self.resolve(name) for name in self.config.record]

    def _sample(self, refs: list[VariableRef]) -> list[float]:
        row = []
        for ref in refs:
            comp = self._components[ref.component_id]
            if ref.direction is Direction.OUTPUT and ref in self._latest:
                row.append(float(self._latest[ref]))
            else:
                row.append(float(comp.get(ref.name)))
        return row

    def run(self, scenario_name: str = "") -> tuple[TraceSet, RunMetadata]:
        meta = RunMetadata(
            scenario=scenario_name,
            scheme=self.config.scheme.value,
            macro_step=self.config.macro_step,
            t_end=self.config.t_end,
            components=len(self._components),
        )
        dt = self.config.macro_step
        n_steps = int(math.floor(self.config.t_end / dt + 1e-9))
        t_eff = n_steps * dt
        if abs(t_eff - self.config.t_end) > 1e-9 * max(1.0, abs(self.config.t_end)):
            meta.warnings.append(
                f"t_end {self.config.t_end} is not a multiple of macro_step {dt}; "
                f"running to {t_eff}"
            )
        meta.steps = n_steps

        started = _time.perf_counter()
        if not self._initialized:
            self.initialize()
        refs = self._record_refs()
        times = [0.0]
        rows = [self._sample(refs)]
        for _ in range(n_steps):
            self.step_macro()
            times.append(self.current_step * dt)
            rows.append(self._sample(refs))
        meta.wall_clock_s = _time.perf_counter() - started

        data = np.asarray(rows, dtype=float).reshape(len(times), len(refs))
        channels = {str(ref): data[:, i] for i, ref in enumerate(refs)}
        return TraceSet(time=np.asarray(times), channels=channels), meta

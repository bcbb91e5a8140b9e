"""Discrete-event simulation of multi-component co-execution.

A single stream of numbered frames feeds one shared ready queue. Every
engaged component, the moment it is idle, claims the lowest-numbered
unclaimed frame and finishes it one service time later; with a single
producer this shared-queue formulation is observationally equivalent to
per-worker deques with stealing, and it is deterministic. Completed
frames pass through a reorder buffer that releases them strictly in
sequence order.

Service time per frame on a component is 1/rate + dispatch overhead,
where rate is the measured isolated throughput scaled by an availability
factor. Factors model host-cluster contention: they default to 1.0, can
be set explicitly per component, or derived from an opt-in per-hosted-
accelerator derating. Optional lognormal jitter (given coefficient of
variation and seed) perturbs the processing part of the service time.

The event loop is single threaded; identical scenarios yield bit-identical
results. Independent scenarios can safely run concurrently since nothing
here shares mutable state.
"""

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .dataset import network_by_id, platform_by_id
from .errors import MalformedDocument, UnknownComponent, UnsupportedPair
from .profiles import ComponentSpec, NetworkProfile, Platform, Source, _read_document


@dataclass(frozen=True)
class Scenario:
    """Input of one co-execution run."""

    platform_id: str
    network_id: str
    engaged: tuple[str, ...]
    frame_count: int
    dispatch_overhead_s: float = 0.0
    contention: dict[str, float] = field(default_factory=dict)
    host_contention_default: Optional[float] = None
    jitter_seed: Optional[int] = None
    jitter_cv: float = 0.0

    def __post_init__(self):
        if not self.engaged:
            raise MalformedDocument("scenario engages no components")
        if len(set(self.engaged)) != len(self.engaged):
            raise MalformedDocument("scenario engages a component twice")
        if not isinstance(self.frame_count, int) or self.frame_count <= 0:
            raise MalformedDocument("frame_count must be a positive integer")
        if self.dispatch_overhead_s < 0:
            raise MalformedDocument("dispatch_overhead_s must be >= 0")
        for comp_id, factor in self.contention.items():
            if not (0 < factor <= 1):
                raise MalformedDocument(
                    f"availability factor for {comp_id!r} must be in (0, 1], "
                    f"got {factor!r}"
                )
        if self.host_contention_default is not None and not (
                0 < self.host_contention_default <= 1):
            raise MalformedDocument(
                "host_contention_default must be in (0, 1]"
            )
        if self.jitter_cv < 0:
            raise MalformedDocument("jitter_cv must be >= 0")


def load_scenario(source: Source) -> Scenario:
    """Parse a scenario document.

    Keys: platform, network, components[], frames, dispatch_overhead_s?,
    contention{id: factor}?, jitter{seed, cv}?.
    """
    doc = _read_document(source)
    body = doc.get("scenario", doc)
    try:
        jitter = body.get("jitter", {})
        return Scenario(
            platform_id=body["platform"],
            network_id=body["network"],
            engaged=tuple(body["components"]),
            frame_count=int(body["frames"]),
            dispatch_overhead_s=float(body.get("dispatch_overhead_s", 0.0)),
            contention={k: float(v) for k, v in body.get("contention", {}).items()},
            jitter_seed=jitter.get("seed"),
            jitter_cv=float(jitter.get("cv", 0.0)),
        )
    except KeyError as exc:
        raise MalformedDocument(f"scenario: missing key {exc}") from exc


class ReorderBuffer:
    """Holds out-of-order completions, releases the sequence 0,1,2,...

    Occupancy is counted with the just-arrived frame included, so a frame
    passing straight through still registers. high_water is the largest
    occupancy seen; with components of very different speeds it grows well
    beyond the component count while a slow frame blocks the head.
    """

    __slots__ = ("next_expected", "held", "high_water")

    def __init__(self):
        self.next_expected = 0
        self.held: set[int] = set()
        self.high_water = 0

    def push(self, seq: int) -> list[int]:
        if seq < self.next_expected or seq in self.held:
            raise MalformedDocument(f"frame {seq} completed twice")
        held = self.held
        held.add(seq)
        if len(held) > self.high_water:
            self.high_water = len(held)
        released = []
        nxt = self.next_expected
        while nxt in held:
            held.remove(nxt)
            released.append(nxt)
            nxt += 1
        self.next_expected = nxt
        return released


@dataclass(frozen=True)
class SimEvent:
    time: float
    kind: str  # claim | complete | release
    component_id: str
    frame: int


@dataclass(frozen=True)
class SimResult:
    """Output of one co-execution run."""

    scenario: Scenario
    makespan_s: float
    throughput: float
    frames_per_component: dict[str, int]
    composition: dict[str, float]
    busy_time_s: dict[str, float]
    energy_j: float
    energy_efficiency: float
    reorder_high_water: int
    events: Optional[tuple[SimEvent, ...]] = None


def availability_factor(scenario: Scenario, platform: Platform,
                        component_id: str) -> float:
    """Availability of one component under the scenario's contention model.

    Explicit factors win. Otherwise, when the opt-in host derating is set,
    a CPU cluster hosting n engaged accelerators gets factor ** n; every
    other component runs at 1.0.
    """
    if component_id in scenario.contention:
        return scenario.contention[component_id]
    if scenario.host_contention_default is not None:
        component = platform.component(component_id)
        if component.is_cpu:
            hosted = [
                accel for accel in platform.hosted_accelerators(component_id)
                if accel in scenario.engaged
            ]
            if hosted:
                return scenario.host_contention_default ** len(hosted)
    return 1.0


def effective_rate(component: ComponentSpec, profile: NetworkProfile,
                   scenario: Scenario, platform: Platform) -> float:
    """Images/s the component contributes under this scenario.

    Measured isolated throughput times the availability factor; raises
    UnsupportedPair when the network cannot run on the component.
    """
    rate = profile.rate(component.id)
    return rate * availability_factor(scenario, platform, component.id)


def rate_sum(scenario: Scenario, platform: Platform,
             profile: NetworkProfile) -> float:
    """Sum of engaged effective rates: the zero-overhead throughput bound."""
    return sum(
        effective_rate(platform.component(cid), profile, scenario, platform)
        for cid in scenario.engaged
    )


def _service_times(scenario: Scenario, platform: Platform,
                   profile: NetworkProfile) -> dict[str, float]:
    services = {}
    for comp_id in scenario.engaged:
        component = platform.component(comp_id)
        rate = effective_rate(component, profile, scenario, platform)
        services[comp_id] = 1.0 / rate
    return services


def simulate(scenario: Scenario, platform: Optional[Platform] = None,
             network: Optional[NetworkProfile] = None,
             record_events: bool = False) -> SimResult:
    """Run one co-execution scenario to completion.

    platform and network default to the bundled dataset entries named by
    the scenario. With jitter_cv = 0 the run is fully deterministic; ties
    between simultaneous completions resolve in component-id order.
    """
    if platform is None:
        platform = platform_by_id(scenario.platform_id)
    if network is None:
        network = network_by_id(scenario.network_id)
    if platform.id != scenario.platform_id:
        raise MalformedDocument(
            f"scenario names platform {scenario.platform_id!r} but got "
            f"{platform.id!r}"
        )
    if network.id != scenario.network_id:
        raise MalformedDocument(
            f"scenario names network {scenario.network_id!r} but got "
            f"{network.id!r}"
        )
    for comp_id in scenario.contention:
        if comp_id not in scenario.engaged:
            raise UnknownComponent(
                f"contention factor given for {comp_id!r} which is not engaged"
            )

    order = sorted(scenario.engaged)
    processing = _service_times(scenario, platform, network)  # may raise UnsupportedPair
    overhead = scenario.dispatch_overhead_s

    jitter = None
    if scenario.jitter_cv > 0:
        jitter = random.Random(scenario.jitter_seed)
        sigma = math.sqrt(math.log(1.0 + scenario.jitter_cv ** 2))
        mu = -0.5 * sigma * sigma

    def draw_service(comp_id: str) -> float:
        base = processing[comp_id]
        if jitter is not None:
            base *= jitter.lognormvariate(mu, sigma)
        return base + overhead

    n_frames = scenario.frame_count
    frames_done = {cid: 0 for cid in order}
    busy = {cid: 0.0 for cid in order}
    buffer = ReorderBuffer()
    events: list[SimEvent] = [] if record_events else None

    heap: list[tuple[float, int, str, int]] = []
    next_frame = 0
    for rank, comp_id in enumerate(order):
        if next_frame >= n_frames:
            break
        service = draw_service(comp_id)
        busy[comp_id] += service
        if events is not None:
            events.append(SimEvent(0.0, "claim", comp_id, next_frame))
        heapq.heappush(heap, (service, rank, comp_id, next_frame))
        next_frame += 1

    makespan = 0.0
    heappush, heappop = heapq.heappush, heapq.heappop
    while heap:
        now, rank, comp_id, frame = heappop(heap)
        makespan = now
        frames_done[comp_id] += 1
        if events is not None:
            events.append(SimEvent(now, "complete", comp_id, frame))
            for seq in buffer.push(frame):
                events.append(SimEvent(now, "release", comp_id, seq))
        else:
            buffer.push(frame)
        if next_frame < n_frames:
            service = draw_service(comp_id)
            busy[comp_id] += service
            if events is not None:
                events.append(SimEvent(now, "claim", comp_id, next_frame))
            heappush(heap, (now + service, rank, comp_id, next_frame))
            next_frame += 1

    if buffer.next_expected != n_frames:
        raise MalformedDocument(
            f"simulation ended with {buffer.next_expected} of {n_frames} "
            f"frames released"
        )

    energy, efficiency = energy_and_efficiency(busy, n_frames, platform)
    return SimResult(
        scenario=scenario,
        makespan_s=makespan,
        throughput=n_frames / makespan,
        frames_per_component=frames_done,
        composition={cid: frames_done[cid] / n_frames for cid in order},
        busy_time_s=busy,
        energy_j=energy,
        energy_efficiency=efficiency,
        reorder_high_water=buffer.high_water,
        events=tuple(events) if events is not None else None,
    )


def composition(result: SimResult) -> dict[str, float]:
    """Fraction of the stream each component processed."""
    total = sum(result.frames_per_component.values())
    return {
        cid: count / total
        for cid, count in result.frames_per_component.items()
    }


def energy_and_efficiency(busy_time_s: dict[str, float], frame_count: int,
                          platform: Platform) -> tuple[float, float]:
    """Active energy in joules and images per joule for one run.

    Energy is active power times busy time, summed over engaged
    components; idle power is excluded by construction of the active
    power values.
    """
    energy = 0.0
    for comp_id, busy in busy_time_s.items():
        component = platform.component(comp_id)  # raises UnknownComponent
        energy += component.active_power_w * busy
    return energy, frame_count / energy


def gain_vs_best_single(scenario: Scenario, platform: Optional[Platform] = None,
                        network: Optional[NetworkProfile] = None) -> float:
    """Throughput gain in percent over the best engaged component alone.

    The baseline is the best measured isolated rate among the engaged
    components, not its contention-scaled value.
    """
    if platform is None:
        platform = platform_by_id(scenario.platform_id)
    if network is None:
        network = network_by_id(scenario.network_id)
    result = simulate(scenario, platform, network)
    best = max(network.rate(cid) for cid in scenario.engaged)
    return 100.0 * (result.throughput - best) / best

"""Roofline construction: operational intensity, attainable performance,
bound classification, plot series, and the quantization transform.

Two operational intensities are computed per workload. The theoretical
value divides operations by every byte the computation touches; the
empirical value divides by measured DRAM traffic only, so caches can only
move it to the right. Attainable performance is the classic two-segment
bound min(ceiling, OI x bandwidth); the knee where the sloped roof meets
the flat ceiling is the ridge point that separates memory- from
compute-bound workloads.

All functions here are pure and operate on immutable inputs.
"""

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import MalformedDocument, MissingTrace
from .profiles import ComponentSpec, LayerProfile, NetworkProfile

BOUND_MEMORY = "memory"
BOUND_COMPUTE = "compute"

OI_THEORETICAL = "theoretical"
OI_EMPIRICAL = "empirical"

QUANT_BITS = (32, 16, 8)


@dataclass(frozen=True)
class RooflineModel:
    """Roofline of one component: sloped roof plus flat ceiling."""

    component_id: str
    roof_bandwidth_gbs: float
    ceiling_compute_gops: float

    def __post_init__(self):
        if not self.roof_bandwidth_gbs > 0 or not self.ceiling_compute_gops > 0:
            raise MalformedDocument(
                f"roofline for {self.component_id!r}: bandwidth and ceiling "
                f"must be > 0"
            )

    @property
    def ridge_oi(self) -> float:
        return self.ceiling_compute_gops / self.roof_bandwidth_gbs

    @classmethod
    def for_component(cls, component: ComponentSpec) -> "RooflineModel":
        return cls(
            component_id=component.id,
            roof_bandwidth_gbs=component.sustainable_bandwidth_gbs,
            ceiling_compute_gops=component.peak_compute_gops,
        )


@dataclass(frozen=True)
class RooflinePoint:
    """An (OI, performance) pair for one workload on one component."""

    workload: str
    oi: float
    performance_gops: float
    bound: str
    oi_kind: str

    def __post_init__(self):
        if not self.oi > 0 or not self.performance_gops > 0:
            raise MalformedDocument(
                f"roofline point {self.workload!r}: oi and performance must be > 0"
            )
        if self.bound not in (BOUND_MEMORY, BOUND_COMPUTE):
            raise MalformedDocument(
                f"roofline point {self.workload!r}: bad bound {self.bound!r}"
            )
        if self.oi_kind not in (OI_THEORETICAL, OI_EMPIRICAL):
            raise MalformedDocument(
                f"roofline point {self.workload!r}: bad oi_kind {self.oi_kind!r}"
            )


def theoretical_oi(layer: LayerProfile) -> float:
    """Operations per byte over all data touched (FLOPS/byte).

    gops over bytes/1e9 keeps the units consistent: giga-ops per giga-byte.
    """
    return layer.gops / (layer.mem_access_bytes / 1e9)


def empirical_oi(layer: LayerProfile) -> float:
    """Operations per byte of measured DRAM traffic (FLOPS/byte)."""
    if layer.dram_access_bytes is None:
        raise MissingTrace(
            f"layer {layer.name!r} has no DRAM counters; attach a trace first"
        )
    return layer.gops / (layer.dram_access_bytes / 1e9)


def attainable(model: RooflineModel, oi: float) -> float:
    """Maximum performance in GOPS/s the component allows at a given OI."""
    return min(model.ceiling_compute_gops, oi * model.roof_bandwidth_gbs)


def ridge_point(model: RooflineModel) -> float:
    """OI at which the sloped roof meets the flat ceiling."""
    return model.ridge_oi


def classify(model: RooflineModel, oi: float) -> str:
    """memory below the ridge point, compute at or above it."""
    return BOUND_MEMORY if oi < model.ridge_oi else BOUND_COMPUTE


def network_oi(profile: NetworkProfile, kind: str = OI_THEORETICAL) -> float:
    """Whole-network OI: ratio of summed operations to summed bytes.

    This matches plotting one point per network rather than averaging
    per-layer intensities.
    """
    if kind == OI_THEORETICAL:
        return profile.total_gops / (profile.total_mem_access_bytes / 1e9)
    if kind == OI_EMPIRICAL:
        dram = profile.total_dram_access_bytes
        if dram is None:
            raise MissingTrace(
                f"network {profile.id!r} has untraced layers; empirical OI "
                f"needs DRAM counters on every layer"
            )
        return profile.total_gops / (dram / 1e9)
    raise MalformedDocument(f"unknown OI kind {kind!r}")


def achieved_gops(profile: NetworkProfile, component_id: str) -> float:
    """Achieved whole-network performance: total operations x measured rate."""
    return profile.total_gops * profile.rate(component_id)


def network_point(profile: NetworkProfile, model: RooflineModel) -> RooflinePoint:
    """Whole-network point at achieved performance.

    Plotted against empirical OI when every layer is traced, theoretical
    OI otherwise. Achieved points sit below the roofline.
    """
    if profile.total_dram_access_bytes is not None:
        oi = network_oi(profile, OI_EMPIRICAL)
        oi_kind = OI_EMPIRICAL
    else:
        oi = network_oi(profile, OI_THEORETICAL)
        oi_kind = OI_THEORETICAL
    return RooflinePoint(
        workload=profile.id,
        oi=oi,
        performance_gops=achieved_gops(profile, model.component_id),
        bound=classify(model, oi),
        oi_kind=oi_kind,
    )


def layer_points(profile: NetworkProfile, model: RooflineModel,
                 kind: str = OI_THEORETICAL) -> list[RooflinePoint]:
    """Per-layer points at the roofline intersection for their OI.

    Per-layer achieved rates are not measured, so each layer is placed at
    the maximum the roofline allows for its intensity. Layers without DRAM
    counters are skipped when empirical points are requested.
    """
    points = []
    for layer in profile.layers:
        if kind == OI_EMPIRICAL:
            if layer.dram_access_bytes is None:
                continue
            oi = empirical_oi(layer)
        else:
            oi = theoretical_oi(layer)
        points.append(RooflinePoint(
            workload=f"{profile.id}/{layer.name}",
            oi=oi,
            performance_gops=attainable(model, oi),
            bound=classify(model, oi),
            oi_kind=kind,
        ))
    return points


def log_spaced(lo: float, hi: float, samples: int) -> list[float]:
    """Logarithmically spaced OI sample grid, endpoints included."""
    if samples < 2:
        raise ValueError("need at least two samples")
    if not (0 < lo < hi):
        raise ValueError("range must be positive and increasing")
    step = (math.log10(hi) - math.log10(lo)) / (samples - 1)
    return [10 ** (math.log10(lo) + i * step) for i in range(samples)]


def roofline_series(model: RooflineModel,
                    points: Sequence[RooflinePoint],
                    oi_range: Iterable[float]) -> list[dict]:
    """Tabulate the roofline over an OI grid together with workload points.

    Returns plot-table rows with keys oi_flops_per_byte, roofline_gops,
    bound and, on point rows, point_label / point_oi / point_gops. The
    ridge OI is inserted into the grid when it falls inside the range so
    the two-segment shape keeps its exact knee.
    """
    grid = [float(oi) for oi in oi_range]
    if not grid:
        raise ValueError("oi_range is empty")
    if any(oi <= 0 for oi in grid):
        raise ValueError("oi_range values must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("oi_range must be strictly increasing")
    ridge = model.ridge_oi
    if grid[0] < ridge < grid[-1] and ridge not in grid:
        grid = sorted(grid + [ridge])
    rows = []
    for oi in grid:
        rows.append({
            "oi_flops_per_byte": oi,
            "roofline_gops": attainable(model, oi),
            "point_label": None,
            "point_oi": None,
            "point_gops": None,
            "bound": classify(model, oi),
        })
    for point in points:
        rows.append({
            "oi_flops_per_byte": point.oi,
            "roofline_gops": attainable(model, point.oi),
            "point_label": f"{point.workload}[{point.oi_kind}]",
            "point_oi": point.oi,
            "point_gops": point.performance_gops,
            "bound": point.bound,
        })
    return rows


def quantize_profile(profile: NetworkProfile, from_bits: int,
                     to_bits: int) -> NetworkProfile:
    """Model quantization as a near-proportional shrink of ops and bytes.

    Every layer's byte counts scale by to_bits/from_bits, and the same
    factor is recorded as the op-cost scale and applied to the layer
    operation counts, so each layer's theoretical OI is unchanged and the
    quantized roofline overlaps the original. Measured throughput rows are
    kept as the original full-precision measurements.
    """
    if from_bits not in QUANT_BITS or to_bits not in QUANT_BITS:
        raise MalformedDocument(
            f"unsupported bit widths {from_bits}->{to_bits}; "
            f"supported: {QUANT_BITS}"
        )
    if to_bits > from_bits:
        raise MalformedDocument(
            f"cannot widen {from_bits}-bit data to {to_bits} bits here"
        )
    scale = to_bits / from_bits
    if scale == 1.0:
        return profile
    layers = tuple(
        replace(
            layer,
            gops=layer.gops * scale,
            mem_access_bytes=layer.mem_access_bytes * scale,
            dram_access_bytes=None if layer.dram_access_bytes is None
            else layer.dram_access_bytes * scale,
        )
        for layer in profile.layers
    )
    return replace(
        profile,
        layers=layers,
        quantized=True,
        op_scale=profile.op_scale * scale,
    )

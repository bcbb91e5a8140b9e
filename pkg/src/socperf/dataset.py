"""Bundled measurement dataset and its lookup helpers.

The package ships the measured dataset for two development boards, a
28nm mid-range SoC (exynos5422: A7 + A15 clusters, T628 GPU) and a 10nm
high-end SoC (kirin970: A53 + A73 clusters, G72 GPU, NPU), together with
five CNN profiles. Setting the SOCPERF_DATA environment variable to a
directory of platform/network JSON documents replaces the bundled set.

Only whole-network throughput values are measured ground truth; the
per-layer operation/byte tables and some board constants are marked as
user-supplied estimates in the documents' notes fields.
"""

import os
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .errors import UnknownComponent
from .profiles import (
    NetworkProfile,
    Platform,
    load_network_profile,
    load_platform,
)

DATA_ENV_VAR = "SOCPERF_DATA"

_PLATFORM_FILES = ("exynos5422.json", "kirin970.json")
_NETWORK_FILES = (
    "alexnet.json",
    "googlenet.json",
    "mobilenet.json",
    "resnet50.json",
    "squeezenet.json",
)

# Column order used by throughput tables: mid-range board then high-end board.
TABLE1_COMPONENT_ORDER = ("a7", "a15", "t628", "a53", "a73", "g72", "npu")
TABLE1_NETWORK_ORDER = ("alexnet", "googlenet", "mobilenet", "resnet50", "squeezenet")


def _data_dir() -> Optional[str]:
    path = os.environ.get(DATA_ENV_VAR)
    if path:
        return path
    return None


def _load_from_dir(path: str) -> tuple[list[Platform], list[NetworkProfile]]:
    import json

    platforms: list[Platform] = []
    networks: list[NetworkProfile] = []
    for name in sorted(os.listdir(path)):
        if not name.endswith(".json"):
            continue
        full = os.path.join(path, name)
        with open(full, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if "platform" in doc:
            platforms.append(load_platform(doc))
        elif "network" in doc:
            networks.append(load_network_profile(doc))
    return platforms, networks


def builtin_dataset() -> tuple[list[Platform], list[NetworkProfile]]:
    """Load the bundled platforms and network profiles.

    Documents pass through the same loaders and validation as user files.
    With SOCPERF_DATA set, that directory is scanned instead.
    """
    override = _data_dir()
    if override:
        return _load_from_dir(override)
    pkg = resources.files(__package__) / "data"
    platforms = [load_platform((pkg / name).read_text(encoding="utf-8"))
                 for name in _PLATFORM_FILES]
    networks = [load_network_profile((pkg / name).read_text(encoding="utf-8"))
                for name in _NETWORK_FILES]
    return platforms, networks


def builtin_trace(name: str = "alexnet_a15_trace"):
    """Load a bundled counter trace by file stem."""
    from .profiles import load_trace

    pkg = resources.files(__package__) / "data"
    return load_trace((pkg / f"{name}.json").read_text(encoding="utf-8"))


def platform_by_id(platform_id: str) -> Platform:
    platforms, _ = builtin_dataset()
    for platform in platforms:
        if platform.id == platform_id:
            return platform
    known = ", ".join(p.id for p in platforms)
    raise UnknownComponent(
        f"no platform {platform_id!r} in dataset (have: {known})"
    )


def network_by_id(network_id: str) -> NetworkProfile:
    _, networks = builtin_dataset()
    for network in networks:
        if network.id == network_id:
            return network
    known = ", ".join(n.id for n in networks)
    raise UnknownComponent(
        f"no network {network_id!r} in dataset (have: {known})"
    )


@dataclass(frozen=True)
class CoexecObservation:
    """One measured co-execution run: target throughput and composition.

    table groups the observations the way the reporting CLI emits them:
    table 2 is CPU clusters + GPU on both boards (baseline: the GPU),
    table 3 is the full high-end SoC including the NPU (baseline: the NPU).
    Composition percentages are only available for table 3 runs.
    """

    table: int
    platform_id: str
    network_id: str
    engaged: tuple[str, ...]
    best_single_id: str
    coexec_imgs_s: float
    gain_pct: float
    composition_pct: Optional[dict[str, float]] = None


COEXEC_OBSERVATIONS: tuple[CoexecObservation, ...] = (
    # Mid-range board, CPU clusters + GPU.
    CoexecObservation(2, "exynos5422", "alexnet", ("a7", "a15", "t628"), "t628", 10.3, 32.4),
    CoexecObservation(2, "exynos5422", "googlenet", ("a7", "a15", "t628"), "t628", 8.7, 66.3),
    CoexecObservation(2, "exynos5422", "mobilenet", ("a7", "a15", "t628"), "t628", 14.9, 76.7),
    CoexecObservation(2, "exynos5422", "resnet50", ("a7", "a15", "t628"), "t628", 2.9, 38.6),
    CoexecObservation(2, "exynos5422", "squeezenet", ("a7", "a15", "t628"), "t628", 13.8, 73.9),
    # High-end board, CPU clusters + GPU (NPU left out).
    CoexecObservation(2, "kirin970", "alexnet", ("a53", "a73", "g72"), "g72", 33.4, 2.8),
    CoexecObservation(2, "kirin970", "googlenet", ("a53", "a73", "g72"), "g72", 28.4, 42.8),
    CoexecObservation(2, "kirin970", "mobilenet", ("a53", "a73", "g72"), "g72", 51.5, 77.1),
    CoexecObservation(2, "kirin970", "resnet50", ("a53", "a73", "g72"), "g72", 12.3, 46.3),
    CoexecObservation(2, "kirin970", "squeezenet", ("a53", "a73", "g72"), "g72", 54.5, 26.7),
    # High-end board, every component engaged. mobilenet is absent because
    # the NPU does not support it.
    CoexecObservation(3, "kirin970", "alexnet", ("a53", "a73", "g72", "npu"), "npu", 63.7, 96.0,
                      {"a73": 1.90, "a53": 0.95, "g72": 47.47, "npu": 49.68}),
    CoexecObservation(3, "kirin970", "googlenet", ("a53", "a73", "g72", "npu"), "npu", 59.3, 72.4,
                      {"a73": 3.06, "a53": 1.70, "g72": 33.33, "npu": 61.90}),
    CoexecObservation(3, "kirin970", "resnet50", ("a53", "a73", "g72", "npu"), "npu", 30.9, 40.9,
                      {"a73": 2.63, "a53": 1.32, "g72": 26.97, "npu": 69.08}),
    CoexecObservation(3, "kirin970", "squeezenet", ("a53", "a73", "g72", "npu"), "npu", 95.1, 92.9,
                      {"a73": 3.18, "a53": 1.69, "g72": 43.43, "npu": 51.69}),
)


def observations_for_table(table: int) -> tuple[CoexecObservation, ...]:
    return tuple(o for o in COEXEC_OBSERVATIONS if o.table == table)


def find_observation(platform_id: str, network_id: str,
                     engaged: tuple[str, ...]) -> Optional[CoexecObservation]:
    wanted = tuple(sorted(engaged))
    for obs in COEXEC_OBSERVATIONS:
        if (obs.platform_id == platform_id and obs.network_id == network_id
                and tuple(sorted(obs.engaged)) == wanted):
            return obs
    return None

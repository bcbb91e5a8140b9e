import json
import random

import pytest

from socperf import (
    BandwidthExceedsBus,
    CacheTrafficInflated,
    CounterTrace,
    DanglingHostCluster,
    DuplicateComponentId,
    LayerMismatch,
    MalformedDocument,
    TraceRecord,
    UnknownComponent,
    attach_trace,
    builtin_trace,
    load_network_profile,
    load_platform,
    load_trace,
    network_by_id,
    platform_by_id,
    serialize_network,
    serialize_platform,
)


def minimal_platform_doc():
    return {
        "platform": {
            "id": "board",
            "bus_peak_bandwidth_gbs": 10.0,
            "components": [
                {
                    "id": "cpu0",
                    "kind": "big-cpu",
                    "peak_compute_gops": 30.0,
                    "sustainable_bandwidth_gbs": 3.0,
                    "active_power_w": 4.0,
                    "frequency_ghz": 2.0,
                },
            ],
        }
    }


def minimal_network_doc():
    return {
        "network": {
            "id": "tiny",
            "layers": [
                {"name": "l0", "kind": "conv", "gops": 1.0, "mem_access_bytes": 1.0},
            ],
            "throughput": {"cpu0": 5.0},
        }
    }


# -- platform loading --------------------------------------------------------

def test_load_bundled_exynos_platform():
    platform = platform_by_id("exynos5422")
    assert platform.bus_peak_bandwidth_gbs == 14.9
    assert {c.id for c in platform.components} == {"a7", "a15", "t628"}
    assert platform.component("t628").host_cluster == "a7"


def test_load_platform_single_component():
    platform = load_platform(minimal_platform_doc())
    assert len(platform.components) == 1
    assert platform.components[0].host_cluster is None


def test_cpu_peak_derived_from_cores_and_frequency():
    doc = minimal_platform_doc()
    comp = doc["platform"]["components"][0]
    del comp["peak_compute_gops"]
    comp["cores"] = 4
    platform = load_platform(doc)
    assert platform.components[0].peak_compute_gops == pytest.approx(4 * 2.0 * 4)


def test_bandwidth_exceeding_bus_rejected():
    doc = minimal_platform_doc()
    doc["platform"]["components"][0]["sustainable_bandwidth_gbs"] = 20.0
    doc["platform"]["bus_peak_bandwidth_gbs"] = 14.9
    with pytest.raises(BandwidthExceedsBus):
        load_platform(doc)


def test_duplicate_component_id_rejected():
    doc = minimal_platform_doc()
    doc["platform"]["components"].append(dict(doc["platform"]["components"][0]))
    with pytest.raises(DuplicateComponentId):
        load_platform(doc)


def test_dangling_host_cluster_rejected():
    doc = minimal_platform_doc()
    doc["platform"]["components"][0]["host_cluster"] = "ghost"
    with pytest.raises(DanglingHostCluster):
        load_platform(doc)


def test_host_cluster_must_be_cpu():
    doc = minimal_platform_doc()
    doc["platform"]["components"].append({
        "id": "gpu0", "kind": "gpu", "peak_compute_gops": 50.0,
        "sustainable_bandwidth_gbs": 5.0, "active_power_w": 2.0,
        "frequency_ghz": 0.6,
    })
    doc["platform"]["components"][0]["host_cluster"] = "gpu0"
    with pytest.raises(DanglingHostCluster):
        load_platform(doc)


def test_malformed_platform_documents():
    with pytest.raises(MalformedDocument):
        load_platform({"nope": {}})
    with pytest.raises(MalformedDocument):
        load_platform('{"platform": {"id": "x"}}')
    with pytest.raises(MalformedDocument):
        load_platform("{ this is not json")
    with pytest.raises(MalformedDocument):
        load_platform('["not", "an", "object"]')


# -- network loading ---------------------------------------------------------

def test_load_bundled_alexnet_throughput():
    profile = network_by_id("alexnet")
    assert profile.throughput == {
        "a7": 1.1, "a15": 3.1, "t628": 7.8,
        "a53": 2.2, "a73": 7.6, "g72": 32.5, "npu": 32.5,
    }


def test_single_layer_unit_profile_valid():
    profile = load_network_profile(minimal_network_doc())
    assert profile.total_gops == 1.0
    assert profile.total_mem_access_bytes == 1.0


def test_dram_above_mem_rejected():
    doc = minimal_network_doc()
    doc["network"]["layers"][0]["mem_access_bytes"] = 100.0
    doc["network"]["layers"][0]["dram_access_bytes"] = 200.0
    with pytest.raises(CacheTrafficInflated):
        load_network_profile(doc)


def test_nonpositive_counts_rejected():
    for field, value in (("gops", 0.0), ("mem_access_bytes", -1.0)):
        doc = minimal_network_doc()
        doc["network"]["layers"][0][field] = value
        with pytest.raises(MalformedDocument):
            load_network_profile(doc)


def test_unsupported_pair_is_explicit():
    profile = network_by_id("mobilenet")
    assert profile.supports("npu") is False
    assert "npu" not in profile.throughput
    assert profile.supports("g72") is True


def test_network_totals_are_layer_sums():
    profile = network_by_id("alexnet")
    assert profile.total_gops == pytest.approx(
        sum(l.gops for l in profile.layers), rel=0, abs=0)
    assert profile.total_mem_access_bytes == sum(
        l.mem_access_bytes for l in profile.layers)


# -- round trips --------------------------------------------------------------

def test_platform_round_trip_bundled():
    for pid in ("exynos5422", "kirin970"):
        platform = platform_by_id(pid)
        assert load_platform(serialize_platform(platform)) == platform


def test_network_round_trip_bundled():
    for nid in ("alexnet", "googlenet", "mobilenet", "resnet50", "squeezenet"):
        profile = network_by_id(nid)
        assert load_network_profile(serialize_network(profile)) == profile


def test_network_round_trip_with_dram_counts():
    profile = attach_trace(network_by_id("alexnet"), builtin_trace())
    assert load_network_profile(serialize_network(profile)) == profile


def test_round_trip_random_documents():
    rng = random.Random(20240811)
    kinds = ("big-cpu", "small-cpu", "gpu", "npu")
    for _ in range(50):
        n_comp = rng.randint(1, 5)
        comps = []
        for i in range(n_comp):
            comps.append({
                "id": f"c{i}",
                "kind": kinds[rng.randrange(4)] if i else "small-cpu",
                "peak_compute_gops": rng.uniform(1, 2000),
                "sustainable_bandwidth_gbs": rng.uniform(0.1, 10),
                "active_power_w": rng.uniform(0.1, 8),
                "frequency_ghz": rng.uniform(0.3, 3),
            })
            if comps[-1]["kind"] in ("gpu", "npu") and rng.random() < 0.5:
                comps[-1]["host_cluster"] = "c0"
        doc = {"platform": {
            "id": "rand", "bus_peak_bandwidth_gbs": 12.0, "components": comps,
        }}
        platform = load_platform(doc)
        assert load_platform(serialize_platform(platform)) == platform

        layers = []
        for i in range(rng.randint(1, 6)):
            mem = rng.uniform(1e3, 1e8)
            layers.append({
                "name": f"l{i}",
                "kind": ("conv", "fc", "other")[rng.randrange(3)],
                "gops": rng.uniform(1e-3, 5),
                "mem_access_bytes": mem,
            })
            if rng.random() < 0.5:
                layers[-1]["dram_access_bytes"] = mem * rng.uniform(0.05, 1.0)
        throughput = {}
        for comp in comps:
            throughput[comp["id"]] = (
                "unsupported" if rng.random() < 0.2 else rng.uniform(0.1, 60))
        net = load_network_profile({"network": {
            "id": "randnet", "layers": layers, "throughput": throughput,
        }})
        assert load_network_profile(serialize_network(net)) == net


def test_load_from_json_text_and_file(tmp_path):
    text = json.dumps(minimal_platform_doc())
    assert load_platform(text).id == "board"
    path = tmp_path / "board.json"
    path.write_text(text)
    assert load_platform(path) == load_platform(text)
    assert load_platform(str(path)) == load_platform(text)
    with open(path) as fh:
        assert load_platform(fh) == load_platform(text)


# -- counter traces -----------------------------------------------------------

def test_attach_trace_refill_line_arithmetic():
    profile = load_network_profile({"network": {
        "id": "n", "layers": [
            {"name": "conv9", "kind": "conv", "gops": 2.0,
             "mem_access_bytes": 200_000_000},
        ],
        "throughput": {"cpu0": 3.0},
    }})
    trace = CounterTrace("cpu0", 64, (TraceRecord("conv9", refill_lines=1_562_500),))
    updated = attach_trace(profile, trace)
    assert updated.layers[0].dram_access_bytes == 100_000_000
    assert updated.layers[0].mem_access_bytes == 200_000_000


def test_attach_trace_gpu_external_bytes():
    profile = load_network_profile({"network": {
        "id": "n", "layers": [
            {"name": "l0", "kind": "conv", "gops": 2.0,
             "mem_access_bytes": 5_000_000},
        ],
        "throughput": {"gpu0": 3.0},
    }})
    trace = CounterTrace("gpu0", 64, (
        TraceRecord("l0", ext_read_bytes=1_000_000, ext_write_bytes=500_000),))
    updated = attach_trace(profile, trace)
    assert updated.layers[0].dram_access_bytes == 1_500_000


def test_attach_empty_trace_is_identity():
    profile = network_by_id("alexnet")
    assert attach_trace(profile, CounterTrace("a15")) is profile


def test_attach_trace_unknown_layer():
    profile = network_by_id("alexnet")
    trace = CounterTrace("a15", 64, (TraceRecord("conv9", refill_lines=10),))
    with pytest.raises(LayerMismatch):
        attach_trace(profile, trace)


def test_attach_trace_unknown_component():
    profile = network_by_id("alexnet")
    trace = CounterTrace("m1max", 64, (TraceRecord("conv1", refill_lines=10),))
    with pytest.raises(UnknownComponent):
        attach_trace(profile, trace)


def test_attach_trace_never_inflates_traffic():
    profile = network_by_id("alexnet")
    conv1_mem = profile.layer("conv1").mem_access_bytes
    too_many = int(conv1_mem // 64) + 10
    trace = CounterTrace("a15", 64, (TraceRecord("conv1", refill_lines=too_many),))
    with pytest.raises(CacheTrafficInflated):
        attach_trace(profile, trace)


def test_bundled_trace_respects_mem_bounds():
    profile = attach_trace(network_by_id("alexnet"), builtin_trace())
    for layer in profile.layers:
        assert layer.dram_access_bytes is not None
        assert layer.dram_access_bytes <= layer.mem_access_bytes


def test_trace_record_validation():
    with pytest.raises(MalformedDocument):
        TraceRecord("l0")
    with pytest.raises(MalformedDocument):
        TraceRecord("l0", refill_lines=5, ext_read_bytes=5)
    with pytest.raises(MalformedDocument):
        TraceRecord("l0", refill_lines=-1)
    with pytest.raises(MalformedDocument):
        CounterTrace("c0", cache_line_bytes=0)


def test_load_trace_document():
    trace = load_trace({"trace": {
        "component_id": "a15",
        "cache_line_bytes": 32,
        "layers": [{"name": "conv1", "refill_lines": 100}],
    }})
    assert trace.cache_line_bytes == 32
    assert trace.dram_bytes(trace.layers[0]) == 3200

import json
import subprocess
import sys

import pytest

from socperf import Scenario, UnsupportedFormat, network_by_id, platform_by_id, simulate
from socperf.cli import ReportRequest, main
from socperf.emit import emit, emit_csv, sig4

EXYNOS_ALEXNET_ROW = ["1.1", "3.1", "7.8", "2.2", "7.6", "32.5", "32.5"]


def run_cli(args, tmp_path, name="out"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out.read_bytes()


# -- tables ---------------------------------------------------------------------

def test_tables_1_echoes_measured_throughput(tmp_path):
    code, payload = run_cli(["tables", "--which", "1"], tmp_path)
    assert code == 0
    lines = payload.decode().strip().splitlines()
    assert lines[0] == "network,a7,a15,t628,a53,a73,g72,npu"
    rows = {line.split(",")[0]: line.split(",")[1:] for line in lines[1:]}
    assert rows["alexnet"] == EXYNOS_ALEXNET_ROW
    assert rows["mobilenet"][-1] == "Not Supported"
    assert rows["squeezenet"][-1] == "49.3"
    assert len(rows) == 5


def test_tables_2_reports_fit_and_gain(tmp_path):
    code, payload = run_cli(
        ["tables", "--which", "2", "--format", "json", "--frames", "4000"],
        tmp_path)
    assert code == 0
    rows = json.loads(payload)
    assert len(rows) == 10
    row = next(r for r in rows if r["platform"] == "exynos5422"
               and r["network"] == "alexnet")
    assert row["gain_meas_pct"] == 32.4
    assert row["coexec_sim_imgs_s"] == pytest.approx(10.3, rel=0.02)
    assert abs(row["gain_sim_pct"] - row["gain_meas_pct"]) < 2.0


def test_tables_2_csv_gain_column(tmp_path):
    code, payload = run_cli(
        ["tables", "--which", "2", "--frames", "2000"], tmp_path)
    assert code == 0
    lines = payload.decode().strip().splitlines()
    header = lines[0].split(",")
    gain_col = header.index("gain_meas_pct")
    alexnet = next(l.split(",") for l in lines[1:]
                   if l.startswith("exynos5422,alexnet"))
    assert alexnet[gain_col] == "32.4"


def test_tables_3_reports_composition(tmp_path):
    code, payload = run_cli(
        ["tables", "--which", "3", "--format", "json", "--frames", "4000"],
        tmp_path)
    assert code == 0
    rows = json.loads(payload)
    assert len(rows) == 4
    row = next(r for r in rows if r["network"] == "alexnet")
    assert row["share_meas_g72_pct"] == 47.47
    assert row["share_sim_g72_pct"] == pytest.approx(47.47, abs=3.0)
    assert row["share_sim_npu_pct"] == pytest.approx(49.68, abs=3.0)


# -- simulate ---------------------------------------------------------------------

def test_simulate_flags_json(tmp_path):
    code, payload = run_cli([
        "simulate", "--platform", "exynos5422", "--network", "alexnet",
        "--components", "a7,a15,t628", "--frames", "10000",
    ], tmp_path)
    assert code == 0
    doc = json.loads(payload)
    assert doc["throughput_imgs_per_s"] == pytest.approx(12.0, rel=1e-3)
    assert doc["frames"] == 10000
    assert set(doc["composition"]) == {"a7", "a15", "t628"}


def test_simulate_scenario_file(tmp_path):
    scenario = {
        "platform": "exynos5422", "network": "alexnet",
        "components": ["a15"], "frames": 200,
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario))
    code, payload = run_cli(["simulate", "--scenario", str(path)], tmp_path)
    assert code == 0
    doc = json.loads(payload)
    assert doc["throughput_imgs_per_s"] == pytest.approx(3.1, rel=1e-6)


def test_simulate_csv_per_component_rows(tmp_path):
    code, payload = run_cli([
        "simulate", "--platform", "exynos5422", "--network", "alexnet",
        "--components", "a7,a15", "--frames", "100", "--format", "csv",
    ], tmp_path)
    assert code == 0
    lines = payload.decode().strip().splitlines()
    assert lines[0] == "component,frames,share,busy_s,energy_j"
    assert lines[-1].startswith("total,100,1,")
    assert len(lines) == 4  # header + 2 components + total


def test_simulate_contention_and_overhead_flags(tmp_path):
    code, payload = run_cli([
        "simulate", "--platform", "kirin970", "--network", "alexnet",
        "--components", "a53,g72", "--frames", "40000",
        "--contention", "a53=0.5", "--overhead", "0.001",
    ], tmp_path)
    assert code == 0
    doc = json.loads(payload)
    # steady-state rates 0.5494 + 32.47; the stream tail costs up to
    # (sum/min)/N relative, so 40000 frames keeps it inside 0.2%
    expected = 1 / (1 / 1.1 + 0.001) + 1 / (1 / 32.5 + 0.001)
    assert doc["throughput_imgs_per_s"] == pytest.approx(expected, rel=2e-3)


# -- roofline ---------------------------------------------------------------------

def test_roofline_csv_has_knee(tmp_path):
    code, payload = run_cli([
        "roofline", "--platform", "exynos5422", "--component", "t628",
        "--network", "alexnet", "--format", "csv",
    ], tmp_path)
    assert code == 0
    lines = payload.decode().strip().splitlines()
    assert lines[0] == ("oi_flops_per_byte,roofline_gops,point_label,"
                        "point_oi,point_gops,bound")
    ridge = 57.6 / 6.15
    knee = [l for l in lines[1:] if l.startswith(sig4(ridge))]
    assert knee and ",57.6," in knee[0]
    assert any("alexnet[theoretical]" in l for l in lines)
    assert any("alexnet/fc6" in l for l in lines)


def test_roofline_svg(tmp_path):
    code, payload = run_cli([
        "roofline", "--platform", "exynos5422", "--component", "t628",
        "--format", "svg",
    ], tmp_path, name="plot.svg")
    assert code == 0
    assert payload.startswith(b"<svg")
    assert b"</svg>" in payload


# -- calibrate ----------------------------------------------------------------------

def test_calibrate_cli_bundled_target(tmp_path):
    code, payload = run_cli([
        "calibrate", "--platform", "exynos5422", "--network", "alexnet",
        "--components", "a7,a15,t628", "--frames", "4000",
    ], tmp_path)
    assert code == 0
    doc = json.loads(payload)
    assert doc["dispatch_overhead_s"] > 0
    assert doc["throughput_imgs_per_s"] == pytest.approx(10.3, rel=0.02)


def test_calibrate_cli_explicit_target(tmp_path):
    code, payload = run_cli([
        "calibrate", "--platform", "exynos5422", "--network", "alexnet",
        "--components", "a7,t628", "--target-throughput", "8.0",
        "--frames", "4000",
    ], tmp_path)
    assert code == 0
    doc = json.loads(payload)
    assert doc["throughput_imgs_per_s"] == pytest.approx(8.0, rel=0.02)


def test_calibrate_cli_no_observation(tmp_path):
    code = main(["calibrate", "--platform", "exynos5422", "--network",
                 "alexnet", "--components", "a7,t628",
                 "--out", str(tmp_path / "x")])
    assert code == 1


# -- exit codes and determinism --------------------------------------------------

def test_unknown_platform_is_validation_error(tmp_path, capsys):
    code = main(["simulate", "--platform", "nope", "--network", "alexnet",
                 "--components", "a7", "--out", str(tmp_path / "x")])
    assert code == 1
    assert "socperf" in capsys.readouterr().err


def test_infeasible_target_is_validation_error(tmp_path):
    code = main(["calibrate", "--platform", "exynos5422", "--network",
                 "alexnet", "--components", "a7,a15,t628",
                 "--target-throughput", "20.0", "--out", str(tmp_path / "x")])
    assert code == 1


def test_missing_scenario_file_is_io_error(tmp_path):
    code = main(["simulate", "--scenario", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path / "x")])
    assert code == 2


def test_unwritable_output_is_io_error(tmp_path):
    code = main(["tables", "--which", "1", "--out", str(tmp_path)])
    assert code == 2


def test_byte_identical_reruns(tmp_path):
    _, first = run_cli(["tables", "--which", "1"], tmp_path, "a.csv")
    _, second = run_cli(["tables", "--which", "1"], tmp_path, "b.csv")
    assert first == second
    args = ["simulate", "--platform", "kirin970", "--network", "squeezenet",
            "--components", "a53,a73,g72,npu", "--frames", "3000"]
    _, first = run_cli(args, tmp_path, "c.json")
    _, second = run_cli(args, tmp_path, "d.json")
    assert first == second
    args = ["roofline", "--platform", "exynos5422", "--component", "a15",
            "--network", "alexnet", "--format", "svg"]
    _, first = run_cli(args, tmp_path, "e.svg")
    _, second = run_cli(args, tmp_path, "f.svg")
    assert first == second


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "socperf", "tables", "--which", "1"],
        capture_output=True, timeout=60)
    assert proc.returncode == 0
    assert b"alexnet,1.1,3.1,7.8" in proc.stdout


# -- emit -------------------------------------------------------------------------

def test_emit_sim_result_deterministic_and_formats():
    platform = platform_by_id("exynos5422")
    network = network_by_id("alexnet")
    result = simulate(Scenario("exynos5422", "alexnet", ("a7", "a15"), 100),
                      platform, network)
    assert emit(result, "json") == emit(result, "json")
    assert emit(result, "csv").startswith(b"component,")
    with pytest.raises(UnsupportedFormat):
        emit(result, "svg")
    with pytest.raises(UnsupportedFormat):
        emit(result, "html")


def test_report_request_validation(tmp_path):
    with pytest.raises(UnsupportedFormat):
        ReportRequest("simulate", (), None, "svg")
    with pytest.raises(FileNotFoundError):
        ReportRequest("simulate", (str(tmp_path / "absent"),), None, "json")
    ok = ReportRequest("roofline", (), None, "svg")
    assert ok.fmt == "svg"


def test_sig4_formatting():
    assert sig4(32.5) == "32.5"
    assert sig4(9.365853658536585) == "9.366"
    assert sig4(0.0001234567) == "0.0001235"
    assert sig4(None) == ""
    assert sig4(12) == "12"


def test_emit_csv_layout():
    payload = emit_csv(("a", "b"), [[1, None], ["x", 2.5]])
    assert payload == b"a,b\n1,\nx,2.5\n"

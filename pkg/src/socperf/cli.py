"""Command-line reporting front end.

Subcommands: roofline (plot tables / SVG), simulate (one scenario),
calibrate (fit overhead and contention to a target), tables (regenerate
the throughput and co-execution summary tables from the bundled dataset).

Exit codes: 0 success, 1 for validation failures (the diagnostic names
the failing check), 2 for I/O failures. Identical invocations produce
byte-identical output. SOCPERF_DATA overrides the bundled dataset
directory.
"""

import argparse
import os
import sys
from dataclasses import dataclass
from typing import Optional

from . import dataset
from .calibrate import calibrate
from .emit import emit, emit_csv, emit_json, sig4
from .errors import SocPerfError, UnsupportedFormat
from .roofline import (
    RooflineModel,
    layer_points,
    log_spaced,
    network_point,
    roofline_series,
)
from .sim import Scenario, gain_vs_best_single, load_scenario, simulate

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


@dataclass(frozen=True)
class ReportRequest:
    """A validated CLI invocation."""

    command: str
    inputs: tuple[str, ...]
    output: Optional[str]
    fmt: str

    def __post_init__(self):
        if self.fmt == "svg" and self.command != "roofline":
            raise UnsupportedFormat(
                f"svg output only applies to the roofline command, "
                f"not {self.command!r}"
            )
        for path in self.inputs:
            if not os.path.exists(path):
                raise FileNotFoundError(path)


def _parse_contention(text: Optional[str]) -> dict[str, float]:
    factors: dict[str, float] = {}
    if not text:
        return factors
    for item in text.split(","):
        if not item:
            continue
        name, _, value = item.partition("=")
        if not value:
            raise SocPerfError(
                f"contention entries look like id=factor, got {item!r}"
            )
        factors[name.strip()] = float(value)
    return factors


def _write(payload: bytes, output: Optional[str]) -> None:
    if output:
        with open(output, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_roofline(args) -> bytes:
    platform = dataset.platform_by_id(args.platform)
    model = RooflineModel.for_component(platform.component(args.component))
    points = []
    if args.network:
        profile = dataset.network_by_id(args.network)
        points.extend(layer_points(profile, model))
        points.append(network_point(profile, model))
    rows = roofline_series(
        model, points, log_spaced(args.oi_min, args.oi_max, args.samples))
    title = f"{args.platform}/{args.component} roofline"
    return emit(rows, args.format, title=title)


def _scenario_from_args(args) -> Scenario:
    if args.scenario:
        return load_scenario(args.scenario)
    missing = [name for name in ("platform", "network", "components")
               if not getattr(args, name)]
    if missing:
        raise SocPerfError(
            f"simulate needs --scenario or --platform/--network/--components "
            f"(missing: {', '.join(missing)})"
        )
    return Scenario(
        platform_id=args.platform,
        network_id=args.network,
        engaged=tuple(args.components.split(",")),
        frame_count=args.frames,
        dispatch_overhead_s=args.overhead,
        contention=_parse_contention(args.contention),
        jitter_seed=args.seed,
        jitter_cv=args.cv,
    )


def _cmd_simulate(args) -> bytes:
    scenario = _scenario_from_args(args)
    result = simulate(scenario)
    return emit(result, args.format)


def _cmd_calibrate(args) -> bytes:
    platform = dataset.platform_by_id(args.platform)
    network = dataset.network_by_id(args.network)
    engaged = tuple(args.components.split(","))
    if args.target_throughput is not None:
        observed = {"throughput": args.target_throughput}
        composition = _parse_contention(args.target_composition)
        if composition:
            observed["composition"] = composition
    else:
        obs = dataset.find_observation(args.platform, args.network, engaged)
        if obs is None:
            raise SocPerfError(
                f"no bundled observation for {args.network!r} on "
                f"{args.platform!r} with {engaged}; pass --target-throughput"
            )
        observed = {"throughput": obs.coexec_imgs_s}
        if obs.composition_pct:
            observed["composition"] = {
                cid: pct / 100.0 for cid, pct in obs.composition_pct.items()
            }
    fit = calibrate(platform, network, observed, engaged, frames=args.frames)
    payload = {
        "platform": fit.platform_id,
        "network": fit.network_id,
        "components": list(fit.engaged),
        "dispatch_overhead_s": fit.dispatch_overhead_s,
        "contention": dict(sorted(fit.contention.items())),
        "objective": fit.objective,
        "residual_throughput_rel": fit.residual_throughput_rel,
        "residual_composition": None if fit.residual_composition is None
        else dict(sorted(fit.residual_composition.items())),
        "throughput_imgs_per_s": fit.result.throughput,
        "composition": dict(sorted(fit.result.composition.items())),
    }
    return emit(payload, args.format)


def _throughput_table_rows(frames: int) -> list[dict]:
    platforms, networks = dataset.builtin_dataset()
    comp_platform = {}
    for platform in platforms:
        for comp in platform.components:
            comp_platform[comp.id] = platform
    rows = []
    for network in networks:
        cells: dict[str, object] = {"network": network.id}
        for comp_id in dataset.TABLE1_COMPONENT_ORDER:
            if not network.supports(comp_id):
                cells[comp_id] = "Not Supported"
                continue
            platform = comp_platform[comp_id]
            result = simulate(
                Scenario(platform.id, network.id, (comp_id,), frames),
                platform, network)
            cells[comp_id] = float(sig4(result.throughput))
        rows.append(cells)
    by_id = {row["network"]: row for row in rows}
    return [by_id[nid] for nid in dataset.TABLE1_NETWORK_ORDER]


def _cmd_tables(args) -> bytes:
    if args.which == 1:
        rows = _throughput_table_rows(frames=min(args.frames, 2000))
        header = ("network",) + dataset.TABLE1_COMPONENT_ORDER
        if args.format == "json":
            return emit_json(rows)
        return emit_csv(header, [[row[key] for key in header] for row in rows])

    observations = dataset.observations_for_table(args.which)
    if not observations:
        raise SocPerfError(f"--which must be 1, 2, or 3, got {args.which}")
    rows = []
    for obs in observations:
        platform = dataset.platform_by_id(obs.platform_id)
        network = dataset.network_by_id(obs.network_id)
        observed = {"throughput": obs.coexec_imgs_s}
        if obs.composition_pct:
            observed["composition"] = {
                cid: pct / 100.0 for cid, pct in obs.composition_pct.items()
            }
        fit = calibrate(platform, network, observed, obs.engaged,
                        frames=args.frames)
        best = network.rate(obs.best_single_id)
        gain_sim = 100.0 * (fit.result.throughput - best) / best
        row = {
            "platform": obs.platform_id,
            "network": obs.network_id,
            "components": "+".join(obs.engaged),
            "best_single": obs.best_single_id,
            "best_single_imgs_s": best,
            "coexec_meas_imgs_s": obs.coexec_imgs_s,
            "coexec_sim_imgs_s": fit.result.throughput,
            "gain_sim_pct": gain_sim,
            "gain_meas_pct": obs.gain_pct,
            "fitted_overhead_s": fit.dispatch_overhead_s,
            "residual_throughput_pct": 100.0 * fit.residual_throughput_rel,
        }
        if obs.composition_pct:
            for cid in sorted(obs.composition_pct):
                row[f"share_sim_{cid}_pct"] = 100.0 * fit.result.composition[cid]
                row[f"share_meas_{cid}_pct"] = obs.composition_pct[cid]
                row[f"factor_{cid}"] = fit.contention.get(cid)
        rows.append(row)
    if args.format == "json":
        return emit_json(rows)
    header = tuple(rows[0].keys())
    return emit_csv(header, [[row.get(key) for key in header] for row in rows])


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socperf",
        description="Roofline models and co-execution simulation for CNN "
                    "inference on heterogeneous mobile SoCs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roofline", help="emit a roofline plot table or SVG")
    p.add_argument("--platform", required=True)
    p.add_argument("--component", required=True)
    p.add_argument("--network")
    p.add_argument("--oi-min", type=float, default=0.1)
    p.add_argument("--oi-max", type=float, default=1000.0)
    p.add_argument("--samples", type=int, default=97)
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="run one co-execution scenario")
    p.add_argument("--scenario", help="scenario JSON file (instead of flags)")
    p.add_argument("--platform")
    p.add_argument("--network")
    p.add_argument("--components", help="comma-separated component ids")
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--overhead", type=float, default=0.0,
                   help="dispatch overhead in seconds per frame")
    p.add_argument("--contention", help="id=factor[,id=factor...]")
    p.add_argument("--seed", type=int)
    p.add_argument("--cv", type=float, default=0.0,
                   help="service-time jitter coefficient of variation")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out")

    p = sub.add_parser("calibrate", help="fit overhead/contention to a target")
    p.add_argument("--platform", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--components", required=True)
    p.add_argument("--target-throughput", type=float,
                   help="defaults to the bundled observation for this engagement")
    p.add_argument("--target-composition",
                   help="id=fraction[,id=fraction...] frame shares")
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out")

    p = sub.add_parser("tables", help="regenerate summary tables")
    p.add_argument("--which", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    return parser


_HANDLERS = {
    "roofline": _cmd_roofline,
    "simulate": _cmd_simulate,
    "calibrate": _cmd_calibrate,
    "tables": _cmd_tables,
}


def run(request: ReportRequest, args) -> int:
    """Execute a validated request; returns the process exit code."""
    payload = _HANDLERS[request.command](args)
    _write(payload, request.output)
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        inputs = ()
        if getattr(args, "scenario", None):
            inputs = (args.scenario,)
        request = ReportRequest(
            command=args.command,
            inputs=inputs,
            output=args.out,
            fmt=args.format,
        )
        return run(request, args)
    except FileNotFoundError as exc:
        print(f"socperf: cannot read {exc}", file=sys.stderr)
        return EXIT_IO
    except IsADirectoryError as exc:
        print(f"socperf: cannot read {exc}", file=sys.stderr)
        return EXIT_IO
    except (SocPerfError, ValueError) as exc:
        print(f"socperf: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"socperf: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 no feasible
partition.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from splitplan import planner, sim
from splitplan.model_graph import (
    ModelProfile,
    ProfileError,
    bundled_profile_path,
    compression_ratio,
    load_profile,
    offloaded_bytes,
    read_document,
    validate_document,
)
from splitplan.planner import LoadState, NoFeasiblePartition
from splitplan.tensor_pipeline.wire import HEADER_SIZE
from splitplan.wireless import NetworkModel, bundled_networks, ordered, resolve_network

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3

PROFILE_ENV = "SPLITPLAN_PROFILE"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text):
    value = float(text)
    if value < 1.0:
        raise argparse.ArgumentTypeError("load multipliers must be >= 1.0")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", help=f"profile file (default: ${PROFILE_ENV} or bundled ResNet-50)")
    common.add_argument("--format", choices=("text", "json"), default="text")

    nets = argparse.ArgumentParser(add_help=False)
    nets.add_argument("--net", action="append",
                      help="bundled network name (3G, 4G, WiFi) or network file; repeatable "
                           "(default: all bundled)")

    load = argparse.ArgumentParser(add_help=False)
    load.add_argument("--k-mobile", type=_positive_float, default=1.0)
    load.add_argument("--k-cloud", type=_positive_float, default=1.0)

    objective = argparse.ArgumentParser(add_help=False)
    objective.add_argument("--objective", choices=planner.OBJECTIVES, default="latency")

    parser = _Parser(prog="splitplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("plan", parents=[common, nets, load, objective],
                   help="choose the best partition point")
    sub.add_parser("table4", parents=[common, nets, load],
                   help="per-partition latency, energy and offloaded data")
    p = sub.add_parser("compare", parents=[common, nets, load, objective],
                       help="collaborative vs cloud-only vs mobile-only")
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("simulate", parents=[common],
                       help="run the discrete-event simulator from a config file")
    p.add_argument("config", help="simulation config (JSON)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for trace.jsonl and summary.json")
    sub.add_parser("validate", parents=[common], help="check a profile's invariants")
    return parser


# --------------------------------------------------------------------------
# helpers

def _profile_path(args) -> Path:
    if args.profile:
        return Path(args.profile)
    if os.environ.get(PROFILE_ENV):
        return Path(os.environ[PROFILE_ENV])
    return bundled_profile_path()


def _load_profile(args) -> ModelProfile:
    path = _profile_path(args)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    try:
        return load_profile(path)
    except ProfileError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _networks(specs) -> list[NetworkModel]:
    if not specs:
        return ordered(bundled_networks().values())
    found: dict[str, NetworkModel] = {}
    for spec in specs:
        try:
            for net in resolve_network(spec):
                found[net.name] = net
        except LookupError as exc:
            raise UsageError(str(exc)) from exc
        except (ValueError, OSError) as exc:
            raise DataError(f"{spec}: {exc}") from exc
    return ordered(found.values())


def _emit_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=False))


def _fmt(value, digits=1) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


# --------------------------------------------------------------------------
# subcommands

def cmd_plan(args) -> int:
    profile = _load_profile(args)
    load = LoadState(args.k_mobile, args.k_cloud)
    results = []
    for net in _networks(args.net):
        plan = planner.select(profile, net, load, args.objective)
        results.append((net, plan))
    if args.format == "json":
        _emit_json({"profile": profile.model_name, "objective": args.objective,
                    "k_mobile": load.k_mobile, "k_cloud": load.k_cloud,
                    "plans": [{"network": net.name, **plan.as_dict()} for net, plan in results]})
        return EXIT_OK
    for net, plan in results:
        c = plan.cost
        print(f"{net.name}: After {plan.layer_name}, D_r={plan.d_r} "
              f"(objective {plan.objective}, accuracy {plan.accuracy * 100:.1f}%)")
        print(f"  TM {c.tm:.1f} ms  TU {c.tu:.1f} ms  TC {c.tc:.1f} ms  "
              f"PM {c.pm:.1f} mW  PU {c.pu:.1f} mW")
        print(f"  latency {c.latency_total:.1f} ms  energy {c.energy_total:.1f} mJ  "
              f"offloaded {plan.payload_bytes} B (+{HEADER_SIZE} B header)")
    return EXIT_OK


def table4_rows(profile: ModelProfile, nets, load: LoadState) -> list[dict]:
    rows = []
    for layer in profile.layers:
        d_r = planner.min_dr(profile, layer.index)
        row = {"layer": layer.name, "index": layer.index, "d_r": d_r,
               "offloaded_bytes": None, "offloaded_kb": None,
               "compression_ratio": None, "latency_ms": {}, "energy_mj": {}}
        if d_r is not None:
            nbytes = offloaded_bytes(layer, d_r)
            row["offloaded_bytes"] = nbytes
            row["offloaded_kb"] = nbytes / 1000
            row["compression_ratio"] = compression_ratio(layer, d_r)
            for net in nets:
                cost = planner.cost_of(profile, layer.index, d_r, net, load)
                row["latency_ms"][net.name] = cost.latency_total
                row["energy_mj"][net.name] = cost.energy_total
        rows.append(row)
    return rows


def cmd_table4(args) -> int:
    profile = _load_profile(args)
    nets = _networks(args.net)
    load = LoadState(args.k_mobile, args.k_cloud)
    rows = table4_rows(profile, nets, load)
    if args.format == "json":
        _emit_json({"profile": profile.model_name, "networks": [n.name for n in nets],
                    "rows": rows})
        return EXIT_OK
    header = ["Layer", "D_r", "KB"]
    for net in nets:
        header += [f"Lat {net.name} (ms)", f"En {net.name} (mJ)"]
    lines = [header]
    for row in rows:
        cells = [row["layer"], "-" if row["d_r"] is None else str(row["d_r"]),
                 _fmt(row["offloaded_kb"])]
        for net in nets:
            cells += [_fmt(row["latency_ms"].get(net.name)), _fmt(row["energy_mj"].get(net.name))]
        lines.append(cells)
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    for line in lines:
        print("  ".join(cell.rjust(width) for cell, width in zip(line, widths)))
    return EXIT_OK


def cmd_compare(args) -> int:
    profile = _load_profile(args)
    nets = _networks(args.net)
    reports = []
    for net in nets:
        cfg = sim.SimConfig(profile=profile, net=net, objective=args.objective,
                            k_mobile=args.k_mobile,
                            load_schedule=((0.0, args.k_cloud),) if args.k_cloud != 1.0 else ())
        reports.append(sim.compare_baselines(cfg, args.seed))
    avg_latency = sum(r.latency_improvement for r in reports) / len(reports)
    avg_energy = sum(r.energy_improvement for r in reports) / len(reports)
    if args.format == "json":
        _emit_json({"profile": profile.model_name, "objective": args.objective,
                    "networks": [r.as_dict() for r in reports],
                    "average_latency_improvement": avg_latency,
                    "average_energy_improvement": avg_energy})
        return EXIT_OK
    mobile = reports[0].mobile_only
    print(f"{'Setup':<14}{'Net':<7}{'Latency (ms)':>14}{'Energy (mJ)':>13}  "
          f"{'Location':<12}{'Offloaded (B)':>14}")
    print(f"{'Mobile-only':<14}{'-':<7}{mobile.mean_latency_ms:>14.1f}"
          f"{mobile.mean_energy_mj:>13.1f}  {'-':<12}{0:>14}")
    for r in reports:
        c = r.cloud_only
        print(f"{'Cloud-only':<14}{r.network:<7}{c.mean_latency_ms:>14.1f}"
              f"{c.mean_energy_mj:>13.1f}  {'-':<12}{r.cloud_only.input_bytes:>14}")
    for r in reports:
        c = r.collaborative
        print(f"{'Collaborative':<14}{r.network:<7}{c.mean_latency_ms:>14.1f}"
              f"{c.mean_energy_mj:>13.1f}  {'After ' + r.plan.layer_name:<12}"
              f"{r.plan.payload_bytes:>14}")
    print()
    for r in reports:
        print(f"{r.network}: latency improvement {r.latency_improvement:.1f}x, "
              f"energy improvement {r.energy_improvement:.1f}x over cloud-only")
    print(f"average: latency {avg_latency:.1f}x, energy {avg_energy:.1f}x")
    return EXIT_OK


def _load_sim_config(path: Path, args) -> sim.SimConfig:
    if not path.exists():
        raise DataError(f"file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: config parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataError(f"{path}: config must be a JSON object")
    if "profile" in doc and not args.profile:
        args.profile = str((path.parent / doc["profile"]))
    profile = _load_profile(args)
    net_spec = doc.get("net", "4G")
    candidate = path.parent / net_spec
    nets = _networks([str(candidate) if candidate.exists() else net_spec])
    if len(nets) != 1:
        raise DataError(f"{path}: 'net' must resolve to exactly one network")
    try:
        return sim.config_from_document(doc, profile, nets[0])
    except ValueError as exc:
        raise DataError(f"{path}: config error: {exc}") from exc


def print_summary(summary: sim.SummaryReport) -> None:
    print(f"mode {summary.mode}, {summary.query_count} queries")
    print(f"  latency ms: mean {summary.mean_latency_ms:.1f}  median "
          f"{summary.median_latency_ms:.1f}  p95 {summary.p95_latency_ms:.1f}")
    print(f"  mobile energy mJ: total {summary.total_energy_mj:.1f}  "
          f"mean {summary.mean_energy_mj:.1f}")
    print(f"  offloaded: {summary.total_payload_bytes} B payload, "
          f"{summary.total_wire_bytes} B on the wire")
    if summary.compression_vs_input is not None:
        print(f"  input-to-payload ratio: {summary.compression_vs_input:.1f}x")
    print("  queries per partition:")
    for name, count in summary.partition_counts.items():
        print(f"    {name}: {count}")


def cmd_simulate(args) -> int:
    cfg = _load_sim_config(Path(args.config), args)
    trace = sim.run(cfg, args.seed)
    summary = sim.summarize(trace)
    if args.out:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            trace.write(out / "trace.jsonl")
            (out / "summary.json").write_text(
                json.dumps(summary.as_dict(), indent=2) + "\n", encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot write output to {out}: {exc.strerror}") from exc
    if args.format == "json":
        _emit_json(summary.as_dict())
    else:
        print_summary(summary)
    return EXIT_OK


def cmd_validate(args) -> int:
    path = _profile_path(args)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    try:
        doc = read_document(path)
    except ProfileError as exc:
        problems = [(exc.field, exc.message)]
    else:
        problems = validate_document(doc)
    if args.format == "json":
        _emit_json({"path": str(path), "ok": not problems,
                    "violations": [{"field": f, "message": m} for f, m in problems]})
    elif problems:
        for where, message in problems:
            print(f"{path}: {where}: {message}")
        print(f"{len(problems)} violation(s)")
    else:
        print(f"{len(doc['layers'])} layers OK")
    return EXIT_OK if not problems else EXIT_DATA


COMMANDS = {
    "plan": cmd_plan,
    "table4": cmd_table4,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"splitplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"splitplan: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NoFeasiblePartition as exc:
        print(f"splitplan: error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except planner.MissingAccuracyTable as exc:
        print(f"splitplan: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

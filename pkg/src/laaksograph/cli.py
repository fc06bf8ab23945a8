"""Command-line surface: JSON config in, CSV/JSON artifacts out.

Commands: fit, validate, ball, exit-time, heat-kernel, green, verify-all,
export-graph.  Outputs are deterministic for a fixed (config, seed) and
independent of --workers; floats in CSVs carry 17 significant digits.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import List, Optional

from .laakso import LaaksoGraph
from .params import (BranchingFunction, GluingFunction, NotAdmissibleError,
                     fit_params, psi_b, validate, volume_law)
from .profiles import DoublingProfile
from .verify import (check_exit_time, check_hke, check_volume,
                     classify_transience, default_centers, fit_exponent,
                     on_diagonal_decay, vertex_id)
from .walk import (RandomStream, exact_mean_exit_time, green_series,
                   heat_kernel, simulate_exit_time)

FLOAT_FMT = "%.17g"


def fmt(x) -> str:
    if isinstance(x, float):
        return FLOAT_FMT % x
    return str(x)


def load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def resolve_params(config: dict):
    """Return (b, g, fit_result_or_None) from a config with either explicit
    params or target profiles."""
    has_params = "params" in config
    has_profiles = "profiles" in config
    if has_params == has_profiles:
        raise ValueError("config must contain exactly one of 'params' or 'profiles'")
    if has_params:
        b = BranchingFunction.from_dict(config["params"]["b"])
        g = GluingFunction.from_dict(config["params"]["g"])
        return b, g, None
    V = DoublingProfile.from_dict(config["profiles"]["V"])
    psi = DoublingProfile.from_dict(config["profiles"]["psi"])
    fit = fit_params(V, psi,
                     k_max=config.get("k_max", 20),
                     B_max=config.get("B_max", 8),
                     G_max=config.get("G_max", 8),
                     C0=config.get("C0", 4.0))
    return fit.b, fit.g, fit


def make_graph(config: dict) -> LaaksoGraph:
    b, g, _ = resolve_params(config)
    cap = config.get("caps", {}).get("bfs_vertices", 3_000_000)
    return LaaksoGraph(g, b, bfs_cap=cap)


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path: str, header: List[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def stable_vertex_id(v) -> str:
    return hashlib.sha256(vertex_id(v).encode()).hexdigest()[:16]


# -- commands ----------------------------------------------------------------


def cmd_fit(args) -> int:
    config = load_config(args.config)
    try:
        b, g, fit = resolve_params(config)
    except NotAdmissibleError as exc:
        write_json(_out_path(args, "fit.json"),
                   {"error": "not_admissible", "report": exc.report.to_dict()})
        print(f"not admissible: {exc}", file=sys.stderr)
        return 2
    payload = {"b": b.to_dict(), "g": g.to_dict()}
    if fit is not None:
        payload["fit"] = fit.to_dict()
    write_json(_out_path(args, "fit.json"), payload)
    print(json.dumps(payload, sort_keys=True))
    return 0


def cmd_validate(args) -> int:
    config = load_config(args.config)
    b, g, _ = resolve_params(config)
    violations = validate(b, g, graph_mode=config.get("graph_mode", True))
    write_json(_out_path(args, "validate.json"), {"violations": violations})
    print(json.dumps({"violations": violations}))
    return 0 if not violations else 1


def cmd_ball(args) -> int:
    config = load_config(args.config)
    graph = make_graph(config)
    summary = graph.ball_summary(graph.root, args.radius)
    write_csv(_out_path(args, "ball.csv"),
              ["center_id", "radius", "vertex_count", "degree_sum", "boundary_size"],
              [[stable_vertex_id(summary.center), summary.radius,
                summary.vertex_count, summary.degree_sum, summary.boundary_size]])
    print(json.dumps(summary.to_dict()))
    return 0


def cmd_exit_time(args) -> int:
    config = load_config(args.config)
    graph = make_graph(config)
    rows = []
    for r in args.radius:
        rec = exact_mean_exit_time(graph, graph.root, r)
        rows.append([stable_vertex_id(rec.center), r, rec.mean, rec.half_width, rec.trials])
        if args.trials:
            stream = RandomStream(args.seed, stream_index=r)
            mc = simulate_exit_time(graph, graph.root, r, args.trials, stream,
                                    workers=args.workers)
            rows.append([stable_vertex_id(mc.center), r, mc.mean, mc.half_width, mc.trials])
    write_csv(_out_path(args, "exit_time.csv"),
              ["center_id", "r", "mean", "ci", "trials"], rows)
    return 0


def cmd_heat_kernel(args) -> int:
    config = load_config(args.config)
    graph = make_graph(config)
    targets = [graph.root]
    records = heat_kernel(graph, graph.root, args.n_max, targets)
    rows = [[rec.n, stable_vertex_id(rec.y), rec.p_n, rec.p_n_plus_1] for rec in records]
    write_csv(_out_path(args, "heat_kernel.csv"),
              ["n", "y_id", "p_n", "p_n_plus_1"], rows)
    return 0


def cmd_green(args) -> int:
    config = load_config(args.config)
    graph = make_graph(config)
    n_values = sorted(set(args.n + [args.n_max])) if args.n else [args.n_max]
    series = green_series(graph, graph.root, graph.root, n_values,
                          support_radius=args.support_radius)
    rows = [[n, stable_vertex_id(graph.root), s]
            for n, s in zip(series.n_values, series.partial_sums)]
    write_csv(_out_path(args, "green.csv"), ["n", "y_id", "green_partial"], rows)
    print(json.dumps({"absorbed_mass": series.absorbed_mass,
                      "support_radius": series.support_radius}))
    return 0


def cmd_export_graph(args) -> int:
    config = load_config(args.config)
    graph = make_graph(config)
    induced = graph.induced_ball_graph(args.level)
    ids = [stable_vertex_id(v) for v in induced.vertices]
    from .tree import distance_to_root
    vrows = []
    for i, v in enumerate(induced.vertices):
        u, x = v
        vrows.append([ids[i],
                      ";".join(f"{k}:{val}" for k, val in u),
                      ";".join(f"{k}:{val}" for k, val in x),
                      distance_to_root(x),
                      len(induced.adjacency[i])])
    write_csv(_out_path(args, f"graph_level{args.level}_vertices.csv"),
              ["id", "u_support", "x_support", "root_distance", "degree"], vrows)
    erows = [[ids[i], ids[j]] for i, j in induced.edge_list()]
    write_csv(_out_path(args, f"graph_level{args.level}_edges.csv"),
              ["u_id", "v_id"], erows)
    return 0


def cmd_verify_all(args) -> int:
    config = load_config(args.config)
    b, g, fit = resolve_params(config)
    cap = config.get("caps", {}).get("bfs_vertices", 3_000_000)
    graph = LaaksoGraph(g, b, bfs_cap=cap)
    grid = config.get("grid", {})
    radii = grid.get("radii", [4, 8, 16, 32, 64])
    n_values = grid.get("n_values", [16, 32, 64, 128, 256])
    center_count = grid.get("centers", 3)
    thresholds = config.get("thresholds", {})
    vol_thresh = thresholds.get("volume_spread", 64.0)
    exit_thresh = thresholds.get("exit_spread", 64.0)
    hke_thresh = thresholds.get("hke_spread", 100.0)
    delta = config.get("delta", 0.25)

    centers = default_centers(graph, count=center_count,
                              radius=min(16, max(radii)))
    checks = []
    vol = check_volume(graph, centers, radii, threshold=vol_thresh)
    checks.append(vol)
    ext = check_exit_time(graph, centers, radii, threshold=exit_thresh)
    checks.append(ext)
    hke_reports = {}
    for dlt in sorted({delta, 0.125, 0.25, 0.5}):
        low, up = check_hke(graph, graph.root, n_values, delta=dlt,
                            threshold=hke_thresh)
        hke_reports[dlt] = low
        if dlt == delta:
            checks.append(low)
            checks.append(up)

    vol_pts = [(float(r), graph.ball_volume(graph.root, r)) for r in radii]
    exit_pts = [(float(r), exact_mean_exit_time(graph, graph.root, r).mean)
                for r in radii]
    fits = {
        "volume_exponent": fit_exponent(vol_pts).to_dict(),
        "exit_exponent": fit_exponent(exit_pts).to_dict(),
        "on_diagonal_decay": on_diagonal_decay(graph, graph.root, n_values).to_dict(),
    }

    V_prof = volume_law(g, b)
    psi_prof = psi_b(b)
    trans = classify_transience(V_prof, psi_prof, k_max=config.get("k_max", 20))

    mc = simulate_exit_time(graph, graph.root, max(4, radii[0]),
                            trials=config.get("mc_trials", 400),
                            stream=RandomStream(args.seed, 0),
                            workers=args.workers)

    all_pass = all(c.passed for c in checks)
    report = {
        "config": config,
        "resolved": {"b": b.to_dict(), "g": g.to_dict(), "seed": args.seed},
        "checks": [c.to_dict() for c in checks],
        "delta_sweep": {str(d): r.to_dict() for d, r in hke_reports.items()},
        "fits": fits,
        "transience": trans.to_dict(),
        "monte_carlo_exit": {"radius": mc.radius, "mean": mc.mean,
                             "ci": mc.half_width, "trials": mc.trials},
        "verdict": "pass" if all_pass else "fail",
        "failures": [c.quantity for c in checks if not c.passed],
    }
    if fit is not None:
        report["fit"] = fit.to_dict()
    write_json(_out_path(args, "verify_all.json"), report)
    print(json.dumps({"verdict": report["verdict"], "failures": report["failures"]}))
    return 0 if all_pass else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laaksograph",
        description="Laakso-type graphs with prescribed volume growth and "
                    "escape-time profiles; random-walk verification")
    parser.add_argument("--config", required=True, help="JSON run config")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("fit").set_defaults(func=cmd_fit)
    sub.add_parser("validate").set_defaults(func=cmd_validate)

    p = sub.add_parser("ball")
    p.add_argument("--radius", type=int, required=True)
    p.set_defaults(func=cmd_ball)

    p = sub.add_parser("exit-time")
    p.add_argument("--radius", type=int, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=0)
    p.set_defaults(func=cmd_exit_time)

    p = sub.add_parser("heat-kernel")
    p.add_argument("--n-max", type=int, required=True)
    p.set_defaults(func=cmd_heat_kernel)

    p = sub.add_parser("green")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--n", type=int, nargs="*", default=[])
    p.add_argument("--support-radius", type=int, default=None)
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("verify-all")
    p.set_defaults(func=cmd_verify_all)

    p = sub.add_parser("export-graph")
    p.add_argument("--level", type=int, required=True)
    p.set_defaults(func=cmd_export_graph)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

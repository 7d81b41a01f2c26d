"""Command-line entry points.

    saaplus run       --manifest PATH --profile PATH --mode saa|saa+ --out DIR
                      [--backend-config PATH]
    saaplus eval      --pred DIR --manifest PATH --out PATH
    saaplus ablate    --manifest PATH --profile PATH --out PATH
                      [--backend-config PATH]
    saaplus serve     --port N --manifest PATH --profiles DIR
                      [--backend-config PATH] [--run-slots N]
    saaplus demo-data --out DIR

Exit codes: 0 success, 2 configuration problem, 3 backend transport failure.
Backend endpoints resolve with precedence flags > environment
(SAA_BACKEND_{GENERATE,REFINE,FEATURES}_URL) > config file > oracle default.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import build_backends
from .datasets.desk import build_desk_dataset
from .datasets.evaluate import EvalReport, evaluate_dataset, run_ablations
from .datasets.manifest import load_manifest
from .errors import ConfigError, SaaError, TransportError
from .mapio import canonical_json, decode_map
from .profiles import load_profile_document
from .runio import apply_mode, read_predictions, run_dataset

MODE_ALIASES = {"saa": "saa", "saa+": "saa_plus", "saa_plus": "saa_plus"}


def _parse_mode(raw: str) -> str:
    if raw not in MODE_ALIASES:
        raise ConfigError(f"--mode must be one of saa, saa+ (got {raw!r})")
    return MODE_ALIASES[raw]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saaplus", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the pipeline over a manifest, write maps and traces")
    p_run.add_argument("--manifest", required=True)
    p_run.add_argument("--profile", required=True)
    p_run.add_argument("--mode", required=True, help="saa or saa+")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--backend-config", default=None)
    p_run.add_argument("--retries", type=int, default=None, help="retry count for remote adapters")
    p_run.add_argument("--verbose", action="store_true")

    p_eval = sub.add_parser("eval", help="score a prediction directory against a manifest")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--out", required=True, help="report JSON path; .txt/.csv/.png siblings are written too")
    p_eval.add_argument("--profile", default=None, help="profile used for the run (for report metadata)")

    p_ablate = sub.add_parser("ablate", help="evaluate the full profile and each single prompt drop")
    p_ablate.add_argument("--manifest", required=True)
    p_ablate.add_argument("--profile", required=True)
    p_ablate.add_argument("--out", required=True, help="CSV path; .json/.png siblings are written too")
    p_ablate.add_argument("--backend-config", default=None)

    p_serve = sub.add_parser("serve", help="serve the workbench HTTP API")
    p_serve.add_argument("--port", type=int, required=True)
    p_serve.add_argument("--manifest", required=True)
    p_serve.add_argument("--profiles", required=True, help="profile store directory")
    p_serve.add_argument("--backend-config", default=None)
    p_serve.add_argument("--run-slots", type=int, default=2)
    p_serve.add_argument("--host", default="127.0.0.1")

    p_demo = sub.add_parser("demo-data", help="generate the synthetic desk benchmark")
    p_demo.add_argument("--out", required=True)
    p_demo.add_argument("--no-verify", action="store_true")

    return parser


def cmd_run(args: argparse.Namespace) -> int:
    mode = _parse_mode(args.mode)
    manifest = load_manifest(args.manifest)
    document = load_profile_document(args.profile)
    profile = apply_mode(document.profile, mode)
    backends = build_backends(Path(args.manifest).parent, args.backend_config, retries=args.retries)
    summary = run_dataset(manifest, profile, backends, args.out, verbose=args.verbose)
    print(f"wrote {summary['image_count']} maps to {args.out} (mode {profile.mode})")
    return 0


def _write_eval_outputs(report: EvalReport, out_path: Path) -> None:
    from .figures import save_eval_figure

    out_path.write_text(canonical_json(report.to_json_dict()))

    lines = [f"{'category':<16} {'max-F1-pixel':>12} {'threshold':>12}"]
    for c in report.categories:
        lines.append(f"{c.category:<16} {c.max_f1_pixel:>12.6f} {c.threshold:>12.6f}")
    lines.append(f"{'mean':<16} {report.mean_max_f1_pixel:>12.6f} {'':>12}")
    out_path.with_suffix(".txt").write_text("\n".join(lines) + "\n")

    csv_lines = ["category,max_f1_pixel,threshold"]
    for c in report.categories:
        csv_lines.append(f"{c.category},{c.max_f1_pixel:.6f},{c.threshold:.6f}")
    csv_lines.append(f"mean,{report.mean_max_f1_pixel:.6f},")
    out_path.with_suffix(".csv").write_text("\n".join(csv_lines) + "\n")

    save_eval_figure(report, out_path.with_suffix(".png"))


def cmd_eval(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    raw_payloads, missing = read_predictions(args.pred, manifest)
    if missing:
        print(f"error: missing predictions for {len(missing)} image(s): {', '.join(missing)}",
              file=sys.stderr)
        return 2

    if args.profile:
        document = load_profile_document(args.profile)
        profile = document.profile
    else:
        from .core import PromptProfile

        profile = PromptProfile()

    from .core import AnomalyMap

    predictions = {image_id: AnomalyMap(decode_map(data)) for image_id, data in raw_payloads.items()}
    report = evaluate_dataset(manifest, profile, backends=None, predictions=predictions)  # type: ignore[arg-type]

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    _write_eval_outputs(report, out_path)
    print(f"dataset mean max-F1-pixel: {report.mean_max_f1_pixel:.6f}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    from .figures import save_ablation_figure

    manifest = load_manifest(args.manifest)
    if not manifest.entries:
        print("error: manifest has no entries", file=sys.stderr)
        return 2
    document = load_profile_document(args.profile)
    backends = build_backends(Path(args.manifest).parent, args.backend_config)
    table = run_ablations(manifest, document.profile, backends)

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    categories = manifest.categories
    csv_lines = ["variant," + ",".join(categories) + ",mean"]
    for row in table.rows:
        if "error" in row:
            csv_lines.append(f"{row['label']}," + ",".join("" for _ in categories) + ",error")
            continue
        report = row["report"]
        by_cat = {c.category: c.max_f1_pixel for c in report.categories}
        cells = [f"{by_cat.get(cat, float('nan')):.6f}" for cat in categories]
        csv_lines.append(f"{row['label']}," + ",".join(cells) + f",{report.mean_max_f1_pixel:.6f}")
    out_path.write_text("\n".join(csv_lines) + "\n")

    out_path.with_suffix(".json").write_text(canonical_json(table.to_json_dict()))
    save_ablation_figure(table, out_path.with_suffix(".png"))

    for row in table.rows:
        if "error" in row:
            print(f"{row['label']:10s} error: {row['error']}")
        else:
            print(f"{row['label']:10s} {row['report'].mean_max_f1_pixel:.6f}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .profiles import ProfileStore
    from .service import create_app

    manifest = load_manifest(args.manifest)
    backends = build_backends(Path(args.manifest).parent, args.backend_config)
    store = ProfileStore(args.profiles)
    app = create_app(manifest, store, backends, run_slots=args.run_slots)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_demo_data(args: argparse.Namespace) -> int:
    manifest_path = build_desk_dataset(args.out, verify=not args.no_verify)
    print(f"desk benchmark written; manifest at {manifest_path}")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "serve": cmd_serve,
    "demo-data": cmd_demo_data,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except TransportError as exc:
        print(f"backend transport error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SaaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line surface: ingest, score, evaluate, and sweep.

Diagnostics go to stderr; data goes to files or stdout. Every scoring run
writes a manifest (config, windows, saturation constants, dataset
fingerprint) sufficient to reproduce it byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import malta
from malta.activity import CommitFilterRules
from malta.aggregation import PackageScoringError, score_package
from malta.evaluation import (
    LabeledScore,
    auc_roc,
    chi_square_cramers_v,
    classify_vl_risk,
    cross_tabulate,
    mann_whitney_cliffs_delta,
    roc_points,
    time_lag,
)
from malta.metadata import saturation_constants
from malta.model import (
    MaltaConfig,
    ObservationWindows,
    PvacLabel,
    format_utc,
    parse_utc,
)
from malta.sensitivity import GridConfigError, load_grid, sweep
from malta.snapshot import (
    SnapshotValidationError,
    dataset_fingerprint,
    discover_packages,
    load_snapshot,
    write_snapshot,
)

ROW_FIELDS = (
    "package",
    "s_dev",
    "d_c",
    "r_c",
    "t_last_days",
    "s_resp",
    "r_dec",
    "d_dec",
    "p_stale",
    "s_meta",
    "s_final",
    "s_final_100",
    "maintenance_level",
    "risk_level",
    "time_lag_days",
    "pvac_label",
    "vnd",
    "archived",
)

SWEEP_FIELDS = (
    "dimension",
    "configuration",
    "auc_active",
    "auc_archived",
    "pct_low",
    "pct_high",
    "agreement",
)


def _err(message: str) -> None:
    print(f"malta: {message}", file=sys.stderr)


def _load_config(args) -> MaltaConfig:
    """Defaults, overlaid by the config file, overlaid by CLI flags."""
    values = MaltaConfig().to_dict()
    if getattr(args, "config", None):
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(raw) - set(values)
        if unknown:
            raise ValueError(f"unknown config fields in {args.config}: {sorted(unknown)}")
        values.update(raw)
    if getattr(args, "no_archival_penalty", False):
        values["apply_archival_penalty"] = False
    return MaltaConfig.from_dict(values)


def _windows_from_args(args) -> ObservationWindows:
    if getattr(args, "baseline_start", None) or getattr(args, "eval_start", None):
        if not (args.baseline_start and args.eval_start and args.eval_end):
            raise ValueError(
                "explicit windows need --baseline-start, --eval-start, and --eval-end"
            )
        eval_start = parse_utc(args.eval_start, "--eval-start")
        return ObservationWindows(
            parse_utc(args.baseline_start, "--baseline-start"),
            eval_start,
            eval_start,
            parse_utc(args.eval_end, "--eval-end"),
        )
    if not args.eval_end:
        raise ValueError("--eval-end is required (or pass --manifest)")
    return ObservationWindows.from_eval_end(
        parse_utc(args.eval_end, "--eval-end"),
        baseline_months=args.baseline_months,
        eval_months=args.eval_months,
    )


def _parse_date_flag(text: str, what: str) -> datetime:
    if "T" not in text:
        text = text + "T00:00:00Z"
    return parse_utc(text, what)


def _result_row(snapshot, result, lag_days: float) -> dict:
    c = result.components
    return {
        "package": snapshot.name,
        "s_dev": c.s_dev,
        "d_c": c.d_c,
        "r_c": c.r_c,
        "t_last_days": c.t_last_days,
        "s_resp": c.s_resp,
        "r_dec": c.r_dec,
        "d_dec": c.d_dec,
        "p_stale": c.p_stale,
        "s_meta": c.s_meta,
        "s_final": result.s_final,
        "s_final_100": result.s_final_100,
        "maintenance_level": result.maintenance_level.value,
        "risk_level": result.risk_level.value,
        "time_lag_days": lag_days,
        "pvac_label": snapshot.pvac_label.value if snapshot.pvac_label else None,
        "vnd": snapshot.vnd,
        "archived": snapshot.metadata.archived,
    }


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_table(rows: list[dict], fields, fmt: str, out: Path | None, errors=None):
    if fmt == "json":
        payload: dict = {"packages" if fields is ROW_FIELDS else "rows": rows}
        if errors is not None:
            payload["errors"] = errors
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_csv_cell(row[f]) for f in fields])
        text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _read_scores(path: Path) -> list[dict]:
    """Read a score table produced by `malta score` (JSON or CSV)."""
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        rows = []
        for record in csv.DictReader(io.StringIO(text)):
            row: dict = {}
            for key, value in record.items():
                if value == "" or value is None:
                    row[key] = None
                elif key in ("package", "maintenance_level", "risk_level", "pvac_label"):
                    row[key] = value
                elif key == "archived":
                    row[key] = value.lower() == "true"
                else:
                    row[key] = float(value)
            rows.append(row)
        return rows
    data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("packages", [])
    return list(data)


# --- ingest -----------------------------------------------------------------


def _cmd_ingest_git(args) -> int:
    from malta.gitlog import GitLogStreamError, parse_git_log, read_repository_log
    from malta.model import PackageSnapshot, RepoMetadata

    try:
        if args.log_file:
            raw = (
                sys.stdin.buffer.read()
                if args.log_file == "-"
                else Path(args.log_file).read_bytes()
            )
        else:
            raw = read_repository_log(args.repo)
        parsed = parse_git_log(raw)
    except GitLogStreamError as exc:
        _err(str(exc))
        return 1

    for error in parsed.errors:
        _err(f"line {error.line}: {error.message}")

    meta_kwargs: dict = {}
    pvac = None
    vnd = None
    if args.metadata:
        extra = json.loads(Path(args.metadata).read_text(encoding="utf-8"))
        for key in ("stars", "forks", "watchers", "open_issues", "archived"):
            if key in extra:
                meta_kwargs[key] = extra[key]
        if extra.get("pvac_label") is not None:
            pvac = PvacLabel.parse(extra["pvac_label"])
        vnd = extra.get("vnd")

    snapshot = PackageSnapshot(
        name=args.name,
        commits=tuple(parsed.commits),
        metadata=RepoMetadata(**meta_kwargs),
        pvac_label=pvac,
        vnd=vnd,
    )
    target = Path(args.dataset) / args.name
    write_snapshot(snapshot, target)
    _err(
        f"wrote {len(parsed.commits)} commits ({len(parsed.errors)} malformed) to {target}"
    )
    return 0 if not parsed.errors else 1


def _cmd_ingest_forge(args) -> int:
    from malta.forge import ForgeClient, ForgeError, fetch_forge, parse_repo_url

    token = os.environ.get(args.token_env) if args.token_env else None
    if args.token_env and not token:
        _err(f"environment variable {args.token_env} is not set; proceeding unauthenticated")
    clock = parse_utc(args.clock, "--clock") if args.clock else None
    try:
        owner, repo = parse_repo_url(args.repo_url)
        name = args.name or repo
        client = ForgeClient(
            token=token,
            api_base=args.api_base,
            page_size=args.page_size,
            concurrency=args.concurrency,
        )
        snap = fetch_forge(
            args.repo_url,
            Path(args.dataset) / name,
            clock=clock,
            name=name,
            client=client,
            exclude_bots=args.exclude_bots,
        )
    except (ForgeError, ValueError) as exc:
        _err(str(exc))
        return 1
    _err(
        f"fetched {owner}/{repo}: {len(snap.commits)} commits, "
        f"{len(snap.pull_requests)} pull requests"
    )
    return 0


# --- score ------------------------------------------------------------------


def _cmd_score(args) -> int:
    try:
        if args.manifest:
            manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
            cfg = MaltaConfig.from_dict(manifest["config"])
            windows = ObservationWindows.from_dict(manifest["windows"])
            rules = CommitFilterRules(
                doc_path_globs=tuple(manifest["commit_filters"]["doc_path_globs"]),
                exclude_merges=manifest["commit_filters"]["exclude_merges"],
            )
            expected_fingerprint = manifest["dataset_fingerprint"]
        else:
            cfg = _load_config(args)
            windows = _windows_from_args(args)
            rules = CommitFilterRules()
            expected_fingerprint = None
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return 1

    packages = discover_packages(args.dataset)
    if not packages:
        _err(f"no package snapshots found under {args.dataset}")
        return 1
    fingerprint = dataset_fingerprint(packages)
    if expected_fingerprint and fingerprint != expected_fingerprint:
        _err(
            "dataset fingerprint mismatch: manifest expects "
            f"{expected_fingerprint[:12]}..., found {fingerprint[:12]}..."
        )
        return 1

    snapshots = []
    errors: list[dict] = []
    for name, directory in packages:
        try:
            snapshots.append(load_snapshot(directory))
        except SnapshotValidationError as exc:
            errors.append({"package": name, "error": str(exc)})
            _err(str(exc))
            if not args.keep_going:
                return 1

    constants = saturation_constants([s.metadata for s in snapshots])
    rows = []
    for snap in sorted(snapshots, key=lambda s: s.name):
        try:
            result = score_package(snap, windows, constants, cfg, rules)
            lag = time_lag(snap, windows.eval_end, cfg, rules)
        except PackageScoringError as exc:
            errors.append({"package": exc.package, "error": str(exc)})
            _err(str(exc))
            if not args.keep_going:
                return 1
            continue
        rows.append(_result_row(snap, result, lag))

    out = Path(args.out) if args.out else None
    _write_table(rows, ROW_FIELDS, args.format, out, errors=errors)

    manifest_out = (
        Path(args.manifest_out)
        if args.manifest_out
        else (out.with_suffix(out.suffix + ".manifest.json") if out else None)
    )
    manifest = {
        "tool": "malta",
        "version": malta.__version__,
        "generated_at": format_utc(datetime.now(timezone.utc)),
        "config": cfg.to_dict(),
        "windows": windows.to_dict(),
        "commit_filters": {
            "doc_path_globs": list(rules.doc_path_globs),
            "exclude_merges": rules.exclude_merges,
        },
        "saturation_constants": constants.to_dict(),
        "dataset_fingerprint": fingerprint,
        "packages_scored": len(rows),
        "packages_failed": len(errors),
    }
    if manifest_out:
        manifest_out.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    _err(f"scored {len(rows)} packages ({len(errors)} failures)")
    return 0


# --- evaluate ---------------------------------------------------------------

SIGNALS = (("das", "s_dev"), ("mrs", "s_resp"), ("rmvs", "s_meta"), ("s_final", "s_final"))


def _auc_table(rows: list[dict], label_of, task: str, out_dir: Path, fmt: str) -> list[dict]:
    table = []
    for signal, field in SIGNALS:
        data = [
            LabeledScore(r["package"], r[field], label_of(r))
            for r in rows
            if r[field] is not None
        ]
        labels = {d.label for d in data}
        if len(labels) < 2:
            raise ValueError(
                f"task {task!r}: signal {signal} has a single class "
                f"({len(data)} usable packages); cannot compute AUC"
            )
        table.append({"signal": signal, "n": len(data), "auc": auc_roc(data)})
        points = roc_points(data)
        roc_path = out_dir / f"roc_{task}_{signal}.csv"
        with roc_path.open("w", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("fpr", "tpr"))
            writer.writerows(points)
    _write_table(table, ("signal", "n", "auc"), fmt, out_dir / f"auc_{task}.{fmt}")
    return table


def _cmd_evaluate(args) -> int:
    try:
        cfg = _load_config(args)
        rows = _read_scores(Path(args.scores))
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return 1
    if not rows:
        _err("score table is empty")
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        if args.task == "active":
            labeled = [r for r in rows if r["pvac_label"] is not None]
            skipped = len(rows) - len(labeled)
            if skipped:
                _err(f"task active: {skipped} packages lack an activity label; excluded")
            if not labeled:
                raise ValueError("task 'active': no packages carry activity labels")
            active = {PvacLabel.VERY_ACTIVE.value, PvacLabel.MODERATELY_ACTIVE.value}
            _auc_table(labeled, lambda r: r["pvac_label"] in active, "active", out_dir, args.format)

        elif args.task == "archived":
            _auc_table(rows, lambda r: bool(r["archived"]), "archived", out_dir, args.format)
            non_archived = [r["s_final"] for r in rows if not r["archived"]]
            archived = [r["s_final"] for r in rows if r["archived"]]
            stats = mann_whitney_cliffs_delta(non_archived, archived)
            (out_dir / "effect_archived.json").write_text(
                json.dumps(
                    {
                        "groups": {"a": "non_archived", "b": "archived"},
                        "u_statistic": stats.u_statistic,
                        "p_value": stats.p_value,
                        "cliffs_delta": stats.cliffs_delta,
                        "magnitude": stats.magnitude,
                        "n_a": len(non_archived),
                        "n_b": len(archived),
                    },
                    indent=2,
                )
                + "\n",
                encoding="utf-8",
            )

        elif args.task == "crosstab":
            with_vnd = [r for r in rows if r["vnd"] is not None]
            excluded = len(rows) - len(with_vnd)
            if excluded:
                _err(f"task crosstab: {excluded} packages lack a vnd value; excluded")
            if not with_vnd:
                raise ValueError("task 'crosstab': no packages carry vnd values")
            pairs = []
            from malta.model import RiskLevel

            for r in with_vnd:
                pairs.append(
                    (classify_vl_risk(r["vnd"], cfg), RiskLevel(r["risk_level"]))
                )
            table = cross_tabulate(pairs)
            stats = chi_square_cramers_v(table)
            with (out_dir / "crosstab.csv").open("w", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(
                    ("vl_risk", "malta_low", "malta_medium", "malta_high", "total")
                )
                from malta.evaluation import RISK_ORDER

                for level, counts, pcts, total in zip(
                    RISK_ORDER, table.counts, table.row_percentages, table.row_totals
                ):
                    writer.writerow(
                        (
                            level.value,
                            *(f"{c} ({p:.1f}%)" for c, p in zip(counts, pcts)),
                            total,
                        )
                    )
                writer.writerow(("total", *table.col_totals, table.total))
            (out_dir / "association.json").write_text(
                json.dumps(
                    {
                        "chi2": stats.chi2,
                        "df": stats.df,
                        "p_value": stats.p_value,
                        "cramers_v": stats.cramers_v,
                        "n": table.total,
                        "excluded_missing_vnd": excluded,
                    },
                    indent=2,
                )
                + "\n",
                encoding="utf-8",
            )
    except ValueError as exc:
        _err(str(exc))
        return 1
    _err(f"task {args.task}: results written to {out_dir}")
    return 0


# --- sweep ------------------------------------------------------------------


def _cmd_sweep(args) -> int:
    try:
        cfg = _load_config(args)
        windows = _windows_from_args(args)
        grid = load_grid(args.grid)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return 1

    snapshots = []
    for name, directory in discover_packages(args.dataset):
        try:
            snapshots.append(load_snapshot(directory))
        except SnapshotValidationError as exc:
            _err(str(exc))
            return 1
    if not snapshots:
        _err(f"no package snapshots found under {args.dataset}")
        return 1

    try:
        rows = sweep(snapshots, grid, cfg, windows, CommitFilterRules())
    except GridConfigError as exc:
        _err(str(exc))
        return 1

    records = [
        {
            "dimension": row.dimension,
            "configuration": row.name,
            "auc_active": row.auc_active,
            "auc_archived": row.auc_archived,
            "pct_low": row.pct_low,
            "pct_high": row.pct_high,
            "agreement": row.agreement,
        }
        for row in rows
    ]
    _write_table(records, SWEEP_FIELDS, args.format, Path(args.out) if args.out else None)
    _err(f"swept {len(rows)} configurations over {len(snapshots)} packages")
    return 0


# --- parser -----------------------------------------------------------------


def _add_window_flags(parser) -> None:
    parser.add_argument("--eval-end", help="evaluation window end (ISO-8601 date)")
    parser.add_argument("--baseline-months", type=int, default=24)
    parser.add_argument("--eval-months", type=int, default=18)
    parser.add_argument("--baseline-start", help="explicit baseline start")
    parser.add_argument("--eval-start", help="explicit evaluation start")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="malta",
        description="Maintenance-aware technical lag scoring for software packages",
    )
    parser.add_argument("--version", action="version", version=f"malta {malta.__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="materialize package snapshots")
    ingest_sub = ingest.add_subparsers(dest="source", required=True)

    git = ingest_sub.add_parser("git", help="extract commits from a local clone")
    git.add_argument("repo", nargs="?", help="path to a local git repository")
    git.add_argument("--log-file", help="pre-extracted log stream ('-' for stdin)")
    git.add_argument("--name", required=True, help="package name")
    git.add_argument("--dataset", required=True, help="dataset root directory")
    git.add_argument("--metadata", help="JSON file with forge metadata to merge in")
    git.set_defaults(func=_cmd_ingest_git)

    forge = ingest_sub.add_parser("forge", help="fetch a snapshot over the REST API")
    forge.add_argument("repo_url", help="https://github.com/owner/repo or owner/repo")
    forge.add_argument("--dataset", required=True)
    forge.add_argument("--name", help="package name (default: repository name)")
    forge.add_argument(
        "--token-env",
        default="GITHUB_TOKEN",
        help="environment variable holding the API token (never logged)",
    )
    forge.add_argument("--clock", help="snapshot clock (ISO-8601); default now")
    forge.add_argument("--api-base", default="https://api.github.com")
    forge.add_argument("--page-size", type=int, default=100)
    forge.add_argument("--concurrency", type=int, default=1)
    forge.add_argument("--exclude-bots", action="store_true")
    forge.set_defaults(func=_cmd_ingest_forge)

    score = sub.add_parser("score", help="score every package in a dataset")
    score.add_argument("--dataset", required=True)
    score.add_argument("--config", help="JSON config file (MaltaConfig fields)")
    score.add_argument("--manifest", help="reproduce a previous run from its manifest")
    _add_window_flags(score)
    score.add_argument("--format", choices=("json", "csv"), default="json")
    score.add_argument("--out", help="score table path (default: stdout)")
    score.add_argument("--manifest-out", help="manifest path (default: <out>.manifest.json)")
    score.add_argument(
        "--no-archival-penalty",
        action="store_true",
        help="disable the archival penalty (the ablated score variant)",
    )
    score.add_argument(
        "--keep-going",
        action="store_true",
        help="report per-package failures and score the rest",
    )
    score.set_defaults(func=_cmd_score)

    evaluate = sub.add_parser("evaluate", help="classification and association metrics")
    evaluate.add_argument("--scores", required=True, help="score table from `malta score`")
    evaluate.add_argument("--task", choices=("active", "archived", "crosstab"), required=True)
    evaluate.add_argument("--out", required=True, help="output directory")
    evaluate.add_argument("--config", help="JSON config file (for VL thresholds)")
    evaluate.add_argument("--format", choices=("json", "csv"), default="csv")
    evaluate.set_defaults(func=_cmd_evaluate)

    sweep_cmd = sub.add_parser("sweep", help="parameter sensitivity sweep")
    sweep_cmd.add_argument("--dataset", required=True)
    sweep_cmd.add_argument("--config", help="JSON config file for the default run")
    sweep_cmd.add_argument("--grid", help="grid JSON file (default: shipped 22-row grid)")
    _add_window_flags(sweep_cmd)
    sweep_cmd.add_argument("--format", choices=("json", "csv"), default="csv")
    sweep_cmd.add_argument("--out", help="sweep table path (default: stdout)")
    sweep_cmd.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

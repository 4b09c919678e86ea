"""Command-line entry point.

Subcommands: ``aggregate`` (event log -> retained dataset), ``curate``
(dataset -> benchmark), ``stats``, ``train``, ``evaluate``, ``pick``,
``serve``, ``export``. Exit codes: 0 success, 1 domain error, 2 usage
error.

Configuration precedence is flags > environment (``DYCO_`` prefix) >
config file (``--config``, JSON). All randomness flows from one ``--seed``
through named substreams, and every output file embeds or references a run
manifest (command, config snapshot, input digests, seed, tool version; no
wall-clock), so reruns with equal inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from critpick import __version__
from critpick.aggregation import assemble_dataset
from critpick.core import Condition, ConditionKind, Criterion, ImageRef, Prompt
from critpick.curation import (
    CurationConfig,
    CurationError,
    PoolEntry,
    corpus_stats,
    curate,
)
from critpick.evaluation import build_request, evaluate
from critpick.metrics import LABEL_ORDER
from critpick.pick import CandidateSet, CriteriaResolutionError, pick, resolve_criteria
from critpick.records import iter_jsonl, read_samples, write_samples
from critpick.remote import RemoteScorer
from critpick.scorers import LinearScorer, OracleScorer
from critpick.training import (
    LossConfig,
    Objective,
    TrainingDiverged,
    load_scorer,
    save_scorer,
    train_linear_scorer,
)

ENV_PREFIX = "DYCO_"


class _Config:
    """Layered option lookup: flag value, then env, then config file."""

    def __init__(self, config_path: str | None):
        self.file: dict = {}
        if config_path:
            with open(config_path, encoding="utf-8") as handle:
                self.file = json.load(handle)

    def resolve(self, name: str, flag_value, default, cast=str):
        if flag_value is not None:
            return flag_value
        env = os.environ.get(ENV_PREFIX + name.upper())
        if env is not None:
            return cast(env)
        if name in self.file:
            return cast(self.file[name])
        return default


def _digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def _manifest(command: str, config: dict, inputs: list[str], seed: int) -> dict:
    return {
        "command": command,
        "config": config,
        "input_digests": [_digest(p) for p in inputs],
        "seed": seed,
        "tool_version": __version__,
    }


def _write_json(path: str | None, doc: dict) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_agreement(path: str) -> dict[str, dict[str, float]]:
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    return {k: dict(v) for k, v in doc.items() if not k.startswith("_")}


def _make_scorer(spec: str, jobs: int, bench_samples=None):
    """Scorer factory: 'oracle', a scorer JSON path, or an http(s) URL."""
    if spec == "oracle":
        if bench_samples is None:
            raise ValueError("the oracle scorer needs a labeled benchmark")
        return OracleScorer(bench_samples)
    if spec.startswith("http://") or spec.startswith("https://"):
        return RemoteScorer(spec, max_inflight=max(jobs, 1))
    scorer, _ = load_scorer(spec)
    return scorer


# -- subcommands -------------------------------------------------------------


def _cmd_aggregate(args, cfg: _Config) -> int:
    threshold = cfg.resolve("threshold", args.threshold, 0.7, float)
    events = list(iter_jsonl(args.events))
    samples, agreement = assemble_dataset(events, threshold)
    manifest = _manifest("aggregate", {"threshold": threshold}, [args.events], 0)
    write_samples(args.out, samples, meta=manifest)
    if args.agreement_out:
        doc: dict = {"_manifest": manifest}
        doc.update({sid: agreement[sid] for sid in sorted(agreement)})
        _write_json(args.agreement_out, doc)
    print(f"retained {len(samples)} samples at threshold {threshold}")
    return 0


def _cmd_curate(args, cfg: _Config) -> int:
    seed = cfg.resolve("seed", args.seed, 0, int)
    target = cfg.resolve("target", args.target, None, int)
    if target is None:
        raise ValueError("curate needs --target")
    mix = cfg.resolve("difficulty_mix", args.mix, "1/3,1/3,1/3")
    mix_values = tuple(eval_fraction(part) for part in mix.split(","))
    config = CurationConfig(
        target_pairs=target,
        difficulty_mix=mix_values,
        reversal_share=cfg.resolve("reversal_share", args.reversal_share, 0.354, float),
        ambiguous_share=cfg.resolve("ambiguous_share", args.ambiguous_share, 0.047, float),
        retention_threshold=cfg.resolve("threshold", args.threshold, 0.8, float),
        seed=seed,
    )
    samples, _ = read_samples(args.dataset, strict=not args.lenient)
    agreement = _load_agreement(args.agreement)
    pool = []
    for sample in samples:
        if sample.id not in agreement:
            raise ValueError(f"no agreement metadata for sample {sample.id!r}")
        pool.append(PoolEntry(sample=sample, agreement=agreement[sample.id]))
    selected = curate(pool, config)
    manifest = _manifest(
        "curate",
        {
            "target_pairs": config.target_pairs,
            "difficulty_mix": list(config.difficulty_mix),
            "reversal_share": config.reversal_share,
            "ambiguous_share": config.ambiguous_share,
            "retention_threshold": config.retention_threshold,
        },
        [args.dataset, args.agreement],
        seed,
    )
    write_samples(args.out, selected, meta=manifest)
    print(f"curated {len(selected)} of {len(pool)} samples into {args.out}")
    return 0


def eval_fraction(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _cmd_stats(args, cfg: _Config) -> int:
    samples, _ = read_samples(args.dataset, strict=not args.lenient)
    stats = corpus_stats(samples)
    fmt = cfg.resolve("format", args.format, "table")
    if fmt == "json":
        doc = stats.to_dict()
        doc["manifest"] = _manifest("stats", {}, [args.dataset], 0)
        _write_json(args.out, doc)
    else:
        rows = [
            ("average prompt length", f"{stats.avg_prompt_length:.2f}"),
            (
                "difficulty ratio (easy/medium/hard)",
                " / ".join(f"{r:.3f}" for r in stats.difficulty_ratio),
            ),
            ("topic groups", str(stats.topic_count)),
            ("source models", str(stats.source_model_count)),
            ("average criteria per sample", f"{stats.avg_criteria_per_sample:.2f}"),
            ("maximum criteria per sample", str(stats.max_criteria)),
            ("multi-criterion share", f"{stats.multi_criterion_share:.3f}"),
            ("reversal share", f"{stats.reversal_share:.3f}"),
            ("criterion themes", str(stats.theme_count)),
        ]
        width = max(len(name) for name, _ in rows)
        for name, value in rows:
            print(f"{name:<{width}}  {value}")
    return 0


def _cmd_train(args, cfg: _Config) -> int:
    seed = cfg.resolve("seed", args.seed, 0, int)
    objective = Objective(cfg.resolve("objective", args.objective, "pairwise"))
    config = LossConfig(
        objective=objective,
        epsilon=cfg.resolve("epsilon", args.epsilon, 1e-8, float),
        learning_rate=cfg.resolve("lr", args.lr, 0.05, float),
        epochs=cfg.resolve("epochs", args.epochs, 10, int),
        seed=seed,
        shuffle=not args.no_shuffle,
        full_batch=args.full_batch,
    )
    samples, _ = read_samples(args.dataset, strict=not args.lenient)
    setting = ConditionKind(cfg.resolve("setting", args.setting, "overall"))
    dataset = []
    for sample in samples:
        if setting is ConditionKind.OVERALL:
            conditions = [Condition.overall()]
        else:
            conditions = [
                Condition.single(c)
                for c in sample.criteria
                if c.id in sample.criterion_labels
            ]
        for condition in conditions:
            label = sample.label_for(condition)
            dataset.append((build_request(sample, condition), label))
    if not dataset:
        raise ValueError("no training pairs derivable from the dataset")
    d_img = len(samples[0].image_a.features)
    text_dim = cfg.resolve("text_dim", args.text_dim, 16, int)
    init = LinearScorer.zeros(d_img, text_dim, seed=seed)
    result = train_linear_scorer(dataset, config, init)
    save_scorer(result.scorer, args.out, objective)
    manifest = _manifest(
        "train",
        {
            "objective": objective.value,
            "epochs": config.epochs,
            "lr": config.learning_rate,
            "text_dim": text_dim,
            "setting": setting.value,
        },
        [args.dataset],
        seed,
    )
    _write_json(str(args.out) + ".manifest.json", manifest)
    print(
        f"trained on {len(dataset)} pairs for {config.epochs} epochs; "
        f"final loss {result.epoch_losses[-1]:.6f}"
    )
    return 0


_SETTING_TITLES = {
    ConditionKind.SINGLE: "Single Criterion",
    ConditionKind.MULTI: "Multiple Criteria",
    ConditionKind.OVERALL: "Overall Preference",
}


def _cmd_evaluate(args, cfg: _Config) -> int:
    seed = cfg.resolve("seed", args.seed, 0, int)
    tie_band = cfg.resolve("tie_band", args.tie_band, 0.0, float)
    jobs = cfg.resolve("jobs", args.jobs, 1, int)
    samples, _ = read_samples(args.bench, strict=not args.lenient)
    scorer = _make_scorer(args.scorer, jobs, bench_samples=samples)
    settings = (
        [ConditionKind.SINGLE, ConditionKind.MULTI, ConditionKind.OVERALL]
        if args.setting == "all"
        else [ConditionKind(args.setting)]
    )
    runs = {
        setting: evaluate(
            samples, scorer, setting, tie_band=tie_band, seed=seed, jobs=jobs
        )
        for setting in settings
    }
    fmt = cfg.resolve("format", args.format, "table")
    doc = {
        "reports": {s.value: run.report.to_dict() for s, run in runs.items()},
        "manifest": _manifest(
            "evaluate",
            {"scorer": args.scorer, "tie_band": tie_band, "setting": args.setting},
            [args.bench],
            seed,
        ),
    }
    if args.out:
        _write_json(args.out, doc)
    if fmt == "json":
        if not args.out:
            _write_json(None, doc)
    else:
        header = f"{'Setting':<20}  {'A>B':>7}  {'A<B':>7}  {'A=B':>7}  {'Avg.':>7}  {'Kappa':>7}"
        print(header)
        print("-" * len(header))
        for setting, run in runs.items():
            report = run.report
            acc = report.per_label_accuracy

            def cell(value):
                return f"{value:.3f}" if value is not None else "--"

            print(
                f"{_SETTING_TITLES[setting]:<20}  "
                f"{cell(acc.get(LABEL_ORDER[0])):>7}  "
                f"{cell(acc.get(LABEL_ORDER[1])):>7}  "
                f"{cell(acc.get(LABEL_ORDER[2])):>7}  "
                f"{cell(report.avg_accuracy):>7}  {cell(report.kappa):>7}"
            )
            if report.n_errors:
                print(f"  ({report.n_errors} scorer errors)")
    return 0


def _cmd_pick(args, cfg: _Config) -> int:
    tie_band = cfg.resolve("tie_band", args.tie_band, 0.0, float)
    jobs = cfg.resolve("jobs", args.jobs, 1, int)
    with open(args.candidates, encoding="utf-8") as handle:
        doc = json.load(handle)
    prompt = Prompt(
        id=doc["prompt"]["id"],
        text=doc["prompt"]["text"],
        components=frozenset(doc["prompt"]["components"]),
        topic=doc["prompt"].get("topic", ""),
    )
    candidates = tuple(
        ImageRef(
            id=c["id"],
            source_model=c.get("source_model", ""),
            features=tuple(c["features"]),
            uri=c.get("uri"),
        )
        for c in doc["candidates"]
    )
    candidate_set = CandidateSet(prompt=prompt, candidates=candidates)
    user_criteria = None
    if args.criteria:
        with open(args.criteria, encoding="utf-8") as handle:
            user_criteria = [
                Criterion(id=c["id"], text=c["text"], theme=c.get("theme"))
                for c in json.load(handle)
            ]
    from critpick.pick import CriteriaProviderRequest

    criteria = resolve_criteria(
        user_criteria,
        CriteriaProviderRequest(prompt=prompt, reference_candidates=candidates),
        provider=None,
    )
    scorer = _make_scorer(args.scorer, jobs)
    report = pick(candidate_set, criteria, scorer, tie_band=tie_band)
    out_doc = report.to_dict()
    out_doc["manifest"] = _manifest(
        "pick",
        {"scorer": args.scorer, "tie_band": tie_band},
        [args.candidates] + ([args.criteria] if args.criteria else []),
        cfg.resolve("seed", args.seed, 0, int),
    )
    _write_json(args.out, out_doc)
    candidate_ids = [c.id for c in candidates]
    width = max(len("criterion"), *(len(c.id) for c in criteria))
    header = f"{'criterion':<{width}}  {'winner':<12}  " + "  ".join(
        f"{cid:>10}" for cid in candidate_ids
    )
    print(header)
    print("-" * len(header))
    for cid, standing in report.per_criterion.items():
        points = dict(standing.wins)
        row = "  ".join(f"{points[c]:>10g}" for c in candidate_ids)
        print(f"{cid:<{width}}  {standing.winner:<12}  {row}")
    return 0


def _cmd_serve(args, cfg: _Config) -> int:
    import uvicorn

    from critpick.service import ServiceStore, create_app

    store = ServiceStore(
        data_dir=cfg.resolve("data_dir", args.data_dir, "./annotation-data"),
        lease_minutes=cfg.resolve("lease_minutes", args.lease_minutes, 30.0, float),
        retention_threshold=cfg.resolve("threshold", args.threshold, 0.7, float),
    )
    port = cfg.resolve("port", args.port, 8080, int)
    uvicorn.run(create_app(store), host=args.host, port=port)
    return 0


def _cmd_export(args, cfg: _Config) -> int:
    from critpick.service import ServiceStore

    store = ServiceStore(
        data_dir=cfg.resolve("data_dir", args.data_dir, "./annotation-data"),
        retention_threshold=cfg.resolve("threshold", args.threshold, 0.7, float),
    )
    files = store.export(args.run)
    for name in sorted(files):
        print(f"wrote {Path(store.data_dir) / args.run / 'export' / name}")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="critpick",
        description="Criterion-aware preference evaluation and selection toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (lowest precedence)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--lenient", action="store_true",
                       help="ignore unknown record keys instead of rejecting")

    p = sub.add_parser("aggregate", help="event log -> retained dataset")
    common(p)
    p.add_argument("--events", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--agreement-out")
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("curate", help="dataset -> benchmark subset")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--agreement", required=True)
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--mix", default=None, help="difficulty mix, e.g. 1/3,1/3,1/3")
    p.add_argument("--reversal-share", type=float, default=None)
    p.add_argument("--ambiguous-share", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_curate)

    p = sub.add_parser("stats", help="corpus statistics")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", choices=("json", "table"), default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("train", help="fit a linear scorer on a dataset")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--objective", choices=("pointwise", "pairwise"), default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--text-dim", type=int, default=None)
    p.add_argument("--setting", choices=("overall", "single"), default=None)
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--full-batch", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score a benchmark and report metrics")
    common(p)
    p.add_argument("--bench", required=True)
    p.add_argument("--scorer", required=True,
                   help="'oracle', scorer JSON path, or remote base URL")
    p.add_argument("--setting", choices=("single", "multi", "overall", "all"),
                   default="all")
    p.add_argument("--tie-band", type=float, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--format", choices=("json", "table"), default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("pick", help="criterion-wise tournament selection")
    common(p)
    p.add_argument("--candidates", required=True, help="candidate pool JSON")
    p.add_argument("--criteria", help="criteria JSON list (else resolution fails)")
    p.add_argument("--scorer", required=True)
    p.add_argument("--tie-band", type=float, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_pick)

    p = sub.add_parser("serve", help="run the annotation service")
    common(p)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--lease-minutes", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("export", help="export a run from the event log")
    common(p)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--run", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _Config(args.config)
        return args.func(args, cfg)
    except (
        ValueError,
        KeyError,
        CurationError,
        CriteriaResolutionError,
        TrainingDiverged,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``convote <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_mapping, load_run_config, load_synthetic
from .corpus import generate_synthetic_corpus, parse_corpus, split_debates, write_corpus
from .errors import ConvoteError
from .pipeline import EVAL_SPLITS, TrainedModels, corpus_statistics, evaluate, run_pipeline

log = logging.getLogger("convote")


def _fmt(x, width=8, digits=2):
    return f"{'-':>{width}}" if x is None else f"{x:>{width}.{digits}f}"


def cmd_ingest(args) -> int:
    debates = parse_corpus(args.directory)
    columns = {"total": debates}
    if len(debates) >= 3:
        split = split_debates(debates, tuple(args.ratios), args.seed)
        columns.update({"train": split.train, "test": split.test, "development": split.dev})
    stats = {name: corpus_statistics(ds) for name, ds in columns.items()}
    if args.json:
        print(json.dumps(stats, indent=2))
        return 0
    print(f"{'':40}" + "".join(f"{name:>13}" for name in stats))
    rows = [("speech segments", "speech_segments", 0), ("debates", "debates", 0),
            ("average number of segments per debate", "avg_segments_per_debate", 1),
            ("average number of speakers per debate", "avg_speakers_per_debate", 1)]
    for label, key, digits in rows:
        print(f"{label:40}" + "".join(_fmt(s[key], 13, digits) for s in stats.values()))
    return 0


def cmd_synth(args) -> int:
    path = Path(args.config)
    spec, n_debates, seed = load_synthetic(load_mapping(path), path.parent)
    if args.n_debates is not None:
        n_debates = args.n_debates
    if args.seed is not None:
        seed = args.seed
    written = write_corpus(generate_synthetic_corpus(spec, n_debates, seed), args.out_dir)
    print(f"wrote {len(written)} debate file(s) to {args.out_dir}")
    return 0


def cmd_train(args) -> int:
    cfg = load_run_config(args.config)
    models = TrainedModels(cfg.split, c=cfg.c, seed=cfg.seed)
    out = cfg.model_dir
    out.mkdir(parents=True, exist_ok=True)
    models.vocabulary.save(out / "vocabulary.tsv")
    models.segment_model.save(out / "segment_model.txt")
    models.speaker_model.save(out / "speaker_model.txt")
    if any(e.variant.uses_agreement for e in cfg.experiments):
        models.reference_vocabulary.save(out / "reference_vocabulary.tsv")
        models.agreement_model.save(out / "agreement_model.txt")
    print(f"models written to {out}")
    return 0


def _emit(lines: list[str], output: Path | None) -> None:
    text = "".join(lines)
    if output is None:
        sys.stdout.write(text)
    else:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text, encoding="utf-8")


def cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    models = TrainedModels(cfg.split, c=cfg.c, seed=cfg.seed)
    lines = []
    for exp in cfg.experiments:
        report = run_pipeline(exp, cfg.split, models)
        lines.append(report.to_jsonl())
        log.info("%s theta=%s alpha=%s dev=%s test=%s", exp.variant.value,
                 report.theta_mode and report.theta_mode.value, report.alpha,
                 report.splits["dev"].accuracy_percent, report.splits["test"].accuracy_percent)
    _emit(lines, cfg.output)
    if cfg.output is not None:
        print(format_table(_read_records(cfg.output)))
    return 0


def cmd_sweep_alpha(args) -> int:
    cfg = load_run_config(args.config)
    models = TrainedModels(cfg.split, c=cfg.c, seed=cfg.seed)
    lines = []
    agreement = [e for e in cfg.experiments if e.variant.uses_agreement]
    if not agreement:
        raise ConvoteError("no agreement experiment in config; nothing to sweep")
    for exp in agreement:
        best = None
        for alpha in sorted(exp.alpha_grid):
            report = evaluate(exp, models, alpha)
            lines.append(report.to_jsonl())
            dev = report.splits["dev"].accuracy_percent
            if dev is not None and (best is None or dev > best[1]):
                best = (alpha, dev)
            print(f"{exp.variant.value:30} {exp.theta_mode.value:5} alpha={alpha:<6g}"
                  f" dev={_fmt(dev).strip()} test={_fmt(report.splits['test'].accuracy_percent).strip()}",
                  file=sys.stderr)
        if best is not None:
            print(f"{exp.variant.value} theta={exp.theta_mode.value}: selected alpha={best[0]:g}",
                  file=sys.stderr)
    _emit(lines, cfg.output)
    return 0


def _read_records(path) -> list[dict]:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if line.strip():
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError:
                raise ConvoteError(f"{path}:{lineno}: not a JSON record") from None
    return records


def format_table(records: list[dict]) -> str:
    rows: dict[tuple, dict] = {}
    for r in records:
        key = (r["variant"], r.get("theta_mode"), r.get("alpha"))
        rows.setdefault(key, {})[r["split"]] = r["accuracy_percent"]
    head = f"{'variant':32}{'theta':>7}{'alpha':>7}" + "".join(f"{s:>9}" for s in EVAL_SPLITS)
    out = [head, "-" * len(head)]
    for (variant, theta, alpha), accs in rows.items():
        out.append(f"{variant:32}{theta or '-':>7}{'-' if alpha is None else f'{alpha:g}':>7}"
                   + "".join(_fmt(accs.get(s), 9) for s in EVAL_SPLITS))
    return "\n".join(out)


def cmd_report(args) -> int:
    print(format_table(_read_records(args.results)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convote", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a corpus directory and print corpus statistics")
    p.add_argument("directory")
    p.add_argument("--ratios", type=float, nargs=3, default=(0.7, 0.2, 0.1), metavar=("TRAIN", "TEST", "DEV"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="print statistics as JSON")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="write a synthetic corpus")
    p.add_argument("config")
    p.add_argument("out_dir")
    p.add_argument("--n-debates", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    for name, func, text in (("train", cmd_train, "train and save all models"),
                             ("run", cmd_run, "run the configured experiments"),
                             ("sweep-alpha", cmd_sweep_alpha, "evaluate every alpha of the grid")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config")
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="print a results file as a table")
    p.add_argument("results")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConvoteError, OSError) as exc:
        print(f"convote {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``bitext-lens {stats,train,top,pos,repeats}``.

Machine-readable output goes to files under ``--out``; logs go to stderr.
Exit status is 0 on success, 1 on an internal invariant violation and 2 on
bad input or configuration.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .align import (
    NULL,
    ModelFileError,
    NumericalError,
    TrainingConfig,
    invert_table,
    load_table,
    save_table,
    source_priors,
    top_alignments,
    train,
)
from .corpus import AlignedCorpus, CorpusError, build_corpus, load_corpus, profile
from .pos import (
    corpus_pos_mass,
    induce_emoji_pos,
    load_pos_tags,
    write_emoji_pos_csv,
    write_pos_mass_csv,
)
from .stats import (
    fmt_real,
    frequency_table,
    repeat_bigrams,
    summarize,
    write_freq_csv,
    write_repeats_csv,
    write_rows,
    write_summary_csv,
    write_zipf_csv,
    zipf_points,
)

log = logging.getLogger("bitext_lens")

EXIT_OK, EXIT_INTERNAL, EXIT_USER = 0, 1, 2
SIDES = ("text", "emoji")


class UsageError(Exception):
    pass


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def write_manifest(out_dir: Path, command: str, config: dict, inputs, outputs) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "input_paths": [str(p) for p in inputs],
        "output_paths": [str(p) for p in outputs],
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "tool_version": __version__,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def _prepare(corpus_path, fmt, profile_name, stopwords) -> tuple[AlignedCorpus, dict]:
    norm = profile(profile_name, stopwords)
    raw = load_corpus(corpus_path, fmt)
    if not raw:
        raise UsageError("empty corpus")
    corpus = build_corpus(raw, norm)
    if len(corpus) == 0:
        raise UsageError("empty corpus (every pair was filtered out)")
    log.info("%d pairs loaded, %d kept, %d dropped", len(raw), len(corpus), corpus.dropped_pair_count)
    return corpus, {"format": fmt, "profile": profile_name, "normalization": norm.as_dict()}


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_stats(corpus_path, profile_name="s2", out_dir=".", fmt="jsonl", stopwords=None) -> int:
    corpus, cfg = _prepare(corpus_path, fmt, profile_name, stopwords)
    out = _out_dir(out_dir)
    outputs = [write_summary_csv(out / "summary.csv", [summarize(corpus, s) for s in SIDES])]
    for side in SIDES:
        table = frequency_table(corpus, side)
        outputs.append(write_freq_csv(out / f"freq_{side}.csv", table))
        outputs.append(write_zipf_csv(out / f"zipf_{side}.csv", zipf_points(table)))
    write_manifest(out, "stats", cfg, [corpus_path], outputs)
    return EXIT_OK


def cmd_train(
    corpus_path,
    profile_name="s3",
    iterations=100,
    seed=None,
    out_dir=".",
    fmt="jsonl",
    stopwords=None,
    use_null=True,
    direction="e2t",
    init="uniform",
) -> int:
    config = TrainingConfig(
        iterations=iterations, direction=direction, use_null=use_null, init=init, seed=seed
    )
    corpus, cfg = _prepare(corpus_path, fmt, profile_name, stopwords)
    out = _out_dir(out_dir)
    table, diag = train(corpus, config)
    table.check_normalized()
    model_path = out / "model.tsv"
    save_table(table, model_path)
    diag_path = write_rows(
        out / "diagnostics.csv",
        ("iteration", "log_likelihood"),
        ((i, repr(ll)) for i, ll in enumerate(diag.per_iteration_log_likelihood, start=1)),
    )
    cfg["training"] = {
        "iterations": config.iterations,
        "direction": config.direction,
        "use_null": config.use_null,
        "init": config.init,
        "seed": config.seed,
        "min_prob_floor": config.min_prob_floor,
    }
    write_manifest(out, "train", cfg, [corpus_path], [model_path, diag_path])
    return EXIT_OK


def format_top(rows, per_source: int) -> str:
    header = ["rank", "source"]
    for i in range(1, per_source + 1):
        header += [f"target{i}", f"p{i}"]
    lines = ["\t".join(header)]
    for rank, (source, entries) in enumerate(rows, start=1):
        cells = [str(rank), "ε" if source == NULL else source]
        for target, p in entries:
            cells += [target, f"{p:.4f}"]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def cmd_top(model_path, k=20, per_source=3, stream=None) -> int:
    if k < 1 or per_source < 1:
        raise UsageError("--top-k and --per-source must be >= 1")
    table = load_table(model_path)
    text = format_top(top_alignments(table, k, per_source), per_source)
    stream = stream or sys.stdout
    stream.write(text)
    stream.flush()
    return EXIT_OK


def cmd_pos(
    model_path,
    corpus_path,
    pos_path,
    out_dir=".",
    fmt="jsonl",
    profile_name="s3",
    stopwords=None,
    via_inversion=False,
) -> int:
    table = load_table(model_path)
    corpus, cfg = _prepare(corpus_path, fmt, profile_name, stopwords)
    tags = load_pos_tags(pos_path)
    if via_inversion:
        if table.direction != "text_to_emoji":
            raise UsageError("--via-inversion needs a text_to_emoji model")
        table = invert_table(table, source_priors(corpus, table))
    elif table.direction != "emoji_to_text":
        raise UsageError("model is text_to_emoji; pass --via-inversion")
    emoji_pos = induce_emoji_pos(table, tags)
    if emoji_pos.omitted:
        print(
            f"warning: {len(emoji_pos.omitted)} emoji omitted (no tagged token in support): "
            + " ".join(emoji_pos.omitted),
            file=sys.stderr,
        )
    if not emoji_pos.entries:
        raise UsageError("no emoji could be assigned a POS distribution")
    out = _out_dir(out_dir)
    outputs = [write_emoji_pos_csv(out / "emoji_pos.csv", emoji_pos)]
    outputs.append(write_pos_mass_csv(out / "pos_mass_text.csv", corpus_pos_mass(corpus, "text", tags)))
    outputs.append(write_pos_mass_csv(out / "pos_mass_emoji.csv", corpus_pos_mass(corpus, "emoji", emoji_pos)))
    cfg["via_inversion"] = via_inversion
    write_manifest(out, "pos", cfg, [model_path, corpus_path, pos_path], outputs)
    return EXIT_OK


def cmd_repeats(corpus_path, profile_name="s2", out_dir=".", fmt="jsonl", stopwords=None, top_k=20) -> int:
    corpus, cfg = _prepare(corpus_path, fmt, profile_name, stopwords)
    out = _out_dir(out_dir)
    outputs = []
    for side in SIDES:
        report = repeat_bigrams(corpus, side, top_k)
        outputs.append(write_repeats_csv(out / f"repeats_{side}.csv", report))
        log.info("%s repeat-bigram probability %s", side, fmt_real(float(report.probability)))
    cfg["top_k"] = top_k
    write_manifest(out, "repeats", cfg, [corpus_path], outputs)
    return EXIT_OK


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitext-lens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def corpus_opts(p, default_profile):
        p.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
        p.add_argument("--profile", choices=("s2", "s3"), default=default_profile)
        p.add_argument("--stopwords", help="stopword file (default: $BITEXT_LENS_STOPWORDS or bundled list)")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("stats", help="token/type counts, frequency and Zipf tables")
    p.add_argument("corpus")
    corpus_opts(p, "s2")

    p = sub.add_parser("train", help="train IBM Model 1")
    p.add_argument("corpus")
    corpus_opts(p, "s3")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--init", choices=("uniform", "random"), default="uniform")
    p.add_argument("--no-null", action="store_true", help="train without the NULL source word")
    p.add_argument("--direction", choices=("e2t", "t2e"), default="e2t")

    p = sub.add_parser("top", help="print the strongest alignments of a model")
    p.add_argument("model")
    p.add_argument("--top-k", type=_positive, default=20)
    p.add_argument("--per-source", type=_positive, default=3)

    p = sub.add_parser("pos", help="induce emoji POS distributions")
    p.add_argument("model")
    p.add_argument("corpus")
    p.add_argument("pos_tags", help="token<TAB>tag file")
    corpus_opts(p, "s3")
    p.add_argument("--via-inversion", action="store_true", help="invert a text_to_emoji model first")

    p = sub.add_parser("repeats", help="repeat-bigram statistics")
    p.add_argument("corpus")
    corpus_opts(p, "s2")
    p.add_argument("--top-k", type=_positive, default=20)
    return parser


def _dispatch(args) -> int:
    if args.command == "stats":
        return cmd_stats(args.corpus, args.profile, args.out, args.format, args.stopwords)
    if args.command == "train":
        return cmd_train(
            args.corpus, args.profile, args.iterations, args.seed, args.out, args.format,
            args.stopwords, not args.no_null, args.direction, args.init,
        )
    if args.command == "top":
        return cmd_top(args.model, args.top_k, args.per_source)
    if args.command == "pos":
        return cmd_pos(
            args.model, args.corpus, args.pos_tags, args.out, args.format, args.profile,
            args.stopwords, args.via_inversion,
        )
    if args.command == "repeats":
        return cmd_repeats(args.corpus, args.profile, args.out, args.format, args.stopwords, args.top_k)
    raise UsageError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _dispatch(args)
    except (NumericalError, AssertionError) as exc:
        print(f"error: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UsageError, CorpusError, ModelFileError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())

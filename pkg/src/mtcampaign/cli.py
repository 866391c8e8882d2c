"""Command-line entry point: ``mtcampaign <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data contract violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import config
from .campaign import emit_ranking, evaluate_all, ingest_submissions, load_baselines, load_references
from .metrics import METRIC_IDS, BeerModel, get_metric
from .pipeline import (SplitConfig, dual_reference_markdown, dual_reference_report,
                       mean_source_words, read_pairs_tsv, round1_select_test, round2_split,
                       worst_k_by_score, write_bitext, write_pairs_tsv)
from .significance import PairedSystemStats, art_pvalue, significance_csv, significance_row
from .text import corpus_stats, read_corpus, read_lines
from .validation import DataContractError, check_aligned

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _metric_list(value: str) -> list[str]:
    names = [m.strip().lower() for m in value.split(",") if m.strip()]
    bad = [m for m in names if m not in METRIC_IDS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown metric(s): {', '.join(bad) or value!r}")
    return names


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return seed


def _metric_kwargs(args) -> dict:
    return {
        "max_order": args.max_order,
        "chrf_beta": args.chrf_beta,
        "beer_model": BeerModel.load(args.beer_model) if args.beer_model else None,
        "lowercase": args.lowercase,
    }


def _add_metric_options(p):
    p.add_argument("--beer-model", help="feature<TAB>weight file (default: uniform weights)")
    p.add_argument("--max-order", type=int, default=4, help="BLEU n-gram order")
    p.add_argument("--chrf-beta", type=float, default=2.0)
    p.add_argument("--lowercase", action="store_true", help="case-fold before scoring")


def cmd_evaluate(args) -> int:
    hyps, refs = read_lines(args.hyp), read_lines(args.ref)
    check_aligned(hyps, refs)
    kw = _metric_kwargs(args)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["metric", "value", "scale"])
    for name in args.metrics:
        score = get_metric(name, **kw).corpus_score(hyps, refs)
        out.writerow([score.metric_id, f"{score.value:.4f}", score.reported_scale])
    return 0


def cmd_rank(args) -> int:
    references = load_references(args.refs)
    baselines = load_baselines(args.baselines) if args.baselines else ()
    subs, problems = ingest_submissions(args.submissions, references, baselines)
    for d in problems:
        print(f"rejected: {d}", file=sys.stderr)
    kw = _metric_kwargs(args)
    metrics = list(args.metrics)
    if args.primary not in metrics:
        metrics.insert(0, args.primary)
    scorers = {m: get_metric(m, **kw) for m in metrics}
    report = evaluate_all(subs, references, metrics, primary=args.primary, alpha=args.alpha,
                          repetitions=args.reps, seed=args.seed, metric_objects=scorers)
    for d in report.diagnostics:
        print(f"skipped: {d}", file=sys.stderr)
    if not report.tables:
        raise DataContractError("no submissions could be evaluated")
    text = emit_ranking(report, args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.report_json:
        Path(args.report_json).write_text(report.to_json(), encoding="utf-8")
    return 0


def cmd_significance(args) -> int:
    hyp_a, hyp_b, refs = read_lines(args.hyp_a), read_lines(args.hyp_b), read_lines(args.ref)
    check_aligned(hyp_a, refs, "system A lines")
    check_aligned(hyp_b, refs, "system B lines")
    metric = get_metric(args.metric, **_metric_kwargs(args))
    paired = PairedSystemStats.from_texts(metric, hyp_a, hyp_b, refs)
    res = art_pvalue(paired, metric, repetitions=args.reps, seed=args.seed, n_jobs=args.n_jobs)
    row = significance_row(Path(args.hyp_a).name, Path(args.hyp_b).name, metric.metric_id, res)
    sys.stdout.write(significance_csv([row]))
    return 0


def cmd_split(args) -> int:
    mode = args.mode
    test_size = args.test_size
    if test_size is None:
        test_size = config.ROUND1_TEST_SIZE if mode == "round1" else config.TEST_SIZE
    cfg_kw = dict(max_words=args.max_words, min_align_score=args.min_score,
                  ratio_low=args.ratio_low, ratio_high=args.ratio_high, seed=args.seed)
    pairs = read_pairs_tsv(args.input, header=args.header)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if mode == "round1":
        if args.train_avg_words is None and args.train_src is None:
            raise UsageError("round1 needs --train-avg-words or --train-src")
        if args.train_avg_words is not None:
            avg = args.train_avg_words
        else:
            avg = corpus_stats(read_corpus(args.train_src))
            if avg.num_sentences == 0:
                raise DataContractError(f"{args.train_src} is empty")
            avg = avg.num_tokens / avg.num_sentences
        cfg = SplitConfig(round1_test_size=test_size, **cfg_kw)
        result = round1_select_test(pairs, avg, cfg)
        write_bitext(out, "test", result.test)
        (out / "audit.json").write_text(
            json.dumps(result.audit, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8")
        if result.shortfall:
            print(f"warning: only {len(result.test)} test segments available", file=sys.stderr)
    else:
        if args.quota is not None and args.quota != args.val_size + test_size:
            raise UsageError("--quota must equal --val-size + --test-size")
        cfg = SplitConfig(round2_quota=args.val_size + test_size, val_size=args.val_size,
                          test_size=test_size, **cfg_kw)
        result = round2_split(pairs, cfg, dedup_eval_vs_train=args.dedup_eval_vs_train)
        result.write(out)
    return 0


def cmd_stats(args) -> int:
    st = corpus_stats(read_corpus(args.corpus))
    if args.json:
        print(json.dumps(st.as_dict()))
    else:
        print(f"|S|\t{st.num_sentences}\n|T|\t{st.num_tokens}\n|V|\t{st.vocab_size}")
    return 0


def cmd_worst_k(args) -> int:
    pairs = read_pairs_tsv(args.input, header=args.header)
    worst = worst_k_by_score(pairs, args.k)
    if args.output:
        write_pairs_tsv(args.output, worst)
    else:
        buf = io.StringIO()
        for p in worst:
            buf.write(f"{p.source_text}\t{p.target_text}\t{p.align_score!r}\t{p.provenance}\n")
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_dual_ref(args) -> int:
    ref, post = read_lines(args.ref), read_lines(args.postedit)
    hyps = {}
    for item in args.hyp:
        name, sep, path = item.partition("=")
        if not sep:
            raise UsageError(f"--hyp expects NAME=FILE, got {item!r}")
        hyps[name] = read_lines(path)
    sys.stdout.write(dual_reference_markdown(dual_reference_report(hyps, ref, post)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mtcampaign", description="Score MT submissions, test significance, rank systems and split scored bitext.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="corpus scores of one hypothesis file")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metrics", type=_metric_list, default=["bleu", "chrf"])
    _add_metric_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="cluster-ranked tables for a submissions tree")
    p.add_argument("--submissions", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--metrics", type=_metric_list, default=["bleu", "chrf"])
    p.add_argument("--primary", choices=METRIC_IDS, default="bleu")
    p.add_argument("--alpha", type=float, default=config.ALPHA)
    p.add_argument("--reps", type=int, default=config.ART_REPETITIONS)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--baselines", help="team<TAB>description manifest of unranked systems")
    p.add_argument("--output")
    p.add_argument("--report-json", help="also write the full report as JSON")
    _add_metric_options(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("significance", help="paired approximate randomization test")
    p.add_argument("--hyp-a", required=True)
    p.add_argument("--hyp-b", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metric", choices=METRIC_IDS, default="bleu")
    p.add_argument("--reps", type=int, default=config.ART_REPETITIONS)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--n-jobs", type=int, default=1)
    _add_metric_options(p)
    p.set_defaults(func=cmd_significance)

    p = sub.add_parser("split", help="filter scored bitext and build train/valid/test")
    p.add_argument("--input", required=True, help="TSV: source, target, align_score, provenance")
    p.add_argument("--header", action="store_true")
    p.add_argument("--mode", choices=("round2", "round1"), default="round2")
    p.add_argument("--min-score", type=float, default=config.MIN_ALIGN_SCORE)
    p.add_argument("--max-words", type=int, default=config.MAX_WORDS)
    p.add_argument("--ratio-low", type=float, default=config.RATIO_LOW)
    p.add_argument("--ratio-high", type=float, default=config.RATIO_HIGH)
    p.add_argument("--quota", type=int, default=None)
    p.add_argument("--val-size", type=int, default=config.VAL_SIZE)
    p.add_argument("--test-size", type=int, default=None,
                   help=f"default {config.TEST_SIZE} (round2) or {config.ROUND1_TEST_SIZE} (round1)")
    p.add_argument("--train-avg-words", type=float, help="round1: mean training source length")
    p.add_argument("--train-src", help="round1: training source file to average over")
    p.add_argument("--dedup-eval-vs-train", action="store_true")
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="sentence, token and vocabulary counts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("worst-k", help="lowest-scored pairs of a TSV")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--k", type=int, default=config.WORST_K)
    p.add_argument("--output")
    p.set_defaults(func=cmd_worst_k)

    p = sub.add_parser("dual-ref", help="BLEU/chrF against a reference and its post-edit")
    p.add_argument("--ref", required=True)
    p.add_argument("--postedit", required=True)
    p.add_argument("--hyp", action="append", required=True, metavar="NAME=FILE")
    p.set_defaults(func=cmd_dual_ref)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"mtcampaign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataContractError, UnicodeDecodeError, ValueError) as exc:
        print(f"mtcampaign: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

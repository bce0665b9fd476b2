"""Command-line entry point.

Subcommands: tokenize, score, confusions, discover, sweep, features,
correlate, simulate.  Exit codes: 0 ok, 2 parse error, 3 utterance pairing
error, 4 degenerate analysis, 5 insufficient data.

Option precedence is flags > config file (--config, a single JSON document)
> built-in defaults.  Output files are staged in a temporary directory and
moved into --out-dir only on success, so failed runs leave no partial output.
"""

import argparse
import json
import os
import shutil
import sys
import tempfile

from . import cluster, confusion, discovery, ipa, reports
from .align import align_transcripts, per, pter
from .simulate import ChannelModel, simulate as run_channel
from .errors import (
    DegenerateAnalysisError,
    InsufficientDataError,
    PairingError,
    ParseError,
    PhonekitError,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PAIRING = 3
EXIT_DEGENERATE = 4
EXIT_INSUFFICIENT = 5

DEFAULTS = {
    "unit": "phone",
    "seed": 0,
    "min_count": 50,
    "linkage": "average",
    "cut_height": 0.5,
    "out_dir": "phonekit-out",
}

DEFAULT_THRESHOLDS = {"phone": 0.002, "phone-token": 0.004}
DEFAULT_SWEEP_GRID = ["min", "0.0001", "0.001", "0.002", "0.004"]


class OutputStage:
    """Collects output files, committed to the target dir only on success."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.files = {}

    def write(self, name, text):
        self.files[name] = text

    def commit(self):
        os.makedirs(self.out_dir, exist_ok=True)
        tmp = tempfile.mkdtemp(dir=self.out_dir, prefix=".stage-")
        try:
            for name, text in self.files.items():
                with open(os.path.join(tmp, name), "w", encoding="utf-8") as fh:
                    fh.write(text)
            for name in self.files:
                os.replace(os.path.join(tmp, name), os.path.join(self.out_dir, name))
        finally:
            shutil.rmtree(tmp, ignore_errors=True)


def _resolve(args, key):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if args.config_values and key in args.config_values:
        return args.config_values[key]
    return DEFAULTS.get(key)


def _load_config(args):
    args.config_values = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            args.config_values = json.load(fh)


def _read_transcripts(paths):
    return [ipa.read_transcript(p) for p in paths]


def write_transcript_text(transcript):
    lines = [
        "%s\t%s" % (utt_id, " ".join(p.text for p in phones))
        for utt_id, phones in transcript.utterances
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def cmd_tokenize(args):
    transcript = ipa.read_transcript(args.transcript)
    unit = _resolve(args, "unit")
    out = sys.stdout
    for _, phones in transcript.utterances:
        if unit == "phone":
            for phone in phones:
                out.write(
                    "%s\t%s\n" % (phone.text, "+".join(t.cls for t in phone.tokens))
                )
        else:
            for token in ipa.phones_to_tokens(phones):
                out.write("%s\t%s\n" % (token.text, token.cls))
    return EXIT_OK


def cmd_score(args):
    ref = ipa.read_transcript(args.ref)
    hyp = ipa.read_transcript(args.hyp)
    unit = _resolve(args, "unit")
    report = per(ref, hyp) if unit == "phone" else pter(ref, hyp)
    stage = OutputStage(_resolve(args, "out_dir"))
    stage.write("report.json", json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n")
    stage.write("report.csv", reports.error_report_csv(report, args.paper_rounding))
    stage.commit()
    print("%s error rate: %.4f" % (report.unit, report.error_rate))
    return EXIT_OK


def cmd_confusions(args):
    ref = ipa.read_transcript(args.ref)
    hyp = ipa.read_transcript(args.hyp)
    unit = _resolve(args, "unit")
    alignments = align_transcripts(ref, hyp, unit=unit)
    matrix = confusion.accumulate_confusions(alignments)
    pruned, summary = confusion.prune(
        matrix, _resolve(args, "min_count"), empty_rule=args.empty_rule
    )
    if len(pruned.labels) < 2:
        print(json.dumps(summary.to_dict(), ensure_ascii=False, indent=2), file=sys.stderr)
        raise DegenerateAnalysisError(
            "confusion matrix degenerate after pruning (%d labels)" % len(pruned.labels),
            summary=summary,
        )
    rows = confusion.row_normalize(pruned)
    distances = confusion.distance_matrix(rows)
    dendrogram = cluster.agglomerative_cluster(distances, linkage=_resolve(args, "linkage"))
    clusters = cluster.flat_clusters(dendrogram, _resolve(args, "cut_height"))

    stage = OutputStage(_resolve(args, "out_dir"))
    stage.write("confusion_matrix.csv", pruned.to_csv())
    stage.write("pruning_summary.json", json.dumps(summary.to_dict(), ensure_ascii=False, indent=2) + "\n")
    stage.write("dendrogram.json", dendrogram.to_json() + "\n")
    stage.write("dendrogram.newick", dendrogram.to_newick() + "\n")
    stage.write(
        "clusters.json",
        json.dumps(
            {"cut_height": _resolve(args, "cut_height"), "clusters": clusters},
            ensure_ascii=False,
            indent=2,
        )
        + "\n",
    )
    if len(distances.labels) >= 3:
        coords = cluster.project_2d(distances, seed=_resolve(args, "seed"))
        stage.write("projection.csv", reports.projection_csv(coords))
    stage.commit()
    return EXIT_OK


def _discovery_inputs(args):
    unit = _resolve(args, "unit")
    if len(args.hyp) != len(args.truth):
        raise ParseError("--hyp and --truth counts differ")
    hyps = _read_transcripts(args.hyp)
    truths = [
        discovery.read_inventory(p, unit, language=h.language)
        for p, h in zip(args.truth, hyps)
    ]
    if args.ref:
        if len(args.ref) != len(hyps):
            raise ParseError("--ref count must match --hyp count")
        refs = _read_transcripts(args.ref)
    else:
        refs = [None] * len(hyps)
    return unit, list(zip(hyps, truths, refs))


def cmd_discover(args):
    unit, languages = _discovery_inputs(args)
    threshold = args.threshold if args.threshold is not None else DEFAULT_THRESHOLDS[unit]
    if threshold == "min" and not args.ref:
        raise InsufficientDataError("'min' threshold requires --ref transcripts")
    scores = []
    pairs = []
    for hyp, truth, ref in languages:
        profile = discovery.frequency_profile(hyp, unit)
        value = discovery.min_threshold(ref, unit) if threshold == "min" else float(threshold)
        predicted = discovery.discover(profile, value)
        result = discovery.score(predicted, truth)
        result.threshold = threshold
        scores.append(result)
        pairs.append((predicted, truth))
    all_scores = scores + [discovery.aggregate(scores)]
    symbol_rows = discovery.per_symbol_breakdown(pairs)

    stage = OutputStage(_resolve(args, "out_dir"))
    stage.write("per_language.csv", reports.discovery_scores_csv(all_scores, args.paper_rounding))
    stage.write("per_symbol.csv", reports.per_symbol_csv(symbol_rows, args.paper_rounding))
    stage.commit()
    return EXIT_OK


def cmd_sweep(args):
    unit, languages = _discovery_inputs(args)
    thresholds = args.thresholds or DEFAULT_SWEEP_GRID
    thresholds = [t if t == "min" else float(t) for t in thresholds]
    if "min" in thresholds and not args.ref:
        raise InsufficientDataError("'min' threshold requires --ref transcripts")
    per_language = []
    for hyp, truth, ref in languages:
        profile = discovery.frequency_profile(hyp, unit)
        per_language.append(discovery.sweep(profile, truth, thresholds, ref=ref))
    per_threshold = []
    for idx, threshold in enumerate(thresholds):
        scores = [sweep_scores[idx] for sweep_scores in per_language]
        pooled = discovery.aggregate(scores) if len(scores) > 1 else scores[0]
        pooled.threshold = threshold
        per_threshold.append(pooled)
    stage = OutputStage(_resolve(args, "out_dir"))
    stage.write("sweep.csv", reports.sweep_csv(per_threshold, args.paper_rounding))
    stage.commit()
    return EXIT_OK


def cmd_features(args):
    with open(args.per_symbol, encoding="utf-8") as fh:
        symbol_rows = reports.read_per_symbol_csv(fh.read())
    features = ipa.load_feature_table(args.feature_table)
    breakdown = discovery.feature_breakdown(symbol_rows, features)
    stage = OutputStage(_resolve(args, "out_dir"))
    stage.write("feature_breakdown.csv", reports.feature_breakdown_csv(breakdown, args.paper_rounding))
    if breakdown.missing_symbols:
        stage.write(
            "feature_warnings.json",
            json.dumps({"missing_symbols": breakdown.missing_symbols}, ensure_ascii=False, indent=2) + "\n",
        )
        print(
            "warning: %d symbols missing from feature table: %s"
            % (len(breakdown.missing_symbols), " ".join(breakdown.missing_symbols)),
            file=sys.stderr,
        )
    stage.commit()
    return EXIT_OK


def cmd_correlate(args):
    with open(args.per_symbol, encoding="utf-8") as fh:
        symbol_rows = reports.read_per_symbol_csv(fh.read())
    with open(args.extrinsic, encoding="utf-8") as fh:
        extrinsic = reports.read_extrinsic_csv(fh.read())
    measures = ("phoible", "aos", "aoa")
    metrics = ("precision", "recall", "f1")
    results = []
    for metric in metrics:
        for m_idx, measure in enumerate(measures):
            xs, ys = [], []
            for row in symbol_rows:
                entry = extrinsic.get(row.symbol)
                if entry is None or entry[m_idx] is None:
                    continue
                xs.append(getattr(row, metric))
                ys.append(entry[m_idx])
            r, p, dof = discovery.pearson_correlation(xs, ys)
            results.append((metric, measure, r, p, dof, discovery.significance_stars(p)))
    stage = OutputStage(_resolve(args, "out_dir"))
    stage.write("correlation.csv", reports.correlation_csv(results))
    stage.commit()
    return EXIT_OK


def cmd_simulate(args):
    ref = ipa.read_transcript(args.ref)
    with open(args.channel, encoding="utf-8") as fh:
        model = ChannelModel.from_json(fh.read())
    if args.seed is not None:
        model = ChannelModel(
            substitution=model.substitution,
            deletion_prob=model.deletion_prob,
            insertion_prob=model.insertion_prob,
            insertion_dist=model.insertion_dist,
            seed=args.seed,
        )
    hyp, log = run_channel(ref, model)
    stage = OutputStage(_resolve(args, "out_dir"))
    stage.write("hypothesis.txt", write_transcript_text(hyp))
    stage.write("simulation_log.jsonl", log.to_jsonl())
    stage.commit()
    return EXIT_OK


def _add_common(parser):
    parser.add_argument("--unit", choices=("phone", "phone-token"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--config")
    parser.add_argument("--paper-rounding", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="phonekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="list phones or phone tokens with class annotations")
    p.add_argument("transcript")
    p.add_argument("--symbol-table", help="override the bundled codepoint class table")
    _add_common(p)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("score", help="PER (phone mode) or PTER (phone-token mode)")
    p.add_argument("ref")
    p.add_argument("hyp")
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("confusions", help="confusion matrix, dendrogram, and 2-D projection")
    p.add_argument("ref")
    p.add_argument("hyp")
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--linkage", choices=cluster.LINKAGES)
    p.add_argument("--cut-height", dest="cut_height", type=float)
    p.add_argument("--empty-rule", dest="empty_rule", choices=("and", "or"), default="and")
    _add_common(p)
    p.set_defaults(func=cmd_confusions)

    p = sub.add_parser("discover", help="inventory discovery scores at one threshold")
    p.add_argument("--hyp", action="append", required=True)
    p.add_argument("--truth", action="append", required=True)
    p.add_argument("--ref", action="append")
    p.add_argument("--threshold", help="fraction or 'min'")
    _add_common(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("sweep", help="discovery scores across a threshold grid")
    p.add_argument("--hyp", action="append", required=True)
    p.add_argument("--truth", action="append", required=True)
    p.add_argument("--ref", action="append")
    p.add_argument("--thresholds", nargs="+")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("features", help="articulatory feature breakdown of a per-symbol table")
    p.add_argument("per_symbol")
    p.add_argument("--feature-table", dest="feature_table")
    _add_common(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("correlate", help="correlate per-symbol scores with extrinsic measures")
    p.add_argument("per_symbol")
    p.add_argument("extrinsic")
    _add_common(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("simulate", help="run a noisy channel over a reference transcript")
    p.add_argument("ref")
    p.add_argument("channel", help="channel model JSON")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _load_config(args)
        if getattr(args, "symbol_table", None):
            ipa.load_symbol_table(args.symbol_table)
        if getattr(args, "threshold", None) not in (None, "min"):
            args.threshold = float(args.threshold)
        return args.func(args)
    except ParseError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    except PairingError as exc:
        print("pairing error: %s" % exc, file=sys.stderr)
        return EXIT_PAIRING
    except DegenerateAnalysisError as exc:
        print("degenerate analysis: %s" % exc, file=sys.stderr)
        return EXIT_DEGENERATE
    except InsufficientDataError as exc:
        print("insufficient data: %s" % exc, file=sys.stderr)
        return EXIT_INSUFFICIENT
    except PhonekitError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

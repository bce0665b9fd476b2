"""CSV/JSON table rendering shared by the CLI.

Numeric cells carry full precision by default; with paper_rounding enabled,
percentages are rendered with one decimal (half-up), matching the published
table style.
"""

import csv
import io
from decimal import ROUND_HALF_UP, Decimal


def format_percent(fraction, paper_rounding=False):
    value = fraction * 100.0
    if paper_rounding:
        return str(Decimal(repr(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))
    return repr(value)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def error_report_csv(report, paper_rounding=False):
    pct = lambda v: format_percent(v, paper_rounding)
    return _csv_text(
        ["unit", "error_rate", "ins", "del", "sub", "ins_share", "del_share", "sub_share", "ref_len", "hyp_len"],
        [[
            report.unit,
            pct(report.error_rate),
            report.insertions,
            report.deletions,
            report.substitutions,
            pct(report.ins_share),
            pct(report.del_share),
            pct(report.sub_share),
            report.ref_len,
            report.hyp_len,
        ]],
    )


def discovery_scores_csv(scores, paper_rounding=False):
    pct = lambda v: format_percent(v, paper_rounding)
    rows = [
        [s.language, s.tp, s.fp, s.fn, pct(s.precision), pct(s.recall), pct(s.f1)]
        for s in scores
    ]
    return _csv_text(
        ["language", "tp", "fp", "fn", "precision", "recall", "f1"], rows
    )


def sweep_csv(scores, paper_rounding=False):
    pct = lambda v: format_percent(v, paper_rounding)
    rows = [
        [s.language, s.threshold, pct(s.precision), pct(s.recall), pct(s.f1)]
        for s in scores
    ]
    return _csv_text(["language", "threshold", "precision", "recall", "f1"], rows)


def per_symbol_csv(rows, paper_rounding=False):
    pct = lambda v: format_percent(v, paper_rounding)
    data = [
        [r.symbol, r.tp, r.fp, r.fn, r.count, pct(r.precision), pct(r.recall), pct(r.f1)]
        for r in rows
    ]
    return _csv_text(
        ["symbol", "tp", "fp", "fn", "count", "precision", "recall", "f1"], data
    )


def read_per_symbol_csv(text):
    """Re-parse a per-symbol table emitted by per_symbol_csv."""
    from .discovery import SymbolRow

    reader = csv.DictReader(text.splitlines())
    return [
        SymbolRow(
            symbol=row["symbol"],
            tp=int(row["tp"]),
            fp=int(row["fp"]),
            fn=int(row["fn"]),
        )
        for row in reader
    ]


def feature_breakdown_csv(breakdown, paper_rounding=False):
    pct = lambda v: format_percent(v, paper_rounding)
    rows = [
        [
            r.axis,
            r.category,
            "%d - %d" % (r.lang_min, r.lang_max),
            r.count,
            pct(r.precision),
            pct(r.recall),
            pct(r.f1),
        ]
        for r in breakdown.rows
    ]
    return _csv_text(
        ["axis", "category", "languages", "count", "precision", "recall", "f1"], rows
    )


def correlation_csv(results):
    """Rows of (metric, measure, r, p, dof, stars)."""
    rows = [
        [metric, measure, repr(r), repr(p), dof, stars]
        for metric, measure, r, p, dof, stars in results
    ]
    return _csv_text(["metric", "measure", "r", "p", "dof", "stars"], rows)


def projection_csv(coords):
    rows = [[label, repr(x), repr(y)] for label, (x, y) in sorted(coords.items())]
    return _csv_text(["label", "x", "y"], rows)


def read_extrinsic_csv(text):
    """Extrinsic table: symbol,phoible_pct,aos_pct,aoa_rank with blanks for missing."""
    reader = csv.DictReader(text.splitlines())
    expected = ["symbol", "phoible_pct", "aos_pct", "aoa_rank"]
    if reader.fieldnames != expected:
        raise ValueError("extrinsic table header must be %s" % ",".join(expected))
    entries = {}
    for row in reader:
        def opt(key, conv):
            raw = row[key].strip()
            return conv(raw) if raw else None

        entries[row["symbol"]] = (
            opt("phoible_pct", float),
            opt("aos_pct", float),
            opt("aoa_rank", int),
        )
    return entries

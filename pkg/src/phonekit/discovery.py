"""Frequency-threshold inventory discovery and its scoring machinery.

Discovery keeps every symbol whose relative frequency in the hypothesized
transcripts reaches the threshold (boundary inclusive, so the "min" threshold
can attain full recall).  All aggregation is micro: TP/FP/FN counts are pooled
before precision/recall/F1 are recomputed, and undefined ratios are reported
as zero.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

from scipy import stats

from .errors import (
    EmptyTranscriptError,
    InsufficientDataError,
    UndefinedCorrelationError,
    UnitMismatchError,
)
from .ipa import TIE_SYMBOLS, classify_symbol

UNITS = ("phone", "phone-token")


@dataclass
class Inventory:
    unit: str
    symbols: set
    language: str = ""

    def __post_init__(self):
        if self.unit not in UNITS:
            raise ValueError("unit must be one of %s" % (UNITS,))
        self.symbols = set(self.symbols)
        if any(not s for s in self.symbols):
            raise ValueError("inventory symbols must be non-empty strings")


def read_inventory(path, unit, language=""):
    """One symbol per line; '#' starts a comment line."""
    symbols = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            symbols.add(line)
    return Inventory(unit=unit, symbols=symbols, language=language)


@dataclass
class FrequencyProfile:
    unit: str
    frequencies: dict  # symbol -> relative frequency
    total_count: int
    language: str = ""


def _symbol_stream(transcript, unit):
    if unit == "phone":
        return (p.text for p in transcript.phones())
    if unit == "phone-token":
        return (t.text for t in transcript.tokens())
    raise ValueError("unit must be one of %s" % (UNITS,))


def frequency_profile(transcript, unit):
    counts = Counter(_symbol_stream(transcript, unit))
    total = sum(counts.values())
    if total == 0:
        raise EmptyTranscriptError(
            "cannot profile empty transcript %r" % transcript.language
        )
    return FrequencyProfile(
        unit=unit,
        frequencies={s: c / total for s, c in counts.items()},
        total_count=total,
        language=transcript.language,
    )


def discover(profile, threshold, inclusive=True):
    """Symbols whose relative frequency reaches the threshold."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    if inclusive:
        symbols = {s for s, f in profile.frequencies.items() if f >= threshold}
    else:
        symbols = {s for s, f in profile.frequencies.items() if f > threshold}
    return Inventory(unit=profile.unit, symbols=symbols, language=profile.language)


def min_threshold(ref, unit):
    """Relative frequency of the rarest symbol in the reference transcript."""
    profile = frequency_profile(ref, unit)
    return min(profile.frequencies.values())


@dataclass
class DiscoveryScore:
    tp: int
    fp: int
    fn: int
    language: str = ""
    threshold: object = None  # fraction or "min"
    unit: str = "phone"

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def _drop_unmatched_ties(predicted, truth):
    # Tie bars are kept by the tokenizer but only scored when the ground
    # truth inventory itself contains them.
    if predicted.unit != "phone-token":
        return predicted.symbols
    return {
        s
        for s in predicted.symbols
        if s not in TIE_SYMBOLS or s in truth.symbols
    }


def score(predicted, truth):
    if predicted.unit != truth.unit:
        raise UnitMismatchError(
            "predicted unit %r != truth unit %r" % (predicted.unit, truth.unit)
        )
    pred = _drop_unmatched_ties(predicted, truth)
    tp = len(pred & truth.symbols)
    fp = len(pred - truth.symbols)
    fn = len(truth.symbols - pred)
    return DiscoveryScore(
        tp=tp,
        fp=fp,
        fn=fn,
        language=predicted.language or truth.language,
        unit=predicted.unit,
    )


def sweep(profile, truth, thresholds, ref=None, inclusive=True):
    """Score discovery at each threshold; "min" needs the reference transcript."""
    if not thresholds:
        raise ValueError("thresholds must be non-empty")
    results = []
    for threshold in thresholds:
        if threshold == "min":
            if ref is None:
                raise InsufficientDataError(
                    "'min' threshold requires a reference transcript"
                )
            value = min_threshold(ref, profile.unit)
        else:
            value = float(threshold)
        result = score(discover(profile, value, inclusive=inclusive), truth)
        result.threshold = threshold
        results.append(result)
    return results


def aggregate(scores):
    """Micro-pool per-language scores into one."""
    if not scores:
        raise ValueError("nothing to aggregate")
    units = {s.unit for s in scores}
    thresholds = {s.threshold for s in scores}
    if len(units) > 1:
        raise UnitMismatchError("cannot aggregate mixed units %s" % units)
    if len(thresholds) > 1:
        raise UnitMismatchError("cannot aggregate mixed thresholds %s" % thresholds)
    return DiscoveryScore(
        tp=sum(s.tp for s in scores),
        fp=sum(s.fp for s in scores),
        fn=sum(s.fn for s in scores),
        language="ALL",
        threshold=scores[0].threshold,
        unit=scores[0].unit,
    )


@dataclass
class SymbolRow:
    symbol: str
    tp: int
    fp: int
    fn: int

    @property
    def count(self):
        # Languages whose true inventory contains the symbol.
        return self.tp + self.fn

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def per_symbol_breakdown(pairs):
    """Cross-language symbol table from (predicted, truth) inventory pairs.

    For each symbol, tp/fp/fn count the languages where it was correctly
    discovered, falsely discovered, or missed.
    """
    if not pairs:
        raise ValueError("need at least one language")
    tally = Counter()
    for predicted, truth in pairs:
        pred = _drop_unmatched_ties(predicted, truth)
        for s in pred & truth.symbols:
            tally[(s, "tp")] += 1
        for s in pred - truth.symbols:
            tally[(s, "fp")] += 1
        for s in truth.symbols - pred:
            tally[(s, "fn")] += 1
    symbols = sorted({s for s, _ in tally})
    return [
        SymbolRow(
            symbol=s,
            tp=tally[(s, "tp")],
            fp=tally[(s, "fp")],
            fn=tally[(s, "fn")],
        )
        for s in symbols
    ]


@dataclass
class FeatureRow:
    axis: str
    category: str
    lang_min: int
    lang_max: int
    count: int
    tp: int
    fp: int
    fn: int

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class FeatureBreakdown:
    rows: list
    missing_symbols: list = field(default_factory=list)


def feature_breakdown(symbol_rows, features):
    """Aggregate the per-symbol table into articulatory feature categories.

    Modifier symbols (tones, stress, length, ties, diacritics) carry no
    articulatory features and are skipped; base symbols missing from the
    feature table are reported in missing_symbols.
    """
    buckets = {}  # (axis, category) -> dict
    missing = []
    for row in symbol_rows:
        if classify_symbol(row.symbol) != "base":
            continue
        axes = features.axes_for(row.symbol)
        if axes is None:
            missing.append(row.symbol)
            continue
        for axis, category in axes:
            bucket = buckets.setdefault(
                (axis, category),
                {"tp": 0, "fp": 0, "fn": 0, "count": 0, "langs": []},
            )
            bucket["tp"] += row.tp
            bucket["fp"] += row.fp
            bucket["fn"] += row.fn
            bucket["count"] += row.count
            bucket["langs"].append(row.count)
    rows = [
        FeatureRow(
            axis=axis,
            category=category,
            lang_min=min(b["langs"]),
            lang_max=max(b["langs"]),
            count=b["count"],
            tp=b["tp"],
            fp=b["fp"],
            fn=b["fn"],
        )
        for (axis, category), b in sorted(buckets.items())
    ]
    return FeatureBreakdown(rows=rows, missing_symbols=sorted(set(missing)))


def pearson_correlation(x, y):
    """Sample Pearson r with a two-sided t-test p-value.

    Pairs with a missing coordinate (None or NaN) are dropped; at least three
    complete pairs are required.  Returns (r, p, dof) with dof = n - 2.
    """
    if len(x) != len(y):
        raise ValueError("x and y must have equal length")
    pairs = [
        (float(a), float(b))
        for a, b in zip(x, y)
        if a is not None and b is not None
        and not math.isnan(float(a)) and not math.isnan(float(b))
    ]
    n = len(pairs)
    if n < 3:
        raise InsufficientDataError("need >= 3 complete pairs, got %d" % n)
    xs = [a for a, _ in pairs]
    ys = [b for _, b in pairs]
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((a - mx) ** 2 for a in xs)
    syy = sum((b - my) ** 2 for b in ys)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("zero variance in input")
    sxy = sum((a - mx) * (b - my) for a, b in pairs)
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    dof = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt(dof / (1.0 - r * r))
        p = 2.0 * float(stats.t.sf(abs(t), dof))
    return r, p, dof


def significance_stars(p):
    """'**' for p < 0.01, '*' for p < 0.05, '' otherwise."""
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""

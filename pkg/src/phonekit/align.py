"""Levenshtein alignment with traceback, plus the PER/PTER error reports.

All costs are unit costs.  When dynamic-programming costs tie, the traceback
prefers match/substitution over deletion over insertion, which keeps
downstream confusion matrices deterministic.
"""

from dataclasses import dataclass

from .errors import PairingError, UndefinedRateError
from .ipa import phones_to_tokens

MATCH = "match"
SUBSTITUTION = "substitution"
INSERTION = "insertion"
DELETION = "deletion"


@dataclass(frozen=True)
class EditOp:
    kind: str
    ref: str = None
    hyp: str = None

    def __post_init__(self):
        if self.kind in (MATCH, SUBSTITUTION):
            if self.ref is None or self.hyp is None:
                raise ValueError("%s op needs both symbols" % self.kind)
            if self.kind == MATCH and self.ref != self.hyp:
                raise ValueError("match op with differing symbols")
        elif self.kind == INSERTION:
            if self.ref is not None or self.hyp is None:
                raise ValueError("insertion op carries only the hypothesis symbol")
        elif self.kind == DELETION:
            if self.ref is None or self.hyp is not None:
                raise ValueError("deletion op carries only the reference symbol")
        else:
            raise ValueError("unknown op kind %r" % self.kind)


@dataclass(frozen=True)
class Alignment:
    ops: tuple
    ref_len: int
    hyp_len: int

    @property
    def distance(self):
        return sum(1 for op in self.ops if op.kind != MATCH)

    def replay(self):
        """Reconstruct (ref, hyp) sequences from the op list."""
        ref = [op.ref for op in self.ops if op.ref is not None]
        hyp = [op.hyp for op in self.ops if op.hyp is not None]
        return ref, hyp


def align(ref, hyp):
    """Unit-cost Levenshtein alignment between two symbol sequences."""
    ref = list(ref)
    hyp = list(hyp)
    n, m = len(ref), len(hyp)
    # dist[i][j]: distance between ref[:i] and hyp[:j]
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        ri = ref[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (ri != hyp[j - 1])
            up = prev[j] + 1
            left = row[j - 1] + 1
            row[j] = diag if diag <= up and diag <= left else min(up, left)
    ops = []
    i, j = n, m
    while i > 0 or j > 0:
        cur = dist[i][j]
        if i > 0 and j > 0:
            step = 0 if ref[i - 1] == hyp[j - 1] else 1
            if dist[i - 1][j - 1] + step == cur:
                kind = MATCH if step == 0 else SUBSTITUTION
                ops.append(EditOp(kind, ref=ref[i - 1], hyp=hyp[j - 1]))
                i -= 1
                j -= 1
                continue
        if i > 0 and dist[i - 1][j] + 1 == cur:
            ops.append(EditOp(DELETION, ref=ref[i - 1]))
            i -= 1
            continue
        ops.append(EditOp(INSERTION, hyp=hyp[j - 1]))
        j -= 1
    ops.reverse()
    return Alignment(ops=tuple(ops), ref_len=n, hyp_len=m)


@dataclass
class ErrorReport:
    unit: str
    insertions: int
    deletions: int
    substitutions: int
    matches: int
    ref_len: int
    hyp_len: int

    @property
    def errors(self):
        return self.insertions + self.deletions + self.substitutions

    @property
    def error_rate(self):
        # May exceed 1.0 when insertions dominate; never clamped.
        if self.ref_len == 0:
            if self.errors == 0:
                return 0.0
            raise UndefinedRateError("error rate undefined: empty reference")
        return self.errors / self.ref_len

    def _share(self, count):
        return count / self.errors if self.errors else 0.0

    @property
    def ins_share(self):
        return self._share(self.insertions)

    @property
    def del_share(self):
        return self._share(self.deletions)

    @property
    def sub_share(self):
        return self._share(self.substitutions)

    def to_dict(self):
        return {
            "unit": self.unit,
            "error_rate": self.error_rate,
            "errors": {
                "ins": self.insertions,
                "del": self.deletions,
                "sub": self.substitutions,
            },
            "shares": {
                "ins": self.ins_share,
                "del": self.del_share,
                "sub": self.sub_share,
            },
            "ref_len": self.ref_len,
            "hyp_len": self.hyp_len,
        }


def error_rate(pairs, unit="symbol"):
    """Micro-averaged error report over (ref, hyp) sequence pairs.

    Counts are pooled across the corpus before dividing, so the result is
    independent of how utterances are grouped.
    """
    ins = dels = subs = matches = ref_total = hyp_total = 0
    for ref, hyp in pairs:
        alignment = align(ref, hyp)
        ref_total += alignment.ref_len
        hyp_total += alignment.hyp_len
        for op in alignment.ops:
            if op.kind == MATCH:
                matches += 1
            elif op.kind == SUBSTITUTION:
                subs += 1
            elif op.kind == INSERTION:
                ins += 1
            else:
                dels += 1
    report = ErrorReport(
        unit=unit,
        insertions=ins,
        deletions=dels,
        substitutions=subs,
        matches=matches,
        ref_len=ref_total,
        hyp_len=hyp_total,
    )
    if ref_total == 0 and hyp_total > 0:
        raise UndefinedRateError(
            "error rate undefined: empty reference with %d hypothesis symbols" % hyp_total
        )
    return report


def paired_utterances(ref, hyp):
    """Pair utterances of two transcripts by id; error on unmatched ids."""
    ref_map = dict(ref.utterances)
    hyp_map = dict(hyp.utterances)
    ref_only = sorted(set(ref_map) - set(hyp_map))
    hyp_only = sorted(set(hyp_map) - set(ref_map))
    if ref_only or hyp_only:
        raise PairingError(
            "unpaired utterance ids (ref-only: %s; hyp-only: %s)"
            % (", ".join(ref_only) or "-", ", ".join(hyp_only) or "-"),
            ref_only=ref_only,
            hyp_only=hyp_only,
        )
    return [(utt_id, ref_map[utt_id], hyp_map[utt_id]) for utt_id, _ in ref.utterances]


def per(ref, hyp):
    """Phone error rate: whole phones compared by full text equality."""
    pairs = [
        ([p.text for p in r], [p.text for p in h])
        for _, r, h in paired_utterances(ref, hyp)
    ]
    return error_rate(pairs, unit="phone")


def pter(ref, hyp):
    """Phone token error rate: phones split into tokens, then re-aligned freely."""
    pairs = [
        (
            [t.text for t in phones_to_tokens(r)],
            [t.text for t in phones_to_tokens(h)],
        )
        for _, r, h in paired_utterances(ref, hyp)
    ]
    return error_rate(pairs, unit="phone-token")


def align_transcripts(ref, hyp, unit="phone"):
    """Per-utterance alignments for confusion analysis."""
    alignments = []
    for _, r, h in paired_utterances(ref, hyp):
        if unit == "phone":
            rs, hs = [p.text for p in r], [p.text for p in h]
        elif unit == "phone-token":
            rs = [t.text for t in phones_to_tokens(r)]
            hs = [t.text for t in phones_to_tokens(h)]
        else:
            raise ValueError("unit must be 'phone' or 'phone-token'")
        alignments.append(align(rs, hs))
    return alignments

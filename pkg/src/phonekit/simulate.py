"""Noisy-channel transcript simulator with exact edit-operation logging.

The channel walks each reference utterance symbol by symbol.  At every
position it first draws an insertion, then decides deletion vs. substitution
for the reference symbol; one final insertion draw happens at utterance end.
The log records every applied operation, so it can serve as an exact oracle
for alignment-based metrics downstream.

Randomness comes from numpy's PCG64 generator.  Each utterance gets its own
generator seeded with (seed, utterance_index), so results are identical
regardless of evaluation order or parallelism.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .align import DELETION, INSERTION, MATCH, SUBSTITUTION, EditOp
from .errors import InvalidDistributionError, UnknownSymbolError
from .ipa import Transcript, tokenize_phone

_SUM_ATOL = 1e-9


def _check_dist(dist, name):
    if not dist:
        return
    total = sum(dist.values())
    if any(v < 0 for v in dist.values()):
        raise InvalidDistributionError("%s has negative probabilities" % name)
    if not math.isclose(total, 1.0, abs_tol=_SUM_ATOL):
        raise InvalidDistributionError("%s sums to %.12g, expected 1" % (name, total))


@dataclass
class ChannelModel:
    substitution: dict  # ref symbol -> {out symbol: prob}, rows sum to 1
    deletion_prob: float = 0.0
    insertion_prob: float = 0.0
    insertion_dist: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        for p, name in ((self.deletion_prob, "deletion_prob"), (self.insertion_prob, "insertion_prob")):
            if not 0.0 <= p <= 1.0:
                raise ValueError("%s must be in [0, 1]" % name)
        if self.insertion_prob > 0 and not self.insertion_dist:
            raise ValueError("insertion_prob > 0 requires insertion_dist")
        _check_dist(self.insertion_dist, "insertion_dist")
        for sym, row in self.substitution.items():
            _check_dist(row, "substitution row %r" % sym)
        # Pre-sorted outcome tables make sampling order-independent.
        self._sub_tables = {
            sym: _cumulative(row) for sym, row in self.substitution.items()
        }
        self._ins_table = _cumulative(self.insertion_dist)

    @classmethod
    def identity(cls, symbols, seed=0):
        return cls(substitution={s: {s: 1.0} for s in symbols}, seed=seed)

    @classmethod
    def from_json(cls, text):
        cfg = json.loads(text)
        return cls(
            substitution=cfg["substitution"],
            deletion_prob=cfg.get("deletion_prob", 0.0),
            insertion_prob=cfg.get("insertion_prob", 0.0),
            insertion_dist=cfg.get("insertion_dist", {}),
            seed=cfg.get("seed", 0),
        )

    def to_json(self):
        return json.dumps(
            {
                "seed": self.seed,
                "deletion_prob": self.deletion_prob,
                "insertion_prob": self.insertion_prob,
                "insertion_dist": self.insertion_dist,
                "substitution": self.substitution,
            },
            ensure_ascii=False,
            indent=2,
        )


def _cumulative(dist):
    symbols = sorted(dist)
    probs = np.cumsum([dist[s] for s in symbols])
    if len(probs):
        probs[-1] = 1.0
    return symbols, probs


def _sample(table, rng):
    symbols, cum = table
    return symbols[int(np.searchsorted(cum, rng.random(), side="right"))]


@dataclass
class SimulationLog:
    utterances: list  # (utt_id, [EditOp, ...])

    def op_counts(self):
        counts = {MATCH: 0, SUBSTITUTION: 0, INSERTION: 0, DELETION: 0}
        for _, ops in self.utterances:
            for op in ops:
                counts[op.kind] += 1
        return counts

    def substitution_counts(self):
        """(ref, hyp) counts over match and substitution ops."""
        counts = {}
        for _, ops in self.utterances:
            for op in ops:
                if op.kind in (MATCH, SUBSTITUTION):
                    key = (op.ref, op.hyp)
                    counts[key] = counts.get(key, 0) + 1
        return counts

    def replay(self, ref):
        """Apply the logged ops to the reference; returns hypothesis symbol lists."""
        out = []
        for (utt_id, ops), (ref_id, phones) in zip(self.utterances, ref.utterances):
            assert utt_id == ref_id
            ref_syms = [p.text for p in phones]
            pos = 0
            hyp = []
            for op in ops:
                if op.kind == INSERTION:
                    hyp.append(op.hyp)
                elif op.kind == DELETION:
                    assert ref_syms[pos] == op.ref
                    pos += 1
                else:
                    assert ref_syms[pos] == op.ref
                    hyp.append(op.hyp)
                    pos += 1
            assert pos == len(ref_syms)
            out.append((utt_id, hyp))
        return out

    def to_jsonl(self):
        lines = []
        for utt_id, ops in self.utterances:
            for op in ops:
                lines.append(
                    json.dumps(
                        {"utt": utt_id, "op": op.kind, "ref": op.ref, "hyp": op.hyp},
                        ensure_ascii=False,
                    )
                )
        return "\n".join(lines) + ("\n" if lines else "")


def simulate(ref, model):
    """Run the channel over a reference transcript.

    Returns (hypothesis Transcript, SimulationLog).  Deterministic for a
    fixed model seed.
    """
    hyp_utterances = []
    log_utterances = []
    for index, (utt_id, phones) in enumerate(ref.utterances):
        rng = np.random.default_rng([model.seed, index])
        ops = []
        hyp_syms = []

        def maybe_insert():
            if model.insertion_prob > 0 and rng.random() < model.insertion_prob:
                sym = _sample(model._ins_table, rng)
                ops.append(EditOp(INSERTION, hyp=sym))
                hyp_syms.append(sym)

        for phone in phones:
            sym = phone.text
            table = model._sub_tables.get(sym)
            if table is None:
                raise UnknownSymbolError(
                    "symbol %r has no substitution row in the channel model" % sym
                )
            maybe_insert()
            if model.deletion_prob > 0 and rng.random() < model.deletion_prob:
                ops.append(EditOp(DELETION, ref=sym))
                continue
            out = _sample(table, rng)
            kind = MATCH if out == sym else SUBSTITUTION
            ops.append(EditOp(kind, ref=sym, hyp=out))
            hyp_syms.append(out)
        maybe_insert()
        hyp_utterances.append((utt_id, [tokenize_phone(s) for s in hyp_syms]))
        log_utterances.append((utt_id, ops))
    hyp = Transcript(language=ref.language, utterances=hyp_utterances)
    return hyp, SimulationLog(utterances=log_utterances)

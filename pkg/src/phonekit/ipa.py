"""IPA transcript parsing and tokenization.

A *phone* is one IPA segment possibly carrying modifiers (tones, length,
stress, diacritics) as part of the same unit; a *phone token* is one atomic
IPA symbol.  Inputs are NFD-normalized before segmentation so combining
diacritics become separable tokens, then segmented per codepoint; precomposed
letters that survive NFD have no canonical decomposition and therefore remain
single base tokens.
"""

import csv
import logging
import unicodedata
from dataclasses import dataclass, field
from importlib import resources

from .errors import EncodingError, NoBasePhoneError, ParseError

logger = logging.getLogger(__name__)

TOKEN_CLASSES = ("base", "tone", "diacritic", "stress", "length", "tie")

TIE_SYMBOLS = frozenset({"͡", "͜"})

_DATA_PACKAGE = "phonekit.data"
_SYMBOL_TABLE_RESOURCE = "symbol_classes.csv"
_FEATURE_TABLE_RESOURCE = "features.csv"

_VOWEL_AXES = ("height", "backness", "roundness")
_CONSONANT_AXES = ("manner", "place", "voicing")


def _load_class_table(path=None):
    if path is None:
        source = resources.files(_DATA_PACKAGE).joinpath(_SYMBOL_TABLE_RESOURCE)
        text = source.read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    table = {}
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames != ["codepoint_hex", "class"]:
        raise ParseError(
            "symbol class table must have header 'codepoint_hex,class', got %r"
            % (reader.fieldnames,)
        )
    for row in reader:
        cls = row["class"]
        if cls not in TOKEN_CLASSES:
            raise ParseError("unknown token class %r in symbol table" % cls)
        table[int(row["codepoint_hex"], 16)] = cls
    return table


_CLASS_TABLE = None
_WARNED_CODEPOINTS = set()


def _class_table():
    global _CLASS_TABLE
    if _CLASS_TABLE is None:
        _CLASS_TABLE = _load_class_table()
    return _CLASS_TABLE


def load_symbol_table(path):
    """Replace the bundled codepoint->class table (CLI override hook)."""
    global _CLASS_TABLE
    _CLASS_TABLE = _load_class_table(path)


def _classify_codepoint(cp):
    table = _class_table()
    cls = table.get(cp)
    if cls is None:
        # Fail-soft on exotic corpora: unknown codepoints act as base symbols.
        if cp not in _WARNED_CODEPOINTS:
            _WARNED_CODEPOINTS.add(cp)
            logger.warning(
                "codepoint U+%04X (%s) not in symbol class table; assuming base",
                cp,
                chr(cp),
            )
        return "base"
    return cls


def classify_symbol(grapheme):
    """Classify one grapheme cluster as base/tone/diacritic/stress/length/tie.

    Classification is a pure function of the codepoints: a cluster containing
    any base codepoint is base, otherwise the first codepoint decides.
    """
    if not grapheme:
        raise ValueError("classify_symbol: empty grapheme")
    normalized = unicodedata.normalize("NFD", grapheme)
    classes = [_classify_codepoint(ord(ch)) for ch in normalized]
    if "base" in classes:
        return "base"
    return classes[0]


@dataclass(frozen=True)
class PhoneToken:
    text: str
    cls: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("PhoneToken text must be non-empty")
        if self.cls not in TOKEN_CLASSES:
            raise ValueError("unknown token class %r" % self.cls)


@dataclass(frozen=True)
class Phone:
    tokens: tuple

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("Phone must have at least one token")
        if not any(t.cls == "base" for t in self.tokens):
            raise ValueError("Phone must contain a base token")

    @property
    def text(self):
        return "".join(t.text for t in self.tokens)

    def __str__(self):
        return self.text


def tokenize_phone(phone_text):
    """Split one phone string into its ordered phone tokens.

    Raises NoBasePhoneError if the string holds only modifier symbols.
    The tokens concatenate back to the NFD normalization of the input.
    """
    if not phone_text:
        raise NoBasePhoneError("empty phone string")
    normalized = unicodedata.normalize("NFD", phone_text)
    tokens = tuple(
        PhoneToken(ch, _classify_codepoint(ord(ch))) for ch in normalized
    )
    if not any(t.cls == "base" for t in tokens):
        raise NoBasePhoneError(
            "phone %r contains no base symbol" % phone_text
        )
    return Phone(tokens)


def phones_to_tokens(phones):
    """Flatten phones into their token sequence, preserving order."""
    out = []
    for phone in phones:
        out.extend(phone.tokens)
    return out


@dataclass
class Transcript:
    language: str
    utterances: list = field(default_factory=list)  # (utt_id, [Phone, ...])

    def __post_init__(self):
        seen = set()
        for utt_id, _ in self.utterances:
            if utt_id in seen:
                raise ParseError("duplicate utterance id %r" % utt_id)
            seen.add(utt_id)

    def phones(self):
        for _, phones in self.utterances:
            yield from phones

    def tokens(self):
        yield from phones_to_tokens(self.phones())

    def __len__(self):
        return len(self.utterances)


def parse_transcript(text, language=""):
    """Parse transcript text: one utterance per non-empty line.

    An optional leading "id<TAB>" names the utterance; otherwise the 1-based
    line number is used.  Phones are whitespace-separated.
    """
    utterances = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line:
            continue
        if "\t" in line:
            utt_id, body = line.split("\t", 1)
        else:
            utt_id, body = str(lineno), line
        phones = []
        for fieldno, token_text in enumerate(body.split(), start=1):
            try:
                phones.append(tokenize_phone(token_text))
            except NoBasePhoneError as exc:
                raise ParseError(
                    "line %d field %d: %s" % (lineno, fieldno, exc),
                    line=lineno,
                    field=fieldno,
                ) from exc
        utterances.append((utt_id, phones))
    return Transcript(language=language, utterances=utterances)


def read_transcript(path, language=None):
    """Read a transcript file; reports the offending line on bad UTF-8."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        lineno = raw.count(b"\n", 0, exc.start) + 1
        raise EncodingError(
            "%s: invalid UTF-8 on line %d" % (path, lineno), line=lineno
        ) from exc
    if language is None:
        import os

        language = os.path.splitext(os.path.basename(str(path)))[0]
    try:
        return parse_transcript(text, language=language)
    except ParseError as exc:
        raise ParseError("%s: %s" % (path, exc), line=exc.line, field=exc.field) from exc


@dataclass(frozen=True)
class VowelFeatures:
    height: str
    backness: str
    roundness: str


@dataclass(frozen=True)
class ConsonantFeatures:
    manner: str
    place: str
    voicing: str


@dataclass
class FeatureTable:
    """Articulatory features keyed by base symbol text."""

    entries: dict

    def axes_for(self, symbol):
        """Yield (axis, category) pairs for a symbol, or None if unknown."""
        entry = self.entries.get(symbol)
        if entry is None:
            return None
        if isinstance(entry, VowelFeatures):
            return list(zip(_VOWEL_AXES, (entry.height, entry.backness, entry.roundness)))
        return list(zip(_CONSONANT_AXES, (entry.manner, entry.place, entry.voicing)))


def _parse_feature_rows(rows):
    entries = {}
    for row in rows:
        symbol = unicodedata.normalize("NFD", row["symbol"])
        kind = row["kind"]
        if kind == "vowel":
            entries[symbol] = VowelFeatures(
                row["height"], row["backness"], row["roundness"]
            )
        elif kind == "consonant":
            entries[symbol] = ConsonantFeatures(
                row["manner"], row["place"], row["voicing"]
            )
        else:
            raise ParseError("feature table kind must be vowel or consonant, got %r" % kind)
    return FeatureTable(entries)


def load_feature_table(path=None):
    """Load the articulatory feature table (bundled by default)."""
    if path is None:
        source = resources.files(_DATA_PACKAGE).joinpath(_FEATURE_TABLE_RESOURCE)
        text = source.read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    reader = csv.DictReader(text.splitlines())
    expected = ["symbol", "kind", "height", "backness", "roundness", "manner", "place", "voicing"]
    if reader.fieldnames != expected:
        raise ParseError("feature table header must be %s" % ",".join(expected))
    return _parse_feature_rows(list(reader))

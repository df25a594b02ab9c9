"""Word bank ingestion, tokenization, and rule-based lemmatization.

The word bank is a CSV of ``word,level`` rows mapping English words to a
1-14 proficiency rubric. Learner text is tokenized, lemmatized with a
self-contained rule engine (exception table first, then ordered suffix
rules), and looked up against the bank.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import ConflictingDuplicate, LevelOutOfRange, MalformedRow

MIN_LEVEL = 1
MAX_LEVEL = 14

VOWELS = frozenset("aeiou")

# Irregular and otherwise troublesome forms, checked before any suffix rule.
# Includes contraction heads produced by the tokenizer ("don't" -> "don").
IRREGULAR = {
    # be / auxiliaries
    "am": "be", "is": "be", "are": "be", "was": "be", "were": "be",
    "been": "be", "being": "be",
    "isn": "be", "aren": "be", "wasn": "be", "weren": "be",
    "has": "have", "had": "have", "having": "have", "hasn": "have", "hadn": "have",
    "does": "do", "did": "do", "done": "do", "doing": "do",
    "don": "do", "doesn": "do", "didn": "do",
    "can": "can", "cannot": "can", "could": "can", "couldn": "can",
    "won": "win", "wouldn": "will", "would": "will",
    "shouldn": "shall", "should": "shall",
    # common irregular verbs (past / participle / -ing where tricky)
    "went": "go", "gone": "go", "goes": "go", "going": "go",
    "said": "say", "says": "say", "saying": "say",
    "made": "make", "making": "make",
    "got": "get", "gotten": "get", "getting": "get",
    "took": "take", "taken": "take", "taking": "take",
    "came": "come", "coming": "come",
    "saw": "see", "seen": "see", "seeing": "see",
    "knew": "know", "known": "know",
    "thought": "think",
    "gave": "give", "given": "give", "giving": "give",
    "found": "find",
    "told": "tell",
    "felt": "feel",
    "left": "leave", "leaving": "leave",
    "kept": "keep",
    "began": "begin", "begun": "begin", "beginning": "begin",
    "brought": "bring",
    "bought": "buy",
    "caught": "catch",
    "chose": "choose", "chosen": "choose", "choosing": "choose",
    "drank": "drink", "drunk": "drink",
    "drove": "drive", "driven": "drive", "driving": "drive",
    "ate": "eat", "eaten": "eat",
    "fell": "fall", "fallen": "fall",
    "flew": "fly", "flown": "fly",
    "forgot": "forget", "forgotten": "forget",
    "grew": "grow", "grown": "grow",
    "heard": "hear",
    "held": "hold",
    "lost": "lose", "losing": "lose",
    "meant": "mean",
    "met": "meet", "meeting": "meet",
    "paid": "pay",
    "rode": "ride", "ridden": "ride", "riding": "ride",
    "rang": "ring", "rung": "ring",
    "rose": "rise", "risen": "rise", "rising": "rise",
    "ran": "run", "running": "run",
    "sold": "sell",
    "sent": "send",
    "sang": "sing", "sung": "sing",
    "sat": "sit", "sitting": "sit",
    "slept": "sleep",
    "spoke": "speak", "spoken": "speak", "speaking": "speak",
    "spent": "spend",
    "stood": "stand",
    "swam": "swim", "swum": "swim", "swimming": "swim",
    "taught": "teach",
    "threw": "throw", "thrown": "throw",
    "understood": "understand",
    "wore": "wear", "worn": "wear", "wearing": "wear",
    "wrote": "write", "written": "write", "writing": "write",
    "used": "use", "using": "use",
    "tried": "try", "trying": "try", "tries": "try",
    "died": "die", "dying": "die",
    "lied": "lie", "lying": "lie",
    "tied": "tie", "tying": "tie",
    "lay": "lie", "lain": "lie",
    "hanging": "hang", "hanged": "hang", "hung": "hang",
    "singing": "sing", "bringing": "bring", "winning": "win",
    "let": "let", "letting": "let",
    "put": "put", "putting": "put",
    "set": "set", "setting": "set",
    "read": "read", "reading": "read",
    "studies": "study", "studied": "study", "studying": "study",
    # irregular noun plurals
    "children": "child", "men": "man", "women": "woman", "people": "person",
    "feet": "foot", "teeth": "tooth", "mice": "mouse", "geese": "goose",
    "leaves": "leave", "lives": "life", "knives": "knife", "wives": "wife",
    "buses": "bus", "gases": "gas", "lenses": "lens",
    "wolves": "wolf", "selves": "self", "shelves": "shelf", "halves": "half",
    "thieves": "thief", "loaves": "loaf", "scarves": "scarf", "elves": "elf",
    "calves": "calf",
}

# Words that look inflected but are already lemmas.
KEEP_AS_IS = frozenset({
    "series", "species", "analysis", "basis", "crisis", "bus", "gas",
    "this", "its", "his", "hers", "ours", "yours", "theirs", "news",
    "lens", "yes", "plus", "thus", "always", "perhaps", "during",
    "thing", "something", "nothing", "anything", "everything",
    "morning", "evening", "spring", "string", "king", "ring", "wing",
    "sing", "bring", "ceiling", "building",
    "less", "unless", "across", "us",
})

# Stems that legitimately end in a doubled consonant (undo-doubling skips these).
KEEP_DOUBLE = frozenset({
    "tell", "fall", "fell", "roll", "sell", "smell", "spell", "still",
    "stall", "skill", "chill", "will", "fill", "full", "doll", "poll",
    "tall", "well", "call", "small", "kill", "pull", "dress", "press",
    "miss", "kiss", "pass", "cross", "toss", "discuss", "access",
    "guess", "address", "express", "buzz", "add", "odd", "egg", "staff",
    "stuff", "off", "cliff", "ebb",
})

_DOUBLES = frozenset(f"{c}{c}" for c in "bdfgklmnprstvz")

_TOKEN_RE = re.compile(r"[a-zA-Z]+(?:[-'’][a-zA-Z]+)*")


def tokenize(text: str) -> list[str]:
    """Split text into word tokens.

    Splits on anything non-alphabetic except internal apostrophes and
    hyphens; contractions are split at the apostrophe and the head kept
    ("don't" -> "don").
    """
    tokens = []
    for match in _TOKEN_RE.finditer(text):
        token = match.group(0)
        token = token.split("'")[0].split("’")[0]
        if token:
            tokens.append(token)
    return tokens


def _undo_doubling(stem: str) -> str:
    if len(stem) >= 3 and stem[-2:] in _DOUBLES and stem not in KEEP_DOUBLE:
        return stem[:-1]
    return stem


def _restore_e(stem: str) -> str:
    """Heuristic silent-e restoration after -ing/-ed stripping."""
    if len(stem) < 2:
        return stem
    last = stem[-1]
    prev = stem[-2]
    # lov -> love, siz -> size, danc -> dance, argu -> argue
    if last in "cvz":
        return stem + "e"
    if last == "u" and prev not in VOWELS:
        return stem + "e"
    # settl -> settle (consonant + l)
    if last == "l" and prev not in VOWELS and prev != "l":
        return stem + "e"
    # smil -> smile: short stems with a single vowel before the l
    if (
        last == "l"
        and len(stem) == 4
        and prev in VOWELS
        and stem[-3] not in VOWELS
    ):
        return stem + "e"
    # short CVC stems: hop(ed) -> hope, nam(ed) -> name, bak(ed) -> bake
    if (
        len(stem) == 3
        and stem[-1] not in VOWELS
        and stem[-1] not in "wxy"
        and stem[-2] in VOWELS
        and stem[-3] not in VOWELS
    ):
        return stem + "e"
    return stem


def _lemmatize_word(word: str) -> str:
    if word in IRREGULAR:
        return IRREGULAR[word]
    if word in KEEP_AS_IS or len(word) <= 2:
        return word

    # plural / third-person -s family
    if word.endswith("ies") and len(word) >= 5:
        return word[:-3] + "y"
    if word.endswith("ies"):  # ties, dies, lies
        return word[:-1]
    if word.endswith(("sses", "shes", "ches", "xes", "zes", "oes")) and len(word) >= 4:
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us", "is")) and len(word) >= 4:
        return word[:-1]

    # past tense -ed family
    if word.endswith("ied") and len(word) >= 5:
        return word[:-3] + "y"
    if word.endswith("ied"):
        return word[:-1]
    if word.endswith("eed"):
        return word[:-1]
    if word.endswith("ed") and len(word) >= 4:
        stem = word[:-2]
        if stem.endswith("e"):
            return stem
        doubled = _undo_doubling(stem)
        if doubled != stem:
            return doubled
        return _restore_e(stem)

    # progressive -ing
    if word.endswith("ing") and len(word) >= 5:
        stem = word[:-3]
        doubled = _undo_doubling(stem)
        if doubled != stem:
            return doubled
        return _restore_e(stem)

    return word


def lemmatize(token: str) -> str:
    """Reduce an inflected token to its dictionary form.

    Deterministic and idempotent; strips surrounding punctuation and
    lowercases. Unknown forms pass through lowercased.
    """
    def clean(w: str) -> str:
        while True:
            stripped = w.strip().strip(".,;:!?\"'()[]{}<>-’“”")
            stripped = stripped.split("'")[0].split("’")[0]
            if stripped == w:
                return w
            w = stripped

    word = clean(token.lower())
    # iterate cleaning + rules to a fixed point so compound inflections
    # reduce fully and the result is idempotent by construction
    for _ in range(8):
        reduced = clean(_lemmatize_word(word)) if word else ""
        if reduced == word:
            break
        word = reduced
    return word


@dataclass(frozen=True)
class WordEntry:
    word: str
    level: int


@dataclass
class WordBank:
    """Immutable word -> level map; safe for concurrent reads after load."""

    entries: dict[str, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.entries)

    def lookup(self, lemma: str) -> Optional[int]:
        return self.entries.get(lemma)

    def level_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for level in self.entries.values():
            hist[level] = hist.get(level, 0) + 1
        return dict(sorted(hist.items()))


def load_word_bank(source: Iterable[str] | io.TextIOBase | str) -> WordBank:
    """Load a ``word,level`` CSV (header optional) into a WordBank.

    Duplicate rows with identical levels collapse silently; the same word
    at different levels is a hard error.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    entries: dict[str, int] = {}
    for row_number, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise MalformedRow(row_number, f"expected 2 columns, got {len(row)}")
        word_raw, level_raw = row[0].strip(), row[1].strip()
        if row_number == 1 and word_raw.lower() == "word" and level_raw.lower() == "level":
            continue
        word = word_raw.lower()
        if not word or any(ch.isspace() for ch in word):
            raise MalformedRow(row_number, f"bad word field {row[0]!r}")
        try:
            level = int(level_raw)
        except ValueError:
            raise MalformedRow(row_number, f"non-integer level {level_raw!r}") from None
        if not MIN_LEVEL <= level <= MAX_LEVEL:
            raise LevelOutOfRange(row_number, word, level)
        if word in entries and entries[word] != level:
            raise ConflictingDuplicate(word, (entries[word], level))
        entries[word] = level
    return WordBank(entries=entries)


def lookup(bank: WordBank, lemma: str) -> Optional[int]:
    return bank.lookup(lemma)

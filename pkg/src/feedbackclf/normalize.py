"""Ordered rewrite pipeline that turns raw feedback text into classifier input.

A :class:`RuleSet` is an ordered list of :class:`Rule` objects applied in a
single forward pass. Replacement tokens are inserted padded with spaces and
the final whitespace rule collapses the padding, so a rule never glues its
token onto a neighbouring word.

Three rule kinds exist:

``re``
    regular expression substitution
``cat``
    delete every codepoint whose Unicode general category starts with one of
    the listed prefixes (``P`` = punctuation, ``S`` = symbols, ...)
``op``
    a named whole-string operation (``collapse_whitespace``, ``lowercase``)

Rule sets round-trip through a plain-text rules file, one rule per line::

    <class> \\t <kind>:<pattern> \\t <replacement>

with ``<delete>`` standing for the empty replacement.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .corpus import LabeledDataset, relabel

REPLACEMENT_TOKENS = frozenset({
    "strongquestion", "strongexclamation", "annoyeddots", "URL", "number",
    "money", "dates", "twitterusername", "dbusername", "sbahn", "sadsmiley",
    "happysmiley", "laughingsmiley", "emote",
})

DEFAULT_DB_HANDLES = ("DB_Bahn", "Bahnansagen", "Bahn_Info")

RULESET_VERSION = "1"
_DELETE = "<delete>"
_LETTER = r"A-Za-zÄÖÜäöüß"

# Unicode-aware "not a word character" guards.
_NW_BEFORE = r"(?<!\w)"
_NW_AFTER = r"(?!\w)"
_NUM = r"\d+(?:[.,]\d+)*"
_DAY = r"(?:0?[1-9]|[12]\d|3[01])"
_MONTH = r"(?:0?[1-9]|1[0-2])"
_HOUR = r"(?:[01]?\d|2[0-3])"


@dataclass(frozen=True)
class Rule:
    name: str
    kind: str
    pattern: str
    replacement: str = ""

    def __post_init__(self):
        if self.kind not in ("re", "cat", "op"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.replacement and self.replacement not in REPLACEMENT_TOKENS:
            raise ValueError(f"replacement {self.replacement!r} is not a known token")
        if self.kind == "op" and self.pattern not in ("collapse_whitespace", "lowercase"):
            raise ValueError(f"unknown op {self.pattern!r}")

    @cached_property
    def _compiled(self):
        if self.kind == "re":
            return re.compile(self.pattern)
        if self.kind == "cat":
            return tuple(self.pattern.split(","))
        return None

    def apply(self, text: str) -> str:
        if self.kind == "re":
            repl = f" {self.replacement} " if self.replacement else ""
            return self._compiled.sub(repl, text)
        if self.kind == "cat":
            prefixes = self._compiled
            return "".join(c for c in text if not _category_matches(c, prefixes))
        if self.pattern == "collapse_whitespace":
            return " ".join(text.split())
        return text.lower()

    def to_line(self) -> str:
        return f"{self.name}\t{self.kind}:{self.pattern}\t{self.replacement or _DELETE}"

    @classmethod
    def from_line(cls, line: str) -> "Rule":
        name, kind_pattern, repl = line.split("\t")
        kind, _, pattern = kind_pattern.partition(":")
        return cls(name, kind, pattern, "" if repl == _DELETE else repl)


def _category_matches(char: str, prefixes: tuple[str, ...]) -> bool:
    cat = unicodedata.category(char)
    if cat.startswith(prefixes):
        return True
    # Emoji presentation selectors and tag characters are Mn/Cf but belong to
    # the emoji they decorate.
    if "EMOJI" in prefixes:
        cp = ord(char)
        return (0xFE00 <= cp <= 0xFE0F or 0xE0100 <= cp <= 0xE01EF or
                0xE0000 <= cp <= 0xE007F or cp == 0x200D or cp == 0x20E3)
    return False


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    casing_mode: str = "cased"
    version: str = RULESET_VERSION
    db_handles: tuple[str, ...] = field(default=DEFAULT_DB_HANDLES, compare=False)

    def __post_init__(self):
        if self.casing_mode not in ("cased", "lowercased"):
            raise ValueError(f"unknown casing mode {self.casing_mode!r}")

    @classmethod
    def default(cls, casing_mode: str = "cased",
                db_handles: tuple[str, ...] = DEFAULT_DB_HANDLES) -> "RuleSet":
        return cls(_default_rules(db_handles), casing_mode, RULESET_VERSION, tuple(db_handles))

    @property
    def id(self) -> str:
        return f"default-v{self.version}-{self.casing_mode}"

    def apply(self, text: str) -> str:
        for rule in self.rules:
            text = rule.apply(text)
        if self.casing_mode == "lowercased":
            text = text.lower()
        return text

    def dumps(self) -> str:
        head = [f"# ruleset version {self.version}", f"# casing {self.casing_mode}"]
        return "\n".join(head + [r.to_line() for r in self.rules]) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RuleSet":
        version, casing = RULESET_VERSION, "cased"
        rules = []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                words = line[1:].split()
                if words[:2] == ["ruleset", "version"]:
                    version = words[2]
                elif words[:1] == ["casing"]:
                    casing = words[1]
                continue
            rules.append(Rule.from_line(line))
        return cls(tuple(rules), casing, version)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RuleSet":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def _emoticon_rules() -> list[Rule]:
    no_letter = f"(?![{_LETTER}])"
    no_word_before = f"(?<![{_LETTER}0-9])"
    sad = r":-?\("
    happy = r":-\)\)|:-?\)|;-\)|:D" + no_letter
    laughing = r":-D" + no_letter + "|" + no_word_before + "XD" + no_letter
    # eye, optional nose, run of one mouth character; letter mouths must not
    # start a word ("Achtung:Die" is not an emoticon).
    generic = (r"[:;][-'^o]?(?:([()\[\]|*])\1*|[DPpO]" + no_letter + ")")
    return [
        Rule("laughingsmiley", "re", laughing, "laughingsmiley"),
        Rule("happysmiley", "re", happy, "happysmiley"),
        Rule("sadsmiley", "re", sad, "sadsmiley"),
        Rule("emote", "re", generic, "emote"),
    ]


def _default_rules(db_handles: tuple[str, ...]) -> tuple[Rule, ...]:
    handles = "|".join(re.escape(h) for h in db_handles)
    rules = [
        Rule("url", "re", r"(?:https?://|www\.)\S+|" + _NW_BEFORE + r"t\.co/\S+", "URL"),
        *_emoticon_rules(),
        Rule("dbusername", "re", f"(?i:{_NW_BEFORE}@(?:{handles}){_NW_AFTER})", "dbusername"),
        Rule("twitterusername", "re", _NW_BEFORE + r"@\w+", "twitterusername"),
        Rule("hashtag", "re", r"#(?=\w)"),
        Rule("sbahn", "re", f"(?i:{_NW_BEFORE}S(?:-|\\s+)?Bahn{_NW_AFTER})", "sbahn"),
        Rule("money", "re",
             f"(?:€|EUR)\\s?{_NUM}(?:,-)?{_NW_AFTER}|{_NW_BEFORE}{_NUM}(?:,-)?\\s?(?:€|EUR{_NW_AFTER}|Euro{_NW_AFTER})",
             "money"),
        Rule("dates", "re",
             f"{_NW_BEFORE}(?:{_DAY}\\.{_MONTH}\\.(?:\\d{{4}}|\\d{{2}})?|{_DAY}/{_MONTH}(?:/(?:\\d{{4}}|\\d{{2}}))?"
             f"|\\d{{4}}-\\d{{2}}-\\d{{2}}|{_HOUR}:[0-5]\\d(?::[0-5]\\d)?)(?!\\d)",
             "dates"),
        Rule("number", "re", _NW_BEFORE + _NUM + _NW_AFTER, "number"),
        Rule("strongquestion", "re", r"\?{2,}", "strongquestion"),
        Rule("strongexclamation", "re", r"!{2,}", "strongexclamation"),
        Rule("annoyeddots", "re", r"\.{2,}|…", "annoyeddots"),
        Rule("punctuation", "cat", "P"),
        Rule("symbols", "cat", "S,Co,Cs,Cf,Me,EMOJI"),
        Rule("whitespace", "op", "collapse_whitespace"),
    ]
    return tuple(rules)


_DEFAULT = {}


def default_ruleset(casing_mode: str = "cased") -> RuleSet:
    if casing_mode not in _DEFAULT:
        _DEFAULT[casing_mode] = RuleSet.default(casing_mode)
    return _DEFAULT[casing_mode]


def normalize(text: str, ruleset: RuleSet | None = None) -> str:
    """Apply ``ruleset`` (default: cased default rules) to one text."""
    return (ruleset or default_ruleset()).apply(text)


def normalize_dataset(dataset: LabeledDataset, ruleset: RuleSet | None = None) -> LabeledDataset:
    rs = ruleset or default_ruleset()
    return relabel(dataset, [rs.apply(d.text) for d in dataset.documents])

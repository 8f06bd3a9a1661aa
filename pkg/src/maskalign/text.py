"""Split a referring expression into class words and modifier words.

The class words name the category (matched against a vocabulary of class
surface forms), the modifiers carry everything else: color, size, position,
state. Downstream, the class words drive per-mask labeling while the
modifiers steer the scene-level saliency, so the split must be a clean
partition of the retained tokens.

Tagging is deliberately shallow: a closed-class stopword list, a small
domain lexicon, and suffix heuristics. The tagger is injectable, so a real
NLP pipeline can be dropped in without touching the decoupling logic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

CONTENT_TAGS = ("NOUN", "PROPN", "ADJ", "VERB", "NUM")

_WORD_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)?|\d+")

# Closed-class words dropped outright: articles, prepositions, conjunctions,
# pronouns, copulas, auxiliaries, common adverbs of degree.
_STOPWORDS = {
    "a", "an", "the", "this", "that", "these", "those", "it", "its", "their",
    "of", "on", "in", "at", "to", "from", "with", "without", "by", "near",
    "beside", "between", "behind", "under", "over", "above", "below", "next",
    "across", "along", "around", "inside", "outside", "within", "among",
    "and", "or", "but", "nor", "as", "than", "is", "are", "was", "were",
    "be", "being", "been", "there", "here", "which", "who", "whose", "what",
    "very", "most", "more", "quite", "rather", "some", "any", "all", "both",
    "each", "every", "no", "not", "up", "down", "off", "out", "into", "onto",
    "toward", "towards", "has", "have", "had", "can", "will", "closest",
}

_NUMBER_WORDS = {
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve",
}

# Domain lexicon. Positional words like "left" are treated as nouns because
# in this corpus they almost always appear as "on the left", "in the middle".
_LEXICON = {
    "left": "NOUN", "right": "NOUN", "top": "NOUN", "bottom": "NOUN",
    "middle": "NOUN", "center": "NOUN", "corner": "NOUN", "side": "NOUN",
    "edge": "NOUN", "front": "NOUN", "back": "NOUN", "end": "NOUN",
    "row": "NOUN", "group": "NOUN", "cluster": "NOUN", "pair": "NOUN",
    "red": "ADJ", "blue": "ADJ", "green": "ADJ", "white": "ADJ",
    "black": "ADJ", "gray": "ADJ", "grey": "ADJ", "yellow": "ADJ",
    "orange": "ADJ", "brown": "ADJ", "purple": "ADJ", "pink": "ADJ",
    "dark": "ADJ", "light": "ADJ", "bright": "ADJ", "pale": "ADJ",
    "small": "ADJ", "large": "ADJ", "big": "ADJ", "little": "ADJ",
    "tiny": "ADJ", "huge": "ADJ", "long": "ADJ", "short": "ADJ",
    "wide": "ADJ", "narrow": "ADJ", "thin": "ADJ", "thick": "ADJ",
    "tall": "ADJ", "low": "ADJ", "high": "ADJ", "empty": "ADJ",
    "full": "ADJ", "round": "ADJ", "oval": "ADJ", "square": "ADJ",
    "rectangular": "ADJ", "circular": "ADJ", "curved": "ADJ", "new": "ADJ",
    "old": "ADJ", "upper": "ADJ", "lower": "ADJ", "leftmost": "ADJ",
    "rightmost": "ADJ", "topmost": "ADJ", "largest": "ADJ", "smallest": "ADJ",
    "isolated": "ADJ", "single": "ADJ", "lone": "ADJ",
    "parked": "VERB", "moving": "VERB", "docked": "VERB", "moored": "VERB",
    "flying": "VERB", "taxiing": "VERB", "anchored": "VERB", "sailing": "VERB",
    "located": "VERB", "situated": "VERB", "surrounded": "VERB",
    "building": "NOUN", "parking": "NOUN", "crossing": "NOUN",
    "roof": "NOUN", "tree": "NOUN", "water": "NOUN", "grass": "NOUN",
    "road": "NOUN", "street": "NOUN", "runway": "NOUN", "river": "NOUN",
    "shore": "NOUN", "coast": "NOUN", "island": "NOUN", "city": "NOUN",
}


@dataclass
class TaggedToken:
    """One retained token: surface text (lowercased), tag, and its position
    in the original token stream."""

    text: str
    tag: str
    index: int


class RuleBasedTagger:
    """Stopword + lexicon + suffix tagging, no external models.

    Unknown words default to NOUN: nouns dominate the open classes in this
    domain and the fallback keeps the class-word extraction total.
    """

    def __init__(self, extra_lexicon: dict[str, str] | None = None):
        self.lexicon = dict(_LEXICON)
        if extra_lexicon:
            self.lexicon.update({k.lower(): v for k, v in extra_lexicon.items()})

    def tag_word(self, word: str, position: int) -> str:
        low = word.lower()
        if low.isdigit() or low in _NUMBER_WORDS:
            return "NUM"
        if low in _STOPWORDS:
            return "OTHER"
        if low in self.lexicon:
            return self.lexicon[low]
        if position > 0 and word[0].isupper():
            return "PROPN"
        if len(low) >= 5:
            if low.endswith("ly"):
                return "OTHER"
            if low.endswith("ing") or low.endswith("ed"):
                return "VERB"
            if low.endswith("est") or low.endswith("er"):
                return "ADJ"
        return "NOUN"


def tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text)


def parse_expression(text: str, tagger: RuleBasedTagger | None = None) -> list[TaggedToken]:
    """Tokenize and tag, keeping only content tokens (noun, proper noun,
    adjective, verb, numeral). Token text is lowercased; `index` preserves
    the position in the full token stream."""
    tagger = tagger or RuleBasedTagger()
    tokens = []
    for i, word in enumerate(tokenize(text)):
        tag = tagger.tag_word(word, i)
        if tag in CONTENT_TAGS:
            tokens.append(TaggedToken(text=word.lower(), tag=tag, index=i))
    return tokens


def lemma(word: str) -> str:
    """Lowercase and strip simple plural suffixes."""
    w = word.lower()
    if len(w) > 4 and w.endswith(("ches", "shes", "sses", "xes", "zes")):
        return w[:-2]
    if len(w) > 4 and w.endswith("ies"):
        return w[:-3] + "y"
    if len(w) > 3 and w.endswith("s") and not w.endswith(("ss", "us", "is")):
        return w[:-1]
    return w


class ClassVocabulary:
    """Class surface forms (names plus synonyms) indexed for phrase lookup.

    Phrases are stored as lemma tuples; lookup is case- and
    plural-insensitive.
    """

    def __init__(self, phrases: dict[str, list[str]]):
        if not phrases:
            raise ValueError("class vocabulary must not be empty")
        self.class_ids = list(phrases.keys())
        self._by_lemmas: dict[tuple[str, ...], str] = {}
        self.max_phrase_len = 1
        for class_id, forms in phrases.items():
            for phrase in forms:
                key = tuple(lemma(w) for w in tokenize(phrase))
                if not key:
                    raise ValueError(f"class {class_id!r} has an empty surface form")
                self._by_lemmas.setdefault(key, class_id)
                self.max_phrase_len = max(self.max_phrase_len, len(key))

    def match(self, lemmas: tuple[str, ...]) -> str | None:
        return self._by_lemmas.get(lemmas)


@dataclass
class DecoupledExpression:
    """The original expression split into class tokens and modifier tokens.

    cls_tokens and mod_tokens partition ref_tokens (disjoint by index, union
    complete). matched_class_id is set when the class tokens came from a
    vocabulary match rather than the noun-phrase fallback.
    """

    raw: str
    ref_tokens: list[TaggedToken]
    cls_tokens: list[TaggedToken]
    mod_tokens: list[TaggedToken] = field(default_factory=list)
    matched_class_id: str | None = None


def _first_noun_phrase_head(tokens: list[TaggedToken]) -> TaggedToken | None:
    """Rightmost noun of the first run of adjacent ADJ/NOUN/PROPN tokens."""
    run: list[TaggedToken] = []
    for tok in tokens:
        if tok.tag in ("ADJ", "NOUN", "PROPN"):
            if run and tok.index != run[-1].index + 1:
                nouns = [t for t in run if t.tag in ("NOUN", "PROPN")]
                if nouns:
                    return nouns[-1]
                run = []
            run.append(tok)
        elif run:
            nouns = [t for t in run if t.tag in ("NOUN", "PROPN")]
            if nouns:
                return nouns[-1]
            run = []
    nouns = [t for t in run if t.tag in ("NOUN", "PROPN")]
    return nouns[-1] if nouns else None


def _fallback_class_token(tokens: list[TaggedToken]) -> TaggedToken:
    head = _first_noun_phrase_head(tokens)
    if head is not None:
        return head
    nouns = [t for t in tokens if t.tag in ("NOUN", "PROPN")]
    if nouns:
        return nouns[-1]
    non_num = [t for t in tokens if t.tag != "NUM"]
    if non_num:
        return non_num[-1]
    return tokens[-1]


def decouple(raw: str, tokens: list[TaggedToken],
             vocab: ClassVocabulary) -> DecoupledExpression:
    """Partition retained tokens into class tokens and modifier tokens.

    The longest contiguous token window whose lemmas match a vocabulary
    phrase becomes the class tokens (earliest window on ties). Without a
    match, the rightmost noun of the first noun phrase is promoted to the
    single class token; numerals are never promoted.
    """
    if not tokens:
        raise ValueError(f"expression {raw!r} has no content tokens")
    lemmas = [lemma(t.text) for t in tokens]
    n = len(tokens)
    best: tuple[int, int, str] | None = None  # (start, length, class_id)
    for length in range(min(n, vocab.max_phrase_len), 0, -1):
        for start in range(0, n - length + 1):
            class_id = vocab.match(tuple(lemmas[start:start + length]))
            if class_id is not None:
                best = (start, length, class_id)
                break
        if best is not None:
            break

    if best is not None:
        start, length, class_id = best
        cls = tokens[start:start + length]
        cls_idx = {t.index for t in cls}
        mod = [t for t in tokens if t.index not in cls_idx]
        return DecoupledExpression(raw=raw, ref_tokens=list(tokens), cls_tokens=cls,
                                   mod_tokens=mod, matched_class_id=class_id)

    head = _fallback_class_token(tokens)
    mod = [t for t in tokens if t.index != head.index]
    return DecoupledExpression(raw=raw, ref_tokens=list(tokens), cls_tokens=[head],
                               mod_tokens=mod, matched_class_id=None)


def decouple_expression(text: str, vocab: ClassVocabulary,
                        tagger: RuleBasedTagger | None = None) -> DecoupledExpression:
    """parse_expression + decouple in one call."""
    return decouple(text, parse_expression(text, tagger), vocab)


def derive_target_classes(expr: DecoupledExpression, vocab: ClassVocabulary) -> set[str]:
    """Class ids named by the expression's class tokens.

    Uses the vocabulary match recorded at decoupling time when present,
    otherwise retries the class tokens (and each single token) against the
    vocabulary. An expression naming no known class is an error.
    """
    if expr.matched_class_id is not None:
        return {expr.matched_class_id}
    lemmas = tuple(lemma(t.text) for t in expr.cls_tokens)
    hit = vocab.match(lemmas)
    if hit is not None:
        return {hit}
    hits = {vocab.match((l,)) for l in lemmas}
    hits.discard(None)
    if not hits:
        raise ValueError(
            f"expression {expr.raw!r}: class tokens {[t.text for t in expr.cls_tokens]} "
            f"match no known class"
        )
    return hits

"""Opt-out-of-sale link detection for HTML documents.

Two-tier scheme: a link whose text carries the legally mandated
"Do Not Sell My Personal Information" label is *valid*; a link matching
one of the looser alternate phrases ("california privacy", "consumer
privacy", "do not sell") is *ambiguous*; everything else carries no
opt-out signal. The scanner walks anchors and button-like elements in
a document and aggregates per-candidate verdicts into a page verdict.

Everything here is pure and re-entrant: no I/O, no shared mutable state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import IntEnum
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable


class LinkClassification(IntEnum):
    """Three-way verdict for a link or a whole page.

    Ordered so that ``max()`` over candidate verdicts yields the page
    verdict: VALID > AMBIGUOUS > NONE.
    """

    NONE = 0
    AMBIGUOUS = 1
    VALID = 2

    def to_wire(self) -> str:
        return self.name.lower()

    @classmethod
    def from_wire(cls, value: str) -> "LinkClassification":
        try:
            return cls[value.upper()]
        except KeyError:
            raise ValueError(f"unknown link classification {value!r}") from None


MANDATED_LABEL = "do not sell my personal information"

DEFAULT_AMBIGUOUS_PHRASES = (
    "california privacy",
    "consumer privacy",
    "do not sell",
)


def normalize_text(raw: str) -> str:
    """Case-fold and collapse all whitespace runs to single spaces.

    Total function: any Unicode string in, normalized string out.
    Non-breaking spaces, tabs, and newlines all count as whitespace.
    """
    return " ".join(raw.casefold().split())


@dataclass(frozen=True)
class PhraseSet:
    """Phrases that mark a link as valid or ambiguous.

    Phrases are normalized on construction. The valid set must be
    non-empty and no phrase may normalize to the empty string.
    """

    valid_phrases: tuple[str, ...]
    ambiguous_phrases: tuple[str, ...]

    def __post_init__(self) -> None:
        valid = tuple(normalize_text(p) for p in self.valid_phrases)
        ambiguous = tuple(normalize_text(p) for p in self.ambiguous_phrases)
        if not valid:
            raise ValueError("valid_phrases must not be empty")
        if any(p == "" for p in valid + ambiguous):
            raise ValueError("phrases must not be empty strings")
        object.__setattr__(self, "valid_phrases", valid)
        object.__setattr__(self, "ambiguous_phrases", ambiguous)

    @classmethod
    def default(cls) -> "PhraseSet":
        return cls(
            valid_phrases=(MANDATED_LABEL,),
            ambiguous_phrases=DEFAULT_AMBIGUOUS_PHRASES,
        )


class PhraseConfigError(ValueError):
    """Raised when a phrase config file is malformed."""


def load_phrase_file(path: str | Path) -> PhraseSet:
    """Load a PhraseSet from a plain-text config file.

    One phrase per line; lines starting with '#' are comments; sections
    are introduced by the headers ``[valid]`` and ``[ambiguous]``.
    """
    sections: dict[str, list[str]] = {"valid": [], "ambiguous": []}
    current: list[str] | None = None
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped[1:-1].strip().lower()
            if name not in sections:
                raise PhraseConfigError(f"line {lineno}: unknown section [{name}]")
            current = sections[name]
            continue
        if current is None:
            raise PhraseConfigError(f"line {lineno}: phrase before any section header")
        current.append(stripped)
    try:
        return PhraseSet(
            valid_phrases=tuple(sections["valid"]),
            ambiguous_phrases=tuple(sections["ambiguous"]),
        )
    except ValueError as exc:
        raise PhraseConfigError(str(exc)) from None


def classify_phrase(text: str, phrases: PhraseSet | None = None) -> LinkClassification:
    """Classify already-normalized text by substring containment.

    Valid takes precedence: "do not sell" is a substring of the mandated
    label, so a label match must not be downgraded by the ambiguous set.
    """
    if phrases is None:
        phrases = PhraseSet.default()
    if any(p in text for p in phrases.valid_phrases):
        return LinkClassification.VALID
    if any(p in text for p in phrases.ambiguous_phrases):
        return LinkClassification.AMBIGUOUS
    return LinkClassification.NONE


@dataclass(frozen=True)
class LinkCandidate:
    """One clickable element considered by the scanner."""

    element_kind: str  # "anchor" | "button"
    text: str  # normalized
    target: str  # href value, or "" for non-anchor elements
    dom_path: str  # stable locator, unique within the scanned document
    classification: LinkClassification


@dataclass(frozen=True)
class ScanResult:
    """All candidates found in a document plus the page-level verdict."""

    candidates: tuple[LinkCandidate, ...]
    page_verdict: LinkClassification
    best_candidate: LinkCandidate | None


# Elements that never take content and therefore never enter the open stack.
_VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)


class _Frame:
    """One open element while parsing: path bookkeeping plus, for
    candidate elements, the text pieces collected so far."""

    __slots__ = ("tag", "path", "child_counts", "candidate")

    def __init__(self, tag: str, path: str) -> None:
        self.tag = tag
        self.path = path
        self.child_counts: dict[str, int] = {}
        self.candidate: _PendingCandidate | None = None


class _PendingCandidate:
    __slots__ = ("kind", "target", "dom_path", "pieces", "attr_text", "index")

    def __init__(self, kind: str, target: str, dom_path: str, attr_text: str, index: int) -> None:
        self.kind = kind
        self.target = target
        self.dom_path = dom_path
        self.pieces: list[str] = []
        self.attr_text = attr_text
        self.index = index


class _Scanner(HTMLParser):
    """Tolerant single-pass scanner built on the stdlib parser.

    Known simplification: an unclosed anchor keeps collecting text until
    an enclosing element closes or the document ends, so fixture pages
    with missing end tags should keep the stray text unambiguous.
    """

    def __init__(self, phrases: PhraseSet) -> None:
        super().__init__(convert_charrefs=True)
        self.phrases = phrases
        self.stack: list[_Frame] = []
        self.root_counts: dict[str, int] = {}
        self.candidates: list[LinkCandidate | None] = []
        self.seen_paths: set[str] = set()

    # -- path bookkeeping ---------------------------------------------------

    def _child_path(self, tag: str) -> str:
        counts = self.stack[-1].child_counts if self.stack else self.root_counts
        counts[tag] = counts.get(tag, 0) + 1
        segment = f"{tag}:nth-of-type({counts[tag]})"
        path = f"{self.stack[-1].path}>{segment}" if self.stack else segment
        # Implicit closes can fold logical siblings together; suffix any
        # collision so dom_path stays unique within the document.
        if path in self.seen_paths:
            n = 2
            while f"{path}@{n}" in self.seen_paths:
                n += 1
            path = f"{path}@{n}"
        self.seen_paths.add(path)
        return path

    # -- candidate lifecycle --------------------------------------------------

    def _open_candidate(self, frame: _Frame, kind: str, target: str, attrmap: dict[str, str]) -> None:
        attr_text = " ".join(
            v for v in (attrmap.get("aria-label"), attrmap.get("title")) if v
        )
        pending = _PendingCandidate(kind, target, frame.path, attr_text, len(self.candidates))
        frame.candidate = pending
        self.candidates.append(None)  # placeholder keeps document order

    def _finalize(self, pending: _PendingCandidate) -> None:
        # textContent semantics: data chunks concatenate verbatim; the
        # attribute-sourced text is a separate word.
        text = normalize_text("".join(pending.pieces) + " " + pending.attr_text)
        self.candidates[pending.index] = LinkCandidate(
            element_kind=pending.kind,
            text=text,
            target=pending.target,
            dom_path=pending.dom_path,
            classification=classify_phrase(text, self.phrases),
        )

    def _pop_frame(self) -> None:
        frame = self.stack.pop()
        if frame.candidate is not None:
            self._finalize(frame.candidate)

    # -- parser callbacks -----------------------------------------------------

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        attrmap = {k: (v or "") for k, v in attrs}
        # Browsers never nest anchors: an <a> opening inside an open <a>
        # implicitly closes it first.
        if tag == "a":
            for i in range(len(self.stack) - 1, -1, -1):
                if self.stack[i].tag == "a":
                    while len(self.stack) > i:
                        self._pop_frame()
                    break

        if tag in _VOID_ELEMENTS:
            # Line breaks read as whitespace in rendered text.
            if tag in ("br", "hr"):
                self.handle_data(" ")
            # No frame, but a void element with a button role (e.g. an
            # icon input) can still be a candidate via its attributes.
            if attrmap.get("role", "").strip().lower() == "button":
                path = self._child_path(tag)
                frame = _Frame(tag, path)
                self._open_candidate(frame, "button", "", attrmap)
                self._finalize(frame.candidate)  # type: ignore[arg-type]
            return

        path = self._child_path(tag)
        frame = _Frame(tag, path)

        role = attrmap.get("role", "").strip().lower()
        if tag == "a" and "href" in attrmap:
            self._open_candidate(frame, "anchor", attrmap.get("href", ""), attrmap)
        elif tag == "button" or role == "button":
            self._open_candidate(frame, "button", "", attrmap)

        self.stack.append(frame)

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        attrmap = {k: (v or "") for k, v in attrs}
        if tag in ("br", "hr"):
            self.handle_data(" ")
        role = attrmap.get("role", "").strip().lower()
        is_candidate = (tag == "a" and "href" in attrmap) or tag == "button" or role == "button"
        if not is_candidate:
            return
        path = self._child_path(tag)
        frame = _Frame(tag, path)
        kind = "anchor" if tag == "a" and "href" in attrmap else "button"
        target = attrmap.get("href", "") if kind == "anchor" else ""
        self._open_candidate(frame, kind, target, attrmap)
        self._finalize(frame.candidate)  # type: ignore[arg-type]

    def handle_endtag(self, tag: str) -> None:
        for i in range(len(self.stack) - 1, -1, -1):
            if self.stack[i].tag == tag:
                while len(self.stack) > i:
                    self._pop_frame()
                return
        # Stray end tag with no matching open element: ignore.

    def handle_data(self, data: str) -> None:
        if not data:
            return
        # Raw text inside script/style is not link text.
        if any(f.tag in ("script", "style") for f in self.stack):
            return
        for frame in self.stack:
            if frame.candidate is not None:
                frame.candidate.pieces.append(data)

    def finish(self) -> list[LinkCandidate]:
        self.close()
        while self.stack:
            self._pop_frame()
        return [c for c in self.candidates if c is not None]


def scan_document(html: str, phrases: PhraseSet | None = None) -> ScanResult:
    """Scan an HTML document or fragment for opt-out-of-sale links.

    Enumerates every anchor with an href and every button-like element
    (button tags and elements with a button role). Candidate text is the
    normalized concatenation of text content, aria-label, and title.
    Malformed markup is parsed best-effort and never raises.
    """
    if phrases is None:
        phrases = PhraseSet.default()
    scanner = _Scanner(phrases)
    scanner.feed(html)
    candidates = tuple(scanner.finish())

    page_verdict = max(
        (c.classification for c in candidates), default=LinkClassification.NONE
    )
    best: LinkCandidate | None = None
    if page_verdict is not LinkClassification.NONE:
        best = next(c for c in candidates if c.classification == page_verdict)
    return ScanResult(candidates=candidates, page_verdict=page_verdict, best_candidate=best)


class EncodingError(ValueError):
    """Raised when document bytes cannot be decoded."""


def decode_document(data: bytes, encoding: str | None = None) -> str:
    """Decode raw document bytes, raising EncodingError when undecodable."""
    try:
        return data.decode(encoding or "utf-8")
    except (UnicodeDecodeError, LookupError) as exc:
        raise EncodingError(f"cannot decode document: {exc}") from None

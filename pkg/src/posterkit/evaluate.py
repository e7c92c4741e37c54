"""Word-level text-consistency metrics.

Compares the words an OCR pass detects on a poster against the words
the user specified, as multisets: duplicated words on a poster are real
and count. Normalization (casefold, NFC, edge punctuation stripped) is
forgiving by default and configurable.

Corpus scores are macro averages of per-poster precision/recall.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field

from . import backends
from .document import PosterDocument
from .errors import InputError
from .raster import RasterImage

WordMultiset = Counter


@dataclass(frozen=True)
class NormalizeOptions:
    casefold: bool = True
    strip_punctuation: bool = True


def normalize_words(text: str, options: NormalizeOptions = NormalizeOptions()) -> WordMultiset:
    """Whitespace-split words, NFC-normalized, casefolded, stripped of
    leading/trailing punctuation; empty tokens dropped."""
    text = unicodedata.normalize("NFC", text)
    if options.casefold:
        text = unicodedata.normalize("NFC", text.casefold())
    words: Counter = Counter()
    for token in text.split():
        if options.strip_punctuation:
            start, end = 0, len(token)
            while start < end and unicodedata.category(token[start]).startswith("P"):
                start += 1
            while end > start and unicodedata.category(token[end - 1]).startswith("P"):
                end -= 1
            token = token[start:end]
        if token:
            words[token] += 1
    return words


@dataclass(frozen=True)
class PrfReport:
    precision: float
    recall: float
    matched: int
    detected_total: int
    specified_total: int
    degenerate: bool = False  # nothing detected while text was specified
    per_poster: tuple["PrfReport", ...] = field(default=())


def word_prf(detected: WordMultiset, specified: WordMultiset) -> PrfReport:
    """Multiset precision/recall: matched = sum over words of
    min(detected count, specified count).

    Empty detected gives precision 1.0 by vacuity (flagged degenerate when
    something was specified); empty specified gives recall 1.0.
    """
    matched = sum(min(count, specified[word]) for word, count in detected.items())
    detected_total = sum(detected.values())
    specified_total = sum(specified.values())
    precision = matched / detected_total if detected_total else 1.0
    recall = matched / specified_total if specified_total else 1.0
    return PrfReport(
        precision=precision,
        recall=recall,
        matched=matched,
        detected_total=detected_total,
        specified_total=specified_total,
        degenerate=(detected_total == 0 and specified_total > 0),
    )


def specified_words(doc: PosterDocument, options: NormalizeOptions = NormalizeOptions()) -> WordMultiset:
    """The words a document asks for: all element contents combined."""
    combined: Counter = Counter()
    for element in doc.elements:
        combined.update(normalize_words(element.content, options))
    return combined


def evaluate_poster(image: RasterImage, doc: PosterDocument,
                    ocr_endpoint=None,
                    options: NormalizeOptions = NormalizeOptions()) -> PrfReport:
    detected_words = backends.ocr_detect(image, endpoint=ocr_endpoint, sidecar=doc)
    detected: Counter = Counter()
    for entry in detected_words:
        detected.update(normalize_words(entry.word, options))
    return word_prf(detected, specified_words(doc, options))


def evaluate_corpus(posters, ocr_endpoint=None,
                    options: NormalizeOptions = NormalizeOptions()) -> PrfReport:
    """Macro-averaged report over (image, document) pairs.

    Backend failures propagate; no partial corpus report is produced.
    """
    posters = list(posters)
    if not posters:
        raise InputError("corpus must contain at least one poster")
    reports = [evaluate_poster(image, doc, ocr_endpoint=ocr_endpoint, options=options)
               for image, doc in posters]
    n = len(reports)
    return PrfReport(
        precision=sum(r.precision for r in reports) / n,
        recall=sum(r.recall for r in reports) / n,
        matched=sum(r.matched for r in reports),
        detected_total=sum(r.detected_total for r in reports),
        specified_total=sum(r.specified_total for r in reports),
        degenerate=any(r.degenerate for r in reports),
        per_poster=tuple(reports),
    )


def format_report(report: PrfReport) -> str:
    """Human-readable table for CLI output."""
    lines = [
        f"{'poster':>8}  {'precision':>9}  {'recall':>9}  {'matched':>7}  {'detected':>8}  {'specified':>9}",
    ]
    for i, r in enumerate(report.per_poster):
        flag = "  (degenerate)" if r.degenerate else ""
        lines.append(f"{i:>8}  {r.precision:>9.4f}  {r.recall:>9.4f}  "
                     f"{r.matched:>7}  {r.detected_total:>8}  {r.specified_total:>9}{flag}")
    lines.append(f"{'macro':>8}  {report.precision:>9.4f}  {report.recall:>9.4f}  "
                 f"{report.matched:>7}  {report.detected_total:>8}  {report.specified_total:>9}")
    return "\n".join(lines)


def report_to_tree(report: PrfReport) -> dict:
    tree = {
        "precision": report.precision,
        "recall": report.recall,
        "matched": report.matched,
        "detected_total": report.detected_total,
        "specified_total": report.specified_total,
        "degenerate": report.degenerate,
    }
    if report.per_poster:
        tree["per_poster"] = [report_to_tree(r) for r in report.per_poster]
    return tree

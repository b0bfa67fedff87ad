"""Corpus ingestion, splitting and pre-training dedup.

File formats handled here:
  * SemEval-2016 style ABSA XML (restaurant reviews)
  * polarity TSV (``label<TAB>text`` with optional ``stars`` column)
  * plain-text pre-training corpora, one review per line
"""
from __future__ import annotations

import csv
import json
import unicodedata
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, TextIO

from .errors import CorpusParseError, ValidationError
from .types import (
    AbsaSentence,
    AspectCategory,
    OpinionTriplet,
    Polarity,
    PolarityDocument,
    SplitKind,
    SplitSpec,
    star_to_polarity,
)

__all__ = [
    "star_to_polarity",
    "load_absa_corpus",
    "save_absa_corpus",
    "load_polarity_corpus",
    "make_split",
    "Deduplicator",
    "normalize_for_dedup",
    "collect_categories",
    "sentences_to_jsonl",
    "sentences_from_jsonl",
]

NULL_TARGET = "NULL"


def _parse_opinion(el: ET.Element, allowed: Optional[set[AspectCategory]]) -> OpinionTriplet:
    category = AspectCategory.parse(el.get("category", ""))
    if allowed is not None and category not in allowed:
        raise ValidationError(f"unknown aspect category: {category.canonical}")
    polarity = Polarity.parse(el.get("polarity", ""))
    target = el.get("target")
    term = None if target is None or target == NULL_TARGET else target
    return OpinionTriplet(category=category, term=term, polarity=polarity)


def load_absa_corpus(
    path: str | Path,
    allowed_categories: Optional[set[AspectCategory]] = None,
) -> list[AbsaSentence]:
    """Read a SemEval-2016 style XML file into sentences, preserving file order.

    ``allowed_categories`` of None accepts whatever categories the file contains.
    """
    try:
        tree = ET.parse(str(path))
    except ET.ParseError as exc:
        raise CorpusParseError(f"{path}: malformed XML at line {exc.position[0]}: {exc}") from exc

    sentences: list[AbsaSentence] = []
    seen_ids: set[str] = set()
    for review in tree.getroot().iter("Review"):
        rid = review.get("rid", "")
        for sent in review.iter("sentence"):
            sid = sent.get("id", "")
            if sid in seen_ids:
                raise ValidationError(f"duplicate sentence id: {sid}")
            seen_ids.add(sid)
            text_el = sent.find("text")
            text = text_el.text or "" if text_el is not None else ""
            triplets = [
                _parse_opinion(op, allowed_categories)
                for op in sent.iter("Opinion")
            ]
            sentences.append(AbsaSentence(rid, sid, text, triplets))
    return sentences


def save_absa_corpus(sentences: Sequence[AbsaSentence], path: str | Path) -> None:
    """Write sentences back out in the same XML schema (round-trip partner of load)."""
    root = ET.Element("Reviews")
    by_review: dict[str, ET.Element] = {}
    for s in sentences:
        holder = by_review.get(s.review_id)
        if holder is None:
            review = ET.SubElement(root, "Review", rid=s.review_id)
            holder = ET.SubElement(review, "sentences")
            by_review[s.review_id] = holder
        sent_el = ET.SubElement(holder, "sentence", id=s.sentence_id)
        ET.SubElement(sent_el, "text").text = s.text
        ops = ET.SubElement(sent_el, "Opinions")
        for t in s.triplets:
            ET.SubElement(
                ops,
                "Opinion",
                target=t.term if t.term is not None else NULL_TARGET,
                category=t.category.canonical,
                polarity=t.polarity.value,
            )
    ET.ElementTree(root).write(str(path), encoding="utf-8", xml_declaration=True)


def collect_categories(sentences: Iterable[AbsaSentence]) -> set[AspectCategory]:
    return {t.category for s in sentences for t in s.triplets}


def load_polarity_corpus(path: str | Path) -> list[PolarityDocument]:
    """Read the polarity TSV: header ``label<TAB>text`` plus optional ``stars``."""
    docs: list[PolarityDocument] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusParseError(f"{path}: empty file, expected a header row") from None
        if header[:2] != ["label", "text"]:
            raise CorpusParseError(f"{path}: bad header {header!r}, expected label<TAB>text")
        has_stars = len(header) > 2 and header[2] == "stars"
        expected_cols = 3 if has_stars else 2
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != expected_cols:
                raise CorpusParseError(
                    f"{path}: row {row_no}: expected {expected_cols} columns, got {len(row)}"
                )
            label = Polarity.parse(row[0])
            stars = int(row[2]) if has_stars else None
            docs.append(PolarityDocument(doc_id=str(row_no - 1), text=row[1], label=label, stars=stars))
    return docs


def make_split(corpus: Sequence, spec: SplitSpec) -> list:
    """Deterministic split: few_shot(n) is the first n records in file order."""
    if spec.kind is SplitKind.FULL:
        return list(corpus)
    if spec.kind is SplitKind.ZERO_SHOT:
        return []
    assert spec.n is not None
    if spec.n > len(corpus):
        raise ValidationError(f"few_shot n={spec.n} exceeds corpus size {len(corpus)}")
    return list(corpus[: spec.n])


def normalize_for_dedup(text: str) -> str:
    """NFC, collapse whitespace runs to single spaces, trim."""
    return " ".join(unicodedata.normalize("NFC", text).split())


class Deduplicator:
    """Streams raw reviews through, dropping any whose normalized form matches
    a review from the annotated set. ``removed`` counts drops so far."""

    def __init__(self, annotated: Iterable[str]):
        self._seen = {normalize_for_dedup(t) for t in annotated}
        self.removed = 0

    def filter(self, raw: Iterable[str]) -> Iterator[str]:
        for line in raw:
            if normalize_for_dedup(line) in self._seen:
                self.removed += 1
            else:
                yield line


def _triplet_to_json(t: OpinionTriplet) -> dict:
    return {"category": t.category.canonical, "term": t.term, "polarity": t.polarity.value}


def _triplet_from_json(d: dict) -> OpinionTriplet:
    return OpinionTriplet(
        category=AspectCategory.parse(d["category"]),
        term=d["term"],
        polarity=Polarity(d["polarity"]),
    )


def sentences_to_jsonl(sentences: Iterable[AbsaSentence], fh: TextIO) -> None:
    for s in sentences:
        record = {
            "review_id": s.review_id,
            "sentence_id": s.sentence_id,
            "text": s.text,
            "triplets": [_triplet_to_json(t) for t in s.triplets],
        }
        fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def sentences_from_jsonl(fh: TextIO) -> list[AbsaSentence]:
    out = []
    for line in fh:
        if not line.strip():
            continue
        d = json.loads(line)
        out.append(
            AbsaSentence(
                review_id=d["review_id"],
                sentence_id=d["sentence_id"],
                text=d["text"],
                triplets=[_triplet_from_json(t) for t in d["triplets"]],
            )
        )
    return out

"""Recover opinion triplets from raw generated text and project them per task.

All seq2seq parsers are total: malformed fragments land in diagnostics,
never in exceptions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import ValidationError
from .prompting import TemplateConfig, Verbalizer
from .types import AspectCategory, OpinionTriplet, Polarity

CLAUSE_RE = re.compile(r"^(?P<cat>.+?) is (?P<pol>.+?), given the expression: (?P<term>.+)$")
SENTINEL_RE = re.compile(r"<extra_id_\d+>")


class Task(str, Enum):
    ACD = "acd"
    ATE = "ate"
    ACTE = "acte"
    TASD = "tasd"
    APD = "apd"
    SC = "sc"


@dataclass
class ParsedOutput:
    triplets: list[OpinionTriplet] = field(default_factory=list)
    dropped_clauses: int = 0
    diagnostics: list[tuple[str, str]] = field(default_factory=list)


@dataclass(frozen=True)
class TaskPrediction:
    example_id: str
    task: Task
    items: frozenset


def _norm_display(s: str) -> str:
    return " ".join(s.lower().split())


def category_index(
    categories: Iterable[AspectCategory], cfg: TemplateConfig
) -> dict[str, AspectCategory]:
    """Map normalized display strings back to categories for parsing."""
    return {_norm_display(cfg.display_for(c)): c for c in categories}


def _parse_clause(
    clause: str, index: dict[str, AspectCategory], v: Verbalizer
) -> OpinionTriplet:
    m = CLAUSE_RE.match(clause.strip())
    if m is None:
        raise ValidationError("clause does not match the label grammar")
    category = index.get(_norm_display(m.group("cat")))
    if category is None:
        raise ValidationError(f"unknown category {m.group('cat')!r}")
    try:
        polarity = v.polarity(m.group("pol"))
    except ValidationError:
        raise ValidationError(f"unknown polarity word {m.group('pol')!r}") from None
    term = m.group("term").strip()
    return OpinionTriplet(category=category, term=None if term == "NULL" else term, polarity=polarity)


def parse_traditional_output(
    raw: str,
    cfg: TemplateConfig,
    v: Verbalizer,
    categories: Iterable[AspectCategory],
) -> ParsedOutput:
    index = category_index(categories, cfg)
    out = ParsedOutput()
    for clause in raw.split(";"):
        if not clause.strip():
            continue
        try:
            out.triplets.append(_parse_clause(clause, index, v))
        except ValidationError as exc:
            out.dropped_clauses += 1
            out.diagnostics.append((clause.strip(), str(exc)))
    return out


def parse_sentinel_output(
    raw: str,
    v: Verbalizer,
    cfg: TemplateConfig,
    categories: Iterable[AspectCategory],
) -> ParsedOutput:
    index = category_index(categories, cfg)
    fields = [seg.strip() for seg in SENTINEL_RE.split(raw)[1:]]
    while fields and not fields[-1]:
        fields.pop()
    out = ParsedOutput()
    for start in range(0, len(fields), 3):
        group = fields[start : start + 3]
        if len(group) < 3:
            out.dropped_clauses += 1
            out.diagnostics.append((" / ".join(group), "incomplete field group"))
            break
        cat_text, pol_text, term_text = group
        category = index.get(_norm_display(cat_text))
        if category is None:
            out.dropped_clauses += 1
            out.diagnostics.append((" / ".join(group), f"unknown category {cat_text!r}"))
            continue
        try:
            polarity = v.polarity(pol_text)
        except ValidationError:
            out.dropped_clauses += 1
            out.diagnostics.append((" / ".join(group), f"unknown polarity word {pol_text!r}"))
            continue
        if not term_text:
            out.dropped_clauses += 1
            out.diagnostics.append((" / ".join(group), "empty term field"))
            continue
        term = None if term_text == "NULL" else term_text
        out.triplets.append(OpinionTriplet(category=category, term=term, polarity=polarity))
    return out


def parse_mask_output(
    raw: str,
    v: Verbalizer,
    cfg: TemplateConfig,
    categories: Iterable[AspectCategory],
) -> ParsedOutput:
    idx = raw.rfind(cfg.separator)
    if idx >= 0:
        template = raw[idx + len(cfg.separator):]
        out = parse_traditional_output(template, cfg, v, categories)
    else:
        out = parse_traditional_output(raw, cfg, v, categories)
        out.diagnostics.append((raw, "separator missing"))
    return out


def _norm_term(term: Optional[str]) -> Optional[str]:
    return term.strip().lower() if term is not None else None


def project_task(parsed: ParsedOutput, task: Task, example_id: str = "") -> TaskPrediction:
    """Project recovered triplets onto one task's item set (set semantics
    collapses repeats; ATE drops NULL terms)."""
    if task is Task.ACD:
        items = {t.category.canonical for t in parsed.triplets}
    elif task is Task.ATE:
        items = {_norm_term(t.term) for t in parsed.triplets if t.term is not None}
    elif task is Task.ACTE:
        items = {(t.category.canonical, _norm_term(t.term)) for t in parsed.triplets}
    elif task is Task.TASD:
        items = {(t.category.canonical, _norm_term(t.term), t.polarity.value) for t in parsed.triplets}
    else:
        raise ValidationError(f"task {task.value} is not a tuple-projection task")
    return TaskPrediction(example_id=example_id, task=task, items=frozenset(items))


def parse_mlm_output(top_token: str, v: Verbalizer) -> Polarity:
    try:
        return v.polarity(top_token)
    except ValidationError:
        raise ValidationError(
            f"unconstrained backend output: {top_token!r} is not a verbalizer word"
        ) from None

"""Render model inputs and expected targets for every fine-tuning regime.

Four regimes are supported:
  * traditional seq2seq  - input is the review, target is the linearized label
  * sentinel prompt      - T5-style, slots are numbered ``<extra_id_N>`` tokens
  * mask prompt          - BART-style, slots are ``<mask>``, target reconstructs
    the whole input
  * mlm classification   - single ``[MASK]`` answer slot filled by a verbalizer word
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import ValidationError
from .types import AbsaSentence, AspectCategory, OpinionTriplet, Polarity

NULL_DISPLAY = "NULL"
MASK_SLOT = "<mask>"
MLM_SLOT = "[MASK]"


class Regime(str, Enum):
    TRADITIONAL = "traditional"
    SENTINEL = "sentinel"
    MASK = "mask"
    MLM = "mlm"


@dataclass(frozen=True)
class Verbalizer:
    """Bijective polarity <-> word table."""

    words: dict[Polarity, str]

    def __post_init__(self):
        if set(self.words) != set(Polarity) or len(set(self.words.values())) != 3:
            raise ValidationError("verbalizer must map the three polarities to three distinct words")

    def word(self, p: Polarity) -> str:
        return self.words[p]

    def polarity(self, word: str) -> Polarity:
        normalized = word.strip().lower()
        for p, w in self.words.items():
            if w.lower() == normalized:
                return p
        raise ValidationError(f"word {word!r} is not in the verbalizer")

    @property
    def candidates(self) -> list[str]:
        # fixed polarity order so tie-breaking downstream is reproducible
        return [self.words[Polarity.POSITIVE], self.words[Polarity.NEGATIVE], self.words[Polarity.NEUTRAL]]

    @classmethod
    def english(cls) -> "Verbalizer":
        return cls({Polarity.POSITIVE: "great", Polarity.NEUTRAL: "ok", Polarity.NEGATIVE: "bad"})

    @classmethod
    def czech(cls) -> "Verbalizer":
        return cls({Polarity.POSITIVE: "dobrý", Polarity.NEUTRAL: "ok", Polarity.NEGATIVE: "špatný"})


def default_category_display(category: AspectCategory) -> str:
    """FOOD#QUALITY -> 'Food quality'."""
    return f"{category.entity.capitalize()} {category.attribute.lower()}"


@dataclass
class TemplateConfig:
    regime: Regime = Regime.TRADITIONAL
    language: str = "en"
    category_display: dict[AspectCategory, str] = field(default_factory=dict)
    separator: str = " | "
    triplet_joiner: str = "; "
    max_input_units: int = 400

    def display_for(self, category: AspectCategory) -> str:
        if category in self.category_display:
            return self.category_display[category]
        if self.language == "cs":
            raise ValidationError(
                f"no Czech display name configured for {category.canonical}"
            )
        return default_category_display(category)


@dataclass(frozen=True)
class PromptRendering:
    example_id: str
    model_input: str
    expected_target: str
    regime: Regime
    triplet_count: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.example_id,
                "input": self.model_input,
                "target": self.expected_target,
                "regime": self.regime.value,
                "n_triplets": self.triplet_count,
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "PromptRendering":
        d = json.loads(line)
        return cls(d["id"], d["input"], d["target"], Regime(d["regime"]), d["n_triplets"])


def sentinel(i: int) -> str:
    return f"<extra_id_{i}>"


def render_triplet_label(t: OpinionTriplet, cfg: TemplateConfig, v: Verbalizer) -> str:
    term = t.term if t.term is not None else NULL_DISPLAY
    return f"{cfg.display_for(t.category)} is {v.word(t.polarity)}, given the expression: {term}"


def _joined_labels(example: AbsaSentence, cfg: TemplateConfig, v: Verbalizer) -> str:
    return cfg.triplet_joiner.join(render_triplet_label(t, cfg, v) for t in example.triplets)


def render_traditional(example: AbsaSentence, cfg: TemplateConfig, v: Verbalizer) -> PromptRendering:
    return PromptRendering(
        example_id=example.sentence_id,
        model_input=example.text,
        expected_target=_joined_labels(example, cfg, v),
        regime=Regime.TRADITIONAL,
        triplet_count=len(example.triplets),
    )


def render_sentinel_prompt(example: AbsaSentence, cfg: TemplateConfig, v: Verbalizer) -> PromptRendering:
    templates = [
        f"{sentinel(3 * k)} is {sentinel(3 * k + 1)}, given the expression: {sentinel(3 * k + 2)}"
        for k in range(len(example.triplets))
    ]
    model_input = example.text + cfg.separator + cfg.triplet_joiner.join(templates)

    pieces = []
    for k, t in enumerate(example.triplets):
        term = t.term if t.term is not None else NULL_DISPLAY
        pieces += [
            f"{sentinel(3 * k)} {cfg.display_for(t.category)}",
            f"{sentinel(3 * k + 1)} {v.word(t.polarity)}",
            f"{sentinel(3 * k + 2)} {term}",
        ]
    pieces.append(sentinel(3 * len(example.triplets)))
    return PromptRendering(
        example_id=example.sentence_id,
        model_input=model_input,
        expected_target=" ".join(pieces),
        regime=Regime.SENTINEL,
        triplet_count=len(example.triplets),
    )


def render_mask_prompt(example: AbsaSentence, cfg: TemplateConfig, v: Verbalizer) -> PromptRendering:
    templates = [
        f"{MASK_SLOT} is {MASK_SLOT}, given the expression: {MASK_SLOT}"
        for _ in example.triplets
    ]
    model_input = example.text + cfg.separator + cfg.triplet_joiner.join(templates)
    expected_target = example.text + cfg.separator + _joined_labels(example, cfg, v)
    return PromptRendering(
        example_id=example.sentence_id,
        model_input=model_input,
        expected_target=expected_target,
        regime=Regime.MASK,
        triplet_count=len(example.triplets),
    )


def render_for_regime(example: AbsaSentence, cfg: TemplateConfig, v: Verbalizer) -> PromptRendering:
    if cfg.regime is Regime.TRADITIONAL:
        return render_traditional(example, cfg, v)
    if cfg.regime is Regime.SENTINEL:
        return render_sentinel_prompt(example, cfg, v)
    if cfg.regime is Regime.MASK:
        return render_mask_prompt(example, cfg, v)
    raise ValidationError(f"regime {cfg.regime.value} is not a seq2seq rendering regime")


def trim_and_append(text: str, prompt_suffix: str, max_units: int) -> str:
    """Append the prompt, shrinking the review (whitespace-word units, from the
    end) until the whole input fits. The prompt itself is never touched."""
    suffix_units = len(prompt_suffix.split())
    if suffix_units > max_units:
        raise ValidationError(
            f"prompt alone is {suffix_units} units, exceeds cap {max_units}"
        )
    text_words = text.split()
    if len(text_words) + suffix_units <= max_units:
        return text + prompt_suffix
    kept = text_words[: max_units - suffix_units]
    return " ".join(kept) + prompt_suffix


def render_mlm_prompt(
    text: str,
    task: str,
    tuple_: Optional[tuple[AspectCategory, Optional[str]]],
    cfg: TemplateConfig,
    v: Verbalizer,
    polarity: Optional[Polarity] = None,
    example_id: str = "",
) -> PromptRendering:
    """Single-answer-slot classification prompt; ``task`` is 'sc_csfd' or 'absa_apd'."""
    if task == "sc_csfd":
        suffix = f" Je to {MLM_SLOT} film."
    elif task == "absa_apd":
        if tuple_ is None:
            raise ValidationError("absa_apd prompt needs the (category, term) tuple")
        category, term = tuple_
        term_display = term if term is not None else NULL_DISPLAY
        suffix = f" {cfg.display_for(category)} je {MLM_SLOT}, dáno výrazem: {term_display}."
    else:
        raise ValidationError(f"unknown mlm task: {task!r}")

    model_input = trim_and_append(text, suffix, cfg.max_input_units)
    expected = v.word(polarity) if polarity is not None else ""
    return PromptRendering(
        example_id=example_id,
        model_input=model_input,
        expected_target=expected,
        regime=Regime.MLM,
        triplet_count=1 if task == "absa_apd" else 0,
    )


def render_apd_traditional_input(
    text: str,
    tuple_: tuple[AspectCategory, Optional[str]],
    cfg: Optional[TemplateConfig] = None,
) -> str:
    """Prefix the input with the known tuple for classification-head fine-tuning."""
    cfg = cfg or TemplateConfig()
    category, term = tuple_
    term_display = term if term is not None else NULL_DISPLAY
    return f"{cfg.display_for(category)} | {term_display} | {text}"

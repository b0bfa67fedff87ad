"""Core domain records shared by every module."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import ValidationError


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"

    @classmethod
    def parse(cls, value: str) -> "Polarity":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValidationError(f"unknown polarity label: {value!r}") from None


@dataclass(frozen=True, order=True)
class AspectCategory:
    """An entity-attribute pair such as FOOD#QUALITY, stored upper-case."""

    entity: str
    attribute: str

    def __post_init__(self):
        object.__setattr__(self, "entity", self.entity.strip().upper())
        object.__setattr__(self, "attribute", self.attribute.strip().upper())
        if not self.entity or not self.attribute:
            raise ValidationError("aspect category needs both entity and attribute")

    @classmethod
    def parse(cls, value: str) -> "AspectCategory":
        parts = value.split("#")
        if len(parts) != 2:
            raise ValidationError(f"aspect category must look like ENTITY#ATTRIBUTE, got {value!r}")
        return cls(parts[0], parts[1])

    @property
    def canonical(self) -> str:
        return f"{self.entity}#{self.attribute}"

    def __str__(self) -> str:
        return self.canonical


@dataclass(frozen=True, order=True)
class OpinionTriplet:
    """One (category, term, polarity) opinion; term None encodes the NULL target."""

    category: AspectCategory
    term: Optional[str]
    polarity: Polarity

    def __post_init__(self):
        if self.term is not None:
            trimmed = self.term.strip()
            if not trimmed:
                raise ValidationError("aspect term must be non-empty; use None for NULL")
            object.__setattr__(self, "term", trimmed)


@dataclass
class AbsaSentence:
    review_id: str
    sentence_id: str
    text: str
    triplets: list[OpinionTriplet] = field(default_factory=list)


@dataclass
class PolarityDocument:
    doc_id: str
    text: str
    label: Polarity
    stars: Optional[int] = None

    def __post_init__(self):
        if self.stars is not None:
            expected = star_to_polarity(self.stars)
            if expected != self.label:
                raise ValidationError(
                    f"document {self.doc_id}: label {self.label.value} does not match "
                    f"{self.stars} stars (expected {expected.value})"
                )


def star_to_polarity(stars: int) -> Polarity:
    """Distant-supervision rating rule: 0-1 negative, 2-3 neutral, 4-5 positive."""
    if not 0 <= stars <= 5:
        raise ValidationError(f"star rating out of range 0..5: {stars}")
    if stars <= 1:
        return Polarity.NEGATIVE
    if stars <= 3:
        return Polarity.NEUTRAL
    return Polarity.POSITIVE


class SplitKind(str, Enum):
    FULL = "full"
    FEW_SHOT = "few_shot"
    ZERO_SHOT = "zero_shot"


@dataclass(frozen=True)
class SplitSpec:
    kind: SplitKind
    n: Optional[int] = None

    def __post_init__(self):
        if self.kind is SplitKind.FEW_SHOT:
            if self.n is None or self.n <= 0:
                raise ValidationError("few_shot split needs a positive n")
        elif self.n is not None:
            raise ValidationError(f"{self.kind.value} split takes no n")

    @classmethod
    def full(cls) -> "SplitSpec":
        return cls(SplitKind.FULL)

    @classmethod
    def few_shot(cls, n: int) -> "SplitSpec":
        return cls(SplitKind.FEW_SHOT, n)

    @classmethod
    def zero_shot(cls) -> "SplitSpec":
        return cls(SplitKind.ZERO_SHOT)

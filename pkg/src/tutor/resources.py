"""Learning-resource catalog: CSV ingestion and recommendation.

Resources are ranked lexically against detected improvement areas: area
confidence first, then distance from the learner's difficulty band, then
token overlap between the resource description and the area's example
phrases, with title as the final tie-break.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable
from urllib.parse import urlparse

from .analysis import ImprovementArea, canonical_area
from .errors import EmptyCatalog, MissingColumn, OutOfRange, RowValidation
from .wordbank import tokenize

REQUIRED_COLUMNS = ("area", "resource_type", "title", "description", "url", "difficulty_level")
DIFFICULTY_BANDS = ("beginner", "intermediate", "advanced")
_BAND_INDEX = {band: i for i, band in enumerate(DIFFICULTY_BANDS)}


@dataclass(frozen=True)
class Resource:
    area: str
    resource_type: str
    title: str
    description: str
    url: str
    difficulty_level: str


@dataclass
class ResourceCatalog:
    resources: list[Resource]

    @property
    def size(self) -> int:
        return len(self.resources)

    def per_area_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for resource in self.resources:
            counts[resource.area] = counts.get(resource.area, 0) + 1
        return dict(sorted(counts.items()))


def _valid_url(url: str) -> bool:
    parsed = urlparse(url)
    return bool(parsed.scheme) and bool(parsed.netloc)


def load_resources(source: Iterable[str] | io.TextIOBase | str) -> ResourceCatalog:
    """Load and validate the six-column resources CSV (header required)."""
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise MissingColumn(list(REQUIRED_COLUMNS))
    fields = [f.strip().lower() for f in reader.fieldnames]
    missing = [c for c in REQUIRED_COLUMNS if c not in fields]
    if missing:
        raise MissingColumn(missing)

    resources = []
    failures = []
    for row_number, row in enumerate(reader, start=2):
        cleaned = {(k or "").strip().lower(): (v or "").strip() for k, v in row.items()}
        area = canonical_area(cleaned.get("area", ""))
        if area is None:
            failures.append((row_number, f"unknown area {cleaned.get('area')!r}"))
            continue
        url = cleaned.get("url", "")
        if not _valid_url(url):
            failures.append((row_number, f"invalid url {url!r}"))
            continue
        title = cleaned.get("title", "")
        if not title:
            failures.append((row_number, "empty title"))
            continue
        difficulty = cleaned.get("difficulty_level", "").lower()
        if difficulty not in _BAND_INDEX:
            failures.append((row_number, f"unknown difficulty_level {difficulty!r}"))
            continue
        resources.append(
            Resource(
                area=area,
                resource_type=cleaned.get("resource_type", ""),
                title=title,
                description=cleaned.get("description", ""),
                url=url,
                difficulty_level=difficulty,
            )
        )
    if failures:
        raise RowValidation(failures)
    return ResourceCatalog(resources=resources)


def band_for_level(level: float) -> str:
    """Map the 1-14 rubric onto the three difficulty bands."""
    if not 1.0 <= level <= 14.0:
        raise OutOfRange(f"level {level} outside [1, 14]")
    if level <= 5.0:
        return "beginner"
    if level <= 10.0:
        return "intermediate"
    return "advanced"


def _overlap(description: str, examples: tuple) -> int:
    desc_tokens = {t.lower() for t in tokenize(description)}
    example_tokens = set()
    for phrase in examples:
        example_tokens.update(t.lower() for t in tokenize(phrase))
    return len(desc_tokens & example_tokens)


def recommend(
    catalog: ResourceCatalog,
    areas: list[ImprovementArea],
    level: float,
    k: int,
) -> list[Resource]:
    """Top-k resources for the detected areas, deterministically ranked."""
    if catalog.size == 0:
        raise EmptyCatalog("cannot recommend from an empty catalog")
    by_area = {a.area: a for a in areas}
    learner_band = _BAND_INDEX[band_for_level(level)]

    candidates = [r for r in catalog.resources if r.area in by_area]

    def rank_key(resource: Resource):
        area = by_area[resource.area]
        band_distance = abs(_BAND_INDEX[resource.difficulty_level] - learner_band)
        return (
            -area.confidence,
            band_distance,
            -_overlap(resource.description, area.examples),
            resource.title,
        )

    candidates.sort(key=rank_key)
    return candidates[:k]

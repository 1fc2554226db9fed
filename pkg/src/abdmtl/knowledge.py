"""Declarative knowledge about the true target, grounding extraction, and
rule checking.

For the 1-D segmentation task the grounding vocabulary is {positive runs,
gaps strictly between runs, positive fraction} and the rule vocabulary is
{MinRunLength, MinGap, PositiveFractionBounds}. An inconsistency is a scored
rule violation; severities are element counts for the structural rules and
fraction units for the bound rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InvalidDiversity, LengthMismatch
from .samples import Dataset, InstanceSample, NoisyLabelSample, validate_diversity

# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinRunLength:
    rule_id: int
    l_min: int

    kind = "min_run_length"

    def __post_init__(self):
        if self.l_min < 1:
            raise ValueError(f"l_min must be >= 1, got {self.l_min}")


@dataclass(frozen=True)
class MinGap:
    rule_id: int
    g_min: int

    kind = "min_gap"

    def __post_init__(self):
        if self.g_min < 1:
            raise ValueError(f"g_min must be >= 1, got {self.g_min}")


@dataclass(frozen=True)
class PositiveFractionBounds:
    rule_id: int
    p_min: float
    p_max: float

    kind = "positive_fraction_bounds"

    def __post_init__(self):
        if not 0.0 <= self.p_min <= self.p_max <= 1.0:
            raise ValueError(
                f"need 0 <= p_min <= p_max <= 1, got ({self.p_min}, {self.p_max})"
            )


KnowledgeRule = Union[MinRunLength, MinGap, PositiveFractionBounds]


@dataclass(frozen=True)
class KnowledgeBase:
    """Ordered rule list; at most one rule of each kind, unique rule ids."""

    rules: tuple[KnowledgeRule, ...] = ()

    def __post_init__(self):
        ids = [r.rule_id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise ValueError(f"rule ids must be unique, got {ids}")
        kinds = [r.kind for r in self.rules]
        if len(set(kinds)) != len(kinds):
            raise ValueError(f"at most one rule of each kind, got {kinds}")

    def _find(self, cls):
        for r in self.rules:
            if isinstance(r, cls):
                return r
        return None

    @property
    def run_rule(self) -> MinRunLength | None:
        return self._find(MinRunLength)

    @property
    def gap_rule(self) -> MinGap | None:
        return self._find(MinGap)

    @property
    def fraction_rule(self) -> PositiveFractionBounds | None:
        return self._find(PositiveFractionBounds)


def kb_to_list(kb: KnowledgeBase) -> list[dict]:
    out = []
    for r in kb.rules:
        entry: dict = {"rule_id": r.rule_id, "kind": r.kind}
        if isinstance(r, MinRunLength):
            entry["l_min"] = r.l_min
        elif isinstance(r, MinGap):
            entry["g_min"] = r.g_min
        else:
            entry["p_min"] = r.p_min
            entry["p_max"] = r.p_max
        out.append(entry)
    return out


def kb_from_list(items: Sequence[dict]) -> KnowledgeBase:
    """Parse the KB JSON array; rule_id defaults to the list position."""
    rules: list[KnowledgeRule] = []
    for pos, item in enumerate(items):
        kind = item.get("kind")
        rule_id = int(item.get("rule_id", pos))
        if kind == "min_run_length":
            rules.append(MinRunLength(rule_id, int(item["l_min"])))
        elif kind == "min_gap":
            rules.append(MinGap(rule_id, int(item["g_min"])))
        elif kind == "positive_fraction_bounds":
            rules.append(
                PositiveFractionBounds(rule_id, float(item["p_min"]), float(item["p_max"]))
            )
        else:
            raise ValueError(f"unknown rule kind {kind!r} at position {pos}")
    return KnowledgeBase(tuple(rules))


# ---------------------------------------------------------------------------
# groundings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PositiveRun:
    start: int
    length: int


@dataclass(frozen=True)
class Gap:
    start: int
    length: int


@dataclass(frozen=True)
class GroundingSet:
    """Logical facts extracted from one label sample.

    Runs are maximal, sorted, non-overlapping; gaps are exactly the maximal
    zero stretches strictly between consecutive runs. The positive fraction
    is derived from the integer run-length total, so value * n is exact.
    """

    source: int
    n: int
    runs: tuple[PositiveRun, ...]
    gaps: tuple[Gap, ...]
    positive_total: int

    @property
    def fraction(self) -> float:
        return self.positive_total / self.n


def rasterize_runs(runs: Sequence[PositiveRun], n: int) -> np.ndarray:
    """Paint runs into a 0/1 mask of length n."""
    mask = np.zeros(n, dtype=int)
    for run in runs:
        mask[run.start : run.start + run.length] = 1
    return mask


def grounding_set_from_runs(
    runs: Sequence[PositiveRun], n: int, source: int = 0
) -> GroundingSet:
    """Build a grounding set (gaps, fraction) from sorted non-touching runs."""
    runs = tuple(sorted(runs, key=lambda r: r.start))
    gaps = []
    for prev, nxt in zip(runs, runs[1:]):
        gap_start = prev.start + prev.length
        gap_len = nxt.start - gap_start
        if gap_len > 0:
            gaps.append(Gap(gap_start, gap_len))
    total = sum(r.length for r in runs)
    return GroundingSet(source=source, n=n, runs=runs, gaps=tuple(gaps), positive_total=total)


def extract_groundings(
    instances: InstanceSample | None,
    labels,
    source: int = 0,
) -> GroundingSet:
    """Left-to-right run-length scan of one label sample.

    ``instances`` may be None when there is no paired instance sample to
    cross-check lengths against.
    """
    if isinstance(labels, NoisyLabelSample):
        seq = labels.labels
    else:
        seq = tuple(int(v) for v in labels)
    if instances is not None and instances.n != len(seq):
        raise LengthMismatch(
            f"label sample has length {len(seq)}, instance sample has {instances.n}"
        )
    runs = []
    start = None
    for i, v in enumerate(seq):
        if v == 1 and start is None:
            start = i
        elif v == 0 and start is not None:
            runs.append(PositiveRun(start, i - start))
            start = None
    if start is not None:
        runs.append(PositiveRun(start, len(seq) - start))
    return grounding_set_from_runs(runs, n=len(seq), source=source)


def extract_groundings_all(ds: Dataset) -> tuple[GroundingSet, ...]:
    """Per-branch extraction, in branch order. The dataset must pass the
    diversity gate first."""
    report = validate_diversity(ds)
    if not report.ok:
        raise InvalidDiversity(report)
    return tuple(
        extract_groundings(ds.instances, sample, source=i)
        for i, sample in enumerate(ds.labels.samples)
    )


# ---------------------------------------------------------------------------
# inconsistencies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShortRun:
    rule_id: int
    start: int
    length: int
    deficit: int

    @property
    def severity(self) -> float:
        return float(self.deficit)


@dataclass(frozen=True)
class NarrowGap:
    rule_id: int
    start: int
    length: int
    deficit: int

    @property
    def severity(self) -> float:
        return float(self.deficit)


@dataclass(frozen=True)
class ExcessFraction:
    rule_id: int
    value: float
    excess: float

    @property
    def severity(self) -> float:
        return self.excess


@dataclass(frozen=True)
class DeficitFraction:
    rule_id: int
    value: float
    deficit: float

    @property
    def severity(self) -> float:
        return self.deficit


Inconsistency = Union[ShortRun, NarrowGap, ExcessFraction, DeficitFraction]


def total_severity(ics: Sequence[Inconsistency]) -> float:
    return sum(ic.severity for ic in ics)


def detect_inconsistencies(
    gs: GroundingSet, kb: KnowledgeBase
) -> tuple[Inconsistency, ...]:
    """Score every rule violation in a grounding set.

    Deterministic and order-stable: output sorted by (rule_id, start
    position), fraction findings keyed at position 0.
    """
    found: list[tuple[tuple[int, int], Inconsistency]] = []
    for rule in kb.rules:
        if isinstance(rule, MinRunLength):
            for run in gs.runs:
                if run.length < rule.l_min:
                    ic = ShortRun(rule.rule_id, run.start, run.length, rule.l_min - run.length)
                    found.append(((rule.rule_id, run.start), ic))
        elif isinstance(rule, MinGap):
            for gap in gs.gaps:
                if gap.length < rule.g_min:
                    ic = NarrowGap(rule.rule_id, gap.start, gap.length, rule.g_min - gap.length)
                    found.append(((rule.rule_id, gap.start), ic))
        else:
            value = gs.fraction
            if value > rule.p_max:
                found.append(
                    ((rule.rule_id, 0), ExcessFraction(rule.rule_id, value, value - rule.p_max))
                )
            elif value < rule.p_min:
                found.append(
                    ((rule.rule_id, 0), DeficitFraction(rule.rule_id, value, rule.p_min - value))
                )
    found.sort(key=lambda pair: pair[0])
    return tuple(ic for _, ic in found)


def detect_inconsistencies_all(
    gsets: Sequence[GroundingSet], kb: KnowledgeBase
) -> tuple[tuple[Inconsistency, ...], ...]:
    return tuple(detect_inconsistencies(gs, kb) for gs in gsets)


# ---------------------------------------------------------------------------
# JSON audit helpers
# ---------------------------------------------------------------------------


def grounding_set_to_dict(gs: GroundingSet) -> dict:
    return {
        "source": gs.source,
        "n": gs.n,
        "runs": [[r.start, r.length] for r in gs.runs],
        "gaps": [[g.start, g.length] for g in gs.gaps],
        "positive_fraction": gs.fraction,
    }


def inconsistency_to_dict(ic: Inconsistency) -> dict:
    out: dict = {"rule_id": ic.rule_id, "severity": ic.severity}
    if isinstance(ic, ShortRun):
        out.update(kind="short_run", start=ic.start, length=ic.length, deficit=ic.deficit)
    elif isinstance(ic, NarrowGap):
        out.update(kind="narrow_gap", start=ic.start, length=ic.length, deficit=ic.deficit)
    elif isinstance(ic, ExcessFraction):
        out.update(kind="excess_fraction", value=ic.value, excess=ic.excess)
    else:
        out.update(kind="deficit_fraction", value=ic.value, deficit=ic.deficit)
    return out

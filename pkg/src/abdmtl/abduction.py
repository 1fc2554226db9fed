"""Revision of extracted groundings until they satisfy the knowledge base,
and construction of multiple per-instance training targets from the result.

The revision is a fixed, fully deterministic three-stage procedure:

1. prune   — delete every run shorter than the minimum run length;
2. bridge  — merge consecutive runs whose separating gap is narrower than
             the minimum gap, spanning both runs and the gap;
3. fraction — while the positive fraction exceeds its upper bound, erode one
             element at a time (runs visited in ascending start order, each
             run alternating left end then right end, never shrinking below
             the minimum run length); if every run sits at the floor and the
             excess persists, delete whole runs, smallest first, ties by
             start. While the fraction is below its lower bound and runs
             remain, dilate one element at a time in the same visiting
             order, merging with a neighbor run whenever a gap would drop
             below the minimum gap; a step that would push the fraction
             above its upper bound is skipped.

The bound is re-checked after every single-element change, so the final
fraction lands within one element of the bound it approached. Rule families
whose policy flag is off are left untouched and surface in ``residuals``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import PreconditionViolation, SpecOutOfRange, WidthTooLarge
from .knowledge import (
    GroundingSet,
    Inconsistency,
    KnowledgeBase,
    PositiveRun,
    detect_inconsistencies,
    grounding_set_from_runs,
    inconsistency_to_dict,
    rasterize_runs,
)


@dataclass(frozen=True)
class AbductionPolicy:
    """Which revision stages run. Stage order is fixed: prune, bridge, fraction."""

    prune_short_runs: bool = True
    bridge_narrow_gaps: bool = True
    enforce_fraction_bounds: bool = True


@dataclass(frozen=True)
class RevisedGroundingSet:
    """One branch's runs after revision, plus whatever violations remain.

    ``flat_start``/``flat_stop`` locate this branch's runs inside the
    concatenated all-branch revision list.
    """

    source: int
    n: int
    runs: tuple[PositiveRun, ...]
    residuals: tuple[Inconsistency, ...]
    flat_start: int = 0
    flat_stop: int = 0


# internal mutable run record: [start, length, next_side] with side 0=left, 1=right


def _bridge(runs: list, g_min: int) -> list:
    if not runs:
        return runs
    out = [runs[0]]
    for cur in runs[1:]:
        prev = out[-1]
        gap = cur[0] - (prev[0] + prev[1])
        if gap < g_min:
            prev[1] = (cur[0] + cur[1]) - prev[0]
        else:
            out.append(cur)
    return out


def _erode_to_max(runs: list, n: int, p_max: float, l_eff: int) -> list:
    total = sum(r[1] for r in runs)
    while runs and total / n > p_max:
        stepped = False
        for r in runs:
            if total / n <= p_max:
                break
            if r[1] > l_eff:
                if r[2] == 0:
                    r[0] += 1
                r[1] -= 1
                r[2] ^= 1
                total -= 1
                stepped = True
        if total / n <= p_max:
            break
        if not stepped:
            # every run is at the floor: drop whole runs, smallest first
            while runs and total / n > p_max:
                victim = min(runs, key=lambda r: (r[1], r[0]))
                runs.remove(victim)
                total -= victim[1]
            break
    return runs


def _try_dilation_step(runs, i, side, total, n, p_max, g_eff):
    """One dilation attempt on runs[i]. Returns (added, index_of_run) or None.

    A step is blocked when there is no room on that side or when the grown
    total would violate the upper fraction bound.
    """
    r = runs[i]
    if side == 0:
        if i == 0:
            if r[0] < 1:
                return None
            added, merge = 1, False
        else:
            gap = r[0] - (runs[i - 1][0] + runs[i - 1][1])
            merge = gap - 1 < g_eff
            added = gap if merge else 1
        if (total + added) / n > p_max:
            return None
        if merge:
            prev = runs[i - 1]
            prev[1] = (r[0] + r[1]) - prev[0]
            del runs[i]
            return added, i - 1
        r[0] -= 1
        r[1] += 1
        return added, i
    else:
        end = r[0] + r[1]
        if i == len(runs) - 1:
            if end >= n:
                return None
            added, merge = 1, False
        else:
            gap = runs[i + 1][0] - end
            merge = gap - 1 < g_eff
            added = gap if merge else 1
        if (total + added) / n > p_max:
            return None
        if merge:
            nxt = runs[i + 1]
            r[1] = (nxt[0] + nxt[1]) - r[0]
            del runs[i + 1]
            return added, i
        r[1] += 1
        return added, i


def _dilate_to_min(runs: list, n: int, p_min: float, p_max: float, g_eff: int) -> list:
    if not runs:
        return runs
    total = sum(r[1] for r in runs)
    while total / n < p_min:
        stepped = False
        i = 0
        while i < len(runs):
            if total / n >= p_min:
                break
            preferred = runs[i][2]
            outcome = None
            for side in (preferred, 1 - preferred):
                outcome = _try_dilation_step(runs, i, side, total, n, p_max, g_eff)
                if outcome is not None:
                    added, at = outcome
                    total += added
                    runs[at][2] = 1 - side
                    stepped = True
                    i = at + 1
                    break
            if outcome is None:
                i += 1
        if total / n >= p_min or not stepped:
            break
    return runs


def revise_groundings(
    gs: GroundingSet,
    ics: Sequence[Inconsistency],
    kb: KnowledgeBase,
    policy: AbductionPolicy = AbductionPolicy(),
) -> RevisedGroundingSet:
    """Revise one branch's groundings until the knowledge base is satisfied.

    ``ics`` must be exactly the inconsistencies detected on ``gs`` under
    ``kb``; the pairing is re-checked and a mismatch is a precondition
    violation, not a data condition.
    """
    expected = detect_inconsistencies(gs, kb)
    if tuple(ics) != expected:
        raise PreconditionViolation(
            "inconsistency list does not match re-detection on the grounding set"
        )

    run_rule, gap_rule, frac_rule = kb.run_rule, kb.gap_rule, kb.fraction_rule
    l_eff = run_rule.l_min if run_rule else 1
    g_eff = gap_rule.g_min if gap_rule else 1

    runs = [[r.start, r.length, 0] for r in gs.runs]
    if policy.prune_short_runs and run_rule is not None:
        runs = [r for r in runs if r[1] >= run_rule.l_min]
    if policy.bridge_narrow_gaps and gap_rule is not None:
        runs = _bridge(runs, gap_rule.g_min)
    if policy.enforce_fraction_bounds and frac_rule is not None:
        runs = _erode_to_max(runs, gs.n, frac_rule.p_max, l_eff)
        runs = _dilate_to_min(runs, gs.n, frac_rule.p_min, frac_rule.p_max, g_eff)

    revised_runs = tuple(PositiveRun(start, length) for start, length, _ in runs)
    revised_gs = grounding_set_from_runs(revised_runs, gs.n, gs.source)
    residuals = detect_inconsistencies(revised_gs, kb)
    return RevisedGroundingSet(
        source=gs.source,
        n=gs.n,
        runs=revised_runs,
        residuals=residuals,
        flat_start=0,
        flat_stop=len(revised_runs),
    )


def revise_all(
    gsets: Sequence[GroundingSet],
    ics_lists: Sequence[Sequence[Inconsistency]],
    kb: KnowledgeBase,
    policy: AbductionPolicy = AbductionPolicy(),
) -> tuple[RevisedGroundingSet, ...]:
    """Per-branch revision with flat index ranges over the concatenated runs."""
    out = []
    offset = 0
    for gs, ics in zip(gsets, ics_lists):
        revised = revise_groundings(gs, ics, kb, policy)
        out.append(
            replace(revised, flat_start=offset, flat_stop=offset + len(revised.runs))
        )
        offset += len(revised.runs)
    return tuple(out)


# ---------------------------------------------------------------------------
# target construction
# ---------------------------------------------------------------------------

_COMBINERS = ("per_branch", "intersection", "union", "soft_vote")


@dataclass(frozen=True)
class TargetSpec:
    """How one training target is assembled from revised branches.

    ``boundary_width`` softens positions just outside the combined positive
    stretches to 0.5, encoding boundary uncertainty.
    """

    target_id: int
    branches: tuple[int, ...]
    combiner: str
    boundary_width: int = 1

    def __post_init__(self):
        if self.combiner not in _COMBINERS:
            raise ValueError(f"unknown combiner {self.combiner!r}")
        if not self.branches:
            raise ValueError("a target spec needs at least one branch")
        if self.combiner == "per_branch" and len(self.branches) != 1:
            raise ValueError("per_branch requires exactly one branch")
        if any(b < 0 for b in self.branches):
            raise SpecOutOfRange(f"negative branch index in {self.branches}")
        if self.boundary_width < 0:
            raise ValueError("boundary_width must be non-negative")


def default_target_specs(d: int, boundary_width: int = 1) -> tuple[TargetSpec, ...]:
    """One per-branch target per branch, plus an intersection and a union
    target over all branches (m = d + 2)."""
    everything = tuple(range(d))
    specs = [
        TargetSpec(i, (i,), "per_branch", boundary_width) for i in range(d)
    ]
    specs.append(TargetSpec(d, everything, "intersection", boundary_width))
    specs.append(TargetSpec(d + 1, everything, "union", boundary_width))
    return tuple(specs)


def _soften_boundaries(combined: np.ndarray, width: int) -> np.ndarray:
    if width == 0:
        return combined
    n = len(combined)
    positive = combined > 0.0
    if not positive.any():
        return combined
    sentinel = n + 1
    dist = np.empty(n, dtype=int)
    last = -sentinel
    for i in range(n):
        if positive[i]:
            last = i
            dist[i] = 0
        else:
            dist[i] = i - last
    last = 2 * sentinel
    for i in range(n - 1, -1, -1):
        if positive[i]:
            last = i
        else:
            dist[i] = min(dist[i], last - i)
    out = combined.copy()
    out[(~positive) & (dist <= width)] = 0.5
    return out


def abduce_targets(
    revised: Sequence[RevisedGroundingSet],
    specs: Sequence[TargetSpec],
    n: int,
) -> np.ndarray:
    """Assemble the (m, n) target matrix, one row per spec, entries in [0, 1]."""
    d = len(revised)
    rows = []
    for spec in specs:
        for b in spec.branches:
            if b >= d:
                raise SpecOutOfRange(
                    f"target {spec.target_id} references branch {b}, have {d}"
                )
        if spec.boundary_width >= n:
            raise WidthTooLarge(
                f"boundary_width {spec.boundary_width} must be < n={n}"
            )
        stack = np.stack(
            [rasterize_runs(revised[b].runs, n) for b in spec.branches]
        ).astype(float)
        if spec.combiner == "per_branch":
            combined = stack[0]
        elif spec.combiner == "intersection":
            combined = stack.min(axis=0)
        elif spec.combiner == "union":
            combined = stack.max(axis=0)
        else:
            combined = stack.mean(axis=0)
        rows.append(_soften_boundaries(combined, spec.boundary_width))
    return np.array(rows, dtype=float)


def rearrange_targets(target_matrix) -> np.ndarray:
    """Transpose the target-major (m, n) matrix into instance-major (n, m)."""
    arr = np.asarray(target_matrix, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"target matrix must be 2-D, got shape {arr.shape}")
    return arr.T.copy()


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------


def spec_to_dict(spec: TargetSpec) -> dict:
    return {
        "target_id": spec.target_id,
        "branches": list(spec.branches),
        "combiner": spec.combiner,
        "boundary_width": spec.boundary_width,
    }


def spec_from_dict(obj: dict) -> TargetSpec:
    return TargetSpec(
        target_id=int(obj["target_id"]),
        branches=tuple(int(b) for b in obj["branches"]),
        combiner=str(obj["combiner"]),
        boundary_width=int(obj.get("boundary_width", 1)),
    )


def revised_to_dict(rg: RevisedGroundingSet) -> dict:
    return {
        "source": rg.source,
        "n": rg.n,
        "runs": [[r.start, r.length] for r in rg.runs],
        "residuals": [inconsistency_to_dict(ic) for ic in rg.residuals],
        "flat_range": [rg.flat_start, rg.flat_stop],
    }

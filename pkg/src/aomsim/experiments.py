"""Turnkey pipelines: heralded entanglement swap and three-photon GHZ scheme.

Both experiments start from two biphoton sources, route the inner photon
pairs through AOMs, and condition on number-resolving photon-count patterns
over the AOM output paths.  :func:`post_select` is the shared heralding
primitive: it partitions a state by the per-path photon-count pattern over
the paths a rule mentions, accepts the patterns whose per-clause totals match
exactly, and lumps everything else into one discard bucket.

The swap layout (two AOMs) projects the two untouched outer photons onto a
maximally frequency-entangled pair whenever exactly one photon exits each
AOM; the single-AOM layout heralds a three-photon GHZ-class state on exactly
one detector firing.  Success probabilities, conditional states, entropies,
and GHZ fidelities are reported per herald.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .elements import (
    AomSpec,
    BandwidthCheck,
    Convention,
    FilterSpec,
    SourceSpec,
    apply_element,
    apply_filter,
    check_bandwidth,
    make_aom,
    make_source,
)
from .states import (
    FockKet,
    ModeLabel,
    StateVector,
    entanglement_entropy,
    normalize,
    reduced_density,
    ghz_fidelity,
    tensor,
)

__all__ = [
    "HeraldRule",
    "HeraldOutcome",
    "SwapResult",
    "GhzResult",
    "post_select",
    "enumerate_outcomes",
    "restrict_to_paths",
    "run_swap",
    "run_ghz",
    "swap_herald_rule",
    "ghz_herald_rule",
    "GHZ_BRANCH_A",
    "GHZ_BRANCH_B",
]

_m = ModeLabel

# herald branches of the three-photon GHZ state: the two ways the undetected
# photons can be correlated once one AOM output fires
GHZ_BRANCH_A = FockKet({_m("1", 0): 1, _m("3'", 1): 1, _m("4'", 0): 1})
GHZ_BRANCH_B = FockKet({_m("1'", 1): 1, _m("2'", 0): 1, _m("4", 1): 1})

SWAP_PAIR_PATHS = frozenset({"1", "1'", "4", "4'"})
SWAP_OUTPUT_PATHS = frozenset({"T1", "T1'", "T2", "T2'"})


@dataclass(frozen=True)
class HeraldRule:
    """Exact photon-count requirements over disjoint path sets.

    A pattern satisfies the rule iff every clause's photon total over its
    path set equals the required count exactly (number-resolving semantics).
    With ``discard_complement`` (the default) all rejected patterns are
    reported as a single bucket; otherwise each keeps its own outcome.
    """

    clauses: tuple[tuple[frozenset[str], int], ...]
    discard_complement: bool = True

    def __init__(self, clauses, discard_complement: bool = True):
        normed = tuple((frozenset(paths), int(count)) for paths, count in clauses)
        seen: set[str] = set()
        for paths, count in normed:
            if count < 0:
                raise ValueError("herald counts must be non-negative")
            if not paths:
                raise ValueError("herald clauses need at least one path")
            if seen & paths:
                raise ValueError("herald clauses must use pairwise-disjoint path sets")
            seen |= paths
        object.__setattr__(self, "clauses", normed)
        object.__setattr__(self, "discard_complement", bool(discard_complement))

    def paths(self) -> tuple[str, ...]:
        out: set[str] = set()
        for paths, _ in self.clauses:
            out |= paths
        return tuple(sorted(out))

    def satisfied_by(self, counts: dict[str, int]) -> bool:
        return all(
            sum(counts.get(p, 0) for p in paths) == required
            for paths, required in self.clauses
        )


@dataclass
class HeraldOutcome:
    """One heralded branch: its probability and post-herald state."""

    label: str
    probability: float
    conditional_state: StateVector | None
    accepted: bool
    pattern: tuple[tuple[str, int], ...] | None = None
    metrics: dict[str, float] = field(default_factory=dict)


@dataclass
class SwapResult:
    alpha: float
    convention: Convention
    outcomes: list[HeraldOutcome]
    success_probability: float
    combined_state: StateVector | None
    pair_states: dict[str, StateVector]
    metrics: dict[str, float]


@dataclass
class GhzResult:
    alpha: float
    convention: Convention
    outcomes: list[HeraldOutcome]
    success_probability: float
    per_detector: dict[str, float]
    heralded_states: dict[str, StateVector]
    metrics: dict[str, float]
    bandwidth_valid: bool


def _pattern_components(
    s: StateVector, paths: tuple[str, ...]
) -> dict[tuple[int, ...], dict[FockKet, complex]]:
    groups: dict[tuple[int, ...], dict[FockKet, complex]] = {}
    for k, amp in s.sorted_items():
        pattern = tuple(k.count_on_paths({p}) for p in paths)
        groups.setdefault(pattern, {})[k] = amp
    return groups


def _pattern_label(paths: tuple[str, ...], pattern: tuple[int, ...]) -> str:
    return ",".join(f"{p}={c}" for p, c in zip(paths, pattern))


def post_select(s: StateVector, rule: HeraldRule) -> list[HeraldOutcome]:
    """Split a normalized state by photon-count pattern over the rule paths.

    Returns one outcome per satisfying pattern (sorted by pattern) followed
    by the rejected remainder; probabilities over the full list sum to 1.
    """
    paths = rule.paths()
    groups = _pattern_components(s, paths)
    outcomes: list[HeraldOutcome] = []
    rejected: list[tuple[tuple[int, ...], dict[FockKet, complex]]] = []
    for pattern in sorted(groups):
        component = StateVector(dict(groups[pattern]), non_unitary=s.non_unitary)
        if rule.satisfied_by(dict(zip(paths, pattern))):
            prob = component.norm() ** 2
            outcomes.append(
                HeraldOutcome(
                    label=_pattern_label(paths, pattern),
                    probability=prob,
                    conditional_state=normalize(component),
                    accepted=True,
                    pattern=tuple(zip(paths, pattern)),
                )
            )
        else:
            rejected.append((pattern, groups[pattern]))
    if rule.discard_complement:
        merged: dict[FockKet, complex] = {}
        for _, terms in rejected:
            merged.update(terms)
        bucket = StateVector(merged, non_unitary=s.non_unitary)
        prob = bucket.norm() ** 2
        outcomes.append(
            HeraldOutcome(
                label="discard",
                probability=prob,
                conditional_state=normalize(bucket) if prob > 0.0 else None,
                accepted=False,
            )
        )
    else:
        for pattern, terms in rejected:
            component = StateVector(dict(terms), non_unitary=s.non_unitary)
            outcomes.append(
                HeraldOutcome(
                    label=_pattern_label(paths, pattern),
                    probability=component.norm() ** 2,
                    conditional_state=normalize(component),
                    accepted=False,
                    pattern=tuple(zip(paths, pattern)),
                )
            )
    return outcomes


def enumerate_outcomes(s: StateVector, paths: set[str] | frozenset[str]) -> dict[int, float]:
    """Distribution of the total photon count over a path set."""
    dist: dict[int, float] = {}
    for k, amp in s.terms.items():
        c = k.count_on_paths(paths)
        dist[c] = dist.get(c, 0.0) + abs(amp) ** 2
    return dict(sorted(dist.items()))


def restrict_to_paths(s: StateVector, keep: set[str] | frozenset[str]) -> StateVector:
    """Drop modes outside ``keep`` when they form one common factor ket.

    Valid only when every term carries the identical occupation pattern on
    the dropped paths (e.g. a resolved herald); raises ``ValueError``
    otherwise, because the restriction would not be a pure state.
    """
    keep = frozenset(keep)
    kept_terms: dict[FockKet, complex] = {}
    rests: set[FockKet] = set()
    for k, amp in s.terms.items():
        kept, rest = k.split_by_paths(keep)
        rests.add(rest)
        kept_terms[kept] = amp
    if len(rests) > 1:
        raise ValueError("state does not factor across the requested path split")
    return StateVector(kept_terms, prune_epsilon=s.prune_epsilon, non_unitary=s.non_unitary)


def _combined_accepted(outcomes: list[HeraldOutcome]) -> StateVector | None:
    """Coherent sum of the accepted components, renormalized."""
    terms: dict[FockKet, complex] = {}
    flag = False
    for o in outcomes:
        if not o.accepted or o.conditional_state is None:
            continue
        w = math.sqrt(o.probability)
        flag = flag or o.conditional_state.non_unitary
        for k, amp in o.conditional_state.terms.items():
            terms[k] = terms.get(k, 0j) + w * amp
    if not terms:
        return None
    return normalize(StateVector(terms, non_unitary=flag))


def swap_sources(alpha: float) -> tuple[SourceSpec, SourceSpec]:
    s1 = SourceSpec("S1", arms=(_m("1", 0), _m("2", 1)), alt=(_m("1'", 1), _m("2'", 0)), alpha=alpha)
    s2 = SourceSpec("S2", arms=(_m("3", 0), _m("4", 1)), alt=(_m("3'", 1), _m("4'", 0)), alpha=alpha)
    return s1, s2


def swap_herald_rule() -> HeraldRule:
    return HeraldRule(
        clauses=((frozenset({"T1", "T1'"}), 1), (frozenset({"T2", "T2'"}), 1))
    )


def ghz_herald_rule() -> HeraldRule:
    return HeraldRule(clauses=((frozenset({"T", "T'"}), 1),))


def run_swap(alpha: float = math.pi / 4, convention: Convention = Convention.UNITARY) -> SwapResult:
    """Entanglement swap: two sources, two AOMs, one photon per output pair.

    The four resolved heralds (one specific output path per AOM) each carry
    the conditional state of the outer photons and its entanglement entropy
    across the {1, 1'} | {4, 4'} cut.  The combined (pattern-blind) accepted
    state is also reported with metrics probing whether it factorizes into
    outer-pair times AOM-output parts, which holds for the all-positive
    literal convention but not for the unitary one.
    """
    s1, s2 = swap_sources(alpha)
    state = tensor(make_source(s1), make_source(s2))
    aom1 = AomSpec("AOM1", _m("2", 1), _m("3", 0), output_x="T1", output_y="T1'",
                   phase_convention=convention)
    aom2 = AomSpec("AOM2", _m("3'", 1), _m("2'", 0), output_x="T2'", output_y="T2",
                   phase_convention=convention)
    state = apply_element(state, make_aom(aom1))
    state = apply_element(state, make_aom(aom2))
    outcomes = post_select(state, swap_herald_rule())

    success = 0.0
    pair_states: dict[str, StateVector] = {}
    for o in outcomes:
        if not o.accepted:
            continue
        success += o.probability
        # the detector modes factor out of a resolved herald, leaving the
        # pure state of the four outer-photon paths
        pair = restrict_to_paths(o.conditional_state, SWAP_PAIR_PATHS)
        pair_states[o.label] = pair
        o.metrics["pair_entropy"] = entanglement_entropy(pair, {"1", "1'"})

    combined = _combined_accepted(outcomes)
    metrics: dict[str, float] = {"success_probability": success}
    if combined is not None:
        metrics["unresolved_split_entropy"] = entanglement_entropy(combined, SWAP_PAIR_PATHS)
        metrics["output_purity"] = reduced_density(combined, SWAP_OUTPUT_PATHS).purity()
        target = normalize(StateVector({
            FockKet({_m("1", 0): 1, _m("4'", 0): 1}): 1.0,
            FockKet({_m("1'", 1): 1, _m("4", 1): 1}): 1.0,
        }))
        metrics["pair_block_fidelity"] = reduced_density(combined, SWAP_PAIR_PATHS).fidelity(target)
    return SwapResult(
        alpha=alpha,
        convention=convention,
        outcomes=outcomes,
        success_probability=success,
        combined_state=combined,
        pair_states=pair_states,
        metrics=metrics,
    )


def run_ghz(alpha: float = math.pi / 4, convention: Convention = Convention.UNITARY) -> GhzResult:
    """Three-photon GHZ scheme: one AOM, two filtered detectors, one click.

    Heralding on exactly one photon across {T, T'} excludes both the
    both-fire and both-dark branches; each detector outcome leaves the three
    undetected photons in an equal-weight two-branch superposition whose
    phase-maximized GHZ fidelity is reported.  Per-detector probability is
    sin^2(alpha) cos^2(alpha); the total is twice that.
    """
    s1, s2 = swap_sources(alpha)
    state = tensor(make_source(s1), make_source(s2))
    aom = AomSpec("AOM", _m("2", 1), _m("3", 0), output_x="T'", output_y="T",
                  phase_convention=convention)
    state = apply_element(state, make_aom(aom))
    filter_t = FilterSpec("T", pass_bin=0, sigma=1.0)
    filter_tp = FilterSpec("T'", pass_bin=1, sigma=1.0)
    state, _ = apply_filter(state, filter_t)
    state, _ = apply_filter(state, filter_tp)
    outcomes = post_select(state, ghz_herald_rule())

    branch_paths = {m.path for m in GHZ_BRANCH_A.modes()} | {m.path for m in GHZ_BRANCH_B.modes()}
    per_detector = {"T": 0.0, "T'": 0.0}
    heralded_states: dict[str, StateVector] = {}
    metrics: dict[str, float] = {}
    success = 0.0
    for o in outcomes:
        if not o.accepted:
            continue
        success += o.probability
        fired = next(p for p, c in o.pattern if c == 1)
        per_detector[fired] = o.probability
        three_photon = restrict_to_paths(o.conditional_state, branch_paths)
        heralded_states[fired] = three_photon
        fid = ghz_fidelity(three_photon, GHZ_BRANCH_A, GHZ_BRANCH_B)
        o.metrics["ghz_fidelity"] = fid
        metrics[f"ghz_fidelity[{fired}]"] = fid
    metrics["total_probability"] = success

    valid = check_bandwidth(BandwidthCheck(
        sigma_pump=1.0, filter_sigmas=(filter_t.sigma, filter_tp.sigma)
    ))
    return GhzResult(
        alpha=alpha,
        convention=convention,
        outcomes=outcomes,
        success_probability=success,
        per_detector=per_detector,
        heralded_states=heralded_states,
        metrics=metrics,
        bandwidth_valid=valid,
    )

"""Sparse multi-photon states over (path, frequency-bin) modes.

A mode is a photon "slot" identified by a path name and an integer frequency
bin: bin ``n`` stands for the optical frequency ``omega + n * delta`` on an
implicit grid, so frequency equality is exact integer equality.  Multi-photon
basis states are occupation maps over modes (:class:`FockKet`), and a state is
a sparse complex-amplitude map over such kets (:class:`StateVector`).

The module also provides the linear-algebra layer used everywhere else:
inner products, tensor products, partial traces (:func:`reduced_density`),
bipartite entanglement entropy, and a phase-maximized fidelity against
two-branch superposition targets (:func:`ghz_fidelity`).

Everything here is value-like: kets are immutable, states are never mutated
after construction, and every operation returns a fresh object, so instances
can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import OverlappingPathsError, ZeroStateError

__all__ = [
    "ModeLabel",
    "FockKet",
    "StateVector",
    "DensityMatrix",
    "ket",
    "tensor",
    "inner",
    "normalize",
    "reduced_density",
    "entanglement_entropy",
    "ghz_fidelity",
]


@dataclass(frozen=True, order=True)
class ModeLabel:
    """A single-photon mode: a path name plus an integer frequency bin.

    Ordering is lexicographic by ``(path, freq_bin)`` and is the canonical
    ordering used everywhere (ket storage, iteration, serialization).
    """

    path: str
    freq_bin: int

    def __post_init__(self):
        if not self.path:
            raise ValueError("mode path must be a non-empty string")

    def __str__(self) -> str:
        return f"{self.path}@{self.freq_bin}"


class FockKet:
    """Canonical multi-photon basis state: occupation counts per mode.

    The representation is unique: zero counts are never stored, and pairs are
    kept sorted by mode, so two kets are equal iff they describe the same
    occupations.  Instances are immutable and hashable.
    """

    __slots__ = ("_pairs", "_hash")

    def __init__(self, occupations: Mapping[ModeLabel, int] | Iterable[tuple[ModeLabel, int]] = ()):
        items = occupations.items() if isinstance(occupations, Mapping) else occupations
        merged: dict[ModeLabel, int] = {}
        for mode, count in items:
            if count == 0:
                continue
            if count < 0 or count != int(count):
                raise ValueError(f"occupation count for {mode} must be a positive integer")
            merged[mode] = merged.get(mode, 0) + int(count)
        pairs = tuple(sorted(merged.items()))
        object.__setattr__(self, "_pairs", pairs)
        object.__setattr__(self, "_hash", hash(pairs))

    @classmethod
    def from_modes(cls, modes: Iterable[ModeLabel]) -> FockKet:
        """Build a ket from a list of occupied modes; repeats raise the count."""
        return cls((m, 1) for m in modes)

    @property
    def pairs(self) -> tuple[tuple[ModeLabel, int], ...]:
        return self._pairs

    def items(self) -> tuple[tuple[ModeLabel, int], ...]:
        return self._pairs

    def count(self, mode: ModeLabel) -> int:
        for m, n in self._pairs:
            if m == mode:
                return n
        return 0

    def total_photons(self) -> int:
        return sum(n for _, n in self._pairs)

    def modes(self) -> tuple[ModeLabel, ...]:
        return tuple(m for m, _ in self._pairs)

    def paths(self) -> frozenset[str]:
        return frozenset(m.path for m, _ in self._pairs)

    def split_by_paths(self, keep: frozenset[str] | set[str]) -> tuple[FockKet, FockKet]:
        """Partition occupations into (modes on kept paths, the rest)."""
        kept = [(m, n) for m, n in self._pairs if m.path in keep]
        rest = [(m, n) for m, n in self._pairs if m.path not in keep]
        return FockKet(kept), FockKet(rest)

    def merge(self, other: FockKet) -> FockKet:
        return FockKet(self._pairs + other._pairs)

    def count_on_paths(self, paths: frozenset[str] | set[str]) -> int:
        return sum(n for m, n in self._pairs if m.path in paths)

    def __eq__(self, other) -> bool:
        return isinstance(other, FockKet) and self._pairs == other._pairs

    def __lt__(self, other: FockKet) -> bool:
        return self._pairs < other._pairs

    def __hash__(self) -> int:
        return self._hash

    def __setattr__(self, name, value):
        raise AttributeError("FockKet is immutable")

    def __repr__(self) -> str:
        if not self._pairs:
            return "|vac>"
        body = " ".join(f"{m}" if n == 1 else f"{m}*{n}" for m, n in self._pairs)
        return f"|{body}>"


@dataclass
class StateVector:
    """Sparse state: map from :class:`FockKet` to complex amplitude.

    ``prune_epsilon`` drops terms with magnitude at or below the threshold at
    construction time; the default 0.0 keeps everything except exact zeros.
    ``non_unitary`` marks states whose history includes a renormalizing
    (non-isometric) element application; the flag is sticky through later
    operations that preserve it explicitly.
    """

    terms: dict[FockKet, complex] = field(default_factory=dict)
    prune_epsilon: float = 0.0
    non_unitary: bool = False

    def __post_init__(self):
        if self.prune_epsilon < 0:
            raise ValueError("prune_epsilon must be non-negative")
        eps = self.prune_epsilon
        self.terms = {
            k: complex(a) for k, a in self.terms.items() if abs(complex(a)) > eps
        }

    def sorted_items(self) -> list[tuple[FockKet, complex]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].pairs)

    def amplitude(self, k: FockKet) -> complex:
        return self.terms.get(k, 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def paths(self) -> frozenset[str]:
        out: set[str] = set()
        for k in self.terms:
            out.update(k.paths())
        return frozenset(out)

    def photon_numbers(self) -> frozenset[int]:
        return frozenset(k.total_photons() for k in self.terms)

    def scaled(self, factor: complex) -> StateVector:
        return StateVector(
            {k: a * factor for k, a in self.terms.items()},
            prune_epsilon=self.prune_epsilon,
            non_unitary=self.non_unitary,
        )

    def __repr__(self) -> str:
        parts = [f"({a:.4g}){k}" for k, a in self.sorted_items()]
        return "StateVector[" + " + ".join(parts) + "]" if parts else "StateVector[0]"


@dataclass
class DensityMatrix:
    """Dense density operator over an explicit ordered ket basis."""

    basis: tuple[FockKet, ...]
    matrix: np.ndarray

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def fidelity(self, pure: StateVector) -> float:
        """Overlap <psi|rho|psi> with a pure state on the same mode space."""
        v = np.array([pure.amplitude(k) for k in self.basis], dtype=complex)
        return float((v.conj() @ self.matrix @ v).real)


def ket(modes: Iterable[ModeLabel]) -> StateVector:
    """Unit-amplitude basis state with occupation counts taken from the list.

    The list may contain repeats; repeats become multi-occupation of the same
    mode.  The result is invariant under permutation of the input list.
    """
    return StateVector({FockKet.from_modes(modes): 1.0 + 0j})


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product of states on disjoint path sets."""
    shared = a.paths() & b.paths()
    if shared:
        raise OverlappingPathsError(
            f"operands share path(s): {', '.join(sorted(shared))}"
        )
    out: dict[FockKet, complex] = {}
    for ka, ca in a.sorted_items():
        for kb, cb in b.sorted_items():
            out[ka.merge(kb)] = ca * cb
    return StateVector(out, non_unitary=a.non_unitary or b.non_unitary)


def inner(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>, conjugate-linear in ``a``."""
    if len(b.terms) < len(a.terms):
        return sum(a.terms[k].conjugate() * cb for k, cb in b.terms.items() if k in a.terms)
    return sum(ca.conjugate() * b.terms[k] for k, ca in a.terms.items() if k in b.terms)


def normalize(s: StateVector) -> StateVector:
    """Rescale to unit norm; raises :class:`ZeroStateError` on a zero state."""
    n = s.norm()
    if n == 0.0:
        raise ZeroStateError("cannot normalize a zero state")
    return s.scaled(1.0 / n)


def reduced_density(s: StateVector, keep_paths: set[str] | frozenset[str]) -> DensityMatrix:
    """Partial trace over every mode whose path is not in ``keep_paths``.

    Expects a normalized input; the result then has unit trace.
    """
    if not s.terms:
        raise ZeroStateError("cannot reduce a zero state")
    keep = frozenset(keep_paths)
    # amplitudes grouped by the traced-out remainder ket
    groups: dict[FockKet, dict[FockKet, complex]] = {}
    kept_kets: set[FockKet] = set()
    for k, amp in s.terms.items():
        kept, rest = k.split_by_paths(keep)
        # (kept, rest) determines k uniquely, so plain assignment is exact
        groups.setdefault(rest, {})[kept] = amp
        kept_kets.add(kept)
    basis = tuple(sorted(kept_kets))
    index = {k: i for i, k in enumerate(basis)}
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    for comp in groups.values():
        v = np.zeros(len(basis), dtype=complex)
        for kept, amp in comp.items():
            v[index[kept]] = amp
        rho += np.outer(v, v.conj())
    return DensityMatrix(basis=basis, matrix=rho)


def entanglement_entropy(s: StateVector, partition: set[str] | frozenset[str]) -> float:
    """Von Neumann entropy, in bits, of the reduction onto ``partition``.

    For a pure state this measures entanglement across the cut
    ``partition | complement``; 0 log 0 is taken as 0.
    """
    rho = reduced_density(s, partition)
    lam = rho.eigenvalues()
    ent = 0.0
    for v in lam:
        if v > 0.0:
            ent -= float(v) * math.log2(float(v))
    return ent


def ghz_fidelity(s: StateVector, branch_a: FockKet, branch_b: FockKet) -> float:
    """Best overlap with the family (|a> + e^{i phi}|b>)/sqrt(2) over phi.

    Phase-insensitive by construction; the maximum over phi has the closed
    form (|<a|s>| + |<b|s>|)^2 / 2, which this returns.
    """
    if branch_a == branch_b:
        raise ValueError("branch kets must differ")
    ca = abs(s.amplitude(branch_a))
    cb = abs(s.amplitude(branch_b))
    return (ca + cb) ** 2 / 2.0

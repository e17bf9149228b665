"""Shared helpers: random states and randomized AOM circuits for oracle checks."""

from __future__ import annotations

import numpy as np

from aomsim import (
    AomSpec,
    Convention,
    FockKet,
    ModeLabel,
    StateVector,
    normalize,
)

M = ModeLabel


def max_amplitude_dev(a: StateVector, b: StateVector) -> float:
    keys = set(a.terms) | set(b.terms)
    return max((abs(a.amplitude(k) - b.amplitude(k)) for k in keys), default=0.0)


def random_state(rng: np.random.Generator, modes: list[ModeLabel],
                 max_photons: int = 4, max_terms: int = 4) -> StateVector:
    """Normalized state whose kets draw photons only from the given modes."""
    terms: dict[FockKet, complex] = {}
    for _ in range(int(rng.integers(1, max_terms + 1))):
        n = int(rng.integers(1, max_photons + 1))
        picks = [modes[int(i)] for i in rng.integers(0, len(modes), size=n)]
        k = FockKet.from_modes(picks)
        terms[k] = terms.get(k, 0j) + complex(rng.normal(), rng.normal())
    return normalize(StateVector(terms))


def random_aom(rng: np.random.Generator, in_a: ModeLabel, in_b: ModeLabel,
               out_x: str, out_y: str, convention: Convention | None = None) -> AomSpec:
    shift = in_a.freq_bin - in_b.freq_bin
    t = 2 ** -0.5 if rng.random() < 0.5 else float(rng.uniform(0.1, 0.9))
    if convention is None:
        convention = Convention.UNITARY if rng.random() < 0.5 else Convention.PAPER_LITERAL
    return AomSpec(f"R{out_x}", in_a, in_b, out_x, out_y, shift=shift, t_amp=t,
                   phase_convention=convention)


def random_circuit(rng: np.random.Generator, convention: Convention | None = None
                   ) -> tuple[StateVector, list[AomSpec]]:
    """A random initial state plus one or two consistently wired AOMs.

    Photons start on the first AOM's expected inputs and on spectator paths;
    a second AOM, when present, takes one output of the first (at the bin
    that output actually carries) plus a fresh path.  Closure stays within
    the dense-oracle caps (<= 12 modes, <= 4 photons).
    """
    base = int(rng.integers(-1, 2))
    shift = int(rng.integers(1, 3))
    in_a, in_b = M("a", base + shift), M("b", base)
    aom1 = random_aom(rng, in_a, in_b, "x", "y", convention)
    spectators = [M("s1", int(rng.integers(-1, 3))), M("s2", int(rng.integers(-1, 3)))]
    pool = [in_a, in_b] + spectators[: int(rng.integers(0, 3))]
    state = random_state(rng, pool)
    aoms = [aom1]
    if rng.random() < 0.5:
        shift2 = int(rng.integers(1, 3))
        if rng.random() < 0.5:
            # feed the high-bin output of the first AOM into the second
            in_a2 = M("x", base + shift)
            in_b2 = M("c", base + shift - shift2)
        else:
            # feed the low-bin output of the first AOM into the second
            in_a2 = M("c", base + shift2)
            in_b2 = M("y", base)
        aoms.append(random_aom(rng, in_a2, in_b2, "u", "v", convention))
    return state, aoms

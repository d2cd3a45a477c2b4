"""Brute-force amplitude sums for the class-L path pairs.

Independent of the closed-form tables in :mod:`impact_series.probability`;
those are checked against this module, never the other way round.

Sign/phase convention (only relative amplitudes matter, the 1/sqrt(2)
beam-splitter factors drop out in the normalization)::

    (L,LL):  -sigma * exp(+i alpha)
    (l,Ll):   +1    * exp(-i beta)
    (l,lL):  omega  * exp(-i gamma)

Expanding ``|sum|^2`` gives cross terms ``-2 sigma cos(alpha+beta)``,
``-2 sigma omega cos(alpha+gamma)`` and ``2 omega cos(gamma-beta)``, which is
the standard three-path joint distribution.  Summed over the four outcomes the
cross terms cancel, so the normalization is ``4 * len(subset)``.
"""

from __future__ import annotations

import cmath
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np

from .core_model import (
    CLASS_L_PAIRS,
    LL_LL,
    OUTCOMES,
    OutcomePair,
    PathPair,
    PhaseSettings,
    ProbabilityTable,
    l_Ll,
    l_lL,
)


@dataclass(frozen=True)
class OutcomeAmplitude:
    magnitude_sign: int
    phase: float

    def __post_init__(self) -> None:
        if self.magnitude_sign not in (1, -1):
            raise ValueError("magnitude_sign must be +1 or -1")

    @property
    def value(self) -> complex:
        return self.magnitude_sign * cmath.exp(1j * self.phase)


AmplitudeFn = Callable[[PathPair, OutcomePair, PhaseSettings], OutcomeAmplitude]


def amplitude(p: PathPair, o: OutcomePair, phases: PhaseSettings) -> OutcomeAmplitude:
    if p == LL_LL:
        return OutcomeAmplitude(-o.sigma, phases.alpha)
    if p == l_Ll:
        return OutcomeAmplitude(1, -phases.beta)
    if p == l_lL:
        return OutcomeAmplitude(o.omega, -phases.gamma)
    raise ValueError(f"{p} is not in subensemble L")


def unnormalized(
    subset: Iterable[PathPair], phases: PhaseSettings, amplitude_fn: AmplitudeFn = amplitude
) -> np.ndarray:
    """``|sum_k A_k|^2`` for each outcome, in ``OUTCOMES`` order."""
    subset = _check_subset(subset)
    return np.array(
        [abs(sum(amplitude_fn(p, o, phases).value for p in subset)) ** 2 for o in OUTCOMES]
    )


def superpose(
    subset: Iterable[PathPair], phases: PhaseSettings, amplitude_fn: AmplitudeFn = amplitude
) -> ProbabilityTable:
    """Joint outcome table from coherent superposition of ``subset``."""
    weights = unnormalized(subset, phases, amplitude_fn)
    return ProbabilityTable(weights / weights.sum())


def _check_subset(subset: Iterable[PathPair]) -> tuple[PathPair, ...]:
    # canonical order so the complex sum is reproducible bit for bit
    items = tuple(sorted(set(subset), key=lambda p: p.index))
    if not items:
        raise ValueError("subset must be nonempty")
    for p in items:
        if p not in CLASS_L_PAIRS:
            raise ValueError(f"{p} is not in subensemble L")
    return items

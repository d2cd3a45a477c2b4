"""Closed-form joint and single probabilities for both models, and the
observables that separate them.

Everything here is conditioned on subensemble L.  ``qm_joint`` is the full
three-path superposition; ``mc_joint`` is the multisimultaneous model in which
each pair interferes with only one partner path, chosen by a fair coin.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from itertools import combinations

from .amplitude_oracle import AmplitudeFn, amplitude, superpose
from .core_model import CLASS_L_PAIRS, OUTCOMES, PathPair, PhaseSettings, ProbabilityTable

__all__ = [
    "CausalModelSpec",
    "ProbabilityTable",
    "SpecialSettings",
    "QM_SPEC",
    "MC_SPEC",
    "qm_joint",
    "mc_joint",
    "model_joint",
    "marginal_side1",
    "marginal_side2",
    "correlation_E",
    "singles_visibility",
    "special_settings",
    "on_special_surface",
    "predicted_E",
    "parse_model_spec",
]


def _joint(phases: PhaseSettings, coeff: float) -> ProbabilityTable:
    a = math.cos(phases.alpha + phases.beta)
    b = math.cos(phases.alpha + phases.gamma)
    c = math.cos(phases.gamma - phases.beta)
    return ProbabilityTable(
        (
            (3 - coeff * a - coeff * b + coeff * c) / 12,
            (3 - coeff * a + coeff * b - coeff * c) / 12,
            (3 + coeff * a + coeff * b + coeff * c) / 12,
            (3 + coeff * a - coeff * b - coeff * c) / 12,
        )
    )


def qm_joint(phases: PhaseSettings) -> ProbabilityTable:
    return _joint(phases, 2.0)


def mc_joint(phases: PhaseSettings) -> ProbabilityTable:
    # same cosine patterns as qm_joint at half the strength
    return _joint(phases, 1.0)


@dataclass(frozen=True)
class CausalModelSpec:
    """Weighted mixture of class-L subsets that each superpose coherently."""

    components: tuple[tuple[frozenset[PathPair], float], ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        comps = tuple((frozenset(s), float(w)) for s, w in self.components)
        if not comps:
            raise ValueError("a causal model needs at least one component")
        for subset, w in comps:
            if not subset:
                raise ValueError("component subsets must be nonempty")
            bad = [str(p) for p in subset if p not in CLASS_L_PAIRS]
            if bad:
                raise ValueError(f"path pairs outside subensemble L: {bad}")
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"component weights must be positive, got {w}")
        total = math.fsum(w for _, w in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"component weights must sum to 1, got {total!r}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_pairs(
        cls, components: Iterable[tuple[Iterable[PathPair | str], float]], name: str = "custom"
    ) -> CausalModelSpec:
        parsed = []
        for subset, w in components:
            parsed.append(
                (frozenset(p if isinstance(p, PathPair) else PathPair.parse(p) for p in subset), w)
            )
        return cls(tuple(parsed), name)


QM_SPEC = CausalModelSpec(((frozenset(CLASS_L_PAIRS), 1.0),), name="qm")
MC_SPEC = CausalModelSpec(
    tuple((frozenset(pair), 1 / 3) for pair in combinations(CLASS_L_PAIRS, 2)), name="mc"
)


def model_joint(
    spec: CausalModelSpec, phases: PhaseSettings, amplitude_fn: AmplitudeFn = amplitude
) -> ProbabilityTable:
    """Mixture of amplitude-level superpositions, one per component."""
    acc = [0.0] * 4
    for subset, w in spec.components:
        table = superpose(subset, phases, amplitude_fn)
        for i, v in enumerate(table):
            acc[i] += w * v
    return ProbabilityTable(acc)


def marginal_side1(t: ProbabilityTable) -> tuple[float, float]:
    """``(P_{+,any}, P_{-,any})`` for the photon-1 detectors."""
    pp, pm, mp, mm = t.values
    return pp + pm, mp + mm


def marginal_side2(t: ProbabilityTable) -> tuple[float, float]:
    """``(P_{any,+}, P_{any,-})`` for the photon-2 detectors."""
    pp, pm, mp, mm = t.values
    return pp + mp, pm + mm


def correlation_E(t: ProbabilityTable) -> float:
    return sum(-o.sigma * o.omega * p for o, p in zip(OUTCOMES, t.values))


def singles_visibility(t: ProbabilityTable, side: int) -> float:
    if side == 1:
        plus, minus = marginal_side1(t)
    elif side == 2:
        plus, minus = marginal_side2(t)
    else:
        raise ValueError(f"side must be 1 or 2, got {side}")
    return abs(plus - minus)


@dataclass(frozen=True)
class SpecialSettings:
    """Phase constraints ``alpha + beta = n*pi`` and ``beta - gamma = m*pi``.

    The decisive predictions (E = 2/3 vs 1/3) need ``n == m``; otherwise
    ``cos(alpha + gamma) = (-1)**(n - m)`` and E changes sign.
    """

    n: int = 0
    m: int | None = None

    def __post_init__(self) -> None:
        if self.m is None:
            object.__setattr__(self, "m", self.n)
        for v in (self.n, self.m):
            if int(v) != v:
                raise ValueError("special-setting indices must be integers")


def special_settings(s: SpecialSettings, beta: float) -> PhaseSettings:
    return PhaseSettings(s.n * math.pi - beta, beta, beta - s.m * math.pi)


def _multiple_of_pi(x: float, tol: float) -> int | None:
    k = round(x / math.pi)
    return k if abs(x - k * math.pi) <= tol else None


def on_special_surface(phases: PhaseSettings, tol: float = 1e-9) -> SpecialSettings | None:
    """Recover ``(n, m)`` if ``phases`` sit on the special surface, else None."""
    n = _multiple_of_pi(phases.alpha + phases.beta, tol)
    m = _multiple_of_pi(phases.beta - phases.gamma, tol)
    if n is None or m is None:
        return None
    return SpecialSettings(n, m)


def predicted_E(phases: PhaseSettings) -> tuple[float, float]:
    """``(E_QM, E_MC)`` at ``phases``; the closed forms are 2/3 and 1/3 of cos(alpha+gamma)."""
    return correlation_E(qm_joint(phases)), correlation_E(mc_joint(phases))


def marginal_closed_forms(phases: PhaseSettings, coeff: float) -> tuple[Sequence[float], Sequence[float]]:
    """Single probabilities ``1/2 -+ coeff*cos(alpha+beta)`` and ``1/2 +- coeff*cos(beta-gamma)``.

    ``coeff`` is 1/3 for QM and 1/6 for MC.
    """
    a = math.cos(phases.alpha + phases.beta)
    c = math.cos(phases.beta - phases.gamma)
    return (0.5 - coeff * a, 0.5 + coeff * a), (0.5 + coeff * c, 0.5 - coeff * c)


def parse_model_spec(text: str, name: str = "custom") -> CausalModelSpec:
    """Read a mixture from text, one component per line::

        # weight  path pairs that superpose coherently
        0.5   (L,LL) (l,Ll)
        0.5   (l,lL)

    Blank lines and ``#`` comments are ignored.  Weights may be fractions
    such as ``1/3``.
    """
    components = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        weight_text, *tail = line.split(None, 1)
        rest = tail[0] if tail else ""
        try:
            weight = float(Fraction(weight_text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"line {lineno}: bad weight {weight_text!r}") from exc
        labels = _LABELS_RE.findall(rest)
        leftover = _LABELS_RE.sub("", rest).strip()
        if leftover or not labels:
            raise ValueError(f"line {lineno}: expected path-pair labels like (l,Ll), got {rest.strip()!r}")
        components.append(([PathPair.parse(lab) for lab in labels], weight))
    return CausalModelSpec.from_pairs(components, name)


_LABELS_RE = re.compile(r"\(\s*[lL]\s*,\s*[lL][lL]\s*\)")

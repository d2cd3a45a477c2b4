"""Path pairs of the impact-series setup and their subensemble classes.

Photon 1 crosses one unbalanced interferometer (arm ``l`` or ``L``); photon 2
crosses two in series.  A path pair is written ``(a,bc)`` with ``a`` the arm of
photon 1 and ``b``, ``c`` the arms of photon 2 at the first and second
interferometer.  Pairs are grouped by the path difference
``len(photon 2) - len(photon 1)``, which is what the coincidence electronics
can resolve.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple


class Arm(str, Enum):
    SHORT = "l"
    LONG = "L"


class ClassTag(str, Enum):
    """Subensemble label, named by the path difference of its members."""

    TWO_L_MINUS_l = "2L-l"
    L = "L"
    l = "l"  # noqa: E741
    TWO_l_MINUS_L = "2l-L"


# generation / export order
CLASS_TAGS: tuple[ClassTag, ...] = (
    ClassTag.TWO_L_MINUS_l,
    ClassTag.L,
    ClassTag.l,
    ClassTag.TWO_l_MINUS_L,
)


@dataclass(frozen=True)
class ArmLengths:
    short_l: float = 1.0
    long_L: float = 2.0

    def __post_init__(self) -> None:
        l, L = float(self.short_l), float(self.long_L)  # noqa: E741
        if not (math.isfinite(l) and math.isfinite(L)):
            raise ValueError("arm lengths must be finite")
        if not L > l > 0:
            raise ValueError(f"need long_L > short_l > 0, got l={l}, L={L}")
        diffs = (2 * L - l, L, l, 2 * l - L)
        if len(set(diffs)) != 4:
            raise ValueError(f"subensemble path differences not distinct: {diffs}")

    def length(self, arm: Arm) -> float:
        return self.long_L if arm is Arm.LONG else self.short_l

    def class_difference(self, tag: ClassTag) -> float:
        l, L = self.short_l, self.long_L  # noqa: E741
        return {
            ClassTag.TWO_L_MINUS_l: 2 * L - l,
            ClassTag.L: L,
            ClassTag.l: l,
            ClassTag.TWO_l_MINUS_L: 2 * l - L,
        }[tag]


@dataclass(frozen=True)
class PhaseSettings:
    """Interferometer phases in radians; never range-reduced."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def shifted(self, d_alpha: float = 0.0, d_beta: float = 0.0, d_gamma: float = 0.0) -> PhaseSettings:
        return PhaseSettings(self.alpha + d_alpha, self.beta + d_beta, self.gamma + d_gamma)


_LABEL_RE = re.compile(r"^\(?\s*([lL])\s*,\s*([lL])([lL])\s*\)?$")


@dataclass(frozen=True)
class PathPair:
    photon1: Arm
    photon2_first: Arm
    photon2_second: Arm

    @property
    def index(self) -> int:
        """Position in the canonical order of :func:`enumerate_path_pairs`."""
        bits = (self.photon1, self.photon2_first, self.photon2_second)
        return sum((a is Arm.LONG) << (2 - i) for i, a in enumerate(bits))

    @classmethod
    def from_index(cls, i: int) -> PathPair:
        return PATH_PAIRS[i]

    @classmethod
    def parse(cls, label: str) -> PathPair:
        """Parse ``"(l,Ll)"`` or ``"l,Ll"``."""
        m = _LABEL_RE.match(label.strip())
        if m is None:
            raise ValueError(f"not a path-pair label: {label!r}")
        return cls(*(Arm(c) for c in m.groups()))

    def flipped(self) -> PathPair:
        """Swap every short arm for a long one and vice versa."""
        flip = {Arm.SHORT: Arm.LONG, Arm.LONG: Arm.SHORT}
        return PathPair(flip[self.photon1], flip[self.photon2_first], flip[self.photon2_second])

    def __str__(self) -> str:
        return f"({self.photon1.value},{self.photon2_first.value}{self.photon2_second.value})"


class OutcomePair(NamedTuple):
    """Detector pair: sigma for D1(+/-), omega for D2(+/-)."""

    sigma: int
    omega: int

    def __str__(self) -> str:
        return ("+" if self.sigma > 0 else "-") + ("+" if self.omega > 0 else "-")


# index order used by every 4-vector in the package: ++, +-, -+, --
OUTCOMES: tuple[OutcomePair, ...] = (
    OutcomePair(1, 1),
    OutcomePair(1, -1),
    OutcomePair(-1, 1),
    OutcomePair(-1, -1),
)


@dataclass(frozen=True)
class SubensembleClass:
    tag: ClassTag
    path_difference: float


def enumerate_path_pairs() -> list[PathPair]:
    """All 8 path pairs; photon 1 varies slowest, short before long."""
    arms = (Arm.SHORT, Arm.LONG)
    return [PathPair(a, b, c) for a in arms for b in arms for c in arms]


PATH_PAIRS: tuple[PathPair, ...] = tuple(enumerate_path_pairs())

LL_LL = PathPair.parse("(L,LL)")
l_Ll = PathPair.parse("(l,Ll)")
l_lL = PathPair.parse("(l,lL)")
CLASS_L_PAIRS: tuple[PathPair, ...] = (LL_LL, l_Ll, l_lL)


def path_length(p: PathPair, arms: ArmLengths, photon: int) -> float:
    if photon == 1:
        return arms.length(p.photon1)
    if photon == 2:
        return arms.length(p.photon2_first) + arms.length(p.photon2_second)
    raise ValueError(f"photon must be 1 or 2, got {photon}")


def _tag_from_arm_counts(p: PathPair) -> ClassTag:
    # difference = (#long in photon 2 - #long in photon 1) * (L - l) + l
    k = (p.photon2_first is Arm.LONG) + (p.photon2_second is Arm.LONG) - (p.photon1 is Arm.LONG)
    return {2: ClassTag.TWO_L_MINUS_l, 1: ClassTag.L, 0: ClassTag.l, -1: ClassTag.TWO_l_MINUS_L}[k]


def classify_subensemble(p: PathPair, arms: ArmLengths | None = None) -> SubensembleClass:
    arms = arms or ArmLengths()
    diff = path_length(p, arms, 2) - path_length(p, arms, 1)
    return SubensembleClass(_tag_from_arm_counts(p), diff)


def members(tag: ClassTag) -> tuple[PathPair, ...]:
    return tuple(p for p in PATH_PAIRS if _tag_from_arm_counts(p) is tag)


@dataclass(frozen=True)
class ProbabilityTable:
    """Joint probabilities ``P[sigma, omega]`` stored in ``OUTCOMES`` order."""

    values: tuple[float, float, float, float]

    TOL = 1e-12

    def __init__(self, values) -> None:
        vals = tuple(float(v) for v in values)
        if len(vals) != 4:
            raise ValueError("a probability table has exactly 4 entries")
        if any(not (-self.TOL <= v <= 1 + self.TOL) for v in vals):
            raise ValueError(f"entries must lie in [0, 1]: {vals}")
        if abs(math.fsum(vals) - 1.0) > self.TOL:
            raise ValueError(f"entries must sum to 1, got {math.fsum(vals)!r}")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, o: OutcomePair | tuple[int, int]) -> float:
        return self.values[OUTCOMES.index(OutcomePair(*o))]

    def __iter__(self):
        return iter(self.values)

    def as_dict(self) -> dict[str, float]:
        return {str(o): v for o, v in zip(OUTCOMES, self.values)}

    @classmethod
    def uniform(cls) -> ProbabilityTable:
        return cls((0.25, 0.25, 0.25, 0.25))

"""Seeded photon-pair event streams, the coincidence filter, and count-based
estimators.

Random numbers come from numpy's Philox-4x64 counter-based generator keyed by
the 64-bit seed.  Pairs are produced in fixed-size chunks; chunk ``k`` reads
its own substream starting at counter ``k * 2**128`` (what
``Philox.jumped(k)`` yields), so any chunk can be regenerated, or generated in
parallel, without touching the others, and the merged stream is always the
sequential one.

Every pair picks one of the 8 path pairs uniformly (two fair beam splitters
per photon).  Class-L pairs draw their outcome from the model; the other
classes draw uniformly unless ``class_l_interference`` is set, in which case
class l mirrors class L through :meth:`PathPair.flipped`.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from .amplitude_oracle import superpose
from .core_model import (
    CLASS_L_PAIRS,
    CLASS_TAGS,
    OUTCOMES,
    PATH_PAIRS,
    ArmLengths,
    ClassTag,
    OutcomePair,
    PathPair,
    PhaseSettings,
    ProbabilityTable,
    classify_subensemble,
)
from .probability import (
    MC_SPEC,
    QM_SPEC,
    CausalModelSpec,
    marginal_side1,
    marginal_side2,
    mc_joint,
    qm_joint,
)

CHUNK_SIZE = 1 << 16
SEED_MASK = (1 << 64) - 1

Model = Union[Literal["qm", "mc"], CausalModelSpec]

_CLASS_INDEX = {tag: i for i, tag in enumerate(CLASS_TAGS)}
_L = _CLASS_INDEX[ClassTag.L]
_l = _CLASS_INDEX[ClassTag.l]
# class index of each canonical path-pair index
_CLASS_OF_PATH = np.array(
    [_CLASS_INDEX[classify_subensemble(p).tag] for p in PATH_PAIRS], dtype=np.int8
)
_SINGLETON = np.isin(
    _CLASS_OF_PATH, [_CLASS_INDEX[ClassTag.TWO_L_MINUS_l], _CLASS_INDEX[ClassTag.TWO_l_MINUS_L]]
)
_SIGMA = np.array([o.sigma for o in OUTCOMES], dtype=np.int8)
_OMEGA = np.array([o.omega for o in OUTCOMES], dtype=np.int8)
# partner chosen by the fair coin: the other two class-L pairs in canonical order
_PARTNERS = {
    p: tuple(q for q in sorted(CLASS_L_PAIRS, key=lambda x: x.index) if q != p) for p in CLASS_L_PAIRS
}


def substream(seed: int, chunk: int) -> np.random.Generator:
    """Generator for chunk ``chunk`` of the stream keyed by ``seed``."""
    if not 0 <= seed <= SEED_MASK:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(counter=[0, 0, chunk, 0], key=seed))


@dataclass(frozen=True)
class EventRecord:
    trial_id: int
    class_tag: ClassTag
    time_tag_delta: float
    outcome: OutcomePair
    hidden_path: PathPair | None = None
    hidden_partner: PathPair | None = None


@dataclass
class EventBatch:
    """Columnar event stream.  Path columns hold canonical indices, -1 if absent."""

    trial_id: np.ndarray
    class_idx: np.ndarray
    time_tag_delta: np.ndarray
    outcome: np.ndarray
    hidden_path: np.ndarray
    hidden_partner: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.trial_id)

    @property
    def sigma(self) -> np.ndarray:
        return _SIGMA[self.outcome]

    @property
    def omega(self) -> np.ndarray:
        return _OMEGA[self.outcome]

    def class_mask(self, tag: ClassTag) -> np.ndarray:
        return self.class_idx == _CLASS_INDEX[tag]

    def select(self, mask: np.ndarray) -> EventBatch:
        return EventBatch(
            self.trial_id[mask],
            self.class_idx[mask],
            self.time_tag_delta[mask],
            self.outcome[mask],
            self.hidden_path[mask],
            self.hidden_partner[mask],
            dict(self.meta),
        )

    def __iter__(self) -> Iterator[EventRecord]:
        for i in range(len(self)):
            yield self.record(i)

    def record(self, i: int) -> EventRecord:
        hp, hq = int(self.hidden_path[i]), int(self.hidden_partner[i])
        return EventRecord(
            int(self.trial_id[i]),
            CLASS_TAGS[self.class_idx[i]],
            float(self.time_tag_delta[i]),
            OUTCOMES[self.outcome[i]],
            PATH_PAIRS[hp] if hp >= 0 else None,
            PATH_PAIRS[hq] if hq >= 0 else None,
        )

    @classmethod
    def from_records(cls, records: Iterable[EventRecord], meta: dict | None = None) -> EventBatch:
        rows = list(records)
        return cls(
            np.array([r.trial_id for r in rows], dtype=np.int64),
            np.array([_CLASS_INDEX[ClassTag(r.class_tag)] for r in rows], dtype=np.int8),
            np.array([r.time_tag_delta for r in rows], dtype=np.float64),
            np.array([OUTCOMES.index(OutcomePair(*r.outcome)) for r in rows], dtype=np.int8),
            np.array([r.hidden_path.index if r.hidden_path else -1 for r in rows], dtype=np.int8),
            np.array([r.hidden_partner.index if r.hidden_partner else -1 for r in rows], dtype=np.int8),
            dict(meta or {}),
        )

    @classmethod
    def concat(cls, parts: list[EventBatch], meta: dict | None = None) -> EventBatch:
        cols = [
            np.concatenate([getattr(p, name) for p in parts])
            for name in ("trial_id", "class_idx", "time_tag_delta", "outcome", "hidden_path", "hidden_partner")
        ]
        return cls(*cols, dict(meta if meta is not None else (parts[0].meta if parts else {})))


def _cdf(table: ProbabilityTable) -> np.ndarray:
    c = np.cumsum(table.values)
    c[-1] = 1.0
    return c


def _resolve(model: Model) -> tuple[str, CausalModelSpec]:
    if isinstance(model, CausalModelSpec):
        return "custom", model
    if model == "qm":
        return "qm", QM_SPEC
    if model == "mc":
        return "mc", MC_SPEC
    raise ValueError(f"unknown model {model!r}; expected 'qm', 'mc' or a CausalModelSpec")


class _Sampler:
    """Per-model lookup tables shared by every chunk."""

    def __init__(
        self,
        model: Model,
        phases: PhaseSettings,
        mc_sampling: Literal["rules", "table"],
        class_l_interference: bool,
    ) -> None:
        self.mode, self.spec = _resolve(model)
        if mc_sampling not in ("rules", "table"):
            raise ValueError("mc_sampling must be 'rules' or 'table'")
        self.rules = self.mode == "mc" and mc_sampling == "rules"
        self.class_l_interference = class_l_interference

        tables = [ProbabilityTable.uniform()]
        if self.mode == "qm":
            tables.append(qm_joint(phases))
        elif self.mode == "mc" and not self.rules:
            tables.append(mc_joint(phases))
        else:
            for subset, _ in self.spec.components:
                tables.append(superpose(subset, phases))
        self.cdfs = np.array([_cdf(t) for t in tables])

        # rule-level MC: table id and partner for (class-L path index, coin)
        self.pair_table = np.zeros((8, 2), dtype=np.int8)
        self.pair_partner = np.full((8, 2), -1, dtype=np.int8)
        if self.rules:
            subsets = [s for s, _ in self.spec.components]
            for p in CLASS_L_PAIRS:
                for coin, q in enumerate(_PARTNERS[p]):
                    self.pair_table[p.index, coin] = 1 + subsets.index(frozenset((p, q)))
                    self.pair_partner[p.index, coin] = q.index
        self.flip = np.array([p.flipped().index for p in PATH_PAIRS], dtype=np.int8)
        weights = [w for _, w in self.spec.components]
        self.component_cdf = np.cumsum(weights)
        self.component_cdf[-1] = 1.0

    def chunk(self, g: np.random.Generator, size: int, start: int, arms: ArmLengths) -> EventBatch:
        # fixed draw order per chunk: path, coin, component, outcome
        path = g.integers(0, 8, size=size, dtype=np.int8)
        coin = g.integers(0, 2, size=size, dtype=np.int8)
        comp_u = g.random(size)
        out_u = g.random(size)

        cls = _CLASS_OF_PATH[path]
        interfering = cls == _L
        if self.class_l_interference:
            interfering |= cls == _l
        # class-l pairs act through their class-L mirror image
        eff_path = np.where(cls == _l, self.flip[path], path)

        table_id = np.zeros(size, dtype=np.int8)
        partner = np.full(size, -1, dtype=np.int8)
        if self.mode == "custom":
            comp = np.searchsorted(self.component_cdf, comp_u, side="right")
            table_id[interfering] = 1 + comp[interfering]
        elif self.rules:
            table_id[interfering] = self.pair_table[eff_path[interfering], coin[interfering]]
            q = self.pair_partner[eff_path[interfering], coin[interfering]]
            partner[interfering] = np.where(
                cls[interfering] == _l, self.flip[q], q
            )
        else:
            table_id[interfering] = 1

        cdf = self.cdfs[table_id]
        outcome = (out_u[:, None] >= cdf[:, :3]).sum(axis=1).astype(np.int8)

        if self.mode == "mc":
            hidden_path = path.copy()
        else:
            hidden_path = np.where(_SINGLETON[path], path, -1).astype(np.int8)
        diffs = np.array([arms.class_difference(t) for t in CLASS_TAGS])
        return EventBatch(
            np.arange(start, start + size, dtype=np.int64),
            cls,
            diffs[cls],
            outcome,
            hidden_path,
            partner,
        )


def generate_events(
    model: Model,
    phases: PhaseSettings,
    n_pairs: int,
    seed: int,
    *,
    arms: ArmLengths | None = None,
    mc_sampling: Literal["rules", "table"] = "rules",
    class_l_interference: bool = False,
    chunk_size: int = CHUNK_SIZE,
) -> EventBatch:
    """Simulate ``n_pairs`` photon pairs; deterministic in all arguments.

    ``mc_sampling="table"`` draws MC class-L outcomes straight from the
    closed-form table instead of running the partner-choice rules; no hidden
    partner is recorded then.
    """
    if int(n_pairs) != n_pairs or n_pairs < 1:
        raise ValueError("n_pairs must be a positive integer")
    arms = arms or ArmLengths()
    sampler = _Sampler(model, phases, mc_sampling, class_l_interference)
    parts = []
    for k, start in enumerate(range(0, int(n_pairs), chunk_size)):
        size = min(chunk_size, int(n_pairs) - start)
        parts.append(sampler.chunk(substream(seed, k), size, start, arms))
    meta = {
        "model": sampler.spec.name if sampler.mode == "custom" else sampler.mode,
        "phases": [phases.alpha, phases.beta, phases.gamma],
        "n_pairs": int(n_pairs),
        "seed": int(seed),
        "arms": [arms.short_l, arms.long_L],
        "mc_sampling": mc_sampling if sampler.mode == "mc" else None,
        "class_l_interference": class_l_interference,
    }
    return EventBatch.concat(parts, meta)


def coincidence_filter(
    events: EventBatch | Iterable[EventRecord],
    arms: ArmLengths | None = None,
    window_class: ClassTag = ClassTag.L,
):
    """Keep events whose arrival-time difference equals the window's path difference.

    Idealized detectors: the match is exact.  Returns an :class:`EventBatch`
    for batch input, otherwise a lazy iterator of records.
    """
    arms = arms or ArmLengths()
    target = arms.class_difference(ClassTag(window_class))
    if isinstance(events, EventBatch):
        return events.select(events.time_tag_delta == target)
    return (e for e in events if e.time_tag_delta == target)


@dataclass(frozen=True)
class EstimateSummary:
    counts: tuple[int, int, int, int]
    n_total: int
    n_classL: int
    p_hat: ProbabilityTable
    E_hat: float
    singles_vis_hat_1: float
    singles_vis_hat_2: float
    std_err_E: float

    def to_dict(self) -> dict:
        return {
            "counts": {str(o): c for o, c in zip(OUTCOMES, self.counts)},
            "n_total": self.n_total,
            "n_classL": self.n_classL,
            "p_hat": self.p_hat.as_dict(),
            "E_hat": self.E_hat,
            "singles_vis_hat_1": self.singles_vis_hat_1,
            "singles_vis_hat_2": self.singles_vis_hat_2,
            "std_err_E": self.std_err_E,
        }


def summary_from_counts(counts: Iterable[int], n_total: int | None = None) -> EstimateSummary:
    """Plug-in estimates from the four class-L coincidence counts (``++, +-, -+, --``)."""
    counts = tuple(int(c) for c in counts)
    if len(counts) != 4 or any(c < 0 for c in counts):
        raise ValueError("need four non-negative counts")
    n = sum(counts)
    if n < 1:
        raise ValueError("cannot estimate from an empty class-L stream")
    p_hat = ProbabilityTable([c / n for c in counts])
    e_hat = sum(-o.sigma * o.omega * c for o, c in zip(OUTCOMES, counts)) / n
    s1, s2 = marginal_side1(p_hat), marginal_side2(p_hat)
    return EstimateSummary(
        counts=counts,
        n_total=n if n_total is None else int(n_total),
        n_classL=n,
        p_hat=p_hat,
        E_hat=e_hat,
        singles_vis_hat_1=abs(s1[0] - s1[1]),
        singles_vis_hat_2=abs(s2[0] - s2[1]),
        std_err_E=math.sqrt(max(0.0, 1.0 - e_hat * e_hat) / n),
    )


def estimate(events: EventBatch | Iterable[EventRecord], n_total: int | None = None) -> EstimateSummary:
    """Estimate observables from a class-L stream (output of :func:`coincidence_filter`)."""
    if isinstance(events, EventBatch):
        if np.any(events.class_idx != _L):
            raise ValueError("estimate expects class-L events only")
        counts = np.bincount(events.outcome, minlength=4)
    else:
        counts = [0, 0, 0, 0]
        for e in events:
            if ClassTag(e.class_tag) is not ClassTag.L:
                raise ValueError("estimate expects class-L events only")
            counts[OUTCOMES.index(OutcomePair(*e.outcome))] += 1
    if n_total is None and isinstance(events, EventBatch):
        n_total = events.meta.get("n_pairs")
    return summary_from_counts(counts, n_total)


def class_l_sample(
    model: Model, phases: PhaseSettings, n_classL: int, seed: int, **kwargs
) -> EventBatch:
    """The first ``n_classL`` class-L events of a stream long enough to hold them."""
    n_pairs = max(16, math.ceil(n_classL * 8 / 3 * 1.2 + 50))
    while True:
        batch = coincidence_filter(generate_events(model, phases, n_pairs, seed, **kwargs), kwargs.get("arms"))
        if len(batch) >= n_classL:
            out = batch.select(slice(0, n_classL))
            out.meta["n_pairs"] = int(batch.trial_id[n_classL - 1]) + 1 if n_classL else 0
            return out
        n_pairs *= 2


def chi_square_homogeneity(counts_a: Iterable[int], counts_b: Iterable[int]) -> tuple[float, float]:
    """Two-sample chi-square test on outcome counts; returns ``(statistic, p_value)``."""
    from scipy.stats import chi2_contingency

    res = chi2_contingency(np.array([list(counts_a), list(counts_b)]), correction=False)
    return float(res.statistic), float(res.pvalue)

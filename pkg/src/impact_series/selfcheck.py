"""Analytic identity checks run by ``impact-series selfcheck``.

Each check compares two independently computed quantities over random phase
triples and reports the largest absolute deviation seen.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .amplitude_oracle import AmplitudeFn, amplitude, superpose, unnormalized
from .core_model import CLASS_L_PAIRS, PhaseSettings, ProbabilityTable
from .probability import (
    MC_SPEC,
    QM_SPEC,
    correlation_E,
    marginal_closed_forms,
    marginal_side1,
    marginal_side2,
    mc_joint,
    model_joint,
    qm_joint,
    singles_visibility,
    special_settings,
    SpecialSettings,
)

TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float = TOL

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<44s} max|dev| = {self.max_deviation:.3e}  (tol {self.tolerance:.0e})"


def random_phases(n: int, seed: int = 0) -> list[PhaseSettings]:
    rng = np.random.default_rng(seed)
    return [PhaseSettings(*row) for row in rng.uniform(-2 * math.pi, 2 * math.pi, size=(n, 3))]


def _table_dev(a: ProbabilityTable, b: ProbabilityTable) -> float:
    return max(abs(x - y) for x, y in zip(a, b))


def _max(fn: Callable[[PhaseSettings], float], samples: list[PhaseSettings]) -> float:
    return max(fn(ph) for ph in samples)


def run_checks(
    n_samples: int = 1000, seed: int = 0, amplitude_fn: AmplitudeFn = amplitude
) -> list[CheckResult]:
    samples = random_phases(n_samples, seed)
    pairs = list(combinations(CLASS_L_PAIRS, 2))
    zero = special_settings(SpecialSettings(0), 0.0)

    def headline(ph: PhaseSettings) -> float:
        qm, mc = model_joint(QM_SPEC, ph, amplitude_fn), model_joint(MC_SPEC, ph, amplitude_fn)
        return max(
            abs(correlation_E(qm) - 2 / 3),
            abs(correlation_E(mc) - 1 / 3),
            *(abs(singles_visibility(qm, s) - 2 / 3) for s in (1, 2)),
            *(abs(singles_visibility(mc, s) - 1 / 3) for s in (1, 2)),
        )

    def marginals(ph: PhaseSettings) -> float:
        dev = 0.0
        for table, coeff in ((qm_joint(ph), 1 / 3), (mc_joint(ph), 1 / 6)):
            side1, side2 = marginal_closed_forms(ph, coeff)
            got = (*marginal_side1(table), *marginal_side2(table))
            dev = max(dev, *(abs(x - y) for x, y in zip(got, (*side1, *side2))))
        return dev

    def denominators(ph: PhaseSettings) -> float:
        full = abs(unnormalized(CLASS_L_PAIRS, ph, amplitude_fn).sum() - 12)
        two = max(abs(unnormalized(p, ph, amplitude_fn).sum() - 8) for p in pairs)
        return max(full, two)

    def closed_E(ph: PhaseSettings) -> float:
        c = math.cos(ph.alpha + ph.gamma)
        return max(abs(correlation_E(qm_joint(ph)) - 2 / 3 * c), abs(correlation_E(mc_joint(ph)) - c / 3))

    def periodic(ph: PhaseSettings) -> float:
        base = superpose(CLASS_L_PAIRS, ph, amplitude_fn)
        shifts = (ph.shifted(d_alpha=2 * math.pi), ph.shifted(d_beta=2 * math.pi), ph.shifted(d_gamma=2 * math.pi))
        return max(_table_dev(base, superpose(CLASS_L_PAIRS, s, amplitude_fn)) for s in shifts)

    def strength(ph: PhaseSettings) -> float:
        return max(
            abs(abs(q - 0.25) - 2 * abs(m - 0.25)) for q, m in zip(qm_joint(ph), mc_joint(ph))
        )

    return [
        CheckResult("headline E and visibilities at zero phases", headline(zero)),
        CheckResult(
            "amplitude superposition == QM closed form",
            _max(lambda ph: _table_dev(superpose(CLASS_L_PAIRS, ph, amplitude_fn), qm_joint(ph)), samples),
        ),
        CheckResult(
            "QM preset mixture == QM closed form",
            _max(lambda ph: _table_dev(model_joint(QM_SPEC, ph, amplitude_fn), qm_joint(ph)), samples),
        ),
        CheckResult(
            "MC rule mixture == MC closed form",
            _max(lambda ph: _table_dev(model_joint(MC_SPEC, ph, amplitude_fn), mc_joint(ph)), samples),
        ),
        CheckResult("normalization denominators 12 and 8", _max(denominators, samples)),
        CheckResult("single probabilities == marginal sums", _max(marginals, samples)),
        CheckResult("E == (2/3, 1/3) * cos(alpha+gamma)", _max(closed_E, samples)),
        CheckResult(
            "closed forms sum to 1",
            _max(lambda ph: max(abs(sum(qm_joint(ph)) - 1), abs(sum(mc_joint(ph)) - 1)), samples),
        ),
        CheckResult("2*pi periodicity of superposition", _max(periodic, samples)),
        CheckResult("|P_QM - 1/4| == 2 |P_MC - 1/4|", _max(strength, samples)),
    ]

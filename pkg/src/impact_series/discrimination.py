"""Point-hypothesis tests between the QM and MC predictions.

Only valid on the special phase surface, where the two models predict
``E = 2/3`` and ``E = 1/3`` (up to a common sign).  Two statistics are
reported: z-scores of the plug-in correlation against each prediction, and
the multinomial log-likelihood ratio of all four counts, which is the
headline number.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

from scipy.stats import norm

from .core_model import PhaseSettings
from .montecarlo import EstimateSummary
from .probability import mc_joint, on_special_surface, predicted_E, qm_joint

# two-sided tail probability of a 5 sigma excursion
FIVE_SIGMA = float(2 * norm.sf(5.0))
MIN_CLASS_L = 30
SURFACE_TOL = 1e-9


class Verdict(str, Enum):
    FAVORS_QM = "FavorsQM"
    FAVORS_MC = "FavorsMC"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DecisionReport:
    E_hat: float
    std_err: float
    E_QM: float
    E_MC: float
    z_QM: float
    z_MC: float
    log_likelihood_ratio: float
    verdict: Verdict
    alpha_level: float
    threshold: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d


def z_threshold(alpha_level: float) -> float:
    if not 0 < alpha_level < 1:
        raise ValueError("alpha_level must lie in (0, 1)")
    return float(norm.isf(alpha_level / 2))


def _z(e_hat: float, target: float, se: float) -> float:
    diff = e_hat - target
    if se > 0:
        return diff / se
    # degenerate sample (all counts on one sign of sigma*omega)
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def log_likelihood_ratio(counts, phases: PhaseSettings) -> float:
    """``log L(QM) - log L(MC)`` for the four class-L counts."""
    llr = 0.0
    for r, p, q in zip(counts, qm_joint(phases), mc_joint(phases)):
        if r == 0:
            continue
        if p <= 0.0 or q <= 0.0:
            # an outcome impossible under one model settles it
            return math.inf if q <= 0.0 < p else -math.inf if p <= 0.0 < q else math.nan
        llr += r * (math.log(p) - math.log(q))
    return llr


def decide(
    summary: EstimateSummary, phases: PhaseSettings, alpha_level: float = FIVE_SIGMA
) -> DecisionReport:
    if on_special_surface(phases, SURFACE_TOL) is None:
        raise ValueError(
            "phases must satisfy alpha+beta = n*pi and beta-gamma = m*pi (within 1e-9); "
            f"got {phases}"
        )
    if summary.n_classL < MIN_CLASS_L:
        raise ValueError(f"need at least {MIN_CLASS_L} class-L coincidences, got {summary.n_classL}")
    thr = z_threshold(alpha_level)
    e_qm, e_mc = predicted_E(phases)
    z_qm = _z(summary.E_hat, e_qm, summary.std_err_E)
    z_mc = _z(summary.E_hat, e_mc, summary.std_err_E)
    reject_qm, reject_mc = abs(z_qm) > thr, abs(z_mc) > thr
    if reject_mc and not reject_qm:
        verdict = Verdict.FAVORS_QM
    elif reject_qm and not reject_mc:
        verdict = Verdict.FAVORS_MC
    else:
        verdict = Verdict.INCONCLUSIVE
    return DecisionReport(
        E_hat=summary.E_hat,
        std_err=summary.std_err_E,
        E_QM=e_qm,
        E_MC=e_mc,
        z_QM=z_qm,
        z_MC=z_mc,
        log_likelihood_ratio=log_likelihood_ratio(summary.counts, phases),
        verdict=verdict,
        alpha_level=alpha_level,
        threshold=thr,
    )


def required_sample_size(confidence_sigmas: float) -> int:
    """Class-L coincidences needed to separate E = 2/3 from E = 1/3.

    Smallest n with ``sigmas * (sd_QM + sd_MC) / sqrt(n) <= 1/3``, where
    ``sd = sqrt(1 - E**2)`` is the per-event spread of ``-sigma*omega``.
    """
    if not confidence_sigmas > 0:
        raise ValueError("confidence_sigmas must be positive")
    spread = math.sqrt(1 - (2 / 3) ** 2) + math.sqrt(1 - (1 / 3) ** 2)
    return max(1, math.ceil((confidence_sigmas * spread / (1 / 3)) ** 2))

import math
from itertools import combinations

import pytest
import sympy as sp
from hypothesis import given, strategies as st

from impact_series.amplitude_oracle import amplitude, superpose, unnormalized
from impact_series.core_model import CLASS_L_PAIRS, LL_LL, OUTCOMES, OutcomePair, PathPair, PhaseSettings, l_Ll, l_lL

ZERO = PhaseSettings(0.0, 0.0, 0.0)
angles = st.floats(-20, 20, allow_nan=False, allow_infinity=False)
phase_triples = st.builds(PhaseSettings, angles, angles, angles)


def test_amplitude_convention_examples():
    ph = PhaseSettings(0.3, -1.1, 2.5)
    a = amplitude(LL_LL, OutcomePair(1, 1), ph)
    assert (a.magnitude_sign, a.phase) == (-1, 0.3)
    for o in OUTCOMES:
        b = amplitude(l_Ll, o, ph)
        assert (b.magnitude_sign, b.phase) == (1, 1.1)
    c = amplitude(l_lL, OutcomePair(-1, -1), ph)
    assert (c.magnitude_sign, c.phase) == (-1, -2.5)
    assert abs(abs(a.value) - 1) < 1e-15


def test_amplitude_rejects_other_classes():
    with pytest.raises(ValueError):
        amplitude(PathPair.parse("(l,ll)"), OUTCOMES[0], ZERO)


def test_symbolic_expansion_matches_three_path_formula():
    """Expand |sum|^2 symbolically and compare with the textbook joint table times 12."""
    al, be, ga = sp.symbols("alpha beta gamma", real=True)
    expected = {
        (1, 1): 3 - 2 * sp.cos(al + be) - 2 * sp.cos(al + ga) + 2 * sp.cos(ga - be),
        (1, -1): 3 - 2 * sp.cos(al + be) + 2 * sp.cos(al + ga) - 2 * sp.cos(ga - be),
        (-1, 1): 3 + 2 * sp.cos(al + be) + 2 * sp.cos(al + ga) + 2 * sp.cos(ga - be),
        (-1, -1): 3 + 2 * sp.cos(al + be) - 2 * sp.cos(al + ga) - 2 * sp.cos(ga - be),
    }
    for (s, w), target in expected.items():
        total = -s * sp.exp(sp.I * al) + sp.exp(-sp.I * be) + w * sp.exp(-sp.I * ga)
        mod2 = sp.expand(total * sp.conjugate(total))
        diff = sp.simplify(sp.expand_complex(mod2 - target).rewrite(sp.cos))
        assert diff == 0


def test_superpose_examples():
    full = superpose(CLASS_L_PAIRS, ZERO)
    assert full.values == pytest.approx((1 / 12, 1 / 12, 9 / 12, 1 / 12), abs=1e-15)
    single = superpose([LL_LL], PhaseSettings(0.4, 1.2, -0.7))
    assert single.values == pytest.approx((0.25,) * 4, abs=1e-15)
    # |-e^{i alpha} + e^{-i beta}|^2 / 8 at zero phases
    two = superpose([LL_LL, l_Ll], ZERO)
    assert two.values == pytest.approx((0, 0, 0.5, 0.5), abs=1e-15)


def test_superpose_rejects_bad_subsets():
    with pytest.raises(ValueError):
        superpose([], ZERO)
    with pytest.raises(ValueError):
        superpose([PathPair.parse("(L,ll)")], ZERO)


def test_full_superposition_matches_closed_form(random_phase_triples):
    for ph in random_phase_triples:
        a, b, c = math.cos(ph.alpha + ph.beta), math.cos(ph.alpha + ph.gamma), math.cos(ph.gamma - ph.beta)
        expected = (
            (3 - 2 * a - 2 * b + 2 * c) / 12,
            (3 - 2 * a + 2 * b - 2 * c) / 12,
            (3 + 2 * a + 2 * b + 2 * c) / 12,
            (3 + 2 * a - 2 * b - 2 * c) / 12,
        )
        got = superpose(CLASS_L_PAIRS, ph).values
        assert max(abs(x - y) for x, y in zip(got, expected)) <= 1e-12


@given(phase_triples)
def test_normalization_denominators(ph):
    assert abs(unnormalized(CLASS_L_PAIRS, ph).sum() - 12) <= 1e-12
    for pair in combinations(CLASS_L_PAIRS, 2):
        assert abs(unnormalized(pair, ph).sum() - 8) <= 1e-12


@given(phase_triples)
def test_two_path_tables_bounded(ph):
    for pair in combinations(CLASS_L_PAIRS, 2):
        t = superpose(pair, ph)
        assert abs(sum(t) - 1) <= 1e-12
        assert all(-1e-15 <= v <= 0.5 + 1e-12 for v in t)


@given(phase_triples, st.sampled_from(["alpha", "beta", "gamma"]), st.integers(-3, 3))
def test_two_pi_periodicity(ph, which, k):
    shifted = ph.shifted(**{f"d_{which}": 2 * math.pi * k})
    for subset in [CLASS_L_PAIRS, *combinations(CLASS_L_PAIRS, 2)]:
        a, b = superpose(subset, ph), superpose(subset, shifted)
        assert max(abs(x - y) for x, y in zip(a, b)) <= 1e-12

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from noisyops.asymptotic import mixed_to_mixed_rate
from noisyops.errors import OutOfRange
from noisyops.noiseless import (
    CostLedger,
    binomial_protocol,
    cycle_ledger,
    erasure_cost_scaling,
    garbage_bound,
    mixed_to_mixed_cost,
    multinomial_protocol,
    outcomes_csv,
    preparation_cost,
)
from noisyops.spectra import Spectrum, entropy, info

S = Spectrum.from_probabilities
H_QUARTER = 0.8112781244591328


def h(x):
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


@pytest.mark.parametrize(
    "s, expected",
    [(Spectrum.pure(2), 1.0), (Spectrum.maximally_mixed(2), 2.0), (S([0.75, 0.25]), 1 + H_QUARTER)],
)
def test_preparation_cost(s, expected):
    assert preparation_cost(s) == pytest.approx(expected, abs=1e-12)


def test_mixed_to_mixed_cost_examples():
    assert mixed_to_mixed_cost(S([0.75, 0.25]), S([0.75, 0.25])).cost == 0.0
    assert mixed_to_mixed_cost(Spectrum.pure(2), Spectrum.maximally_mixed(2)).cost == 1.0
    assert mixed_to_mixed_cost(S([0.75, 0.25]), Spectrum.maximally_mixed(4)).cost == pytest.approx(1 + 2 - H_QUARTER)


def test_mixed_to_mixed_ledger_trace():
    a, b = S([0.75, 0.25]), Spectrum.maximally_mixed(4)
    res = mixed_to_mixed_cost(a, b)
    steps = {s["step"]: s for s in res.steps}
    # pure qubits spent beyond the distilled ones: addPure + makeNoise
    assert steps["addPure"]["pureQubits"] + steps["makeNoise"]["pureQubits"] == pytest.approx(res.cost)
    # what is held after distilling, adding and making noise forms b exactly
    held_pure = steps["distill"]["pureQubits"] + steps["addPure"]["pureQubits"]
    assert held_pure == pytest.approx(b.qubits - entropy(b))
    assert steps["makeNoise"]["noiseQubits"] == pytest.approx(entropy(b) - entropy(a))


def test_noiseless_cost_dominates_noisy_cost():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        da, db = (int(2 ** rng.integers(0, 4)) for _ in range(2))
        a = S(rng.dirichlet(np.ones(da))) if da > 1 else Spectrum.pure(1)
        b = S(rng.dirichlet(np.ones(db))) if db > 1 else Spectrum.pure(1)
        noisy = max(0.0, info(b) - info(a))
        assert mixed_to_mixed_cost(a, b).cost >= noisy - 1e-12


@pytest.mark.parametrize("s_in, s_out, expected", [(0.5, 0.5, 0.0), (0.0, 1.0, 1.0), (H_QUARTER, 2.0, 2 - H_QUARTER)])
def test_garbage_bound(s_in, s_out, expected):
    assert garbage_bound(s_in, s_out) == pytest.approx(expected)


def test_garbage_bound_rejects_negative():
    with pytest.raises(OutOfRange):
        garbage_bound(-0.1, 1.0)


# -- binomial protocol -----------------------------------------------------------------


def test_binomial_n2_by_enumeration():
    outcomes, ledger = binomial_protocol(0.5, 2)
    # enumerate the four strings: weight of k ones and number of such strings
    strings = list(itertools.product((0, 1), repeat=2))
    for o in outcomes:
        members = [s for s in strings if sum(s) == o.k]
        assert o.block_dim == len(members)
        assert o.probability == 0.25 * len(members)
    assert [o.pure_yield for o in outcomes] == [2.0, 1.0, 2.0]
    assert ledger.pure_qubits_out == 1.5
    assert ledger.erasure_bits == 1.5
    assert ledger.net_out == 0.0


def test_binomial_exact_rational_mode():
    outcomes, ledger = binomial_protocol(Fraction(1, 2), 2)
    assert [o.probability_exact for o in outcomes] == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]
    assert ledger.net_out == 0.0
    outcomes, _ = binomial_protocol("3/4", 200)
    assert sum(o.probability_exact for o in outcomes) == 1


@pytest.mark.parametrize("a2, n", [(0.75, 10), (0.3, 100), (0.9, 1000), (0.75, 2500)])
def test_binomial_identities(a2, n):
    outcomes, ledger = binomial_protocol(a2, n)
    assert len(outcomes) == n + 1
    assert math.fsum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-10)
    for o in outcomes[:: max(1, n // 7)]:
        assert o.pure_yield == pytest.approx(n - math.log2(math.comb(n, o.k)), abs=1e-9)
        expected = math.comb(n, o.k) * Fraction(a2) ** o.k * (1 - Fraction(a2)) ** (n - o.k)
        assert o.probability == pytest.approx(float(expected), rel=1e-9, abs=1e-300)
    assert ledger.net_out / n == pytest.approx(1 - h(a2), abs=1e-12)
    lo = 1 - h(a2) - math.log2(n + 1) / n
    hi = 1 - h(a2) + math.log2(n + 1) / n
    assert lo <= ledger.net_out / n <= hi


def test_binomial_almost_pure():
    _, ledger = binomial_protocol(1 - 1e-12, 40)
    assert ledger.net_out / 40 == pytest.approx(1.0, abs=1e-9)


def test_binomial_large_n_window():
    _, ledger = binomial_protocol(0.75, 10_000)
    per = ledger.net_out / 10_000
    assert 1 - H_QUARTER - 0.02 <= per <= 1 - H_QUARTER + 1e-12


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.5, 1.5, "abc", "1/0"])
def test_binomial_rejects_bad_a2(bad):
    with pytest.raises(OutOfRange):
        binomial_protocol(bad, 3)


def test_outcome_table_csv():
    outcomes, _ = binomial_protocol(0.5, 2)
    lines = outcomes_csv(outcomes).splitlines()
    assert lines[0] == "k,p_k,log2_dk,I_k"
    assert lines[2] == "1,0.5,1.0,1.0"


def test_multinomial_matches_binomial_for_qubits():
    _, led2 = multinomial_protocol([0.75, 0.25], 200)
    _, ledb = binomial_protocol(0.75, 200)
    assert led2.pure_qubits_out == pytest.approx(ledb.pure_qubits_out, abs=1e-9)
    assert led2.erasure_bits == pytest.approx(ledb.erasure_bits, abs=1e-9)


@pytest.mark.parametrize("probs", [[0.5, 0.3, 0.2], [0.4, 0.3, 0.2, 0.1], [0.5, 0.5, 0.0]])
def test_multinomial_net_yield(probs):
    n = 40
    outcomes, ledger = multinomial_protocol(probs, n)
    assert math.fsum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-10)
    expected = math.log2(len(probs)) - entropy(S(probs))
    assert ledger.net_out / n == pytest.approx(expected, abs=1e-10)


def test_multinomial_limits():
    with pytest.raises(OutOfRange):
        multinomial_protocol([0.2] * 5, 3)


def test_erasure_scaling():
    assert binomial_protocol(0.3, 1)[1].erasure_bits <= 1.0
    assert binomial_protocol(0.5, 1000)[1].erasure_bits / 1000 <= 0.01
    report = erasure_cost_scaling(0.75, [10 * 2**i for i in range(11)])
    assert report.bounded and report.decreasing


def test_ledger_rejects_negative_fields():
    with pytest.raises(ValueError):
        CostLedger(1, -1.0, 0.0, 0.0, 0.0)


def test_cycle_loss_tends_to_twice_entropy():
    s = S([0.75, 0.25])
    ledger = cycle_ledger(s, 2000)
    per = ledger.per_copy
    assert per["pureQubitsIn"] >= per["pureQubitsOut"]
    assert abs(per["pureQubitsIn"] - per["pureQubitsOut"] - 2 * H_QUARTER) <= 0.06


def test_rate_and_noiseless_cost_consistency():
    # one copy of a pure qubit buys info(b)^-1 copies of b with noise, fewer without
    b = S([0.75, 0.25])
    assert mixed_to_mixed_rate(Spectrum.pure(2), b) == pytest.approx(1 / (1 - H_QUARTER))
    assert preparation_cost(b) >= info(b)

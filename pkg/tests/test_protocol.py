import json

import numpy as np
import pytest

from noisyops.errors import AncillaTooSmall, DimensionMismatch, NotMajorized
from noisyops.protocol import (
    AddMaximallyMixed,
    NoChannel,
    NoisyProtocol,
    Permute,
    TraceOutAncilla,
    largest_remainder,
    measured_error,
    pad_to_common_qubits,
    random_channel,
    simulate,
    simulate_vector,
    synthesize,
    verify_no,
)
from noisyops.spectra import Spectrum, info, ky_fan_norms, more_mixed


def spec(v):
    return Spectrum.from_probabilities(v)


def majorized_pair(rng, d):
    p = rng.dirichlet(np.ones(d))
    w = rng.dirichlet(np.ones(int(rng.integers(1, 4))))
    q = sum(wi * p[rng.permutation(d)] for wi in w)
    return spec(p), spec(q)


def test_largest_remainder():
    assert largest_remainder([0.5, 0.5], 2) == (1, 1)
    assert largest_remainder([1 / 3] * 3, 10) == (4, 3, 3)
    assert sum(largest_remainder([0.15, 0.05, 0.6, 0.2], 1000)) == 1000


def test_identity_protocol():
    p = spec([0.5, 0.3, 0.2])
    proto = synthesize(p, p, 7)
    assert proto.error_bound == 0.0
    assert simulate(proto, p) == p


def test_pure_to_uniform_is_exact():
    proto = synthesize(spec([1.0, 0.0]), spec([0.5, 0.5]), 2)
    assert proto.group_sizes == (1, 1)
    assert sorted(perm.tolist() for _, perm in proto.mixture.terms) == [[0, 1], [1, 0]]
    assert proto.error_bound < 1e-14
    assert measured_error(proto, spec([1.0, 0.0]), spec([0.5, 0.5])) == 0.0
    assert np.array_equal(simulate_vector(proto, spec([1.0, 0.0])), [0.5, 0.5])
    # the explicit 4-entry diluted vector
    chan = proto.to_channel()
    assert np.array_equal(chan.steps[0].on_vector(np.array([1.0, 0.0])), [0.5, 0.5, 0.0, 0.0])
    assert np.array_equal(chan.apply([1.0, 0.0]), [0.5, 0.5])


def test_three_level_example():
    p, q = spec([0.5, 0.3, 0.2]), spec([0.4, 0.35, 0.25])
    proto = synthesize(p, q, 1000)
    err = measured_error(proto, p, q)
    assert err <= 0.01
    assert err <= proto.error_bound


def test_refusals():
    with pytest.raises(NotMajorized):
        synthesize(spec([0.5, 0.5]), spec([1.0, 0.0]), 10)
    with pytest.raises(DimensionMismatch):
        synthesize(spec([0.5, 0.5]), spec([0.5, 0.3, 0.2]), 10)
    p, q = spec([0.5, 0.3, 0.2]), spec([0.4, 0.35, 0.25])
    with pytest.raises(AncillaTooSmall):
        synthesize(p, q, 1)


def test_maximally_mixed_is_fixed():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p, q = majorized_pair(rng, 5)
        proto = synthesize(p, q, 64)
        assert np.allclose(simulate_vector(proto, np.full(5, 0.2)), 0.2, atol=1e-15)


def test_error_bound_and_law():
    rng = np.random.default_rng(1)
    means = {}
    for n_anc in (50, 100, 200, 400):
        errs = []
        local = np.random.default_rng(1)
        for _ in range(60):
            p, q = majorized_pair(local, int(local.integers(2, 7)))
            proto = synthesize(p, q, n_anc)
            e = measured_error(proto, p, q)
            assert e <= proto.error_bound
            errs.append(e)
        means[n_anc] = np.mean(errs)
    for a, b in ((50, 100), (100, 200), (200, 400)):
        assert means[b] <= 1.5 * means[a] / 2


def test_ky_fan_audit_and_completeness():
    rng = np.random.default_rng(2)
    for _ in range(300):
        d = int(rng.integers(2, 7))
        p, q = spec(rng.dirichlet(np.ones(d))), spec(rng.dirichlet(np.ones(d)))
        if more_mixed(q, p):
            out = simulate(synthesize(p, q, 128), p)
            assert np.all(ky_fan_norms(out).ky_fan <= ky_fan_norms(p).ky_fan + 1e-9)
        else:
            with pytest.raises(NotMajorized):
                synthesize(p, q, 128)


def test_channel_matches_symbolic_simulation():
    rng = np.random.default_rng(3)
    for _ in range(30):
        p, q = majorized_pair(rng, int(rng.integers(2, 6)))
        proto = synthesize(p, q, 16)
        assert np.allclose(proto.to_channel().apply(p), simulate_vector(proto, p), atol=1e-15)


def test_protocol_json_round_trip():
    p, q = spec([0.5, 0.3, 0.2]), spec([0.4, 0.35, 0.25])
    proto = synthesize(p, q, 100)
    obj = json.loads(json.dumps(proto.to_json()))
    assert set(obj) >= {"inputDim", "ancillaDim", "groups", "mixture"}
    back = NoisyProtocol.from_json(obj)
    assert np.allclose(simulate_vector(back, p), simulate_vector(proto, p))


def test_simulate_dimension_mismatch():
    proto = synthesize(spec([1.0, 0.0]), spec([0.5, 0.5]), 2)
    with pytest.raises(DimensionMismatch):
        simulate(proto, spec([0.5, 0.3, 0.2]))


def test_padding():
    a, b = pad_to_common_qubits(Spectrum.pure(2), spec([0.4, 0.3, 0.2, 0.1]))
    assert a.dim == b.dim == 4
    assert a.entries == [(0.5, 2), (0.0, 2)]
    assert b == spec([0.4, 0.3, 0.2, 0.1])
    c, d = pad_to_common_qubits(spec([0.7, 0.3]), spec([0.6, 0.4]))
    assert c == spec([0.7, 0.3]) and d == spec([0.6, 0.4])


def test_verify_examples():
    rng = np.random.default_rng(4)
    add = NoChannel(4, (AddMaximallyMixed.qubits(1),))
    samples = [rng.dirichlet(np.ones(4)) for _ in range(100)]
    for s in samples:
        assert info(spec(add.apply(s))) == pytest.approx(info(spec(s)), abs=1e-12)
    trace = NoChannel(4, (TraceOutAncilla.qubits(1),))
    for s in samples:
        drop = info(spec(s)) - info(spec(trace.apply(s)))
        assert -1e-12 <= drop <= 1 + 1e-12
    assert verify_no(trace, samples).ok


def test_random_channels_never_gain_information():
    rng = np.random.default_rng(5)
    for _ in range(300):
        chan = random_channel(rng, int(rng.integers(2, 9)))
        audit = verify_no(chan, n_samples=5, rng=rng)
        assert audit.ok, audit


def test_verify_flags_a_non_free_map():
    # replacing the state by a pure one is not a noisy operation
    class Purify:
        def out_dim(self, d):
            return d

        def on_vector(self, v):
            out = np.zeros_like(v)
            out[0] = 1.0
            return out

    audit = verify_no(NoChannel(2, (Purify(),)), [np.array([0.5, 0.5])])
    assert not audit.ok and audit.violations == 1


def test_channel_dimension_checks():
    with pytest.raises(DimensionMismatch):
        NoChannel(3, (TraceOutAncilla(2),))
    with pytest.raises(DimensionMismatch):
        NoChannel(3, (Permute([1, 0]),))
    with pytest.raises(ValueError):
        Permute([0, 0, 1])

import math

import hypothesis.strategies as st
import pytest
from hypothesis import given

from egocontext.core import (AlterId, AlterKind, EgoNetwork, EgoNetworkState, EngineConfig,
                             WeightUpdate)
from egocontext.social import (Channel, DeviceClass, SocialEvent, SocialWeightState,
                               ValidationError, extract_active_alters, filter_social_event,
                               social_feature_vector, social_weight)


def P(key):
    return AlterId(AlterKind.PERSON, key)


def bt(key, rssi, dc=DeviceClass.PERSONAL_MOBILE, t=0):
    return SocialEvent(t, Channel.BT_SIGHTING, P(key), rssi, dc)


def msg(key, ch=Channel.CALL, t=0):
    return SocialEvent(t, ch, P(key))


def test_strong_sighting_passes():
    assert filter_social_event(bt("a", -60), -65) is not None


def test_weak_sighting_filtered():
    assert filter_social_event(bt("a", -70), -65) is None


def test_threshold_is_inclusive():
    assert filter_social_event(bt("a", -65), -65) is not None


def test_non_personal_device_filtered():
    assert filter_social_event(bt("a", -40, DeviceClass.SMART_TV)) is None


def test_wearable_passes():
    assert filter_social_event(bt("a", -50, DeviceClass.WEARABLE)) is not None


def test_call_passes_untouched():
    e = msg("a")
    assert filter_social_event(e) is e


def test_sighting_requires_radio_fields():
    with pytest.raises(ValidationError):
        SocialEvent(0, Channel.WFD_SIGHTING, P("a"))
    with pytest.raises(ValidationError):
        SocialEvent(0, Channel.SMS, P("a"), rssi=-50)


@given(st.integers(-100, -20), st.sampled_from(list(DeviceClass)))
def test_filter_idempotent(rssi, dc):
    e = bt("a", rssi, dc)
    once = filter_social_event(e)
    twice = filter_social_event(once) if once is not None else None
    assert once == twice


def _state_with(lam, v, p):
    s = SocialWeightState(lam=lam)
    t = 0
    for _ in range(v):
        s.record(msg("a", Channel.OSN_COMMENT, t)); t += 1
    for _ in range(p):
        s.record(msg("a", Channel.SMS, t)); t += 1
    return s


def test_social_weight_examples():
    assert social_weight(_state_with(0.5, 4, 6), P("a")) == 5.0
    assert social_weight(_state_with(0.0, 3, 9), P("a")) == 9.0
    assert social_weight(_state_with(1.0, 3, 0), P("a")) == 3.0


def test_unknown_alter_weight_zero():
    assert social_weight(SocialWeightState(), P("nobody")) == 0.0


def test_lambda_range():
    with pytest.raises(ValidationError, match="lambda out of range"):
        SocialWeightState(lam=1.5)


def test_channel_sets():
    s = SocialWeightState(lam=0.25)
    for i, ch in enumerate(Channel):
        ev = (SocialEvent(i, ch, P("a"), -50, DeviceClass.PERSONAL_MOBILE)
              if ch.is_sighting else msg("a", ch, i))
        s.record(ev)
    assert s.virtual_weight(P("a")) == 3
    assert s.physical_weight(P("a")) == 4
    assert social_weight(s, P("a")) == 0.25 * 3 + 0.75 * 4


def test_sightings_debounced_within_window():
    s = SocialWeightState(window_ms=60_000)
    assert s.record(bt("a", -50, t=1_000))
    assert not s.record(bt("a", -50, t=30_000))
    assert s.record(msg("a", Channel.CALL, 40_000))
    assert s.record(bt("a", -50, t=61_000))
    assert s.physical_weight(P("a")) == 3


_events = st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from(list(Channel)),
                             st.integers(0, 200_000)), max_size=40)


def _materialize(items):
    out = []
    for key, ch, t in sorted(items, key=lambda x: x[2]):
        if ch.is_sighting:
            out.append(SocialEvent(t, ch, P(key), -50, DeviceClass.PERSONAL_MOBILE))
        else:
            out.append(SocialEvent(t, ch, P(key)))
    return out


@given(_events, st.integers(0, 40))
def test_counter_additivity(items, cut):
    evs = _materialize(items)
    whole = SocialWeightState()
    for e in evs:
        whole.record(e)
    split = SocialWeightState()
    for e in evs[:cut]:
        split.record(e)
    for e in evs[cut:]:
        split.record(e)
    assert whole.counters == split.counters


@given(_events, st.sampled_from("abc"), st.sampled_from(list(Channel)))
def test_weight_monotone_in_counters(items, key, ch):
    evs = _materialize(items)
    s = SocialWeightState()
    for e in evs:
        s.record(e)
    before = social_weight(s, P(key))
    s.counters.setdefault(P(key), __import__("collections").Counter())[ch] += 1
    assert social_weight(s, P(key)) >= before


@given(st.dictionaries(st.sampled_from("abcdefg"),
                       st.tuples(st.integers(0, 20), st.integers(0, 20)), min_size=1),
       st.integers(1, 9))
def test_ranking_invariant_under_scaling(counts, c):
    def weights(scale):
        s = SocialWeightState(lam=0.5)
        for k, (v, p) in counts.items():
            s.counters[P(k)] = __import__("collections").Counter(
                {Channel.OSN_REACTION: v * scale, Channel.CALL: p * scale})
        return {k: social_weight(s, P(k)) for k in counts}
    w1, wc = weights(1), weights(c)
    order = lambda w: sorted(w, key=lambda k: (-w[k], k))
    assert order(w1) == order(wc)


def test_extract_active_alters():
    assert extract_active_alters([msg("a"), msg("a", Channel.SMS), bt("b", -50)]) == {P("a"), P("b")}
    assert extract_active_alters([]) == set()


def test_extract_after_filtering_drops_weak_sightings():
    trace = [msg("a", t=1), bt("b", -80, t=2), bt("c", -90, t=3),
             msg("d", Channel.OSN_MENTION, t=4), bt("b", -70, t=5)]
    kept = [e for e in trace if filter_social_event(e, -65) is not None]
    assert extract_active_alters(kept) == {P("a"), P("d")}


def _network(layers):
    return EgoNetwork(tuple(frozenset(P(k) for k in l) for l in layers), 150, len(layers))


def test_feature_vector_three_alter_layout():
    net = _network([["x"], ["b"], ["c"], ["a"]])
    fv = social_feature_vector(net, {P("a"), P("b"), P("c")})
    assert fv.sc == (0.0, 1 / 3, 1 / 3, 1 / 3)
    assert fv.active_count == 3


def test_feature_vector_empty():
    fv = social_feature_vector(_network([["x"], [], [], []]), set())
    assert fv.sc == (0.0, 0.0, 0.0, 0.0) and fv.active_count == 0


def test_out_of_network_counts_outermost():
    fv = social_feature_vector(_network([["x"], [], [], []]), {P("x"), P("stranger")})
    assert fv.sc == (0.5, 0.0, 0.0, 0.5)


@given(st.sets(st.integers(0, 40), max_size=40), st.integers(1, 8))
def test_feature_vector_sums_to_one(active, l):
    s = EgoNetworkState(EngineConfig(eta=20, num_layers=l))
    s.update([WeightUpdate(P(f"p{i}"), float(i % 11), 1, 0) for i in range(30)])
    fv = social_feature_vector(s.network, {P(f"p{i}") for i in active})
    assert all(0.0 <= x <= 1.0 for x in fv.sc)
    if active:
        assert math.isclose(sum(fv.sc), 1.0, rel_tol=0, abs_tol=4 * math.ulp(1.0))
    else:
        assert sum(fv.sc) == 0

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treezeros.critical import attracting_interval, k_arc, lambda0
from treezeros.semigroup import (ExpansionCertificate, Word, backward_orbit, circle_preimages,
                                 escape_word, expansion_certificate, hat_orbit, measured_degrees,
                                 modulolemma_choice, recover_first_letter, word_degrees,
                                 word_derivative, words_distinct)
from treezeros.sphere import DomainError, ModelParams, map_eval, moebius_eval, unit

A0 = 2 * math.pi / 3


def P(alpha, d=2, b=2):
    return ModelParams(d, b, unit(alpha))


# ------------------------------------------------------------------ words and orbits

def test_word_expansion():
    assert Word((1, 2, 1)).plain(2) == (1, 1, 2, 1, 1)
    assert Word((1, 2), hat=False).plain(2) == (1, 2)
    assert Word((3, 2), hat=True).plain(3) == (3, 2, 1)


def test_hat_orbit_two_cycle_at_lambda0():
    pts, facs = hat_orbit(Word((2,) * 10), 1, P(A0))
    for j, z in enumerate(pts):
        assert abs(z - (1 if j % 2 == 0 else unit(A0))) < 1e-12
    prod = abs(facs[0] * facs[1])
    assert abs(prod - 4 / 3) < 1e-12


def test_hat_letter_is_composition():
    p = P(2.2)
    z = unit(0.3)
    pts, _ = hat_orbit(Word((1,)), z, p)
    assert abs(pts[1] - map_eval(p, 1, map_eval(p, 1, z))) < 1e-15


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=1, max_size=30), st.floats(0, 2 * math.pi),
       st.floats(0, 2 * math.pi))
def test_hat_orbit_stays_on_circle(letters, theta, alpha):
    pts, _ = hat_orbit(Word(letters), unit(theta), P(alpha, 3, "3/2"))
    assert max(abs(abs(z) - 1) for z in pts) < 1e-10


# ------------------------------------------------------------------ mod-2 lemma

def test_modulolemma_examples():
    assert modulolemma_choice(2, 1, 0.9, 0.5) == 1
    assert modulolemma_choice(3, 1, 0.5, 0.25) == 1
    with pytest.raises(DomainError) as e:
        modulolemma_choice(2, 1, 0.3, 0.5)
    assert e.value.code == "lemma-violation"


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_modulolemma_d2(a, b):
    s, t = sorted((a, b))
    if s == t:
        return
    assert modulolemma_choice(2, 1, t, s) == 1
    assert 1 < 1 + t - s / 2 < 2


def test_modulolemma_exhaustive_grid():
    n = 0
    for d in range(2, 9):
        for m in range(1, d):
            for i in range(50):
                t = (i + 0.5) / 50
                for j in range(50):
                    s = (j + 0.5) / 50
                    if s >= t:
                        continue
                    k = modulolemma_choice(d, m, t, s)
                    assert 1 <= k <= d - 1
                    assert 1 < math.fmod((2 * m - s) / d * k + t, 2.0) < 2
                    n += 1
    assert n == 34300


# ------------------------------------------------------------------ escape words

def _outside_I(theta, p):
    left, _, right = attracting_interval(p, probe=False).lifted
    o = (theta - left) % (2 * math.pi)
    return o <= 1e-12 or o >= right - left - 1e-12


def test_escape_word_at_lambda0():
    res = escape_word(0.0, P(A0), 20)
    assert res.word.letters == (2,) * 20
    for j, th in enumerate(res.orbit):
        target = 0.0 if j % 2 == 0 else A0
        assert abs(math.remainder(th - target, 2 * math.pi)) < 1e-9


def test_escape_word_from_minus_one():
    p = P(A0 + 0.01)
    res = escape_word(math.pi, p, 50)
    assert len(res.word) == 50
    assert all(_outside_I(th, p) for th in res.orbit)


def test_escape_word_restricted_from_lambda():
    a = A0 + 0.005
    res = escape_word(a, P(a), 50, restricted=True)
    for th in res.orbit:
        t = th % (2 * math.pi)
        assert not (1e-12 < t < a - 1e-12)


@pytest.mark.parametrize("restricted", [False, True])
def test_escape_words_random_starts(restricted):
    a = A0 + 0.005
    p = P(a)
    rng = random.Random(11)
    fails = 0
    for _ in range(100):
        if restricted:
            z = rng.uniform(a, 2 * math.pi)
        else:
            left, _, right = attracting_interval(p, probe=False).lifted
            z = right + rng.uniform(0, 2 * math.pi - (right - left))
        try:
            res = escape_word(z, p, 50, restricted=restricted)
        except DomainError:
            fails += 1
            continue
        assert res.lookahead_steps == 0
    assert fails == 0


@pytest.mark.parametrize("d,b", [(3, "3/2"), (4, "6/5")])
def test_escape_words_other_degrees(d, b):
    a = lambda0(d, b) + 0.005
    p = P(a, d, b)
    rng = random.Random(5)
    for _ in range(20):
        z = rng.uniform(a, 2 * math.pi)
        escape_word(z, p, 50, restricted=True)


def test_escape_word_errors():
    with pytest.raises(DomainError) as e:
        escape_word(0.0, P(1.0), 5)
    assert e.value.code == "wrong-regime"
    a = A0 + 0.005
    with pytest.raises(DomainError):
        escape_word(a / 2, P(a), 5, restricted=True)


# ------------------------------------------------------------------ certificates

CERT = dict(N=13, min_derivative=3.777529726621307, states=12719,
            argmin_start=0.010977072838437074)


@pytest.fixture(scope="module")
def cert22():
    return expansion_certificate(P(A0 + 0.005), kappa=3.0, max_N=40, grid=512)


def test_certificate_frozen(cert22):
    c = cert22
    assert c.N == CERT["N"] and c.N <= 40
    assert abs(c.min_derivative - CERT["min_derivative"]) < 1e-9
    assert c.min_derivative >= c.kappa
    assert c.states == CERT["states"]
    assert c.argmin_word == (2,) * 13
    assert abs(c.argmin_start - CERT["argmin_start"]) < 1e-12


def test_certificate_chain_rule(cert22):
    direct = word_derivative(Word(cert22.argmin_word), unit(cert22.argmin_start), P(A0 + 0.005))
    assert abs(direct - cert22.min_derivative) < 1e-8


def test_certificate_monotone_in_kappa(cert22):
    lower = expansion_certificate(P(A0 + 0.005), kappa=2.0, grid=512)
    assert lower.N <= cert22.N


def test_certificate_json_round_trip(cert22):
    assert ExpansionCertificate.from_json(cert22.to_json()) == cert22


def test_certificate_above_threshold():
    c = expansion_certificate(ModelParams(2, 4, unit(1.0)), kappa=1.2)
    assert c.N == 1 and abs(c.min_derivative - 1.2) < 1e-5 and c.min_derivative >= 1.2


@pytest.mark.parametrize("d,b", [(3, "3/2"), (4, "6/5")])
def test_certificate_other_degrees(d, b):
    c = expansion_certificate(P(lambda0(d, b) + 0.005, d, b), kappa=3.0)
    assert c.N == 13


def test_certificate_errors():
    with pytest.raises(DomainError):
        expansion_certificate(P(A0 + 0.005), kappa=1.0)
    with pytest.raises(DomainError) as e:
        expansion_certificate(P(A0 + 0.005), kappa=3.0, max_N=3)
    assert e.value.code == "no-certificate"


# ------------------------------------------------------------------ preimages and the Julia probe

@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * math.pi), st.integers(1, 3), st.floats(0, 2 * math.pi))
def test_circle_preimages(target, k, alpha):
    p = P(alpha, 3, 2)
    pre = circle_preimages(target, k, p)
    assert len(pre) == k
    for z in pre:
        assert abs(map_eval(p, k, unit(z)) - unit(target)) < 1e-12


def test_circle_preimages_examples():
    p = P(A0 + 0.1)
    for k in (1, 2):
        pre = circle_preimages(A0 + 0.1, k, p)
        assert any(abs(math.remainder(z, 2 * math.pi)) < 1e-12 for z in pre)


def test_backward_orbit_of_minus_one():
    a = A0 + 0.005
    p = P(a)
    left, _, right = attracting_interval(p, probe=False).lifted
    K = k_arc(p).lifted
    pts = backward_orbit(math.pi, p, 12)
    o = (pts - left) % (2 * math.pi)
    assert np.all((o <= 1e-9) | (o >= right - left - 1e-9))
    ok = (pts - K[0]) % (2 * math.pi)
    assert np.all(ok > K[1] - K[0])

    grid = right + (2 * math.pi - (right - left)) * (np.arange(1000) + 0.5) / 1000

    def radius(depth):
        q = np.sort(backward_orbit(math.pi, p, depth) % (2 * math.pi))
        i = np.searchsorted(q, grid % (2 * math.pi))
        lo, hi = q[(i - 1) % q.size], q[i % q.size]
        dist = np.minimum(np.abs(np.angle(np.exp(1j * (grid - lo)))),
                          np.abs(np.angle(np.exp(1j * (grid - hi)))))
        return dist

    r = [radius(n).max() for n in (6, 8, 10, 12)]
    assert all(x > y for x, y in zip(r, r[1:]))
    # frozen covering radii
    for got, want in zip(r, (0.405, 0.27, 0.19, 0.134)):
        assert abs(got - want) < 0.01


def test_julia_probe_away_from_endpoints():
    # 1e-3 coverage holds away from the endpoint 2-cycle of I (full statement is left unmet)
    a = A0 + 0.005
    p = P(a)
    left, _, right = attracting_interval(p, probe=False).lifted
    grid = right + (2 * math.pi - (right - left)) * (np.arange(1000) + 0.5) / 1000
    q = np.sort(backward_orbit(math.pi, p, 16) % (2 * math.pi))
    i = np.searchsorted(q, grid % (2 * math.pi))
    lo, hi = q[(i - 1) % q.size], q[i % q.size]
    dist = np.minimum(np.abs(np.angle(np.exp(1j * (grid - lo)))),
                      np.abs(np.angle(np.exp(1j * (grid - hi)))))
    away = (np.abs(np.angle(np.exp(1j * (grid - left)))) > 0.3) & \
           (np.abs(np.angle(np.exp(1j * (grid - right)))) > 0.3)
    assert away.sum() > 600
    assert dist[away].max() < 1e-3


def test_postcritical_orbits_land_in_K():
    a = A0 + 0.005
    p = P(a)
    K = k_arc(p).lifted
    rng = random.Random(3)
    worst = 0.0
    for start in (-2.0, -0.5):
        for _ in range(100):
            word = Word([rng.randint(1, 2) for _ in range(100)])
            pts, _ = hat_orbit(word, start, p)
            z = pts[-1]
            th = math.atan2(z.imag, z.real)
            off = (th - K[0]) % (2 * math.pi)
            if off > K[1] - K[0]:
                worst = max(worst, min(off - (K[1] - K[0]), 2 * math.pi - off))
            assert abs(abs(z) - 1) < 1e-6
    assert worst < 1e-6


# ------------------------------------------------------------------ degrees and freeness

def test_word_degrees():
    assert word_degrees((2, 2)) == (4, 7, 3)
    for k in (1, 2, 3):
        assert word_degrees((k,)) == (k, 1 + k, 1)
    with pytest.raises(DomainError):
        word_degrees(())


@pytest.mark.parametrize("word", [(2, 2), (3,), (1, 2), (2, 1, 3), (3, 3, 1, 2)])
def test_word_degrees_match_composition(word):
    assert measured_degrees(word) == word_degrees(word)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=6))
def test_recover_first_letter(letters):
    assert recover_first_letter(letters) == letters[0]


def test_words_distinct():
    assert words_distinct(3, 6) == (1092, 1092)

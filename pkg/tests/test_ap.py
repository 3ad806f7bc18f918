import pytest
from hypothesis import given, strategies as st

from apcf.ap import (
    Block,
    blocks_for_F,
    blocks_for_G,
    check_F_membership,
    check_G_membership,
    default_schedule,
    find_ap_runs,
    growth_constants,
    is_ap,
)
from apcf.errors import HorizonExceeded, NotStrictlyIncreasing, ScheduleTooDense, SpecConstraintViolated
from apcf.seqspec import parse, validate

increasing = st.lists(st.integers(1, 6), min_size=1, max_size=40).map(
    lambda gaps: [sum(gaps[:i + 1]) for i in range(len(gaps))])


def brute_runs(d, min_len):
    # every maximal window with constant positive difference
    out = []
    for i in range(len(d)):
        for j in range(i + min_len - 1, len(d)):
            w = d[i:j + 1]
            m = w[1] - w[0]
            if m < 1 or any(b - a != m for a, b in zip(w, w[1:])):
                continue
            left = i > 0 and d[i] - d[i - 1] == m
            right = j + 1 < len(d) and d[j + 1] - d[j] == m
            if not left and not right:
                out.append((i + 1, j - i + 1, d[i], m))
    return out


def test_is_ap():
    assert is_ap([3, 5, 7]) == 2
    assert is_ap([3, 5, 8]) is None
    assert is_ap([4]) == 1
    assert is_ap([4, 9]) == 5
    assert is_ap([4, 4]) is None


@given(increasing, st.integers(3, 6))
def test_runs_match_brute_force(d, min_len):
    got = [(r.start_index, r.length, r.first_value, r.difference) for r in find_ap_runs(d, min_len)]
    assert got == brute_runs(d, min_len)


def test_runs_share_boundary():
    runs = find_ap_runs([1, 2, 3, 5, 7])
    assert [(r.start_index, r.end_index) for r in runs] == [(1, 3), (3, 5)]


def test_schedule_example():
    nu = parse("nu(n) = n")
    assert default_schedule(nu, 6561) == [3, 9, 81, 6561]


def test_blocks_for_F():
    nu = parse("nu(n) = n")
    part = blocks_for_F(nu, [3, 9, 81])
    assert part.V[0] == Block(1, 3) and part.W[0] == Block(4, 5)
    assert part.V[1] == Block(6, 9) and part.W[1] == Block(10, 17)
    assert part.is_contiguous()
    assert part.locate(4) == (1, "W") and part.locate(6) == (2, "V")
    with pytest.raises(HorizonExceeded):
        part.locate(10**6)


def test_blocks_for_F_too_dense():
    with pytest.raises(ScheduleTooDense):
        blocks_for_F(parse("nu(n) = n"), [3, 5])


def test_blocks_for_G():
    sigma = parse("sigma(n) = n*(n+1)")
    part = blocks_for_G(sigma, 4)
    assert part.V[0] == Block(1, 2) and part.W[0].size == 0
    assert part.V[1] == Block(3, 6) and part.W[1] == Block(7, 7)
    assert part.V[2] == Block(8, 12) and part.W[2] == Block(13, 14)
    assert part.is_contiguous()


def test_blocks_for_G_bad_gap():
    with pytest.raises(SpecConstraintViolated):
        blocks_for_G(parse("sigma(n) = n + 10", check=False), 5)


@given(st.lists(st.integers(0, 5), min_size=12, max_size=12), st.integers(1, 4))
def test_valid_sigma_gives_gap_free_partition(extra, s1):
    # sigma_{n+1} - sigma_n = n + extra_n satisfies the gap condition
    vals = [s1]
    for n, e in enumerate(extra, 1):
        vals.append(vals[-1] + n + e)
    sigma = parse("sigma = [" + ",".join(map(str, vals)) + "]")
    assert validate(sigma, 10).ok
    part = blocks_for_G(sigma, len(vals))
    assert part.is_contiguous()


def test_membership():
    nu = parse("nu(n) = n")
    rep = check_F_membership([1, 2, 3, 10, 20, 30, 40], nu)
    assert rep.verdict == "witnessed" and [w[0] for w in rep.witnesses][:2] == [1, 2]
    assert check_F_membership([1, 3, 7, 20], nu).verdict in ("witnessed", "consistent")
    with pytest.raises(NotStrictlyIncreasing):
        check_F_membership([2, 1], nu)
    sigma = parse("sigma(n) = n*(n+1)")
    good = list(range(1, 30))
    assert check_G_membership(good, sigma).verdict == "consistent"
    # the window for n = 3 sits at positions 12..14
    bad = list(range(1, 13)) + [14, 17] + list(range(18, 30))
    rep = check_G_membership(bad, sigma)
    assert rep.verdict == "violated" and rep.first_violation == 3
    assert check_G_membership(bad, sigma, n_start=4).verdict == "consistent"


@pytest.mark.parametrize("text, value", [
    ("nu(n) = 2*n", 2.0),
    ("nu(n) = n + 5", 1.0),
    ("nu(n) = 3*n", 3.0),
    ("sigma(n) = n*(n+1)", 2.0),
    ("sigma(n) = n^2", 2.0),
    ("sigma(n) = n*(n-1)/2 + 1", 1.0),
])
def test_growth_constants(text, value):
    g = growth_constants(parse(text), 2000)
    assert g.value == pytest.approx(value, abs=1e-6)
    assert not g.divergent


@pytest.mark.parametrize("text", ["nu(n) = n^2", "sigma(n) = 2^n"])
def test_growth_divergent(text):
    g = growth_constants(parse(text), 400)
    assert g.divergent and g.value == float("inf")

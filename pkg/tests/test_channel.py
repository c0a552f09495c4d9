import numpy as np
import pytest

from cellfree import channel

# frozen by hand-evaluating the Hata-style formula at 1900 MHz, 15 m, 1.65 m
L_REFERENCE = 140.71508370390842


def test_place_nodes_within_area():
    rng = np.random.default_rng(0)
    geom = channel.place_nodes(1, 1, 1000.0, rng)
    assert geom.ap_positions.shape == (1, 2)
    assert geom.user_positions.shape == (1, 2)
    assert (geom.ap_positions >= 0).all() and (geom.ap_positions <= 1000).all()


def test_place_nodes_paper_scale():
    rng = np.random.default_rng(3)
    geom = channel.place_nodes(96, 8, 1000.0, rng)
    pts = np.vstack([geom.ap_positions, geom.user_positions])
    assert pts.shape == (104, 2)
    assert (pts >= 0).all() and (pts <= 1000).all()


def test_place_nodes_deterministic():
    a = channel.place_nodes(5, 4, 500.0, np.random.default_rng(42))
    b = channel.place_nodes(5, 4, 500.0, np.random.default_rng(42))
    np.testing.assert_array_equal(a.ap_positions, b.ap_positions)
    np.testing.assert_array_equal(a.user_positions, b.user_positions)


def test_path_loss_constant_reference_value():
    assert channel.path_loss_constant(1900.0, 15.0, 1.65) == pytest.approx(
        L_REFERENCE, abs=1e-9)


def test_path_loss_constant_monotone_in_carrier():
    grid = np.linspace(500.0, 3000.0, 40)
    vals = [channel.path_loss_constant(c, 15.0, 1.65) for c in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_path_loss_constant_pure():
    assert channel.path_loss_constant(1900.0, 15.0, 1.65) == \
        channel.path_loss_constant(1900.0, 15.0, 1.65)


def test_path_loss_floor_region():
    l = 140.0
    at_d0 = channel.path_loss_db(10.0, l, 10.0, 50.0)
    below = channel.path_loss_db(3.0, l, 10.0, 50.0)
    assert at_d0 == below
    assert channel.path_loss_db(0.0, l, 10.0, 50.0) == below


def test_path_loss_middle_branch_at_d1():
    # branch condition d > d1 is strict: the middle branch owns d = d1
    l = 140.0
    middle = -l - 15.0 * np.log10(50.0) - 20.0 * np.log10(50.0)
    assert channel.path_loss_db(50.0, l, 10.0, 50.0) == pytest.approx(middle)
    # and the far branch agrees there, so the model is continuous at d1
    far = -l - 35.0 * np.log10(50.0)
    assert middle == pytest.approx(far, abs=1e-12)


def test_path_loss_far_branch_hand_value():
    # d=100, d1=50, d0=10: -L - 35*log10(100) with L=140 gives exactly -210
    assert channel.path_loss_db(100.0, 140.0, 10.0, 50.0) == pytest.approx(
        -210.0, abs=1e-12)


def test_no_shadowing_inside_d1():
    rng = np.random.default_rng(5)
    ap = np.array([[0.0, 0.0], [10.0, 0.0]])
    users = np.array([[5.0, 0.0]])
    geom = channel.Geometry(ap_positions=ap, user_positions=users, area_side=20.0)
    a = channel.large_scale_fading(geom, 8.0, np.random.default_rng(5))
    b = channel.large_scale_fading(geom, 8.0, np.random.default_rng(6))
    np.testing.assert_allclose(a.beta, b.beta)  # all links closer than d1


def test_zero_shadowing_matches_pure_path_loss():
    rng = np.random.default_rng(7)
    geom = channel.place_nodes(6, 4, 1000.0, rng)
    ls = channel.large_scale_fading(geom, 0.0, rng)
    l_const = channel.path_loss_constant(1900.0, 15.0, 1.65)
    expected = 10.0 ** (channel.path_loss_db(ls.distances, l_const, 10.0, 50.0) / 10.0)
    np.testing.assert_allclose(ls.beta, expected, rtol=1e-12)


def test_shadowing_std_on_far_links():
    # empirical std of 10 log10(beta/upsilon) over far links ~ sigma_sh
    rng = np.random.default_rng(8)
    geom = channel.place_nodes(200, 100, 1000.0, rng)
    ls = channel.large_scale_fading(geom, 8.0, rng)
    l_const = channel.path_loss_constant(1900.0, 15.0, 1.65)
    ups_db = channel.path_loss_db(ls.distances, l_const, 10.0, 50.0)
    far = ls.distances > 50.0
    assert far.sum() > 10_000
    resid = 10.0 * np.log10(ls.beta[far]) - ups_db[far]
    assert resid.std() == pytest.approx(8.0, rel=0.05)
    assert ls.beta.min() > 0.0


def test_channel_split_identity_and_perfect_csi(realization):
    chset, _, _ = realization
    np.testing.assert_array_equal(chset.g_true, chset.g_hat + chset.g_err)

    rng = np.random.default_rng(11)
    geom = channel.place_nodes(4, 2, 1000.0, rng)
    ls = channel.large_scale_fading(geom, 8.0, rng)
    perfect = channel.draw_channel_set(ls, 1.0, rng)
    assert np.all(perfect.g_err == 0)
    np.testing.assert_array_equal(perfect.g_true, perfect.g_hat)
    blind = channel.draw_channel_set(ls, 0.0, rng)
    assert np.all(blind.g_hat == 0)


def test_channel_split_moments():
    # E|ghat|^2 -> n*beta and E|gerr|^2 -> (1-n)*beta, checked at 3 sigma
    rng = np.random.default_rng(12)
    beta = np.array([[2.0, 0.5], [1.0, 4.0]])
    ls = channel.LargeScale(beta=beta, distances=np.full((2, 2), 100.0))
    n, draws = 0.9, 20_000
    acc_hat = np.zeros_like(beta)
    acc_err = np.zeros_like(beta)
    for _ in range(draws):
        ch = channel.draw_channel_set(ls, n, rng)
        acc_hat += np.abs(ch.g_hat) ** 2
        acc_err += np.abs(ch.g_err) ** 2
    mean_hat = acc_hat / draws
    mean_err = acc_err / draws
    # |g|^2 of CN(0, v) is exponential with std v: 3-sigma estimator band
    tol_hat = 3.0 * n * beta / np.sqrt(draws)
    tol_err = 3.0 * (1 - n) * beta / np.sqrt(draws)
    assert (np.abs(mean_hat - n * beta) < tol_hat).all()
    assert (np.abs(mean_err - (1 - n) * beta) < tol_err).all()


def test_draw_channel_set_rejects_bad_fraction():
    rng = np.random.default_rng(1)
    ls = channel.LargeScale(beta=np.ones((2, 2)), distances=np.ones((2, 2)))
    with pytest.raises(ValueError):
        channel.draw_channel_set(ls, 1.5, rng)


def test_channel_set_bit_identical_under_seed():
    def build(seed):
        rng = np.random.default_rng(seed)
        geom = channel.place_nodes(8, 3, 1000.0, rng)
        ls = channel.large_scale_fading(geom, 8.0, rng)
        return channel.draw_channel_set(ls, 0.95, rng)

    a, b = build(77), build(77)
    np.testing.assert_array_equal(a.g_true, b.g_true)
    np.testing.assert_array_equal(a.g_hat, b.g_hat)
    np.testing.assert_array_equal(a.g_err, b.g_err)

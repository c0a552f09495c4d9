import numpy as np
import pytest

from cellfree import channel, precoding, simulate


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_realization(m_aps, u_users, n, snr_db, seed, area=1000.0):
    """Channel + power parameters for one realization at a target SNR."""
    sc = simulate.Scenario(m_aps=m_aps, u_users=u_users)
    gen = np.random.default_rng(seed)
    geom = channel.place_nodes(m_aps, u_users, area, gen)
    ls = channel.large_scale_fading(geom, 8.0, gen)
    chset = channel.draw_channel_set(ls, n, gen)
    rho_f = simulate.snr_to_rho_f(10.0 ** (snr_db / 10.0), chset.g_hat,
                                  sc.sigma_w2, u_users)
    params = precoding.PowerParams.for_network(rho_f, m_aps, u_users,
                                               sc.sigma_w2)
    return chset, ls, params


@pytest.fixture
def realization():
    return make_realization(16, 3, 0.95, 20.0, seed=99)

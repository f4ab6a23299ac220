# SPDX-License-Identifier: Apache-2.0
#
# jbb: joint beamforming and broadcasting for massive MIMO downlinks
# ------------------------------------------------------------------------
#
# Independent reference values frozen into the C++ unit tests. Written from the
# model definitions with mpmath/scipy only; rerun to regenerate.

import mpmath as mp

mp.mp.dps = 40


def db(x):
    return mp.mpf(10) ** (mp.mpf(x) / 10)


def gamma_k(beta, rho_u, tau):
    return tau * rho_u * beta**2 / (1 + tau * rho_u * beta)


def e_log2_1p_gamma(shape, a):
    f = lambda y: mp.log(1 + a * y) * y ** (shape - 1) * mp.e ** (-y) / mp.gamma(shape)
    return mp.quad(f, [0, 1, 10, 50, mp.inf]) / mp.log(2)


def o_terms(beta_o, rho_o, tau_po, mp_dim, rho_b_eff):
    d = mp_dim + tau_po * rho_o * beta_o
    var_hat = tau_po * rho_o * beta_o**2 / d
    var_tilde = mp_dim * beta_o / d
    v1 = rho_o * var_tilde
    v2 = rho_b_eff * beta_o
    return var_hat, v1, v2


def o_rate_exact(beta_o, rho_o, tau_po, mp_dim, rho_b_eff):
    var_hat, v1, v2 = o_terms(beta_o, rho_o, tau_po, mp_dim, rho_b_eff)
    a = rho_o / mp_dim * var_hat / (v1 + v2 + 1)
    return e_log2_1p_gamma(mp_dim, a)


def o_rate_bound(beta_o, rho_o, tau_po, mp_dim, rho_b_eff):
    var_hat, v1, v2 = o_terms(beta_o, rho_o, tau_po, mp_dim, rho_b_eff)
    return mp.log(1 + (mp_dim - 1) / mp.mpf(mp_dim) * rho_o * var_hat / (v1 + v2 + 1), 2)


def zf_maxmin(M, K, betas, gammas, rho_b, rho_o):
    s = sum(((rho_b + rho_o) * (b - g) + 1) / g for b, g in zip(betas, gammas))
    return mp.log(1 + (M - K) * rho_b / s, 2)


def mr_maxmin(M, betas, gammas, rho_b, rho_o):
    s = sum((rho_b * b + rho_o * (b - g) + 1) / g for b, g in zip(betas, gammas))
    return mp.log(1 + M * rho_b / s, 2)


def main():
    out = {}
    rho_u = db(-3)
    g = gamma_k(1, rho_u, 10)
    out["gamma_fig_a"] = g
    out["gamma_half"] = gamma_k(mp.mpf("0.5"), db(0), 30)

    rho_b, rho_o = db(-4), db(7)
    rho_bp = rho_b * 245 / mp.mpf(235)
    out["rho_b_prime_fig_a"] = rho_bp
    gross = zf_maxmin(100, 1, [1], [g], rho_bp, rho_o)
    out["zf_gross_fig_a"] = gross
    out["zf_net_fig_a"] = mp.mpf("0.47") * gross
    out["mr_gross_fig_a"] = mr_maxmin(100, [1], [g], rho_bp, rho_o)

    betas = [1, mp.mpf("0.3"), mp.mpf("0.05")]
    gammas = [gamma_k(b, rho_u, 30) for b in betas]
    out["zf_gross_three"] = zf_maxmin(100, 3, betas, gammas, db(5), db(3))
    out["mr_gross_three"] = mr_maxmin(100, betas, gammas, db(5), db(3))

    out["o_exact_fig_a"] = o_rate_exact(1, rho_o, 10, 7, rho_bp)
    out["o_bound_fig_a"] = o_rate_bound(1, rho_o, 10, 7, rho_bp)
    var_hat, v1, v2 = o_terms(1, rho_o, 10, 7, rho_bp)
    out["signal_db_fig_a"] = 10 * mp.log10(mp.mpf(6) / 7 * rho_o * var_hat)
    out["v1_db_fig_a"] = 10 * mp.log10(v1)
    out["v2_db_fig_a"] = 10 * mp.log10(v2)
    out["o_exact_oa_20db"] = o_rate_exact(mp.mpf("0.1"), db(20), 10, 7, 0)

    out["e_log2_gamma_1_1"] = e_log2_1p_gamma(1, 1)  # = e E1(1) / ln 2
    out["e_log2_gamma_1_1_closed"] = mp.e * mp.expint(1, 1) / mp.log(2)
    out["e_log2_gamma_7_0p3"] = e_log2_1p_gamma(7, mp.mpf("0.3"))
    out["e_log2_gamma_30_5"] = e_log2_1p_gamma(30, 5)

    # OA power reaching a gross max-min rate R at split eps (ZF, K = 1, rho_o = 0)
    R, eps = gross, mp.mpf("0.45")
    x = 2 ** (R / (1 - eps)) - 1
    out["oa_rho_b_fig_a"] = x / g / ((100 - 1) - x * (1 - g) / g)

    for k, v in out.items():
        print(f"{k} = {mp.nstr(v, 17)}")


if __name__ == "__main__":
    main()

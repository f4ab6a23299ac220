// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/closedform.hpp"
#include "jbb/errors.hpp"
#include "jbb/estimation.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace jbb;

// reference values: tests/oracles/oracles.py

namespace
{
SystemConfig fig_a()
{
    SystemConfig c;
    c.M = 100;
    c.K = 1;
    c.Mp = 7;
    c.tau_c = 500;
    c.tau_pu = 10;
    c.tau_po = 10;
    c.rho_u = db_to_linear(-3.0);
    return c;
}

double db(double x)
{
    return db_to_linear(x);
}
} // namespace

TEST_CASE("uplink estimate quality")
{
    CHECK(gamma_k(1.0, db(-3.0), 10) == doctest::Approx(0.8336624691834381).epsilon(1e-13));
    CHECK(gamma_k(0.5, 1.0, 30) == doctest::Approx(0.46875).epsilon(1e-14));
    CHECK(gamma_k(1.0, 0.0, 10) == 0.0);
    CHECK(gamma_k(1.0, 0.5, 10) == doctest::Approx(5.0 / 6.0)); // tau rho beta = 5

    const std::vector<double> beta{1.0, 0.3, 2.0};
    const std::vector<double> g = estimation_quality(beta, 0.7, 12);
    REQUIRE(g.size() == 3);
    for (std::size_t k = 0; k < 3; ++k)
    {
        CHECK(g[k] < beta[k]);
        CHECK(g[k] == doctest::Approx(gamma_k(beta[k], 0.7, 12)));
    }
}

TEST_CASE("O-terminal estimate statistics partition the channel variance")
{
    for (double rho_o : {0.01, 1.0, 5.0, 1e3})
        for (double beta_o : {0.1, 1.0, 10.9})
        {
            const OEstimationStats s = o_estimation_stats(beta_o, rho_o, 10, 7);
            CHECK(s.var_hat + s.var_tilde == doctest::Approx(beta_o).epsilon(1e-13));
            CHECK(s.var_hat == doctest::Approx(10 * rho_o * beta_o * beta_o / (7 + 10 * rho_o * beta_o)));
        }
}

TEST_CASE("max-min rates against the reference")
{
    const SystemConfig c = fig_a();
    const double g = gamma_k(1.0, c.rho_u, 10);
    const std::vector<double> beta{1.0}, gamma{g};
    const double rho_bp = rho_b_prime(db(-4.0), c.frame(), c.tau_po);
    CHECK(rho_bp == doctest::Approx(0.4150479012153482).epsilon(1e-13));
    CHECK(maxmin_rate(c, beta, gamma, rho_bp, db(7.0), Precoder::ZF) ==
          doctest::Approx(4.2481815692839164).epsilon(1e-12));
    CHECK(maxmin_rate(c, beta, gamma, rho_bp, db(7.0), Precoder::MR) ==
          doctest::Approx(4.034482962983191).epsilon(1e-12));

    SystemConfig c3 = c;
    c3.K = 3;
    c3.tau_pu = 30;
    const std::vector<double> b3{1.0, 0.3, 0.05};
    const std::vector<double> g3 = estimation_quality(b3, c.rho_u, 30);
    CHECK(maxmin_rate(c3, b3, g3, db(5.0), db(3.0), Precoder::ZF) ==
          doctest::Approx(2.6099348892281274).epsilon(1e-12));
    CHECK(maxmin_rate(c3, b3, g3, db(5.0), db(3.0), Precoder::MR) ==
          doctest::Approx(2.4712053226759305).epsilon(1e-12));
}

TEST_CASE("max-min control equalizes the per-terminal rates")
{
    SystemConfig c = fig_a();
    c.K = 5;
    c.tau_pu = 20;
    const std::vector<double> beta{1.0, 0.2, 3.0, 0.05, 0.7};
    const std::vector<double> gamma = estimation_quality(beta, c.rho_u, c.tau_pu);
    for (Precoder p : {Precoder::MR, Precoder::ZF})
    {
        const MaxMinResult mm = maxmin_control(c, beta, gamma, 2.0, 4.0, p);
        double sum = 0.0;
        for (std::size_t k = 0; k < beta.size(); ++k)
        {
            sum += mm.control.eta[k];
            CHECK(rate_b(p, c, beta[k], gamma[k], mm.control.eta[k], 2.0, 4.0) ==
                  doctest::Approx(mm.rate).epsilon(1e-12));
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(maxmin_rate(c, beta, gamma, 2.0, 4.0, p) == doctest::Approx(mm.rate).epsilon(1e-14));
    }
}

TEST_CASE("prelogs")
{
    const SystemConfig c = fig_a();
    CHECK(prelog(c, Scheme::JBB) == doctest::Approx(0.49));
    CHECK(prelog(c, Scheme::OA) == doctest::Approx(0.49));
    CHECK(prelog(c, Scheme::JBBPrime) == doctest::Approx(0.47));
    CHECK(o_prelog(c) == doctest::Approx(0.47));
    CHECK(net_sum_b(c, 10.0, Scheme::JBBPrime) == doctest::Approx(4.7));
}

TEST_CASE("O-terminal rate and its terms at the reference point")
{
    const SystemConfig c = fig_a();
    const double rho_bp = rho_b_prime(db(-4.0), c.frame(), c.tau_po);
    const ORateBreakdown b = o_rate_breakdown(c, 1.0, db(7.0), rho_bp);
    CHECK(b.rate_exact == doctest::Approx(1.6164171672146299).epsilon(1e-9));
    REQUIRE(b.rate_bound.has_value());
    CHECK(*b.rate_bound == doctest::Approx(1.5147704358473996).epsilon(1e-12));
    CHECK(linear_to_db(b.signal) == doctest::Approx(5.7627471823150172).epsilon(1e-12));
    CHECK(linear_to_db(b.est_error) == doctest::Approx(-2.1168045212362826).epsilon(1e-12));
    CHECK(linear_to_db(b.b_interference) == doctest::Approx(-3.819017779072038).epsilon(1e-12));
    CHECK(b.net_rate == doctest::Approx(0.47 * b.rate_exact));

    CHECK(o_rate_exact(c, 0.1, db(20.0), 0.0) == doctest::Approx(2.6596397064129097).epsilon(1e-9));
}

TEST_CASE("O-terminal rate edge cases")
{
    SystemConfig c = fig_a();
    CHECK(o_rate_exact(c, 1.0, 0.0, 1.0) == 0.0);
    CHECK(o_rate_bound(c, 1.0, 0.0, 1.0) == 0.0);
    // decreasing in interference, increasing in broadcast power and gain
    CHECK(o_rate_exact(c, 1.0, 5.0, 2.0) < o_rate_exact(c, 1.0, 5.0, 1.0));
    CHECK(o_rate_exact(c, 1.0, 6.0, 1.0) > o_rate_exact(c, 1.0, 5.0, 1.0));
    CHECK(o_rate_exact(c, 2.0, 5.0, 1.0) > o_rate_exact(c, 1.0, 5.0, 1.0));

    c.Mp = 1;
    c.tau_po = 1;
    CHECK_THROWS_AS(o_rate_bound(c, 1.0, 1.0, 0.0), DomainError);
    const ORateBreakdown b = o_rate_breakdown(c, 1.0, 1.0, 0.0);
    CHECK_FALSE(b.rate_bound.has_value());
    CHECK(b.rate_exact > 0.0);
}

TEST_CASE("Jensen bound lies below the exact rate on a grid")
{
    const SystemConfig c = fig_a();
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
        {
            const double rho_o = db(-10.0 + 4.0 * i);
            const double beta_o = db(-20.0 + 3.5 * j);
            CHECK(o_rate_bound(c, beta_o, rho_o, 0.5) <= o_rate_exact(c, beta_o, rho_o, 0.5) + 1e-12);
        }
}

TEST_CASE("leakage variance and zero broadcast power")
{
    CHECK(leakage_var(1.0, 0.8, 5.0) == doctest::Approx(1.0));
    const SystemConfig c = fig_a();
    const double g = gamma_k(1.0, c.rho_u, 10);
    // without broadcast power JBB and OA per-interval rates coincide
    for (Precoder p : {Precoder::MR, Precoder::ZF})
        CHECK(rate_b(p, c, 1.0, g, 1.0, 3.0, 0.0) == doctest::Approx(oa_maxmin_rate(c, std::vector<double>{1.0},
                                                                                       std::vector<double>{g}, 3.0,
                                                                                       0.0, p)));
}

TEST_CASE("OA required power inverts the OA max-min rate")
{
    const SystemConfig c = fig_a();
    const std::vector<double> beta{1.0}, gamma{gamma_k(1.0, c.rho_u, 10)};
    const double rho = oa_required_rho_b(c, beta, gamma, 4.2481815692839164, 0.45, Precoder::ZF);
    CHECK(rho == doctest::Approx(4.4269188330289103).epsilon(1e-12));
    CHECK(oa_maxmin_rate(c, beta, gamma, rho, 0.45, Precoder::ZF) == doctest::Approx(4.2481815692839164));
    CHECK(oa_required_rho_b(c, beta, gamma, 0.0, 0.3, Precoder::ZF) == 0.0);
    CHECK_THROWS_AS(oa_required_rho_b(c, beta, gamma, 1.0, 1.0, Precoder::ZF), InfeasibleTargetError);
    CHECK_THROWS_AS(oa_required_rho_b(c, beta, gamma, 50.0, 0.5, Precoder::ZF), InfeasibleTargetError);
    CHECK_THROWS_AS(oa_required_rho_b(c, beta, gamma, 1.0, -0.1, Precoder::ZF), ValidationError);
}

TEST_CASE("evaluate_b applies the scheme-specific prelog and powers")
{
    const SystemConfig c = fig_a();
    const std::vector<double> beta{1.0}, gamma{gamma_k(1.0, c.rho_u, 10)};
    const RateReport r = evaluate_b(c, beta, gamma, {db(-4.0), db(7.0), Scheme::JBBPrime}, Precoder::ZF);
    CHECK(r.net_sum_b == doctest::Approx(1.9966453375634407).epsilon(1e-12));
    CHECK(r.rho_b_eff == doctest::Approx(0.4150479012153482));

    const RateReport oa = evaluate_b(c, beta, gamma, {2.0, 99.0, Scheme::OA}, Precoder::ZF, 0.4);
    CHECK(oa.rho_o_eff == 0.0);
    CHECK(oa.maxmin_rate == doctest::Approx(0.6 * maxmin_rate(c, beta, gamma, 2.0, 0.0, Precoder::ZF)));
    CHECK(oa.net_sum_b == doctest::Approx(0.49 * oa.maxmin_rate));

    const RateReport zero = evaluate_b(c, beta, gamma, {0.0, 0.0, Scheme::JBB}, Precoder::ZF);
    CHECK(zero.net_sum_b == 0.0);
    CHECK_THROWS_AS(maxmin_rate(c, std::vector<double>{}, std::vector<double>{}, 1.0, 1.0, Precoder::ZF),
                    ValidationError);
}

// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/errors.hpp"
#include "jbb/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace jbb;

namespace
{
Link fig_a_link(double beta_o = 1.0)
{
    SystemConfig c;
    c.M = 100;
    c.K = 1;
    c.Mp = 7;
    c.tau_c = 500;
    c.tau_pu = 10;
    c.tau_po = 10;
    c.rho_u = db_to_linear(-3.0);
    return make_link(c, PathLossProfile{{1.0}, beta_o}, Precoder::ZF);
}
} // namespace

TEST_CASE("ratio grid spacing")
{
    const std::vector<double> g = ratio_grid(-10.0, 20.0, 121);
    REQUIRE(g.size() == 121);
    CHECK(linear_to_db(g.front()) == doctest::Approx(-10.0));
    CHECK(linear_to_db(g.back()) == doctest::Approx(20.0));
    CHECK(linear_to_db(g[4]) == doctest::Approx(-9.0));
}

TEST_CASE("traced points reproduce their targets")
{
    const Link link = fig_a_link();
    const std::vector<double> ratios = ratio_grid(-10.0, 20.0, 31);
    const Curve b = trace_b_curve(link, 2.0, ratios, 2);
    const OCurves o = trace_o_curves(link, 0.75, ratios, 2);
    int feasible = 0;
    for (const CurvePoint &p : b)
    {
        if (!p.feasible)
            continue;
        ++feasible;
        CHECK(jbb_prime_net_b(link, p.rho_b(), p.rho_o()) == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(p.rho_b() + p.rho_o() == doctest::Approx(p.rho_d).epsilon(1e-14));
        CHECK(p.rho_o() / p.rho_b() == doctest::Approx(p.ratio).epsilon(1e-12));
    }
    CHECK(feasible > 20);
    for (const CurvePoint &p : o.jbb_prime_exact)
        if (p.feasible)
            CHECK(jbb_prime_net_o(link, p.rho_b(), p.rho_o()) == doctest::Approx(0.75).epsilon(1e-6));
    for (const CurvePoint &p : o.jbb_prime_bound)
        if (p.feasible)
            CHECK(jbb_prime_net_o(link, p.rho_b(), p.rho_o(), ORateKind::Bound) ==
                  doctest::Approx(0.75).epsilon(1e-6));
    for (const CurvePoint &p : o.oa_exact)
        if (p.feasible)
        {
            REQUIRE(p.oa.has_value());
            CHECK(p.oa->o_rate == doctest::Approx(0.75).epsilon(1e-6));
        }
}

TEST_CASE("bound curves need more power than exact curves")
{
    const Link link = fig_a_link();
    const std::vector<double> ratios = ratio_grid(0.0, 20.0, 11);
    const OCurves o = trace_o_curves(link, 0.75, ratios, 1);
    for (std::size_t i = 0; i < ratios.size(); ++i)
    {
        if (o.jbb_prime_exact[i].feasible && o.jbb_prime_bound[i].feasible)
            CHECK(o.jbb_prime_bound[i].rho_d >= o.jbb_prime_exact[i].rho_d);
        if (o.oa_exact[i].feasible && o.oa_bound[i].feasible)
            CHECK(o.oa_bound[i].rho_d >= o.oa_exact[i].rho_d * (1 - 1e-9));
    }
}

TEST_CASE("B-target power is smallest without broadcast")
{
    const Link link = fig_a_link();
    const std::vector<double> ratios = ratio_grid(-10.0, 20.0, 13);
    const Curve b = trace_b_curve(link, 2.0, ratios, 1);
    REQUIRE(b.front().feasible);
    for (const CurvePoint &p : b)
        if (p.feasible)
            CHECK(p.rho_b() >= b.front().rho_b() * (1 - 1e-9));
}

TEST_CASE("unreachable targets are flagged rather than thrown")
{
    const Link link = fig_a_link();
    CHECK_FALSE(solve_b_rho_d(link, 1e3, 1.0).has_value());
    CHECK_FALSE(solve_o_rho_d(link, 1e3, 1.0, ORateKind::Exact).has_value());
    const Curve b = trace_b_curve(link, 1e3, ratio_grid(0.0, 10.0, 3), 1);
    for (const CurvePoint &p : b)
        CHECK_FALSE(p.feasible);
}

TEST_CASE("OA matching")
{
    const Link link = fig_a_link();
    const OperatingPoint jbb{db_to_linear(-2.1), db_to_linear(10.3), Scheme::JBBPrime};
    const OAMatch m = match_oa(link, jbb, 0.45);
    REQUIRE(m.feasible);
    CHECK((1 - m.epsilon) * m.rho_b_oa + m.epsilon * m.rho_o_oa == doctest::Approx(jbb.rho_d()).epsilon(1e-9));
    CHECK(m.rho_o_oa >= 0.0);
    CHECK(m.o_rate == doctest::Approx(0.75).epsilon(0.02));

    // same gross B-terminal rate as JBB'
    const double gross = maxmin_rate(link.cfg, link.profile.beta, link.gamma,
                                     rho_b_prime(jbb.rho_b, link.cfg.frame(), link.cfg.tau_po), jbb.rho_o,
                                     link.precoder);
    CHECK(oa_maxmin_rate(link.cfg, link.profile.beta, link.gamma, m.rho_b_oa, m.epsilon, link.precoder) ==
          doctest::Approx(gross).epsilon(1e-10));

    const OAMatch none = match_oa(link, jbb, 0.0);
    CHECK_FALSE(none.feasible);
    CHECK(none.o_rate == 0.0);
    CHECK_THROWS_AS(match_oa(link, jbb, 1.0), ValidationError);
    CHECK_THROWS_AS(match_oa(link, jbb, -0.1), ValidationError);
}

TEST_CASE("energy identity on a grid of matches")
{
    const Link link = fig_a_link();
    for (double rb_db : {-6.0, -2.0, 3.0})
        for (double ro_db : {0.0, 8.0, 15.0})
            for (double eps : {0.05, 0.3, 0.6, 0.9})
            {
                const OperatingPoint p{db_to_linear(rb_db), db_to_linear(ro_db), Scheme::JBBPrime};
                const OAMatch m = match_oa(link, p, eps);
                if (!m.feasible)
                {
                    CHECK(m.o_rate == 0.0);
                    continue;
                }
                CHECK((1 - eps) * m.rho_b_oa + eps * m.rho_o_oa == doctest::Approx(p.rho_d()).epsilon(1e-9));
                CHECK(m.rho_o_oa >= 0.0);
            }
}

TEST_CASE("epsilon optimization beats every coarse grid point")
{
    const Link link = fig_a_link();
    const OperatingPoint p{db_to_linear(-2.1), db_to_linear(10.3), Scheme::JBBPrime};
    const OAMatch best = optimize_epsilon(link, p);
    REQUIRE(best.feasible);
    for (int i = 1; i < 20; ++i)
        CHECK(match_oa(link, p, i * 0.05).o_rate <= best.o_rate + 1e-12);

    const OperatingPoint hopeless{1e-6, 1e-6, Scheme::JBBPrime};
    const OAMatch none = optimize_epsilon(link, hopeless);
    if (!none.feasible)
        CHECK(none.o_rate == 0.0);
}

TEST_CASE("intersection of crossing and identical curves")
{
    const std::vector<double> ratios = ratio_grid(0.0, 10.0, 11);
    Curve a, b;
    for (std::size_t i = 0; i < ratios.size(); ++i)
    {
        const double x = linear_to_db(ratios[i]);
        a.push_back({CurveId::BJbbPrime, ratios[i], db_to_linear(2.0 + 0.5 * x), true, 0.0, {}});
        b.push_back({CurveId::OJbbPrimeExact, ratios[i], db_to_linear(8.0 - 0.5 * x), true, 0.0, {}});
    }
    const Intersection ix = find_intersection(a, b);
    REQUIRE(ix.found);
    CHECK(linear_to_db(ix.ratio) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(linear_to_db(ix.rho_d) == doctest::Approx(5.0).epsilon(1e-12));

    const Intersection same = find_intersection(a, a);
    REQUIRE(same.found);
    CHECK(same.ratio == ratios.front());

    Curve c = b;
    for (CurvePoint &p : c)
        p.rho_d *= 1e3;
    CHECK_FALSE(find_intersection(a, c).found);
}

TEST_CASE("uplink SNR sweep")
{
    SystemConfig c;
    c.M = 100;
    c.K = 10;
    c.tau_pu = 30;
    const PathLossProfile profile = drop_terminals(CellGeometry{}, 10, 3, 1.0);
    std::vector<double> rho_u;
    for (int i = 0; i <= 12; ++i)
        rho_u.push_back(db_to_linear(-10.0 + 2.5 * i));
    for (double rho_o : {0.0, 10.0})
    {
        const std::vector<SweepPoint> s = sweep_uplink_snr(c, profile, Precoder::ZF, 20.0, rho_o, rho_u);
        REQUIRE(s.size() == rho_u.size());
        for (std::size_t i = 1; i < s.size(); ++i)
        {
            REQUIRE(s[i].feasible);
            CHECK(s[i].rho_u > s[i - 1].rho_u);
            CHECK(s[i].rho_b <= s[i - 1].rho_b * (1 + 1e-9));
        }
        CHECK(s.back().rho_b < s.front().rho_b);
    }
    // single point
    CHECK(sweep_uplink_snr(c, profile, Precoder::ZF, 20.0, 0.0, {1.0}).size() == 1);
    CHECK_THROWS_AS(sweep_uplink_snr(c, profile, Precoder::ZF, 20.0, 0.0, {1.0}, Scheme::OA), ValidationError);
}

// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/commands.hpp"

#include "jbb/closedform.hpp"
#include "jbb/errors.hpp"
#include "jbb/estimation.hpp"
#include "jbb/montecarlo.hpp"
#include "jbb/parallel.hpp"
#include "jbb/solver.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace jbb
{

using json = nlohmann::json;

std::string_view tool_version()
{
    return JBB_VERSION;
}

namespace
{

std::string num(double x, int precision = 6)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x < 0 ? "-inf" : "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, x);
    return buf;
}

double to_db(double x)
{
    return x > 0.0 ? linear_to_db(x) : -INFINITY;
}

// JSON has no infinities; they are written as strings.
json jnum(double x)
{
    if (std::isinf(x))
        return x < 0 ? "-inf" : "inf";
    if (std::isnan(x))
        return nullptr;
    return x;
}

json jdb(double linear)
{
    return jnum(to_db(linear));
}

struct Meta
{
    std::string command;
    std::string hash;
    std::uint64_t seed;
};

json meta_json(const Meta &m)
{
    return {{"tool", "jbbctl"},
            {"version", std::string(tool_version())},
            {"command", m.command},
            {"scenario_hash", m.hash},
            {"seed", m.seed}};
}

std::string csv_preamble(const Meta &m)
{
    return "# tool=jbbctl version=" + std::string(tool_version()) + " command=" + m.command +
           " scenario_hash=" + m.hash + " seed=" + std::to_string(m.seed) + "\n";
}

std::string dump(const json &j)
{
    return j.dump(2) + "\n";
}

json breakdown_json(const ORateBreakdown &b)
{
    return {{"signal_db", jdb(b.signal)},
            {"est_error_db", jdb(b.est_error)},
            {"b_interference_db", jdb(b.b_interference)},
            {"rate_exact", b.rate_exact},
            {"rate_bound", b.rate_bound ? jnum(*b.rate_bound) : json(nullptr)},
            {"net_rate", b.net_rate}};
}

json report_json(const RateReport &r)
{
    return {{"scheme", std::string(to_string(r.scheme))},
            {"precoder", std::string(to_string(r.precoder))},
            {"rho_b_eff_db", jdb(r.rho_b_eff)},
            {"rho_o_eff_db", jdb(r.rho_o_eff)},
            {"epsilon", r.epsilon},
            {"per_terminal_rate", r.per_terminal_rate},
            {"maxmin_rate", r.maxmin_rate},
            {"prelog", r.prelog},
            {"net_sum_b", r.net_sum_b}};
}

Meta meta_for(const std::string &command, const Scenario &s, const RunContext &ctx)
{
    return {command, scenario_hash(s), ctx.seed};
}

} // namespace

double median(std::vector<double> values)
{
    if (values.empty())
        return NAN;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

DropStudy drop_study(const Scenario &s, unsigned threads)
{
    if (!s.targets)
        throw ValidationError("targets", "is required for a drop study");
    if (!s.drop.seed)
        throw ValidationError("drop.seed", "is required for a drop study");
    const std::vector<double> ratios = ratio_grid(s.grid.ratio_lo_db, s.grid.ratio_hi_db, s.grid.points);
    const auto n = static_cast<std::size_t>(s.statistics.drops);

    // one drop per task; the inner solver runs single-threaded
    const std::vector<OperatingPoints> results = parallel_map<OperatingPoints>(n, threads, [&](std::size_t i) {
        const Link link = make_link(s.system, s.profile_for_seed(drop_seed(*s.drop.seed, i)), s.precoder);
        return analyze_operating_points(link, s.targets->net_b, s.targets->net_o, ratios, 1);
    });

    DropStudy study;
    for (const OperatingPoints &r : results)
    {
        if (!r.saving_db || !r.oa_match)
        {
            ++study.missing;
            continue;
        }
        study.saving_db.push_back(*r.saving_db);
        study.epsilon.push_back(r.oa_match->epsilon);
    }
    study.median_saving_db = median(study.saving_db);
    study.median_epsilon = median(study.epsilon);
    return study;
}

CommandResult cmd_rates(const Scenario &s, const RunContext &ctx)
{
    const Meta meta = meta_for("rates", s, ctx);
    const Link link = make_link(s.system, s.profile(), s.precoder);
    const SystemConfig &cfg = link.cfg;
    OperatingPoint op;
    std::string source = "scenario";
    if (s.operating_point || !s.targets)
    {
        op = s.point(Scheme::JBBPrime);
    }
    else
    {
        // no fixed point: use the JBB' intersection of the two target curves
        const OperatingPoints pts = analyze_operating_points(
            link, s.targets->net_b, s.targets->net_o,
            ratio_grid(s.grid.ratio_lo_db, s.grid.ratio_hi_db, s.grid.points), ctx.threads);
        if (!pts.jbb_prime.found)
            throw InfeasibleTargetError("the B- and O-terminal target curves do not intersect on the ratio grid");
        op = {pts.jbb_prime.rho_b(), pts.jbb_prime.rho_o(), Scheme::JBBPrime};
        source = "intersection";
    }

    const RateReport jbbp = evaluate_b(cfg, link.profile.beta, link.gamma, op, link.precoder);
    const ORateBreakdown ob = o_rate_breakdown(cfg, link.profile.beta_o, op.rho_o, jbbp.rho_b_eff);
    const RateReport jbb = evaluate_b(cfg, link.profile.beta, link.gamma, {op.rho_b, op.rho_o, Scheme::JBB},
                                      link.precoder);
    const OAMatch oa = optimize_epsilon(link, op);
    json oa_json = {{"feasible", oa.feasible}, {"epsilon", oa.epsilon}, {"net_o", oa.o_rate}};
    double oa_net_b = 0.0;
    if (oa.feasible)
    {
        const RateReport ob_oa = evaluate_b(cfg, link.profile.beta, link.gamma, {oa.rho_b_oa, 0.0, Scheme::OA},
                                            link.precoder, oa.epsilon);
        oa_net_b = ob_oa.net_sum_b;
        oa_json["b"] = report_json(ob_oa);
        oa_json["rho_b_oa_db"] = jdb(oa.rho_b_oa);
        oa_json["rho_o_oa_db"] = jdb(oa.rho_o_oa);
        oa_json["energy_jbb"] = op.rho_d();
        oa_json["energy_oa"] = (1.0 - oa.epsilon) * oa.rho_b_oa + oa.epsilon * oa.rho_o_oa;
        oa_json["o_terms_jbb_coordinates"] = breakdown_json(o_rate_breakdown(cfg, link.profile.beta_o, op.rho_o, 0.0));
        oa_json["o_terms_matched"] = breakdown_json(o_rate_breakdown(cfg, link.profile.beta_o, oa.rho_o_oa, 0.0));
    }
    oa_json["net_b"] = oa_net_b;

    json j;
    j["meta"] = meta_json(meta);
    j["operating_point"] = {{"rho_b_db", jdb(op.rho_b)},
                           {"rho_o_db", jdb(op.rho_o)},
                           {"rho_d_db", jdb(op.rho_d())},
                           {"source", source}};
    j["gamma"] = link.gamma;
    j["jbb_prime"] = {{"b", report_json(jbbp)}, {"o", breakdown_json(ob)}};
    j["jbb"] = {{"b", report_json(jbb)}};
    j["oa"] = oa_json;

    CommandResult r;
    r.stem = "rates";
    r.json = dump(j);

    std::ostringstream csv;
    csv << csv_preamble(meta) << "scheme,quantity,value\n";
    csv << "JBB_PRIME,net_b," << num(jbbp.net_sum_b) << "\n";
    csv << "JBB_PRIME,maxmin_rate," << num(jbbp.maxmin_rate) << "\n";
    csv << "JBB_PRIME,net_o," << num(ob.net_rate) << "\n";
    csv << "JBB_PRIME,o_rate_exact," << num(ob.rate_exact) << "\n";
    csv << "JBB_PRIME,o_rate_bound," << num(ob.rate_bound.value_or(NAN)) << "\n";
    csv << "JBB_PRIME,signal_db," << num(to_db(ob.signal)) << "\n";
    csv << "JBB_PRIME,est_error_db," << num(to_db(ob.est_error)) << "\n";
    csv << "JBB_PRIME,b_interference_db," << num(to_db(ob.b_interference)) << "\n";
    csv << "JBB,net_b," << num(jbb.net_sum_b) << "\n";
    csv << "OA,epsilon," << num(oa.epsilon) << "\n";
    csv << "OA,net_b," << num(oa_net_b) << "\n";
    csv << "OA,net_o," << num(oa.o_rate) << "\n";
    r.csv = csv.str();

    std::ostringstream text;
    text << "operating point rho_b " << num(to_db(op.rho_b), 2) << " dB, rho_o " << num(to_db(op.rho_o), 2)
         << " dB\n";
    text << "  JBB'  net B " << num(jbbp.net_sum_b, 4) << "  net O " << num(ob.net_rate, 4) << " b/s/Hz\n";
    text << "  OA    net B " << num(oa_net_b, 4) << "  net O " << num(oa.o_rate, 4) << " b/s/Hz  (epsilon "
         << num(oa.epsilon, 4) << ")\n";
    r.text = text.str();
    return r;
}

CommandResult cmd_curves(const Scenario &s, const RunContext &ctx)
{
    if (!s.targets)
        throw ValidationError("targets", "is required for this command");
    const Meta meta = meta_for("curves", s, ctx);
    const Link link = make_link(s.system, s.profile(), s.precoder);
    const std::vector<double> ratios = ratio_grid(s.grid.ratio_lo_db, s.grid.ratio_hi_db, s.grid.points);

    const Curve b = trace_b_curve(link, s.targets->net_b, ratios, ctx.threads);
    const OCurves o = trace_o_curves(link, s.targets->net_o, ratios, ctx.threads);
    const OperatingPoints refined =
        analyze_operating_points(link, s.targets->net_b, s.targets->net_o, ratios, ctx.threads);

    std::ostringstream csv;
    csv << csv_preamble(meta) << "ratio_db,rho_d_db,rho_b_db,rho_o_db,rate,curve_id\n";
    for (const Curve *c : {&b, &o.jbb_prime_exact, &o.jbb_prime_bound, &o.oa_exact, &o.oa_bound})
        for (const CurvePoint &p : *c)
            if (p.feasible)
                csv << num(to_db(p.ratio)) << ',' << num(to_db(p.rho_d)) << ',' << num(to_db(p.rho_b())) << ','
                    << num(to_db(p.rho_o())) << ',' << num(p.rate, 9) << ',' << to_string(p.curve) << '\n';

    auto ix_json = [](const Intersection &ix) {
        if (!ix.found)
            return json{{"found", false}};
        return json{{"found", true},
                    {"ratio_db", jdb(ix.ratio)},
                    {"rho_d_db", jdb(ix.rho_d)},
                    {"rho_b_db", jdb(ix.rho_b())},
                    {"rho_o_db", jdb(ix.rho_o())}};
    };

    const Intersection g_jbb = find_intersection(b, o.jbb_prime_exact);
    const Intersection g_oa = find_intersection(b, o.oa_exact);
    const Intersection g_jbb_bound = find_intersection(b, o.jbb_prime_bound);
    const Intersection g_oa_bound = find_intersection(b, o.oa_bound);

    json summary;
    summary["meta"] = meta_json(meta);
    summary["targets"] = {{"net_b", s.targets->net_b}, {"net_o", s.targets->net_o}};
    summary["beta"] = link.profile.beta;
    summary["beta_o"] = link.profile.beta_o;
    summary["grid_intersections"] = {{"jbb_prime", ix_json(g_jbb)},
                                     {"oa", ix_json(g_oa)},
                                     {"jbb_prime_bound", ix_json(g_jbb_bound)},
                                     {"oa_bound", ix_json(g_oa_bound)}};
    json ref = {{"jbb_prime", ix_json(refined.jbb_prime)}, {"oa", ix_json(refined.oa)}};
    if (refined.oa_match)
        ref["oa"]["match"] = {{"epsilon", refined.oa_match->epsilon},
                              {"rho_b_oa_db", jdb(refined.oa_match->rho_b_oa)},
                              {"rho_o_oa_db", jdb(refined.oa_match->rho_o_oa)},
                              {"o_rate", refined.oa_match->o_rate}};
    summary["intersections"] = ref;
    summary["saving_db"] = refined.saving_db ? json(*refined.saving_db) : json(nullptr);
    const auto feasible = std::count_if(b.begin(), b.end(), [](const CurvePoint &p) { return p.feasible; });
    summary["b_curve_feasible_points"] = feasible;
    std::optional<DropStudy> study;
    if (s.drop.seed && s.statistics.drops > 0)
    {
        study = drop_study(s, ctx.threads);
        summary["drop_study"] = {{"drops", s.statistics.drops},
                                 {"missing", study->missing},
                                 {"median_saving_db", jnum(study->median_saving_db)},
                                 {"median_epsilon", jnum(study->median_epsilon)},
                                 {"saving_db", study->saving_db},
                                 {"epsilon", study->epsilon}};
    }

    CommandResult r;
    r.stem = "curves";
    r.csv = csv.str();
    r.json = dump(summary);
    std::ostringstream text;
    if (refined.jbb_prime.found)
        text << "JBB'/B intersection: ratio " << num(to_db(refined.jbb_prime.ratio), 2) << " dB, rho_d "
             << num(to_db(refined.jbb_prime.rho_d), 2) << " dB\n";
    if (refined.oa.found)
        text << "OA/B intersection:   ratio " << num(to_db(refined.oa.ratio), 2) << " dB, rho_d "
             << num(to_db(refined.oa.rho_d), 2) << " dB, epsilon " << num(refined.oa_match->epsilon, 3) << "\n";
    if (refined.saving_db)
        text << "saving of JBB' over OA: " << num(*refined.saving_db, 2) << " dB\n";
    if (study)
        text << "median saving over " << s.statistics.drops << " drops: " << num(study->median_saving_db, 2)
             << " dB (median epsilon " << num(study->median_epsilon, 3) << ")\n";
    if (feasible == 0)
    {
        r.exit_code = kExitInfeasible;
        text << "the B-terminal target is infeasible at every ratio on the grid\n";
    }
    r.text = text.str();
    return r;
}

namespace
{

struct Check
{
    std::string name;
    double predicted = 0.0;
    double measured = 0.0;
    double std_error = 0.0;
    std::string rule; // "rel:<x>", "sigma:<k>", "abs:<x>", "le"
    double tolerance = 0.0;
    bool pass = false;
};

Check relative_check(std::string name, double predicted, const MeanEstimate &m, double rel)
{
    Check c{std::move(name), predicted, m.mean, m.std_error, "relative", rel, false};
    c.pass = std::abs(m.mean - predicted) <= rel * std::abs(predicted);
    return c;
}

Check sigma_check(std::string name, double predicted, const MeanEstimate &m, double k = 3.0)
{
    Check c{std::move(name), predicted, m.mean, m.std_error, "sigma", k, false};
    c.pass = std::abs(m.mean - predicted) <= k * m.std_error;
    return c;
}

json check_json(const Check &c)
{
    return {{"name", c.name},         {"predicted", jnum(c.predicted)}, {"measured", jnum(c.measured)},
            {"std_error", jnum(c.std_error)}, {"rule", c.rule},         {"tolerance", c.tolerance},
            {"pass", c.pass}};
}

} // namespace

CommandResult cmd_verify(const Scenario &s, const RunContext &ctx)
{
    const Meta meta = meta_for("verify", s, ctx);
    const Link link = make_link(s.system, s.profile(), s.precoder);
    const SystemConfig &cfg = link.cfg;
    const OperatingPoint op = s.point(Scheme::JBBPrime);
    const std::size_t n_channel = s.mc.channel_draws;
    const std::size_t n_scalar = s.mc.scalar_draws;
    const CounterRng root(ctx.seed);
    const MCOptions opt{ctx.threads, false};

    std::vector<Check> checks;

    // B-terminal decomposition at the operating point
    const BTermReport b = measure_b_terms(cfg, link.profile, op, link.precoder, n_channel, root.substream(1), opt);
    checks.push_back(sigma_check("precoder_normalization", 1.0, b.normalization));
    for (std::size_t k = 0; k < b.terminals.size(); ++k)
    {
        const BTerminalTerms &t = b.terminals[k];
        const std::string tag = "[" + std::to_string(k) + "]";
        checks.push_back(
            relative_check("leakage" + tag, s.verify.leakage_scale * t.leakage_closed_form, t.leakage, 0.02));
        checks.push_back(relative_check("b_sinr" + tag, t.sinr_closed_form,
                                        MeanEstimate{t.sinr_measured, t.sinr_std_error, n_channel}, 0.02));
    }

    // O-terminal link
    const ORateMeasurement o = measure_o_rate(cfg, link.profile, op, link.precoder, n_channel, root.substream(2), opt);
    const double rho_b_eff = rho_b_prime(op.rho_b, cfg.frame(), cfg.tau_po);
    const double o_exact = o_rate_exact(cfg, link.profile.beta_o, op.rho_o, rho_b_eff);
    checks.push_back(relative_check("o_rate_simulated", o_exact, o.rate, 0.01));
    const MeanEstimate scalar =
        sample_o_rate(cfg, link.profile.beta_o, op.rho_o, rho_b_eff, n_scalar, root.substream(3), ctx.threads);
    checks.push_back(sigma_check("o_rate_scalar", o_exact, scalar));
    {
        Check c{"v2_slope", 0.0, o.v2_slope, o.v2_slope_std_error, "sigma", 3.0, false};
        c.pass = std::abs(o.v2_slope) <= 3.0 * o.v2_slope_std_error;
        checks.push_back(c);
    }

    // Jensen constant and bound direction
    if (cfg.Mp >= 2)
    {
        const MeanEstimate inv = verify_jensen_constant(cfg.Mp, n_scalar, root.substream(4), ctx.threads);
        checks.push_back(sigma_check("jensen_constant", 1.0 / (cfg.Mp - 1.0), inv));
        int idx = 0;
        for (double alpha : {0.1, 1.0, 10.0})
        {
            const MeanEstimate m =
                sample_log2_1p_chi2(cfg.Mp, alpha, n_scalar, root.substream(5 + static_cast<std::uint64_t>(idx++)),
                                    ctx.threads);
            const double bound = std::log2(1.0 + (cfg.Mp - 1.0) * alpha);
            Check c{"jensen_bound[alpha=" + num(alpha, 1) + "]", bound, m.mean, m.std_error, "le", 3.0, false};
            c.pass = bound <= m.mean + 3.0 * m.std_error;
            checks.push_back(c);
        }
    }

    // perfect CSI: the nullspace is exact, so nothing leaks
    const std::size_t n_small = std::min<std::size_t>(n_channel, 10000);
    const BTermReport perfect =
        measure_b_terms(cfg, link.profile, op, link.precoder, n_small, root.substream(10), {ctx.threads, true});
    for (std::size_t k = 0; k < perfect.terminals.size(); ++k)
    {
        const BTerminalTerms &t = perfect.terminals[k];
        Check c{"perfect_csi_leakage[" + std::to_string(k) + "]", 0.0, t.leakage.mean, t.leakage.std_error, "abs",
                1e-10, false};
        c.pass = t.leakage.mean <= 1e-10;
        checks.push_back(c);
        if (link.precoder == Precoder::ZF)
        {
            Check z{"perfect_csi_zf_intracell[" + std::to_string(k) + "]", 0.0, t.intracell.mean,
                    t.intracell.std_error, "abs", 1e-10, false};
            z.pass = t.intracell.mean <= 1e-10;
            checks.push_back(z);
        }
    }

    // JBB with beamforming during the O-pilots has no closed form; reported only
    const OperatingPoint op_jbb{op.rho_b, op.rho_o, Scheme::JBB};
    const ORateMeasurement oj =
        measure_o_rate(cfg, link.profile, op_jbb, link.precoder, n_small, root.substream(11), opt);

    json j;
    j["meta"] = meta_json(meta);
    j["draws"] = {{"channel", n_channel}, {"scalar", n_scalar}};
    json arr = json::array();
    bool all_pass = true;
    for (const Check &c : checks)
    {
        arr.push_back(check_json(c));
        all_pass = all_pass && c.pass;
    }
    j["checks"] = arr;
    j["pass"] = all_pass;
    j["descriptive"] = {
        {"o_rate_jbb_simulated", oj.rate.mean},
        {"o_rate_jbb_std_error", oj.rate.std_error},
        {"o_rate_jbb_prime_exact", o_exact},
        {"v1_measured", o.v1.mean},
        {"v1_closed_form", op.rho_o * o_estimation_stats(link.profile.beta_o, op.rho_o, cfg.tau_po, cfg.Mp).var_tilde},
        {"v2_measured", o.v2.mean},
        {"v2_closed_form", rho_b_eff * link.profile.beta_o},
    };

    std::ostringstream csv;
    csv << csv_preamble(meta) << "check,predicted,measured,std_error,rule,tolerance,pass\n";
    std::ostringstream text;
    for (const Check &c : checks)
    {
        csv << c.name << ',' << num(c.predicted, 9) << ',' << num(c.measured, 9) << ',' << num(c.std_error, 9) << ','
            << c.rule << ',' << c.tolerance << ',' << (c.pass ? 1 : 0) << '\n';
        text << (c.pass ? "PASS " : "FAIL ") << c.name << ": predicted " << num(c.predicted, 6) << ", measured "
             << num(c.measured, 6) << " +- " << num(c.std_error, 6) << '\n';
    }

    CommandResult r;
    r.stem = "verify";
    r.json = dump(j);
    r.csv = csv.str();
    r.text = text.str();
    r.exit_code = all_pass ? kExitOk : kExitVerification;
    return r;
}

CommandResult cmd_sweep(const Scenario &s, const RunContext &ctx)
{
    if (!s.sweep)
        throw ValidationError("sweep", "is required for this command");
    const Meta meta = meta_for("sweep", s, ctx);
    const PathLossProfile profile = s.profile();

    std::vector<double> rho_u;
    for (double x : s.sweep->rho_u_db)
        rho_u.push_back(db_to_linear(x));

    struct Row
    {
        double rho_u_db, rho_o_db;
        SweepPoint p;
    };
    std::vector<Row> rows;
    for (double rho_o_db : s.sweep->rho_o_db)
    {
        const double rho_o = std::isinf(rho_o_db) ? 0.0 : db_to_linear(rho_o_db);
        const auto pts = sweep_uplink_snr(s.system, profile, s.precoder, s.sweep->net_b, rho_o, rho_u, s.sweep->scheme);
        for (const SweepPoint &p : pts)
            rows.push_back({linear_to_db(p.rho_u), rho_o_db, p});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) {
        return a.rho_u_db != b.rho_u_db ? a.rho_u_db < b.rho_u_db : a.rho_o_db < b.rho_o_db;
    });

    std::ostringstream csv;
    csv << csv_preamble(meta) << "rho_u_db,required_rho_b_db,rho_o_db,feasible\n";
    json arr = json::array();
    for (const Row &row : rows)
    {
        const double rb_db = row.p.feasible ? to_db(row.p.rho_b) : INFINITY;
        csv << num(row.rho_u_db) << ',' << num(rb_db) << ',' << num(row.rho_o_db) << ',' << (row.p.feasible ? 1 : 0)
            << '\n';
        arr.push_back({{"rho_u_db", row.rho_u_db},
                       {"required_rho_b_db", jnum(rb_db)},
                       {"rho_o_db", jnum(row.rho_o_db)},
                       {"feasible", row.p.feasible}});
    }
    json j;
    j["meta"] = meta_json(meta);
    j["scheme"] = std::string(to_string(s.sweep->scheme));
    j["net_b"] = s.sweep->net_b;
    j["rows"] = arr;

    CommandResult r;
    r.stem = "sweep";
    r.csv = csv.str();
    r.json = dump(j);
    r.text = std::to_string(rows.size()) + " sweep rows\n";
    return r;
}

CommandResult cmd_table1(const std::vector<Scenario> &scenarios, const RunContext &ctx)
{
    if (scenarios.empty())
        throw ValidationError("scenario", "table1 needs at least one scenario");
    std::string combined;
    json list = json::array();
    for (const Scenario &s : scenarios)
    {
        if (!s.targets)
            throw ValidationError("targets", "is required for this command (scenario '" + s.name + "')");
        combined += scenario_hash(s);
        list.push_back({{"name", s.name}, {"scenario_hash", scenario_hash(s)}});
    }
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : combined)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    const Meta meta{"table1", hex, ctx.seed};

    std::ostringstream csv;
    csv << csv_preamble(meta)
        << "figure,scheme,ratio_db,rho_d_db,rho_b_db,rho_o_db,epsilon,signal_db,est_error_db,b_interference_db\n";
    std::ostringstream text;
    json rows = json::array();
    bool any = false;
    for (const Scenario &s : scenarios)
    {
        const Link link = make_link(s.system, s.profile(), s.precoder);
        const std::vector<double> ratios = ratio_grid(s.grid.ratio_lo_db, s.grid.ratio_hi_db, s.grid.points);
        const OperatingPoints pts =
            analyze_operating_points(link, s.targets->net_b, s.targets->net_o, ratios, ctx.threads);
        const std::string fig = s.name.empty() ? "scenario" : s.name;

        auto emit = [&](const char *scheme, const Intersection &ix, const std::optional<OAMatch> &m, double rho_b_eff) {
            if (!ix.found)
            {
                csv << fig << ',' << scheme << ",,,,,,,,\n";
                rows.push_back({{"figure", fig}, {"scheme", scheme}, {"found", false}});
                return;
            }
            any = true;
            const ORateBreakdown br = o_rate_breakdown(link.cfg, link.profile.beta_o, ix.rho_o(), rho_b_eff);
            const double eps = m ? m->epsilon : NAN;
            csv << fig << ',' << scheme << ',' << num(to_db(ix.ratio), 3) << ',' << num(to_db(ix.rho_d), 3) << ','
                << num(to_db(ix.rho_b()), 3) << ',' << num(to_db(ix.rho_o()), 3) << ','
                << (m ? num(eps, 4) : std::string("NA")) << ',' << num(to_db(br.signal), 3) << ','
                << num(to_db(br.est_error), 3) << ',' << num(to_db(br.b_interference), 3) << '\n';
            json row = {{"figure", fig},
                        {"scheme", scheme},
                        {"found", true},
                        {"ratio_db", jdb(ix.ratio)},
                        {"rho_d_db", jdb(ix.rho_d)},
                        {"rho_b_db", jdb(ix.rho_b())},
                        {"rho_o_db", jdb(ix.rho_o())},
                        {"epsilon", m ? json(eps) : json(nullptr)},
                        {"terms", breakdown_json(br)}};
            if (m)
            {
                row["rho_b_oa_db"] = jdb(m->rho_b_oa);
                row["rho_o_oa_db"] = jdb(m->rho_o_oa);
                row["terms_matched"] = breakdown_json(o_rate_breakdown(link.cfg, link.profile.beta_o, m->rho_o_oa, 0.0));
            }
            rows.push_back(row);
            text << fig << ' ' << scheme << ": ratio " << num(to_db(ix.ratio), 1) << " dB, rho_d "
                 << num(to_db(ix.rho_d), 1) << " dB, rho_b " << num(to_db(ix.rho_b()), 1) << " dB, rho_o "
                 << num(to_db(ix.rho_o()), 1) << " dB";
            if (m)
                text << ", epsilon " << num(eps, 2);
            text << ", terms " << num(to_db(br.signal), 1) << " / " << num(to_db(br.est_error), 1) << " / "
                 << num(to_db(br.b_interference), 1) << " dB\n";
        };

        const double rb_eff =
            pts.jbb_prime.found ? rho_b_prime(pts.jbb_prime.rho_b(), link.cfg.frame(), link.cfg.tau_po) : 0.0;
        emit("JBB_PRIME", pts.jbb_prime, std::nullopt, rb_eff);
        emit("OA", pts.oa, pts.oa_match, 0.0);
        if (pts.saving_db)
            text << fig << " saving: " << num(*pts.saving_db, 2) << " dB\n";
    }

    json j;
    j["meta"] = meta_json(meta);
    j["scenarios"] = list;
    j["rows"] = rows;

    CommandResult r;
    r.stem = "table1";
    r.csv = csv.str();
    r.json = dump(j);
    r.text = text.str();
    r.exit_code = any ? kExitOk : kExitInfeasible;
    return r;
}

namespace
{

void write_file(const std::filesystem::path &path, const std::string &content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    f << content;
    if (!f)
        throw std::runtime_error("failed writing '" + path.string() + "'");
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Rates, operating points and Monte Carlo checks for joint beamforming and broadcasting",
                 "jbbctl"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    std::vector<std::string> scenario_paths;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out_dir;
    std::string format = "json";

    auto add_common = [&](CLI::App *sub, bool many) {
        if (many)
            sub->add_option("--scenario", scenario_paths, "scenario file (repeatable)")->required();
        else
            sub->add_option("--scenario", scenario_paths, "scenario file")->required()->expected(1);
        sub->add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
        sub->add_option("--threads", threads, "worker threads (0: all cores)");
        sub->add_option("--out", out_dir, "directory for output files");
        sub->add_option("--format", format, "stdout format when --out is absent")
            ->check(CLI::IsMember({"csv", "json"}));
    };
    CLI::App *rates = app.add_subcommand("rates", "closed-form rates at the scenario's operating point");
    CLI::App *curves = app.add_subcommand("curves", "feasibility curves and their intersections");
    CLI::App *verify = app.add_subcommand("verify", "Monte Carlo checks of the closed forms");
    CLI::App *sweep = app.add_subcommand("sweep", "required B-terminal power versus uplink SNR");
    CLI::App *table1 = app.add_subcommand("table1", "operating points and O-terminal terms per scenario");
    for (CLI::App *sub : {rates, curves, verify, sweep})
        add_common(sub, false);
    add_common(table1, true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp &e)
    {
        out << app.help();
        return kExitOk;
    }
    catch (const CLI::CallForVersion &e)
    {
        out << tool_version() << '\n';
        return kExitOk;
    }
    catch (const CLI::ParseError &e)
    {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try
    {
        std::vector<Scenario> scenarios;
        for (const std::string &p : scenario_paths)
            scenarios.push_back(load_scenario(p));

        RunContext ctx;
        ctx.threads = threads;
        ctx.seed = seed.value_or(scenarios.front().mc.seed);

        CommandResult result;
        if (rates->parsed())
            result = cmd_rates(scenarios.front(), ctx);
        else if (curves->parsed())
            result = cmd_curves(scenarios.front(), ctx);
        else if (verify->parsed())
            result = cmd_verify(scenarios.front(), ctx);
        else if (sweep->parsed())
            result = cmd_sweep(scenarios.front(), ctx);
        else
            result = cmd_table1(scenarios, ctx);

        if (!out_dir.empty())
        {
            const std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            write_file(dir / (result.stem + ".json"), result.json);
            if (!result.csv.empty())
                write_file(dir / (result.stem + ".csv"), result.csv);
            out << result.text;
        }
        else
        {
            out << (format == "csv" ? result.csv : result.json);
        }
        return result.exit_code;
    }
    catch (const ValidationError &e)
    {
        err << "validation error: " << e.what() << '\n';
        return kExitValidation;
    }
    catch (const InfeasibleFrameError &e)
    {
        err << "validation error: " << e.what() << '\n';
        return kExitValidation;
    }
    catch (const InfeasibleTargetError &e)
    {
        err << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace jbb

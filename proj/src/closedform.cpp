// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/closedform.hpp"

#include "jbb/errors.hpp"
#include "jbb/estimation.hpp"
#include "jbb/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace jbb
{

namespace
{

void require_terminals(std::span<const double> beta, std::span<const double> gamma)
{
    if (beta.empty())
        throw ValidationError("K", "max-min power control needs at least one B-terminal");
    if (beta.size() != gamma.size())
        throw ValidationError("gamma", "must have one entry per B-terminal");
}

// Effective-noise term of terminal k divided by its estimate quality; the max-min
// weights are proportional to it.
double mm_term(Precoder precoder, double beta, double gamma, double rho_b, double rho_o)
{
    const double noise = precoder == Precoder::MR ? rho_b * beta + rho_o * (beta - gamma) + 1.0
                                                  : (rho_b + rho_o) * (beta - gamma) + 1.0;
    return noise / gamma;
}

double array_gain(Precoder precoder, const SystemConfig &cfg)
{
    return precoder == Precoder::MR ? static_cast<double>(cfg.M) : static_cast<double>(cfg.M - cfg.K);
}

} // namespace

double leakage_var(double beta_k, double gamma_k, double rho_o)
{
    return rho_o * (beta_k - gamma_k);
}

double rate_b_mr(const SystemConfig &cfg, double beta_k, double gamma_k, double eta_k, double rho_b, double rho_o)
{
    const double sinr = static_cast<double>(cfg.M) * rho_b * gamma_k * eta_k /
                        (rho_b * beta_k + leakage_var(beta_k, gamma_k, rho_o) + 1.0);
    return std::log2(1.0 + sinr);
}

double rate_b_zf(const SystemConfig &cfg, double beta_k, double gamma_k, double eta_k, double rho_b, double rho_o)
{
    const double sinr = static_cast<double>(cfg.M - cfg.K) * rho_b * gamma_k * eta_k /
                        ((rho_b + rho_o) * (beta_k - gamma_k) + 1.0);
    return std::log2(1.0 + sinr);
}

double rate_b(Precoder precoder, const SystemConfig &cfg, double beta_k, double gamma_k, double eta_k, double rho_b,
              double rho_o)
{
    return precoder == Precoder::MR ? rate_b_mr(cfg, beta_k, gamma_k, eta_k, rho_b, rho_o)
                                    : rate_b_zf(cfg, beta_k, gamma_k, eta_k, rho_b, rho_o);
}

double maxmin_rate(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma, double rho_b,
                   double rho_o, Precoder precoder)
{
    require_terminals(beta, gamma);
    double sum = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k)
    {
        if (!(gamma[k] > 0.0))
            return 0.0; // a terminal without CSI caps the common rate at zero
        sum += mm_term(precoder, beta[k], gamma[k], rho_b, rho_o);
    }
    return std::log2(1.0 + array_gain(precoder, cfg) * rho_b / sum);
}

MaxMinResult maxmin_control(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma,
                            double rho_b, double rho_o, Precoder precoder)
{
    require_terminals(beta, gamma);
    MaxMinResult result;
    const std::size_t K = beta.size();
    result.control.eta.assign(K, 1.0 / static_cast<double>(K));
    for (std::size_t k = 0; k < K; ++k)
    {
        if (!(gamma[k] > 0.0))
            return result;
    }

    std::vector<double> terms(K);
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k)
    {
        terms[k] = mm_term(precoder, beta[k], gamma[k], rho_b, rho_o);
        sum += terms[k];
    }
    for (std::size_t k = 0; k < K; ++k)
        result.control.eta[k] = terms[k] / sum;
    result.rate = std::log2(1.0 + array_gain(precoder, cfg) * rho_b / sum);
    return result;
}

double prelog(const SystemConfig &cfg, Scheme scheme)
{
    const double tau_c = static_cast<double>(cfg.tau_c);
    if (scheme == Scheme::JBBPrime)
        return 0.5 * (1.0 - static_cast<double>(cfg.tau_pu + 2 * cfg.tau_po) / tau_c);
    return 0.5 * (1.0 - static_cast<double>(cfg.tau_pu) / tau_c);
}

double o_prelog(const SystemConfig &cfg)
{
    return prelog(cfg, Scheme::JBBPrime);
}

double net_sum_b(const SystemConfig &cfg, double sum_of_rates, Scheme scheme)
{
    return prelog(cfg, scheme) * sum_of_rates;
}

namespace
{
struct OTerms
{
    double var_hat;
    double v1;
    double v2;
    double denominator;
};

OTerms o_terms(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff)
{
    const OEstimationStats stats = o_estimation_stats(beta_o, rho_o, cfg.tau_po, cfg.Mp);
    const double v1 = rho_o * stats.var_tilde;
    const double v2 = rho_b_eff * beta_o;
    return {stats.var_hat, v1, v2, v1 + v2 + 1.0};
}
} // namespace

double o_rate_exact(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff)
{
    if (rho_o <= 0.0)
        return 0.0;
    const OTerms t = o_terms(cfg, beta_o, rho_o, rho_b_eff);
    // |h_e_hat|^2 = var_hat * Y with Y ~ Gamma(M', 1)
    const double a = rho_o / static_cast<double>(cfg.Mp) * t.var_hat / t.denominator;
    return expected_log2_1p_gamma(cfg.Mp, a);
}

double o_rate_bound(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff)
{
    if (cfg.Mp < 2)
        throw DomainError("o_rate_bound: the Jensen bound needs M' >= 2 (got " + std::to_string(cfg.Mp) + ")");
    if (rho_o <= 0.0)
        return 0.0;
    const OTerms t = o_terms(cfg, beta_o, rho_o, rho_b_eff);
    const double mp = static_cast<double>(cfg.Mp);
    return std::log2(1.0 + (mp - 1.0) / mp * rho_o * t.var_hat / t.denominator);
}

ORateBreakdown o_rate_breakdown(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff)
{
    const OTerms t = o_terms(cfg, beta_o, rho_o, rho_b_eff);
    const double mp = static_cast<double>(cfg.Mp);
    ORateBreakdown out;
    out.signal = (mp - 1.0) / mp * rho_o * t.var_hat;
    out.est_error = t.v1;
    out.b_interference = t.v2;
    out.rate_exact = o_rate_exact(cfg, beta_o, rho_o, rho_b_eff);
    if (cfg.Mp >= 2)
        out.rate_bound = o_rate_bound(cfg, beta_o, rho_o, rho_b_eff);
    out.net_rate = o_prelog(cfg) * out.rate_exact;
    return out;
}

double oa_maxmin_rate(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma,
                      double rho_b_oa, double epsilon, Precoder precoder)
{
    return (1.0 - epsilon) * maxmin_rate(cfg, beta, gamma, rho_b_oa, 0.0, precoder);
}

double oa_required_rho_b(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma,
                         double target_rate, double epsilon, Precoder precoder)
{
    require_terminals(beta, gamma);
    if (!(epsilon >= 0.0))
        throw ValidationError("epsilon", "must be >= 0");
    if (target_rate <= 0.0)
        return 0.0;
    if (epsilon >= 1.0)
        throw InfeasibleTargetError("OA leaves no intervals for beamforming at epsilon >= 1");

    const double x = std::exp2(target_rate / (1.0 - epsilon)) - 1.0;
    double inv_gamma = 0.0;
    double penalty = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k)
    {
        if (!(gamma[k] > 0.0))
            throw InfeasibleTargetError("a B-terminal without channel estimate cannot reach a positive rate");
        inv_gamma += 1.0 / gamma[k];
        penalty += (precoder == Precoder::MR ? beta[k] : beta[k] - gamma[k]) / gamma[k];
    }
    const double denominator = array_gain(precoder, cfg) - x * penalty;
    if (!(denominator > 0.0) || !std::isfinite(x))
    {
        std::ostringstream os;
        os << "OA cannot reach max-min rate " << target_rate << " at epsilon " << epsilon
           << ": denominator " << denominator << " is not positive";
        throw InfeasibleTargetError(os.str());
    }
    return x * inv_gamma / denominator;
}

RateReport evaluate_b(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma,
                      const OperatingPoint &op, Precoder precoder, double epsilon)
{
    RateReport report;
    report.scheme = op.scheme;
    report.precoder = precoder;
    double weight = 1.0;
    switch (op.scheme)
    {
    case Scheme::JBB:
        report.rho_b_eff = op.rho_b;
        report.rho_o_eff = op.rho_o;
        break;
    case Scheme::JBBPrime:
        report.rho_b_eff = rho_b_prime(op.rho_b, cfg.frame(), cfg.tau_po);
        report.rho_o_eff = op.rho_o;
        break;
    case Scheme::OA:
        report.rho_b_eff = op.rho_b;
        report.rho_o_eff = 0.0;
        report.epsilon = epsilon;
        weight = 1.0 - epsilon;
        break;
    }

    const MaxMinResult mm = maxmin_control(cfg, beta, gamma, report.rho_b_eff, report.rho_o_eff, precoder);
    double sum = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k)
    {
        const double r =
            weight * rate_b(precoder, cfg, beta[k], gamma[k], mm.control.eta[k], report.rho_b_eff, report.rho_o_eff);
        report.per_terminal_rate.push_back(r);
        sum += r;
    }
    report.maxmin_rate = weight * mm.rate;
    report.prelog = prelog(cfg, op.scheme);
    report.net_sum_b = report.prelog * sum;
    return report;
}

} // namespace jbb

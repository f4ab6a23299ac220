// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------
//
// Deterministic rate engine. All powers are linear and normalized to the
// receiver noise variance; rates are in b/s/Hz.

#ifndef JBB_CLOSEDFORM_HPP
#define JBB_CLOSEDFORM_HPP

#include "jbb/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace jbb
{

// Per-terminal beamforming weights; sum to one.
struct PowerControl
{
    std::vector<double> eta;
};

struct MaxMinResult
{
    PowerControl control;
    double rate = 0.0; // common gross rate per downlink symbol
};

struct RateReport
{
    Scheme scheme = Scheme::JBBPrime;
    Precoder precoder = Precoder::ZF;
    double rho_b_eff = 0.0; // power seen by the rate formula (rho_b' under JBB')
    double rho_o_eff = 0.0;
    double epsilon = 0.0;   // OA resource split, 0 otherwise
    std::vector<double> per_terminal_rate;
    double maxmin_rate = 0.0;
    double prelog = 0.0;
    double net_sum_b = 0.0;
};

// Terms of the O-terminal rate, all relative to unit noise variance.
struct ORateBreakdown
{
    double signal = 0.0;         // ((M'-1)/M') rho_o var_hat: numerator of the Jensen bound
    double est_error = 0.0;      // V1 = rho_o var_tilde
    double b_interference = 0.0; // V2 = rho_b_eff beta_o
    double rate_exact = 0.0;
    std::optional<double> rate_bound; // empty for M' = 1
    double net_rate = 0.0;            // rate_exact with the O-terminal prelog applied
};

// Variance of the broadcast signal leaking into B-terminal k through the estimation error.
double leakage_var(double beta_k, double gamma_k, double rho_o);

double rate_b_mr(const SystemConfig &cfg, double beta_k, double gamma_k, double eta_k, double rho_b, double rho_o);
double rate_b_zf(const SystemConfig &cfg, double beta_k, double gamma_k, double eta_k, double rho_b, double rho_o);
double rate_b(Precoder precoder, const SystemConfig &cfg, double beta_k, double gamma_k, double eta_k, double rho_b,
              double rho_o);

// Common max-min rate without materializing the weights.
double maxmin_rate(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma, double rho_b,
                   double rho_o, Precoder precoder);

MaxMinResult maxmin_control(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma,
                            double rho_b, double rho_o, Precoder precoder);

// Fraction of tau_c that carries B-terminal downlink payload under `scheme`.
double prelog(const SystemConfig &cfg, Scheme scheme);

// Fraction of tau_c that carries O-terminal payload (JBB' and OA alike).
double o_prelog(const SystemConfig &cfg);

double net_sum_b(const SystemConfig &cfg, double sum_of_rates, Scheme scheme);

// Ergodic O-terminal rate E[log2(1 + SINR(h_e_hat))] by quadrature over the Gamma law of
// |h_e_hat|^2. rho_b_eff is rho_b' under JBB' and 0 under OA.
double o_rate_exact(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff);

// Jensen lower bound on o_rate_exact. Throws DomainError for M' < 2.
double o_rate_bound(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff);

ORateBreakdown o_rate_breakdown(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff);

// OA max-min rate weighted by the (1 - epsilon) share of intervals left for beamforming.
double oa_maxmin_rate(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma,
                      double rho_b_oa, double epsilon, Precoder precoder);

// B-terminal power OA needs so that oa_maxmin_rate equals target_rate at the given epsilon.
// Throws InfeasibleTargetError when no finite power reaches the target.
double oa_required_rho_b(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma,
                         double target_rate, double epsilon, Precoder precoder);

// B-terminal rates under max-min control at an operating point. For OA, op.rho_b is the
// OA beamforming power and epsilon the broadcast share; op.rho_o is ignored.
RateReport evaluate_b(const SystemConfig &cfg, std::span<const double> beta, std::span<const double> gamma,
                      const OperatingPoint &op, Precoder precoder, double epsilon = 0.0);

} // namespace jbb

#endif

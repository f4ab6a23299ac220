// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#ifndef JBB_ESTIMATION_HPP
#define JBB_ESTIMATION_HPP

#include "jbb/model.hpp"

#include <span>
#include <vector>

namespace jbb
{

// Per-element variance of the MMSE estimate of a B-terminal channel obtained from
// tau_pu orthogonal uplink pilot symbols at SNR rho_u.
double gamma_k(double beta, double rho_u, int tau_pu);

// gamma_k for every entry of beta.
std::vector<double> estimation_quality(std::span<const double> beta, double rho_u, int tau_pu);

// Per-element variances of the O-terminal's estimate of its effective M'-dimensional
// channel and of the estimation error. var_hat + var_tilde == beta_o.
struct OEstimationStats
{
    double var_hat = 0.0;
    double var_tilde = 0.0;
};

OEstimationStats o_estimation_stats(double beta_o, double rho_o, int tau_po, int Mp);

} // namespace jbb

#endif

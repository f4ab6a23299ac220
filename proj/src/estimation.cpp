// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/estimation.hpp"

namespace jbb
{

double gamma_k(double beta, double rho_u, int tau_pu)
{
    const double snr = static_cast<double>(tau_pu) * rho_u;
    return snr * beta * beta / (1.0 + snr * beta);
}

std::vector<double> estimation_quality(std::span<const double> beta, double rho_u, int tau_pu)
{
    std::vector<double> gamma;
    gamma.reserve(beta.size());
    for (double b : beta)
        gamma.push_back(gamma_k(b, rho_u, tau_pu));
    return gamma;
}

OEstimationStats o_estimation_stats(double beta_o, double rho_o, int tau_po, int Mp)
{
    const double mp = static_cast<double>(Mp);
    const double pilot = static_cast<double>(tau_po) * rho_o * beta_o;
    // written so that var_hat + var_tilde reproduces beta_o to rounding
    const double var_tilde = mp * beta_o / (mp + pilot);
    const double var_hat = pilot * beta_o / (mp + pilot);
    return {var_hat, var_tilde};
}

} // namespace jbb

// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------
//
// Link-level simulation of the downlink. Every routine takes a root generator and
// derives per-chunk substreams from it, so aggregate statistics depend on
// (seed, stream, n_draws) only and never on the number of worker threads.

#ifndef JBB_MONTECARLO_HPP
#define JBB_MONTECARLO_HPP

#include "jbb/closedform.hpp"
#include "jbb/model.hpp"
#include "jbb/rng.hpp"
#include "jbb/stats.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace jbb
{

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct ChannelRealization
{
    CMatrix G;       // true channels, one column per B-terminal
    CMatrix G_hat;   // MMSE estimates
    CMatrix G_tilde; // G_hat - G
    std::vector<double> gamma; // per-element variance of each estimate column
};

struct PrecoderSet
{
    CMatrix V;
    Precoder precoder = Precoder::ZF;
};

struct NullBasis
{
    CMatrix U; // M x Mp, orthonormal columns orthogonal to span(G_hat)
};

struct MCOptions
{
    unsigned threads = 0;     // 0: all available cores
    bool perfect_csi = false; // inject G_hat = G
};

// Draws G and forms the MMSE estimate from a simulated orthogonal-pilot uplink
// observation of tau_pu symbols at SNR rho_u.
ChannelRealization draw_realization(const SystemConfig &cfg, const PathLossProfile &profile, CounterRng &rng,
                                    bool perfect_csi = false);

// MR or ZF beamforming vectors. Throws SingularChannelError for ZF when the condition
// number of G_hat exceeds 1e12.
PrecoderSet build_precoders(const ChannelRealization &real, const PowerControl &eta, Precoder precoder);

// First n_cols columns of an isotropically distributed n x n unitary.
CMatrix isotropic_columns(int n, int n_cols, CounterRng &rng);
CMatrix isotropic_unitary(int n, CounterRng &rng);

// Maximally random orthonormal basis of an Mp-dimensional subspace of the orthogonal
// complement of span(G_hat). Throws DimensionError when Mp > M - K.
NullBasis build_null_basis(const ChannelRealization &real, int Mp, CounterRng &rng);

// Orthogonal downlink pilots: column t is q_p(t), an Mp-vector; the Gram matrix of the
// rows equals (tau_po / Mp) I.
CMatrix orthogonal_pilots(int Mp, int tau_po);

struct EstimationTerms
{
    MeanEstimate estimate_power; // |g_hat_k|^2 / M
    MeanEstimate error_power;    // |g_tilde_k|^2 / M
    MeanEstimate channel_power;  // |g_k|^2 / M
    MeanEstimate cross_re;       // Re(g_hat_k^H g_tilde_k) / M
    MeanEstimate cross_im;
};

std::vector<EstimationTerms> measure_estimation(const SystemConfig &cfg, const PathLossProfile &profile,
                                                std::size_t n_draws, const CounterRng &root, const MCOptions &opt = {});

struct BTerminalTerms
{
    double signal = 0.0;                 // rho_b |E[g_hat^H v_k]|^2
    MeanEstimate gain_fluctuation;       // rho_b Var[g_hat^H v_k]
    MeanEstimate estimation_error;       // rho_b |g_tilde^H V s|^2
    MeanEstimate intracell;              // rho_b |sum_{j != k} g_hat^H v_j s_j|^2
    MeanEstimate leakage;                // rho_o |g^H U q|^2
    double sinr_measured = 0.0;
    double sinr_std_error = 0.0;
    double sinr_closed_form = 0.0;
    double leakage_closed_form = 0.0;
};

struct BTermReport
{
    double rho_b_eff = 0.0;
    double rho_o_eff = 0.0;
    PowerControl control;
    MeanEstimate normalization; // sum_k |v_k|^2
    std::vector<BTerminalTerms> terminals;
};

// Empirical decomposition of the B-terminal received signal at an operating point under
// max-min power control. JBB' uses rho_b'; OA carries no broadcast term.
BTermReport measure_b_terms(const SystemConfig &cfg, const PathLossProfile &profile, const OperatingPoint &op,
                            Precoder precoder, std::size_t n_draws, const CounterRng &root, const MCOptions &opt = {});

struct ORateMeasurement
{
    MeanEstimate rate;           // E[log2(1 + SINR(h_e_hat))] with measured V1, V2
    MeanEstimate v1;             // rho_o |h_e_tilde^H q|^2
    MeanEstimate v2;             // interference power of the beamformed payload
    MeanEstimate estimate_power; // |h_e_hat|^2 / Mp
    double v2_slope = 0.0;       // regression of the V2 sample on |h_e_hat|^2
    double v2_slope_std_error = 0.0;
    double rho_b_eff = 0.0;
};

// Simulates the O-terminal pilot phase, MMSE estimation in the broadcast subspace and
// the payload phase. JBB' and OA are checkable against closed forms; JBB (pilots
// received under beamforming interference) is descriptive only.
ORateMeasurement measure_o_rate(const SystemConfig &cfg, const PathLossProfile &profile, const OperatingPoint &op,
                                Precoder precoder, std::size_t n_draws, const CounterRng &root,
                                const MCOptions &opt = {});

// E[log2(1 + a |h_e_hat|^2)] by sampling |h_e_hat|^2 directly; the scalar twin of
// o_rate_exact.
MeanEstimate sample_o_rate(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff,
                           std::size_t n_draws, const CounterRng &root, unsigned threads = 0);

// Mean of 1/|psi|^2 for psi with Mp i.i.d. CN(0, 1) entries. Mp >= 2.
MeanEstimate verify_jensen_constant(int Mp, std::size_t n_draws, const CounterRng &root, unsigned threads = 0);

// Mean of log2(1 + alpha |psi|^2) for the same psi.
MeanEstimate sample_log2_1p_chi2(int Mp, double alpha, std::size_t n_draws, const CounterRng &root,
                                 unsigned threads = 0);

} // namespace jbb

#endif

// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/montecarlo.hpp"

#include "jbb/errors.hpp"
#include "jbb/estimation.hpp"
#include "jbb/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <sstream>

namespace jbb
{

namespace
{

constexpr double kMaxCondition = 1e12;

void fill_complex_normal(CMatrix &m, CounterRng &rng, double variance)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            m(i, j) = rng.complex_normal(variance);
}

CVector complex_normal_vector(Eigen::Index n, CounterRng &rng, double variance)
{
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = rng.complex_normal(variance);
    return v;
}

// Orthonormal factor of a thin QR with the diagonal of R rotated onto the positive
// real axis, which makes the factorization unique.
CMatrix phase_normalized_q(const CMatrix &a)
{
    Eigen::HouseholderQR<CMatrix> qr(a);
    CMatrix q = qr.householderQ() * CMatrix::Identity(a.rows(), a.cols());
    const CMatrix &r = qr.matrixQR();
    for (Eigen::Index j = 0; j < a.cols(); ++j)
    {
        const std::complex<double> d = r(j, j);
        const double mag = std::abs(d);
        if (mag > 0.0)
            q.col(j) *= d / mag;
    }
    return q;
}

struct EffectivePowers
{
    double rho_b = 0.0;
    double rho_o = 0.0;
};

EffectivePowers effective_powers(const SystemConfig &cfg, const OperatingPoint &op)
{
    switch (op.scheme)
    {
    case Scheme::JBB:
        return {op.rho_b, op.rho_o};
    case Scheme::JBBPrime:
        return {rho_b_prime(op.rho_b, cfg.frame(), cfg.tau_po), op.rho_o};
    case Scheme::OA:
        break;
    }
    return {op.rho_b, 0.0};
}

std::vector<double> gamma_for(const SystemConfig &cfg, const PathLossProfile &profile, bool perfect_csi)
{
    return perfect_csi ? profile.beta : estimation_quality(profile.beta, cfg.rho_u, cfg.tau_pu);
}

void require_draws(std::size_t n_draws, std::size_t minimum, const char *what)
{
    if (n_draws < minimum)
    {
        std::ostringstream os;
        os << "must be >= " << minimum << " for " << what << " (got " << n_draws << ")";
        throw ValidationError("n_draws", os.str());
    }
}

} // namespace

ChannelRealization draw_realization(const SystemConfig &cfg, const PathLossProfile &profile, CounterRng &rng,
                                    bool perfect_csi)
{
    const Eigen::Index M = cfg.M;
    const Eigen::Index K = static_cast<Eigen::Index>(profile.beta.size());
    ChannelRealization real;
    real.G.resize(M, K);
    real.G_hat.resize(M, K);
    real.G_tilde.resize(M, K);
    real.gamma.resize(static_cast<std::size_t>(K));

    const double pilot_gain = std::sqrt(static_cast<double>(cfg.tau_pu) * cfg.rho_u);
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const double beta = profile.beta[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < M; ++i)
            real.G(i, k) = rng.complex_normal(beta);

        if (perfect_csi)
        {
            real.G_hat.col(k) = real.G.col(k);
            real.gamma[static_cast<std::size_t>(k)] = beta;
            continue;
        }

        // Correlating the received block with the terminal's own pilot leaves
        // sqrt(tau_pu rho_u) g_k plus unit-variance noise per antenna.
        const double snr = pilot_gain * pilot_gain * beta;
        const double c = pilot_gain * beta / (1.0 + snr);
        for (Eigen::Index i = 0; i < M; ++i)
        {
            const std::complex<double> y = pilot_gain * real.G(i, k) + rng.complex_normal(1.0);
            real.G_hat(i, k) = c * y;
        }
        real.gamma[static_cast<std::size_t>(k)] = gamma_k(beta, cfg.rho_u, cfg.tau_pu);
    }
    real.G_tilde = real.G_hat - real.G;
    return real;
}

PrecoderSet build_precoders(const ChannelRealization &real, const PowerControl &eta, Precoder precoder)
{
    const Eigen::Index M = real.G_hat.rows();
    const Eigen::Index K = real.G_hat.cols();
    if (static_cast<Eigen::Index>(eta.eta.size()) != K)
        throw ValidationError("eta", "must have one weight per B-terminal");

    PrecoderSet out;
    out.precoder = precoder;
    out.V.resize(M, K);
    if (K == 0)
        return out;

    if (precoder == Precoder::MR)
    {
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double g = real.gamma[static_cast<std::size_t>(k)];
            const double scale = g > 0.0 ? std::sqrt(eta.eta[static_cast<std::size_t>(k)] / (M * g)) : 0.0;
            out.V.col(k) = scale * real.G_hat.col(k);
        }
        return out;
    }

    const CMatrix gram = real.G_hat.adjoint() * real.G_hat;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || std::sqrt(lmax / lmin) > kMaxCondition)
    {
        std::ostringstream os;
        os << "zero-forcing needs a full-column-rank channel estimate; condition number "
           << (lmin > 0.0 ? std::sqrt(lmax / lmin) : INFINITY) << " exceeds " << kMaxCondition;
        throw SingularChannelError(os.str());
    }
    out.V = real.G_hat * gram.ldlt().solve(CMatrix::Identity(K, K));
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const double g = real.gamma[static_cast<std::size_t>(k)];
        out.V.col(k) *= std::sqrt(eta.eta[static_cast<std::size_t>(k)] * g * static_cast<double>(M - K));
    }
    return out;
}

CMatrix isotropic_columns(int n, int n_cols, CounterRng &rng)
{
    if (n < 1 || n_cols < 0 || n_cols > n)
        throw DimensionError("isotropic_columns: need 0 <= n_cols <= n (got n = " + std::to_string(n) +
                             ", n_cols = " + std::to_string(n_cols) + ")");
    CMatrix a(n, n_cols);
    fill_complex_normal(a, rng, 1.0);
    return phase_normalized_q(a);
}

CMatrix isotropic_unitary(int n, CounterRng &rng)
{
    return isotropic_columns(n, n, rng);
}

NullBasis build_null_basis(const ChannelRealization &real, int Mp, CounterRng &rng)
{
    const Eigen::Index M = real.G_hat.rows();
    const Eigen::Index K = real.G_hat.cols();
    if (Mp < 1 || Mp > M - K)
        throw DimensionError("build_null_basis: Mp = " + std::to_string(Mp) + " does not fit into the " +
                             std::to_string(M - K) + "-dimensional nullspace");

    // Projecting an M x Mp Gaussian onto the complement Q of span(G_hat) gives Q W with W an
    // (M-K) x Mp Gaussian; its phase-normalized QR factor is Q times the first Mp columns of
    // an isotropic unitary, without forming the full M x (M-K) basis.
    CMatrix z(M, Mp);
    fill_complex_normal(z, rng, 1.0);
    if (K > 0)
    {
        Eigen::HouseholderQR<CMatrix> qr(real.G_hat);
        const CMatrix qg = qr.householderQ() * CMatrix::Identity(M, K);
        z -= qg * (qg.adjoint() * z);
        z -= qg * (qg.adjoint() * z); // second pass keeps G_hat^H U at round-off level
    }
    return {phase_normalized_q(z)};
}

CMatrix orthogonal_pilots(int Mp, int tau_po)
{
    if (Mp < 1 || tau_po < Mp)
        throw ValidationError("tau_po", "orthogonal pilots need tau_po >= Mp");
    CMatrix p(Mp, tau_po);
    const double scale = 1.0 / std::sqrt(static_cast<double>(Mp));
    for (int i = 0; i < Mp; ++i)
        for (int t = 0; t < tau_po; ++t)
        {
            const double phase = -2.0 * std::numbers::pi * static_cast<double>(i) * t / tau_po;
            p(i, t) = std::polar(scale, phase);
        }
    return p;
}

std::vector<EstimationTerms> measure_estimation(const SystemConfig &cfg, const PathLossProfile &profile,
                                                std::size_t n_draws, const CounterRng &root, const MCOptions &opt)
{
    const std::size_t K = profile.beta.size();
    struct Acc
    {
        std::vector<MeanAccumulator> hat, err, chan, cre, cim;
        void ensure(std::size_t k)
        {
            if (hat.size() != k)
            {
                hat.assign(k, {});
                err.assign(k, {});
                chan.assign(k, {});
                cre.assign(k, {});
                cim.assign(k, {});
            }
        }
        void merge(const Acc &o)
        {
            ensure(o.hat.size());
            for (std::size_t k = 0; k < o.hat.size(); ++k)
            {
                hat[k].merge(o.hat[k]);
                err[k].merge(o.err[k]);
                chan[k].merge(o.chan[k]);
                cre[k].merge(o.cre[k]);
                cim[k].merge(o.cim[k]);
            }
        }
    };

    const double M = cfg.M;
    const Acc acc = chunked_reduce<Acc>(n_draws, opt.threads, root,
                                        [&](Acc &a, CounterRng &rng, std::size_t, std::size_t count) {
                                            a.ensure(K);
                                            for (std::size_t d = 0; d < count; ++d)
                                            {
                                                const ChannelRealization r =
                                                    draw_realization(cfg, profile, rng, opt.perfect_csi);
                                                for (std::size_t k = 0; k < K; ++k)
                                                {
                                                    const auto kk = static_cast<Eigen::Index>(k);
                                                    a.hat[k].add(r.G_hat.col(kk).squaredNorm() / M);
                                                    a.err[k].add(r.G_tilde.col(kk).squaredNorm() / M);
                                                    a.chan[k].add(r.G.col(kk).squaredNorm() / M);
                                                    const std::complex<double> c =
                                                        r.G_hat.col(kk).dot(r.G_tilde.col(kk)) / M;
                                                    a.cre[k].add(c.real());
                                                    a.cim[k].add(c.imag());
                                                }
                                            }
                                        });

    std::vector<EstimationTerms> out(K);
    for (std::size_t k = 0; k < K && k < acc.hat.size(); ++k)
        out[k] = {acc.hat[k].estimate(), acc.err[k].estimate(), acc.chan[k].estimate(), acc.cre[k].estimate(),
                  acc.cim[k].estimate()};
    return out;
}

BTermReport measure_b_terms(const SystemConfig &cfg, const PathLossProfile &profile, const OperatingPoint &op,
                            Precoder precoder, std::size_t n_draws, const CounterRng &root, const MCOptions &opt)
{
    require_draws(n_draws, 2, "measure_b_terms");
    const std::size_t K = profile.beta.size();
    if (K == 0)
        throw ValidationError("K", "measure_b_terms needs at least one B-terminal");

    const EffectivePowers pw = effective_powers(cfg, op);
    const std::vector<double> gamma = gamma_for(cfg, profile, opt.perfect_csi);
    const MaxMinResult mm = maxmin_control(cfg, profile.beta, gamma, pw.rho_b, pw.rho_o, precoder);
    const bool broadcast = pw.rho_o > 0.0;

    struct Terminal
    {
        MeanAccumulator c_re, c_im, c_abs2, est, intra, leak;
        void merge(const Terminal &o)
        {
            c_re.merge(o.c_re);
            c_im.merge(o.c_im);
            c_abs2.merge(o.c_abs2);
            est.merge(o.est);
            intra.merge(o.intra);
            leak.merge(o.leak);
        }
    };
    struct Acc
    {
        MeanAccumulator norm;
        std::vector<Terminal> t;
        void merge(const Acc &o)
        {
            norm.merge(o.norm);
            if (t.size() < o.t.size())
                t.resize(o.t.size());
            for (std::size_t k = 0; k < o.t.size(); ++k)
                t[k].merge(o.t[k]);
        }
    };

    const double q_variance = 1.0 / static_cast<double>(cfg.Mp);
    const Acc acc = chunked_reduce<Acc>(
        n_draws, opt.threads, root, [&](Acc &a, CounterRng &rng, std::size_t, std::size_t count) {
            a.t.resize(K);
            for (std::size_t d = 0; d < count; ++d)
            {
                const ChannelRealization real = draw_realization(cfg, profile, rng, opt.perfect_csi);
                const PrecoderSet ps = build_precoders(real, mm.control, precoder);
                a.norm.add(ps.V.squaredNorm());

                const CVector s = complex_normal_vector(static_cast<Eigen::Index>(K), rng, 1.0);
                const CVector xb = ps.V * s;
                CVector xo;
                if (broadcast)
                {
                    const NullBasis nb = build_null_basis(real, cfg.Mp, rng);
                    xo = nb.U * complex_normal_vector(cfg.Mp, rng, q_variance);
                }
                const CMatrix H = real.G_hat.adjoint() * ps.V;
                for (std::size_t k = 0; k < K; ++k)
                {
                    const auto kk = static_cast<Eigen::Index>(k);
                    const std::complex<double> c = H(kk, kk);
                    const std::complex<double> others = H.row(kk).transpose().cwiseProduct(s).sum() - c * s(kk);
                    Terminal &t = a.t[k];
                    t.c_re.add(c.real());
                    t.c_im.add(c.imag());
                    t.c_abs2.add(std::norm(c));
                    t.est.add(pw.rho_b * std::norm(real.G_tilde.col(kk).dot(xb)));
                    t.intra.add(pw.rho_b * std::norm(others));
                    t.leak.add(broadcast ? pw.rho_o * std::norm(real.G.col(kk).dot(xo)) : 0.0);
                }
            }
        });

    BTermReport report;
    report.rho_b_eff = pw.rho_b;
    report.rho_o_eff = pw.rho_o;
    report.control = mm.control;
    report.normalization = acc.norm.estimate();
    for (std::size_t k = 0; k < K; ++k)
    {
        const Terminal &t = acc.t[k];
        BTerminalTerms out;
        const double mean_re = t.c_re.mean();
        const double mean_im = t.c_im.mean();
        const double mean_abs2 = mean_re * mean_re + mean_im * mean_im;
        out.signal = pw.rho_b * mean_abs2;
        out.gain_fluctuation = {pw.rho_b * std::max(0.0, t.c_abs2.mean() - mean_abs2),
                                pw.rho_b * t.c_abs2.std_error(), t.c_abs2.count()};
        out.estimation_error = t.est.estimate();
        out.intracell = t.intra.estimate();
        out.leakage = t.leak.estimate();

        const double den = out.gain_fluctuation.mean + out.estimation_error.mean + out.intracell.mean +
                           out.leakage.mean + 1.0;
        out.sinr_measured = out.signal / den;
        const double se_signal = 2.0 * pw.rho_b * std::sqrt(mean_abs2) * t.c_re.std_error();
        const double se_den = std::sqrt(out.gain_fluctuation.std_error * out.gain_fluctuation.std_error +
                                        out.estimation_error.std_error * out.estimation_error.std_error +
                                        out.intracell.std_error * out.intracell.std_error +
                                        out.leakage.std_error * out.leakage.std_error);
        const double rel_s = out.signal > 0.0 ? se_signal / out.signal : 0.0;
        out.sinr_std_error = out.sinr_measured * std::sqrt(rel_s * rel_s + (se_den / den) * (se_den / den));
        out.sinr_closed_form = std::exp2(rate_b(precoder, cfg, profile.beta[k], gamma[k], mm.control.eta[k],
                                                pw.rho_b, pw.rho_o)) -
                               1.0;
        out.leakage_closed_form = leakage_var(profile.beta[k], gamma[k], pw.rho_o);
        report.terminals.push_back(out);
    }
    return report;
}

ORateMeasurement measure_o_rate(const SystemConfig &cfg, const PathLossProfile &profile, const OperatingPoint &op,
                                Precoder precoder, std::size_t n_draws, const CounterRng &root, const MCOptions &opt)
{
    require_draws(n_draws, 2, "measure_o_rate");
    ORateMeasurement out;
    double rho_b_eff = 0.0;
    if (op.scheme == Scheme::JBBPrime)
        rho_b_eff = rho_b_prime(op.rho_b, cfg.frame(), cfg.tau_po);
    else if (op.scheme == Scheme::JBB)
        rho_b_eff = op.rho_b;
    out.rho_b_eff = rho_b_eff;
    if (op.rho_o <= 0.0)
        return out;

    const std::size_t K = op.scheme == Scheme::OA ? 0 : profile.beta.size();
    const bool beamforming = K > 0 && rho_b_eff > 0.0;
    PowerControl control;
    if (beamforming)
    {
        const std::vector<double> gamma = gamma_for(cfg, profile, opt.perfect_csi);
        control = maxmin_control(cfg, profile.beta, gamma, rho_b_eff, op.rho_o, precoder).control;
    }

    const PathLossProfile b_profile{std::vector<double>(profile.beta.begin(), profile.beta.begin() + K),
                                    profile.beta_o};
    const CMatrix pilots = orthogonal_pilots(cfg.Mp, cfg.tau_po);
    const double beta_o = profile.beta_o;
    const double mp = cfg.Mp;
    const double tau = cfg.tau_po;
    const double sqrt_rho_o = std::sqrt(op.rho_o);
    const double sqrt_rho_b = std::sqrt(rho_b_eff);
    const double mmse = mp * sqrt_rho_o * beta_o / (tau * op.rho_o * beta_o + mp);
    const bool pilot_interference = op.scheme == Scheme::JBB && beamforming;

    struct Acc
    {
        MeanAccumulator v1, v2, hat;
        RegressionAccumulator slope;
        std::vector<double> hat_norm2;
        void merge(const Acc &o)
        {
            v1.merge(o.v1);
            v2.merge(o.v2);
            hat.merge(o.hat);
            slope.merge(o.slope);
            hat_norm2.insert(hat_norm2.end(), o.hat_norm2.begin(), o.hat_norm2.end());
        }
    };

    const Acc acc = chunked_reduce<Acc>(
        n_draws, opt.threads, root, [&](Acc &a, CounterRng &rng, std::size_t, std::size_t count) {
            a.hat_norm2.reserve(count);
            for (std::size_t d = 0; d < count; ++d)
            {
                CMatrix U;
                CMatrix V;
                if (K > 0)
                {
                    const ChannelRealization real = draw_realization(cfg, b_profile, rng, opt.perfect_csi);
                    if (beamforming)
                        V = build_precoders(real, control, precoder).V;
                    U = build_null_basis(real, cfg.Mp, rng).U;
                }
                else
                {
                    U = isotropic_columns(cfg.M, cfg.Mp, rng);
                }

                const CVector h = complex_normal_vector(cfg.M, rng, beta_o);
                const CVector h_e = U.adjoint() * h;
                CVector hv;
                if (beamforming)
                    hv = V.adjoint() * h; // (h^H V)^H

                // pilot phase: y(t) = sqrt(rho_o) h_e^H q_p(t) [+ sqrt(rho_b) h^H V s(t)] + w(t)
                CVector y_p = CVector::Zero(cfg.Mp);
                for (int t = 0; t < cfg.tau_po; ++t)
                {
                    std::complex<double> y = sqrt_rho_o * h_e.dot(pilots.col(t)) + rng.complex_normal(1.0);
                    if (pilot_interference)
                        y += sqrt_rho_b * hv.dot(complex_normal_vector(static_cast<Eigen::Index>(K), rng, 1.0));
                    y_p += std::conj(y) * pilots.col(t);
                }
                const CVector h_hat = mmse * y_p;
                const CVector h_err = h_hat - h_e;

                // payload phase
                const CVector q = complex_normal_vector(cfg.Mp, rng, 1.0 / mp);
                const double v1 = op.rho_o * std::norm(h_err.dot(q));
                double v2 = 0.0;
                if (beamforming)
                    v2 = rho_b_eff * std::norm(hv.dot(complex_normal_vector(static_cast<Eigen::Index>(K), rng, 1.0)));
                const double x = h_hat.squaredNorm();

                a.v1.add(v1);
                a.v2.add(v2);
                a.hat.add(x / mp);
                a.slope.add(x, v2);
                a.hat_norm2.push_back(x);
            }
        });

    out.v1 = acc.v1.estimate();
    out.v2 = acc.v2.estimate();
    out.estimate_power = acc.hat.estimate();
    out.v2_slope = acc.slope.slope();
    out.v2_slope_std_error = acc.slope.slope_std_error();

    const double a = op.rho_o / mp / (out.v1.mean + out.v2.mean + 1.0);
    MeanAccumulator rate;
    for (double x : acc.hat_norm2)
        rate.add(std::log2(1.0 + a * x));
    out.rate = rate.estimate();
    return out;
}

MeanEstimate sample_o_rate(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff,
                           std::size_t n_draws, const CounterRng &root, unsigned threads)
{
    require_draws(n_draws, 2, "sample_o_rate");
    if (rho_o <= 0.0)
        return {0.0, 0.0, n_draws};
    const OEstimationStats st = o_estimation_stats(beta_o, rho_o, cfg.tau_po, cfg.Mp);
    const double mp = cfg.Mp;
    const double a = rho_o / mp * st.var_hat / (rho_o * st.var_tilde + rho_b_eff * beta_o + 1.0);
    const auto acc = chunked_reduce<MeanAccumulator>(n_draws, threads, root,
                                                     [&](MeanAccumulator &m, CounterRng &rng, std::size_t,
                                                         std::size_t count) {
                                                         for (std::size_t d = 0; d < count; ++d)
                                                         {
                                                             double y = 0.0;
                                                             for (int i = 0; i < cfg.Mp; ++i)
                                                                 y += std::norm(rng.complex_normal(1.0));
                                                             m.add(std::log2(1.0 + a * y));
                                                         }
                                                     });
    return acc.estimate();
}

namespace
{
template <class Fn>
MeanEstimate chi2_mean(int Mp, std::size_t n_draws, const CounterRng &root, unsigned threads, Fn fn)
{
    const auto acc = chunked_reduce<MeanAccumulator>(n_draws, threads, root,
                                                     [&](MeanAccumulator &m, CounterRng &rng, std::size_t,
                                                         std::size_t count) {
                                                         for (std::size_t d = 0; d < count; ++d)
                                                         {
                                                             double y = 0.0;
                                                             for (int i = 0; i < Mp; ++i)
                                                                 y += std::norm(rng.complex_normal(1.0));
                                                             m.add(fn(y));
                                                         }
                                                     });
    return acc.estimate();
}
} // namespace

MeanEstimate verify_jensen_constant(int Mp, std::size_t n_draws, const CounterRng &root, unsigned threads)
{
    if (Mp < 2)
        throw DomainError("verify_jensen_constant: E[1/|psi|^2] is infinite for Mp < 2");
    require_draws(n_draws, 2, "verify_jensen_constant");
    return chi2_mean(Mp, n_draws, root, threads, [](double y) { return 1.0 / y; });
}

MeanEstimate sample_log2_1p_chi2(int Mp, double alpha, std::size_t n_draws, const CounterRng &root,
                                 unsigned threads)
{
    if (Mp < 1)
        throw DomainError("sample_log2_1p_chi2: Mp must be >= 1");
    require_draws(n_draws, 2, "sample_log2_1p_chi2");
    return chi2_mean(Mp, n_draws, root, threads, [alpha](double y) { return std::log2(1.0 + alpha * y); });
}

} // namespace jbb

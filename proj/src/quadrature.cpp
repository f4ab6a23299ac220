// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/quadrature.hpp"

#include "jbb/errors.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace jbb
{

namespace
{

GaussLegendreRule compute_rule(int n)
{
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i)
    {
        // Tricomi's approximation of the i-th root, polished with Newton steps
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter)
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

// Nodes y_i on the half line with weights that already include the Gamma(shape, 1)
// density and the Jacobian of the [0, 1) -> [0, inf) map.
struct GammaRule
{
    std::vector<double> y;
    std::vector<double> w;
};

double gamma_log_density(int shape, double y)
{
    return (shape - 1) * std::log(y) - y - std::lgamma(static_cast<double>(shape));
}

// integrand of E[log2(1 + aY)] in the mapped coordinate s
double mapped_integrand(int shape, double a, double s)
{
    if (s <= 0.0 || s >= 1.0)
        return 0.0;
    const double scale = static_cast<double>(shape);
    const double y = scale * s / (1.0 - s);
    const double jac = scale / ((1.0 - s) * (1.0 - s));
    const double log_pdf = gamma_log_density(shape, y);
    if (log_pdf < -745.0)
        return 0.0;
    return std::log1p(a * y) * std::numbers::log2e * std::exp(log_pdf) * jac;
}

GammaRule make_gamma_rule(int shape, int n)
{
    const GaussLegendreRule &gl = gauss_legendre(n);
    GammaRule rule;
    const double scale = static_cast<double>(shape);
    for (int i = 0; i < n; ++i)
    {
        const double s = 0.5 * (gl.nodes[static_cast<std::size_t>(i)] + 1.0);
        const double y = scale * s / (1.0 - s);
        const double jac = scale / ((1.0 - s) * (1.0 - s));
        const double log_pdf = gamma_log_density(shape, y);
        if (log_pdf < -745.0)
            continue;
        rule.y.push_back(y);
        rule.w.push_back(0.5 * gl.weights[static_cast<std::size_t>(i)] * std::exp(log_pdf) * jac);
    }
    return rule;
}

struct GammaRulePair
{
    GammaRule fine;   // 256 nodes
    GammaRule coarse; // 128 nodes
};

const GammaRulePair &gamma_rules(int shape)
{
    thread_local std::unordered_map<int, GammaRulePair> cache;
    auto it = cache.find(shape);
    if (it == cache.end())
        it = cache.emplace(shape, GammaRulePair{make_gamma_rule(shape, 256), make_gamma_rule(shape, 128)}).first;
    return it->second;
}

double apply(const GammaRule &rule, double a)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.y.size(); ++i)
        sum += rule.w[i] * std::log1p(a * rule.y[i]);
    return sum * std::numbers::log2e;
}

double panel(int shape, double a, double lo, double hi, int n)
{
    const GaussLegendreRule &gl = gauss_legendre(n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        sum += gl.weights[static_cast<std::size_t>(i)] *
               mapped_integrand(shape, a, mid + half * gl.nodes[static_cast<std::size_t>(i)]);
    return half * sum;
}

struct AdaptiveState
{
    int panels = 0;
    double error = 0.0;
};

double adaptive(int shape, double a, double lo, double hi, double tol, int depth, AdaptiveState &state)
{
    const double coarse = panel(shape, a, lo, hi, 32);
    const double fine = panel(shape, a, lo, hi, 64);
    ++state.panels;
    const double err = std::abs(fine - coarse);
    if (err <= tol || depth >= 48 || state.panels > 20000)
    {
        state.error += err;
        return fine;
    }
    const double mid = 0.5 * (lo + hi);
    return adaptive(shape, a, lo, mid, 0.5 * tol, depth + 1, state) +
           adaptive(shape, a, mid, hi, 0.5 * tol, depth + 1, state);
}

} // namespace

const GaussLegendreRule &gauss_legendre(int n)
{
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
    std::lock_guard lock(mutex);
    auto &slot = cache[n];
    if (!slot)
        slot = std::make_unique<GaussLegendreRule>(compute_rule(n));
    return *slot;
}

double expected_log2_1p_gamma(int shape, double a, double rel_tol)
{
    if (shape < 1)
        throw DomainError("expected_log2_1p_gamma: shape must be >= 1");
    if (!(a >= 0.0) || !std::isfinite(a))
        throw DomainError("expected_log2_1p_gamma: scale factor must be finite and >= 0");
    if (a == 0.0)
        return 0.0;

    const GammaRulePair &rules = gamma_rules(shape);
    const double fine = apply(rules.fine, a);
    const double coarse = apply(rules.coarse, a);
    if (std::abs(fine - coarse) <= rel_tol * std::abs(fine))
        return fine;

    AdaptiveState state;
    const double tol = 0.1 * rel_tol * std::max(std::abs(fine), 1e-300);
    const double value = adaptive(shape, a, 0.0, 1.0, tol, 0, state);
    if (!std::isfinite(value) || state.error > rel_tol * std::abs(value))
    {
        std::ostringstream os;
        os << "quadrature for E[log2(1 + a Y)], Y ~ Gamma(" << shape << ", 1), a = " << a
           << " did not converge: estimate " << value << ", error estimate " << state.error << " after "
           << state.panels << " panels (fixed-rule estimates " << fine << " / " << coarse << ")";
        throw NumericalError(os.str());
    }
    return value;
}

} // namespace jbb

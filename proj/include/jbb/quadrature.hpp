// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#ifndef JBB_QUADRATURE_HPP
#define JBB_QUADRATURE_HPP

#include <vector>

namespace jbb
{

// n-point Gauss-Legendre rule on [-1, 1]. Rules are computed once per n and cached.
struct GaussLegendreRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussLegendreRule &gauss_legendre(int n);

// E[log2(1 + a * Y)] for Y ~ Gamma(shape, 1), i.e. Y is the sum of `shape` independent
// unit-mean exponentials.
//
// The half line is mapped onto [0, 1) by y = shape * s / (1 - s) and integrated with a
// 256-node Gauss-Legendre rule; a 128-node rule provides the error estimate. When the two
// disagree by more than rel_tol the integral is recomputed by adaptive bisection of [0, 1).
// Throws NumericalError when that also fails, DomainError for a < 0 or shape < 1.
double expected_log2_1p_gamma(int shape, double a, double rel_tol = 1e-8);

} // namespace jbb

#endif

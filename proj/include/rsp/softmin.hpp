#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace rsp {

/**
 * Weighted softmin, -(1/theta) log sum_i q_i exp(-theta x_i), for a
 * distribution q. Interpolates between the weighted mean of x (theta -> 0)
 * and min(x) (theta -> inf). Entries with q_i = 0 are ignored.
 *
 * Evaluated as shift - log1p(sum_i q_i expm1(-theta (x_i - shift))) / theta
 * with shift = min over the support. The shift keeps large theta exact and
 * the expm1/log1p pair keeps small theta exact: the naive log-sum-exp loses
 * the theta*(x - shift) signal to rounding once it drops under machine
 * epsilon, leaving an eps/theta noise floor that stalls fixed-point
 * iterations.
 */
template <typename DX, typename DQ>
typename DX::Scalar softmin(const Eigen::DenseBase<DX>& x, const Eigen::DenseBase<DQ>& q,
                            typename DX::Scalar theta) {
    using Scalar = typename DX::Scalar;
    const Eigen::Index n = x.size();
    Scalar shift = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        if (q(i) > Scalar(0) && x(i) < shift) shift = x(i);
    Scalar acc(0);
    for (Eigen::Index i = 0; i < n; ++i)
        if (q(i) > Scalar(0)) acc += q(i) * std::expm1(-theta * (x(i) - shift));
    return shift - std::log1p(acc) / theta;
}

/// log sum_i exp(args_i), max-shifted.
template <typename D>
typename D::Scalar log_sum_exp(const Eigen::DenseBase<D>& args) {
    using Scalar = typename D::Scalar;
    const Scalar m = args.maxCoeff();
    return m + std::log((args.derived().array() - m).exp().sum());
}

} // namespace rsp

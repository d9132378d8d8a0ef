#include "inspecta/loss.hpp"

#include <algorithm>
#include <cmath>

namespace inspecta {

namespace {
constexpr double kProbClamp = 1e-12;
}

double logistic(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double focal_loss(double p, int y, const FocalLossParams& params) {
    p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    const double p_t = y == 1 ? p : 1.0 - p;
    return -params.alpha_t * std::pow(1.0 - p_t, params.gamma) * std::log(p_t);
}

double focal_loss_grad(double logit, int y, const FocalLossParams& params) {
    const double p = std::clamp(logistic(logit), kProbClamp, 1.0 - kProbClamp);
    // Chain rule through p = logistic(z); the (1-p_t)^(gamma-1) pole cancels
    // against dp/dz = p(1-p), leaving a finite expression everywhere.
    if (y == 1) {
        return params.alpha_t * std::pow(1.0 - p, params.gamma) *
               (params.gamma * p * std::log(p) + p - 1.0);
    }
    return params.alpha_t * std::pow(p, params.gamma) *
           (p - params.gamma * (1.0 - p) * std::log(1.0 - p));
}

}  // namespace inspecta

#pragma once

namespace inspecta {

/// Focal loss weights: alpha_t is applied as given for the sample at hand
/// (callers pick the per-class value), gamma is the down-weighting rate
/// for well-classified examples.
struct FocalLossParams {
    double alpha_t = 1.0;  // in [0,1]
    double gamma = 0.0;    // >= 0
};

double logistic(double z);

/// -alpha_t * (1-p_t)^gamma * log(p_t) with p_t = p when y=1 else 1-p.
/// p is clamped to [1e-12, 1-1e-12]; nonnegative for all inputs.
/// gamma = 0 with alpha_t = 1 reduces to plain cross-entropy.
double focal_loss(double p, int y, const FocalLossParams& params);

/// d focal_loss(logistic(z), y) / dz, analytic. For gamma = 0, alpha_t = 1
/// this is the cross-entropy gradient p - y.
double focal_loss_grad(double logit, int y, const FocalLossParams& params);

}  // namespace inspecta

#pragma once

#include <Eigen/Core>

namespace evgeo {

// Geometry of the curvature-c ball model. Points live strictly inside the
// radius 1/sqrt(c) ball; tangent vectors at the origin are plain Euclidean
// vectors.
struct HyperbolicConfig {
    double curvature_c = 1.0;
    double max_tangent_norm = 10.0;  // tangent inputs are clipped to this norm
    double ball_margin = 1e-5;       // out-of-ball points project to (1-margin)/sqrt(c)
};

// exp map at the origin: tanh(sqrt(c)|a|) * a / (sqrt(c)|a|), with the input
// clipped to max_tangent_norm first. exp_map(0) = 0. Output norm < 1/sqrt(c).
Eigen::VectorXd exp_map(const Eigen::VectorXd& alpha, const HyperbolicConfig& cfg);

// log map at the origin: artanh(sqrt(c)|b|) * b / (sqrt(c)|b|). Points on or
// outside the ball are first pulled to the (1-margin)/sqrt(c) sphere.
Eigen::VectorXd log_map(const Eigen::VectorXd& beta, const HyperbolicConfig& cfg);

// Row-wise variants used by the encoder. Inputs must be finite.
Eigen::MatrixXd exp_map_rows(const Eigen::MatrixXd& tangents, const HyperbolicConfig& cfg);
Eigen::MatrixXd log_map_rows(const Eigen::MatrixXd& points, const HyperbolicConfig& cfg);

// Vector-Jacobian products for backprop, matching the forward branches
// (clip, boundary projection, artanh clamp) exactly. `input` is the forward
// input of the matching *_rows call; `grad_out` the gradient at its output.
Eigen::MatrixXd exp_map_rows_vjp(const Eigen::MatrixXd& input, const Eigen::MatrixXd& grad_out,
                                 const HyperbolicConfig& cfg);
Eigen::MatrixXd log_map_rows_vjp(const Eigen::MatrixXd& input, const Eigen::MatrixXd& grad_out,
                                 const HyperbolicConfig& cfg);

}  // namespace evgeo

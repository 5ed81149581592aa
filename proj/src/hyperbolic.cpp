#include "evgeo/hyperbolic.hpp"

#include <cmath>

#include "evgeo/errors.hpp"

namespace evgeo {

namespace {

constexpr double kSeriesCutoff = 1e-4;   // switch to Taylor form below this arg
constexpr double kArtanhClamp = 1.0 - 1e-12;

// tanh(a r)/(a r) and its radial derivative over r, as (g, g'/r).
struct RadialFactor {
    double value;
    double slope_over_r;
};

RadialFactor exp_factor(double r, double c) {
    const double a = std::sqrt(c);
    const double ar = a * r;
    if (ar < kSeriesCutoff) {
        const double r2 = r * r;
        return {1.0 - c * r2 / 3.0 + 2.0 * c * c * r2 * r2 / 15.0,
                -2.0 * c / 3.0 + 8.0 * c * c * r2 / 15.0};
    }
    const double t = std::tanh(ar);
    return {t / ar, (ar * (1.0 - t * t) - t) / (a * r * r * r)};
}

// artanh(a s)/(a s) and its radial derivative over s, as (h, h'/s).
RadialFactor log_factor(double s, double c) {
    const double a = std::sqrt(c);
    const double as = a * s;
    if (as < kSeriesCutoff) {
        const double s2 = s * s;
        return {1.0 + c * s2 / 3.0 + c * c * s2 * s2 / 5.0,
                2.0 * c / 3.0 + 4.0 * c * c * s2 / 5.0};
    }
    const double x = std::min(as, kArtanhClamp);
    const double at = std::atanh(x);
    return {at / as, 1.0 / (s * s * (1.0 - x * x)) - at / (a * s * s * s)};
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) throw ValidationError(std::string(what) + ": non-finite input");
}

}  // namespace

Eigen::VectorXd exp_map(const Eigen::VectorXd& alpha, const HyperbolicConfig& cfg) {
    check_finite(alpha, "exp_map");
    Eigen::VectorXd u = alpha;
    const double r0 = u.norm();
    if (r0 > cfg.max_tangent_norm) u *= cfg.max_tangent_norm / r0;
    return exp_factor(u.norm(), cfg.curvature_c).value * u;
}

Eigen::VectorXd log_map(const Eigen::VectorXd& beta, const HyperbolicConfig& cfg) {
    check_finite(beta, "log_map");
    const double a = std::sqrt(cfg.curvature_c);
    Eigen::VectorXd b = beta;
    const double s0 = b.norm();
    if (a * s0 >= 1.0) b *= (1.0 - cfg.ball_margin) / (a * s0);
    return log_factor(b.norm(), cfg.curvature_c).value * b;
}

Eigen::MatrixXd exp_map_rows(const Eigen::MatrixXd& tangents, const HyperbolicConfig& cfg) {
    check_finite(tangents, "exp_map_rows");
    Eigen::MatrixXd out(tangents.rows(), tangents.cols());
    for (Eigen::Index i = 0; i < tangents.rows(); ++i) {
        Eigen::RowVectorXd u = tangents.row(i);
        const double r0 = u.norm();
        if (r0 > cfg.max_tangent_norm) u *= cfg.max_tangent_norm / r0;
        out.row(i) = exp_factor(u.norm(), cfg.curvature_c).value * u;
    }
    return out;
}

Eigen::MatrixXd log_map_rows(const Eigen::MatrixXd& points, const HyperbolicConfig& cfg) {
    check_finite(points, "log_map_rows");
    const double a = std::sqrt(cfg.curvature_c);
    Eigen::MatrixXd out(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        Eigen::RowVectorXd b = points.row(i);
        const double s0 = b.norm();
        if (a * s0 >= 1.0) b *= (1.0 - cfg.ball_margin) / (a * s0);
        out.row(i) = log_factor(b.norm(), cfg.curvature_c).value * b;
    }
    return out;
}

Eigen::MatrixXd exp_map_rows_vjp(const Eigen::MatrixXd& input, const Eigen::MatrixXd& grad_out,
                                 const HyperbolicConfig& cfg) {
    if (input.rows() != grad_out.rows() || input.cols() != grad_out.cols())
        throw ShapeError("exp_map_rows_vjp: input/grad shape mismatch");
    Eigen::MatrixXd grad_in(input.rows(), input.cols());
    for (Eigen::Index i = 0; i < input.rows(); ++i) {
        Eigen::RowVectorXd u = input.row(i);
        const Eigen::RowVectorXd g = grad_out.row(i);
        const double r0 = u.norm();
        const bool clipped = r0 > cfg.max_tangent_norm;
        double scale = 1.0;
        if (clipped) {
            scale = cfg.max_tangent_norm / r0;
            u *= scale;
        }
        const auto f = exp_factor(u.norm(), cfg.curvature_c);
        Eigen::RowVectorXd bar = f.value * g + (f.slope_over_r * u.dot(g)) * u;
        if (clipped) {
            const Eigen::RowVectorXd unit = input.row(i) / r0;
            bar = scale * (bar - unit.dot(bar) * unit);
        }
        grad_in.row(i) = bar;
    }
    return grad_in;
}

Eigen::MatrixXd log_map_rows_vjp(const Eigen::MatrixXd& input, const Eigen::MatrixXd& grad_out,
                                 const HyperbolicConfig& cfg) {
    if (input.rows() != grad_out.rows() || input.cols() != grad_out.cols())
        throw ShapeError("log_map_rows_vjp: input/grad shape mismatch");
    const double a = std::sqrt(cfg.curvature_c);
    Eigen::MatrixXd grad_in(input.rows(), input.cols());
    for (Eigen::Index i = 0; i < input.rows(); ++i) {
        Eigen::RowVectorXd b = input.row(i);
        const Eigen::RowVectorXd g = grad_out.row(i);
        const double s0 = b.norm();
        const bool projected = a * s0 >= 1.0;
        double scale = 1.0;
        if (projected) {
            scale = (1.0 - cfg.ball_margin) / (a * s0);
            b *= scale;
        }
        const auto f = log_factor(b.norm(), cfg.curvature_c);
        Eigen::RowVectorXd bar = f.value * g + (f.slope_over_r * b.dot(g)) * b;
        if (projected) {
            const Eigen::RowVectorXd unit = input.row(i) / s0;
            bar = scale * (bar - unit.dot(bar) * unit);
        }
        grad_in.row(i) = bar;
    }
    return grad_in;
}

}  // namespace evgeo

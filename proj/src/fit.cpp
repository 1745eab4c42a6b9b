// Hyper-exponential approximation of a Bounded Pareto law.
//
// Stage 1 seeds the phases with a Feldmann-Whitt recursion: anchors c_1 > ... > c_{n-1}
// are placed geometrically over the checkpoint range, and each phase is solved from the
// residual tail at c_i and b*c_i after the larger phases have been subtracted.
// Stage 2 refines means and weights with Levenberg-Marquardt on the log tail error at the
// checkpoints, with the two moment errors as heavily weighted extra residuals.
// Stage 3 holds the rates fixed and moves the weights (minimum relative change) so that
// total mass, E[X] and E[X^2] are met exactly.
//
// A completely monotone tail cannot follow the Bounded Pareto's hard lower edge at k,
// so the checkpoint range starts a decade above k by default.

#include "qpeer/distributions.hpp"
#include "qpeer/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace qpeer {

namespace {

constexpr double kMomentPenalty = 100.0;
constexpr int kFitPoints = 60;
constexpr double kMaxStep = 2.0;  // log units per LM step

std::vector<double> geomspace(double lo, double hi, int n)
{
    std::vector<double> out(static_cast<std::size_t>(n));
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] =
            std::exp(n == 1 ? llo : llo + (lhi - llo) * i / (n - 1));
    return out;
}

struct Problem {
    std::vector<double> xs;
    std::vector<double> log_target;
    double m1;
    double m2;
};

// theta = [log mean_1..n, logit w_1..n]
struct Params {
    std::vector<double> mean;
    std::vector<double> weight;
};

Params unpack(const Eigen::VectorXd& theta, int n)
{
    Params out;
    out.mean.resize(static_cast<std::size_t>(n));
    out.weight.resize(static_cast<std::size_t>(n));
    double wmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        wmax = std::max(wmax, theta[n + i]);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        out.mean[static_cast<std::size_t>(i)] = std::exp(theta[i]);
        out.weight[static_cast<std::size_t>(i)] = std::exp(theta[n + i] - wmax);
        z += out.weight[static_cast<std::size_t>(i)];
    }
    for (auto& w : out.weight)
        w /= z;
    return out;
}

// Residual vector and Jacobian at theta.
// With power > 1 the tail residuals are replaced by sign(r)|r|^power, which pushes the
// least-squares solution toward the minimax one.
void evaluate(const Problem& pb, const Eigen::VectorXd& theta, int n, Eigen::VectorXd& r,
              Eigen::MatrixXd* jac, double power = 1.0)
{
    const auto prm = unpack(theta, n);
    const int m = static_cast<int>(pb.xs.size());
    r.resize(m + 2);
    if (jac)
        jac->setZero(m + 2, 2 * n);
    std::vector<double> e(static_cast<std::size_t>(n));
    for (int j = 0; j < m; ++j) {
        const double x = pb.xs[static_cast<std::size_t>(j)];
        double g = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            e[ui] = std::exp(-x / prm.mean[ui]);
            g += prm.weight[ui] * e[ui];
        }
        g = std::max(g, 1e-300);
        r[j] = std::log(g) - pb.log_target[static_cast<std::size_t>(j)];
        if (jac) {
            for (int i = 0; i < n; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                (*jac)(j, i) = prm.weight[ui] * e[ui] * (x / prm.mean[ui]) / g;
                (*jac)(j, n + i) = prm.weight[ui] * (e[ui] - g) / g;
            }
        }
        if (power != 1.0) {
            const double a = std::abs(r[j]);
            const double scale = power * std::pow(a, power - 1.0);
            r[j] = std::copysign(std::pow(a, power), r[j]);
            if (jac)
                jac->row(j) *= scale;
        }
    }
    double m1 = 0.0;
    double m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        m1 += prm.weight[ui] * prm.mean[ui];
        m2 += 2.0 * prm.weight[ui] * prm.mean[ui] * prm.mean[ui];
    }
    r[m] = kMomentPenalty * (m1 / pb.m1 - 1.0);
    r[m + 1] = kMomentPenalty * (m2 / pb.m2 - 1.0);
    if (jac) {
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const double p = prm.weight[ui];
            const double mu = prm.mean[ui];
            (*jac)(m, i) = kMomentPenalty * p * mu / pb.m1;
            (*jac)(m, n + i) = kMomentPenalty * p * (mu - m1) / pb.m1;
            (*jac)(m + 1, i) = kMomentPenalty * 4.0 * p * mu * mu / pb.m2;
            (*jac)(m + 1, n + i) = kMomentPenalty * p * (2.0 * mu * mu - m2) / pb.m2;
        }
    }
}

Eigen::VectorXd levenberg_marquardt(const Problem& pb, Eigen::VectorXd theta, int n,
                                    double power)
{
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    evaluate(pb, theta, n, r, &jac, power);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    for (int iter = 0; iter < 400; ++iter) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 12 && !improved; ++tries) {
            Eigen::MatrixXd a = jtj;
            for (int i = 0; i < a.rows(); ++i)
                a(i, i) += lambda * (jtj(i, i) + 1.0);
            Eigen::VectorXd step = a.ldlt().solve(-grad);
            const double biggest = step.cwiseAbs().maxCoeff();
            if (biggest > kMaxStep)
                step *= kMaxStep / biggest;
            if (!step.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            Eigen::VectorXd cand = theta + step;
            Eigen::VectorXd rc;
            evaluate(pb, cand, n, rc, nullptr, power);
            const double cc = rc.squaredNorm();
            if (std::isfinite(cc) && cc < cost) {
                const double gain = (cost - cc) / std::max(cost, 1e-300);
                theta = std::move(cand);
                cost = cc;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                evaluate(pb, theta, n, r, &jac, power);
                if (gain < 1e-12)
                    return theta;
            } else {
                lambda *= 8.0;
            }
        }
        if (!improved)
            break;
    }
    return theta;
}

// Feldmann-Whitt recursive tail matching for the n-1 largest phases; the smallest phase
// takes the remaining mass and matches the mean.
std::optional<Eigen::VectorXd> feldmann_whitt_seed(const BoundedPareto& bp, double lo,
                                                   double hi, int n, double m1)
{
    const auto anchors = geomspace(hi, lo, n - 1);
    const double spacing = n > 2 ? anchors[0] / anchors[1] : 10.0;
    const double b = std::min(2.0, std::sqrt(spacing));
    std::vector<double> w;
    std::vector<double> rate;
    auto residual_tail = [&](double t) {
        double v = bp.ccdf(t);
        for (std::size_t i = 0; i < w.size(); ++i)
            v -= w[i] * std::exp(-rate[i] * t);
        return v;
    };
    for (double c : anchors) {
        const double f1 = residual_tail(c);
        const double f2 = residual_tail(b * c);
        if (!(f1 > 0.0 && f2 > 0.0 && f1 > f2))
            return std::nullopt;
        const double lam = std::log(f1 / f2) / ((b - 1.0) * c);
        w.push_back(f1 * std::exp(lam * c));
        rate.push_back(lam);
    }
    double mass = 0.0;
    double mean_part = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        mass += w[i];
        mean_part += w[i] / rate[i];
    }
    const double last_w = 1.0 - mass;
    const double last_mean = (m1 - mean_part) / std::max(last_w, 1e-300);
    if (!(last_w > 0.0 && last_mean > 0.0))
        return std::nullopt;
    Eigen::VectorXd theta(2 * n);
    for (int i = 0; i < n - 1; ++i) {
        theta[i] = -std::log(rate[static_cast<std::size_t>(i)]);
        theta[n + i] = std::log(w[static_cast<std::size_t>(i)]);
    }
    theta[n - 1] = std::log(last_mean);
    theta[2 * n - 1] = std::log(last_w);
    return theta;
}

// Moves weights by the smallest relative amount that meets sum = 1, E[X], E[X^2] exactly.
std::optional<std::vector<double>> pin_moments(const std::vector<double>& weight,
                                               const std::vector<double>& mean, double m1,
                                               double m2)
{
    const int n = static_cast<int>(weight.size());
    if (n < 3)
        return std::nullopt;
    Eigen::MatrixXd a(3, n);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        a(0, i) = 1.0;
        a(1, i) = mean[ui] / m1;
        a(2, i) = 2.0 * mean[ui] * mean[ui] / m2;
        p[i] = weight[ui];
    }
    const Eigen::Vector3d target(1.0, 1.0, 1.0);
    const Eigen::Vector3d gap = target - a * p;
    const Eigen::MatrixXd d = p.array().square().matrix().asDiagonal();
    const Eigen::Matrix3d gram = a * d * a.transpose();
    const Eigen::Vector3d y = gram.fullPivLu().solve(gap);
    const Eigen::VectorXd delta = d * a.transpose() * y;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double v = p[i] + delta[i];
        if (!(v > 0.0) || !std::isfinite(v))
            return std::nullopt;
        out[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

double score(const FitQuality& q, const FitOptions& opts)
{
    const double mom = std::max(q.mean_rel_err, q.second_rel_err) / opts.moment_tolerance;
    return std::max(q.tail_rel_err / opts.tail_tolerance, mom);
}

} // namespace

FitQuality fit_quality(const BoundedPareto& target, const HyperExp& fit, const FitOptions& opts)
{
    FitQuality q;
    q.mean_rel_err = std::abs(fit.moment(1) / target.moment(1) - 1.0);
    q.second_rel_err = std::abs(fit.moment(2) / target.moment(2) - 1.0);
    const auto xs = geomspace(opts.checkpoint_lo_factor * target.k(),
                              opts.checkpoint_hi_factor * target.p(), opts.checkpoints);
    for (double x : xs)
        q.tail_rel_err = std::max(q.tail_rel_err, std::abs(fit.ccdf(x) / target.ccdf(x) - 1.0));
    return q;
}

HyperExp fit_hyperexp(const BoundedPareto& target, const FitOptions& opts)
{
    const int n = opts.phases;
    if (n < 2)
        throw DomainError("fit_hyperexp: phase count must be >= 2");
    const double lo = opts.checkpoint_lo_factor * target.k();
    const double hi = opts.checkpoint_hi_factor * target.p();
    if (!(lo > 0.0 && lo < hi))
        throw DomainError("fit_hyperexp: empty checkpoint range");

    Problem pb;
    pb.xs = geomspace(lo, hi, kFitPoints);
    for (double x : pb.xs)
        pb.log_target.push_back(std::log(target.ccdf(x)));
    pb.m1 = target.moment(1);
    pb.m2 = target.moment(2);

    std::vector<Eigen::VectorXd> seeds;
    if (auto fw = feldmann_whitt_seed(target, lo, hi, n, pb.m1))
        seeds.push_back(*fw);
    for (double lo_mean : {0.2, 0.5, 1.0, 2.0}) {
        for (double hi_mean : {0.1, 0.3, 1.0}) {
            const auto means = geomspace(lo_mean * target.k(), hi_mean * target.p(), n);
            Eigen::VectorXd theta = Eigen::VectorXd::Zero(2 * n);
            for (int i = 0; i < n; ++i)
                theta[i] = std::log(means[static_cast<std::size_t>(i)]);
            seeds.push_back(theta);
        }
    }

    std::optional<HyperExp> best;
    FitQuality best_q;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& seed : seeds) {
        Eigen::VectorXd theta = levenberg_marquardt(pb, seed, n, 1.0);
        theta = levenberg_marquardt(pb, theta, n, 3.0);
        const auto prm = unpack(theta, n);
        std::vector<double> weight = prm.weight;
        if (auto pinned = pin_moments(weight, prm.mean, pb.m1, pb.m2))
            weight = *pinned;
        std::vector<Phase> phases;
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (weight[ui] > 0.0)
                phases.push_back(Phase{weight[ui], 1.0 / prm.mean[ui]});
        }
        std::sort(phases.begin(), phases.end(),
                  [](const Phase& a, const Phase& b) { return a.rate > b.rate; });
        const bool finite = std::all_of(phases.begin(), phases.end(), [](const Phase& ph) {
            return std::isfinite(ph.rate) && ph.rate > 0.0;
        });
        if (!finite || phases.empty())
            continue;
        HyperExp cand = HyperExp::normalized(std::move(phases));
        const FitQuality q = fit_quality(target, cand, opts);
        const double s = score(q, opts);
        if (s < best_score) {
            best_score = s;
            best_q = q;
            best.emplace(std::move(cand));
        }
    }
    if (!best || best_score > 1.0)
        throw FitError("fit_hyperexp: contract not met", best_q.mean_rel_err,
                       best_q.second_rel_err, best_q.tail_rel_err);
    return *best;
}

} // namespace qpeer

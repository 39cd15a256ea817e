#ifndef ADMG_GAUSSIAN_HPP
#define ADMG_GAUSSIAN_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "admg/error.hpp"
#include "admg/node_set.hpp"

namespace admg {

/// Multivariate normal over graph nodes. `vars[i]` names row i of mean/cov.
/// log_mass is the log of the total mass (0 for a normalized density).
struct GaussianDist {
    std::vector<int> vars;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double log_mass = 0.0;

    int dim() const { return static_cast<int>(vars.size()); }

    int position(int node) const {
        auto it = std::find(vars.begin(), vars.end(), node);
        if (it == vars.end()) throw InputError("variable " + std::to_string(node) + " not in distribution");
        return static_cast<int>(it - vars.begin());
    }

    NodeSet var_set() const { return NodeSet::of(vars); }

    std::vector<int> positions(const std::vector<int>& nodes) const {
        std::vector<int> out;
        for (int v : nodes) out.push_back(position(v));
        return out;
    }
};

namespace detail {

inline Eigen::MatrixXd take(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                            const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    return out;
}

inline Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<int>& rows) {
    Eigen::VectorXd out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out(i) = v(rows[i]);
    return out;
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Inverse and log-determinant of a symmetric positive-definite matrix.
struct SpdInverse {
    Eigen::MatrixXd inverse;
    double log_det = 0.0;
};

inline SpdInverse spd_inverse(const Eigen::MatrixXd& m, const char* what, double tol = 1e-10) {
    SpdInverse out;
    if (m.rows() == 0) {
        out.inverse = Eigen::MatrixXd(0, 0);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m));
    const auto& ev = es.eigenvalues();
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    if (!(lo > tol * std::max(1.0, hi))) {
        std::ostringstream msg;
        msg << what << " is singular or indefinite (eigenvalues in [" << lo << ", " << hi
            << "], condition number " << (lo > 0 ? hi / lo : INFINITY) << ")";
        throw NumericalError(msg.str());
    }
    out.inverse = symmetrize(es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                             es.eigenvectors().transpose());
    out.log_det = ev.array().log().sum();
    return out;
}

} // namespace detail

inline GaussianDist marginal(const GaussianDist& d, const std::vector<int>& keep) {
    auto pos = d.positions(keep);
    return {keep, detail::take(d.mean, pos), detail::take(d.cov, pos, pos), d.log_mass};
}

/// Law of `targets` given the `given` variables fixed at `values` (same order).
inline GaussianDist conditional(const GaussianDist& d, const std::vector<int>& targets,
                                const std::vector<int>& given, const std::vector<double>& values) {
    if (given.size() != values.size()) throw InputError("conditioning values do not match variables");
    auto t = d.positions(targets);
    auto g = d.positions(given);
    if (g.empty()) return marginal(d, targets);
    const Eigen::MatrixXd s_tg = detail::take(d.cov, t, g);
    auto inv = detail::spd_inverse(detail::take(d.cov, g, g), "conditioning covariance");
    Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
    const Eigen::MatrixXd b = s_tg * inv.inverse;
    GaussianDist out;
    out.vars = targets;
    out.mean = detail::take(d.mean, t) + b * (gv - detail::take(d.mean, g));
    out.cov = detail::symmetrize(detail::take(d.cov, t, t) - b * s_tg.transpose());
    return out;
}

/// Partial correlation of x and y given z.
inline double partial_correlation(const GaussianDist& d, int x, int y, const std::vector<int>& z) {
    auto c = conditional(d, {x, y}, z, std::vector<double>(z.size(), 0.0));
    const double denom = std::sqrt(c.cov(0, 0) * c.cov(1, 1));
    if (denom <= 0.0) return 0.0;
    return c.cov(0, 1) / denom;
}

inline double log_density(const GaussianDist& d, const Eigen::VectorXd& x) {
    auto inv = detail::spd_inverse(d.cov, "covariance");
    const Eigen::VectorXd r = x - d.mean;
    return -0.5 * (r.dot(inv.inverse * r) + inv.log_det + d.dim() * std::log(2.0 * M_PI));
}

} // namespace admg

#endif // ADMG_GAUSSIAN_HPP

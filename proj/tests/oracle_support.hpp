#ifndef ADMG_ORACLE_SUPPORT_HPP
#define ADMG_ORACLE_SUPPORT_HPP

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "admg/estimand.hpp"
#include "admg/identify.hpp"
#include "admg/sem.hpp"

namespace testing_support {

struct OracleGap {
    double mean = 0.0;
    double cov = 0.0;
    double worst() const { return std::max(mean, cov); }
};

/// Law of y under do(x = xv) conditioned on given = gv, from the truncated system.
inline admg::GaussianDist oracle_law(const admg::LinearSystem& sys, admg::NodeSet y, const std::map<int, double>& xv,
                                     const std::map<int, double>& gv) {
    auto post = admg::interventional_distribution(sys, xv);
    std::vector<int> gvars;
    std::vector<double> vals;
    for (auto [k, v] : gv) {
        gvars.push_back(k);
        vals.push_back(v);
    }
    return admg::conditional(post, y.to_vector(), gvars, vals);
}

/// Compares an identified estimand with the oracle at random values of x and given.
inline OracleGap oracle_gap(const admg::LinearSystem& sys, const admg::IdentificationResult& r, admg::NodeSet y,
                            admg::NodeSet x, admg::NodeSet given, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::map<int, double> xv, gv, fixed;
    for (int v : x) fixed[v] = xv[v] = n01(rng);
    for (int v : given) fixed[v] = gv[v] = n01(rng);
    const auto truth = oracle_law(sys, y, xv, gv);
    const auto got = admg::eval_gaussian(r.estimand, {{"p", admg::implied_distribution(sys)}}, fixed, r.definitions);
    OracleGap gap;
    if (got.vars != truth.vars) {
        gap.mean = gap.cov = INFINITY;
        return gap;
    }
    gap.mean = (got.mean - truth.mean).cwiseAbs().maxCoeff();
    gap.cov = (got.cov - truth.cov).cwiseAbs().maxCoeff();
    gap.mean = std::max(gap.mean, std::abs(got.log_mass));
    return gap;
}

/// Gambling game on nodes A=0, B=1, C=2 with B = A + U_B and C = U_C. The
/// errors follow U_A -> U_C -> U_B with unit increments scaled by sigma.
inline admg::LinearSystem gambling_game(double sigma = 1.0) {
    admg::LinearSystem s;
    s.vars = {0, 1, 2};
    s.coef = Eigen::MatrixXd::Zero(3, 3);
    s.coef(1, 0) = 1.0;
    s.noise_cov.resize(3, 3);
    s.noise_cov << 1, 1, 1, 1, 3, 2, 1, 2, 2;
    s.noise_cov *= sigma;
    s.intercept = Eigen::VectorXd::Zero(3);
    return s;
}

/// Second game: U_A -> U_C <- U_B.
inline admg::LinearSystem gambling_game2(double sigma = 1.0) {
    admg::LinearSystem s = gambling_game(sigma);
    s.noise_cov << 1, 0, 1, 0, 1, 1, 1, 1, 3;
    s.noise_cov *= sigma;
    return s;
}

} // namespace testing_support

#endif

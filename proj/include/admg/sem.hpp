#ifndef ADMG_SEM_HPP
#define ADMG_SEM_HPP

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "admg/dsl.hpp"
#include "admg/error.hpp"
#include "admg/gaussian.hpp"
#include "admg/graph.hpp"

namespace admg {

/// V = coef * V + noise + intercept, noise ~ N(0, noise_cov). Row i is vars[i].
struct LinearSystem {
    std::vector<int> vars;
    Eigen::MatrixXd coef;
    Eigen::MatrixXd noise_cov;
    Eigen::VectorXd intercept;

    int dim() const { return static_cast<int>(vars.size()); }
    int position(int node) const {
        for (int i = 0; i < dim(); ++i)
            if (vars[i] == node) return i;
        throw InputError("node " + std::to_string(node) + " not in the system");
    }
};

/// Linear-Gaussian parameterization of an ADMG. Each A <-> B carries a latent
/// lambda_AB with variance lambda_var and loadings beta[{A,B}], beta[{B,A}];
/// error_precision is over graph.nodes() in index order.
struct GaussianSem {
    Admg graph;
    std::map<std::pair<int, int>, double> alpha;      // (from, to)
    std::map<std::pair<int, int>, double> beta;       // (node, other end)
    std::map<std::pair<int, int>, double> lambda_var; // (low, high)
    Eigen::MatrixXd error_precision;

    void validate() const {
        const auto nodes = graph.nodes().to_vector();
        const int n = static_cast<int>(nodes.size());
        if (error_precision.rows() != n || error_precision.cols() != n) {
            throw InputError("error precision has the wrong dimension");
        }
        if ((error_precision - error_precision.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
            throw InputError("error precision is not symmetric");
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && !graph.has_undirected(nodes[i], nodes[j]) && std::abs(error_precision(i, j)) > 1e-12) {
                    throw InputError("error precision is nonzero between " + graph.label(nodes[i]) + " and " +
                                     graph.label(nodes[j]) + ", which share no line");
                }
        if (n > 0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(error_precision);
            if (es.eigenvalues().minCoeff() <= 1e-9) throw InputError("error precision is not positive definite");
        }
        for (auto [a, b] : graph.directed_edges())
            if (!alpha.count({a, b})) throw InputError("missing coefficient for a directed edge");
        for (auto [a, b] : graph.bidirected_edges()) {
            auto it = lambda_var.find({std::min(a, b), std::max(a, b)});
            if (it == lambda_var.end() || !(it->second > 0)) throw InputError("latent variance must be positive");
            if (!beta.count({a, b}) || !beta.count({b, a})) throw InputError("missing latent loading");
        }
    }

    LinearSystem system() const {
        LinearSystem s;
        s.vars = graph.nodes().to_vector();
        const int n = s.dim();
        s.coef = Eigen::MatrixXd::Zero(n, n);
        for (auto [ab, v] : alpha) s.coef(s.position(ab.second), s.position(ab.first)) = v;
        s.noise_cov = detail::spd_inverse(error_precision, "error precision").inverse;
        for (auto [a, b] : graph.bidirected_edges()) {
            const double lv = lambda_var.at({std::min(a, b), std::max(a, b)});
            Eigen::VectorXd load = Eigen::VectorXd::Zero(n);
            load(s.position(a)) = beta.at({a, b});
            load(s.position(b)) = beta.at({b, a});
            s.noise_cov += lv * load * load.transpose();
        }
        s.intercept = Eigen::VectorXd::Zero(n);
        return s;
    }
};

/// Coefficients uniform in +-[0.3, 1.2]; latent variances in [0.5, 1.5];
/// error precision S S' masked to the line skeleton, then diagonally loaded to
/// a minimum eigenvalue of at least 0.1.
inline GaussianSem random_sem(const Admg& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(0.3, 1.2);
    std::bernoulli_distribution neg(0.5);
    std::uniform_real_distribution<double> var(0.5, 1.5);
    std::normal_distribution<double> normal;
    auto coef = [&] { return (neg(rng) ? -1.0 : 1.0) * mag(rng); };

    GaussianSem sem;
    sem.graph = g;
    for (auto e : g.directed_edges()) sem.alpha[e] = coef();
    for (auto [a, b] : g.bidirected_edges()) {
        sem.lambda_var[{std::min(a, b), std::max(a, b)}] = var(rng);
        sem.beta[{a, b}] = coef();
        sem.beta[{b, a}] = coef();
    }
    const auto nodes = g.nodes().to_vector();
    const int n = static_cast<int>(nodes.size());
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s(i, j) = normal(rng);
    Eigen::MatrixXd p = s * s.transpose() / std::max(1, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && !g.has_undirected(nodes[i], nodes[j])) p(i, j) = 0.0;
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
        const double lo = es.eigenvalues().minCoeff();
        if (lo < 0.1) p.diagonal().array() += 0.1 - lo;
    }
    sem.error_precision = p;
    return sem;
}

namespace detail {

inline GaussianDist solve_system(const LinearSystem& s) {
    const int n = s.dim();
    const Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(n, n) - s.coef).inverse();
    GaussianDist d;
    d.vars = s.vars;
    d.mean = inv * s.intercept;
    d.cov = symmetrize(inv * s.noise_cov * inv.transpose());
    return d;
}

} // namespace detail

/// Joint law of all variables: mean (I-A)^-1 c, covariance (I-A)^-1 Omega (I-A)^-T.
inline GaussianDist implied_distribution(const LinearSystem& s) { return detail::solve_system(s); }
inline GaussianDist implied_distribution(const GaussianSem& sem) { return implied_distribution(sem.system()); }

/// Law of the variables outside x after replacing the equations of x by the
/// constants in `values`; the joint noise law of the other variables is kept.
inline GaussianDist interventional_distribution(const LinearSystem& s, const std::map<int, double>& values) {
    LinearSystem t = s;
    std::vector<int> keep;
    for (int i = 0; i < s.dim(); ++i) {
        auto it = values.find(s.vars[i]);
        if (it == values.end()) {
            keep.push_back(s.vars[i]);
            continue;
        }
        t.coef.row(i).setZero();
        t.noise_cov.row(i).setZero();
        t.noise_cov.col(i).setZero();
        t.intercept(i) = it->second;
    }
    for (auto [v, x] : values) {
        (void)x;
        s.position(v);
    }
    return marginal(detail::solve_system(t), keep);
}

inline GaussianDist interventional_distribution(const GaussianSem& sem, const std::map<int, double>& values) {
    return interventional_distribution(sem.system(), values);
}

/// Explicit system over V, one variable per latent and one per error, used to
/// cross-check the collapsed noise covariance.
inline LinearSystem magnified_system(const GaussianSem& sem) {
    const auto nodes = sem.graph.nodes().to_vector();
    const auto bi = sem.graph.bidirected_edges();
    const int n = static_cast<int>(nodes.size());
    const int m = static_cast<int>(bi.size());
    const int total = 2 * n + m;
    LinearSystem s;
    s.vars.resize(total);
    const int base = sem.graph.universe();
    for (int i = 0; i < n; ++i) s.vars[i] = nodes[i];
    for (int k = 0; k < n + m; ++k) s.vars[n + k] = base + k;
    s.coef = Eigen::MatrixXd::Zero(total, total);
    s.noise_cov = Eigen::MatrixXd::Zero(total, total);
    s.intercept = Eigen::VectorXd::Zero(total);
    auto pos = [&](int node) {
        for (int i = 0; i < n; ++i)
            if (nodes[i] == node) return i;
        return -1;
    };
    for (auto [ab, v] : sem.alpha) s.coef(pos(ab.second), pos(ab.first)) = v;
    for (int k = 0; k < m; ++k) {
        auto [a, b] = bi[k];
        const int lam = n + k;
        s.coef(pos(a), lam) = sem.beta.at({a, b});
        s.coef(pos(b), lam) = sem.beta.at({b, a});
        s.noise_cov(lam, lam) = sem.lambda_var.at({std::min(a, b), std::max(a, b)});
    }
    const Eigen::MatrixXd sigma = detail::spd_inverse(sem.error_precision, "error precision").inverse;
    for (int i = 0; i < n; ++i) {
        s.coef(i, n + m + i) = 1.0;
        for (int j = 0; j < n; ++j) s.noise_cov(n + m + i, n + m + j) = sigma(i, j);
    }
    return s;
}

inline bool ci_oracle(const GaussianDist& d, int x, int y, NodeSet z, double tol = 1e-7) {
    return std::abs(partial_correlation(d, x, y, z.to_vector())) < tol;
}

/// n draws, one per row, columns ordered as d.vars.
inline Eigen::MatrixXd sample(const GaussianDist& d, int n, std::uint64_t seed) {
    if (n < 1) throw InputError("sample size must be at least 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const int k = d.dim();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.cov);
    const Eigen::MatrixXd root =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Eigen::MatrixXd out(n, k);
    Eigen::VectorXd z(k);
    for (int r = 0; r < n; ++r) {
        for (int j = 0; j < k; ++j) z(j) = normal(rng);
        out.row(r) = (d.mean + root * z).transpose();
    }
    return out;
}

inline double loglik(const GaussianDist& d, const Eigen::MatrixXd& data) {
    if (data.cols() != d.dim()) throw InputError("data has the wrong number of columns");
    auto inv = detail::spd_inverse(d.cov, "covariance");
    double total = 0.0;
    const double norm = inv.log_det + d.dim() * std::log(2.0 * M_PI);
    for (int r = 0; r < data.rows(); ++r) {
        const Eigen::VectorXd res = data.row(r).transpose() - d.mean;
        total += -0.5 * (res.dot(inv.inverse * res) + norm);
    }
    return total;
}

namespace detail {

/// Maximum-likelihood covariance with zero precision off the given adjacency
/// (graphical regression, iterated to convergence).
inline Eigen::MatrixXd fit_covariance_selection(const Eigen::MatrixXd& s, const std::vector<std::vector<int>>& adj) {
    const int p = static_cast<int>(s.rows());
    Eigen::MatrixXd w = s;
    for (int iter = 0; iter < 500; ++iter) {
        const Eigen::MatrixXd old = w;
        for (int j = 0; j < p; ++j) {
            std::vector<int> rest;
            for (int k = 0; k < p; ++k)
                if (k != j) rest.push_back(k);
            Eigen::VectorXd w12 = Eigen::VectorXd::Zero(p - 1);
            const auto& nb = adj[j];
            if (!nb.empty()) {
                std::vector<int> nb_pos;
                for (int v : nb) nb_pos.push_back(static_cast<int>(std::find(rest.begin(), rest.end(), v) - rest.begin()));
                const Eigen::MatrixXd w11 = take(w, rest, rest);
                const Eigen::MatrixXd a = take(w11, nb_pos, nb_pos);
                Eigen::VectorXd rhs(nb.size());
                for (std::size_t k = 0; k < nb.size(); ++k) rhs(k) = s(nb[k], j);
                const Eigen::VectorXd b_nb = a.ldlt().solve(rhs);
                Eigen::VectorXd b = Eigen::VectorXd::Zero(p - 1);
                for (std::size_t k = 0; k < nb.size(); ++k) b(nb_pos[k]) = b_nb(k);
                w12 = w11 * b;
            }
            for (int k = 0; k < p - 1; ++k) {
                w(rest[k], j) = w12(k);
                w(j, rest[k]) = w12(k);
            }
        }
        if ((w - old).cwiseAbs().maxCoeff() < 1e-12) break;
    }
    return w;
}

} // namespace detail

/// Log-likelihood after refitting to the graph: directed coefficients and
/// intercepts by generalized least squares, alternated with the residual
/// covariance fit whose precision is zero off the line skeleton. Graphs with
/// bidirected edges are not supported.
inline double loglik_refit(const Admg& g, const std::vector<int>& columns, const Eigen::MatrixXd& data) {
    if (g.has_bidirected_edges()) throw UnsupportedExpression("refit does not support bidirected edges");
    const int n = static_cast<int>(data.rows());
    const int d = static_cast<int>(columns.size());
    if (data.cols() != d) throw InputError("data has the wrong number of columns");
    const int params = d + static_cast<int>(g.directed_edges().size()) + d + static_cast<int>(g.undirected_edges().size());
    if (n < params) throw InputError("insufficient data for refit: " + std::to_string(n) + " rows, " +
                                     std::to_string(params) + " parameters");
    auto col = [&](int node) {
        for (int i = 0; i < d; ++i)
            if (columns[i] == node) return i;
        throw InputError("data lacks column for " + g.label(node));
    };
    std::vector<Eigen::MatrixXd> design(d);
    std::vector<int> offset(d + 1, 0);
    for (int i = 0; i < d; ++i) {
        const auto pa = g.parents(columns[i]).to_vector();
        design[i].resize(n, pa.size() + 1);
        design[i].col(0).setOnes();
        for (std::size_t k = 0; k < pa.size(); ++k) design[i].col(k + 1) = data.col(col(pa[k]));
        offset[i + 1] = offset[i] + static_cast<int>(design[i].cols());
    }
    std::vector<std::vector<int>> adj(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && g.has_undirected(columns[i], columns[j])) adj[i].push_back(j);

    Eigen::MatrixXd resid(n, d);
    auto residuals = [&](const Eigen::VectorXd& theta) {
        for (int i = 0; i < d; ++i)
            resid.col(i) = data.col(i) - design[i] * theta.segment(offset[i], design[i].cols());
    };
    Eigen::VectorXd theta(offset[d]);
    for (int i = 0; i < d; ++i)
        theta.segment(offset[i], design[i].cols()) = design[i].colPivHouseholderQr().solve(data.col(i));

    GaussianDist fitted;
    fitted.vars = columns;
    fitted.mean = Eigen::VectorXd::Zero(d);
    double best = -INFINITY;
    for (int iter = 0; iter < 200; ++iter) {
        residuals(theta);
        fitted.cov = detail::fit_covariance_selection(resid.transpose() * resid / n, adj);
        const double ll = loglik(fitted, resid);
        if (ll - best < 1e-9 * std::max(1.0, std::abs(ll))) {
            best = std::max(best, ll);
            break;
        }
        best = ll;
        const Eigen::MatrixXd k = detail::spd_inverse(fitted.cov, "residual covariance").inverse;
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(offset[d], offset[d]);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(offset[d]);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (k(i, j) == 0.0) continue;
                lhs.block(offset[i], offset[j], design[i].cols(), design[j].cols()) +=
                    k(i, j) * design[i].transpose() * design[j];
                rhs.segment(offset[i], design[i].cols()) += k(i, j) * design[i].transpose() * data.col(j);
            }
        theta = lhs.ldlt().solve(rhs);
    }
    return best;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const GaussianSem& sem) {
    using nlohmann::json;
    const Admg& g = sem.graph;
    json j;
    j["graph"] = serialize_graph(g);
    j["alpha"] = json::array();
    for (auto [ab, v] : sem.alpha) j["alpha"].push_back({{"from", g.label(ab.first)}, {"to", g.label(ab.second)}, {"value", v}});
    j["beta"] = json::array();
    for (auto [ab, v] : sem.beta) j["beta"].push_back({{"node", g.label(ab.first)}, {"other", g.label(ab.second)}, {"value", v}});
    j["lambdaVar"] = json::array();
    for (auto [ab, v] : sem.lambda_var) j["lambdaVar"].push_back({{"a", g.label(ab.first)}, {"b", g.label(ab.second)}, {"value", v}});
    json rows = json::array();
    for (int i = 0; i < sem.error_precision.rows(); ++i) {
        json r = json::array();
        for (int k = 0; k < sem.error_precision.cols(); ++k) r.push_back(sem.error_precision(i, k));
        rows.push_back(r);
    }
    j["errorPrecision"] = rows;
    j["nodes"] = json::array();
    for (int v : g.nodes()) j["nodes"].push_back(g.label(v));
    return j;
}

/// Reads a SEM. The matrix rows follow "nodes" when given, else graph index order.
/// "errorCovariance" may replace "errorPrecision".
inline GaussianSem sem_from_json(const nlohmann::json& j) {
    GaussianSem sem;
    sem.graph = parse_graph(j.at("graph").get<std::string>());
    const Admg& g = sem.graph;
    for (const auto& a : j.value("alpha", nlohmann::json::array()))
        sem.alpha[{g.index(a.at("from").get<std::string>()), g.index(a.at("to").get<std::string>())}] = a.at("value").get<double>();
    for (const auto& b : j.value("beta", nlohmann::json::array()))
        sem.beta[{g.index(b.at("node").get<std::string>()), g.index(b.at("other").get<std::string>())}] = b.at("value").get<double>();
    for (const auto& l : j.value("lambdaVar", nlohmann::json::array())) {
        const int a = g.index(l.at("a").get<std::string>());
        const int b = g.index(l.at("b").get<std::string>());
        sem.lambda_var[{std::min(a, b), std::max(a, b)}] = l.at("value").get<double>();
    }
    const auto nodes = g.nodes().to_vector();
    const int n = static_cast<int>(nodes.size());
    std::vector<int> order = nodes;
    if (j.contains("nodes")) {
        order.clear();
        for (const auto& s : j.at("nodes")) order.push_back(g.index(s.get<std::string>()));
        if (static_cast<int>(order.size()) != n) throw InputError("\"nodes\" must list every node once");
    }
    const bool by_cov = !j.contains("errorPrecision") && j.contains("errorCovariance");
    const auto& rows = by_cov ? j.at("errorCovariance") : j.at("errorPrecision");
    if (static_cast<int>(rows.size()) != n) throw InputError("error matrix has the wrong dimension");
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n) throw InputError("error matrix has the wrong dimension");
        for (int k = 0; k < n; ++k) {
            const int pi = static_cast<int>(std::find(nodes.begin(), nodes.end(), order[i]) - nodes.begin());
            const int pk = static_cast<int>(std::find(nodes.begin(), nodes.end(), order[k]) - nodes.begin());
            m(pi, pk) = rows[i][k].get<double>();
        }
    }
    if (by_cov) {
        m = detail::spd_inverse(m, "error covariance").inverse;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (std::abs(m(i, k)) < 1e-12) m(i, k) = 0.0;
    }
    sem.error_precision = m;
    sem.validate();
    return sem;
}

} // namespace admg

#endif // ADMG_SEM_HPP

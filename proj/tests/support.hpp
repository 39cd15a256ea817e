#ifndef ADMG_TEST_SUPPORT_HPP
#define ADMG_TEST_SUPPORT_HPP

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "admg/dsl.hpp"
#include "admg/graph.hpp"

namespace testing_support {

inline std::vector<std::string> letters(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
    return out;
}

struct EdgeMix {
    double directed = 0.35;
    double undirected = 0.25;
    double bidirected = 0.25;
};

/// Random ADMG whose directed part follows a random topological order.
inline admg::Admg random_admg(int n, std::mt19937_64& rng, EdgeMix mix = {}) {
    admg::Admg g(letters(n));
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (u(rng) < mix.directed) g.add_directed(order[i], order[j]);
            if (u(rng) < mix.undirected) g.add_undirected(order[i], order[j]);
            if (u(rng) < mix.bidirected) g.add_bidirected(order[i], order[j]);
        }
    }
    return g;
}

/// Every ADMG on n labelled nodes (12 edge configurations per pair, cyclic ones dropped).
inline std::vector<admg::Admg> all_admgs(int n, bool lines = true, bool biarrows = true) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<admg::Admg> out;
    std::vector<int> conf(pairs.size(), 0);
    while (true) {
        admg::Admg g(letters(n));
        bool ok = true;
        for (std::size_t k = 0; k < pairs.size() && ok; ++k) {
            auto [a, b] = pairs[k];
            int c = conf[k];
            int dir = c % 3, line = (c / 3) % 2, bi = c / 6;
            if ((line && !lines) || (bi && !biarrows)) {
                ok = false;
                break;
            }
            if (line) g.add_undirected(a, b);
            if (bi) g.add_bidirected(a, b);
            if (dir == 1 || dir == 2) {
                int s = dir == 1 ? a : b, t = dir == 1 ? b : a;
                if (g.descendants_of(admg::NodeSet::single(t)).contains(s)) {
                    ok = false;
                } else {
                    g.add_directed(s, t);
                }
            }
        }
        if (ok) out.push_back(g);
        std::size_t k = 0;
        while (k < conf.size() && ++conf[k] == 12) conf[k++] = 0;
        if (k == conf.size()) break;
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& name) { return std::string(ADMG_DATA_DIR) + "/" + name; }

inline admg::Admg load_graph(const std::string& name) { return admg::parse_graph(read_file(data_path(name))); }

} // namespace testing_support

#endif

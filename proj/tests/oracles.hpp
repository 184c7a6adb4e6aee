#pragma once

// Brute-force references shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

// Rewriting closure for right-angled Coxeter words: all words over `gens`
// letters of length <= max_len are nodes; edges are swaps of adjacent commuting
// letters and deletion of an adjacent equal pair (both directions). Components
// are group elements (any word reduces without growing, and reduced words for
// the same element differ by swaps), so the shortlex least word of a component
// is the normal form of every member.
class CoxeterClosure {
public:
    CoxeterClosure(int gens, int max_len, const std::vector<std::vector<bool>>& commute)
        : gens_(gens), max_len_(max_len) {
        offset_.push_back(0);
        std::size_t total = 0;
        std::size_t count = 1;
        for (int L = 0; L <= max_len; ++L) {
            total += count;
            offset_.push_back(total);
            count *= static_cast<std::size_t>(gens);
        }
        parent_.resize(total);
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
        std::vector<int> w;
        for (int L = 1; L <= max_len; ++L) {
            const std::size_t n = offset_[static_cast<std::size_t>(L) + 1] - offset_[static_cast<std::size_t>(L)];
            for (std::size_t code = 0; code < n; ++code) {
                w = decode(L, code);
                const std::size_t me = offset_[static_cast<std::size_t>(L)] + code;
                for (int i = 0; i + 1 < L; ++i) {
                    const int a = w[static_cast<std::size_t>(i)], b = w[static_cast<std::size_t>(i) + 1];
                    if (a == b) {
                        std::vector<int> v = w;
                        v.erase(v.begin() + i, v.begin() + i + 2);
                        unite(me, index(v));
                    } else if (commute[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) {
                        std::vector<int> v = w;
                        std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i) + 1]);
                        unite(me, index(v));
                    }
                }
            }
        }
        // Node indices are already in shortlex order, so the least index of a
        // component is its normal form.
        best_.assign(total, total);
        for (std::size_t i = 0; i < total; ++i) {
            const std::size_t r = find(i);
            best_[r] = std::min(best_[r], i);
        }
    }

    std::size_t size() const { return parent_.size(); }

    std::vector<int> word(std::size_t node) const {
        int L = 0;
        while (offset_[static_cast<std::size_t>(L) + 1] <= node) ++L;
        return decode(L, node - offset_[static_cast<std::size_t>(L)]);
    }

    std::vector<int> normal_form(std::size_t node) { return word(best_[find(node)]); }

    std::size_t index(const std::vector<int>& w) const {
        std::size_t code = 0;
        for (int c : w) code = code * static_cast<std::size_t>(gens_) + static_cast<std::size_t>(c);
        return offset_[w.size()] + code;
    }

private:
    std::vector<int> decode(int L, std::size_t code) const {
        std::vector<int> w(static_cast<std::size_t>(L));
        for (int i = L - 1; i >= 0; --i) {
            w[static_cast<std::size_t>(i)] = static_cast<int>(code % static_cast<std::size_t>(gens_));
            code /= static_cast<std::size_t>(gens_);
        }
        return w;
    }
    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

    int gens_, max_len_;
    std::vector<std::size_t> offset_, parent_, best_;
};

}  // namespace oracle

namespace oracle {

// Levi-Civita data of a 2D metric g(y) = [[a, b], [b, c]] depending on y only,
// by fourth-order central differences of the components. Index 0 = x, 1 = y.
using Metric2 = std::function<std::array<double, 3>(double)>;
using Gamma2 = std::array<std::array<std::array<double, 2>, 2>, 2>;  // G[k][i][j]

inline std::array<double, 3> d_dy(const Metric2& g, double y, double h) {
    const auto p2 = g(y + 2 * h), p1 = g(y + h), m1 = g(y - h), m2 = g(y - 2 * h);
    std::array<double, 3> d{};
    for (int i = 0; i < 3; ++i) d[i] = (-p2[i] + 8 * p1[i] - 8 * m1[i] + m2[i]) / (12 * h);
    return d;
}

inline Gamma2 christoffel_fd(const Metric2& g, double y, double h = 1e-3) {
    const auto m = g(y);
    const auto dm = d_dy(g, y, h);
    const double det = m[0] * m[2] - m[1] * m[1];
    const double ginv[2][2] = {{m[2] / det, -m[1] / det}, {-m[1] / det, m[0] / det}};
    const auto comp = [](const std::array<double, 3>& a, int i, int j) { return i == 0 && j == 0 ? a[0] : (i == 1 && j == 1 ? a[2] : a[1]); };
    // d_i g_jl is non-zero only for i = 1.
    const auto dg = [&](int i, int j, int l) { return i == 1 ? comp(dm, j, l) : 0.0; };
    Gamma2 G{};
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0;
                for (int l = 0; l < 2; ++l) s += ginv[k][l] * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                G[k][i][j] = s / 2;
            }
    return G;
}

// R^a_{bcd} with R(d_c, d_d) d_b = R^a_{bcd} d_a and R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
using Riemann2 = std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2>;

inline Riemann2 riemann_fd(const Metric2& g, double y, double h = 1e-3) {
    const Gamma2 G = christoffel_fd(g, y, h);
    Gamma2 dG{};  // d_y Gamma
    const Gamma2 p2 = christoffel_fd(g, y + 2 * h, h), p1 = christoffel_fd(g, y + h, h),
                 m1 = christoffel_fd(g, y - h, h), m2 = christoffel_fd(g, y - 2 * h, h);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                dG[a][b][c] = (-p2[a][b][c] + 8 * p1[a][b][c] - 8 * m1[a][b][c] + m2[a][b][c]) / (12 * h);
    const auto dGam = [&](int c, int a, int i, int j) { return c == 1 ? dG[a][i][j] : 0.0; };
    Riemann2 R{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) {
                    double s = dGam(c, a, d, b) - dGam(d, a, c, b);
                    for (int e = 0; e < 2; ++e) s += G[a][c][e] * G[e][d][b] - G[a][d][e] * G[e][c][b];
                    R[a][b][c][d] = s;
                }
    return R;
}

// K = <R(X,Y)Y, X> / (<X,X><Y,Y> - <X,Y>^2) with X = d_x, Y = d_y.
inline double sectional_curvature_fd(const Metric2& g, double y, double h = 1e-3) {
    const auto R = riemann_fd(g, y, h);
    const auto m = g(y);
    const double num = m[0] * R[0][1][0][1] + m[1] * R[1][1][0][1];
    return num / (m[0] * m[2] - m[1] * m[1]);
}

}  // namespace oracle

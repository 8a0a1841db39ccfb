#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace hoferlab {

// Bounded Nelder-Mead: iterates stay clamped to [lo_i, hi_i].  Deterministic
// given the start simplex; stops on the evaluation cap or simplex collapse.
struct NelderMeadResult {
    std::vector<double> x;
    double value = 0;
    int evals = 0;
};

inline NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> start,
    const std::vector<std::pair<double, double>>& bounds,
    int max_evals,
    double f_spread_tol = 1e-12) {
    const int n = static_cast<int>(start.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    auto clamp = [&](std::vector<double>& x) {
        for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], bounds[i].first, bounds[i].second);
    };

    int evals = 0;
    auto eval = [&](std::vector<double> x) {
        clamp(x);
        ++evals;
        return std::make_pair(f(x), x);
    };

    struct Vertex {
        std::vector<double> x;
        double fx;
    };
    std::vector<Vertex> s;
    clamp(start);
    s.push_back({start, f(start)});
    ++evals;
    for (int i = 0; i < n; ++i) {
        std::vector<double> x = start;
        double span = bounds[i].second - bounds[i].first;
        double step = 0.1 * (span > 0 ? span : 1.0);
        x[i] = (x[i] + step <= bounds[i].second) ? x[i] + step : x[i] - step;
        auto [fx, xc] = eval(x);
        s.push_back({xc, fx});
    }

    auto order = [&]() {
        std::stable_sort(s.begin(), s.end(),
                         [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    };

    order();
    while (evals < max_evals) {
        if (std::abs(s.back().fx - s.front().fx) <
            f_spread_tol * (1.0 + std::abs(s.front().fx)))
            break;

        std::vector<double> centroid(n, 0.0);
        for (int v = 0; v < n; ++v)
            for (int i = 0; i < n; ++i) centroid[i] += s[v].x[i] / n;

        auto blend = [&](double coef) {
            std::vector<double> x(n);
            for (int i = 0; i < n; ++i) x[i] = centroid[i] + coef * (centroid[i] - s.back().x[i]);
            return x;
        };

        auto [fr, xr] = eval(blend(alpha));
        if (fr < s.front().fx) {
            auto [fe, xe] = eval(blend(gamma));
            s.back() = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
        } else if (fr < s[s.size() - 2].fx) {
            s.back() = {xr, fr};
        } else {
            auto [fc, xc] = eval(blend(-rho));
            if (fc < s.back().fx) {
                s.back() = {xc, fc};
            } else {
                for (size_t v = 1; v < s.size(); ++v) {
                    std::vector<double> x(n);
                    for (int i = 0; i < n; ++i)
                        x[i] = s[0].x[i] + sigma * (s[v].x[i] - s[0].x[i]);
                    auto [fx, xs] = eval(x);
                    s[v] = {xs, fx};
                    if (evals >= max_evals) break;
                }
            }
        }
        order();
    }

    return {s.front().x, s.front().fx, evals};
}

}  // namespace hoferlab

#include "panens/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace panens {

// Shortest-augmenting-path formulation with row/column potentials. Rows are
// inserted in index order, which fixes the tie-break among equal-cost optima.
Assignment hungarian_solve(const CostMatrix& m) {
    if (m.rows < 1 || m.cols < 1)
        throw NonFiniteCost("hungarian_solve: matrix must be at least 1x1");
    if (m.costs.size() != static_cast<std::size_t>(m.rows) * m.cols)
        throw NonFiniteCost("hungarian_solve: cost buffer size mismatch");
    for (double c : m.costs)
        if (!std::isfinite(c)) throw NonFiniteCost("hungarian_solve: non-finite cost entry");

    const int n = std::max(m.rows, m.cols);
    auto cost = [&](int r, int c) -> double {
        return (r < m.rows && c < m.cols) ? m.at(r, c) : 0.0;  // zero padding
    };

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0);  // match[j] = row assigned to column j (1-based)
    std::vector<int> way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }

    Assignment out;
    for (int j = 1; j <= n; ++j) {
        const int r = match[j] - 1;
        const int c = j - 1;
        if (r < m.rows && c < m.cols) out.pairs.emplace_back(r, c);
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    for (const auto& [r, c] : out.pairs) out.total_cost += m.at(r, c);
    return out;
}

}  // namespace panens

#include "powerpanel/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <thread>

#include "powerpanel/error.hpp"

namespace powerpanel {

void validate(const ShareTrajectory& t) {
    if (t.shares.size() != t.years.size()) {
        throw Error(ErrorKind::input, "trajectory '" + t.firm_id + "': years and shares differ in length");
    }
    if (t.length() < 2) {
        throw Error(ErrorKind::input, "trajectory '" + t.firm_id + "' has " + std::to_string(t.length()) +
                                          " observations; at least 2 required");
    }
    for (std::size_t i = 1; i < t.years.size(); ++i) {
        if (t.years[i] <= t.years[i - 1]) {
            throw Error(ErrorKind::input, "trajectory '" + t.firm_id + "': years not strictly increasing");
        }
    }
    for (const auto& row : t.shares) {
        double sum = 0.0;
        for (double s : row) {
            if (!std::isfinite(s) || s < 0.0) {
                throw Error(ErrorKind::input, "trajectory '" + t.firm_id + "': invalid share value");
            }
            sum += s;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw Error(ErrorKind::input, "trajectory '" + t.firm_id + "': shares do not sum to 1");
        }
    }
}

std::vector<ShareTrajectory> build_trajectories(const PanelDataset& dataset) {
    std::map<std::string, ShareTrajectory> by_firm;
    for (const auto& rec : dataset.records) {
        if (!rec.derived || !rec.derived->tech_shares) continue;
        auto& t = by_firm[rec.firm_id];
        t.firm_id = rec.firm_id;
        t.years.push_back(rec.year);
        t.shares.push_back(*rec.derived->tech_shares);
    }
    std::vector<ShareTrajectory> out;
    for (auto& [id, t] : by_firm) {
        std::vector<std::size_t> order(t.years.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto x, auto y) { return t.years[x] < t.years[y]; });
        ShareTrajectory sorted{t.firm_id, {}, {}};
        for (auto i : order) {
            sorted.years.push_back(t.years[i]);
            sorted.shares.push_back(t.shares[i]);
        }
        if (sorted.length() >= 2) out.push_back(std::move(sorted));
    }
    return out;
}

double dtw_raw(std::span<const double> a, std::span<const double> b, std::size_t dim, std::optional<int> window) {
    if (dim == 0 || a.size() % dim != 0 || b.size() % dim != 0) {
        throw Error(ErrorKind::input, "series length is not a multiple of the vector dimension");
    }
    const std::size_t n = a.size() / dim;
    const std::size_t m = b.size() / dim;
    if (n == 0 || m == 0) throw Error(ErrorKind::input, "empty series");
    const auto gap = static_cast<long long>(n > m ? n - m : m - n);
    if (window) {
        if (*window < 0) throw Error(ErrorKind::window, "negative window");
        if (gap > *window) {
            throw Error(ErrorKind::window, "length difference " + std::to_string(gap) + " exceeds window " +
                                               std::to_string(*window));
        }
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    // Two rolling rows of the (n+1) x (m+1) cumulative table.
    std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        std::size_t lo = 1, hi = m;
        if (window) {
            const auto w = static_cast<long long>(*window);
            lo = static_cast<std::size_t>(std::max<long long>(1, static_cast<long long>(i) - w));
            hi = static_cast<std::size_t>(std::min<long long>(static_cast<long long>(m), static_cast<long long>(i) + w));
        }
        const double* ai = a.data() + (i - 1) * dim;
        for (std::size_t j = lo; j <= hi; ++j) {
            const double* bj = b.data() + (j - 1) * dim;
            double sq = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = ai[d] - bj[d];
                sq += diff * diff;
            }
            const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
            cur[j] = std::sqrt(sq) + best;
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

namespace {

double dtw_checked(const ShareTrajectory& a, const ShareTrajectory& b, const DtwOptions& options) {
    std::span<const double> sa(a.shares.front().data(), a.length() * kTechCount);
    std::span<const double> sb(b.shares.front().data(), b.length() * kTechCount);
    double d = dtw_raw(sa, sb, kTechCount, options.window);
    if (options.normalize) d /= static_cast<double>(a.length() + b.length());
    return d;
}

}  // namespace

double dtw_distance(const ShareTrajectory& a, const ShareTrajectory& b, const DtwOptions& options) {
    validate(a);
    validate(b);
    return dtw_checked(a, b, options);
}

Eigen::MatrixXd distance_matrix(const std::vector<ShareTrajectory>& trajectories, const DtwOptions& options) {
    const std::size_t n = trajectories.size();
    if (n < 2) throw Error(ErrorKind::input, "distance matrix needs at least 2 trajectories");
    for (const auto& t : trajectories) validate(t);
    if (options.window) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto li = static_cast<long long>(trajectories[i].length());
                const auto lj = static_cast<long long>(trajectories[j].length());
                if (std::abs(li - lj) > *options.window) {
                    throw Error(ErrorKind::window, "pair (" + trajectories[i].firm_id + ", " +
                                                       trajectories[j].firm_id +
                                                       "): length difference exceeds window " +
                                                       std::to_string(*options.window));
                }
            }
        }
    }

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n));
    // Rows are dealt round-robin; each cell is written by exactly one worker.
    auto work = [&](std::size_t offset) {
        for (std::size_t i = offset; i < n; i += workers) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = dtw_checked(trajectories[i], trajectories[j], options);
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
                m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    return m;
}

}  // namespace powerpanel

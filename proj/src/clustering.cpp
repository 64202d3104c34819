#include "powerpanel/clustering.hpp"

#include <cmath>
#include <numeric>
#include <tuple>

#include "powerpanel/error.hpp"

namespace powerpanel {

namespace {

struct PairKey {
    double d;
    std::size_t lo;
    std::size_t hi;

    bool operator<(const PairKey& o) const { return std::tie(d, lo, hi) < std::tie(o.d, o.lo, o.hi); }
};

}  // namespace

Dendrogram hac_average_linkage(const Eigen::MatrixXd& distances, std::vector<std::string> leaf_ids) {
    const auto n = static_cast<std::size_t>(distances.rows());
    if (distances.rows() != distances.cols()) throw Error(ErrorKind::input, "distance matrix is not square");
    if (n < 2) throw Error(ErrorKind::input, "need at least 2 observations to cluster");
    if (!distances.allFinite()) throw Error(ErrorKind::input, "distance matrix has non-finite entries");
    if (leaf_ids.empty()) {
        for (std::size_t i = 0; i < n; ++i) leaf_ids.push_back(std::to_string(i));
    }
    if (leaf_ids.size() != n) throw Error(ErrorKind::input, "leaf id count does not match matrix size");

    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            d[i * n + j] = distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    auto at = [&](std::size_t i, std::size_t j) -> double& { return d[i * n + j]; };

    std::vector<std::size_t> id(n), size(n, 1), nn(n, n);
    std::iota(id.begin(), id.end(), std::size_t{0});
    std::vector<bool> active(n, true);

    auto key = [&](std::size_t s, std::size_t t) {
        return PairKey{at(s, t), std::min(id[s], id[t]), std::max(id[s], id[t])};
    };
    auto rescan = [&](std::size_t s) {
        nn[s] = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (t == s || !active[t]) continue;
            if (nn[s] == n || key(s, t) < key(s, nn[s])) nn[s] = t;
        }
    };
    for (std::size_t s = 0; s < n; ++s) rescan(s);

    Dendrogram out;
    out.leaf_ids = std::move(leaf_ids);
    out.merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t best = n;
        for (std::size_t s = 0; s < n; ++s) {
            if (!active[s] || nn[s] == n) continue;
            if (best == n || key(s, nn[s]) < key(best, nn[best])) best = s;
        }
        std::size_t sa = best, sb = nn[best];
        if (id[sa] > id[sb]) std::swap(sa, sb);
        const double height = at(sa, sb);
        const std::size_t merged = size[sa] + size[sb];
        out.merges.push_back({id[sa], id[sb], height, merged});
        if (step > 0 && height < out.merges[step - 1].height) {
            out.warnings.push_back("merge " + std::to_string(step) + " height " + std::to_string(height) +
                                   " below previous height " + std::to_string(out.merges[step - 1].height));
        }

        const double wa = static_cast<double>(size[sa]);
        const double wb = static_cast<double>(size[sb]);
        for (std::size_t t = 0; t < n; ++t) {
            if (!active[t] || t == sa || t == sb) continue;
            const double v = (wa * at(sa, t) + wb * at(sb, t)) / (wa + wb);
            at(sa, t) = v;
            at(t, sa) = v;
        }
        active[sb] = false;
        id[sa] = n + step;
        size[sa] = merged;

        rescan(sa);
        for (std::size_t t = 0; t < n; ++t) {
            if (!active[t] || t == sa) continue;
            if (nn[t] == sa || nn[t] == sb) {
                rescan(t);
            } else if (key(t, sa) < key(t, nn[t])) {
                nn[t] = sa;
            }
        }
    }
    return out;
}

std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t k) {
    const std::size_t n = dendrogram.leaf_count();
    if (k < 1 || k > n) {
        throw Error(ErrorKind::input, "cut k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
    // Union-find over node ids; the first n-k merges stay applied.
    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t s = 0; s < n - k; ++s) {
        const auto& m = dendrogram.merges[s];
        parent[find(m.left)] = n + s;
        parent[find(m.right)] = n + s;
    }
    std::vector<std::size_t> labels(n);
    std::map<std::size_t, std::size_t> root_label;
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const auto root = find(leaf);
        auto [it, inserted] = root_label.emplace(root, root_label.size());
        labels[leaf] = it->second;
    }
    return labels;
}

std::vector<std::size_t> medoids(const Eigen::MatrixXd& distances, const std::vector<std::size_t>& labels,
                                 std::size_t k) {
    std::vector<std::size_t> best(k, labels.size());
    std::vector<double> best_cost(k, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        double cost = 0.0;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] == labels[i]) cost += distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        const auto c = labels[i];
        if (best[c] == labels.size() || cost < best_cost[c]) {
            best[c] = i;
            best_cost[c] = cost;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (best[c] == labels.size()) throw Error(ErrorKind::labeling, "cluster " + std::to_string(c) + " is empty");
    }
    return best;
}

std::vector<DominantTechnology> dominant_technology(const std::vector<std::size_t>& labels, std::size_t k,
                                                   const std::vector<ShareTrajectory>& trajectories) {
    if (labels.size() != trajectories.size()) {
        throw Error(ErrorKind::labeling, "every labeled firm needs a trajectory");
    }
    std::vector<TechVector> sums(k, TechVector{});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& t = trajectories[i];
        if (t.shares.empty()) throw Error(ErrorKind::labeling, "firm '" + t.firm_id + "' has an empty trajectory");
        TechVector mean{};
        for (const auto& row : t.shares) {
            for (std::size_t j = 0; j < kTechCount; ++j) mean[j] += row[j];
        }
        for (std::size_t j = 0; j < kTechCount; ++j) sums[labels[i]][j] += mean[j] / static_cast<double>(t.length());
        ++counts[labels[i]];
    }
    std::vector<DominantTechnology> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw Error(ErrorKind::labeling, "cluster " + std::to_string(c) + " is empty");
        std::size_t arg = 0;
        double top = sums[c][0] / static_cast<double>(counts[c]);
        bool tie = false;
        for (std::size_t j = 1; j < kTechCount; ++j) {
            const double v = sums[c][j] / static_cast<double>(counts[c]);
            if (std::abs(v - top) <= 1e-12) {
                tie = true;
            } else if (v > top) {
                arg = j;
                top = v;
                tie = false;
            }
        }
        out[c] = {kTechnologies[arg], top, tie};
    }
    return out;
}

ClusterAssignment assign_clusters(const Dendrogram& dendrogram, std::size_t k, const Eigen::MatrixXd& distances,
                                  const std::vector<ShareTrajectory>& trajectories) {
    const auto labels = cut(dendrogram, k);
    ClusterAssignment out;
    out.k = k;
    for (std::size_t i = 0; i < labels.size(); ++i) out.labels[dendrogram.leaf_ids[i]] = labels[i];
    for (auto m : medoids(distances, labels, k)) out.medoids.push_back(dendrogram.leaf_ids[m]);
    out.dominant = dominant_technology(labels, k, trajectories);
    return out;
}

std::optional<std::size_t> ClusterAssignment::label_of(const std::string& firm_id) const {
    if (auto it = labels.find(firm_id); it != labels.end()) return it->second;
    return std::nullopt;
}

std::vector<std::size_t> ClusterAssignment::members_count() const {
    std::vector<std::size_t> counts(k, 0);
    for (const auto& [firm, c] : labels) ++counts[c];
    return counts;
}

std::string ClusterAssignment::cluster_name(std::size_t cluster) const {
    if (cluster < dominant.size()) return std::string(name_of(dominant[cluster].technology));
    return "cluster" + std::to_string(cluster);
}

}  // namespace powerpanel

#include "powerpanel/validity.hpp"

#include <limits>
#include <algorithm>
#include <map>

#include "powerpanel/clustering.hpp"
#include "powerpanel/error.hpp"

namespace powerpanel {

namespace {

std::size_t count_clusters(const std::vector<std::size_t>& labels) {
    std::size_t k = 0;
    for (auto l : labels) k = std::max(k, l + 1);
    return k;
}

void check_inputs(const Eigen::MatrixXd& distances, const std::vector<std::size_t>& labels, std::size_t k) {
    if (static_cast<std::size_t>(distances.rows()) != labels.size() || distances.rows() != distances.cols()) {
        throw Error(ErrorKind::input, "distance matrix and labels disagree in size");
    }
    if (k < 2) throw Error(ErrorKind::undefined_score, "validity index needs at least 2 clusters");
    std::vector<std::size_t> counts(k, 0);
    for (auto l : labels) ++counts[l];
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw Error(ErrorKind::undefined_score, "cluster " + std::to_string(c) + " is empty");
    }
}

}  // namespace

double silhouette(const Eigen::MatrixXd& distances, const std::vector<std::size_t>& labels) {
    const std::size_t k = count_clusters(labels);
    check_inputs(distances, labels, k);
    const std::size_t n = labels.size();
    std::vector<std::size_t> counts(k, 0);
    for (auto l : labels) ++counts[l];

    double total = 0.0;
    std::vector<double> sums(k);
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] == 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sums[labels[j]] += distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        const double a = sums[labels[i]] / static_cast<double>(counts[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c != labels[i]) b = std::min(b, sums[c] / static_cast<double>(counts[c]));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

double davies_bouldin(const Eigen::MatrixXd& distances, const std::vector<std::size_t>& labels) {
    const std::size_t k = count_clusters(labels);
    check_inputs(distances, labels, k);
    const auto med = medoids(distances, labels, k);
    std::vector<double> scatter(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        scatter[labels[i]] +=
            distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(med[labels[i]]));
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) scatter[c] /= static_cast<double>(counts[c]);

    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            const double sep = distances(static_cast<Eigen::Index>(med[i]), static_cast<Eigen::Index>(med[j]));
            if (sep <= 0.0) {
                throw Error(ErrorKind::degenerate_separation, "medoids of clusters " + std::to_string(i) + " and " +
                                                                  std::to_string(j) + " coincide");
            }
            worst = std::max(worst, (scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) throw Error(ErrorKind::input, "label vectors differ in length");
    const auto n = static_cast<double>(a.size());
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    std::map<std::pair<std::size_t, std::size_t>, double> table;
    std::map<std::size_t, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [cell, c] : table) index += choose2(c);
    for (const auto& [r, c] : rows) sum_rows += choose2(c);
    for (const auto& [r, c] : cols) sum_cols += choose2(c);
    const double expected = sum_rows * sum_cols / choose2(n);
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

}  // namespace powerpanel

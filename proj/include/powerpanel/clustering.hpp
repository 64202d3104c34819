#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "powerpanel/dtw.hpp"
#include "powerpanel/technology.hpp"

namespace powerpanel {

// Node ids follow the usual convention: leaves are 0..n-1 and the cluster
// created by merge s gets id n + s.
struct Merge {
    std::size_t left = 0;   // smaller node id
    std::size_t right = 0;  // larger node id
    double height = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::vector<Merge> merges;
    std::vector<std::string> leaf_ids;
    // Non-monotone heights are reported here rather than thrown.
    std::vector<std::string> warnings;

    std::size_t leaf_count() const noexcept { return merges.size() + 1; }
};

// Average-linkage agglomeration with Lance-Williams updates. Ties go to the
// lexicographically smallest (min id, max id) pair.
Dendrogram hac_average_linkage(const Eigen::MatrixXd& distances, std::vector<std::string> leaf_ids = {});

// Per-leaf labels after undoing the last k-1 merges. Labels are numbered in
// order of each cluster's smallest leaf index.
std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t k);

struct DominantTechnology {
    Technology technology = Technology::solar;
    double mean_share = 0.0;
    bool tie = false;
};

struct ClusterAssignment {
    std::size_t k = 0;
    std::map<std::string, std::size_t> labels;
    std::vector<std::string> medoids;
    std::vector<DominantTechnology> dominant;

    std::optional<std::size_t> label_of(const std::string& firm_id) const;
    std::vector<std::size_t> members_count() const;
    // "wind", "gas", ...; falls back to "cluster<c>" when unlabeled.
    std::string cluster_name(std::size_t cluster) const;
};

// Medoid of each cluster: the member minimizing total within-cluster
// distance, ties to the smallest leaf index. Returns leaf indices.
std::vector<std::size_t> medoids(const Eigen::MatrixXd& distances, const std::vector<std::size_t>& labels,
                                 std::size_t k);

// Per cluster: average of members' time-mean share vectors, arg-max label.
std::vector<DominantTechnology> dominant_technology(const std::vector<std::size_t>& labels, std::size_t k,
                                                   const std::vector<ShareTrajectory>& trajectories);

// Labels, medoids and dominant technologies for a k-cut.
ClusterAssignment assign_clusters(const Dendrogram& dendrogram, std::size_t k, const Eigen::MatrixXd& distances,
                                  const std::vector<ShareTrajectory>& trajectories);

}  // namespace powerpanel

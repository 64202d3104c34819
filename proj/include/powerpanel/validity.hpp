#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace powerpanel {

// Mean silhouette over all points; singleton clusters contribute 0.
double silhouette(const Eigen::MatrixXd& distances, const std::vector<std::size_t>& labels);

// Medoid-based Davies-Bouldin index. Scatter is the mean member-to-medoid
// distance, separation the medoid-to-medoid distance.
double davies_bouldin(const Eigen::MatrixXd& distances, const std::vector<std::size_t>& labels);

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

}  // namespace powerpanel

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace pokm {

using Index = Eigen::Index;

// Points are stored one per row; row-major keeps each point contiguous.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

/// Membership of one element in one or two clusters.
///
/// When a secondary cluster is present the element is at least as close to
/// the primary mean as to the secondary one.
struct Assignment {
  Index primary = 0;
  std::optional<Index> secondary;

  static Assignment single(Index c) { return {c, std::nullopt}; }
  static Assignment dual(Index a, Index b) { return {a, b}; }

  bool is_dual() const { return secondary.has_value(); }
  int size() const { return is_dual() ? 2 : 1; }
  bool contains(Index c) const { return primary == c || (secondary && *secondary == c); }

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

using Assignments = std::vector<Assignment>;

/// N points in n dimensions with optional unique row labels.
template <typename Scalar>
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(Matrix<Scalar> points, std::vector<std::string> labels = {})
      : points_(std::move(points)), labels_(std::move(labels)) {
    if (points_.rows() < 1 || points_.cols() < 1)
      throw std::invalid_argument("dataset must have at least one row and one column");
    for (Index r = 0; r < points_.rows(); ++r)
      for (Index c = 0; c < points_.cols(); ++c)
        if (!std::isfinite(static_cast<double>(points_(r, c))))
          throw std::invalid_argument("non-finite value at row " + std::to_string(r) +
                                      ", column " + std::to_string(c));
    if (!labels_.empty()) {
      if (static_cast<Index>(labels_.size()) != points_.rows())
        throw std::invalid_argument("label count does not match row count");
      std::unordered_set<std::string> seen;
      for (const auto& l : labels_)
        if (!seen.insert(l).second) throw std::invalid_argument("duplicate row label '" + l + "'");
    }
  }

  const Matrix<Scalar>& points() const { return points_; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }

  auto row(Index j) const { return points_.row(j); }

 private:
  Matrix<Scalar> points_;
  std::vector<std::string> labels_;
};

enum class InitMethod { RandomPoints, GreedySpread };

struct FitConfig {
  Index k = 8;
  double m = 2.321928094887362;  // log2(5), overlap level 1/3
  InitMethod init = InitMethod::RandomPoints;
  int restarts = 1;
  int max_iterations = 500;
  std::uint64_t seed = 0;
  // Worker threads for restarts; 0 picks the hardware concurrency.
  unsigned threads = 0;

  void validate() const {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (!(m >= 1.0) || !std::isfinite(m)) throw std::invalid_argument("m must be finite and >= 1");
    if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  }
};

/// Fitted means, memberships and objective of one run.
template <typename Scalar>
struct ClusterModel {
  Matrix<Scalar> means;
  Assignments assignments;
  Scalar objective = 0;
  int iterations = 0;
  bool converged = false;
  double m = 1.0;
  std::uint64_t seed = 0;

  Index k() const { return means.rows(); }
};

}  // namespace pokm

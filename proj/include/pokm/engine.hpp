#pragma once

// Pairwise overlapping k-means: every element belongs to one or two
// clusters. An element's cost is its squared distance to its mean when it
// belongs to one cluster, and (d1 + d2) / 2^m when it is shared by two.

#include "pokm/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pokm {

template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar squared_distance(const Eigen::MatrixBase<DerivedX>& x,
                                           const Eigen::MatrixBase<DerivedY>& y) {
  return (x.reshaped() - y.reshaped()).squaredNorm();
}

/// Weight of a shared element in each of its two clusters.
template <typename Scalar>
Scalar dual_weight(double m) {
  return static_cast<Scalar>(std::exp2(-m));
}

template <typename Derived, typename Scalar>
void check_point_shape(const Eigen::MatrixBase<Derived>& x, const Matrix<Scalar>& means) {
  if (means.rows() < 1 || means.cols() < 1) throw std::invalid_argument("means matrix is empty");
  if (x.size() != means.cols())
    throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                " but means have dimension " + std::to_string(means.cols()));
}

/// Optimal one-or-two cluster membership of x for fixed means.
///
/// The two nearest means are found with lowest-index tie-breaking. The
/// element stays with the nearest one when d1 < (d1 + d2) / 2^m and is
/// shared otherwise, so an exact tie at m = 1 gives a shared element.
template <typename Derived, typename Scalar>
Assignment assign_element(const Eigen::MatrixBase<Derived>& x, const Matrix<Scalar>& means, double m) {
  check_point_shape(x, means);
  const Index k = means.rows();
  if (k == 1) return Assignment::single(0);

  Index i1 = -1, i2 = -1;
  Scalar d1 = std::numeric_limits<Scalar>::infinity();
  Scalar d2 = d1;
  for (Index i = 0; i < k; ++i) {
    const Scalar d = squared_distance(x, means.row(i));
    if (d < d1) {
      i2 = i1, d2 = d1;
      i1 = i, d1 = d;
    } else if (d < d2) {
      i2 = i, d2 = d;
    }
  }
  if (i2 < 0) i2 = (i1 == 0) ? 1 : 0;  // unreachable for finite distances

  if (d1 < (d1 + d2) * dual_weight<Scalar>(m)) return Assignment::single(i1);
  return Assignment::dual(i1, i2);
}

template <typename Scalar>
Assignments assign_all(const Dataset<Scalar>& data, const Matrix<Scalar>& means, double m) {
  Assignments out;
  out.reserve(static_cast<std::size_t>(data.size()));
  for (Index j = 0; j < data.size(); ++j) out.push_back(assign_element(data.row(j), means, m));
  return out;
}

template <typename Derived, typename Scalar>
Scalar element_cost(const Eigen::MatrixBase<Derived>& x, const Assignment& a, const Matrix<Scalar>& means,
                    double m) {
  const Scalar d1 = squared_distance(x, means.row(a.primary));
  if (!a.secondary) return d1;
  return (d1 + squared_distance(x, means.row(*a.secondary))) * dual_weight<Scalar>(m);
}

template <typename Scalar>
void check_model_shape(const Dataset<Scalar>& data, const Assignments& assignments, Index k, Index dim) {
  if (static_cast<Index>(assignments.size()) != data.size())
    throw std::invalid_argument("assignment count " + std::to_string(assignments.size()) +
                                " does not match dataset size " + std::to_string(data.size()));
  if (dim != data.dim()) throw std::invalid_argument("means dimension does not match dataset dimension");
  for (const auto& a : assignments) {
    if (a.primary < 0 || a.primary >= k || (a.secondary && (*a.secondary < 0 || *a.secondary >= k)))
      throw std::invalid_argument("assignment references a cluster outside [0, k)");
    if (a.secondary && *a.secondary == a.primary)
      throw std::invalid_argument("dual assignment repeats the same cluster");
  }
}

/// Total cost J(H; A) over all elements.
template <typename Scalar>
Scalar objective(const Dataset<Scalar>& data, const Assignments& assignments, const Matrix<Scalar>& means,
                 double m) {
  check_model_shape(data, assignments, means.rows(), means.cols());
  Scalar total = 0;
  for (Index j = 0; j < data.size(); ++j)
    total += element_cost(data.row(j), assignments[static_cast<std::size_t>(j)], means, m);
  return total;
}

/// Weighted means for fixed memberships: exclusive members weigh 1, shared
/// members weigh 1/2^m.
///
/// A cluster left without members is re-seeded at the element that
/// contributes most to the objective under the other clusters' new means
/// (lowest index on ties, never reusing a point for two empty clusters).
template <typename Scalar>
Matrix<Scalar> update_means(const Dataset<Scalar>& data, const Assignments& assignments, Index k, double m) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  check_model_shape(data, assignments, k, data.dim());

  // Offsets from each cluster's first member are averaged, so a cluster of
  // identical points gets exactly that point as its mean.
  const Scalar shared = dual_weight<Scalar>(m);
  Matrix<Scalar> sums = Matrix<Scalar>::Zero(k, data.dim());
  Matrix<Scalar> anchor = Matrix<Scalar>::Zero(k, data.dim());
  Vector<Scalar> weights = Vector<Scalar>::Zero(k);
  std::vector<bool> anchored(static_cast<std::size_t>(k), false);
  auto add = [&](Index i, Index j, Scalar w) {
    if (!anchored[static_cast<std::size_t>(i)]) {
      anchor.row(i) = data.row(j);
      anchored[static_cast<std::size_t>(i)] = true;
    }
    sums.row(i) += w * (data.row(j) - anchor.row(i));
    weights(i) += w;
  };
  for (Index j = 0; j < data.size(); ++j) {
    const auto& a = assignments[static_cast<std::size_t>(j)];
    const Scalar w = a.is_dual() ? shared : Scalar(1);
    add(a.primary, j, w);
    if (a.secondary) add(*a.secondary, j, w);
  }

  std::vector<Index> empty;
  for (Index i = 0; i < k; ++i) {
    if (weights(i) > Scalar(0))
      sums.row(i) = anchor.row(i) + sums.row(i) / weights(i);
    else
      empty.push_back(i);
  }
  if (empty.empty()) return sums;

  std::vector<Scalar> cost(static_cast<std::size_t>(data.size()));
  for (Index j = 0; j < data.size(); ++j)
    cost[static_cast<std::size_t>(j)] = element_cost(data.row(j), assignments[static_cast<std::size_t>(j)], sums, m);
  for (Index i : empty) {
    const auto worst = std::max_element(cost.begin(), cost.end());
    const Index j = std::distance(cost.begin(), worst);
    sums.row(i) = data.row(j);
    *worst = -std::numeric_limits<Scalar>::infinity();
  }
  return sums;
}

// Deterministic per-restart seed. Restart 0 uses the base seed unchanged;
// restart r > 0 uses splitmix64(seed ^ splitmix64(r)).
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  if (restart == 0) return seed;
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(restart)));
}

// Farthest-point seeding starting from a given row. Each further mean is the
// unused row farthest from its nearest chosen mean; ties go to the lowest row.
template <typename Scalar>
Matrix<Scalar> greedy_spread_means(const Dataset<Scalar>& data, Index k, Index first_row) {
  const Index n = data.size();
  if (k < 1 || k > n) throw std::invalid_argument("k must lie in [1, N]");
  if (first_row < 0 || first_row >= n) throw std::invalid_argument("first row out of range");

  Matrix<Scalar> means(k, data.dim());
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Vector<Scalar> nearest = Vector<Scalar>::Constant(n, std::numeric_limits<Scalar>::infinity());
  Index pick = first_row;
  for (Index c = 0; c < k; ++c) {
    means.row(c) = data.row(pick);
    used[static_cast<std::size_t>(pick)] = true;
    if (c + 1 == k) break;
    Index best = -1;
    Scalar best_d = -1;
    for (Index j = 0; j < n; ++j) {
      nearest(j) = std::min(nearest(j), squared_distance(data.row(j), means.row(c)));
      if (!used[static_cast<std::size_t>(j)] && nearest(j) > best_d) {
        best = j;
        best_d = nearest(j);
      }
    }
    pick = best;
  }
  return means;
}

template <typename Scalar>
Matrix<Scalar> initialize_means(const Dataset<Scalar>& data, Index k, InitMethod method, std::uint64_t seed) {
  const Index n = data.size();
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (k > n)
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the number of points " + std::to_string(n));

  std::mt19937_64 rng(seed);
  if (method == InitMethod::GreedySpread) {
    std::uniform_int_distribution<Index> first(0, n - 1);
    return greedy_spread_means(data, k, first(rng));
  }

  // Partial Fisher-Yates: the first k slots become a sample without replacement.
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  Matrix<Scalar> means(k, data.dim());
  for (Index c = 0; c < k; ++c) {
    std::uniform_int_distribution<Index> pick(c, n - 1);
    std::swap(rows[static_cast<std::size_t>(c)], rows[static_cast<std::size_t>(pick(rng))]);
    means.row(c) = data.row(rows[static_cast<std::size_t>(c)]);
  }
  return means;
}

/// Objective after every half-step and the memberships produced by every
/// Assignment step of a fit.
template <typename Scalar>
struct FitTrace {
  std::vector<Scalar> objectives;
  std::vector<Assignments> assignments;
};

// Mean movement below which an unchanged assignment counts as a fixed point.
inline constexpr double kMeanTolerance = 1e-10;

/// Alternates Assignment and Update steps from the given means until the
/// memberships stop changing and the means move less than kMeanTolerance,
/// or max_iterations Assignment steps have run. model.iterations counts the
/// rounds before the fixed point; the confirming pass is not included.
template <typename Scalar>
ClusterModel<Scalar> fit_from(const Dataset<Scalar>& data, Matrix<Scalar> means, double m, int max_iterations,
                              FitTrace<Scalar>* trace = nullptr) {
  if (means.rows() < 1 || means.rows() > data.size())
    throw std::invalid_argument("number of means must lie in [1, N]");
  if (means.cols() != data.dim()) throw std::invalid_argument("initial means have the wrong dimension");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");

  ClusterModel<Scalar> model;
  model.m = m;
  const Index k = means.rows();
  Assignments current;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    Assignments next = assign_all(data, means, m);
    const bool unchanged = iter > 1 && next == current;
    current = std::move(next);
    if (trace) {
      trace->assignments.push_back(current);
      trace->objectives.push_back(objective(data, current, means, m));
    }

    Matrix<Scalar> updated = update_means(data, current, k, m);
    const double shift = static_cast<double>((updated - means).cwiseAbs().maxCoeff());
    means = std::move(updated);
    if (trace) trace->objectives.push_back(objective(data, current, means, m));

    model.iterations = iter;
    if (unchanged && shift < kMeanTolerance) {
      model.converged = true;
      model.iterations = iter - 1;  // the last pass only confirmed the fixed point
      break;
    }
  }

  model.objective = objective(data, current, means, m);
  model.means = std::move(means);
  model.assignments = std::move(current);
  return model;
}

/// Single run: initial means from config.init and config.seed, then fit_from.
template <typename Scalar>
ClusterModel<Scalar> fit(const Dataset<Scalar>& data, const FitConfig& config, FitTrace<Scalar>* trace = nullptr) {
  config.validate();
  if (config.k > data.size())
    throw std::invalid_argument("k = " + std::to_string(config.k) + " exceeds the number of points " +
                                std::to_string(data.size()));
  auto model = fit_from(data, initialize_means(data, config.k, config.init, config.seed), config.m,
                        config.max_iterations, trace);
  model.seed = config.seed;
  return model;
}

template <typename Scalar>
struct RestartResult {
  ClusterModel<Scalar> best;
  std::vector<Scalar> objectives;  // one per restart, in restart order
  int best_restart = 0;
};

/// Runs config.restarts independent fits and keeps the smallest objective
/// (lowest restart index on ties). The winner does not depend on thread
/// scheduling.
template <typename Scalar>
RestartResult<Scalar> fit_restarts(const Dataset<Scalar>& data, const FitConfig& config) {
  config.validate();
  const auto restarts = static_cast<std::size_t>(config.restarts);
  std::vector<ClusterModel<Scalar>> models(restarts);
  std::vector<std::exception_ptr> errors(restarts);

  auto run = [&](std::size_t r) {
    try {
      FitConfig c = config;
      c.seed = restart_seed(config.seed, static_cast<int>(r));
      models[r] = fit(data, c);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  };

  unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, restarts));
  if (workers <= 1) {
    for (std::size_t r = 0; r < restarts; ++r) run(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < restarts; r = next++) run(r);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RestartResult<Scalar> result;
  result.objectives.reserve(restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    result.objectives.push_back(models[r].objective);
    if (models[r].objective < models[static_cast<std::size_t>(result.best_restart)].objective)
      result.best_restart = static_cast<int>(r);
  }
  result.best = std::move(models[static_cast<std::size_t>(result.best_restart)]);
  return result;
}

template <typename Scalar>
ClusterModel<Scalar> fit_multi_restart(const Dataset<Scalar>& data, const FitConfig& config) {
  return fit_restarts(data, config).best;
}

}  // namespace pokm

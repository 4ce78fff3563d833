#pragma once

// Slow reference implementations used to check the engine. Nothing here
// calls into engine.hpp so the two paths stay independent.

#include "pokm/types.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pokm::oracle {

template <typename Scalar, typename Derived>
Scalar plain_squared_distance(const Eigen::MatrixBase<Derived>& x, const Matrix<Scalar>& means, Index i) {
  Scalar s = 0;
  for (Index c = 0; c < means.cols(); ++c) {
    const Scalar diff = x(c) - means(i, c);
    s += diff * diff;
  }
  return s;
}

/// Cost of one element under a given membership, evaluated literally.
template <typename Scalar, typename Derived>
Scalar assignment_cost(const Eigen::MatrixBase<Derived>& x, const Matrix<Scalar>& means, const Assignment& a,
                       double m) {
  if (!a.secondary) return plain_squared_distance<Scalar>(x, means, a.primary);
  return (plain_squared_distance<Scalar>(x, means, a.primary) +
          plain_squared_distance<Scalar>(x, means, *a.secondary)) /
         static_cast<Scalar>(std::pow(2.0, m));
}

/// Enumerates all k singletons and k(k-1)/2 pairs and returns the cheapest.
/// Ties keep the earliest candidate: singletons in index order, then pairs
/// in lexicographic order.
template <typename Scalar, typename Derived>
Assignment brute_force_assign(const Eigen::MatrixBase<Derived>& x, const Matrix<Scalar>& means, double m) {
  const Index k = means.rows();
  if (k < 1 || means.cols() < 1) throw std::invalid_argument("means matrix is empty");
  if (x.size() != means.cols()) throw std::invalid_argument("dimension mismatch");

  std::vector<Scalar> d(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) d[static_cast<std::size_t>(i)] = plain_squared_distance<Scalar>(x, means, i);

  Assignment best = Assignment::single(0);
  Scalar best_cost = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < k; ++i) {
    const Assignment cand = Assignment::single(i);
    const Scalar c = assignment_cost<Scalar>(x, means, cand, m);
    if (c < best_cost) best = cand, best_cost = c;
  }
  for (Index i = 0; i < k; ++i)
    for (Index j = i + 1; j < k; ++j) {
      // Closer mean first so the result satisfies the Assignment ordering.
      const bool swap = d[static_cast<std::size_t>(j)] < d[static_cast<std::size_t>(i)];
      const Assignment cand = swap ? Assignment::dual(j, i) : Assignment::dual(i, j);
      const Scalar c = assignment_cost<Scalar>(x, means, cand, m);
      if (c < best_cost) best = cand, best_cost = c;
    }
  return best;
}

/// Evaluates J(H; A) from a dense k x N indicator matrix, term by term.
template <typename Scalar>
Scalar naive_objective(const Dataset<Scalar>& data, const Assignments& assignments, const Matrix<Scalar>& means,
                       double m) {
  const Index k = means.rows();
  const Index n = data.size();
  if (static_cast<Index>(assignments.size()) != n || means.cols() != data.dim())
    throw std::invalid_argument("shape mismatch");

  Eigen::MatrixXi h = Eigen::MatrixXi::Zero(k, n);
  for (Index j = 0; j < n; ++j) {
    const auto& a = assignments[static_cast<std::size_t>(j)];
    if (a.primary < 0 || a.primary >= k || (a.secondary && (*a.secondary < 0 || *a.secondary >= k)))
      throw std::invalid_argument("assignment references a cluster outside [0, k)");
    h(a.primary, j) = 1;
    if (a.secondary) h(*a.secondary, j) = 1;
  }

  Scalar total = 0;
  for (Index j = 0; j < n; ++j) {
    Scalar numerator = 0;
    int members = 0;
    for (Index i = 0; i < k; ++i) {
      numerator += plain_squared_distance<Scalar>(data.row(j), means, i) * h(i, j);
      members += h(i, j);
    }
    total += numerator / static_cast<Scalar>(std::pow(static_cast<double>(members), m));
  }
  return total;
}

/// Plain Lloyd iteration: nearest mean (lowest index on ties), arithmetic
/// mean update, same fixed-point test and empty-cluster re-seeding as the
/// engine. When given, history receives the memberships of every
/// assignment pass.
template <typename Scalar>
ClusterModel<Scalar> reference_kmeans(const Dataset<Scalar>& data, Matrix<Scalar> means, int max_iterations,
                                      std::vector<Assignments>* history = nullptr) {
  const Index k = means.rows();
  const Index n = data.size();
  if (k < 1 || k > n) throw std::invalid_argument("k must lie in [1, N]");
  if (means.cols() != data.dim()) throw std::invalid_argument("dimension mismatch");

  ClusterModel<Scalar> model;
  model.m = 1.0;
  std::vector<Index> owner(static_cast<std::size_t>(n), -1);
  for (int iter = 1; iter <= max_iterations; ++iter) {
    bool changed = false;
    for (Index j = 0; j < n; ++j) {
      Index best = 0;
      Scalar best_d = plain_squared_distance<Scalar>(data.row(j), means, 0);
      for (Index i = 1; i < k; ++i) {
        const Scalar d = plain_squared_distance<Scalar>(data.row(j), means, i);
        if (d < best_d) best = i, best_d = d;
      }
      changed |= owner[static_cast<std::size_t>(j)] != best;
      owner[static_cast<std::size_t>(j)] = best;
    }
    if (history) {
      Assignments snapshot;
      for (Index o : owner) snapshot.push_back(Assignment::single(o));
      history->push_back(std::move(snapshot));
    }

    Matrix<Scalar> sums = Matrix<Scalar>::Zero(k, data.dim());
    std::vector<Scalar> counts(static_cast<std::size_t>(k), 0);
    for (Index j = 0; j < n; ++j) {
      const Index o = owner[static_cast<std::size_t>(j)];
      for (Index c = 0; c < data.dim(); ++c) sums(o, c) += Scalar(1) * data.points()(j, c);
      counts[static_cast<std::size_t>(o)] += 1;
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (Index i = 0; i < k; ++i)
      if (counts[static_cast<std::size_t>(i)] > 0) sums.row(i) /= counts[static_cast<std::size_t>(i)];
    for (Index i = 0; i < k; ++i) {
      if (counts[static_cast<std::size_t>(i)] > 0) continue;
      Index worst = -1;
      Scalar worst_d = -1;
      for (Index j = 0; j < n; ++j) {
        if (taken[static_cast<std::size_t>(j)]) continue;
        const Scalar d = plain_squared_distance<Scalar>(data.row(j), sums, owner[static_cast<std::size_t>(j)]);
        if (d > worst_d) worst = j, worst_d = d;
      }
      taken[static_cast<std::size_t>(worst)] = true;
      sums.row(i) = data.row(worst);
    }

    Scalar shift = 0;
    for (Index i = 0; i < k; ++i)
      for (Index c = 0; c < data.dim(); ++c) shift = std::max(shift, std::abs(sums(i, c) - means(i, c)));
    means = std::move(sums);
    model.iterations = iter;
    if (iter > 1 && !changed && shift < Scalar(1e-10)) {
      model.converged = true;
      model.iterations = iter - 1;
      break;
    }
  }

  model.assignments.clear();
  Scalar total = 0;
  for (Index j = 0; j < n; ++j) {
    const Index o = owner[static_cast<std::size_t>(j)];
    model.assignments.push_back(Assignment::single(o));
    total += plain_squared_distance<Scalar>(data.row(j), means, o);
  }
  model.objective = total;
  model.means = std::move(means);
  return model;
}

}  // namespace pokm::oracle

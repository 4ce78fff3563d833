#include "pokm/calibration.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pokm {

namespace {

void check_m(double m) {
  if (!(m >= 1.0) || !std::isfinite(m))
    throw std::domain_error("m must be a finite value >= 1, got " + std::to_string(m));
}

// Length of each exclusive part relative to the whole segment.
double exclusive_fraction(double m) { return 1.0 / (1.0 + std::sqrt(std::exp2(m) - 1.0)); }

}  // namespace

double m_from_overlap(double r_overlap) {
  if (!(r_overlap >= 0.0 && r_overlap < 1.0))
    throw std::domain_error("overlap level must lie in [0, 1), got " + std::to_string(r_overlap));
  const double ratio = (1.0 + r_overlap) / (1.0 - r_overlap);
  return std::log2(ratio * ratio + 1.0);
}

double overlap_from_m(double m) {
  check_m(m);
  return 1.0 - 2.0 * exclusive_fraction(m);
}

IntervalGeometry interval_geometry(double m, double l_total) {
  check_m(m);
  if (!(l_total > 0.0) || !std::isfinite(l_total))
    throw std::domain_error("interval length must be positive, got " + std::to_string(l_total));
  IntervalGeometry g;
  g.l_total = l_total;
  g.l_exclusive = l_total * exclusive_fraction(m);
  g.l_overlap = l_total - 2.0 * g.l_exclusive;
  return g;
}

OverlapSpec OverlapSpec::from_overlap(double r_overlap) { return {m_from_overlap(r_overlap), r_overlap}; }

OverlapSpec OverlapSpec::from_m(double m) { return {m, overlap_from_m(m)}; }

}  // namespace pokm

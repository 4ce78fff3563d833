#pragma once

namespace pokm {

/// Overlap exponent paired with the relative overlap level it produces
/// between two adjacent means.
struct OverlapSpec {
  double m = 1.0;
  double r_overlap = 0.0;

  static OverlapSpec from_overlap(double r_overlap);
  static OverlapSpec from_m(double m);
};

/// Partition of the segment between two adjacent means into the part owned
/// by each cluster alone and the shared middle part.
struct IntervalGeometry {
  double l_exclusive = 0.0;  // each side
  double l_overlap = 0.0;
  double l_total = 0.0;
};

// m = log2(((1 + r) / (1 - r))^2 + 1). Throws std::domain_error unless 0 <= r < 1.
double m_from_overlap(double r_overlap);

// r = 1 - 2 / (1 + sqrt(2^m - 1)). Throws std::domain_error for m < 1.
double overlap_from_m(double m);

IntervalGeometry interval_geometry(double m, double l_total);

}  // namespace pokm

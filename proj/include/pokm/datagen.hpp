#pragma once

#include "pokm/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pokm {

/// Isotropic Gaussian cloud.
struct BlobSpec {
  VectorXd center;
  double spread = 1.0;  // standard deviation
  Index count = 1;
};

/// Points scattered along the middle third of the segment between two blob
/// centers, with Gaussian noise perpendicular to the segment.
struct BridgeSpec {
  Index blob_a = 0;
  Index blob_b = 1;
  Index count = 1;
  double jitter = 0.0;  // perpendicular standard deviation
};

struct ScenarioSpec {
  std::vector<BlobSpec> blobs;
  std::vector<BridgeSpec> bridges;
  std::uint64_t seed = 0;
};

struct ScenarioTruth {
  Dataset<double> dataset;
  std::set<std::pair<Index, Index>> true_bridges;  // (a, b) with a < b
  // Row j came from blob source[j] when source[j] < #blobs, otherwise from
  // bridge source[j] - #blobs.
  std::vector<Index> source;
};

/// Thrown for malformed inputs; carries a message naming the offending item.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Blob rows first (blob order), then bridge rows (bridge order).
ScenarioTruth generate_scenario(const std::vector<BlobSpec>& blobs, const std::vector<BridgeSpec>& bridges,
                                std::uint64_t seed);

inline ScenarioTruth generate_scenario(const ScenarioSpec& spec) {
  return generate_scenario(spec.blobs, spec.bridges, spec.seed);
}

// JSON with keys blobs[{center, spread, count}], bridges[{blob_a, blob_b,
// count, jitter}], seed. Throws DataError.
ScenarioSpec parse_scenario(const std::string& json_text);
std::string scenario_to_json(const ScenarioSpec& spec);

// Blobs at the corners of a square, numbered counter-clockwise from the
// origin, with the given bridges.
ScenarioSpec square_scenario(double side, double spread, Index per_blob,
                             const std::vector<std::pair<Index, Index>>& bridge_pairs, Index per_bridge,
                             double jitter, std::uint64_t seed);

/// Comma-separated numeric matrix. Throws DataError naming the row and
/// column of the first bad cell.
Dataset<double> load_csv(const std::filesystem::path& path, bool has_header,
                         const std::optional<std::string>& label_column = std::nullopt);

Dataset<double> parse_csv(const std::string& text, bool has_header,
                          const std::optional<std::string>& label_column = std::nullopt);

// Shortest round-trip representation of every value.
std::string format_csv(const Dataset<double>& data, bool with_header = false);
void write_csv(const std::filesystem::path& path, const Dataset<double>& data, bool with_header = false);

/// Centers each column and scales it to unit population standard
/// deviation. Constant columns become all zeros. Requires N >= 2.
Dataset<double> standardize(const Dataset<double>& data);

}  // namespace pokm

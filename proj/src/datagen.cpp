#include "pokm/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pokm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

ScenarioTruth generate_scenario(const std::vector<BlobSpec>& blobs, const std::vector<BridgeSpec>& bridges,
                                std::uint64_t seed) {
  if (blobs.size() < 2) throw DataError("a scenario needs at least two blobs");
  const Index dim = blobs.front().center.size();
  if (dim < 1) throw DataError("blob 0 has an empty center");
  Index total = 0;
  for (std::size_t b = 0; b < blobs.size(); ++b) {
    const auto& blob = blobs[b];
    const auto name = "blob " + std::to_string(b);
    if (blob.center.size() != dim) throw DataError(name + " has a center of the wrong dimension");
    if (!(blob.spread > 0.0)) throw DataError(name + " must have a positive spread");
    if (blob.count < 1) throw DataError(name + " must have a positive count");
    total += blob.count;
  }
  const auto nblobs = static_cast<Index>(blobs.size());
  for (std::size_t r = 0; r < bridges.size(); ++r) {
    const auto& br = bridges[r];
    const auto name = "bridge " + std::to_string(r);
    for (Index idx : {br.blob_a, br.blob_b})
      if (idx < 0 || idx >= nblobs)
        throw DataError(name + " references blob " + std::to_string(idx) + " but only " + std::to_string(nblobs) +
                        " blobs exist");
    if (br.blob_a == br.blob_b) throw DataError(name + " joins blob " + std::to_string(br.blob_a) + " to itself");
    if (br.count < 1) throw DataError(name + " must have a positive count");
    if (!(br.jitter >= 0.0)) throw DataError(name + " must have a nonnegative jitter");
    const auto& a = blobs[static_cast<std::size_t>(br.blob_a)].center;
    const auto& b = blobs[static_cast<std::size_t>(br.blob_b)].center;
    if ((b - a).squaredNorm() == 0.0) throw DataError(name + " joins two blobs with the same center");
    total += br.count;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> middle_third(1.0 / 3.0, 2.0 / 3.0);

  MatrixXd points(total, dim);
  ScenarioTruth truth;
  truth.source.reserve(static_cast<std::size_t>(total));
  Index row = 0;
  for (std::size_t b = 0; b < blobs.size(); ++b) {
    for (Index p = 0; p < blobs[b].count; ++p, ++row) {
      for (Index c = 0; c < dim; ++c) points(row, c) = blobs[b].center(c) + blobs[b].spread * normal(rng);
      truth.source.push_back(static_cast<Index>(b));
    }
  }
  for (std::size_t r = 0; r < bridges.size(); ++r) {
    const auto& br = bridges[r];
    const VectorXd& a = blobs[static_cast<std::size_t>(br.blob_a)].center;
    const VectorXd& b = blobs[static_cast<std::size_t>(br.blob_b)].center;
    const VectorXd dir = (b - a).normalized();
    for (Index p = 0; p < br.count; ++p, ++row) {
      const double t = middle_third(rng);
      VectorXd noise(dim);
      for (Index c = 0; c < dim; ++c) noise(c) = br.jitter * normal(rng);
      noise -= noise.dot(dir) * dir;
      points.row(row) = (a + t * (b - a) + noise).transpose();
      truth.source.push_back(nblobs + static_cast<Index>(r));
    }
    truth.true_bridges.insert(std::minmax(br.blob_a, br.blob_b));
  }
  truth.dataset = Dataset<double>(std::move(points));
  return truth;
}

ScenarioSpec parse_scenario(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("scenario does not parse as JSON: ") + e.what());
  }
  ScenarioSpec spec;
  try {
    for (const auto& b : j.at("blobs")) {
      const auto center = b.at("center").get<std::vector<double>>();
      spec.blobs.push_back({Eigen::Map<const VectorXd>(center.data(), static_cast<Index>(center.size())),
                            b.at("spread").get<double>(), b.at("count").get<Index>()});
    }
    if (j.contains("bridges"))
      for (const auto& b : j.at("bridges"))
        spec.bridges.push_back({b.at("blob_a").get<Index>(), b.at("blob_b").get<Index>(), b.at("count").get<Index>(),
                                b.value("jitter", 0.0)});
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed scenario: ") + e.what());
  }
  return spec;
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  nlohmann::ordered_json j;
  j["blobs"] = nlohmann::ordered_json::array();
  for (const auto& b : spec.blobs)
    j["blobs"].push_back({{"center", std::vector<double>(b.center.begin(), b.center.end())},
                          {"spread", b.spread},
                          {"count", b.count}});
  j["bridges"] = nlohmann::ordered_json::array();
  for (const auto& b : spec.bridges)
    j["bridges"].push_back({{"blob_a", b.blob_a}, {"blob_b", b.blob_b}, {"count", b.count}, {"jitter", b.jitter}});
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

ScenarioSpec square_scenario(double side, double spread, Index per_blob,
                             const std::vector<std::pair<Index, Index>>& bridge_pairs, Index per_bridge,
                             double jitter, std::uint64_t seed) {
  ScenarioSpec spec;
  const double corners[4][2] = {{0, 0}, {side, 0}, {side, side}, {0, side}};
  for (const auto& c : corners) spec.blobs.push_back({VectorXd{{c[0], c[1]}}, spread, per_blob});
  for (const auto& [a, b] : bridge_pairs) spec.bridges.push_back({a, b, per_bridge, jitter});
  spec.seed = seed;
  return spec;
}

Dataset<double> parse_csv(const std::string& text, bool has_header, const std::optional<std::string>& label_column) {
  if (label_column && !has_header) throw DataError("a label column can only be named when the file has a header");

  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      auto line = rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!trim(line).empty()) lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  // Line numbers in messages count non-blank lines from 1, header included.
  std::size_t first_data = 0;
  std::vector<std::string_view> header;
  std::optional<std::size_t> label_col;
  if (has_header) {
    if (lines.empty()) throw DataError("file has no header line");
    header = split_commas(lines[0]);
    first_data = 1;
    if (label_column) {
      const auto it = std::find(header.begin(), header.end(), *label_column);
      if (it == header.end()) throw DataError("label column '" + *label_column + "' not found in header");
      label_col = static_cast<std::size_t>(it - header.begin());
    }
  }
  if (lines.size() <= first_data) throw DataError("file contains no data rows");

  const std::size_t width = has_header ? header.size() : split_commas(lines[first_data]).size();
  const std::size_t features = width - (label_col ? 1 : 0);
  if (features < 1) throw DataError("file has no feature columns");

  MatrixXd points(static_cast<Index>(lines.size() - first_data), static_cast<Index>(features));
  std::vector<std::string> labels;
  for (std::size_t l = first_data; l < lines.size(); ++l) {
    const auto cells = split_commas(lines[l]);
    const auto row = static_cast<Index>(l - first_data);
    if (cells.size() != width)
      throw DataError("row " + std::to_string(l + 1) + " has " + std::to_string(cells.size()) + " columns, expected " +
                      std::to_string(width));
    Index col = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (label_col && c == *label_col) {
        labels.emplace_back(cells[c]);
        continue;
      }
      const auto value = parse_number(cells[c]);
      if (!value || !std::isfinite(*value)) {
        std::string where = "row " + std::to_string(l + 1) + ", column " + std::to_string(c + 1);
        if (has_header) where += " ('" + std::string(header[c]) + "')";
        throw DataError((value ? "non-finite value '" : "non-numeric value '") + std::string(cells[c]) + "' at " +
                        where);
      }
      points(row, col++) = *value;
    }
  }
  try {
    return Dataset<double>(std::move(points), std::move(labels));
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

Dataset<double> load_csv(const std::filesystem::path& path, bool has_header,
                         const std::optional<std::string>& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), has_header, label_column);
}

std::string format_csv(const Dataset<double>& data, bool with_header) {
  std::string out;
  if (with_header) {
    if (data.has_labels()) out += "label,";
    for (Index c = 0; c < data.dim(); ++c) out += (c ? ",x" : "x") + std::to_string(c);
    out += '\n';
  }
  for (Index r = 0; r < data.size(); ++r) {
    if (with_header && data.has_labels()) out += data.labels()[static_cast<std::size_t>(r)] + ",";
    for (Index c = 0; c < data.dim(); ++c) {
      if (c) out += ',';
      out += format_number(data.points()(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset<double>& data, bool with_header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << format_csv(data, with_header);
}

Dataset<double> standardize(const Dataset<double>& data) {
  if (data.size() < 2) throw std::invalid_argument("standardize needs at least two rows");
  MatrixXd x = data.points();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::RowVectorXd sd = (x.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
  for (Index c = 0; c < x.cols(); ++c) {
    const bool constant = (data.points().col(c).array() == data.points()(0, c)).all();
    if (!constant && sd(c) > 0.0)
      x.col(c) /= sd(c);
    else
      x.col(c).setZero();
  }
  return Dataset<double>(std::move(x), data.labels());
}

}  // namespace pokm

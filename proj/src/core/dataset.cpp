#include "anfis/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "anfis/error.hpp"

namespace anfis {

using nlohmann::json;

Dataset::Dataset(std::vector<Column> columns, Table values) : columns_(std::move(columns)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.cols()) != columns_.size()) {
    if (!(values_.rows() == 0 && values_.cols() == 0)) {
      throw Error(ErrorCode::data, "dataset has " + std::to_string(columns_.size()) + " columns but rows of width " +
                                       std::to_string(values_.cols()));
    }
    values_.resize(0, static_cast<Eigen::Index>(columns_.size()));
  }
  std::set<std::string> names;
  for (const auto &c : columns_) {
    if (c.name.empty()) throw Error(ErrorCode::parse, "empty column name");
    if (!names.insert(c.name).second) throw Error(ErrorCode::parse, "duplicate column name '" + c.name + "'");
  }
  if (!values_.allFinite()) throw Error(ErrorCode::data, "dataset contains non-finite values");
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

Dataset Dataset::subset(std::span<const std::size_t> row_indices) const {
  Table out(static_cast<Eigen::Index>(row_indices.size()), values_.cols());
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(row_indices[i]));
  }
  return Dataset(columns_, std::move(out));
}

// ---------------------------------------------------------------------------
// Surrogate

void validate(const SurrogateParams &p) {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(p.radius) || !positive(p.height) || !positive(p.v_ref) || !positive(p.rho_liquid) ||
      !positive(p.rho_gas) || !positive(p.gravity)) {
    throw Error(ErrorCode::configuration, "surrogate: R, H, v_ref, rho_L, rho_G and g must be positive");
  }
  if (!(p.eps0 > 0.0 && p.eps0 < 0.5)) throw Error(ErrorCode::configuration, "surrogate: eps0 must lie in (0, 0.5)");
  if (!std::isfinite(p.exponent)) throw Error(ErrorCode::configuration, "surrogate: exponent must be finite");
  if (!(p.noise_sd >= 0.0) || !std::isfinite(p.noise_sd)) {
    throw Error(ErrorCode::configuration, "surrogate: noise_sd must be >= 0");
  }
}

void validate(const GridSpec &g) {
  if (g.n_r < 1 || g.n_theta < 1 || g.n_z < 1) throw Error(ErrorCode::configuration, "grid: counts must be >= 1");
  if (g.velocities.empty()) throw Error(ErrorCode::configuration, "grid: velocity list is empty");
  for (std::size_t i = 0; i < g.velocities.size(); ++i) {
    if (!(g.velocities[i] > 0.0) || !std::isfinite(g.velocities[i])) {
      throw Error(ErrorCode::configuration, "grid: velocities must be positive");
    }
    if (i > 0 && !(g.velocities[i] > g.velocities[i - 1])) {
      throw Error(ErrorCode::configuration, "grid: velocities must be strictly increasing");
    }
  }
}

double surrogate_holdup(double x, double y, double z, double v, const SurrogateParams &p) {
  const double r = std::hypot(x, y);
  if (!std::isfinite(r) || r > p.radius * (1.0 + 1e-12)) {
    throw Error(ErrorCode::domain, "point lies outside the column (r = " + std::to_string(r) + " m)");
  }
  if (!(z >= 0.0 && z <= p.height)) throw Error(ErrorCode::domain, "z outside [0, H]");
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::domain, "superficial velocity must be positive");
  const double rr = std::min(r / p.radius, 1.0);
  const double radial = (1.0 - rr * rr) * (1.0 - rr * rr);
  const double eps = p.eps0 * std::pow(v / p.v_ref, p.exponent) * radial * (0.6 + 0.4 * z / p.height);
  return std::clamp(eps, 0.0, 0.5);
}

double surrogate_dpdz(double x, double y, double z, double v, const SurrogateParams &p, std::mt19937_64 *rng) {
  const double eps = surrogate_holdup(x, y, z, v, p);
  double dpdz = -p.gravity * (p.rho_liquid * (1.0 - eps) + p.rho_gas * eps);
  if (p.noise_sd > 0.0 && rng) {
    std::normal_distribution<double> noise(0.0, p.noise_sd);
    dpdz += noise(*rng);
  }
  return dpdz;
}

namespace {

const std::vector<Column> &surrogate_columns() {
  static const std::vector<Column> cols = {
      {"x", "m"}, {"y", "m"}, {"z", "m"}, {"v_as", "m/s"}, {"dpdz", "Pa/m"}};
  return cols;
}

}  // namespace

Dataset generate_surrogate(const GridSpec &grid, const SurrogateParams &p) {
  validate(grid);
  validate(p);
  Table t(static_cast<Eigen::Index>(grid.row_count()), 5);
  std::mt19937_64 rng(p.seed);
  Eigen::Index row = 0;
  for (int i = 0; i < grid.n_r; ++i) {
    const double r = (i + 0.5) * p.radius / grid.n_r;
    for (int j = 0; j < grid.n_theta; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / grid.n_theta;
      const double x = r * std::cos(theta);
      const double y = r * std::sin(theta);
      for (int k = 0; k < grid.n_z; ++k) {
        const double z = (k + 0.5) * p.height / grid.n_z;
        for (double v : grid.velocities) {
          t.row(row++) << x, y, z, v, surrogate_dpdz(x, y, z, v, p, &rng);
        }
      }
    }
  }
  return Dataset(surrogate_columns(), std::move(t));
}

Dataset generate_midpoints(const GridSpec &grid, const SurrogateParams &p) {
  validate(grid);
  validate(p);
  if (grid.n_r < 2 || grid.n_z < 2 || grid.velocities.size() < 2) {
    throw Error(ErrorCode::configuration, "midpoints need at least two radial, axial and velocity nodes");
  }
  SurrogateParams clean = p;
  clean.noise_sd = 0.0;
  const std::size_t n = static_cast<std::size_t>(grid.n_r - 1) * static_cast<std::size_t>(grid.n_theta) *
                        static_cast<std::size_t>(grid.n_z - 1) * (grid.velocities.size() - 1);
  Table t(static_cast<Eigen::Index>(n), 5);
  Eigen::Index row = 0;
  for (int i = 0; i + 1 < grid.n_r; ++i) {
    const double r = (i + 1.0) * p.radius / grid.n_r;
    for (int j = 0; j < grid.n_theta; ++j) {
      const double theta = 2.0 * std::numbers::pi * (j + 0.5) / grid.n_theta;
      const double x = r * std::cos(theta);
      const double y = r * std::sin(theta);
      for (int k = 0; k + 1 < grid.n_z; ++k) {
        const double z = (k + 1.0) * p.height / grid.n_z;
        for (std::size_t m = 0; m + 1 < grid.velocities.size(); ++m) {
          const double v = 0.5 * (grid.velocities[m] + grid.velocities[m + 1]);
          t.row(row++) << x, y, z, v, surrogate_dpdz(x, y, z, v, clean);
        }
      }
    }
  }
  return Dataset(surrogate_columns(), std::move(t));
}

json to_json(const GridSpec &g) {
  return {{"n_r", g.n_r}, {"n_theta", g.n_theta}, {"n_z", g.n_z}, {"velocities", g.velocities}};
}

json to_json(const SurrogateParams &p) {
  return {{"R", p.radius},          {"H", p.height},     {"v_ref", p.v_ref},       {"eps0", p.eps0},
          {"exponent", p.exponent}, {"rho_L", p.rho_liquid}, {"rho_G", p.rho_gas}, {"g", p.gravity},
          {"noise_sd", p.noise_sd}, {"seed", p.seed}};
}

namespace {

template <class T>
void read_key(const json &doc, const char *key, T &out, std::set<std::string> &seen) {
  auto it = doc.find(key);
  if (it == doc.end()) return;
  seen.insert(key);
  try {
    out = it->get<T>();
  } catch (const json::exception &) {
    throw Error(ErrorCode::parse, std::string("config: field '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json &doc, const std::set<std::string> &seen, const char *what) {
  for (const auto &[key, value] : doc.items()) {
    if (!seen.count(key)) throw Error(ErrorCode::parse, std::string("config: unknown ") + what + " field '" + key + "'");
  }
}

}  // namespace

GridSpec grid_from_json(const json &doc) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "config: grid must be an object");
  GridSpec g;
  std::set<std::string> seen;
  read_key(doc, "n_r", g.n_r, seen);
  read_key(doc, "n_theta", g.n_theta, seen);
  read_key(doc, "n_z", g.n_z, seen);
  read_key(doc, "velocities", g.velocities, seen);
  reject_unknown(doc, seen, "grid");
  validate(g);
  return g;
}

SurrogateParams surrogate_from_json(const json &doc) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "config: surrogate must be an object");
  SurrogateParams p;
  std::set<std::string> seen;
  read_key(doc, "R", p.radius, seen);
  read_key(doc, "H", p.height, seen);
  read_key(doc, "v_ref", p.v_ref, seen);
  read_key(doc, "eps0", p.eps0, seen);
  read_key(doc, "exponent", p.exponent, seen);
  read_key(doc, "rho_L", p.rho_liquid, seen);
  read_key(doc, "rho_G", p.rho_gas, seen);
  read_key(doc, "g", p.gravity, seen);
  read_key(doc, "noise_sd", p.noise_sd, seen);
  read_key(doc, "seed", p.seed, seen);
  reject_unknown(doc, seen, "surrogate");
  validate(p);
  return p;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

Column parse_header_cell(std::string_view cell, std::size_t index) {
  cell = trim(cell);
  Column c;
  const auto open = cell.find('[');
  if (open == std::string_view::npos) {
    c.name = std::string(cell);
  } else {
    if (cell.back() != ']') {
      throw Error(ErrorCode::parse, "header column " + std::to_string(index + 1) + ": expected 'name[unit]'");
    }
    c.name = std::string(trim(cell.substr(0, open)));
    c.unit = std::string(cell.substr(open + 1, cell.size() - open - 2));
  }
  if (c.name.empty()) throw Error(ErrorCode::parse, "header column " + std::to_string(index + 1) + ": empty name");
  return c;
}

}  // namespace

CsvTable parse_csv_table(std::string_view text) {
  CsvTable table;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    if (!have_header) {
      table.header = split_line(line);
      have_header = true;
      continue;
    }
    auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::parse, "row " + std::to_string(table.rows.size() + 1) + ": expected " +
                                        std::to_string(table.header.size()) + " cells, found " +
                                        std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw Error(ErrorCode::parse, "missing header");
  return table;
}

CsvTable read_csv_table(const std::filesystem::path &path) { return parse_csv_table(read_file(path)); }

Dataset parse_csv(std::string_view text) {
  const auto table = parse_csv_table(text);
  std::vector<Column> columns;
  std::set<std::string> names;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    columns.push_back(parse_header_cell(table.header[j], j));
    if (!names.insert(columns.back().name).second) {
      throw Error(ErrorCode::parse, "header column " + std::to_string(j + 1) + ": duplicate column name '" +
                                        columns.back().name + "'");
    }
  }
  Table values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const auto cell = trim(table.rows[i][j]);
      double v = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::parse, "row " + std::to_string(i + 1) + ", column " + std::to_string(j + 1) + " ('" +
                                          columns[j].name + "'): '" + std::string(cell) +
                                          "' is not a finite number");
      }
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return Dataset(std::move(columns), std::move(values));
}

Dataset load_csv(const std::filesystem::path &path) {
  try {
    return parse_csv(read_file(path));
  } catch (const Error &e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_real(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, end);
}

std::string format_csv(const Dataset &dataset) {
  std::string out;
  const auto &cols = dataset.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j) out += ',';
    out += cols[j].unit.empty() ? cols[j].name : cols[j].name + "[" + cols[j].unit + "]";
  }
  out += '\n';
  const auto &v = dataset.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (j) out += ',';
      out += format_real(v(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset &dataset, const std::filesystem::path &path) { write_file(path, format_csv(dataset)); }

// ---------------------------------------------------------------------------
// Selection / split

Table select_columns(const Dataset &dataset, std::span<const std::string> names) {
  Table out(static_cast<Eigen::Index>(dataset.rows()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto idx = dataset.find_column(names[k]);
    if (!idx) throw Error(ErrorCode::selection, "unknown column '" + names[k] + "'");
    out.col(static_cast<Eigen::Index>(k)) = dataset.values().col(static_cast<Eigen::Index>(*idx));
  }
  return out;
}

Regression select_regression(const Dataset &dataset, std::span<const std::string> input_names,
                             const std::string &output_name) {
  if (input_names.empty()) throw Error(ErrorCode::selection, "at least one input column is required");
  std::set<std::string> used;
  for (const auto &name : input_names) {
    if (!used.insert(name).second) throw Error(ErrorCode::selection, "column '" + name + "' selected twice");
  }
  if (used.count(output_name)) {
    throw Error(ErrorCode::selection, "column '" + output_name + "' cannot be both input and output");
  }
  const auto out_idx = dataset.find_column(output_name);
  if (!out_idx) throw Error(ErrorCode::selection, "unknown output column '" + output_name + "'");

  Regression reg;
  reg.X = select_columns(dataset, input_names);
  reg.y = dataset.values().col(static_cast<Eigen::Index>(*out_idx));
  reg.output_name = output_name;
  for (std::size_t k = 0; k < input_names.size(); ++k) {
    InputSpec in{input_names[k], {}};
    if (dataset.rows() > 0) {
      const auto col = reg.X.col(static_cast<Eigen::Index>(k));
      in.range = {col.minCoeff(), col.maxCoeff()};
      if (!(in.range.lo < in.range.hi)) {
        throw Error(ErrorCode::selection, "input column '" + input_names[k] + "' is constant");
      }
    }
    reg.inputs.push_back(std::move(in));
  }
  return reg;
}

SplitIndices split_indices(std::size_t n, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw Error(ErrorCode::configuration, "train fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_frac));
  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return s;
}

std::pair<Dataset, Dataset> split(const Dataset &dataset, double train_frac, std::uint64_t seed) {
  const auto s = split_indices(dataset.rows(), train_frac, seed);
  return {dataset.subset(s.train), dataset.subset(s.test)};
}

}  // namespace anfis

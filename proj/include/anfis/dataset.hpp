#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "anfis/fis.hpp"

namespace anfis {

using Table = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Column {
  std::string name;
  std::string unit;

  friend bool operator==(const Column &, const Column &) = default;
};

/// Column-labelled numeric table. Every value is finite and every row has one
/// entry per column.
class Dataset {
 public:
  Dataset() = default;
  /// Throws Error(data) on width mismatch or non-finite values and
  /// Error(parse) on duplicate column names.
  Dataset(std::vector<Column> columns, Table values);

  const std::vector<Column> &columns() const noexcept { return columns_; }
  const Table &values() const noexcept { return values_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return columns_.size(); }

  std::optional<std::size_t> find_column(std::string_view name) const;
  Dataset subset(std::span<const std::size_t> row_indices) const;

  friend bool operator==(const Dataset &a, const Dataset &b) {
    return a.columns_ == b.columns_ && a.values_.rows() == b.values_.rows() &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
  }

 private:
  std::vector<Column> columns_;
  Table values_;
};

struct SurrogateParams {
  double radius = 0.144;       // m
  double height = 2.6;         // m
  double v_ref = 0.005;        // m/s
  double eps0 = 0.1;           // peak holdup at v_ref
  double exponent = 0.8;
  double rho_liquid = 998.0;   // kg/m^3
  double rho_gas = 1.2;        // kg/m^3
  double gravity = 9.81;       // m/s^2
  double noise_sd = 0.0;       // Pa/m
  std::uint64_t seed = 0;
};

struct GridSpec {
  int n_r = 10;
  int n_theta = 12;
  int n_z = 10;
  std::vector<double> velocities = {0.0025, 0.005, 0.0075, 0.01, 0.0125};

  std::size_t row_count() const noexcept {
    return static_cast<std::size_t>(n_r) * static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_z) *
           velocities.size();
  }
};

void validate(const SurrogateParams &p);
void validate(const GridSpec &g);

/// Local gas holdup of the surrogate, clamped to [0, 0.5].
double surrogate_holdup(double x, double y, double z, double v, const SurrogateParams &p);

/// Hydrostatic two-phase pressure gradient (Pa/m). Adds N(0, noise_sd) drawn
/// from `rng` when noise_sd > 0 and an engine is supplied. Throws
/// Error(domain) for points outside the column or non-positive velocity.
double surrogate_dpdz(double x, double y, double z, double v, const SurrogateParams &p,
                      std::mt19937_64 *rng = nullptr);

/// One row per (r, theta, z, v) node, v varying fastest. Radial and axial
/// nodes are cell-centred; columns are x, y, z, v_as, dpdz.
Dataset generate_surrogate(const GridSpec &grid, const SurrogateParams &p);

/// Noiseless surrogate evaluated at the midpoints between neighbouring grid
/// nodes along every axis. Needs at least two nodes per axis except theta.
Dataset generate_midpoints(const GridSpec &grid, const SurrogateParams &p);

nlohmann::json to_json(const GridSpec &g);
nlohmann::json to_json(const SurrogateParams &p);
/// Missing keys keep their defaults; unknown keys are a parse error.
GridSpec grid_from_json(const nlohmann::json &doc);
SurrogateParams surrogate_from_json(const nlohmann::json &doc);

// CSV ----------------------------------------------------------------------

/// Raw comma-separated table: one header row, then data rows. No quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_table(const std::filesystem::path &path);
CsvTable parse_csv_table(std::string_view text);

/// Header cells are "name[unit]"; values are written with 17 significant digits.
Dataset load_csv(const std::filesystem::path &path);
Dataset parse_csv(std::string_view text);
void write_csv(const Dataset &dataset, const std::filesystem::path &path);
std::string format_csv(const Dataset &dataset);
std::string format_real(double v);

// Selection / split ----------------------------------------------------------

struct Regression {
  Table X;
  Eigen::VectorXd y;
  std::vector<InputSpec> inputs;  // ranges are the observed per-column min/max
  std::string output_name;
};

Regression select_regression(const Dataset &dataset, std::span<const std::string> input_names,
                             const std::string &output_name);

/// Extracts the named columns in order; throws Error(selection) for missing names.
Table select_columns(const Dataset &dataset, std::span<const std::string> names);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded uniform shuffle of 0..n-1, then a prefix of round(n * train_frac).
SplitIndices split_indices(std::size_t n, double train_frac, std::uint64_t seed);

std::pair<Dataset, Dataset> split(const Dataset &dataset, double train_frac, std::uint64_t seed);

}  // namespace anfis

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "subflow/grid.hpp"

namespace subflow {

/// One named float32 array; shape is C-contiguous (last index fastest).
/// Spatial axes always come last as (nx, ny, nz), which is the grid's k-fastest order.
struct BundleArray {
  std::string name;                // may contain '/' to group arrays ("labelled/lnk")
  std::vector<std::size_t> shape;
  std::string units;
  std::vector<float> data;

  std::size_t element_count() const;
};

/// Directory with manifest.json plus one raw little-endian float32 file per array.
///
/// manifest.json:
///   format "subflow-bundle", version, dims {nx, ny, nz, lx, ly, lz, z_top},
///   storage_order "k-fastest", dtype "float32-le",
///   arrays [{name, file, shape, units, bytes, crc32}],
///   metadata {...}  free-form: seeds, config, provenance, reports.
struct DatasetBundle {
  int nx = 0, ny = 0, nz = 0;
  double lx = 0.0, ly = 0.0, lz = 0.0, z_top = 0.0;
  std::vector<BundleArray> arrays;
  nlohmann::json metadata = nlohmann::json::object();

  explicit DatasetBundle(const Grid3D& grid);
  DatasetBundle() = default;

  Grid3D grid() const;

  /// Appends an array, converting to float32. Throws std::invalid_argument when
  /// the shape does not match the data length or the name is taken.
  BundleArray& add(const std::string& name, std::vector<std::size_t> shape, std::span<const double> values,
                   const std::string& units = "");
  BundleArray& add(const std::string& name, std::vector<std::size_t> shape, std::vector<float> values,
                   const std::string& units = "");
  bool contains(const std::string& name) const;
  /// Throws std::out_of_range for an unknown name.
  const BundleArray& at(const std::string& name) const;

  /// Values of a spatial slab: the `index`-th (nx, ny, nz) block, widened to double.
  ScalarField3D field(const std::string& name, std::size_t index = 0) const;
};

class BundleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint32_t crc32_of(std::span<const float> data);

/// Creates the directory if needed and overwrites manifest and array files.
void write_bundle(const std::filesystem::path& dir, const DatasetBundle& bundle);

/// Throws BundleError when the manifest is malformed, a file length differs
/// from the declared byte count or a checksum does not match.
DatasetBundle read_bundle(const std::filesystem::path& dir);

}  // namespace subflow

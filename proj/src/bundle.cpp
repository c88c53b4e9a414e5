#include "subflow/bundle.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <stdexcept>

#include <zlib.h>

namespace subflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "subflow-bundle";
constexpr int kVersion = 1;

std::string file_name(const std::string& array_name) {
  std::string out = array_name;
  std::replace(out.begin(), out.end(), '/', '.');
  return out + ".f32";
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  return v;
}

std::vector<unsigned char> encode(std::span<const float> data) {
  std::vector<unsigned char> bytes(data.size() * 4);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const std::uint32_t w = to_little_endian(std::bit_cast<std::uint32_t>(data[n]));
    std::memcpy(bytes.data() + 4 * n, &w, 4);
  }
  return bytes;
}

std::uint32_t crc_bytes(const std::vector<unsigned char>& bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = ::crc32(crc, bytes.data() + pos, static_cast<uInt>(chunk));
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

std::size_t BundleArray::element_count() const { return product(shape); }

DatasetBundle::DatasetBundle(const Grid3D& g)
    : nx(g.nx()), ny(g.ny()), nz(g.nz()), lx(g.lx()), ly(g.ly()), lz(g.lz()), z_top(g.z_top()) {}

Grid3D DatasetBundle::grid() const { return Grid3D(nx, ny, nz, lx, ly, lz, z_top); }

BundleArray& DatasetBundle::add(const std::string& name, std::vector<std::size_t> shape,
                                std::span<const double> values, const std::string& units) {
  std::vector<float> f(values.size());
  std::transform(values.begin(), values.end(), f.begin(), [](double v) { return static_cast<float>(v); });
  return add(name, std::move(shape), std::move(f), units);
}

BundleArray& DatasetBundle::add(const std::string& name, std::vector<std::size_t> shape, std::vector<float> values,
                                const std::string& units) {
  if (name.empty()) throw std::invalid_argument("bundle: empty array name");
  if (contains(name)) throw std::invalid_argument("bundle: duplicate array " + name);
  if (product(shape) != values.size())
    throw std::invalid_argument("bundle: shape of " + name + " does not match its data");
  arrays.push_back({name, std::move(shape), units, std::move(values)});
  return arrays.back();
}

bool DatasetBundle::contains(const std::string& name) const {
  return std::any_of(arrays.begin(), arrays.end(), [&](const BundleArray& a) { return a.name == name; });
}

const BundleArray& DatasetBundle::at(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  throw std::out_of_range("bundle: no array named " + name);
}

ScalarField3D DatasetBundle::field(const std::string& name, std::size_t index) const {
  const Grid3D g = grid();
  const BundleArray& a = at(name);
  const std::size_t n = g.cell_count();
  if (a.data.size() < (index + 1) * n) throw std::out_of_range("bundle: " + name + " has no slab " + std::to_string(index));
  std::vector<double> v(a.data.begin() + static_cast<std::ptrdiff_t>(index * n),
                        a.data.begin() + static_cast<std::ptrdiff_t>((index + 1) * n));
  return ScalarField3D(g, std::move(v));
}

std::uint32_t crc32_of(std::span<const float> data) { return crc_bytes(encode(data)); }

void write_bundle(const fs::path& dir, const DatasetBundle& b) {
  fs::create_directories(dir);
  json arrays = json::array();
  for (const auto& a : b.arrays) {
    const auto bytes = encode(a.data);
    const std::string file = file_name(a.name);
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw BundleError("bundle: failed writing " + (dir / file).string());
    arrays.push_back({{"name", a.name}, {"file", file}, {"shape", a.shape}, {"units", a.units},
                      {"bytes", bytes.size()}, {"crc32", crc_bytes(bytes)}});
  }
  const json manifest = {
      {"format", kFormat},
      {"version", kVersion},
      {"dims", {{"nx", b.nx}, {"ny", b.ny}, {"nz", b.nz}, {"lx", b.lx}, {"ly", b.ly}, {"lz", b.lz}, {"z_top", b.z_top}}},
      {"storage_order", "k-fastest"},
      {"dtype", "float32-le"},
      {"arrays", arrays},
      {"metadata", b.metadata},
  };
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw BundleError("bundle: failed writing manifest in " + dir.string());
}

DatasetBundle read_bundle(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw BundleError("bundle: no manifest.json in " + dir.string());
  json m;
  try {
    m = json::parse(in);
    if (m.at("format") != kFormat) throw BundleError("bundle: unknown format");
    if (m.at("version").get<int>() != kVersion) throw BundleError("bundle: unsupported version");
    if (m.at("storage_order") != "k-fastest") throw BundleError("bundle: unsupported storage order");
    if (m.at("dtype") != "float32-le") throw BundleError("bundle: unsupported dtype");

    DatasetBundle b;
    const json& d = m.at("dims");
    b.nx = d.at("nx");
    b.ny = d.at("ny");
    b.nz = d.at("nz");
    b.lx = d.at("lx");
    b.ly = d.at("ly");
    b.lz = d.at("lz");
    b.z_top = d.at("z_top");
    b.metadata = m.value("metadata", json::object());

    for (const json& e : m.at("arrays")) {
      BundleArray a;
      a.name = e.at("name");
      a.shape = e.at("shape").get<std::vector<std::size_t>>();
      a.units = e.value("units", "");
      const auto bytes = e.at("bytes").get<std::size_t>();
      const fs::path file = dir / e.at("file").get<std::string>();
      if (bytes != product(a.shape) * 4) throw BundleError("bundle: " + a.name + " byte count disagrees with shape");
      if (!fs::exists(file) || fs::file_size(file) != bytes)
        throw BundleError("bundle: " + file.string() + " does not have the declared length");
      std::vector<unsigned char> raw(bytes);
      std::ifstream f(file, std::ios::binary);
      f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
      if (!f) throw BundleError("bundle: failed reading " + file.string());
      if (crc_bytes(raw) != e.at("crc32").get<std::uint32_t>())
        throw BundleError("bundle: checksum mismatch for " + a.name);
      a.data.resize(bytes / 4);
      for (std::size_t n = 0; n < a.data.size(); ++n) {
        std::uint32_t w;
        std::memcpy(&w, raw.data() + 4 * n, 4);
        a.data[n] = std::bit_cast<float>(to_little_endian(w));
      }
      b.arrays.push_back(std::move(a));
    }
    return b;
  } catch (const json::exception& e) {
    throw BundleError(std::string("bundle: malformed manifest: ") + e.what());
  }
}

}  // namespace subflow

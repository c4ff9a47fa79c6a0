#include "gw/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gw/binio.hpp"
#include "gw/error.hpp"

namespace gw {

namespace {

constexpr uint32_t kImageVersion = 1;
constexpr uint32_t kFeatureVersion = 1;

[[noreturn]] void fail(const std::string& msg) { throw Error("features", msg); }

// Image loads report the stream offset of the failing field so corrupt
// files are diagnosable.
[[noreturn]] void fail_at(std::istream& in, const std::string& msg) {
  std::ostringstream os;
  const auto pos = in.tellg();
  os << msg << " at byte offset " << (pos < 0 ? std::streamoff(-1) : std::streamoff(pos));
  fail(os.str());
}

}  // namespace

FeatureVector build_text_features(const SurveyPoint& point, const SpatialIndex& index,
                                  const EmbeddingModel& model, uint32_t n,
                                  const FeatureOptions& options) {
  if (n < 1) fail("neighbor count must be at least 1");
  const std::vector<Neighbor> neighbors = index.knn(point.lat, point.lon, n);

  FeatureVector fv;
  fv.n = n;
  fv.p = model.p;
  fv.values.resize(size_t(model.p) * n + n);
  for (uint32_t k = 0; k < n; ++k) {
    auto it = model.doc_index.find(neighbors[k].id);
    if (it == model.doc_index.end())
      fail("no embedding for article: " + neighbors[k].id);
    const float* row = model.doc_row(it->second);
    std::copy(row, row + model.p, &fv.values[size_t(k) * model.p]);
    fv.values[size_t(model.p) * n + k] = float(neighbors[k].distance.kilometers);
  }
  if (options.normalize_distances) {
    const float farthest = fv.values.back();  // neighbors ascend by distance
    if (farthest > 0.0f) {
      for (uint32_t k = 0; k < n; ++k) fv.values[size_t(model.p) * n + k] /= farthest;
    }
  }
  return fv;
}

void save_image(const ImageGrid& grid, std::ostream& out) {
  if (grid.pixels.size() != size_t(grid.height) * grid.width)
    fail("pixel buffer does not match declared dimensions");
  binio::write_magic(out, "NLIM");
  binio::write_pod(out, kImageVersion);
  binio::write_pod(out, grid.height);
  binio::write_pod(out, grid.width);
  binio::write_pod(out, grid.center_lat);
  binio::write_pod(out, grid.center_lon);
  binio::write_array(out, grid.pixels);
  if (!out) fail("failed writing image");
}

void save_image_file(const ImageGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open for writing: " + path);
  save_image(grid, out);
}

ImageGrid load_image(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "NLIM", 4) != 0) fail_at(in, "bad image magic");
  const auto version = binio::read_pod<uint32_t>(in, "image version");
  if (version != kImageVersion) fail_at(in, "unsupported image version");
  ImageGrid grid;
  grid.height = binio::read_pod<uint32_t>(in, "image height");
  grid.width = binio::read_pod<uint32_t>(in, "image width");
  if (grid.height == 0 || grid.width == 0) fail_at(in, "zero image dimension");
  grid.center_lat = binio::read_pod<double>(in, "image center lat");
  grid.center_lon = binio::read_pod<double>(in, "image center lon");
  const size_t count = size_t(grid.height) * grid.width;
  grid.pixels.resize(count);
  for (size_t i = 0; i < count; ++i) {
    grid.pixels[i] = binio::read_pod<float>(in, "pixel");
    if (!std::isfinite(grid.pixels[i]) || grid.pixels[i] < 0.0f) {
      in.seekg(-std::streamoff(sizeof(float)), std::ios::cur);
      fail_at(in, "invalid pixel value");
    }
  }
  return grid;
}

ImageGrid load_image_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open: " + path);
  try {
    return load_image(in);
  } catch (const Error& e) {
    throw Error("features", std::string(e.what()) + " (" + path + ")");
  }
}

void save_features(const FeatureFile& file, std::ostream& out) {
  if (file.ids.size() != file.rows.size()) fail("feature ids and rows differ in count");
  binio::write_magic(out, "GWFT");
  binio::write_pod(out, kFeatureVersion);
  binio::write_pod(out, uint64_t(file.rows.size()));
  binio::write_pod(out, file.n);
  binio::write_pod(out, file.p);
  const size_t dim = size_t(file.p) * file.n + file.n;
  for (size_t i = 0; i < file.rows.size(); ++i) {
    if (file.rows[i].values.size() != dim) fail("feature row has wrong dimension");
    binio::write_string(out, file.ids[i]);
    binio::write_array(out, file.rows[i].values);
  }
  if (!out) fail("failed writing feature file");
}

void save_features_file(const FeatureFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open for writing: " + path);
  save_features(file, out);
}

FeatureFile load_features(std::istream& in) {
  try {
    binio::expect_magic(in, "GWFT", "feature file");
    const auto version = binio::read_pod<uint32_t>(in, "feature version");
    if (version != kFeatureVersion) fail("unsupported feature file version");
    FeatureFile file;
    const auto count = binio::read_pod<uint64_t>(in, "feature count");
    file.n = binio::read_pod<uint32_t>(in, "neighbor count");
    file.p = binio::read_pod<uint32_t>(in, "embedding dim");
    if (file.n == 0 || file.p == 0) fail("corrupt feature header");
    const size_t dim = size_t(file.p) * file.n + file.n;
    file.ids.reserve(count);
    file.rows.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
      file.ids.push_back(binio::read_string(in, "feature id"));
      FeatureVector fv;
      fv.n = file.n;
      fv.p = file.p;
      binio::read_array(in, fv.values, dim, "feature row");
      file.rows.push_back(std::move(fv));
    }
    return file;
  } catch (const Error& e) {
    throw Error("features", e.what());
  }
}

FeatureFile load_features_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open: " + path);
  return load_features(in);
}

}  // namespace gw

//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/nn/checkpoint.hpp"

#include <bit>
#include <filesystem>
#include <fstream>

#include "retrograph/error.hpp"

namespace retro::nn {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume a little-endian host");

namespace {

std::string blob_name(const std::string &name) {
  std::string out;
  for (char c: name)
    out += (c == '/') ? '.' : c;
  return out + ".bin";
}

const char *dtype_name() { return sizeof(Real) == 8 ? "f64" : "f32"; }

}  // namespace

void save_checkpoint(const std::string &dir, const ParamStore &store, const nlohmann::json &meta,
                     std::uint64_t seed, const std::string &prefix) {
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["dtype"] = dtype_name();
  manifest["seed"] = seed;
  manifest["hyperparams"] = meta;
  manifest["tensors"] = nlohmann::json::array();
  for (const auto &[name, p]: store.all()) {
    std::string full = prefix + name;
    std::string file = blob_name(full);
    std::ofstream out(fs::path(dir) / file, std::ios::binary);
    if (!out)
      throw CheckpointError("cannot write " + file);
    out.write(reinterpret_cast<const char *>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(Real)));
    manifest["tensors"].push_back({ { "name", full },
                                    { "shape", { p.value.rows(), p.value.cols() } },
                                    { "file", file } });
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out)
    throw CheckpointError("cannot write manifest in " + dir);
  out << manifest.dump(2) << '\n';
}

nlohmann::json load_checkpoint(const std::string &dir, ParamStore &store, const std::string &prefix) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in)
    throw CheckpointError("no manifest in " + dir);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(std::string("bad manifest: ") + e.what());
  }
  std::string dtype = manifest.value("dtype", "");
  if (dtype != "f64" && dtype != "f32")
    throw CheckpointError("unknown dtype " + dtype);
  std::size_t width = dtype == "f64" ? 8 : 4;
  for (const auto &t: manifest.at("tensors")) {
    std::string full = t.at("name");
    if (full.rfind(prefix, 0) != 0)
      continue;
    std::string name = full.substr(prefix.size());
    int rows = t.at("shape")[0], cols = t.at("shape")[1];
    std::ifstream blob(fs::path(dir) / t.at("file").get<std::string>(), std::ios::binary);
    if (!blob)
      throw CheckpointError("missing blob for " + full);
    std::size_t n = static_cast<std::size_t>(rows) * cols;
    Matrix value(rows, cols);
    if (width == sizeof(Real)) {
      blob.read(reinterpret_cast<char *>(value.data()), static_cast<std::streamsize>(n * width));
    } else if (width == 8) {
      std::vector<double> buf(n);
      blob.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(n * width));
      for (std::size_t i = 0; i < n; ++i)
        value.data()[i] = static_cast<Real>(buf[i]);
    } else {
      std::vector<float> buf(n);
      blob.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(n * width));
      for (std::size_t i = 0; i < n; ++i)
        value.data()[i] = static_cast<Real>(buf[i]);
    }
    if (!blob)
      throw CheckpointError("short blob for " + full);
    if (store.contains(name)) {
      Param &p = store.get(name);
      if (p.value.rows() != rows || p.value.cols() != cols)
        throw CheckpointError("shape mismatch for " + full);
      p.value = std::move(value);
    } else {
      Param &p = store.add_zero(name, rows, cols);
      p.value = std::move(value);
    }
  }
  return manifest;
}

}  // namespace retro::nn

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgran/config.hpp"
#include "kgran/model.hpp"

namespace kgran {

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kModelMagic = "KGRANMDL";
inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Container layout (all integers little-endian):
///   8 bytes magic "KGRANMDL", u32 version,
///   u64 length + config text (format_config),
///   u32 record count, then per record:
///     u32 name length + name, u32 rank (2), u64 rows, u64 cols,
///     rows*cols IEEE-754 binary32 values in row-major order.
struct ParameterRecord {
  std::string name;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<float> values;  // row-major
};

struct ModelFile {
  Config config;
  std::vector<ParameterRecord> records;
};

std::string encode_model_file(const ModelFile& file);
ModelFile decode_model_file(const std::string& bytes);
void write_model_file(const ModelFile& file, const std::filesystem::path& path);
ModelFile read_model_file(const std::filesystem::path& path);

template <typename Scalar>
ModelFile to_model_file(const KgranModel<Scalar>& model, const Config& config) {
  ModelFile file;
  file.config = config;
  for (const auto& p : model.params().items()) {
    ParameterRecord r;
    r.name = p.name;
    r.rows = static_cast<std::uint64_t>(p.tensor.rows());
    r.cols = static_cast<std::uint64_t>(p.tensor.cols());
    r.values.reserve(p.tensor.size());
    const auto& v = p.tensor.values();
    for (Index i = 0; i < v.rows(); ++i) {
      for (Index j = 0; j < v.cols(); ++j) r.values.push_back(static_cast<float>(v(i, j)));
    }
    file.records.push_back(std::move(r));
  }
  return file;
}

/// Builds a model from the stored config and fills every parameter. Throws
/// ModelFormatError naming any missing, unknown, or mis-shaped record.
template <typename Scalar>
std::unique_ptr<KgranModel<Scalar>> from_model_file(const ModelFile& file) {
  auto model = std::make_unique<KgranModel<Scalar>>(file.config.model_dims());
  std::vector<bool> filled(model->params().size(), false);
  auto& items = model->params().items();
  for (const auto& r : file.records) {
    std::size_t k = 0;
    while (k < items.size() && items[k].name != r.name) ++k;
    if (k == items.size()) throw ModelFormatError("unknown parameter record: " + r.name);
    auto& v = items[k].tensor.values();
    if (r.rows != static_cast<std::uint64_t>(v.rows()) || r.cols != static_cast<std::uint64_t>(v.cols())) {
      throw ModelFormatError("parameter " + r.name + " stored as " +
                             shape_string(static_cast<Index>(r.rows), static_cast<Index>(r.cols)) +
                             ", model expects " + shape_string(v));
    }
    std::size_t n = 0;
    for (Index i = 0; i < v.rows(); ++i) {
      for (Index j = 0; j < v.cols(); ++j) v(i, j) = static_cast<Scalar>(r.values[n++]);
    }
    filled[k] = true;
  }
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (!filled[k]) throw ModelFormatError("missing parameter record: " + items[k].name);
  }
  return model;
}

template <typename Scalar>
void save_model(const KgranModel<Scalar>& model, const Config& config, const std::filesystem::path& path) {
  write_model_file(to_model_file(model, config), path);
}

template <typename Scalar>
struct LoadedModel {
  Config config;
  std::unique_ptr<KgranModel<Scalar>> model;
};

template <typename Scalar>
LoadedModel<Scalar> load_model(const std::filesystem::path& path) {
  ModelFile file = read_model_file(path);
  auto model = from_model_file<Scalar>(file);
  return {std::move(file.config), std::move(model)};
}

}  // namespace kgran

#include "kgran/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kgran {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw ModelFormatError(std::string("truncated model file while reading ") + what);
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }

  std::string text(std::uint64_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_model_file(const ModelFile& file) {
  std::string out(kModelMagic);
  put_u32(out, kModelFormatVersion);
  const std::string config = format_config(file.config);
  put_u64(out, config.size());
  out += config;
  put_u32(out, static_cast<std::uint32_t>(file.records.size()));
  for (const auto& r : file.records) {
    if (r.values.size() != r.rows * r.cols) throw ModelFormatError("record " + r.name + ": value count mismatch");
    put_u32(out, static_cast<std::uint32_t>(r.name.size()));
    out += r.name;
    put_u32(out, 2);
    put_u64(out, r.rows);
    put_u64(out, r.cols);
    for (float f : r.values) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

ModelFile decode_model_file(const std::string& bytes) {
  Reader in(bytes);
  if (in.text(kModelMagic.size(), "magic") != kModelMagic) throw ModelFormatError("bad magic: not a kgran model file");
  const std::uint32_t version = in.u32("version");
  if (version != kModelFormatVersion) {
    throw ModelFormatError("unsupported model format version " + std::to_string(version) + " (expected " +
                           std::to_string(kModelFormatVersion) + ")");
  }
  ModelFile file;
  const std::uint64_t config_len = in.u64("config length");
  try {
    file.config = parse_config(in.text(config_len, "config"));
  } catch (const ConfigError& e) {
    throw ModelFormatError(std::string("embedded config: ") + e.what());
  }
  const std::uint32_t count = in.u32("record count");
  for (std::uint32_t k = 0; k < count; ++k) {
    ParameterRecord r;
    r.name = in.text(in.u32("record name length"), "record name");
    if (in.u32("rank") != 2) throw ModelFormatError("record " + r.name + ": unsupported rank");
    r.rows = in.u64("rows");
    r.cols = in.u64("cols");
    in.need(r.rows * r.cols * 4, r.name.c_str());
    r.values.resize(r.rows * r.cols);
    for (auto& f : r.values) f = std::bit_cast<float>(in.u32("values"));
    file.records.push_back(std::move(r));
  }
  if (!in.done()) throw ModelFormatError("trailing bytes after last parameter record");
  return file;
}

void write_model_file(const ModelFile& file, const std::filesystem::path& path) {
  const std::string bytes = encode_model_file(file);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ModelFile read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return decode_model_file(buffer.str());
}

}  // namespace kgran

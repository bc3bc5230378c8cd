#include "kgran/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "kgran/corpus.hpp"

namespace kgran {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': invalid number '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + value + "'");
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"emb_dim", [](Config& c, auto& k, auto& v) { c.emb_dim = parse_number<Index>(k, v); }},
      {"hidden_fused_dim", [](Config& c, auto& k, auto& v) { c.hidden_fused_dim = parse_number<Index>(k, v); }},
      {"bilstm_layers", [](Config& c, auto& k, auto& v) { c.bilstm_layers = parse_number<int>(k, v); }},
      {"attn_layers", [](Config& c, auto& k, auto& v) { c.attn_layers = parse_number<int>(k, v); }},
      {"episode_dim", [](Config& c, auto& k, auto& v) { c.episode_dim = parse_number<Index>(k, v); }},
      {"lr", [](Config& c, auto& k, auto& v) { c.lr = parse_number<double>(k, v); }},
      {"l2_lambda", [](Config& c, auto& k, auto& v) { c.l2_lambda = parse_number<double>(k, v); }},
      {"dropout", [](Config& c, auto& k, auto& v) { c.dropout = parse_number<double>(k, v); }},
      {"epochs", [](Config& c, auto& k, auto& v) { c.epochs = parse_number<int>(k, v); }},
      {"seed", [](Config& c, auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"synonym_cap", [](Config& c, auto& k, auto& v) { c.synonym_cap = parse_number<std::size_t>(k, v); }},
      {"use_bias", [](Config& c, auto& k, auto& v) { c.use_bias = parse_bool(k, v); }},
      {"precision",
       [](Config& c, auto& k, auto& v) {
         if (v == "float32") {
           c.precision = Precision::Float32;
         } else if (v == "float64") {
           c.precision = Precision::Float64;
         } else {
           throw ConfigError("config key '" + k + "': expected float32 or float64, got '" + v + "'");
         }
       }},
      {"kge_method",
       [](Config& c, auto& k, auto& v) {
         const auto m = parse_kge_method(v);
         if (!m) throw ConfigError("config key '" + k + "': expected transe, transh or transr, got '" + v + "'");
         c.kge_method = *m;
       }},
      {"kge_triples", [](Config& c, auto&, auto& v) { c.kge_triples = v; }},
      {"kge_embeddings", [](Config& c, auto&, auto& v) { c.kge_embeddings = v; }},
      {"kge_epochs", [](Config& c, auto& k, auto& v) { c.kge_epochs = parse_number<int>(k, v); }},
      {"lemma_synsets", [](Config& c, auto&, auto& v) { c.lemma_synsets = v; }},
      {"glove", [](Config& c, auto&, auto& v) { c.glove = v; }},
      {"train_data", [](Config& c, auto&, auto& v) { c.train_data = v; }},
      {"validation_data", [](Config& c, auto&, auto& v) { c.validation_data = v; }},
      {"test_data", [](Config& c, auto&, auto& v) { c.test_data = v; }},
      {"model_out", [](Config& c, auto&, auto& v) { c.model_out = v; }},
      {"metrics_out", [](Config& c, auto&, auto& v) { c.metrics_out = v; }},
  };
  return table;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ModelDims Config::model_dims() const {
  ModelDims d;
  d.embedding_dim = emb_dim;
  d.fused_dim = hidden_fused_dim;
  d.episode_dim = episode_dim;
  d.bilstm_layers = bilstm_layers;
  d.attention_layers = attn_layers;
  d.use_bias = use_bias;
  d.dropout = dropout;
  return d;
}

AdamOptions Config::adam() const {
  AdamOptions o;
  o.learning_rate = lr;
  o.l2_lambda = l2_lambda;
  return o;
}

void Config::validate() const {
  try {
    model_dims().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be non-negative");
  if (epochs < 0 || kge_epochs < 0) throw ConfigError("epoch counts must be non-negative");
}

Config parse_config(const std::string& text) {
  Config config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    it->second(config, key, value);
  }
  config.validate();
  return config;
}

Config load_config(const std::filesystem::path& file) {
  std::string text;
  try {
    text = read_file(file);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  Config config = parse_config(text);
  const auto base = file.parent_path();
  for (std::string* path : {&config.kge_triples, &config.kge_embeddings, &config.lemma_synsets, &config.glove,
                            &config.train_data, &config.validation_data, &config.test_data, &config.model_out,
                            &config.metrics_out}) {
    if (!path->empty() && std::filesystem::path(*path).is_relative()) *path = (base / *path).lexically_normal().string();
  }
  return config;
}

std::string format_config(const Config& c) {
  std::ostringstream out;
  out << "emb_dim = " << c.emb_dim << '\n'
      << "hidden_fused_dim = " << c.hidden_fused_dim << '\n'
      << "bilstm_layers = " << c.bilstm_layers << '\n'
      << "attn_layers = " << c.attn_layers << '\n'
      << "episode_dim = " << c.episode_dim << '\n'
      << "lr = " << format_double(c.lr) << '\n'
      << "l2_lambda = " << format_double(c.l2_lambda) << '\n'
      << "dropout = " << format_double(c.dropout) << '\n'
      << "epochs = " << c.epochs << '\n'
      << "seed = " << c.seed << '\n'
      << "synonym_cap = " << c.synonym_cap << '\n'
      << "use_bias = " << (c.use_bias ? "true" : "false") << '\n'
      << "precision = " << (c.precision == Precision::Float32 ? "float32" : "float64") << '\n'
      << "kge_method = " << kge_method_name(c.kge_method) << '\n'
      << "kge_triples = " << c.kge_triples << '\n'
      << "kge_embeddings = " << c.kge_embeddings << '\n'
      << "kge_epochs = " << c.kge_epochs << '\n'
      << "lemma_synsets = " << c.lemma_synsets << '\n'
      << "glove = " << c.glove << '\n'
      << "train_data = " << c.train_data << '\n'
      << "validation_data = " << c.validation_data << '\n'
      << "test_data = " << c.test_data << '\n'
      << "model_out = " << c.model_out << '\n'
      << "metrics_out = " << c.metrics_out << '\n';
  return out.str();
}

}  // namespace kgran

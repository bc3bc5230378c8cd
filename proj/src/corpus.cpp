#include "kgran/corpus.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "kgran/rng.hpp"

namespace kgran {

std::optional<Polarity> parse_polarity(std::string_view name) {
  if (name == "positive") return Polarity::Positive;
  if (name == "negative") return Polarity::Negative;
  if (name == "neutral") return Polarity::Neutral;
  return std::nullopt;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(content);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      break;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) parts.push_back(line.substr(start, i - start));
  }
  return parts;
}

/// Byte offset of the `chars`-th Unicode code point in a UTF-8 string.
std::optional<std::size_t> utf8_byte_offset(const std::string& text, std::size_t chars) {
  std::size_t count = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || (static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      if (count == chars) return i;
      ++count;
    }
  }
  return std::nullopt;
}

std::size_t parse_size(std::string_view s, const std::string& context) {
  std::size_t value = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ParseError(context + ": expected integer, got '" + std::string(s) + "'");
  return value;
}

}  // namespace

std::vector<Token> tokenize_with_offsets(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t begin = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t end = i;
    if (end == begin) break;
    std::vector<Token> tail;
    while (begin < end && is_punct(static_cast<unsigned char>(text[begin]))) {
      tokens.push_back(Token{std::string(1, text[begin]), begin, begin + 1});
      ++begin;
    }
    while (end > begin && is_punct(static_cast<unsigned char>(text[end - 1]))) {
      tail.push_back(Token{std::string(1, text[end - 1]), end - 1, end});
      --end;
    }
    if (end > begin) tokens.push_back(Token{lowercase(text.substr(begin, end - begin)), begin, end});
    tokens.insert(tokens.end(), tail.rbegin(), tail.rend());
  }
  return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  for (auto& t : tokenize_with_offsets(text)) words.push_back(std::move(t.text));
  return words;
}

// ---------------------------------------------------------------------------

std::vector<Sentence> parse_aspect_xml_text(const std::string& xml, AspectXmlOptions options) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed aspect XML: ") + e.what());
  }

  std::vector<Sentence> out;
  const auto root = tree.get_child_optional("sentences");
  if (!root) throw ParseError("malformed aspect XML: missing <sentences> root");
  for (const auto& [tag, node] : *root) {
    if (tag != "sentence") continue;
    const std::string id = node.get<std::string>("<xmlattr>.id", "?");
    const auto text = node.get_optional<std::string>("text");
    if (!text) throw ParseError("sentence " + id + ": missing <text>");
    const auto tokens = tokenize_with_offsets(*text);
    const auto terms = node.get_child_optional("aspectTerms");
    if (!terms) continue;
    std::size_t term_index = 0;
    for (const auto& [term_tag, term] : *terms) {
      if (term_tag != "aspectTerm") continue;
      ++term_index;
      const std::string context = "sentence " + id + " aspect " + std::to_string(term_index);
      const auto polarity_name = term.get_optional<std::string>("<xmlattr>.polarity");
      const auto term_text = term.get_optional<std::string>("<xmlattr>.term");
      const auto from = term.get_optional<std::string>("<xmlattr>.from");
      const auto to = term.get_optional<std::string>("<xmlattr>.to");
      if (!polarity_name || !term_text || !from || !to) {
        throw ParseError(context + ": aspectTerm needs term, polarity, from, and to attributes");
      }
      if (*polarity_name == "conflict") continue;
      const auto polarity = parse_polarity(*polarity_name);
      if (!polarity) throw ParseError(context + ": unknown polarity '" + *polarity_name + "'");

      const auto begin_byte = utf8_byte_offset(*text, parse_size(*from, context));
      const auto end_byte = utf8_byte_offset(*text, parse_size(*to, context));
      std::optional<std::size_t> first, last;
      if (begin_byte && end_byte) {
        for (std::size_t k = 0; k < tokens.size(); ++k) {
          if (tokens[k].begin == *begin_byte) first = k;
          if (tokens[k].end == *end_byte) last = k;
        }
      }
      bool aligned = first && last && *first <= *last;
      Sentence s;
      if (aligned) {
        s.id = id + "#" + std::to_string(term_index);
        for (const auto& t : tokens) s.tokens.push_back(t.text);
        s.aspect = AspectSpan{*first + 1, *last + 1};
        s.label = *polarity;
        aligned = s.aspect_tokens() == tokenize(*term_text);
      }
      if (!aligned) {
        if (options.on_misaligned == MisalignedAspect::Skip) continue;
        throw ParseError(context + ": offsets [" + *from + ", " + *to + ") of term '" + *term_text +
                         "' do not align with token boundaries");
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<Sentence> parse_aspect_xml(const std::filesystem::path& file, AspectXmlOptions options) {
  try {
    return parse_aspect_xml_text(read_file(file), options);
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

std::vector<Sentence> parse_twitter_text(const std::string& content) {
  auto lines = split_lines(content);
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) lines.pop_back();
  if (lines.size() % 3 != 0) {
    throw ParseError("truncated record: " + std::to_string(lines.size()) + " lines is not a multiple of 3");
  }
  std::vector<Sentence> out;
  out.reserve(lines.size() / 3);
  for (std::size_t r = 0; r < lines.size(); r += 3) {
    const std::string context = "record at line " + std::to_string(r + 1);
    const std::string& text = lines[r];
    const std::string& aspect = lines[r + 1];
    std::string_view label(lines[r + 2]);
    while (!label.empty() && is_space(static_cast<unsigned char>(label.back()))) label.remove_suffix(1);
    while (!label.empty() && is_space(static_cast<unsigned char>(label.front()))) label.remove_prefix(1);

    Sentence s;
    s.id = std::to_string(r / 3 + 1);
    if (label == "1") {
      s.label = Polarity::Positive;
    } else if (label == "0") {
      s.label = Polarity::Neutral;
    } else if (label == "-1") {
      s.label = Polarity::Negative;
    } else {
      throw ParseError(context + ": label '" + std::string(label) + "' not in {-1, 0, 1}");
    }
    const std::size_t slot = text.find("$T$");
    if (slot == std::string::npos) throw ParseError(context + ": text has no $T$ placeholder");
    const auto left = tokenize(std::string_view(text).substr(0, slot));
    const auto middle = tokenize(aspect);
    const auto right = tokenize(std::string_view(text).substr(slot + 3));
    if (middle.empty()) throw ParseError(context + ": empty aspect");
    s.tokens = left;
    s.tokens.insert(s.tokens.end(), middle.begin(), middle.end());
    s.tokens.insert(s.tokens.end(), right.begin(), right.end());
    s.aspect = AspectSpan{left.size() + 1, left.size() + middle.size()};
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sentence> parse_twitter_tsv(const std::filesystem::path& file) {
  try {
    return parse_twitter_text(read_file(file));
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

std::vector<Sentence> load_sentences(const std::filesystem::path& file, AspectXmlOptions options) {
  if (file.extension() == ".xml") return parse_aspect_xml(file, options);
  return parse_twitter_tsv(file);
}

std::array<std::size_t, kNumClasses> class_totals(const std::vector<Sentence>& data) {
  std::array<std::size_t, kNumClasses> totals{};
  for (const auto& s : data) ++totals[class_index(s.label)];
  return totals;
}

// ---------------------------------------------------------------------------

Vocab::Vocab() { add(std::string(kUnknownToken)); }

Vocab::Vocab(const std::vector<Sentence>& data) : Vocab() {
  for (const auto& s : data) {
    for (const auto& w : s.tokens) add(w);
  }
}

std::size_t Vocab::add(const std::string& word) {
  const auto [it, inserted] = ids_.emplace(word, words_.size());
  if (inserted) words_.push_back(word);
  return it->second;
}

std::size_t Vocab::lookup(const std::string& word) const {
  const auto it = ids_.find(word);
  return it == ids_.end() ? kUnknown : it->second;
}

const std::string& Vocab::word(std::size_t id) const { return words_.at(id); }

bool EmbeddingTable::insert(const std::string& word, VectorType vector) {
  if (vector.size() != dim_) {
    throw std::invalid_argument("embedding for '" + word + "' has dimension " + std::to_string(vector.size()) +
                                ", table expects " + std::to_string(dim_));
  }
  const auto [it, inserted] = index_.emplace(word, vectors_.size());
  if (!inserted) return false;
  words_.push_back(word);
  vectors_.push_back(std::move(vector));
  return true;
}

const EmbeddingTable::VectorType* EmbeddingTable::find(const std::string& word) const {
  const auto it = index_.find(word);
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

EmbeddingTable::VectorType EmbeddingTable::lookup(const std::string& word) const {
  if (const auto* v = find(word)) return *v;
  return oov_vector(word);
}

EmbeddingTable::VectorType EmbeddingTable::oov_vector(const std::string& word) const {
  Rng rng(hash_string(word));
  VectorType v(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) v(i) = rng.uniform(-0.05, 0.05);
  return v;
}

EmbeddingTable parse_glove_text(const std::string& content, Eigen::Index dim,
                                const std::unordered_set<std::string>* keep) {
  EmbeddingTable table(dim, true);
  std::size_t line_no = 0;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (static_cast<Eigen::Index>(fields.size()) != dim + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim + 1) +
                       " fields (word + " + std::to_string(dim) + " values), got " + std::to_string(fields.size()));
    }
    std::string word(fields[0]);
    if (keep != nullptr && keep->count(word) == 0) continue;
    if (table.contains(word)) continue;
    EmbeddingTable::VectorType v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto f = fields[static_cast<std::size_t>(i + 1)];
      double value = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(f) + "'");
      }
      v(i) = value;
    }
    table.insert(word, std::move(v));
  }
  return table;
}

EmbeddingTable load_glove(const std::filesystem::path& file, Eigen::Index dim,
                          const std::unordered_set<std::string>* keep) {
  try {
    return parse_glove_text(read_file(file), dim, keep);
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
  return static_cast<std::size_t>(splitmix64(t.head ^ splitmix64(t.relation ^ splitmix64(t.tail))));
}

TripleData parse_triples_text(const std::string& content) {
  TripleData data;
  std::unordered_map<std::string, std::size_t> entity_ids, relation_ids;
  auto intern = [](std::unordered_map<std::string, std::size_t>& ids, std::vector<std::string>& names,
                   std::string_view name) {
    const auto [it, inserted] = ids.emplace(std::string(name), names.size());
    if (inserted) names.emplace_back(name);
    return it->second;
  };
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_on(lines[i], '\t');
    if (fields.size() != 3) {
      throw ParseError("line " + std::to_string(i + 1) + ": expected 3 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    Triple t;
    t.head = intern(entity_ids, data.entities, fields[0]);
    t.relation = intern(relation_ids, data.relations, fields[1]);
    t.tail = intern(entity_ids, data.entities, fields[2]);
    data.triples.push_back(t);
  }
  return data;
}

TripleData load_triples(const std::filesystem::path& file) {
  try {
    return parse_triples_text(read_file(file));
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

std::vector<LemmaSynset> parse_lemma_synsets_text(const std::string& content) {
  std::vector<LemmaSynset> out;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_on(lines[i], '\t');
    if (fields.size() != 2) {
      throw ParseError("line " + std::to_string(i + 1) + ": expected 'lemma<TAB>synset_id'");
    }
    out.push_back(LemmaSynset{lowercase(fields[0]), std::string(fields[1])});
  }
  return out;
}

std::vector<LemmaSynset> load_lemma_synsets(const std::filesystem::path& file) {
  try {
    return parse_lemma_synsets_text(read_file(file));
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

const std::vector<Synonym>& SynonymTable::synonyms(const std::string& word) const {
  static const std::vector<Synonym> kNone;
  const auto it = table_.find(word);
  return it == table_.end() ? kNone : it->second;
}

void SynonymTable::set(const std::string& word, std::vector<Synonym> synonyms) {
  if (synonyms.size() > cap_) synonyms.resize(cap_);
  for (const auto& s : synonyms) {
    if (s.lemma == word) throw std::invalid_argument("synonym list of '" + word + "' contains the word itself");
    if (s.vector.size() != dim_) {
      throw std::invalid_argument("synonym vector for '" + s.lemma + "' has dimension " +
                                  std::to_string(s.vector.size()) + ", expected " + std::to_string(dim_));
    }
  }
  if (synonyms.empty()) {
    table_.erase(word);
  } else {
    table_[word] = std::move(synonyms);
  }
}

SynonymTable build_synonym_table(const std::vector<LemmaSynset>& lemma_synsets,
                                 const EmbeddingTable& kg_embeddings, const Vocab& vocab,
                                 std::size_t cap, Eigen::Index dim, const EmbeddingTable* fallback) {
  if (kg_embeddings.size() > 0 && kg_embeddings.dim() != dim) {
    throw std::invalid_argument("KG embedding dimension " + std::to_string(kg_embeddings.dim()) +
                                " differs from synonym dimension " + std::to_string(dim));
  }
  const bool use_fallback = fallback != nullptr && fallback->dim() == dim;

  std::unordered_map<std::string, std::size_t> first_line;              // lemma -> file order
  std::unordered_map<std::string, std::vector<std::string>> synsets_of;  // lemma -> synsets
  std::unordered_map<std::string, std::vector<std::string>> lemmas_of;   // synset -> lemmas
  for (std::size_t i = 0; i < lemma_synsets.size(); ++i) {
    const auto& [lemma, synset] = lemma_synsets[i];
    first_line.emplace(lemma, i);
    auto& ss = synsets_of[lemma];
    if (std::find(ss.begin(), ss.end(), synset) == ss.end()) ss.push_back(synset);
    auto& ls = lemmas_of[synset];
    if (std::find(ls.begin(), ls.end(), lemma) == ls.end()) ls.push_back(lemma);
  }

  SynonymTable table(dim, cap);
  for (const auto& word : vocab.words()) {
    const auto own = synsets_of.find(word);
    if (own == synsets_of.end()) continue;
    // candidate lemma -> shared synsets in the order of `word`'s synsets
    std::map<std::size_t, std::pair<std::string, std::vector<std::string>>> candidates;
    for (const auto& synset : own->second) {
      for (const auto& lemma : lemmas_of[synset]) {
        if (lemma == word) continue;
        auto& entry = candidates[first_line[lemma]];
        entry.first = lemma;
        entry.second.push_back(synset);
      }
    }
    std::vector<Synonym> list;
    for (const auto& [order, entry] : candidates) {
      if (list.size() >= cap) break;
      const auto& [lemma, shared] = entry;
      const EmbeddingTable::VectorType* source = nullptr;
      for (const auto& synset : shared) {
        if ((source = kg_embeddings.find(synset)) != nullptr) break;
      }
      if (source == nullptr && use_fallback) source = fallback->find(lemma);
      if (source == nullptr) continue;
      list.push_back(Synonym{lemma, *source});
    }
    table.set(word, std::move(list));
  }
  return table;
}

}  // namespace kgran

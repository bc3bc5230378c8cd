#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgran/types.hpp"

namespace kgran {

/// Input data could not be parsed. The message carries file/line or sentence context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Tokenization

struct Token {
  std::string text;
  std::size_t begin = 0;  // byte offset into the source string
  std::size_t end = 0;    // one past the last byte
};

/// Lowercases, splits on whitespace, and peels leading and trailing ASCII
/// punctuation off each chunk, one token per punctuation character.
/// "dreadful!" -> ["dreadful", "!"]; "don't" stays whole.
std::vector<Token> tokenize_with_offsets(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

// ---------------------------------------------------------------------------
// Sentence datasets

enum class MisalignedAspect { Error, Skip };

struct AspectXmlOptions {
  MisalignedAspect on_misaligned = MisalignedAspect::Error;
};

/// SemEval-2014 Task 4 layout: sentences/sentence[@id]/text and
/// aspectTerms/aspectTerm[@term,@polarity,@from,@to]. One Sentence per
/// aspect term; "conflict" terms are dropped.
std::vector<Sentence> parse_aspect_xml(const std::filesystem::path& file, AspectXmlOptions options = {});
std::vector<Sentence> parse_aspect_xml_text(const std::string& xml, AspectXmlOptions options = {});

/// Three-line records: text containing $T$, aspect string, label in {-1, 0, 1}.
std::vector<Sentence> parse_twitter_tsv(const std::filesystem::path& file);
std::vector<Sentence> parse_twitter_text(const std::string& content);

/// Dispatches on extension: ".xml" -> aspect XML, anything else -> Twitter records.
std::vector<Sentence> load_sentences(const std::filesystem::path& file, AspectXmlOptions options = {});

std::array<std::size_t, kNumClasses> class_totals(const std::vector<Sentence>& data);

// ---------------------------------------------------------------------------
// Vocabulary and embeddings

class Vocab {
 public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocab();
  explicit Vocab(const std::vector<Sentence>& data);

  std::size_t add(const std::string& word);
  std::size_t lookup(const std::string& word) const;
  const std::string& word(std::size_t id) const;
  bool contains(const std::string& word) const { return ids_.count(word) != 0; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// Word vectors. Lookups of absent words return a deterministic per-word
/// vector drawn from uniform(-0.05, 0.05) seeded by a hash of the word.
class EmbeddingTable {
 public:
  using VectorType = Eigen::VectorXd;

  explicit EmbeddingTable(Eigen::Index dim = 0, bool frozen = true) : dim_(dim), frozen_(frozen) {}

  Eigen::Index dim() const { return dim_; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& word) const { return index_.count(word) != 0; }

  /// Returns false (and keeps the existing vector) when the word is already present.
  bool insert(const std::string& word, VectorType vector);

  const VectorType* find(const std::string& word) const;
  VectorType lookup(const std::string& word) const;
  VectorType oov_vector(const std::string& word) const;

  /// Words in insertion order.
  const std::vector<std::string>& words() const { return words_; }

 private:
  Eigen::Index dim_;
  bool frozen_;
  std::vector<std::string> words_;
  std::vector<VectorType> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// GloVe text format: "word v1 ... vd" per line. When `keep` is given, only
/// those words are retained.
EmbeddingTable load_glove(const std::filesystem::path& file, Eigen::Index dim,
                          const std::unordered_set<std::string>* keep = nullptr);
EmbeddingTable parse_glove_text(const std::string& content, Eigen::Index dim,
                                const std::unordered_set<std::string>* keep = nullptr);

// ---------------------------------------------------------------------------
// Knowledge graph triples

struct Triple {
  std::size_t head = 0;
  std::size_t relation = 0;
  std::size_t tail = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept;
};

using TripleSet = std::unordered_set<Triple, TripleHash>;

struct TripleData {
  std::vector<Triple> triples;
  std::vector<std::string> entities;   // id -> name
  std::vector<std::string> relations;  // id -> name
  std::size_t entity_count() const { return entities.size(); }
  std::size_t relation_count() const { return relations.size(); }
};

/// Tab-separated "head relation tail" lines. Duplicate lines are kept.
TripleData load_triples(const std::filesystem::path& file);
TripleData parse_triples_text(const std::string& content);

// ---------------------------------------------------------------------------
// Synonyms

struct LemmaSynset {
  std::string lemma;
  std::string synset;
};

/// Tab-separated "lemma synset_id" lines, file order preserved. Lemmas are lowercased.
std::vector<LemmaSynset> load_lemma_synsets(const std::filesystem::path& file);
std::vector<LemmaSynset> parse_lemma_synsets_text(const std::string& content);

struct Synonym {
  std::string lemma;
  Eigen::VectorXd vector;
};

class SynonymTable {
 public:
  explicit SynonymTable(Eigen::Index dim = 0, std::size_t cap = 10) : dim_(dim), cap_(cap) {}

  Eigen::Index dim() const { return dim_; }
  std::size_t cap() const { return cap_; }

  /// Empty list for words without synonyms.
  const std::vector<Synonym>& synonyms(const std::string& word) const;
  void set(const std::string& word, std::vector<Synonym> synonyms);
  std::size_t word_count() const { return table_.size(); }

 private:
  Eigen::Index dim_;
  std::size_t cap_;
  std::unordered_map<std::string, std::vector<Synonym>> table_;
};

/// Syn(w): lemmas sharing at least one synset with w, minus w, in file order,
/// truncated to `cap`. Each candidate's vector is the KG embedding of the first
/// shared synset that has one; otherwise the candidate's word vector from
/// `fallback` (only when its dimension equals `dim`); otherwise it is dropped.
SynonymTable build_synonym_table(const std::vector<LemmaSynset>& lemma_synsets,
                                 const EmbeddingTable& kg_embeddings, const Vocab& vocab,
                                 std::size_t cap, Eigen::Index dim,
                                 const EmbeddingTable* fallback = nullptr);

std::string read_file(const std::filesystem::path& file);

}  // namespace kgran

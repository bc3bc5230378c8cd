#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kgran/corpus.hpp"
#include "kgran/rng.hpp"

namespace kgran {

enum class KgeMethod { TransE, TransH, TransR };

std::optional<KgeMethod> parse_kge_method(std::string_view name);
std::string_view kge_method_name(KgeMethod method);

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Translation-based KG embedding. Rows of `entities` / `relations` are the
/// per-id vectors. TransH keeps one unit hyperplane normal per relation;
/// TransR one d x d projection per relation.
struct KgeModel {
  KgeMethod method = KgeMethod::TransE;
  double margin = 1.0;
  Eigen::MatrixXd entities;
  Eigen::MatrixXd relations;
  Eigen::MatrixXd normals;
  std::vector<Eigen::MatrixXd> projections;

  Eigen::Index dim() const { return entities.cols(); }
  std::size_t entity_count() const { return static_cast<std::size_t>(entities.rows()); }
  std::size_t relation_count() const { return static_cast<std::size_t>(relations.rows()); }
};

KgeModel init_kge(KgeMethod method, std::size_t entity_count, std::size_t relation_count,
                  Eigen::Index dim, Rng& rng, double margin = 1.0);

/// L2 dissimilarity of a triple; lower is more plausible.
double score(const KgeModel& model, const Triple& triple);

/// Gradient of score() with respect to each participating parameter.
struct KgeGradient {
  Eigen::VectorXd head;
  Eigen::VectorXd relation;
  Eigen::VectorXd tail;
  Eigen::VectorXd normal;      // TransH only
  Eigen::MatrixXd projection;  // TransR only
};

KgeGradient score_gradient(const KgeModel& model, const Triple& triple);

/// Replaces head or tail (fair coin) by a uniform entity until the result is
/// neither the input nor a known triple.
Triple negative_sample(const Triple& triple, std::size_t entity_count, Rng& rng, const TripleSet& known,
                       int max_attempts = 1000);

struct KgeOptions {
  KgeMethod method = KgeMethod::TransE;
  Eigen::Index dim = 300;
  int epochs = 100;
  double learning_rate = 0.01;
  double margin = 1.0;
  std::uint64_t seed = 1;
};

/// SGD on the margin ranking loss sum(max(0, margin + score(pos) - score(neg))).
/// Entity rows are projected into the unit ball after every epoch. When
/// `epoch_losses` is given it receives the summed hinge loss of each epoch.
KgeModel train_kge(const TripleData& data, const KgeOptions& options,
                   std::vector<double>* epoch_losses = nullptr);

/// Mean score of the training triples and of one corruption per triple.
struct KgeSeparation {
  double positive = 0;
  double corrupted = 0;
};
KgeSeparation score_separation(const KgeModel& model, const std::vector<Triple>& triples, Rng& rng);

/// GloVe-style text: "name v1 ... vd", 9 significant digits.
std::string format_entities(const KgeModel& model, const std::vector<std::string>& names);
void export_entities(const KgeModel& model, const std::vector<std::string>& names,
                     const std::filesystem::path& file);

}  // namespace kgran

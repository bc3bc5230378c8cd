#include "kgran/kge.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace kgran {

std::optional<KgeMethod> parse_kge_method(std::string_view name) {
  if (name == "transe") return KgeMethod::TransE;
  if (name == "transh") return KgeMethod::TransH;
  if (name == "transr") return KgeMethod::TransR;
  return std::nullopt;
}

std::string_view kge_method_name(KgeMethod method) {
  switch (method) {
    case KgeMethod::TransE: return "transe";
    case KgeMethod::TransH: return "transh";
    case KgeMethod::TransR: return "transr";
  }
  return "unknown";
}

namespace {

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double lo, double hi) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(lo, hi);
  }
}

void clip_rows_to_unit_ball(Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n > 1.0) m.row(i) /= n;
  }
}

void normalize_rows(Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n > 0.0) m.row(i) /= n;
  }
}

void check_ids(const KgeModel& model, const Triple& t) {
  if (t.head >= model.entity_count() || t.tail >= model.entity_count() || t.relation >= model.relation_count()) {
    throw std::out_of_range("triple (" + std::to_string(t.head) + ", " + std::to_string(t.relation) + ", " +
                            std::to_string(t.tail) + ") outside model with " +
                            std::to_string(model.entity_count()) + " entities and " +
                            std::to_string(model.relation_count()) + " relations");
  }
}

/// Translation residual h' + r - t' in the scoring space of the method.
Eigen::VectorXd residual(const KgeModel& model, const Triple& t) {
  const Eigen::VectorXd h = model.entities.row(static_cast<Eigen::Index>(t.head)).transpose();
  const Eigen::VectorXd r = model.relations.row(static_cast<Eigen::Index>(t.relation)).transpose();
  const Eigen::VectorXd tail = model.entities.row(static_cast<Eigen::Index>(t.tail)).transpose();
  switch (model.method) {
    case KgeMethod::TransE:
      return h + r - tail;
    case KgeMethod::TransH: {
      const Eigen::VectorXd w = model.normals.row(static_cast<Eigen::Index>(t.relation)).transpose();
      const Eigen::VectorXd hp = h - w.dot(h) * w;
      const Eigen::VectorXd tp = tail - w.dot(tail) * w;
      return hp + r - tp;
    }
    case KgeMethod::TransR: {
      const Eigen::MatrixXd& m = model.projections[t.relation];
      const Eigen::VectorXd hp = m * h;
      const Eigen::VectorXd tp = m * tail;
      return hp + r - tp;
    }
  }
  return {};
}

}  // namespace

KgeModel init_kge(KgeMethod method, std::size_t entity_count, std::size_t relation_count, Eigen::Index dim,
                  Rng& rng, double margin) {
  if (dim <= 0) throw std::invalid_argument("KGE dimension must be positive");
  KgeModel model;
  model.method = method;
  model.margin = margin;
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  model.entities.resize(static_cast<Eigen::Index>(entity_count), dim);
  model.relations.resize(static_cast<Eigen::Index>(relation_count), dim);
  fill_uniform(model.entities, rng, -bound, bound);
  fill_uniform(model.relations, rng, -bound, bound);
  normalize_rows(model.relations);
  normalize_rows(model.entities);
  if (method == KgeMethod::TransH) {
    model.normals.resize(static_cast<Eigen::Index>(relation_count), dim);
    fill_uniform(model.normals, rng, -bound, bound);
    normalize_rows(model.normals);
  }
  if (method == KgeMethod::TransR) {
    model.projections.reserve(relation_count);
    for (std::size_t r = 0; r < relation_count; ++r) {
      Eigen::MatrixXd noise(dim, dim);
      fill_uniform(noise, rng, -0.01, 0.01);
      model.projections.push_back(Eigen::MatrixXd::Identity(dim, dim) + noise);
    }
  }
  return model;
}

double score(const KgeModel& model, const Triple& triple) {
  check_ids(model, triple);
  return residual(model, triple).norm();
}

KgeGradient score_gradient(const KgeModel& model, const Triple& t) {
  check_ids(model, t);
  const Eigen::VectorXd d = residual(model, t);
  const double n = d.norm();
  const Eigen::VectorXd u = n > 0.0 ? Eigen::VectorXd(d / n) : Eigen::VectorXd::Zero(d.size());
  KgeGradient g;
  g.relation = u;
  switch (model.method) {
    case KgeMethod::TransE:
      g.head = u;
      g.tail = -u;
      break;
    case KgeMethod::TransH: {
      const Eigen::VectorXd w = model.normals.row(static_cast<Eigen::Index>(t.relation)).transpose();
      const Eigen::VectorXd x = (model.entities.row(static_cast<Eigen::Index>(t.head)) -
                                 model.entities.row(static_cast<Eigen::Index>(t.tail))).transpose();
      const Eigen::VectorXd pu = u - w.dot(u) * w;
      g.head = pu;
      g.tail = -pu;
      g.normal = -(u.dot(w) * x + w.dot(x) * u);
      break;
    }
    case KgeMethod::TransR: {
      const Eigen::MatrixXd& m = model.projections[t.relation];
      const Eigen::VectorXd x = (model.entities.row(static_cast<Eigen::Index>(t.head)) -
                                 model.entities.row(static_cast<Eigen::Index>(t.tail))).transpose();
      const Eigen::VectorXd mu = m.transpose() * u;
      g.head = mu;
      g.tail = -mu;
      g.projection = u * x.transpose();
      break;
    }
  }
  return g;
}

Triple negative_sample(const Triple& triple, std::size_t entity_count, Rng& rng, const TripleSet& known,
                       int max_attempts) {
  if (entity_count < 2) throw SamplingError("negative sampling needs at least 2 entities");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Triple candidate = triple;
    const auto entity = static_cast<std::size_t>(rng.below(entity_count));
    if (rng.coin()) {
      candidate.head = entity;
    } else {
      candidate.tail = entity;
    }
    if (candidate == triple || known.count(candidate) != 0) continue;
    return candidate;
  }
  throw SamplingError("no unseen corruption of (" + std::to_string(triple.head) + ", " +
                      std::to_string(triple.relation) + ", " + std::to_string(triple.tail) + ") after " +
                      std::to_string(max_attempts) + " attempts");
}

namespace {

void apply(KgeModel& model, const Triple& t, const KgeGradient& g, double step) {
  model.entities.row(static_cast<Eigen::Index>(t.head)) -= step * g.head.transpose();
  model.entities.row(static_cast<Eigen::Index>(t.tail)) -= step * g.tail.transpose();
  model.relations.row(static_cast<Eigen::Index>(t.relation)) -= step * g.relation.transpose();
  if (model.method == KgeMethod::TransH) {
    auto w = model.normals.row(static_cast<Eigen::Index>(t.relation));
    w -= step * g.normal.transpose();
    const double n = w.norm();
    if (n > 0.0) w /= n;
  }
  if (model.method == KgeMethod::TransR) model.projections[t.relation] -= step * g.projection;
}

}  // namespace

KgeModel train_kge(const TripleData& data, const KgeOptions& options, std::vector<double>* epoch_losses) {
  if (data.triples.empty()) throw std::invalid_argument("train_kge: no triples");
  Rng rng(options.seed);
  KgeModel model = init_kge(options.method, data.entity_count(), data.relation_count(), options.dim, rng,
                            options.margin);
  const TripleSet known(data.triples.begin(), data.triples.end());
  std::vector<std::size_t> order(data.triples.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (const std::size_t i : order) {
      const Triple& pos = data.triples[i];
      const Triple neg = negative_sample(pos, data.entity_count(), rng, known);
      const double hinge = model.margin + score(model, pos) - score(model, neg);
      if (hinge <= 0.0) continue;
      total += hinge;
      const KgeGradient gp = score_gradient(model, pos);
      const KgeGradient gn = score_gradient(model, neg);
      apply(model, pos, gp, options.learning_rate);
      apply(model, neg, gn, -options.learning_rate);
    }
    clip_rows_to_unit_ball(model.entities);
    if (epoch_losses != nullptr) epoch_losses->push_back(total);
  }
  return model;
}

KgeSeparation score_separation(const KgeModel& model, const std::vector<Triple>& triples, Rng& rng) {
  KgeSeparation s;
  if (triples.empty()) return s;
  const TripleSet known(triples.begin(), triples.end());
  for (const auto& t : triples) {
    s.positive += score(model, t);
    s.corrupted += score(model, negative_sample(t, model.entity_count(), rng, known));
  }
  s.positive /= static_cast<double>(triples.size());
  s.corrupted /= static_cast<double>(triples.size());
  return s;
}

std::string format_entities(const KgeModel& model, const std::vector<std::string>& names) {
  if (names.size() != model.entity_count()) {
    throw std::invalid_argument("export_entities: " + std::to_string(names.size()) + " names for " +
                                std::to_string(model.entity_count()) + " entities");
  }
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += names[i];
    for (Eigen::Index j = 0; j < model.dim(); ++j) {
      std::snprintf(buf, sizeof buf, " %.9g", model.entities(static_cast<Eigen::Index>(i), j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void export_entities(const KgeModel& model, const std::vector<std::string>& names,
                     const std::filesystem::path& file) {
  const std::string text = format_entities(model, names);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

}  // namespace kgran

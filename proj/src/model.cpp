#include "kgran/model.hpp"

#include <stdexcept>

namespace kgran {

void ModelDims::validate() const {
  if (embedding_dim <= 0 || fused_dim <= 0 || episode_dim <= 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (fused_dim % 2 != 0) throw std::invalid_argument("fused hidden dimension must be even (two directions)");
  if (bilstm_layers < 1 || attention_layers < 1) throw std::invalid_argument("layer counts must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
}

template class KgranModel<float>;
template class KgranModel<double>;

}  // namespace kgran

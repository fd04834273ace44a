#pragma once

#include <cmath>
#include <memory>

#include "ctxsum/error.h"
#include "ctxsum/models.h"

namespace ctxsum::detail {

std::unique_ptr<nn::Optimizer<float>> make_optimizer(OptimizerKind kind,
                                                     double lr,
                                                     double momentum);

// Copies SGNS rows into the corpus-word rows of a model embedding table.
void load_embedding_rows(nn::Tensor<float>& table,
                         const EmbeddingMatrix& embeddings);

inline void check_finite(double loss) {
  if (!std::isfinite(loss)) throw Error("training produced a non-finite loss");
}

// Row-major B x dim block of unit-length context inputs.
std::vector<float> stack_contexts(const std::vector<const std::vector<double>*>& rows,
                                  std::size_t dim, bool required);

}  // namespace ctxsum::detail

#pragma once

#include "argonet/backtest.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace argonet {

// Plain-text model dump, one block per model:
//
//   [model]
//   as_of = 2020-02-03
//   variant = augmented
//   run = 0
//   cluster = 1
//   members = R01;R07
//   lambda = ...
//   intercept = ...
//   converged = 1
//   iterations = 42
//   kkt_residual = ...
//   target.mean = ...
//   target.std = ...
//   coef.<column> = ...
//   norm.<column>.mean = ...
//   norm.<column>.std = ...
//
// Reals are written with 17 significant digits so a round trip is exact.
void write_models(std::ostream& os, std::span<const StoredModel> models);

/// Throws DataError with the line number on malformed input.
std::vector<StoredModel> read_models(std::istream& is);

}  // namespace argonet

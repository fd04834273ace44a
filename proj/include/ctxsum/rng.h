#pragma once

#include <random>

namespace ctxsum {

// Every stochastic component takes one of these explicitly; nothing reads a
// global generator.
using Rng = std::mt19937_64;

}  // namespace ctxsum

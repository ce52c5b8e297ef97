#pragma once

// Shared fixtures for the test executables.

#include "spheresteer/data.hpp"
#include "spheresteer/train.hpp"

#include <doctest.h>

#include <cmath>

namespace spheresteer::testing {

// The Tetris ancestor used throughout: H = 5, default Adam, seed 0, trained
// once per process.
inline const TrainResult& trained_tetris() {
  static const TrainResult result = [] {
    TrainConfig cfg;
    cfg.epochs = 2000;
    cfg.seed = 0;
    return train(tetris_dataset(), cfg);
  }();
  return result;
}

template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace spheresteer::testing

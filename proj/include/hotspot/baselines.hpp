#pragma once

#include <memory>

#include "hotspot/planner.hpp"

namespace hotspot {

enum class BaselineKind {
  Boustrophedon,
  GradientAscent,
  VarianceReduction,
  MutualInformation,
  BlockUcl,
};

struct BaselineConfig {
  BaselineKind kind = BaselineKind::Boustrophedon;
  int fixed_level = 0;        // boustrophedon and gradient ascent
  double block_growth = 2.0;  // block_ucl: block b holds ceil(growth^b) images
};

std::unique_ptr<Strategy> make_baseline(const BaselineConfig& config);

// Per-arm greedy mutual information gain 0.5*logdet(I + P_Ii / noise_i).
double mutual_information_gain(const GpEngine& engine, const Arm& arm);

// Serpentine row-major visit order over one level's lattice.
std::vector<int> boustrophedon_order(const ArmGrid& grid, int level);

}  // namespace hotspot

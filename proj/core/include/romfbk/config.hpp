#pragma once

#include "romfbk/controller.hpp"
#include "romfbk/dataset.hpp"
#include "romfbk/fom.hpp"
#include "romfbk/ocp.hpp"
#include "romfbk/training.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>

namespace romfbk {

/// Every setting of the offline/online pipeline in one JSON document.
/// Missing keys take their defaults; unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 42;
  int nx = 32;
  FomConfig fom;
  OcpConfig ocp;

  int num_scenarios = 20;
  ParameterBox initial_box = default_initial_box();
  ParameterBox target_box = default_target_box();
  std::optional<ParameterBox> flow_box;
  double test_fraction = 0.2;
  bool augment = true;
  int threads = 0;

  ReductionConfig reduction;
  TrainConfig training;
  bool with_forward = true;
  bool cold_start = false;
  LossWeights stage1 = LossWeights::stage1();
  LossWeights stage2 = LossWeights::stage2();

  NoiseSpec noise;

  /// Named sub-seeds derived from seed.
  std::uint64_t sampler_seed() const;
  std::uint64_t split_seed() const;
  std::uint64_t init_seed() const;
  std::uint64_t noise_seed() const;

  GenerationConfig generation() const;
  TrainConfig train_config() const;

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
};

}  // namespace romfbk

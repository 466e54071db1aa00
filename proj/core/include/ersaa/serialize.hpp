#pragma once

#include <string>
#include <utility>

#include "ersaa/datagen.hpp"
#include "ersaa/regression.hpp"
#include "ersaa/residuals.hpp"
#include "ersaa/stochprog.hpp"

namespace ersaa::serialize {

/// Fitted model pair as a JSON document; load(save(m)) predicts identically.
std::string model_pair_to_json(const regression::ModelPair& models);
regression::ModelPair model_pair_from_json(const std::string& text);

void save_model_pair(const regression::ModelPair& models, const std::string& path);
regression::ModelPair load_model_pair(const std::string& path);

/// Ground-truth model from its JSON description.
datagen::TruthSpec truth_spec_from_json(const std::string& text);

/// Decision problem plus outcome support box from a JSON description.
std::pair<stochprog::Problem, residuals::SupportBox> problem_from_json(const std::string& text);

} // namespace ersaa::serialize

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "instab/model.hpp"

namespace instab::models {

/// Ids of all registered models, in registration order.
std::vector<std::string> model_ids();

/// Builds a model by id. `overrides` adjusts fixed model constants (not the
/// searched parameter); unknown ids and unknown override keys throw
/// std::invalid_argument. Recognized keys:
///   parallel:       n_queues, connect_prob, service_prob
///   rybko-stolyar:  lambda, mu_r
///   ran:            kappa (6 numbers), nu (6 numbers), mu (6 numbers)
/// The remaining models take no overrides.
std::unique_ptr<ChainModel> make_model(const std::string& id,
                                       const nlohmann::json& overrides = {});

} // namespace instab::models

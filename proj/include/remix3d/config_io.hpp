// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/metrics.hpp"
#include "remix3d/reconstruction.hpp"
#include "remix3d/remix_gan.hpp"
#include "remix3d/renderer.hpp"

#include <json.hpp>

// JSON mapping of the configuration structs. Readers reject unknown keys and
// leave missing keys at their current (default) values, so a partial document
// overlays the defaults.

namespace remix3d {

nlohmann::json to_json(const RenderConfig& c);
nlohmann::json to_json(const ReconConfig& c);
nlohmann::json to_json(const GanConfig& c);
nlohmann::json to_json(const LossWeights& c);
nlohmann::json to_json(const MetricsConfig& c);

void overlay(RenderConfig& c, const nlohmann::json& j, const std::string& where);
void overlay(ReconConfig& c, const nlohmann::json& j, const std::string& where);
void overlay(GanConfig& c, const nlohmann::json& j, const std::string& where);
void overlay(LossWeights& c, const nlohmann::json& j, const std::string& where);
void overlay(MetricsConfig& c, const nlohmann::json& j, const std::string& where);

std::string to_string(SamplingPolicy p);
SamplingPolicy parse_sampling_policy(const std::string& s);

/// Throws SchemaError naming the first key of `j` that is not in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where);

} // namespace remix3d

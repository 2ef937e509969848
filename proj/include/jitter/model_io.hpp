#pragma once

#include "jitter/estimators.hpp"

#include <iosfwd>
#include <string>
#include <variant>

namespace jitter {

//! Version written into (and required from) model files.
inline constexpr int model_format_version = 1;

using FittedModel = std::variant<KdeModel, LocLinModel>;

//! Serializes the full model state (origin data, replicates, transform,
//! bandwidths, noise, seed) as JSON. Doubles are written in shortest
//! round-trip form, so a reloaded model evaluates bit-identically.
void
save_model(std::ostream& out, const FittedModel& model);
void
save_model(const std::string& path, const FittedModel& model);

FittedModel
load_model(std::istream& in);
FittedModel
load_model(const std::string& path);

} // namespace jitter

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gplab/concentration.hpp"
#include "gplab/experiment.hpp"
#include "gplab/grid.hpp"
#include "gplab/rkhs.hpp"

namespace gplab {

using Json = nlohmann::json;  // std::map objects: keys serialize sorted

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);
std::string dump_json(const Json& j);  // 2-space indent, trailing LF

/// Non-finite doubles become the strings "inf", "-inf", "nan".
Json number(double v);

std::string path_csv(const GridFunction& f);
std::string smallball_csv(const SmallBallEstimate& est);
std::string profile_csv(const ConcentrationProfile& profile);
std::string rate_csv(const RateSolution& sol);
std::string decentering_csv(const std::vector<DecenteringResult>& profile);
std::string experiment_csv(const ExperimentReport& report);

Json to_json(const SmallBallEstimate& est);
Json to_json(const ConcentrationProfile& profile);
Json to_json(const RateSolution& sol);
Json to_json(const ExperimentReport& report);

}  // namespace gplab

#pragma once

#include <string>

#include "json.hpp"
#include "wgmres/forge.hpp"

namespace wgmres::lab {

nlohmann::json matrix_to_json(const Mat& a);
Mat matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vec& v);
Vec vector_from_json(const nlohmann::json& j);
nlohmann::json real_to_json(const RVec& v);
RVec real_from_json(const nlohmann::json& j);

nlohmann::json to_json(const forge::ForgedInstance& inst);
forge::ForgedInstance instance_from_json(const nlohmann::json& j);

/// Replays the instance with fresh solver runs and compares against its prescription.
nlohmann::json verify_instance(const forge::ForgedInstance& inst);

}  // namespace wgmres::lab

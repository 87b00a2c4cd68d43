#pragma once

#include "ult/families.hpp"
#include "ult/fit.hpp"
#include "ult/net.hpp"
#include "ult/prune.hpp"
#include "ult/pwl.hpp"

#include <json.hpp>

#include <string>

namespace ult {

using json = nlohmann::ordered_json;

inline constexpr const char* net_schema = "ult-net/1";
inline constexpr const char* mask_schema = "ult-mask/1";
inline constexpr const char* target_schema = "ult-target/1";

// {"schema": "ult-net/1", "widths": [...], "kinds": [...], "output_activation": ...,
//  "sigma_w": [...], "layers": [{"w": [row-major], "b": [...]}, ...]}
json to_json(const mother_net& net);
mother_net net_from_json(const json& j);

// {"schema": "ult-mask/1", "param_count": n, "bits": [0/1 ...]}
json to_json(const prune_mask& mask);
prune_mask mask_from_json(const json& j);

json to_json(const pwl_rep& rep);
pwl_rep pwl_from_json(const json& j);

json to_json(const linear_target& t);
linear_target linear_from_json(const json& j);

// Target file: {"schema": "ult-target/1", "kind": "linear", "W", "b", "lo", "hi"}
// or {"schema": "ult-target/1", "kind": "univariate", "knots", "coeffs", "lo", "hi"}.
struct target_file {
    std::string kind;
    linear_target linear;
    pwl_rep rep;
    double lo = 0.0, hi = 1.0;
};
target_file target_from_json(const json& j);
json to_json(const target_file& t);

// Reports omit the mask bits; masks are written to their own file.
json to_json(const ticket_report& r);
json to_json(const family_report& r);
json to_json(const fit_result& r);
json to_json(const stage_sheet& s);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

} // namespace ult

#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "residuap/group.hpp"

namespace residuap {

using json = nlohmann::json;

json group_to_json(const FiniteGroup& G);
// Validates the table fully (including associativity).
GroupPtr group_from_json(const json& j, const std::string& where = "group");
GroupPtr read_group_stream(std::istream& in, const std::string& where);

json subgroup_to_json(const Subgroup& S);
Subgroup subgroup_from_json(const GroupPtr& G, const json& j, const std::string& where = "subgroup");
json hom_to_json(const Homomorphism& h);
Homomorphism hom_from_json(const GroupPtr& dom, const GroupPtr& cod, const json& j,
                           const std::string& where = "homomorphism");

json read_json_file(const std::string& path);

}  // namespace residuap

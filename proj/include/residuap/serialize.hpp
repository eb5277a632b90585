#pragma once

#include <string>

#include "residuap/embed.hpp"
#include "residuap/graphgroups.hpp"
#include "residuap/io.hpp"

namespace residuap {

// "catalog:NAME", a bare catalog name, {"catalog": NAME}, {"file": PATH} or a table {"order", "mult"}
GroupPtr resolve_group(const json& j, const std::string& where = "group");
// catalog reference when the catalog table matches, else the full table
json group_ref(const GroupPtr& G);

Filtration filtration_from_json(const GroupPtr& G, const json& j, const std::string& where = "filtration");
// {"group": ref, "terms": [[indices]...]}; a bare array of terms is also read
json filtration_to_json(const Filtration& F, bool with_group = true);

// {"group": G, "items": [{"gens": [...], "imgs": [...]} | {"perm": [...]} | {"matrix": rows}]}
// "matrix" is linear on F_p^r with element index sum c_i p^i; row i is the image of basis vector i
PartialAutomorphismSet pas_from_json(const json& j, const std::string& where = "pas");
json pas_to_json(const PartialAutomorphismSet& pas);

// {"G", "H", "U", "uG", "uH"} with optional "FG", "FH" filtrations
Amalgam amalgam_from_json(const json& j, const std::string& where = "amalgam");
json amalgam_to_json(const Amalgam& am);

// {"vertices": [G...], "edges": [{"o", "t", "group", "to_t", "to_o"}]}; edge i is oriented edge 2i
GraphOfGroups gog_from_json(const json& j, const std::string& where = "gog");
json gog_to_json(const GraphOfGroups& G);

PathWord path_from_json(const json& j, const std::string& where = "path");
json path_to_json(const PathWord& w);

json certificate_to_json(const GraphOfGroups& G, const Certificate& c, int p);
json inner_extension_to_json(const PartialAutomorphismSet& pas, const InnerExtension& ie);
json flag_to_json(const PartialAutomorphismSet& pas, const FlagCertificate& f);
// with FG and FH given, an implicit W is recorded by the input filtrations and rebuilt by verify
json strong_embedding_to_json(const Amalgam& am, const HigmanResult& r, const Filtration* FG = nullptr,
                              const Filtration* FH = nullptr);

struct VerifyOutcome {
    bool ok = false;
    std::string kind, detail;
};
// re-checks a serialized certificate from scratch; throws Error on malformed input
VerifyOutcome verify_certificate(const json& j);

}  // namespace residuap

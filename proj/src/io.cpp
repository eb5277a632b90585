#include "residuap/io.hpp"

#include <algorithm>
#include <fstream>

namespace residuap {

json group_to_json(const FiniteGroup& G) {
    json mult = json::array();
    for (int a = 0; a < G.order(); ++a) {
        json row = json::array();
        for (int b = 0; b < G.order(); ++b) row.push_back(G.mul(a, b));
        mult.push_back(std::move(row));
    }
    return {{"order", G.order()}, {"mult", std::move(mult)}, {"name", G.name()}};
}

GroupPtr group_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("order") || !j.contains("mult"))
        throw Error(where + ": expected object with \"order\" and \"mult\"");
    int n = j.at("order").get<int>();
    const json& m = j.at("mult");
    if (!m.is_array() || static_cast<int>(m.size()) != n)
        throw Error(where + ".mult: expected " + std::to_string(n) + " rows");
    std::vector<int> mult;
    mult.reserve(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a) {
        const json& row = m[a];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw Error(where + ".mult[" + std::to_string(a) + "]: expected " + std::to_string(n) +
                        " entries");
        for (const auto& x : row) mult.push_back(x.get<int>());
    }
    std::string name = j.value("name", "");
    GroupPtr G;
    try {
        G = make_group(n, std::move(mult), name);
        G->check_axioms();
    } catch (const Error& e) {
        throw Error(where + ": " + e.what());
    }
    return G;
}

GroupPtr read_group_stream(std::istream& in, const std::string& where) {
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw Error(where + ": " + e.what());
    }
    return group_from_json(j, where);
}

json subgroup_to_json(const Subgroup& S) { return S.elems; }

Subgroup subgroup_from_json(const GroupPtr& G, const json& j, const std::string& where) {
    if (!j.is_array()) throw Error(where + ": expected index array");
    std::vector<int> e = j.get<std::vector<int>>();
    for (int x : e)
        if (x < 0 || x >= G->order()) throw Error(where + ": index " + std::to_string(x) + " out of range");
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    Subgroup s = subgroup_generated(G, e);
    if (s.elems != e) throw Error(where + ": not a subgroup");
    return s;
}

json hom_to_json(const Homomorphism& h) { return h.map; }

Homomorphism hom_from_json(const GroupPtr& dom, const GroupPtr& cod, const json& j,
                           const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != dom->order())
        throw Error(where + ": expected index array of length " + std::to_string(dom->order()));
    Homomorphism h{dom, cod, j.get<std::vector<int>>()};
    if (!h.is_homomorphism()) throw Error(where + ": not a homomorphism");
    return h;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(path + ": cannot open");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::parse_error& e) {
        throw Error(path + ": " + e.what());
    }
}

}  // namespace residuap

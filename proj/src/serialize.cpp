#include "residuap/serialize.hpp"

#include "residuap/catalog.hpp"

namespace residuap {

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw Error(where + ": missing \"" + key + "\"");
    return j.at(key);
}

std::vector<int> ints(const json& j, const std::string& where) {
    if (!j.is_array()) throw Error(where + ": expected an integer array");
    std::vector<int> v;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer()) throw Error(where + "[" + std::to_string(i) + "]: expected an integer");
        v.push_back(j[i].get<int>());
    }
    return v;
}

int integer(const json& j, const char* key, const std::string& where) {
    const auto& x = field(j, key, where);
    if (!x.is_number_integer()) throw Error(where + "." + key + ": expected an integer");
    return x.get<int>();
}

void in_range(const std::vector<int>& v, int n, const std::string& where) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] < 0 || v[i] >= n) throw Error(where + "[" + std::to_string(i) + "]: index out of range");
}

Homomorphism hom_checked(const GroupPtr& dom, const GroupPtr& cod, const json& j, const std::string& where) {
    auto v = ints(j, where);
    if (static_cast<int>(v.size()) != dom->order())
        throw Error(where + ": expected " + std::to_string(dom->order()) + " images");
    in_range(v, cod->order(), where);
    return Homomorphism{dom, cod, v};
}

std::vector<int> linear_automorphism(const GroupPtr& G, const json& rows, const std::string& where) {
    int p = G->prime();
    int r = 0;
    for (int n = 1; n < G->order(); n *= p) ++r;
    if (p <= 1 || !G->is_abelian()) throw Error(where + ": matrix form needs an elementary abelian group");
    if (!rows.is_array() || static_cast<int>(rows.size()) != r) throw Error(where + ": expected " + std::to_string(r) + " rows");
    Mat M;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto row = ints(rows[i], where + "[" + std::to_string(i) + "]");
        if (static_cast<int>(row.size()) != r) throw Error(where + ": rows must have length " + std::to_string(r));
        for (auto& x : row) x = mod(x, p);
        M.push_back(row);
    }
    auto index = [&](const Vec& c) {
        int x = 0;
        for (int i = r - 1; i >= 0; --i) x = x * p + c[i];
        return x;
    };
    std::vector<int> perm(G->order());
    for (int x = 0; x < G->order(); ++x) {
        Vec c(r);
        for (int i = 0, y = x; i < r; ++i, y /= p) c[i] = y % p;
        perm[x] = index(vec_mat(c, M, p));
    }
    return perm;
}

}  // namespace

GroupPtr resolve_group(const json& j, const std::string& where) {
    try {
        if (j.is_string()) {
            auto s = j.get<std::string>();
            if (s.rfind("catalog:", 0) == 0) s = s.substr(8);
            return catalog_group(s);
        }
        if (j.is_object() && j.contains("catalog")) return catalog_group(j.at("catalog").get<std::string>());
        if (j.is_object() && j.contains("file")) return group_from_json(read_json_file(j.at("file").get<std::string>()), where);
        return group_from_json(j, where);
    } catch (const json::exception& e) {
        throw Error(where + ": " + e.what());
    }
}

json group_ref(const GroupPtr& G) {
    if (!G->name().empty()) {
        try {
            auto c = catalog_group(G->name());
            if (c->table() == G->table()) return "catalog:" + G->name();
        } catch (const Error&) {
        }
    }
    return group_to_json(*G);
}

Filtration filtration_from_json(const GroupPtr& G, const json& j, const std::string& where) {
    const json* terms = &j;
    if (j.is_object()) {
        if (j.contains("group") && resolve_group(j.at("group"), where + ".group")->table() != G->table())
            throw Error(where + ".group: does not match the filtered group");
        terms = &field(j, "terms", where);
    }
    if (!terms->is_array()) throw Error(where + ": expected an array of subgroups");
    std::vector<Subgroup> t;
    for (std::size_t i = 0; i < terms->size(); ++i)
        t.push_back(subgroup_from_json(G, (*terms)[i], where + ".terms[" + std::to_string(i) + "]"));
    try {
        return make_filtration(G, std::move(t));
    } catch (const Error& e) {
        throw Error(where + ": " + e.what());
    }
}

json filtration_to_json(const Filtration& F, bool with_group) {
    json a = json::array();
    for (const auto& t : F.terms) a.push_back(subgroup_to_json(t));
    json j{{"terms", std::move(a)}};
    if (with_group) j["group"] = group_ref(F.group);
    return j;
}

PartialAutomorphismSet pas_from_json(const json& j, const std::string& where) {
    PartialAutomorphismSet pas;
    pas.group = resolve_group(field(j, "group", where), where + ".group");
    const auto& items = field(j, "items", where);
    if (!items.is_array()) throw Error(where + ".items: expected an array");
    for (std::size_t i = 0; i < items.size(); ++i) {
        std::string w = where + ".items[" + std::to_string(i) + "]";
        const auto& it = items[i];
        try {
            if (it.contains("perm")) {
                auto perm = ints(it.at("perm"), w + ".perm");
                if (static_cast<int>(perm.size()) != pas.group->order()) throw Error(w + ".perm: wrong length");
                in_range(perm, pas.group->order(), w + ".perm");
                pas.items.push_back(total_automorphism(pas.group, perm));
            } else if (it.contains("matrix")) {
                pas.items.push_back(total_automorphism(pas.group, linear_automorphism(pas.group, it.at("matrix"), w + ".matrix")));
            } else {
                auto gens = ints(field(it, "gens", w), w + ".gens");
                auto imgs = ints(field(it, "imgs", w), w + ".imgs");
                if (gens.size() != imgs.size()) throw Error(w + ": gens and imgs differ in length");
                in_range(gens, pas.group->order(), w + ".gens");
                in_range(imgs, pas.group->order(), w + ".imgs");
                pas.items.push_back(partial_automorphism(pas.group, gens, imgs));
            }
        } catch (const CapExceeded&) {
            throw;
        } catch (const Error& e) {
            std::string m = e.what();
            throw Error(m.rfind(w, 0) == 0 ? m : w + ": " + m);
        }
    }
    pas.verify();
    return pas;
}

json pas_to_json(const PartialAutomorphismSet& pas) {
    json items = json::array();
    for (const auto& it : pas.items) {
        auto gens = generators(it.A);
        std::vector<int> imgs;
        for (int g : gens) imgs.push_back(it(g));
        items.push_back({{"gens", gens}, {"imgs", imgs}});
    }
    return {{"group", group_ref(pas.group)}, {"items", items}};
}

Amalgam amalgam_from_json(const json& j, const std::string& where) {
    Amalgam am;
    am.G = resolve_group(field(j, "G", where), where + ".G");
    am.H = resolve_group(field(j, "H", where), where + ".H");
    am.U = resolve_group(field(j, "U", where), where + ".U");
    am.uG = hom_checked(am.U, am.G, field(j, "uG", where), where + ".uG");
    am.uH = hom_checked(am.U, am.H, field(j, "uH", where), where + ".uH");
    try {
        am.verify();
    } catch (const Error& e) {
        throw Error(where + ": " + e.what());
    }
    return am;
}

json amalgam_to_json(const Amalgam& am) {
    return {{"G", group_ref(am.G)}, {"H", group_ref(am.H)}, {"U", group_ref(am.U)}, {"uG", am.uG.map}, {"uH", am.uH.map}};
}

GraphOfGroups gog_from_json(const json& j, const std::string& where) {
    const auto& vs = field(j, "vertices", where);
    if (!vs.is_array() || vs.empty()) throw Error(where + ".vertices: expected a nonempty array");
    std::vector<GroupPtr> groups;
    for (std::size_t v = 0; v < vs.size(); ++v) groups.push_back(resolve_group(vs[v], where + ".vertices[" + std::to_string(v) + "]"));
    const auto& es = field(j, "edges", where);
    if (!es.is_array()) throw Error(where + ".edges: expected an array");
    std::vector<EdgeSpec> edges;
    for (std::size_t i = 0; i < es.size(); ++i) {
        std::string w = where + ".edges[" + std::to_string(i) + "]";
        EdgeSpec s;
        s.o = integer(es[i], "o", w);
        s.t = integer(es[i], "t", w);
        if (s.o < 0 || s.t < 0 || s.o >= static_cast<int>(groups.size()) || s.t >= static_cast<int>(groups.size()))
            throw Error(w + ": endpoint out of range");
        s.group = es[i].contains("group") ? resolve_group(es[i].at("group"), w + ".group") : trivial_group();
        s.to_t = hom_checked(s.group, groups[s.t], field(es[i], "to_t", w), w + ".to_t").map;
        s.to_o = hom_checked(s.group, groups[s.o], field(es[i], "to_o", w), w + ".to_o").map;
        edges.push_back(s);
    }
    try {
        auto G = make_gog(groups, edges);
        maximal_subtree(G.graph);
        return G;
    } catch (const Error& e) {
        throw Error(where + ": " + e.what());
    }
}

json gog_to_json(const GraphOfGroups& G) {
    json vs = json::array(), es = json::array();
    for (const auto& V : G.vgroups) vs.push_back(group_ref(V));
    const auto& Y = G.graph;
    for (int e = 0; e < Y.ne(); e += 2)
        es.push_back({{"o", Y.orig[e]}, {"t", Y.term[e]}, {"group", group_ref(G.egroups[e])},
                      {"to_t", G.emaps[e].map}, {"to_o", G.emaps[e + 1].map}});
    return {{"vertices", vs}, {"edges", es}};
}

PathWord path_from_json(const json& j, const std::string& where) {
    PathWord w;
    w.base = integer(j, "base", where);
    w.edges = j.contains("edges") ? ints(j.at("edges"), where + ".edges") : std::vector<int>{};
    w.elems = ints(field(j, "elems", where), where + ".elems");
    return w;
}

json path_to_json(const PathWord& w) { return {{"base", w.base}, {"edges", w.edges}, {"elems", w.elems}}; }

json certificate_to_json(const GraphOfGroups& G, const Certificate& c, int p) {
    json psi = json::array();
    for (const auto& h : c.psi_v) psi.push_back(h.map);
    return {{"kind", "gog-certificate"}, {"p", p},         {"gog", gog_to_json(G)},
            {"root", 0},                 {"target", group_to_json(*c.P)}, {"psi_v", psi},
            {"psi_e", c.psi_e},          {"method", c.method}};
}

json inner_extension_to_json(const PartialAutomorphismSet& pas, const InnerExtension& ie) {
    return {{"kind", "inner-extension"},         {"pas", pas_to_json(pas)},
            {"target", group_to_json(*ie.Hp)}, {"embedding", ie.embedding.map},
            {"conjugators", ie.conjugators}};
}

json flag_to_json(const PartialAutomorphismSet& pas, const FlagCertificate& f) {
    return {{"kind", "flag-certificate"}, {"pas", pas_to_json(pas)}, {"p", f.p},
            {"basis", f.basis},           {"extensions", f.extensions}, {"standard", f.standard},
            {"group_order", f.group_order}};
}

json strong_embedding_to_json(const Amalgam& am, const HigmanResult& r, const Filtration* FG, const Filtration* FH) {
    json j{{"kind", "strong-embedding"}, {"amalgam", amalgam_to_json(am)}, {"predicted_log2", r.predicted_log2}};
    if (FG && FH) {
        j["amalgam"]["FG"] = filtration_to_json(*FG);
        j["amalgam"]["FH"] = filtration_to_json(*FH);
    }
    if (r.implicit) {
        j["implicit"] = true;
        return j;
    }
    j["W"] = group_to_json(*r.embedding.W);
    j["alpha"] = r.embedding.alpha.map;
    j["beta"] = r.embedding.beta.map;
    j["filtration"] = filtration_to_json(r.W_filtration, false);
    return j;
}

VerifyOutcome verify_certificate(const json& j) {
    VerifyOutcome out;
    auto kind = field(j, "kind", "certificate");
    if (!kind.is_string()) throw Error("certificate.kind: expected a string");
    out.kind = kind.get<std::string>();
    auto done = [&](bool ok, std::string d) {
        out.ok = ok;
        out.detail = std::move(d);
        return out;
    };
    if (out.kind == "gog-certificate") {
        auto G = gog_from_json(field(j, "gog", "certificate"), "certificate.gog");
        int p = integer(j, "p", "certificate");
        int root = j.contains("root") ? integer(j, "root", "certificate") : 0;
        Certificate c;
        c.P = resolve_group(field(j, "target", "certificate"), "certificate.target");
        const auto& pv = field(j, "psi_v", "certificate");
        if (!pv.is_array() || static_cast<int>(pv.size()) != G.graph.nv)
            throw Error("certificate.psi_v: expected one map per vertex");
        for (int v = 0; v < G.graph.nv; ++v)
            c.psi_v.push_back(hom_checked(G.vgroups[v], c.P, pv[v], "certificate.psi_v[" + std::to_string(v) + "]"));
        c.psi_e = ints(field(j, "psi_e", "certificate"), "certificate.psi_e");
        std::string why;
        bool ok = c.verify(G, maximal_subtree(G.graph, root), p, &why);
        return done(ok, ok ? "relations, tree edges and injectivity on " + std::to_string(G.graph.nv) + " vertex groups checked" : why);
    }
    if (out.kind == "inner-extension") {
        auto pas = pas_from_json(field(j, "pas", "certificate"), "certificate.pas");
        InnerExtension ie;
        ie.outcome = Outcome::Yes;
        ie.Hp = resolve_group(field(j, "target", "certificate"), "certificate.target");
        ie.embedding = hom_checked(pas.group, ie.Hp, field(j, "embedding", "certificate"), "certificate.embedding");
        ie.conjugators = ints(field(j, "conjugators", "certificate"), "certificate.conjugators");
        in_range(ie.conjugators, ie.Hp->order(), "certificate.conjugators");
        if (ie.conjugators.size() != pas.items.size()) return done(false, "one conjugator per partial automorphism expected");
        if (!ie.embedding.is_homomorphism() || !ie.embedding.is_injective()) return done(false, "embedding is not an injective homomorphism");
        int p = pas.group->prime();
        if (ie.Hp->order() > 1 && (p <= 1 || !ie.Hp->is_p_group(p))) return done(false, "target is not a p-group");
        bool ok = ie.verify(pas);
        return done(ok, ok ? "conjugation checked on every associated subgroup" : "conjugation relation fails");
    }
    if (out.kind == "flag-certificate") {
        auto pas = pas_from_json(field(j, "pas", "certificate"), "certificate.pas");
        FlagCertificate f;
        try {
            f.p = j.at("p").get<int>();
            f.basis = j.at("basis").get<Mat>();
            f.extensions = j.at("extensions").get<std::vector<Mat>>();
            f.standard = j.at("standard").get<std::vector<Mat>>();
            f.group_order = j.at("group_order").get<int>();
        } catch (const json::exception& e) {
            throw Error(std::string("certificate: ") + e.what());
        }
        bool ok = f.verify(pas);
        return done(ok, ok ? "unipotent extensions checked" : "extensions fail the flag conditions");
    }
    if (out.kind == "strong-embedding") {
        auto am = amalgam_from_json(field(j, "amalgam", "certificate"), "certificate.amalgam");
        if (j.value("implicit", false)) {
            const auto& a = field(j, "amalgam", "certificate");
            if (!a.contains("FG") || !a.contains("FH"))
                return done(false, "implicit W without input filtrations; nothing to re-check");
            auto FG = filtration_from_json(am.G, a.at("FG"), "certificate.amalgam.FG");
            auto FH = filtration_from_json(am.H, a.at("FH"), "certificate.amalgam.FH");
            HigmanResult r;
            try {
                r = higman_embed(am, FG, FH);
            } catch (const Error& e) {
                return done(false, std::string("rebuilding W failed: ") + e.what());
            }
            bool ok = r.a1 && r.a2 && r.strong && r.central_p &&
                      (r.implicit ? strong_in_wreath(am, *r.implicit) : r.embedding.check(am));
            return done(ok, ok ? "W rebuilt from the filtrations; strong embedding and layer intersections checked"
                               : "rebuilt embedding fails its checks");
        }
        StrongEmbedding e;
        e.W = resolve_group(field(j, "W", "certificate"), "certificate.W");
        e.alpha = hom_checked(am.G, e.W, field(j, "alpha", "certificate"), "certificate.alpha");
        e.beta = hom_checked(am.H, e.W, field(j, "beta", "certificate"), "certificate.beta");
        auto FW = filtration_from_json(e.W, field(j, "filtration", "certificate"), "certificate.filtration");
        int p = am.G->order() > 1 ? am.G->prime() : am.H->prime();
        if (p <= 1 || !e.W->is_p_group(p)) return done(false, "W is not a p-group");
        if (!e.alpha.is_homomorphism() || !e.alpha.is_injective() || !e.beta.is_homomorphism() || !e.beta.is_injective())
            return done(false, "alpha or beta is not an injective homomorphism");
        if (!e.check(am)) return done(false, "strong embedding equalities fail");
        if (!FW.is_central_p(p) || FW.length() < 0) return done(false, "filtration of W is not a finite central p-filtration");
        auto Gs = pullback(FW, e.alpha), Hs = pullback(FW, e.beta);
        if (!layers_meet_in_U(am, e, FW, Gs, Hs)) return done(false, "layers of G and H do not meet in U");
        return done(true, "strong embedding, central p-filtration and layer intersections checked");
    }
    throw Error("certificate.kind: unknown kind '" + out.kind + "'");
}

}  // namespace residuap

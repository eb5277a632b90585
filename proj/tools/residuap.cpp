#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "residuap/abelian.hpp"
#include "residuap/algebra.hpp"
#include "residuap/catalog.hpp"
#include "residuap/congruence.hpp"
#include "residuap/embed.hpp"
#include "residuap/filtration.hpp"
#include "residuap/graphgroups.hpp"
#include "residuap/serialize.hpp"

using namespace residuap;

namespace {

struct Workspace {
    int p = 0;
    std::size_t cap_order = Caps{}.order;
    std::size_t cap_wreath = Caps{}.wreath;
    int depth = Caps{}.depth;
    std::uint64_t seed = 1;
    bool json_out = false, report = false;
    std::string file, group = "catalog:C2", series = "gammap", word, pk, out;
    int level = 2, horizon = 0, order = 2, n_max = 0, k_max = 3, n = 2, d = 1;
    long long x = 1;
    std::string matrix;
    int count = 10, length = 6;

    Caps caps() const {
        if (cap_order == 0 || cap_wreath == 0 || depth <= 0) throw Error("caps must be positive");
        Caps c;
        c.order = cap_order;
        c.wreath = cap_wreath;
        c.depth = depth;
        return c;
    }
    int prime(int fallback = 0) const {
        int q = p ? p : fallback;
        if (!is_prime(q)) throw Error("--p: a prime is required");
        return q;
    }
};

struct Result {
    json body;
    int code = 0;
};

void render(const json& j, const std::string& prefix, std::ostream& os) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) render(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
    } else if (j.is_array() && !j.empty() && (j[0].is_object() || j.size() > 16)) {
        if (j.size() > 16 && !j[0].is_object()) {
            os << prefix << ": [" << j.size() << " entries]\n";
            return;
        }
        for (std::size_t i = 0; i < j.size(); ++i) render(j[i], prefix + "[" + std::to_string(i) + "]", os);
    } else {
        os << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
    }
}

json load(const Workspace& ws) {
    if (ws.file.empty()) throw Error("--file is required");
    return read_json_file(ws.file);
}

json inline_json(const std::string& s, const char* what) {
    if (s.empty()) throw Error(std::string(what) + " is required");
    if (s[0] == '@') return read_json_file(s.substr(1));
    try {
        return json::parse(s);
    } catch (const json::parse_error& e) {
        throw Error(std::string(what) + ": " + e.what());
    }
}

Series parse_series(const std::string& s) {
    if (s == "gamma") return Series::Gamma;
    if (s == "gammap") return Series::GammaP;
    if (s == "dimension") return Series::Dimension;
    throw Error("--series: expected gamma, gammap or dimension");
}

std::pair<int, int> parse_pk(const std::string& s) {
    auto c = s.find(':');
    if (c == std::string::npos) throw Error("--pk: expected p:k");
    try {
        return {std::stoi(s.substr(0, c)), std::stoi(s.substr(c + 1))};
    } catch (const std::logic_error&) {
        throw Error("--pk: expected p:k");
    }
}

std::vector<int> term_orders(const Filtration& F) {
    std::vector<int> v;
    for (const auto& t : F.terms) v.push_back(t.size());
    return v;
}

json outcome_json(Outcome o, const std::string& reason) { return {{"outcome", outcome_name(o)}, {"reason", reason}}; }

// -- group ----------------------------------------------------------------------------------

Result group_show(const Workspace& ws) {
    auto G = resolve_group(json(ws.group), "--group");
    int exponent = 1;
    for (int g = 0; g < G->order(); ++g) exponent = std::lcm(exponent, G->element_order(g));
    auto lcs = lower_central_series(G);
    json j{{"name", G->name()}, {"order", G->order()}, {"abelian", G->is_abelian()}, {"prime", G->prime()},
           {"exponent", exponent}, {"center", center(G).size()}};
    if (lcs.terms.back().trivial()) j["class"] = std::max(0, lcs.size() - 1);
    else j["nilpotent"] = false;
    if (G->is_abelian()) {
        auto inv = invariants(G);
        j["invariants"] = inv.torsion;
    }
    return {j, 0};
}

Result group_list(const Workspace&) {
    json a = json::array();
    for (const auto& n : catalog_names()) a.push_back({{"name", n}, {"order", catalog_group(n)->order()}});
    return {{{"groups", a}}, 0};
}

Result group_table(const Workspace& ws) { return {group_to_json(*resolve_group(json(ws.group), "--group")), 0}; }

// -- filtration -------------------------------------------------------------------------------

Result filt_series(const Workspace& ws) {
    auto G = resolve_group(json(ws.group), "--group");
    int p = ws.series == "gamma" ? (ws.p ? ws.p : 2) : ws.prime(G->prime() > 1 ? G->prime() : 0);
    auto F = series(G, parse_series(ws.series), p);
    return {{{"series", ws.series}, {"p", p}, {"orders", term_orders(F)}, {"length", F.length()},
             {"central", F.is_central()}, {"central_p", F.is_central_p(p)}, {"group", group_ref(G)},
             {"terms", filtration_to_json(F, false).at("terms")}},
            0};
}

Result filt_potency(const Workspace& ws) {
    auto G = resolve_group(json(ws.group), "--group");
    int p = ws.prime(G->prime() > 1 ? G->prime() : 0);
    auto F = series(G, parse_series(ws.series), p);
    int h = ws.horizon > 0 ? ws.horizon : ws.depth;
    auto r = classify_potency(F, p, h);
    json lv = json::array();
    for (const auto& l : r.levels)
        lv.push_back({{"n", l.n}, {"p_morphism", l.p_morphism}, {"s_morphism", l.s_morphism},
                      {"phi_injective", l.phi_injective}, {"phi_bijective", l.phi_bijective}});
    return {{{"horizon", r.horizon}, {"p_potent", r.p_potent}, {"strongly", r.strongly}, {"uniformly", r.uniformly}, {"levels", lv}},
            0};
}

Result filt_chief(const Workspace& ws) {
    auto G = resolve_group(json(ws.group), "--group");
    auto all = chief_filtrations(G, ws.caps().order);
    json j{{"count", all.size()}};
    if (!all.empty()) {
        j["first"] = filtration_to_json(all.front());
        j["first_orders"] = term_orders(all.front());
    }
    return {j, 0};
}

// -- algebra ------------------------------------------------------------------------------------

Result alg_jennings(const Workspace& ws) {
    auto G = resolve_group(json(ws.group), "--group");
    int p = ws.prime(G->prime() > 1 ? G->prime() : 0);
    auto J = jennings_series(G, p);
    auto D = dimension_series(G, p);
    auto L = dimension_series_lazard(G, p);
    auto om = augmentation_ideal_powers(G, p);
    return {{{"p", p}, {"orders", term_orders(J)}, {"group", group_ref(G)},
             {"terms", filtration_to_json(J, false).at("terms")},
             {"matches_dimension_series", same_terms(J, D) && same_terms(D, L)},
             {"class", om.nilpotency_class}, {"class_formula", jennings_class_formula(G, p)}},
            0};
}

Result alg_omega(const Workspace& ws) {
    auto G = resolve_group(json(ws.group), "--group");
    int p = ws.prime(G->prime() > 1 ? G->prime() : 0);
    auto om = augmentation_ideal_powers(G, p);
    return {{{"p", p}, {"dims", om.dims}, {"class", om.nilpotency_class}}, 0};
}

Result alg_buckley(const Workspace& ws) {
    auto H = resolve_group(json(ws.group), "--group");
    int p = ws.prime(H->prime() > 1 ? H->prime() : 0);
    auto r = buckley_check(p, H, ws.n_max, ws.caps());
    json lv = json::array();
    for (const auto& l : r.levels)
        lv.push_back({{"n", l.n}, {"omega", l.dim_omega}, {"dimension", l.dim_dimension}, {"gamma_p", l.dim_gamma_p},
                      {"gamma", l.dim_gamma}, {"equal", l.equal}});
    return {{{"holds", r.holds}, {"wreath_class", r.wreath_class}, {"omega_class", r.omega_class}, {"levels", lv}},
            r.holds ? 0 : 10};
}

// -- embed ------------------------------------------------------------------------------------------

Result emb_fiber_sum(const Workspace& ws) {
    auto am = amalgam_from_json(load(ws), ws.file);
    auto fs = fiber_sum(am.G, am.H, am.uG, am.uH);
    return {{{"order", fs.group->order()}, {"invariants", invariants(fs.group).torsion},
             {"inG", fs.inA.map}, {"inH", fs.inB.map}, {"injective", fs.inA.is_injective() && fs.inB.is_injective()}},
            0};
}

Result emb_higman(const Workspace& ws) {
    auto j = load(ws);
    auto am = amalgam_from_json(j, ws.file);
    Filtration FG, FH;
    if (j.contains("FG") && j.contains("FH")) {
        FG = filtration_from_json(am.G, j.at("FG"), ws.file + ".FG");
        FH = filtration_from_json(am.H, j.at("FH"), ws.file + ".FH");
    } else {
        auto found = amalgam_embeddable(am, ws.caps());
        if (!found) return {outcome_json(Outcome::No, "no pair of chief filtrations induces equivalent filtrations on U"), 10};
        FG = found->first;
        FH = found->second;
    }
    HigmanResult r;
    try {
        r = higman_embed(am, FG, FH, ws.caps());
    } catch (const CapExceeded& e) {
        return {outcome_json(Outcome::Unknown, e.what()), 20};
    }
    auto out = strong_embedding_to_json(am, r, &FG, &FH);
    out["a1"] = r.a1;
    out["a2"] = r.a2;
    out["central_p"] = r.central_p;
    return {out, r.implicit ? 20 : 0};
}

Result emb_flag(const Workspace& ws) {
    auto pas = pas_from_json(load(ws), ws.file);
    if (auto f = unipotent_flag_extend(pas, ws.caps())) return {flag_to_json(pas, *f), 0};
    auto ie = inner_extension(pas, ws.caps());
    if (ie.outcome == Outcome::No) return {outcome_json(Outcome::No, "no flag satisfies the extension condition"), 10};
    return {outcome_json(Outcome::Unknown, ie.reason), 20};
}

Result emb_inner(const Workspace& ws) {
    auto pas = pas_from_json(load(ws), ws.file);
    auto ie = inner_extension(pas, ws.caps());
    if (ie.outcome == Outcome::Yes) return {inner_extension_to_json(pas, ie), 0};
    return {outcome_json(ie.outcome, ie.reason), exit_code(ie.outcome)};
}

Result emb_mapping_torus(const Workspace& ws) {
    auto pas = pas_from_json(load(ws), ws.file);
    std::vector<std::vector<int>> autos;
    for (const auto& it : pas.items) {
        if (it.A.size() != pas.group->order()) throw Error(ws.file + ": mapping torus needs total automorphisms");
        autos.push_back(it.map);
    }
    int p = ws.prime(pas.group->prime() > 1 ? pas.group->prime() : 0);
    auto r = mapping_torus_check(pas.group, p, autos, ws.caps());
    return {{{"p_group", r.p_group}, {"induced_order", r.induced_order}, {"layer_orders", r.layer_orders},
             {"all_layers_p", r.all_layers_p}},
            r.all_layers_p ? 0 : 10};
}

// -- gog -----------------------------------------------------------------------------------------------

GogPtr load_gog(const Workspace& ws) { return share(gog_from_json(load(ws), ws.file)); }

std::vector<Subgroup> series_collection(const GraphOfGroups& G, const Workspace& ws) {
    std::vector<Subgroup> H;
    for (const auto& V : G.vgroups) {
        int p = V->order() > 1 ? V->prime() : 2;
        if (ws.p) p = ws.p;
        H.push_back(series(V, parse_series(ws.series), p).term(ws.level));
    }
    return H;
}

GogFiltration series_filtration(const GraphOfGroups& G, const Workspace& ws) {
    GogFiltration F;
    for (const auto& V : G.vgroups) {
        int p = V->order() > 1 ? V->prime() : 2;
        if (ws.p) p = ws.p;
        F.F.push_back(series(V, parse_series(ws.series), p));
    }
    return F;
}

Result gog_nf(const Workspace& ws) {
    auto gp = load_gog(ws);
    PathGroup PG(gp, maximal_subtree(gp->graph));
    auto w = path_from_json(inline_json(ws.word, "--word"), "--word");
    auto n = PG.normal_form(w);
    return {{{"normal_form", path_to_json(n)}, {"identity", PG.is_identity(w)}, {"reduced", PG.is_reduced(n)}}, 0};
}

Result gog_sample(const Workspace& ws) {
    auto gp = load_gog(ws);
    PathGroup PG(gp, maximal_subtree(gp->graph));
    std::uint64_t state = ws.seed;
    json a = json::array();
    for (int i = 0; i < ws.count; ++i) {
        auto w = PG.random_closed(0, ws.length, state);
        a.push_back({{"word", path_to_json(w)}, {"normal_form", path_to_json(PG.normal_form(w))}});
    }
    return {{{"seed", ws.seed}, {"samples", a}}, 0};
}

json gog_summary(const GraphOfGroups& G) {
    std::vector<int> vo, eo;
    for (const auto& V : G.vgroups) vo.push_back(V->order());
    for (int e = 0; e < G.graph.ne(); e += 2) eo.push_back(G.egroups[e]->order());
    return {{"vertices", G.graph.nv}, {"edges", G.graph.ne() / 2}, {"vertex_orders", vo}, {"edge_orders", eo}};
}

Result gog_quotient(const Workspace& ws) {
    auto gp = load_gog(ws);
    auto q = quotient_gog(gp, series_collection(*gp, ws));
    auto j = gog_summary(*q.gog);
    j["gog"] = gog_to_json(*q.gog);
    return {j, 0};
}

Result gog_cover(const Workspace& ws) {
    auto gp = load_gog(ws);
    auto c = common_cover(gp, series_collection(*gp, ws));
    auto j = gog_summary(*c.gog);
    j["degree"] = c.degree;
    j["p_power_degree"] = c.p_power_degree;
    j["copies"] = c.copies;
    j["ports"] = c.ports;
    return {j, 0};
}

Result gog_sigma(const Workspace& ws) {
    auto gp = load_gog(ws);
    auto W = sigma_witness(gp, ws.caps());
    int p = W.pa.sigma.group->order() > 1 ? W.pa.sigma.group->prime() : 2;
    return {{{"sigma_order", W.pa.sigma.group->order()}, {"A_order", W.A.group->order()}, {"psi", W.psi},
             {"unfolded", gog_summary(*W.unfolded.gog)}, {"certificate", certificate_to_json(*W.unfolded.gog, W.mu, p)}},
            0};
}

Result gog_partial_ab(const Workspace& ws) {
    auto gp = load_gog(ws);
    auto pa = partial_abelianization(*gp, maximal_subtree(gp->graph));
    return {{{"sigma_order", pa.sigma.group->order()}, {"invariants", invariants(pa.sigma.group).torsion},
             {"edges", pa.edges}, {"pas", pas_to_json(pa.pas)}},
            0};
}

Result gog_certify(const Workspace& ws) {
    auto gp = load_gog(ws);
    int p = ws.p;
    if (!p)
        for (const auto& V : gp->vgroups)
            if (V->order() > 1) p = V->prime();
    if (!is_prime(p)) throw Error("--p: a prime is required");
    auto r = certify_residually_p(*gp, p, ws.caps());
    if (r.outcome == Outcome::Yes) {
        auto j = certificate_to_json(*gp, *r.certificate, p);
        j["outcome"] = outcome_name(r.outcome);
        return {j, 0};
    }
    auto j = outcome_json(r.outcome, r.reason);
    j["method"] = r.method;
    return {j, exit_code(r.outcome)};
}

Result gog_unfold(const Workspace& ws) {
    auto gp = load_gog(ws);
    auto T = maximal_subtree(gp->graph);
    auto A = cyclic(ws.order);
    std::vector<int> psi(gp->graph.ne(), 0);
    auto edges = positive_nontree_edges(gp->graph, T);
    std::vector<int> vals(edges.size(), 1 % ws.order);
    if (!ws.word.empty()) vals = inline_json(ws.word, "--psi").get<std::vector<int>>();
    if (vals.size() != edges.size()) throw Error("--psi: one value per non-tree edge expected");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        psi[edges[i]] = ((vals[i] % ws.order) + ws.order) % ws.order;
        psi[gp->graph.bar[edges[i]]] = A->inv(psi[edges[i]]);
    }
    auto u = unfold_gog(gp, T, A, psi);
    auto j = gog_summary(*u.gog);
    j["betti"] = u.gog->graph.betti();
    j["base_betti"] = gp->graph.betti();
    j["gog"] = gog_to_json(*u.gog);
    return {j, 0};
}

Result gog_separate(const Workspace& ws) {
    auto gp = load_gog(ws);
    PathGroup PG(gp, maximal_subtree(gp->graph));
    auto w = path_from_json(inline_json(ws.word, "--word"), "--word");
    auto s = separating_level(PG, series_filtration(*gp, ws), w);
    json j{{"positions", s.positions}, {"per_position", s.per_position}};
    if (s.level) j["level"] = *s.level;
    else j["failure"] = s.failure;
    return {j, s.level ? 0 : 20};
}

Result gog_homology(const Workspace& ws) {
    auto gp = load_gog(ws);
    auto h = homology_fiber_sum_check(*gp, maximal_subtree(gp->graph));
    auto inv = [](const AbelianInvariants& a) { return json{{"torsion", a.torsion}, {"free_rank", a.free_rank}}; };
    return {{{"hypothesis", h.hypothesis}, {"h1", inv(h.h1)}, {"expected", inv(h.expected)}, {"matches", h.matches}}, 0};
}

// -- congruence -------------------------------------------------------------------------------------

Result cong_tower(const Workspace& ws) {
    auto [p, k] = parse_pk(ws.pk);
    CongruenceTower T(p, k, ws.caps());
    std::vector<std::size_t> sizes;
    for (int i = 0; i <= k; ++i) sizes.push_back(T.members(i).size());
    return {{{"p", p}, {"k", k}, {"order", T.order()}, {"formula", sl2_order_formula(p, k)}, {"congruence_orders", sizes}},
            static_cast<long long>(T.order()) == sl2_order_formula(p, k) ? 0 : 1};
}

Result cong_layers(const Workspace& ws) {
    auto [p, k] = parse_pk(ws.pk);
    auto r = congruence_layer_check(p, k, ws.caps());
    return {{{"order_ok", r.order_ok}, {"layer_orders", r.layer_orders}, {"layer_elementary", r.layer_elementary},
             {"commutators_ok", r.commutators_ok}, {"commutators_exhaustive", r.commutators_checked},
             {"power_clause", r.power_clause}},
            0};
}

Result cong_powermap(const Workspace& ws) {
    auto [p, k] = parse_pk(ws.pk);
    auto r = power_map_injectivity(p, k, ws.caps());
    return {{{"well_defined", r.well_defined}, {"homomorphism", r.homomorphism}, {"injective", r.injective},
             {"all_injective", r.all_injective()}},
            r.all_injective() ? 0 : 10};
}

Result cong_utorder(const Workspace& ws) {
    IMat N = inline_json(ws.matrix, "--matrix").get<IMat>();
    auto r = unitriangular_order(ws.n, ws.prime(), ws.d, N);
    return {{{"order", r.order}, {"within_exponent", r.within_exponent}, {"unit_codiagonal", r.unit_codiagonal}, {"exact", r.exact}},
            0};
}

Result cong_smith(const Workspace& ws) {
    auto j = load(ws);
    Presentation P;
    try {
        P.ngens = j.at("ngens").get<int>();
        P.relators = j.at("relators").get<std::vector<std::vector<int>>>();
    } catch (const json::exception& e) {
        throw Error(ws.file + ": " + e.what());
    }
    auto s = smith_abelianization(P);
    return {{{"free_rank", s.free_rank}, {"torsion", s.torsion}, {"verified", s.verified}}, s.verified ? 0 : 1};
}

Result cong_matrixfilt(const Workspace& ws) {
    MatrixGroupSpec s;
    s.n = 2;
    s.gens = {{{1, ws.x}, {0, 1}}};
    s.presentation.ngens = 1;
    s.subgroups = {{{1}}};
    auto r = matrix_p_filtration(s, ws.prime(), ws.k_max, ws.caps());
    json subs = json::array();
    for (const auto& t : r.subgroups) subs.push_back({{"exponent", t.exponent}, {"level", t.level}});
    json j{{"image_orders", r.image_orders}, {"subgroups", subs}, {"top_image_central_p", r.top_image_central_p}};
    if (auto l = r.level()) j["level"] = *l;
    return {j, 0};
}

// -- verify ---------------------------------------------------------------------------------------------

Result verify_cmd(const Workspace& ws) {
    auto v = verify_certificate(load(ws));
    return {{{"kind", v.kind}, {"valid", v.ok}, {"detail", v.detail}}, v.ok ? 0 : 10};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"residual p-properties of finite groups and graphs of groups"};
    app.fallthrough();
    app.require_subcommand(1);
    Workspace ws;
    app.add_option("--p", ws.p, "prime");
    app.add_option("--cap-order", ws.cap_order, "largest tabulated group");
    app.add_option("--cap-wreath", ws.cap_wreath, "largest wreath product");
    app.add_option("--depth", ws.depth, "search depth");
    app.add_option("--seed", ws.seed, "random seed");
    app.add_flag("--json", ws.json_out, "machine output (default)");
    app.add_flag("--report", ws.report, "human readable output");
    app.add_option("-o,--out", ws.out, "write output to a file");

    using Fn = Result (*)(const Workspace&);
    Fn chosen = nullptr;
    auto leaf = [&](CLI::App* parent, const char* name, const char* help, Fn fn) {
        auto* s = parent->add_subcommand(name, help);
        s->callback([&chosen, fn] { chosen = fn; });
        return s;
    };
    auto file_opt = [&](CLI::App* s) { s->add_option("--file,-f", ws.file, "input JSON")->required(); };
    auto group_opt = [&](CLI::App* s) { s->add_option("--group,-g", ws.group, "group reference, e.g. catalog:D8"); };

    auto* grp = app.add_subcommand("group", "construct and inspect groups")->require_subcommand(1);
    group_opt(leaf(grp, "show", "invariants of a group", group_show));
    leaf(grp, "list", "catalog names", group_list);
    group_opt(leaf(grp, "table", "Cayley table as JSON", group_table));

    auto* fil = app.add_subcommand("filtration", "series and filtrations")->require_subcommand(1);
    for (auto [name, help, fn] : std::vector<std::tuple<const char*, const char*, Fn>>{
             {"series", "gamma, gamma^p or dimension series", filt_series},
             {"potency", "potency classification of a series", filt_potency},
             {"chief", "chief filtrations", filt_chief}}) {
        auto* s = leaf(fil, name, help, fn);
        group_opt(s);
        s->add_option("--series", ws.series, "gamma | gammap | dimension");
        s->add_option("--horizon", ws.horizon, "levels to classify");
    }

    auto* alg = app.add_subcommand("algebra", "modular group algebra")->require_subcommand(1);
    group_opt(leaf(alg, "jennings", "Jennings series and nilpotency class of omega", alg_jennings));
    group_opt(leaf(alg, "omega", "dimensions of the powers of omega", alg_omega));
    {
        auto* s = leaf(alg, "buckley", "F_p wr H: lower central, gamma^p and dimension series on the base", alg_buckley);
        group_opt(s);
        s->add_option("--nmax", ws.n_max, "levels to compare (0 for all)");
    }

    auto* emb = app.add_subcommand("embed", "embeddings and extensions")->require_subcommand(1);
    file_opt(leaf(emb, "fiber-sum", "fiber sum of an abelian amalgam", emb_fiber_sum));
    file_opt(leaf(emb, "higman", "strong embedding of an amalgam into a p-group", emb_higman));
    file_opt(leaf(emb, "flag", "unipotent extension along a flag", emb_flag));
    file_opt(leaf(emb, "inner", "extension to inner automorphisms of a p-group", emb_inner));
    file_opt(leaf(emb, "mapping-torus", "action on the layers of the gamma^p series", emb_mapping_torus));

    auto* gog = app.add_subcommand("gog", "graphs of groups")->require_subcommand(1);
    auto gog_leaf = [&](const char* name, const char* help, Fn fn) {
        auto* s = leaf(gog, name, help, fn);
        file_opt(s);
        return s;
    };
    gog_leaf("normal-form", "normal form of a path", gog_nf)->add_option("--word,-w", ws.word, "path JSON or @file");
    {
        auto* s = gog_leaf("sample", "seeded random closed paths with normal forms", gog_sample);
        s->add_option("--count", ws.count);
        s->add_option("--length", ws.length);
    }
    for (auto [name, help, fn] : std::vector<std::tuple<const char*, const char*, Fn>>{
             {"quotient", "quotient by a level of a series", gog_quotient},
             {"cover", "common cover for a level of a series", gog_cover}}) {
        auto* s = gog_leaf(name, help, fn);
        s->add_option("--series", ws.series);
        s->add_option("--level", ws.level);
    }
    gog_leaf("sigma", "unfolding along extended automorphisms of the colimit", gog_sigma);
    gog_leaf("partial-ab", "partial abelianization", gog_partial_ab);
    gog_leaf("certify", "certify residually p", gog_certify);
    {
        auto* s = gog_leaf("unfold", "unfold along a map to a cyclic group", gog_unfold);
        s->add_option("--order", ws.order, "order of the cyclic group");
        s->add_option("--psi", ws.word, "values on the non-tree edges, JSON array");
    }
    {
        auto* s = gog_leaf("separate", "least level keeping a reduced path reduced", gog_separate);
        s->add_option("--word,-w", ws.word, "path JSON or @file");
        s->add_option("--series", ws.series);
    }
    gog_leaf("homology", "first homology against the fiber sum", gog_homology);

    auto* con = app.add_subcommand("congruence", "congruence subgroups and matrix groups")->require_subcommand(1);
    for (auto [name, help, fn] : std::vector<std::tuple<const char*, const char*, Fn>>{
             {"tower", "order of SL(2, Z/p^k) and its congruence subgroups", cong_tower},
             {"layers", "layers and commutators of the tower", cong_layers},
             {"powermap", "injectivity of the p-th power maps on layers", cong_powermap}})
        leaf(con, name, help, fn)->add_option("--pk", ws.pk, "p:k")->required();
    {
        auto* s = leaf(con, "utorder", "order of a unitriangular matrix", cong_utorder);
        s->add_option("--n", ws.n);
        s->add_option("--d", ws.d, "modulus p^d");
        s->add_option("--matrix", ws.matrix, "strictly upper triangular N, JSON")->required();
    }
    file_opt(leaf(con, "smith", "abelianization of a presentation", cong_smith));
    {
        auto* s = leaf(con, "matrixfilt", "congruence filtration of <[[1,x],[0,1]]>", cong_matrixfilt);
        s->add_option("--x", ws.x);
        s->add_option("--kmax", ws.k_max);
    }

    auto* ver = leaf(&app, "verify", "re-check a serialized certificate", verify_cmd);
    file_opt(ver);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    try {
        if (!chosen) throw Error("no command given");
        ws.caps();
        Result r = chosen(ws);
        std::ostringstream os;
        if (ws.report) render(r.body, "", os);
        else os << r.body.dump(2) << "\n";
        if (ws.out.empty()) {
            std::cout << os.str();
        } else {
            std::ofstream f(ws.out);
            if (!f) throw Error(ws.out + ": cannot write");
            f << os.str();
        }
        return r.code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return 1;
    }
}

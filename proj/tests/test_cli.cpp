#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "residuap/io.hpp"

using residuap::json;

namespace {

const std::string bin = RESIDUAP_BIN;
const std::string data = RESIDUAP_DATA;
const std::filesystem::path scratch = std::filesystem::temp_directory_path() / "residuap_cli_test";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// exit status of the command; stdout to out
int run(const std::string& args, const std::string& out = "", const std::string& env = "") {
    std::filesystem::create_directories(scratch);
    std::string target = out.empty() ? "/dev/null" : (scratch / out).string();
    std::string cmd = env + " " + bin + " " + args + " > " + target + " 2> /dev/null";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

json read(const std::string& out) { return json::parse(slurp(scratch / out)); }

void write(const std::string& name, const json& j) { std::ofstream(scratch / name) << j.dump(); }

std::string in(const char* f) { return data + "/" + f; }

}  // namespace

TEST_CASE("emitted certificates pass verify") {
    CHECK(run("gog certify --file " + in("c4-amalgam.json") + " --p 2", "c4.json") == 0);
    CHECK(read("c4.json")["target"]["order"] == 8);
    CHECK(run("verify --file " + (scratch / "c4.json").string()) == 0);

    CHECK(run("gog certify --file " + in("c2-free.json"), "free.json") == 0);
    CHECK(read("free.json")["target"]["order"] == 4);
    CHECK(run("verify --file " + (scratch / "free.json").string()) == 0);

    CHECK(run("gog certify --file " + in("shift-loop.json") + " --p 3", "shift.json") == 0);
    CHECK(run("verify --file " + (scratch / "shift.json").string()) == 0);

    CHECK(run("embed inner --file " + in("shift-f3.json"), "inner.json") == 0);
    CHECK(read("inner.json")["target"]["order"] == 81);
    CHECK(run("verify --file " + (scratch / "inner.json").string()) == 0);

    CHECK(run("embed flag --file " + in("shift-f3.json"), "flag.json") == 0);
    CHECK(run("verify --file " + (scratch / "flag.json").string()) == 0);

    CHECK(run("embed higman --file " + in("c4-amalgam-pair.json"), "higman.json") == 0);
    CHECK(read("higman.json")["W"]["order"] == 64);
    CHECK(run("verify --file " + (scratch / "higman.json").string()) == 0);

    CHECK(run("gog sigma --file " + in("swap-loop.json"), "sigma.json") == 0);
    write("sigma-cert.json", read("sigma.json")["certificate"]);
    CHECK(run("verify --file " + (scratch / "sigma-cert.json").string()) == 0);
}

TEST_CASE("tampered certificates are rejected") {
    REQUIRE(run("gog certify --file " + in("c4-amalgam.json") + " --p 2", "c4.json") == 0);
    auto j = read("c4.json");
    j["psi_v"][1][1] = 0;
    write("bad.json", j);
    CHECK(run("verify --file " + (scratch / "bad.json").string()) == 10);

    REQUIRE(run("embed inner --file " + in("shift-f3.json"), "inner.json") == 0);
    auto k = read("inner.json");
    k["conjugators"][0] = 0;
    write("bad2.json", k);
    CHECK(run("verify --file " + (scratch / "bad2.json").string()) == 10);
}

TEST_CASE("exit codes follow the outcome") {
    CHECK(run("embed flag --file " + in("swap-f3.json")) == 10);
    CHECK(run("embed inner --file " + in("swap-f3.json")) == 10);
    CHECK(run("embed flag --file " + in("transvections-f3.json")) == 10);
    CHECK(run("gog certify --file " + in("swap-loop.json") + " --p 3") == 10);
    CHECK(run("gog certify --file " + in("bad-edge.json") + " --p 2") == 1);
    CHECK(run("gog certify --file " + in("missing.json")) == 1);
    std::ofstream(scratch / "junk.json") << "{\"vertices\": [";
    CHECK(run("gog certify --file " + (scratch / "junk.json").string()) == 1);
    CHECK(run("gog certify --file " + in("c4-amalgam.json") + " --cap-order 0") == 1);
    CHECK(run("nonsense") == 1);
}

TEST_CASE("jennings series of C4 from the command line") {
    REQUIRE(run("algebra jennings --group catalog:C4 --p 2", "j.json") == 0);
    auto j = read("j.json");
    CHECK(j["orders"] == json::array({4, 2, 1}));
    CHECK(j["class"] == 3);
}

TEST_CASE("identical inputs and seed give identical bytes") {
    REQUIRE(run("gog sample --file " + in("c4-amalgam.json") + " --seed 17 --count 20", "s1.json") == 0);
    REQUIRE(run("gog sample --file " + in("c4-amalgam.json") + " --seed 17 --count 20", "s2.json") == 0);
    CHECK(slurp(scratch / "s1.json") == slurp(scratch / "s2.json"));
    REQUIRE(run("gog certify --file " + in("shift-loop.json"), "r1.json") == 0);
    REQUIRE(run("gog certify --file " + in("shift-loop.json"), "r2.json") == 0);
    CHECK(slurp(scratch / "r1.json") == slurp(scratch / "r2.json"));
}

TEST_CASE("catalog directory override") {
    auto dir = scratch / "catalog";
    std::filesystem::create_directories(dir);
    // C2 under another name
    std::ofstream(dir / "Twin.json") << R"({"order": 2, "mult": [[0, 1], [1, 0]]})";
    REQUIRE(run("group show --group catalog:Twin", "twin.json", "RESIDUAP_CATALOG=" + dir.string()) == 0);
    CHECK(read("twin.json")["order"] == 2);
    CHECK(run("group show --group catalog:Twin") == 1);
}

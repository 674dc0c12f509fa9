#include <catch2/catch_amalgamated.hpp>

#include "support/helpers.hpp"

#include <cstdio>
#include <cstdlib>

using namespace opaquer;
using Catch::Matchers::ContainsSubstring;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

// Runs the tool with stderr folded into stdout.
CliResult run_cli(const std::string& args) {
    const char* bin = std::getenv("OPAQUER_BIN");
    REQUIRE(bin != nullptr);
    std::string cmd = std::string(bin) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string model(const std::string& name) { return testsupport::models_dir() + "/" + name; }

std::string temp_file(const std::string& name, const std::string& content) {
    std::string path = std::string("cli_tmp_") + name;
    FILE* f = fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    fwrite(content.data(), 1, content.size(), f);
    fclose(f);
    return path;
}

}  // namespace

TEST_CASE("verify: modes, exit codes, and the verdict protocol") {
    auto local = run_cli("verify " + model("cso_shared_hidden.des") + " --mode local");
    CHECK(local.code == 3);
    CHECK_THAT(local.out, ContainsSubstring("'b'"));

    auto mono = run_cli("verify " + model("cso_shared_hidden.des") + " --mode monolithic");
    CHECK(mono.code == 1);
    CHECK_THAT(mono.out, ContainsSubstring("verdict: not-opaque"));
    CHECK_THAT(mono.out, ContainsSubstring("witness: a"));

    auto fallback = run_cli("verify " + model("cso_shared_hidden.des"));
    CHECK(fallback.code == 1);
    CHECK_THAT(fallback.out, ContainsSubstring("assumption1: violated b"));

    auto agents = run_cli("verify " + model("agents.des") + " --mode local");
    CHECK(agents.code == 0);
    CHECK_THAT(agents.out, ContainsSubstring("method: theorem2"));
    CHECK_THAT(agents.out, ContainsSubstring("certificate: j=1 i=1; j=2 i=2; j=3 i=3"));

    auto whole = run_cli("verify " + model("agents.des") + " --mode local --decompose whole");
    CHECK(whole.code == 2);
    CHECK_THAT(whole.out, ContainsSubstring("verdict: unknown"));

    auto single = run_cli("verify " + model("agents_single.des") + " --mode local");
    CHECK(single.code == 0);
    CHECK_THAT(single.out, ContainsSubstring("method: theorem1 i=1"));
    CHECK_THAT(single.out, ContainsSubstring("certificate: i=1"));

    auto iso = run_cli("verify " + model("agents_iso.des") + " --mode local --property iso");
    CHECK(iso.code == 0);
    CHECK_THAT(iso.out, ContainsSubstring("method: theorem4"));

    auto mismatch = run_cli("verify " + model("agents.des") + " --property iso");
    CHECK(mismatch.code == 3);
}

TEST_CASE("verify: witness-start policy is a flag") {
    // secret start shows a longer observation than its initial cover
    std::string text =
        "automaton A\nstates p q r x y z\ninitial p q\nalphabet e f\n"
        "trans p e x\ntrans x f y\ntrans q e z\ntrans r e x\nend\n"
        "system\ncomponent A\nobservable e f\nend\n"
        "secret iso\nstate p\nend\n";
    std::string path = temp_file("start.des", text);
    auto strict = run_cli("verify " + path + " --mode monolithic");
    CHECK(strict.code == 1);
    CHECK_THAT(strict.out, ContainsSubstring("witness: e f"));
    auto any = run_cli("verify " + path + " --mode monolithic --iso-witness-start any");
    CHECK(any.code == 0);
    std::remove(path.c_str());
}

TEST_CASE("check: reports the gate and exits accordingly") {
    auto ok = run_cli("check " + model("agents.des"));
    CHECK(ok.code == 0);
    CHECK_THAT(ok.out, ContainsSubstring("assumption1: ok"));

    auto bad = run_cli("check " + model("iso_shared_hidden.des"));
    CHECK(bad.code == 3);
    CHECK_THAT(bad.out, ContainsSubstring("assumption1: violated b"));
    CHECK_THAT(bad.out, ContainsSubstring("G1,G2"));
}

TEST_CASE("compose and observer write parseable automata") {
    auto composed = run_cli("compose " + model("cso_shared_hidden.des"));
    CHECK(composed.code == 0);
    ModelDocument doc = parse_model(composed.out);
    REQUIRE(doc.automata.size() == 1);
    CHECK(doc.automata[0].states().size() == 2);

    std::string out_path = "cli_tmp_obs.des";
    auto obs = run_cli("observer " + model("agents.des") + " --component Resource -o " + out_path);
    CHECK(obs.code == 0);
    ModelDocument obs_doc = parse_model(testsupport::read_file(out_path));
    REQUIRE(obs_doc.automata.size() == 1);
    CHECK(obs_doc.automata[0].states().size() == 4);
    std::remove(out_path.c_str());

    auto missing = run_cli("observer " + model("agents.des") + " --component Nope");
    CHECK(missing.code == 3);
}

TEST_CASE("lift: derives starts and prints the lifted word") {
    std::string alpha = temp_file("alpha.txt", "1request 1acquire\n");
    std::string alpha_i = temp_file("alpha_i.txt", "1acquire\n");
    auto r = run_cli("lift " + model("agents.des") + " --component 1 --alpha " + alpha +
                     " --alpha-i " + alpha_i);
    CHECK(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("start: 1idle,2idle,ready"));
    CHECK_THAT(r.out, ContainsSubstring("local-start: 1wait"));
    CHECK_THAT(r.out, ContainsSubstring("alpha-prime: 1acquire"));
    CHECK_THAT(r.out, ContainsSubstring("end: 1use,2idle,busy1"));

    auto by_name = run_cli("lift " + model("agents.des") + " --component Agent1 --alpha " + alpha +
                           " --alpha-i " + alpha_i);
    CHECK(by_name.code == 0);
    CHECK_THAT(by_name.out, ContainsSubstring("alpha-prime: 1acquire"));

    // observation mismatch is an input error
    std::string silent = temp_file("silent.txt", "");
    auto bad = run_cli("lift " + model("agents.des") + " --component 1 --alpha " + alpha +
                       " --alpha-i " + silent);
    CHECK(bad.code == 3);

    std::remove(alpha.c_str());
    std::remove(alpha_i.c_str());
    std::remove(silent.c_str());
}

TEST_CASE("bench: soundness runs and size measurement") {
    auto sound = run_cli("bench --seed 11 --trials 30 --property cso");
    CHECK(sound.code == 0);
    CHECK_THAT(sound.out, ContainsSubstring("verdict: opaque"));
    CHECK_THAT(sound.out, ContainsSubstring("method: bench-soundness"));
    CHECK_THAT(sound.out, ContainsSubstring("stat: trials 30"));

    std::string params = temp_file("params.txt", "min_components 2\nmax_components 2\n");
    auto sizes = run_cli("bench --seed 11 --trials 5 --measure-sizes --params " + params);
    CHECK(sizes.code == 0);
    CHECK_THAT(sizes.out, ContainsSubstring("method: bench-sizes"));
    CHECK_THAT(sizes.out, ContainsSubstring("stat: total-local-sum"));
    std::remove(params.c_str());

    std::string junk = temp_file("junk.txt", "bogus_key 1\n");
    auto bad = run_cli("bench --trials 2 --params " + junk);
    CHECK(bad.code == 3);
    std::remove(junk.c_str());
}

namespace {

// Same as run_cli but with an environment assignment up front.
CliResult run_cli_env(const std::string& env, const std::string& args) {
    const char* bin = std::getenv("OPAQUER_BIN");
    REQUIRE(bin != nullptr);
    std::string cmd = env + " " + std::string(bin) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace

TEST_CASE("the estimate cap comes from the environment") {
    auto capped = run_cli_env("OPAQUER_STATE_CAP=2",
                              "verify " + model("agents.des") + " --mode monolithic");
    CHECK(capped.code == 4);
    CHECK_THAT(capped.out, ContainsSubstring("error:"));

    auto garbage = run_cli_env("OPAQUER_STATE_CAP=garbage",
                               "verify " + model("agents.des") + " --mode monolithic");
    CHECK(garbage.code == 3);

    // check never builds estimates, so the cap does not matter there
    auto untouched = run_cli_env("OPAQUER_STATE_CAP=2", "check " + model("agents.des"));
    CHECK(untouched.code == 0);
}

TEST_CASE("bad invocations are input errors") {
    CHECK(run_cli("verify no_such_file.des").code == 3);
    CHECK(run_cli("verify").code == 3);
    CHECK(run_cli("frobnicate x").code == 3);
    CHECK(run_cli("verify " + model("agents.des") + " --mode sideways").code == 3);
}

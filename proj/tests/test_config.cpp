#include "mvsde/config.hpp"
#include "mvsde/error.hpp"

#include <doctest.h>

#include <string>

using namespace mvsde;

namespace {

std::string failing_key(const std::string& command, const KeyValues& kv) {
    try {
        (void)parse_config(command, kv);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

std::string failing_message(const KeyValues& kv) {
    try {
        (void)parse_config("simulate", kv);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("defaults") {
    const auto c = parse_config("simulate", {});
    CHECK(c.model_name == "linear");
    CHECK(c.a == -1.0);
    CHECK(c.c == 0.5);
    CHECK(c.sim.T == 1.0);
    CHECK(c.sim.dt == 0.01);
    CHECK(c.sim.N == 100);
    CHECK(c.sim.seed == 1);
    CHECK(c.init.kind == InitialKind::gaussian);
    CHECK(c.N_list == std::vector<std::size_t>{64, 128, 256, 512, 1024, 2048, 4096});
    CHECK(c.replicas == 20);
    CHECK(c.solver.lambda == -1.0);
    CHECK(c.solver.M == 10000);
    CHECK_FALSE(c.K_b.has_value());
    CHECK(c.values.size() == config_keys().size());
    CHECK(c.warnings.empty());
    CHECK(c.out_dir == "out");
}

TEST_CASE("key = value parsing") {
    const auto kv = parse_key_values("# comment\n\nsim.N = 7  \n  model.name=sqrt # trailing\n");
    REQUIRE(kv.size() == 2);
    CHECK(kv[0] == std::pair<std::string, std::string>{"sim.N", "7"});
    CHECK(kv[1] == std::pair<std::string, std::string>{"model.name", "sqrt"});

    CHECK_THROWS_AS((void)parse_key_values("sim.N 7\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_key_values("sim.X = 7\n"), ConfigError);
    try {
        (void)parse_key_values("sim.N = 1\nsim.N = 2\n", "f.cfg");
        FAIL("expected a duplicate key error");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "sim.N");
        CHECK(std::string(e.what()).find("f.cfg:2") != std::string::npos);
    }
}

TEST_CASE("errors name the offending key") {
    CHECK(failing_key("simulate", {{"sim.dt", "0.03"}}) == "sim.dt");
    CHECK(failing_key("simulate", {{"sim.dt", "-1"}}) == "sim.dt");
    CHECK(failing_key("simulate", {{"sim.T", "nan"}}) == "sim.T");
    CHECK(failing_key("simulate", {{"sim.N", "many"}}) == "sim.N");
    CHECK(failing_key("simulate", {{"sim.N", "0"}}) == "sim.N");
    CHECK(failing_key("simulate", {{"sim.N", "-3"}}) == "sim.N");
    CHECK(failing_key("simulate", {{"model.alpha", "0.4"}}) == "model.alpha");
    CHECK(failing_key("simulate", {{"model.p", "2"}}) == "model.p");
    CHECK(failing_key("simulate", {{"model.name", "cubic"}}) == "model.name");
    CHECK(failing_key("simulate", {{"model.K_B", "-1"}}) == "model.K_B");
    CHECK(failing_key("simulate", {{"init.sd", "-1"}}) == "init.sd");
    CHECK(failing_key("simulate", {{"init.law", "cauchy"}}) == "init.law");
    CHECK(failing_key("simulate", {{"chaos.N_list", "64,32"}}) == "chaos.N_list");
    CHECK(failing_key("simulate", {{"solver.common_noise", "maybe"}}) == "solver.common_noise");
    CHECK(failing_key("tv-study", {{"tv.times", "2"}}) == "tv.times");
    CHECK(failing_key("simulate", {{"tv.times", "2"}}).empty());
    CHECK(failing_key("simulate", {{"yamada.epsilon", "1.5"}}) == "yamada.epsilon");
    CHECK(failing_key("simulate", {{"output.format", "xml"}}) == "output.format");
    CHECK(failing_key("simulate", {{"bogus", "1"}}) == "bogus");
    CHECK(failing_key("fly", {}) == "command");
    CHECK(failing_key("simulate", {{"model.name", "delay"}, {"model.delay_location", "-0.5"}, {"sim.r", "0.25"}}) ==
          "model.delay_location");
}

TEST_CASE("alpha message states the admissible range") {
    const auto msg = failing_message({{"model.alpha", "0.4"}});
    CHECK(msg.find("model.alpha") != std::string::npos);
    CHECK(msg.find("[1/2, 1]") != std::string::npos);
}

TEST_CASE("overrides win over the file and constants reach the model") {
    const auto c = parse_config("simulate", {{"sim.N", "5"}, {"model.K_b", "2"}}, {{"sim.N", "9"}});
    CHECK(c.sim.N == 9);
    REQUIRE(c.K_b.has_value());
    CHECK(build_model(c).constants.K_b == 2.0);
}

TEST_CASE("delay model sizes the history window and reports snapping") {
    const auto c = parse_config("simulate", {{"model.name", "delay"}, {"model.delay_location", "-0.5"}});
    CHECK(c.sim.r == 0.5);
    CHECK(c.warnings.empty());
    const auto s = parse_config("simulate", {{"model.name", "delay"},
                                             {"model.delay_location", "-0.503"},
                                             {"sim.r", "0.6"}});
    REQUIRE(s.warnings.size() == 1);
    CHECK(s.warnings[0].find("model.delay_location") != std::string::npos);
}

TEST_CASE("manifest round trip") {
    const auto c = parse_config("chaos-rate", {{"model.name", "sqrt"}, {"sim.N", "12"}, {"chaos.N_list", "8,16,32"}},
                                {{"seed", "77"}, {"out", "somewhere"}});
    const std::string text = manifest_text(c);
    CHECK(text.rfind("# mvsde ", 0) == 0);
    CHECK(text.find("# command: chaos-rate\n") != std::string::npos);
    CHECK(text.find("out =") == std::string::npos);
    const auto back = parse_config("chaos-rate", parse_key_values(text));
    CHECK(manifest_text(back) == text);
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        if (c.values[i].first == "out" || c.values[i].first == "threads") continue;
        CHECK(back.values[i] == c.values[i]);
    }
}

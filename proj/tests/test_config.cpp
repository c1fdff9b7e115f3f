#include <doctest.h>

#include "rlbd/config.hpp"

using namespace rlbd;

TEST_CASE("defaults parse and validate") {
    ExperimentConfig cfg = ExperimentConfig::from_json(nlohmann::json::object());
    CHECK(cfg.env_kind == "cartpole");
    CHECK(cfg.dqn.gamma == doctest::Approx(0.99));
    CHECK(cfg.attack.core.rho.rho0 == doctest::Approx(20.0));
    CHECK(cfg.attack.core.alpha == doctest::Approx(1e-4));
    CHECK(cfg.attack.core.beta == doctest::Approx(1e-5));
}

TEST_CASE("unknown keys are rejected with their path") {
    nlohmann::json j{{"dqn", {{"batch_sizes", 32}}}};
    try {
        ExperimentConfig::from_json(j);
        FAIL("expected a parse error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("dqn.batch_sizes") != std::string::npos);
    }
}

TEST_CASE("field validation names bad values") {
    nlohmann::json j{{"dqn", {{"gamma", 1.5}}}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);

    nlohmann::json j2{{"attack", {{"epsilon", -1.0}}}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j2), std::invalid_argument);
}

TEST_CASE("round trip preserves the config hash") {
    ExperimentConfig cfg = ExperimentConfig::from_json(nlohmann::json::object());
    ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(cfg.config_hash() == back.config_hash());

    back.dqn.batch_size = 32;
    CHECK(cfg.config_hash() != back.config_hash());
}

TEST_CASE("nested sections round-trip") {
    nlohmann::json j{{"name", "test"},
                     {"env", {{"kind", "chain"}, {"chain_n_states", 3}}},
                     {"attack", {{"epsilon", 4.0}, {"rho", {{"rho0", 50.0}}}}},
                     {"run", {{"seeds", {7, 8}}}}};
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    CHECK(cfg.name == "test");
    CHECK(cfg.env_kind == "chain");
    CHECK(cfg.chain_n_states == 3);
    CHECK(cfg.attack.core.epsilon == doctest::Approx(4.0));
    CHECK(cfg.attack.core.rho.rho0 == doctest::Approx(50.0));
    CHECK(cfg.seeds == std::vector<std::uint64_t>{7, 8});
}

#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "ospfock/suites.hpp"

using namespace ospfock;

namespace {

RunConfig seeded_config() {
    RunConfig cfg;
    cfg.seed = 42;
    cfg.seed_set = true;
    return cfg;
}

}  // namespace

TEST_SUITE("suites") {

TEST_CASE("suite names are sorted and classified") {
    const auto& names = all_suite_names();
    CHECK(names.size() == 5);
    CHECK(std::is_sorted(names.begin(), names.end()));
    CHECK(suite_needs_interior("oscillator"));
    CHECK(suite_needs_interior("series"));
    CHECK(suite_needs_interior("restriction"));
    CHECK_FALSE(suite_needs_interior("algebra"));
    CHECK_FALSE(suite_needs_interior("counterexamples"));
}

TEST_CASE("empty selection expands to all suites") {
    RunConfig cfg = seeded_config();
    CHECK(selected_suites(cfg) == all_suite_names());
    cfg.suites = {"series", "algebra"};
    CHECK(selected_suites(cfg) == std::vector<std::string>{"series", "algebra"});
}

TEST_CASE("validation rejects bad selections and truncations") {
    RunConfig cfg = seeded_config();
    CHECK_NOTHROW(validate_config(cfg));

    SUBCASE("unknown suite") {
        cfg.suites = {"algebra", "nonsense"};
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    }
    SUBCASE("duplicate suite") {
        cfg.suites = {"algebra", "algebra"};
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    }
    SUBCASE("identity suites need an interior") {
        cfg.degree_cap = 4;
        try {
            validate_config(cfg);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("no safe interior") !=
                  std::string::npos);
        }
        cfg.degree_cap = 5;
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
        // Suites without interior comparisons accept a shallow cap.
        cfg.suites = {"algebra", "counterexamples"};
        cfg.degree_cap = 4;
        CHECK_NOTHROW(validate_config(cfg));
    }
    SUBCASE("seed is mandatory") {
        cfg.seed_set = false;
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    }
    SUBCASE("modes must be positive") {
        cfg.fermionic_modes = 0;
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    }
    SUBCASE("formats are checked") {
        cfg.formats = {"xml"};
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
        cfg.formats = {"json", "json"};
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
        cfg.formats = {};
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    }
    SUBCASE("output dir must be set") {
        cfg.output_dir = "";
        CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    }
}

TEST_CASE("json config parsing is strict and tracks the seed") {
    const RunConfig cfg = parse_config_json(R"({
        "fermionic_modes": 3,
        "bosonic_modes": 1,
        "degree_cap": 10,
        "seed": 99,
        "suites": ["algebra"],
        "output_dir": "out",
        "formats": ["json"],
        "tolerances": {"conjugacy": 5e-7}
    })");
    CHECK(cfg.fermionic_modes == 3);
    CHECK(cfg.bosonic_modes == 1);
    CHECK(cfg.degree_cap == 10);
    CHECK(cfg.seed == 99);
    CHECK(cfg.seed_set);
    CHECK(cfg.suites == std::vector<std::string>{"algebra"});
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.formats == std::vector<std::string>{"json"});
    CHECK(cfg.tolerances.conjugacy == 5e-7);
    // Untouched tolerances keep their pinned defaults.
    CHECK(cfg.tolerances.hermiticity == 1e-10);

    CHECK_FALSE(parse_config_json("{}").seed_set);
    CHECK_THROWS_AS(parse_config_json("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("[1,2]"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"unknown_key": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"seed": -4})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"degree_cap": "8"})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"suites": [1]})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"tolerances": {"bogus": 1}})"),
                    ConfigError);
}

TEST_CASE("config hash covers the mathematical content only") {
    RunConfig a = seeded_config();
    RunConfig b = a;
    CHECK(config_hash(a) == config_hash(b));

    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));  // location is not content
    b.formats = {"json"};
    CHECK(config_hash(a) == config_hash(b));  // rendering is not content

    b = a;
    b.seed = 43;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.degree_cap = 10;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.tolerances.conjugacy = 2e-7;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.suites = {"algebra"};
    CHECK(config_hash(a) != config_hash(b));

    // Selection order does not change the canonical form.
    RunConfig c = a, d = a;
    c.suites = {"algebra", "series"};
    d.suites = {"series", "algebra"};
    CHECK(config_hash(c) == config_hash(d));
}

TEST_CASE("generator table has the documented names and parities") {
    const TruncatedSpace one(2, 2);
    const auto table = generator_table(one, 42);
    REQUIRE(table.size() == 9);
    CHECK(table[0].first == "central");
    CHECK(table[0].second.z == 1.0);
    CHECK(osp_norm(table[0].second.body) == 0.0);
    CHECK(table[1].first == "uniform-rotation");
    CHECK(table[1].second.body.parity == Parity::even);
    CHECK(table[1].second.z == 0.0);
    for (const auto& [name, gen] : table) {
        CAPTURE(name);
        CHECK(gen.body.certified());
        if (name.rfind("odd", 0) == 0 || name == "random-odd") {
            CHECK(gen.body.parity == Parity::odd);
        } else {
            CHECK(gen.body.parity == Parity::even);
        }
    }

    // Deterministic given (space, seed); seed moves only the random entries.
    const auto again = generator_table(one, 42);
    const auto other = generator_table(one, 43);
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(osp_norm(table[i].second.body - again[i].second.body) == 0.0);
        if (table[i].first.rfind("random-", 0) == 0) {
            CHECK(osp_norm(table[i].second.body - other[i].second.body) > 0.0);
        } else {
            CHECK(osp_norm(table[i].second.body - other[i].second.body) == 0.0);
        }
    }

    CHECK_NOTHROW(find_generator(one, 42, "even-1"));
    CHECK_THROWS_AS(find_generator(one, 42, "even-99"), ConfigError);
}

TEST_CASE("fast suites pass at the reference config") {
    const RunConfig cfg = seeded_config();
    for (const char* name : {"algebra", "counterexamples", "restriction"}) {
        CAPTURE(name);
        const SuiteResult result = run_suite(name, cfg);
        CHECK(result.name == name);
        CHECK(result.passed());
        CHECK(result.reports.size() >= 3);
    }
    CHECK_THROWS_AS(run_suite("nonsense", cfg), ConfigError);
}

TEST_CASE("records and tables render deterministically") {
    const RunConfig cfg = seeded_config();
    const SuiteResult a = run_suite("counterexamples", cfg);
    const SuiteResult b = run_suite("counterexamples", cfg);
    REQUIRE(a.reports.size() == b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
        CHECK(report_line(a.name, a.reports[i]) ==
              report_line(b.name, b.reports[i]));
    }
    REQUIRE(a.tables.size() == 2);
    REQUIRE(b.tables.size() == 2);
    for (std::size_t i = 0; i < a.tables.size(); ++i) {
        CHECK(csv_text(a.tables[i]) == csv_text(b.tables[i]));
    }
    const auto& moments = a.tables.front().name == "counterexamples-divergence"
                              ? a.tables.back()
                              : a.tables.front();
    CHECK(moments.header ==
          std::vector<std::string>{"n", "computed", "closed_form",
                                   "relative_error"});
    CHECK(moments.rows.size() == 9);
}

}  // TEST_SUITE("suites")

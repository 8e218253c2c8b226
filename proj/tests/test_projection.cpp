#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "orbsde/projection.hpp"
#include "orbsde/rng.hpp"
#include "test_helpers.hpp"

using namespace orbsde;

namespace {
CostMatrix unit_costs(int d) {
    CostMatrix C(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) C.at(i, j) = 1.0;
    return C;
}
}  // namespace

TEST_CASE("membership by direct max evaluation") {
    CostMatrix C = unit_costs(2);
    CHECK(in_domain(C, std::vector<double>{0.0, 0.5}, 0.0));
    CHECK_FALSE(in_domain(C, std::vector<double>{0.0, 2.0}, 0.0));
    CHECK(in_domain(C, std::vector<double>{3.3, 3.3}, 0.0));
    CHECK_THROWS_AS(in_domain(C, std::vector<double>{1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(in_domain(C, std::vector<double>{0.0, 0.0}, -1.0), std::invalid_argument);
}

TEST_CASE("projection examples") {
    CostMatrix C = unit_costs(2);
    auto p = project(C, std::vector<double>{3.0, 0.0});
    CHECK(p[0] == 3.0);
    CHECK(p[1] == 2.0);

    std::vector<double> inside{0.0, 0.5};
    auto q = project(C, inside);
    CHECK(q == inside);
    CHECK_THROWS_AS(project(C, std::vector<double>{1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("best alternative breaks ties at the smallest index") {
    CostMatrix C = unit_costs(3);
    double y[3] = {0.0, 1.0, 1.0};  // modes 2 and 3 tie as targets from mode 1
    SwitchTarget t = best_alternative(3, C.c.data(), y, 0);
    CHECK(t.mode == 1);
    CHECK(t.value == doctest::Approx(0.0));
    SwitchTarget none = best_alternative(1, C.c.data(), y, 0);
    CHECK(none.mode == -1);
}

TEST_CASE("structure condition checks") {
    CostMatrix good = unit_costs(3);
    CHECK(check_structure(good, 1e-8).pass());

    CostMatrix bad = unit_costs(3);
    bad.at(0, 2) = 3.0;  // 1 + 1 - 3 < 0 breaks the (1,2,3) margin
    ValidationReport rep = check_structure(bad, 1e-8);
    CHECK_FALSE(rep.pass());
    bool found = false;
    for (const Violation& v : rep.violations)
        if (v.indices == std::vector<int>{1, 2, 3}) found = true;
    CHECK(found);

    CHECK(check_structure(unit_costs(2), 1e-8).pass());
}

TEST_CASE("random structural instances: dominance, membership, idempotence, monotone, "
          "1-Lipschitz") {
    int trial = 0;
    for (int d : {2, 3, 5}) {
        for (int rep = 0; rep < 400; ++rep, ++trial) {
            CostMatrix C = orbsde::testing::random_structural_matrix(d, 7, trial);
            REQUIRE(check_structure(C, 0.05).pass());
            std::vector<double> y(d), y2(d);
            for (int j = 0; j < d; ++j) {
                y[j] = 6.0 * uniform_draw(11, trial, j, 0) - 3.0;
                y2[j] = y[j] + 2.0 * uniform_draw(11, trial, j, 1) - 1.0;
            }
            auto p = project(C, y);
            for (int j = 0; j < d; ++j) CHECK(p[j] >= y[j]);  // exact dominance
            CHECK(in_domain(C, p, 1e-10));
            auto pp = project(C, p);
            for (int j = 0; j < d; ++j) CHECK(std::abs(pp[j] - p[j]) <= 1e-12);

            // monotone on ordered pairs
            std::vector<double> yup(y);
            for (int j = 0; j < d; ++j) yup[j] += uniform_draw(13, trial, j, 2);
            auto pu = project(C, yup);
            for (int j = 0; j < d; ++j) CHECK(pu[j] >= p[j]);

            // 1-Lipschitz in sup norm
            auto p2 = project(C, y2);
            double dy = 0.0, dp = 0.0;
            for (int j = 0; j < d; ++j) {
                dy = std::max(dy, std::abs(y[j] - y2[j]));
                dp = std::max(dp, std::abs(p[j] - p2[j]));
            }
            CHECK(dp <= dy + 1e-15);
        }
    }
}

TEST_CASE("fixed point characterization") {
    for (int trial = 0; trial < 200; ++trial) {
        CostMatrix C = orbsde::testing::random_structural_matrix(3, 21, trial);
        std::vector<double> y(3);
        for (int j = 0; j < 3; ++j) y[j] = 4.0 * uniform_draw(23, trial, j, 0) - 2.0;
        auto p = project(C, y);
        const bool fixed = std::equal(p.begin(), p.end(), y.begin());
        CHECK(fixed == in_domain(C, y, 0.0));
    }
}

// Analytic machinery: singular-kernel Gronwall bound, Picard oracle, and the
// compensated-exponential jump-kernel moment g.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "shelab/gfunction.hpp"
#include "shelab/gronwall.hpp"
#include "shelab/harness.hpp"

using namespace shelab;

TEST_CASE("gronwall unrolling depth per singularity strength") {
    // depth k is the first with e_k = k(1-gamma) - gamma > 0
    REQUIRE(gronwall_bound(1.0, 0.3, 1.0).k == 1);
    REQUIRE(gronwall_bound(1.0, 0.6, 1.0).k == 2);
    REQUIRE(gronwall_bound(1.0, 0.9, 1.0).k == 10);
    for (double gamma : {0.3, 0.6, 0.9}) {
        const GronwallBound g = gronwall_bound(2.0, gamma, 1.0);
        REQUIRE(g.e_k == Catch::Approx(g.k * (1.0 - gamma) - gamma).margin(1e-14));
        REQUIRE(g.e_k > 0.0);
        REQUIRE(g.poly.size() == static_cast<std::size_t>(g.k) + 1);
        REQUIRE(g.poly[0].first == 2.0);
        REQUIRE(g.poly[0].second == 0.0);
    }
}

TEST_CASE("gronwall closed form at gamma one half") {
    // c = 1, gamma = 1/2: c_2(t) = 1 + 2 sqrt(t) + pi t, c'_2 = 2 pi, e_2 = 1/2,
    // so log bound(1/4) on T = 1/4 is log(2 + pi/4) + pi/4.
    const GronwallBound g = gronwall_bound(1.0, 0.5, 0.25);
    const double pi = std::numbers::pi;
    REQUIRE(g.k == 2);
    REQUIRE(g.resolvent_coef == Catch::Approx(2.0 * pi).epsilon(1e-13));
    REQUIRE(g.log_bound(0.25) == Catch::Approx(std::log(2.0 + pi / 4.0) + pi / 4.0).epsilon(1e-13));
    REQUIRE(g.log_bound(0.0) == Catch::Approx(std::log(1.0)).margin(1e-14));
    REQUIRE_THROWS_AS(g.log_bound(-0.01), std::invalid_argument);
    REQUIRE_THROWS_AS(g.log_bound(0.26), std::invalid_argument);
}

TEST_CASE("gronwall bound dominates the picard extremal solution") {
    const int nodes = 200;
    for (double gamma : {0.3, 0.6}) {
        for (double c : {0.5, 2.0}) {
            const double T = 0.5;
            const GronwallBound g = gronwall_bound(c, gamma, T);
            const std::vector<double> f = picard_extremal_solution(c, gamma, T, nodes, 60);
            for (int i = 0; i <= nodes; ++i) {
                const double t = T * i / nodes;
                REQUIRE(g.log_bound(t) >=
                        std::log(f[static_cast<std::size_t>(i)]) - 1e-9);
            }
        }
    }
}

TEST_CASE("gronwall bound stays finite in log space near gamma = 1") {
    const GronwallBound g = gronwall_bound(2.0, 0.9, 1.0);
    REQUIRE(std::isfinite(g.log_bound(1.0)));
    REQUIRE(g.log_bound(1.0) > 1e10);  // the bound itself is astronomically large
    REQUIRE(g.bound(1.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("picard iterates increase and the grid converges") {
    const double c = 1.0, gamma = 0.5, T = 0.5;
    const std::vector<double> few = picard_extremal_solution(c, gamma, T, 100, 5);
    const std::vector<double> many = picard_extremal_solution(c, gamma, T, 100, 50);
    for (std::size_t i = 0; i < few.size(); ++i) {
        REQUIRE(many[i] >= few[i] - 1e-12);
        REQUIRE(few[i] >= c);
    }
    // iteration has converged: one more pass changes nothing visible
    const std::vector<double> more = picard_extremal_solution(c, gamma, T, 100, 51);
    REQUIRE(std::fabs(more.back() - many.back()) < 1e-10 * many.back());
    // refining the grid moves the endpoint value by little
    const std::vector<double> coarse = picard_extremal_solution(c, gamma, T, 100, 50);
    const std::vector<double> fine = picard_extremal_solution(c, gamma, T, 200, 50);
    REQUIRE(std::fabs(fine.back() - coarse.back()) < 1e-3 * coarse.back());
}

TEST_CASE("gronwall argument validation") {
    REQUIRE_THROWS_AS(gronwall_bound(0.0, 0.5, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(gronwall_bound(1.0, 0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(gronwall_bound(1.0, 1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(gronwall_bound(1.0, 0.5, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(picard_extremal_solution(1.0, 0.5, 1.0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(picard_extremal_solution(1.0, 0.5, 1.0, 100, 0), std::invalid_argument);
}

TEST_CASE("gronwall suite runner passes at reduced scale") {
    const std::vector<double> gammas{0.3, 0.6, 0.9};
    const std::vector<double> cs{0.5, 1.0, 2.0};
    const GronwallReport rep = run_gronwall_suite(gammas, cs, 1.0, 20);
    REQUIRE(rep.rows.size() == 9);
    REQUIRE(rep.pass);
    for (const auto& r : rep.rows) {
        REQUIRE(r.min_log_margin >= -1e-9);
        REQUIRE(r.depth >= 1);
    }
}

TEST_CASE("jump-kernel moment g against independent quadrature oracles") {
    REQUIRE(g_function(1.0, 1.0, 1.2) ==
            Catch::Approx(0.54535384303075952).epsilon(1e-12));
    REQUIRE(g_function(0.0625, 1.0, 1.2) ==
            Catch::Approx(0.067388291927979940).epsilon(1e-12));
    REQUIRE(g_function(0.0625, 2.5, 1.2) ==
            Catch::Approx(0.41547536787828410).epsilon(1e-12));
    REQUIRE(g_function(1.0, 0.3, 1.5) ==
            Catch::Approx(0.087129431639402031).epsilon(1e-12));
    REQUIRE(g_function(0.25, 1.7, 1.35) ==
            Catch::Approx(0.85560198798807456).epsilon(1e-12));
}

TEST_CASE("g is increasing in both arguments and vanishes at y = 0") {
    const double ab = 1.2;
    REQUIRE(g_function(0.5, 0.0, ab) == 0.0);
    double prev = 0.0;
    for (double r : {0.01, 0.1, 0.5, 1.0, 4.0}) {
        const double v = g_function(r, 1.3, ab);
        REQUIRE(v > prev);
        prev = v;
    }
    prev = 0.0;
    for (double y : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        const double v = g_function(1.0, y, ab);
        REQUIRE(v > prev);
        prev = v;
    }
    REQUIRE_THROWS_AS(g_function(0.0, 1.0, ab), std::invalid_argument);
    REQUIRE_THROWS_AS(g_function(1.0, -1.0, ab), std::invalid_argument);
    REQUIRE_THROWS_AS(g_function(1.0, 1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(g_function(1.0, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("g has the quadratic small-y asymptote") {
    const double ab = 1.2, r = 1.0, y = 1e-4;
    const double asymptote = 0.5 * y * y * std::pow(r, 2.0 - ab) / (2.0 - ab);
    REQUIRE(g_function(r, y, ab) == Catch::Approx(asymptote).epsilon(1e-3));
}

TEST_CASE("closed-form envelope dominates g(1/n, y)") {
    const double alpha = 1.5, beta = 0.8;
    for (double n : {1.0, 4.0, 64.0, 1024.0}) {
        for (double y : {0.1, 1.0, 10.0}) {
            REQUIRE(g_function(1.0 / n, y, alpha * beta) <=
                    g_function_envelope(n, y, alpha, beta));
        }
    }
    REQUIRE_THROWS_AS(g_function_envelope(0.5, 1.0, alpha, beta), std::invalid_argument);
}

TEST_CASE("compensated exponential kernel is smooth across the series switch") {
    REQUIRE(detail::compensated_exp_over_x2(0.0) == 0.5);
    // G' ~ -1/6 near zero, so the genuine change across this 2e-9 window is
    // about 3.3e-10; anything much beyond that would be a branch mismatch.
    const double below = detail::compensated_exp_over_x2(0.99999e-4);
    const double above = detail::compensated_exp_over_x2(1.00001e-4);
    REQUIRE(std::fabs(above - below) < 1e-9);
    // direct formula agrees with the series deep inside its region
    const double x = 5e-5;
    const double direct = (std::expm1(-x) + x) / (x * x);
    REQUIRE(detail::compensated_exp_over_x2(x) == Catch::Approx(direct).epsilon(1e-9));
}

#include "qpeer/distributions.hpp"
#include "qpeer/error.hpp"
#include "qpeer/inversion.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace qpeer;
using cd = std::complex<double>;

namespace {

std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

} // namespace

TEST_CASE("density inversion of closed forms")
{
    CHECK(invert_density([](cd s) { return 1.0 / (1.0 + s); }, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    CHECK(invert_density([](cd s) { return 1.0 / ((s + 1.0) * (s + 1.0)); }, 2.0) ==
          doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-6));
    const HyperExp h({{0.5, 1.0}, {0.5, 2.0}});
    CHECK(invert_density([&](cd s) { return h.transform(s); }, 0.5) ==
          doctest::Approx(0.5 * std::exp(-0.5) + std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("cdf inversion of closed forms")
{
    CHECK(invert_cdf([](cd s) { return 1.0 / (1.0 + s); }, std::log(2.0)) ==
          doctest::Approx(0.5).epsilon(1e-6));
    CHECK(invert_cdf([](cd s) { return 1.0 / (1.0 + s); }, 60.0) == doctest::Approx(1.0).epsilon(1e-8));
    const double rho = 0.5, mu = 1.0, lambda = 0.5;
    auto mm1 = [&](cd s) { return (1.0 - rho) * (s + mu) / (s + mu - lambda); };
    CHECK(invert_cdf(mm1, 2.0 * std::log(2.0)) == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(invert_cdf(mm1, 0.0, {}, 1.0 - rho) == 0.5);
    // Without a supplied atom the limit at infinity is used.
    CHECK(invert_cdf(mm1, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("round trip on hyper-exponential densities")
{
    for (const HyperExp& h : {HyperExp({{0.3, 0.2}, {0.7, 5.0}}),
                              HyperExp({{0.9, 1.0}, {0.09, 0.1}, {0.01, 0.01}})}) {
        for (double t : log_grid(0.05, 50.0, 20)) {
            CAPTURE(t);
            CHECK(invert_density([&](cd s) { return h.transform(s); }, t) ==
                  doctest::Approx(h.pdf(t)).epsilon(1e-6));
        }
    }
}

TEST_CASE("cdf inversion is bounded and non-decreasing")
{
    const HyperExp h({{0.9, 1.0}, {0.1, 0.01}});
    double prev = 0.0;
    for (double t : log_grid(1e-3, 1e4, 40)) {
        const double v = invert_cdf([&](cd s) { return h.transform(s); }, t);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v >= prev - 1e-8);
        prev = v;
    }
}

TEST_CASE("doubling the series length is self-consistent")
{
    const HyperExp h({{0.3, 0.2}, {0.7, 5.0}});
    InversionParams wide;
    wide.terms = 66;
    for (double t : log_grid(0.05, 50.0, 10)) {
        const double a = invert_cdf([&](cd s) { return h.transform(s); }, t);
        const double b = invert_cdf([&](cd s) { return h.transform(s); }, t, wide);
        CHECK(std::abs(a - b) <= 1e-8);
    }
}

TEST_CASE("inversion errors")
{
    auto exp1 = [](cd s) { return 1.0 / (1.0 + s); };
    CHECK_THROWS_AS(invert_density(exp1, 0.0), DomainError);
    CHECK_THROWS_AS(invert_density(exp1, -1.0), DomainError);
    CHECK_THROWS_AS(invert_cdf(exp1, -1.0), DomainError);
    InversionParams bad;
    bad.euler_depth = 40;
    CHECK_THROWS_AS(invert_density(exp1, 1.0, bad), DomainError);
    bad = {};
    bad.precision_target = 0.0;
    CHECK_THROWS_AS(invert_density(exp1, 1.0, bad), DomainError);
    auto broken = [](cd) { return cd(std::numeric_limits<double>::quiet_NaN(), 0.0); };
    try {
        invert_density(broken, 1.0);
        FAIL("expected InversionError");
    } catch (const InversionError& e) {
        CHECK(e.t() == 1.0);
    }
}

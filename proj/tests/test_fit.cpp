#include "qpeer/distributions.hpp"
#include "qpeer/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace qpeer;

TEST_CASE("fit keeps both moments and the tail of the reference laws")
{
    for (const BoundedPareto bp : {BoundedPareto(1.5, 1010.15, 1e10), BoundedPareto(2.0, 1500.23, 1e10)}) {
        CAPTURE(bp.alpha());
        const FitOptions opts;
        const HyperExp h = fit_hyperexp(bp, opts);
        CHECK(h.size() <= static_cast<std::size_t>(opts.phases));
        CHECK(h.moment(1) == doctest::Approx(bp.moment(1)).epsilon(1e-3));
        CHECK(h.moment(2) == doctest::Approx(bp.moment(2)).epsilon(1e-3));
        const FitQuality q = fit_quality(bp, h, opts);
        CHECK(q.tail_rel_err <= opts.tail_tolerance);
        // Independent check of the tail at a few points inside the checkpoint range.
        for (double x : {10.5 * bp.k(), 100.0 * bp.k(), 1e4 * bp.k(), 1e5 * bp.k(), bp.p() / 10.5}) {
            CAPTURE(x);
            CHECK(std::abs(h.ccdf(x) / bp.ccdf(x) - 1.0) <= opts.tail_tolerance);
        }
        double sum = 0.0;
        for (const auto& ph : h.phases()) {
            CHECK(ph.weight > 0.0);
            CHECK(ph.rate > 0.0);
            sum += ph.weight;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("fit is deterministic")
{
    const BoundedPareto bp(1.5, 1010.15, 1e10);
    const HyperExp a = fit_hyperexp(bp);
    const HyperExp b = fit_hyperexp(bp);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.phases()[i].weight == b.phases()[i].weight);
        CHECK(a.phases()[i].rate == b.phases()[i].rate);
    }
}

TEST_CASE("fit reports its residuals when the contract cannot be met")
{
    FitOptions opts;
    opts.phases = 3;
    try {
        fit_hyperexp(BoundedPareto(1.5, 1010.15, 1e10), opts);
        FAIL("expected FitError");
    } catch (const FitError& e) {
        CHECK(e.tail_rel_err() > opts.tail_tolerance);
    }
    opts.phases = 1;
    CHECK_THROWS_AS(fit_hyperexp(BoundedPareto(1.5, 1010.15, 1e10), opts), DomainError);
}

TEST_CASE("fit quality of an exact mixture")
{
    const BoundedPareto bp(1.5, 1, 1e4);
    const HyperExp h = fit_hyperexp(bp);
    const FitQuality q = fit_quality(bp, h);
    CHECK(q.mean_rel_err < 1e-3);
    CHECK(q.second_rel_err < 1e-3);
}

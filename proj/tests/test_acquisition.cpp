#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tep/acquisition.hpp"
#include "tep/errors.hpp"
#include "tep/stats.hpp"

using namespace tep;

namespace {

LabeledFrame one_column(const std::vector<double>& values) {
    return testutil::make_frame({"v01"}, {values}, std::vector<int>(values.size(), 0));
}

// Shared by the unit suite and the acceptance binary: runs `trials`
// randomized series/baseline pairs through the full contract and counts
// violations.
struct PropertyOutcome {
    std::size_t violations = 0;
    std::size_t trials = 0;
};

PropertyOutcome run_compression_properties(std::uint64_t seed, std::size_t trials) {
    PropertyOutcome outcome;
    SplitRng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        outcome.trials++;
        const std::size_t n = static_cast<std::size_t>(rng.next_int(20, 120));
        std::vector<double> fit(n), series(n);
        for (double& v : fit) v = 10.0 * rng.next_double() - 5.0;
        for (double& v : series) v = 14.0 * rng.next_double() - 7.0;
        const double coverage = 0.5 + 0.5 * rng.next_double();

        const BaselineModel baseline = fit_baseline(one_column(fit), coverage);
        const VariableBaseline& vb = baseline.stats[0];
        bool ok = vb.lower <= vb.mean && vb.mean <= vb.upper;

        const EventStream events = compress_series(series, baseline, 0);
        // Events are exactly the out-of-margin indices, in order.
        std::size_t e = 0;
        for (std::size_t k = 0; k < n && ok; ++k) {
            const bool outside = series[k] < vb.lower || series[k] > vb.upper;
            if (outside) {
                ok = e < events.events.size() && events.events[e].index == k &&
                     events.events[e].value == series[k];
                ++e;
            }
        }
        ok = ok && e == events.events.size();

        // Reconstruction error bound at silent indices.
        const std::vector<double> rebuilt = reconstruct_series(events, baseline);
        const double bound = std::max(vb.upper - vb.mean, vb.mean - vb.lower);
        e = 0;
        for (std::size_t k = 0; k < n && ok; ++k) {
            if (e < events.events.size() && events.events[e].index == k) {
                ok = rebuilt[k] == series[k];
                ++e;
            } else {
                ok = std::abs(rebuilt[k] - series[k]) <= bound;
            }
        }

        // Idempotence: compressing the reconstruction transmits the same events.
        const EventStream again = compress_series(rebuilt, baseline, 0);
        ok = ok && again.events.size() == events.events.size();
        for (std::size_t i = 0; ok && i < events.events.size(); ++i)
            ok = again.events[i].index == events.events[i].index &&
                 again.events[i].value == events.events[i].value;

        const double rate = compression_rate(events);
        ok = ok && rate >= 0.0 && rate <= 1.0;

        if (!ok) outcome.violations++;
    }
    return outcome;
}

}  // namespace

TEST_SUITE_BEGIN("acquisition");

TEST_CASE("baseline quantile margins on 1..100") {
    std::vector<double> values(100);
    for (std::size_t i = 0; i < 100; ++i) values[i] = static_cast<double>(i + 1);
    const BaselineModel model = fit_baseline(one_column(values), 0.9);
    CHECK(model.stats[0].mean == doctest::Approx(50.5));
    CHECK(model.stats[0].lower == doctest::Approx(5.95).epsilon(1e-12));
    CHECK(model.stats[0].upper == doctest::Approx(95.05).epsilon(1e-12));
}

TEST_CASE("baseline degenerate cases") {
    SUBCASE("constant column collapses to a point") {
        const BaselineModel model = fit_baseline(one_column({3, 3, 3, 3}), 0.9);
        CHECK(model.stats[0].mean == 3.0);
        CHECK(model.stats[0].lower == 3.0);
        CHECK(model.stats[0].upper == 3.0);
    }
    SUBCASE("coverage one keeps the full range") {
        const BaselineModel model = fit_baseline(one_column({4, 1, 9, 2}), 1.0);
        CHECK(model.stats[0].lower == 1.0);
        CHECK(model.stats[0].upper == 9.0);
    }
    SUBCASE("bad arguments") {
        CHECK_THROWS_AS(fit_baseline(one_column({}), 0.9), InvalidArgumentError);
        CHECK_THROWS_AS(fit_baseline(one_column({1, 2}), 0.0), InvalidArgumentError);
        CHECK_THROWS_AS(fit_baseline(one_column({1, 2}), 1.5), InvalidArgumentError);
    }
}

TEST_CASE("absolute margin overrides replace the fitted interval") {
    BaselineModel model = fit_baseline(one_column({0, 10, 5, 5, 5}), 1.0);
    set_margin(model, "v01", 4.0, 6.0);
    CHECK(model.stats[0].lower == 4.0);
    CHECK(model.stats[0].upper == 6.0);
    const std::vector<double> series{5.0, 3.9, 6.1};
    CHECK(compress_series(series, model, 0).events.size() == 2);

    CHECK_THROWS_AS(set_margin(model, "v01", 6.0, 4.0), InvalidArgumentError);
    CHECK_THROWS_AS(set_margin(model, "zz", 0.0, 1.0), InvalidArgumentError);
    // The mean stays inside the margins even if the override excludes it.
    set_margin(model, "v01", 90.0, 95.0);
    CHECK(model.stats[0].lower <= model.stats[0].mean);
}

TEST_CASE("compress transmits exactly the out-of-margin samples") {
    const BaselineModel model = fit_baseline(one_column({0, 10, 5, 5, 5}), 1.0);
    SUBCASE("all inside") {
        const std::vector<double> series{1, 2, 9, 10, 0};
        CHECK(compress_series(series, model, 0).events.empty());
    }
    SUBCASE("all outside") {
        const std::vector<double> series{-1, 11, 20, -3};
        CHECK(compress_series(series, model, 0).events.size() == 4);
    }
    SUBCASE("margin boundary is inside") {
        const std::vector<double> series{10.0, 10.000001};
        const EventStream events = compress_series(series, model, 0);
        REQUIRE(events.events.size() == 1);
        CHECK(events.events[0].index == 1);
    }
    SUBCASE("unknown variable") {
        CHECK_THROWS_AS(compress_series(std::vector<double>{1.0}, model, 3),
                        InvalidArgumentError);
    }
}

TEST_CASE("reconstruction holds the mean during silence") {
    BaselineModel model;
    model.variables = {"v01"};
    model.stats = {{1.0, 0.0, 2.0}};
    model.coverage = 0.9;

    SUBCASE("no events") {
        EventStream empty{"v01", 10, {}};
        const std::vector<double> out = reconstruct_series(empty, model);
        CHECK(out == std::vector<double>(10, 1.0));
    }
    SUBCASE("hand case") {
        EventStream events{"v01", 5, {{4, 9.9}}};
        CHECK(reconstruct_series(events, model) ==
              std::vector<double>{1.0, 1.0, 1.0, 1.0, 9.9});
    }
    SUBCASE("last value hold") {
        EventStream events{"v01", 6, {{1, 9.9}, {3, -4.0}}};
        CHECK(reconstruct_series(events, model, HoldMode::kLastValue) ==
              std::vector<double>{1.0, 9.9, 9.9, -4.0, -4.0, -4.0});
    }
    SUBCASE("corrupt index") {
        EventStream events{"v01", 5, {{5, 1.0}}};
        CHECK_THROWS_AS(reconstruct_series(events, model), InvalidArgumentError);
    }
}

TEST_CASE("compression rate accounting") {
    EventStream events{"v01", 960, {}};
    CHECK(compression_rate(events) == 1.0);
    events.events.resize(71, Event{0, 0.0});
    CHECK(compression_rate(events) == doctest::Approx(0.9260).epsilon(1e-4));
    events.events.resize(960);
    CHECK(compression_rate(events) == 0.0);
    events.length = 0;
    CHECK_THROWS_AS(compression_rate(events), InvalidArgumentError);
}

TEST_CASE("randomized compression contract holds") {
    const PropertyOutcome outcome = run_compression_properties(2024, 300);
    CHECK(outcome.violations == 0);
}

TEST_CASE("rate is monotone as margins shrink") {
    SplitRng rng(7);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 80;
        std::vector<double> series(n);
        for (double& v : series) v = 10.0 * rng.next_double();
        BaselineModel wide, narrow;
        wide.variables = narrow.variables = {"v01"};
        const double lo = 2.0 + rng.next_double();
        const double hi = 6.0 + rng.next_double();
        const double mid = (lo + hi) / 2.0;
        wide.stats = {{mid, lo, hi}};
        narrow.stats = {{mid, lo + 0.5, hi - 0.5}};
        const double wide_rate = compression_rate(compress_series(series, wide, 0));
        const double narrow_rate = compression_rate(compress_series(series, narrow, 0));
        CHECK(narrow_rate <= wide_rate);
    }
}

TEST_SUITE_END();

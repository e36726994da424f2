#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "epm/csv.hpp"
#include "epm/errors.hpp"
#include "epm/force.hpp"

using namespace epm;
using namespace epm::force;
using magnetics::EPMAssembly;
using magnetics::make_default_assembly;

namespace {

std::vector<ForceMeasurement> load_fixture() {
    CsvTable t = read_csv("data/force_gap_measurements.csv");
    std::vector<ForceMeasurement> data;
    for (size_t i = 0; i < t.rows.size(); ++i)
        data.push_back({parse_csv_double(t.rows[i][0], long(i)) * 1e-3,
                        parse_csv_double(t.rows[i][1], long(i))});
    return data;
}

} // namespace

TEST_CASE("holding force is the two-face maxwell pull") {
    // hand arithmetic: B^2 A/(2 mu0) per face = 4.859 N at 0.5 T over 48.85 mm^2
    double per_face = 0.5 * 0.5 * 48.85e-6 / (2 * magnetics::kMu0);
    CHECK(per_face == doctest::Approx(4.859).epsilon(1e-3));
    CHECK(holding_force(0.5, 48.85e-6) == doctest::Approx(2 * per_face).epsilon(1e-12));
    CHECK(holding_force(0.0, 48.85e-6) == doctest::Approx(0.0));
    // doubling B quadruples force; doubling area doubles it
    CHECK(holding_force(1.0, 48.85e-6) == doctest::Approx(4 * holding_force(0.5, 48.85e-6)));
    CHECK(holding_force(0.5, 2 * 48.85e-6) == doctest::Approx(2 * holding_force(0.5, 48.85e-6)));
}

TEST_CASE("reference calibration meets the anchor windows") {
    EPMAssembly a = make_default_assembly();
    auto fit = calibrate_force_model(load_fixture(), a);
    INFO("leakage=", fit.calibration.leakage_fraction,
         " residual_gap=", fit.calibration.residual_gap_m, " rmse=", fit.rmse_N);
    CHECK(fit.rmse_N <= 0.15 * 14.6);
    double f0 = predict_force(a, 0.0, fit.calibration);
    double f01 = predict_force(a, 0.1e-3, fit.calibration);
    double f1 = predict_force(a, 1.0e-3, fit.calibration);
    CHECK(f0 == doctest::Approx(14.6).epsilon(0.11));
    CHECK(f0 >= 13.1);
    CHECK(f0 <= 16.1);
    CHECK(f01 >= 6.2);
    CHECK(f01 <= 9.2);
    CHECK(f1 >= 1.9);
    CHECK(f1 <= 2.8);
    // shape check: the near-halving between 0 and 0.1 mm
    CHECK(f01 / f0 >= 0.4);
    CHECK(f01 / f0 <= 0.65);
}

TEST_CASE("round-trip: refitting synthetic data recovers the parameters") {
    EPMAssembly a = make_default_assembly();
    ForceCalibration truth;
    truth.leakage_fraction = 0.40;
    truth.residual_gap_m = 0.20e-3;
    std::vector<ForceMeasurement> synth;
    for (int i = 0; i <= 10; ++i) {
        double g = i * 0.1e-3;
        synth.push_back({g, predict_force(a, g, truth)});
    }
    auto fit = calibrate_force_model(synth, a);
    CHECK(fit.calibration.leakage_fraction ==
          doctest::Approx(truth.leakage_fraction).epsilon(1e-4));
    CHECK(fit.calibration.residual_gap_m == doctest::Approx(truth.residual_gap_m).epsilon(1e-4));
    CHECK(fit.rmse_N < 1e-6);
}

TEST_CASE("underdetermined fits are rejected") {
    EPMAssembly a = make_default_assembly();
    std::vector<ForceMeasurement> two = {{0.0, 14.6}, {1e-3, 2.34}};
    CHECK_THROWS_AS(calibrate_force_model(two, a), UnderdeterminedFitError);
    // three rows but only two distinct gaps
    std::vector<ForceMeasurement> dup = {{0.0, 14.6}, {0.0, 14.5}, {1e-3, 2.34}};
    CHECK_THROWS_AS(calibrate_force_model(dup, a), UnderdeterminedFitError);
}

TEST_CASE("force-gap curve shape properties") {
    EPMAssembly a = make_default_assembly();
    auto fit = calibrate_force_model(load_fixture(), a);

    // strict monotone decrease over [0, 2 mm]
    std::vector<double> gaps;
    for (int i = 0; i <= 200; ++i) gaps.push_back(i * 0.01e-3);
    auto curve = force_gap_curve(a, gaps, fit.calibration);
    for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second < curve[i - 1].second);

    // convexity of the second differences over [0.1, 1.0] mm
    std::vector<double> seg;
    for (int i = 0; i <= 18; ++i) seg.push_back(0.1e-3 + i * 0.05e-3);
    auto c2 = force_gap_curve(a, seg, fit.calibration);
    for (size_t i = 2; i < c2.size(); ++i) {
        double dd = c2[i].second - 2 * c2[i - 1].second + c2[i - 2].second;
        CHECK(dd >= -1e-12);
    }

    CHECK(force_gap_curve(a, {}, fit.calibration).empty());
    CHECK_THROWS_AS(force_gap_curve(a, {1e-3, 0.0}, fit.calibration), ValidationError);
}

TEST_CASE("holding force scale law over generated inputs") {
    std::uint64_t s = 12345;
    auto next = [&s]() {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return (s >> 33) / double(1ULL << 31);
    };
    for (int i = 0; i < 300; ++i) {
        double b = next() * 1.5;
        double a = 1e-6 + next() * 1e-4;
        CHECK(holding_force(b, 2 * a) == doctest::Approx(2 * holding_force(b, a)).epsilon(1e-12));
        CHECK(holding_force(2 * b, a) == doctest::Approx(4 * holding_force(b, a)).epsilon(1e-12));
    }
}

TEST_CASE("demagnetized assembly reports the residual floor") {
    EPMAssembly a = make_default_assembly();
    a.alnico.polarization = magnetics::Polarization::Opposed;
    ForceCalibration c;
    CHECK(predict_force(a, 0.0, c) == doctest::Approx(0.0));
    c.residual_force_floor_N = 0.05;
    CHECK(predict_force(a, 0.5e-3, c) == doctest::Approx(0.05));
}

TEST_CASE("calibration scale checks") {
    EPMAssembly a = make_default_assembly();
    ForceCalibration c;
    c.leakage_fraction = 0.5;
    c.residual_gap_m = 0.2e-3;
    // zero-gap force equals phi^2/(mu0 A): leakage halves flux -> quarters force
    ForceCalibration no_leak = c;
    no_leak.leakage_fraction = 0.0;
    CHECK(predict_force(a, 0.0, c) ==
          doctest::Approx(0.25 * predict_force(a, 0.0, no_leak)).epsilon(1e-9));
    ForceCalibration bad = c;
    bad.leakage_fraction = 1.5;
    CHECK_THROWS_AS(predict_force(a, 0.0, bad), ValidationError);
}

#include "toothsim/calibration.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <random>

using namespace toothsim;

TEST_CASE("angle normalization") {
    CHECK(normalizeAngle(190.0) == -170.0);
    CHECK(normalizeAngle(-190.0) == 170.0);
    CHECK(normalizeAngle(180.0) == 180.0);
    CHECK(normalizeAngle(-180.0) == 180.0);
    CHECK(normalizeAngle(540.0) == 180.0);
    CHECK(normalizeAngle(-720.0) == 0.0);
    CHECK(normalizeAngle(350.0) == -10.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5000, 5000);
    for (int i = 0; i < 10000; ++i) {
        const double a = normalizeAngle(u(rng));
        CHECK((a > -180.0 && a <= 180.0));
        CHECK(normalizeAngle(a) == a);
    }
}

TEST_CASE("target controller pose") {
    const Pose origin{};
    const Pose t = targetControllerPose(origin, kRigOffset);
    CHECK(t.position == Vec3{22, 26, -7});
    CHECK(t.orientation == Vec3{0, 0, 90});
    const Pose m{{1, 2, 3}, {10, -20, 30}};
    CHECK(targetControllerPose(m, CalibrationOffset{}) == m);
    CHECK(targetControllerPose(Pose{{}, {0, 0, 100}}, CalibrationOffset{{}, {0, 0, 90}}).orientation == Vec3{0, 0, -170});
}

TEST_CASE("camera correction") {
    const Pose target{{22, 26, -7}, {0, 0, 170}};
    CHECK(cameraCorrection(target, target) == Pose{});
    const Pose measured{{20, 20, 0}, {0, 0, -170}};
    const Pose d = cameraCorrection(target, measured);
    CHECK(d.position == Vec3{2, 6, -7});
    CHECK(d.orientation.z == -20.0);
}

TEST_CASE("correction round trip on random poses") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> pos(-100, 100), ang(-720, 720);
    for (int i = 0; i < 10000; ++i) {
        const Pose mirror{{pos(rng), pos(rng), pos(rng)}, {ang(rng), ang(rng), ang(rng)}};
        const CalibrationOffset offset{{pos(rng), pos(rng), pos(rng)}, {ang(rng), ang(rng), ang(rng)}};
        const Pose measured{{pos(rng), pos(rng), pos(rng)}, {ang(rng), ang(rng), ang(rng)}};
        const Pose target = targetControllerPose(mirror, offset);
        const Pose fixed = applyCorrection(measured, cameraCorrection(target, measured));
        REQUIRE(distance(fixed.position, target.position) <= 1e-9);
        for (int a = 0; a < 3; ++a) {
            REQUIRE(std::fabs(normalizeAngle(fixed.orientation[a] - target.orientation[a])) <= 1e-9);
        }
        const auto res = alignmentResidual(target, fixed);
        REQUIRE(res.position <= 1e-9);
        REQUIRE(res.angle <= 1e-9);
    }
}

TEST_CASE("misalignment offsets") {
    const TableFrame frame{"-z", "+x"};
    const Pose once = applyMisalignment(Pose{}, frame);
    CHECK(once.position == Vec3{50, 0, -20});
    CHECK(applyMisalignment(once, frame).position == Vec3{100, 0, -40});
    const Pose p{{1, 2, 3}, {4, 5, 6}};
    CHECK(removeMisalignment(applyMisalignment(p, frame), frame) == p);
    CHECK(applyMisalignment(p, frame).orientation == p.orientation);
    CHECK_THROWS(applyMisalignment(p, std::nullopt));
    CHECK_THROWS(applyMisalignment(p, TableFrame{"-z", "+z"}));
    CHECK_THROWS(applyMisalignment(p, TableFrame{"down", "+x"}));
    CHECK(TableFrame{"-y", "+z"}.downAxis() == Vec3{0, -1, 0});
}

TEST_CASE("alignment residual") {
    const Pose a{{1, 2, 3}, {0, 0, 0}};
    CHECK(alignmentResidual(a, a).position == 0.0);
    CHECK(alignmentResidual(a, a).angle == 0.0);
    const auto r = alignmentResidual(a, Pose{{2, 2, 3}, {0, 0, 0}});
    CHECK(r.position == 1.0);
    CHECK(r.angle == 0.0);
    CHECK(alignmentResidual(Pose{{}, {0, 0, 350}}, Pose{}).angle == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("calibration config parsing and audit") {
    const std::string text = R"({
      "mirrorOrigin": {"position": [0, 0, 0], "orientation": [0, 0, 0]},
      "drillOrigin": {"position": [30, 0, 0], "orientation": [0, 0, 0]},
      "frame": {"down": "-z", "forward": "+x"},
      "measuredController": {"position": [20, 20, 0], "orientation": [0, 0, 80]},
      "misaligned": false})";
    const CalibrationConfig c = parseCalibrationConfig(text);
    CHECK(c.offset.translation == kRigOffset.translation);
    CHECK(c.drillOrigin.has_value());
    const auto audit = nlohmann::json::parse(calibrationAuditJson(c));
    CHECK(audit["targetController"]["position"] == nlohmann::json::array({22.0, 26.0, -7.0}));
    CHECK(audit["cameraCorrection"]["position"] == nlohmann::json::array({2.0, 6.0, -7.0}));
    CHECK(audit["cameraCorrection"]["orientation"][2] == 10.0);
    CHECK(audit["residual"]["position"] == 0.0);
    CHECK_THROWS(parseCalibrationConfig("{}"));
    CHECK_THROWS(parseCalibrationConfig(R"({"mirrorOrigin": {"position": [0, 0], "orientation": [0, 0, 0]}})"));
    // Misalignment needs a declared table frame.
    CHECK_THROWS(calibrationAuditJson(parseCalibrationConfig(
        R"({"mirrorOrigin": {"position": [0, 0, 0], "orientation": [0, 0, 0]}, "misaligned": true})")));
}

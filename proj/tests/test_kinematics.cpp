#include <cmath>
#include <numbers>

#include "doctest.h"

#include "crosspaint/errors.hpp"
#include "crosspaint/kinematics.hpp"
#include "test_util.hpp"

using namespace crosspaint;
using crosspaint::testing::RandomConfig;
using crosspaint::testing::RandomTransform;
using crosspaint::testing::Robot;

namespace {

constexpr double kPi = std::numbers::pi;

const char* kOneJoint = R"(<robot name="one">
  <link name="a"/><link name="b"/>
  <joint name="j" type="revolute">
    <parent link="a"/><child link="b"/>
    <axis xyz="0 0 1"/>
    <limit lower="-3.141592653589793" upper="3.141592653589793"/>
  </joint>
</robot>)";

// Six revolute joints with rotated origins; used against a hand-composed
// Eigen::Isometry3d oracle.
const char* kTwisted6 = R"(<robot name="twisted">
  <link name="l0"/><link name="l1"/><link name="l2"/><link name="l3"/>
  <link name="l4"/><link name="l5"/><link name="l6"/>
  <joint name="j1" type="revolute"><parent link="l0"/><child link="l1"/>
    <origin xyz="0 0 0.1" rpy="0 0 0.3"/><axis xyz="0 0 1"/>
    <limit lower="-3" upper="3"/></joint>
  <joint name="j2" type="revolute"><parent link="l1"/><child link="l2"/>
    <origin xyz="0.05 0 0.2" rpy="0.5 0 0"/><axis xyz="0 1 0"/>
    <limit lower="-3" upper="3"/></joint>
  <joint name="j3" type="revolute"><parent link="l2"/><child link="l3"/>
    <origin xyz="0 0.1 0.3" rpy="0 -0.4 0"/><axis xyz="0 1 0"/>
    <limit lower="-3" upper="3"/></joint>
  <joint name="j4" type="revolute"><parent link="l3"/><child link="l4"/>
    <origin xyz="0 0 0.25" rpy="0.1 0.2 0.3"/><axis xyz="1 0 0"/>
    <limit lower="-3" upper="3"/></joint>
  <joint name="j5" type="revolute"><parent link="l4"/><child link="l5"/>
    <origin xyz="0.02 -0.03 0.1"/><axis xyz="0 0 1"/>
    <limit lower="-3" upper="3"/></joint>
  <joint name="j6" type="revolute"><parent link="l5"/><child link="l6"/>
    <origin xyz="0 0 0.08" rpy="-0.7 0 1.2"/><axis xyz="0 1 0"/>
    <limit lower="-3" upper="3"/></joint>
  <tool_frame xyz="0 0 0.12" rpy="0 0.3 0"/>
</robot>)";

const char* kPrismatic = R"(<robot name="slider">
  <link name="a"/><link name="b"/><link name="c"/>
  <joint name="rot" type="revolute"><parent link="a"/><child link="b"/>
    <axis xyz="0 0 1"/><limit lower="-3" upper="3"/></joint>
  <joint name="slide" type="prismatic"><parent link="b"/><child link="c"/>
    <origin xyz="0.2 0 0"/><axis xyz="1 0 0"/><limit lower="0" upper="0.5"/></joint>
  <tool_frame xyz="0.1 0 0"/>
</robot>)";

Eigen::Isometry3d Iso(const Vec3& xyz, const Vec3& rpy) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translate(xyz);
  t.rotate(Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
           Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
           Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()));
  return t;
}

}  // namespace

TEST_CASE("parse: minimal one-joint description") {
  const RobotModel m = ParseRobotDescription(kOneJoint);
  CHECK(m.name == "one");
  CHECK(m.chain.size() == 1);
  CHECK(m.dof() == 1);
  CHECK(m.chain[0].limit_lo == doctest::Approx(-kPi));
  CHECK(!m.gripper.has_value());
}

TEST_CASE("parse: error paths") {
  SUBCASE("branching chain") {
    const char* doc = R"(<robot name="tree">
      <link name="a"/><link name="b"/><link name="c"/>
      <joint name="j1" type="revolute"><parent link="a"/><child link="b"/>
        <limit lower="-1" upper="1"/></joint>
      <joint name="j2" type="revolute"><parent link="a"/><child link="c"/>
        <limit lower="-1" upper="1"/></joint>
    </robot>)";
    CHECK_THROWS_AS(ParseRobotDescription(doc), BranchingChain);
  }
  SUBCASE("missing limit") {
    const char* doc = R"(<robot name="x"><link name="a"/><link name="b"/>
      <joint name="j" type="revolute"><parent link="a"/><child link="b"/></joint>
    </robot>)";
    CHECK_THROWS_AS(ParseRobotDescription(doc), MissingLimit);
  }
  SUBCASE("syntax error") {
    CHECK_THROWS_AS(ParseRobotDescription("<robot name='x'><link"), MalformedDescription);
  }
  SUBCASE("unsupported joint type") {
    const char* doc = R"(<robot name="x"><link name="a"/><link name="b"/>
      <joint name="j" type="continuous"><parent link="a"/><child link="b"/></joint>
    </robot>)";
    CHECK_THROWS_AS(ParseRobotDescription(doc), MalformedDescription);
  }
  SUBCASE("only fixed joints") {
    const char* doc = R"(<robot name="x"><link name="a"/><link name="b"/>
      <joint name="j" type="fixed"><parent link="a"/><child link="b"/></joint>
    </robot>)";
    CHECK_THROWS_AS(ParseRobotDescription(doc), MalformedDescription);
  }
  SUBCASE("gripper jaw count mismatch") {
    const char* doc = R"(<robot name="x"><link name="a"/><link name="b"/><link name="f"/>
      <joint name="j" type="revolute"><parent link="a"/><child link="b"/>
        <limit lower="-1" upper="1"/></joint>
      <joint name="fj" type="prismatic"><parent link="b"/><child link="f"/>
        <limit lower="0" upper="0.04"/></joint>
      <gripper jaws="2"><finger joint="fj" closed="0" open="0.04"/></gripper>
    </robot>)";
    CHECK_THROWS_AS(ParseRobotDescription(doc), MalformedDescription);
  }
  SUBCASE("finger open equals closed") {
    const char* doc = R"(<robot name="x"><link name="a"/><link name="b"/>
      <link name="f1"/><link name="f2"/>
      <joint name="j" type="revolute"><parent link="a"/><child link="b"/>
        <limit lower="-1" upper="1"/></joint>
      <joint name="f1j" type="prismatic"><parent link="b"/><child link="f1"/>
        <limit lower="0" upper="0.04"/></joint>
      <joint name="f2j" type="prismatic"><parent link="b"/><child link="f2"/>
        <limit lower="0" upper="0.04"/></joint>
      <gripper jaws="2"><finger joint="f1j" closed="0" open="0.04"/>
        <finger joint="f2j" closed="0.01" open="0.01"/></gripper>
    </robot>)";
    CHECK_THROWS_AS(ParseRobotDescription(doc), MalformedDescription);
  }
}

TEST_CASE("parse: registered arms carry grippers and lazy meshes") {
  const RobotModel& a = Robot("arm6a");
  CHECK(a.dof() == 6);
  REQUIRE(a.gripper);
  CHECK(a.gripper->jaw_count == 2);
  CHECK(a.links.size() == 7 + 2);
  for (const auto& v : a.visuals) {
    CHECK(v.link < a.links.size());
    CHECK_FALSE(v.mesh->Get().triangles.empty());
  }
  const RobotModel& c = Robot("arm6c");
  REQUIRE(c.gripper);
  CHECK(c.gripper->jaw_count == 3);
  for (const auto& j : c.chain) {
    if (j.movable()) CHECK(j.axis.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("parse: missing mesh file fails only when geometry is requested") {
  const char* doc = R"(<robot name="x"><link name="a"/>
    <link name="b"><visual><geometry><mesh filename="nope.tmsh"/></geometry></visual></link>
    <joint name="j" type="revolute"><parent link="a"/><child link="b"/>
      <limit lower="-1" upper="1"/></joint>
  </robot>)";
  const RobotModel m = ParseRobotDescription(doc, "/nonexistent");
  REQUIRE(m.visuals.size() == 1);
  CHECK_THROWS_AS(m.visuals[0].mesh->Get(), MeshLoadFailure);
}

TEST_CASE("fk: 6-dof zero config equals hand-composed origin transforms") {
  const RobotModel m = ParseRobotDescription(kTwisted6);
  Eigen::Isometry3d oracle = Iso({0, 0, 0.1}, {0, 0, 0.3}) *
                             Iso({0.05, 0, 0.2}, {0.5, 0, 0}) *
                             Iso({0, 0.1, 0.3}, {0, -0.4, 0}) *
                             Iso({0, 0, 0.25}, {0.1, 0.2, 0.3}) *
                             Iso({0.02, -0.03, 0.1}, {0, 0, 0}) *
                             Iso({0, 0, 0.08}, {-0.7, 0, 1.2}) *
                             Iso({0, 0, 0.12}, {0, 0.3, 0});
  const auto fk = ForwardKinematics(m, JointConfig::Zero(6), RigidTransform::Identity());
  CHECK((fk.end_effector.translation() - oracle.translation()).norm() < 1e-12);
  CHECK((fk.end_effector.rotation_matrix() - oracle.rotation()).norm() < 1e-12);
  CHECK(fk.links.size() == 7);
}

TEST_CASE("fk: identity origins at zero config give the tool offset") {
  const char* doc = R"(<robot name="id"><link name="a"/><link name="b"/><link name="c"/>
    <joint name="j1" type="revolute"><parent link="a"/><child link="b"/>
      <limit lower="-1" upper="1"/></joint>
    <joint name="j2" type="prismatic"><parent link="b"/><child link="c"/>
      <limit lower="-1" upper="1"/></joint>
    <tool_frame xyz="0.1 0.2 0.3" rpy="0.4 0.5 0.6"/>
  </robot>)";
  const RobotModel m = ParseRobotDescription(doc);
  const auto ee = EndEffectorPose(m, JointConfig::Zero(2), RigidTransform::Identity());
  CHECK(ee.IsApprox(m.tool_offset, 1e-15));
}

TEST_CASE("fk: planar 2-link analytic positions") {
  const RobotModel& m = Robot("planar2");
  JointConfig q(2);
  q << kPi / 2, 0.0;
  const Vec3 p = EndEffectorPose(m, q, RigidTransform::Identity()).translation();
  CHECK(p.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(2.0));
  CHECK(p.z() == doctest::Approx(0.0));

  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const JointConfig r = RandomConfig(m, rng);
    const Vec3 a = EndEffectorPose(m, r, RigidTransform::Identity()).translation();
    CHECK(a.x() == doctest::Approx(std::cos(r[0]) + std::cos(r[0] + r[1])));
    CHECK(a.y() == doctest::Approx(std::sin(r[0]) + std::sin(r[0] + r[1])));
  }
}

TEST_CASE("fk: config length mismatch") {
  CHECK_THROWS_AS(EndEffectorPose(Robot("planar2"), JointConfig::Zero(3), {}),
                  ConfigLengthMismatch);
  CHECK_THROWS_AS(Jacobian(Robot("arm6a"), JointConfig::Zero(2), {}),
                  ConfigLengthMismatch);
}

TEST_CASE("fk: left-equivariance in the base") {
  Rng rng(11);
  for (const char* name : {"arm6a", "arm6b", "arm6c"}) {
    const RobotModel& m = Robot(name);
    for (int i = 0; i < 30; ++i) {
      const JointConfig q = RandomConfig(m, rng);
      const RigidTransform b = RandomTransform(rng);
      const auto world = ForwardKinematics(m, q, b);
      const auto local = ForwardKinematics(m, q, RigidTransform::Identity());
      CHECK(world.end_effector.IsApprox(b * local.end_effector, 1e-12));
      for (std::size_t l = 0; l < world.links.size(); ++l) {
        CHECK(world.links[l].IsApprox(b * local.links[l], 1e-12));
      }
    }
  }
  // Pure translation shifts the end effector by exactly t.
  const RobotModel& m = Robot("arm6a");
  const JointConfig q = m.MidRange();
  const Vec3 t(0.25, -0.5, 0.125);
  const auto a = EndEffectorPose(m, q, {});
  const auto b = EndEffectorPose(m, q, RigidTransform::FromTranslation(t));
  CHECK(((b.translation() - a.translation()) - t).norm() < 1e-15);
}

TEST_CASE("jacobian: planar closed form") {
  const RobotModel& m = Robot("planar2");
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    JointConfig q = i == 0 ? JointConfig::Zero(2) : RandomConfig(m, rng);
    const auto jac = Jacobian(m, q, {});
    const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
    const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
    Eigen::Matrix<double, 6, 2> expect;
    expect << -s1 - s12, -s12,
               c1 + c12,  c12,
               0, 0,
               0, 0,
               0, 0,
               1, 1;
    CHECK((jac - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("jacobian: central finite differences") {
  Rng rng(5);
  const double h = 1e-6;
  for (const char* name : {"planar2", "arm6a", "arm6b", "arm6c"}) {
    const RobotModel& m = Robot(name);
    for (int i = 0; i < 10; ++i) {
      const JointConfig q = RandomConfig(m, rng);
      const RigidTransform base = RandomTransform(rng, 0.5);
      const auto jac = Jacobian(m, q, base);
      for (Eigen::Index k = 0; k < q.size(); ++k) {
        JointConfig qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        const auto ep = EndEffectorPose(m, qp, base);
        const auto em = EndEffectorPose(m, qm, base);
        const Vec3 dv = (ep.translation() - em.translation()) / (2 * h);
        const Vec3 dw = RotationError(ep.rotation(), em.rotation()) / (2 * h);
        CHECK((dv - jac.block<3, 1>(0, k)).cwiseAbs().maxCoeff() < 1e-5);
        CHECK((dw - jac.block<3, 1>(3, k)).cwiseAbs().maxCoeff() < 1e-5);
      }
    }
  }
}

TEST_CASE("jacobian: prismatic column has zero angular part") {
  const RobotModel m = ParseRobotDescription(kPrismatic);
  JointConfig q(2);
  q << 0.4, 0.2;
  const auto jac = Jacobian(m, q, {});
  CHECK(jac.block<3, 1>(3, 1).isZero(0.0));
  CHECK(jac.block<3, 1>(0, 1).isApprox(Vec3(std::cos(0.4), std::sin(0.4), 0)));
}

TEST_CASE("ik: fixed point needs zero iterations") {
  const RobotModel& m = Robot("arm6a");
  const JointConfig seed = m.MidRange();
  const auto target = EndEffectorPose(m, seed, {});
  const IkResult r = SolveIk(m, target, seed, {}, IkParams{});
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.position_error_m < IkParams{}.pos_tol);
  CHECK(r.config == seed);
}

TEST_CASE("ik: planar target on the reach boundary") {
  const RobotModel& m = Robot("planar2");
  // The default 0.5 mm tolerance stops short of the 1e-4 m check.
  IkParams tight;
  tight.pos_tol = 1e-5;
  tight.rot_tol = 1e-5;
  for (double angle : {0.7, -2.0, 2.9}) {
    JointConfig straight(2);
    straight << angle, 0.0;
    const auto target = EndEffectorPose(m, straight, {});
    const IkResult r = SolveIk(m, target, m.MidRange(), {}, tight);
    CHECK(r.converged);
    CHECK(r.position_error_m < 1e-4);
    CHECK(std::abs(r.config[1]) < 1e-2);
    // Analytic 2-link oracle: the only solution at full extension.
    CHECK(std::remainder(r.config[0] - angle, 2 * kPi) == doctest::Approx(0).epsilon(1e-3));
  }
}

TEST_CASE("ik: unreachable target reports distance beyond reach") {
  const RobotModel& m = Robot("planar2");
  const RigidTransform target = RigidTransform::FromTranslation({10.0, 0.0, 0.0});
  const IkResult r = SolveIk(m, target, m.MidRange(), {}, IkParams{});
  CHECK_FALSE(r.converged);
  CHECK(r.position_error_m == doctest::Approx(10.0 - 2.0).epsilon(1e-3));
}

TEST_CASE("ik: soundness, limit safety and determinism on 6-dof arms") {
  Rng rng(21);
  const IkParams params;
  for (const char* name : {"arm6a", "arm6b", "arm6c"}) {
    const RobotModel& m = Robot(name);
    int converged = 0;
    for (int i = 0; i < 40; ++i) {
      const JointConfig truth = RandomConfig(m, rng);
      const auto target = EndEffectorPose(m, truth, {});
      const IkResult r = SolveIk(m, target, m.MidRange(), {}, params);
      CHECK(m.WithinLimits(r.config));
      if (r.converged) {
        ++converged;
        const auto got = EndEffectorPose(m, r.config, {});
        CHECK((got.translation() - target.translation()).norm() < params.pos_tol);
        CHECK(RotationDistance(got.rotation(), target.rotation()) < params.rot_tol);
      }
      const IkResult again = SolveIk(m, target, m.MidRange(), {}, params);
      CHECK(again.config == r.config);
      CHECK(again.position_error_m == r.position_error_m);
    }
    MESSAGE(name << ": " << converged << "/40 random targets converged from mid-range");
  }
}

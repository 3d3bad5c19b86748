#include "crosspaint/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Cholesky>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "crosspaint/errors.hpp"

namespace crosspaint {

namespace pt = boost::property_tree;

RigidTransform JointSpec::Motion(double q) const {
  switch (kind) {
    case JointKind::kRevolute:
      return RigidTransform::FromAxisAngle(axis, q);
    case JointKind::kPrismatic:
      return RigidTransform::FromTranslation(axis * q);
    case JointKind::kFixed:
      break;
  }
  return RigidTransform::Identity();
}

std::size_t RobotModel::dof() const {
  std::size_t n = 0;
  for (const auto& j : chain) n += j.movable() ? 1 : 0;
  return n;
}

JointConfig RobotModel::LowerLimits() const {
  JointConfig lo(dof());
  std::size_t k = 0;
  for (const auto& j : chain) {
    if (j.movable()) lo[Eigen::Index(k++)] = j.limit_lo;
  }
  return lo;
}

JointConfig RobotModel::UpperLimits() const {
  JointConfig hi(dof());
  std::size_t k = 0;
  for (const auto& j : chain) {
    if (j.movable()) hi[Eigen::Index(k++)] = j.limit_hi;
  }
  return hi;
}

JointConfig RobotModel::MidRange() const {
  return 0.5 * (LowerLimits() + UpperLimits());
}

JointConfig RobotModel::Clamp(JointConfig q) const {
  return q.cwiseMax(LowerLimits()).cwiseMin(UpperLimits());
}

bool RobotModel::WithinLimits(const JointConfig& q) const {
  if (std::size_t(q.size()) != dof()) return false;
  return (q.array() >= LowerLimits().array()).all() &&
         (q.array() <= UpperLimits().array()).all();
}

// ---------------------------------------------------------------------------
// Description parsing

namespace {

std::vector<double> ParseNumbers(const std::string& text, std::size_t expect,
                                 const std::string& what) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof() || out.size() != expect) {
    throw MalformedDescription("bad " + what + " value '" + text + "'");
  }
  return out;
}

Vec3 ParseVec3(const pt::ptree& node, const std::string& attr,
               const Vec3& fallback) {
  const auto text = node.get_optional<std::string>("<xmlattr>." + attr);
  if (!text) return fallback;
  const auto v = ParseNumbers(*text, 3, attr);
  return {v[0], v[1], v[2]};
}

RigidTransform ParseOrigin(const pt::ptree& parent) {
  const auto origin = parent.get_child_optional("origin");
  if (!origin) return RigidTransform::Identity();
  const Vec3 xyz = ParseVec3(*origin, "xyz", Vec3::Zero());
  const Vec3 rpy = ParseVec3(*origin, "rpy", Vec3::Zero());
  return RigidTransform::FromRpy(rpy.x(), rpy.y(), rpy.z(), xyz);
}

std::string RequireAttr(const pt::ptree& node, const std::string& attr,
                        const std::string& element) {
  const auto v = node.get_optional<std::string>("<xmlattr>." + attr);
  if (!v || v->empty()) {
    throw MalformedDescription("<" + element + "> missing attribute '" + attr +
                               "'");
  }
  return *v;
}

double ParseScalar(const std::string& text, const std::string& what) {
  return ParseNumbers(text, 1, what)[0];
}

Rgb ParseRgba(const std::string& text) {
  const auto v = ParseNumbers(text, 4, "rgba");
  Rgb c;
  for (int k = 0; k < 3; ++k) {
    c[k] = std::uint8_t(std::lround(std::clamp(v[k], 0.0, 1.0) * 255.0));
  }
  return c;
}

struct RawVisual {
  RigidTransform attach;
  std::shared_ptr<const LazyMesh> mesh;
  std::optional<Rgb> albedo;
};

struct RawLink {
  std::string name;
  std::vector<RawVisual> visuals;
};

std::shared_ptr<const LazyMesh> ParseGeometry(const pt::ptree& visual,
                                              const std::string& base_dir,
                                              const std::string& link) {
  const auto geom = visual.get_child_optional("geometry");
  if (!geom) {
    throw MalformedDescription("visual of link '" + link + "' has no geometry");
  }
  if (const auto mesh = geom->get_child_optional("mesh")) {
    std::filesystem::path file = RequireAttr(*mesh, "filename", "mesh");
    if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
    const Vec3 scale = ParseVec3(*mesh, "scale", Vec3::Ones());
    return std::make_shared<LazyMesh>(file, scale);
  }
  if (const auto box = geom->get_child_optional("box")) {
    const auto v = ParseNumbers(RequireAttr(*box, "size", "box"), 3, "size");
    return std::make_shared<LazyMesh>(MakeBox({v[0], v[1], v[2]}));
  }
  if (const auto cyl = geom->get_child_optional("cylinder")) {
    const double r = ParseScalar(RequireAttr(*cyl, "radius", "cylinder"), "radius");
    const double l = ParseScalar(RequireAttr(*cyl, "length", "cylinder"), "length");
    return std::make_shared<LazyMesh>(MakeCylinder(r, l));
  }
  throw MalformedDescription("unsupported geometry in link '" + link + "'");
}

JointSpec ParseJoint(const pt::ptree& node) {
  JointSpec j;
  j.name = RequireAttr(node, "name", "joint");
  const std::string type = RequireAttr(node, "type", "joint");
  if (type == "revolute") {
    j.kind = JointKind::kRevolute;
  } else if (type == "prismatic") {
    j.kind = JointKind::kPrismatic;
  } else if (type == "fixed") {
    j.kind = JointKind::kFixed;
  } else {
    throw MalformedDescription("joint '" + j.name + "': unsupported type '" +
                               type + "'");
  }
  const auto parent = node.get_child_optional("parent");
  const auto child = node.get_child_optional("child");
  if (!parent || !child) {
    throw MalformedDescription("joint '" + j.name + "' needs parent and child");
  }
  j.parent_link = RequireAttr(*parent, "link", "parent");
  j.child_link = RequireAttr(*child, "link", "child");
  j.origin = ParseOrigin(node);
  if (j.movable()) {
    Vec3 axis = Vec3::UnitX();
    if (const auto a = node.get_child_optional("axis")) {
      axis = ParseVec3(*a, "xyz", Vec3::UnitX());
    }
    if (axis.norm() < 1e-12) {
      throw MalformedDescription("joint '" + j.name + "' has a zero axis");
    }
    j.axis = axis.normalized();
    const auto limit = node.get_child_optional("limit");
    const auto lo = limit ? limit->get_optional<std::string>("<xmlattr>.lower")
                          : boost::none;
    const auto hi = limit ? limit->get_optional<std::string>("<xmlattr>.upper")
                          : boost::none;
    if (!lo || !hi) {
      throw MissingLimit("joint '" + j.name + "' has no lower/upper limit");
    }
    j.limit_lo = ParseScalar(*lo, "lower");
    j.limit_hi = ParseScalar(*hi, "upper");
    if (j.limit_lo > j.limit_hi) {
      throw MalformedDescription("joint '" + j.name + "' has lower > upper");
    }
  }
  return j;
}

}  // namespace

RobotModel ParseRobotDescription(const std::string& text,
                                 const std::string& base_dir) {
  pt::ptree doc;
  try {
    std::istringstream in(text);
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw MalformedDescription(std::string("xml: ") + e.what());
  }
  const auto robot = doc.get_child_optional("robot");
  if (!robot) throw MalformedDescription("missing <robot> root element");

  RobotModel model;
  model.name = RequireAttr(*robot, "name", "robot");

  std::map<std::string, Rgb> materials;
  std::vector<RawLink> raw_links;
  std::map<std::string, std::size_t> link_index;
  std::vector<JointSpec> joints;
  std::optional<pt::ptree> gripper_node;

  for (const auto& [tag, node] : *robot) {
    if (tag == "material") {
      const auto color = node.get_optional<std::string>("color.<xmlattr>.rgba");
      if (color) materials[RequireAttr(node, "name", "material")] = ParseRgba(*color);
    }
  }

  for (const auto& [tag, node] : *robot) {
    if (tag == "link") {
      RawLink link;
      link.name = RequireAttr(node, "name", "link");
      if (!link_index.emplace(link.name, raw_links.size()).second) {
        throw MalformedDescription("duplicate link '" + link.name + "'");
      }
      for (const auto& [vtag, visual] : node) {
        if (vtag != "visual") continue;
        RawVisual v;
        v.attach = ParseOrigin(visual);
        v.mesh = ParseGeometry(visual, base_dir, link.name);
        if (const auto mat = visual.get_child_optional("material")) {
          if (const auto c = mat->get_optional<std::string>("color.<xmlattr>.rgba")) {
            v.albedo = ParseRgba(*c);
          } else if (const auto n = mat->get_optional<std::string>("<xmlattr>.name")) {
            if (const auto it = materials.find(*n); it != materials.end()) {
              v.albedo = it->second;
            }
          }
        }
        link.visuals.push_back(std::move(v));
      }
      raw_links.push_back(std::move(link));
    } else if (tag == "joint") {
      joints.push_back(ParseJoint(node));
    } else if (tag == "tool_frame") {
      const Vec3 xyz = ParseVec3(node, "xyz", Vec3::Zero());
      const Vec3 rpy = ParseVec3(node, "rpy", Vec3::Zero());
      model.tool_offset = RigidTransform::FromRpy(rpy.x(), rpy.y(), rpy.z(), xyz);
    } else if (tag == "gripper") {
      gripper_node = node;
    }
  }

  if (raw_links.empty()) throw MalformedDescription("robot has no links");

  std::set<std::string> joint_names;
  for (const auto& j : joints) {
    if (!joint_names.insert(j.name).second) {
      throw MalformedDescription("duplicate joint '" + j.name + "'");
    }
    if (!link_index.count(j.parent_link) || !link_index.count(j.child_link)) {
      throw MalformedDescription("joint '" + j.name + "' references unknown link");
    }
  }

  // Finger joints are the jaws; everything else must form one serial chain.
  std::map<std::string, std::pair<double, double>> finger_values;
  std::vector<std::string> finger_order;
  int jaws = 0;
  if (gripper_node) {
    jaws = std::stoi(RequireAttr(*gripper_node, "jaws", "gripper"));
    for (const auto& [tag, node] : *gripper_node) {
      if (tag != "finger") continue;
      const std::string jn = RequireAttr(node, "joint", "finger");
      const double closed = ParseScalar(RequireAttr(node, "closed", "finger"), "closed");
      const double open = ParseScalar(RequireAttr(node, "open", "finger"), "open");
      if (!joint_names.count(jn)) {
        throw MalformedDescription("finger references unknown joint '" + jn + "'");
      }
      if (closed == open) {
        throw MalformedDescription("finger '" + jn + "' has open == closed");
      }
      if (!finger_values.emplace(jn, std::make_pair(closed, open)).second) {
        throw MalformedDescription("finger joint '" + jn + "' listed twice");
      }
      finger_order.push_back(jn);
    }
    if (jaws != 2 && jaws != 3) {
      throw MalformedDescription("gripper jaws must be 2 or 3");
    }
    if (std::size_t(jaws) != finger_order.size()) {
      throw MalformedDescription("gripper jaws=" + std::to_string(jaws) +
                                 " but " + std::to_string(finger_order.size()) +
                                 " fingers listed");
    }
  }

  std::map<std::string, const JointSpec*> child_of;     // child link -> joint
  std::map<std::string, std::vector<const JointSpec*>> children;  // parent -> chain joints
  for (const auto& j : joints) {
    if (!child_of.emplace(j.child_link, &j).second) {
      throw MalformedDescription("link '" + j.child_link + "' has two parents");
    }
    if (!finger_values.count(j.name)) children[j.parent_link].push_back(&j);
  }
  for (const auto& [link, js] : children) {
    if (js.size() > 1) {
      throw BranchingChain("link '" + link + "' has " + std::to_string(js.size()) +
                           " child joints");
    }
  }

  std::vector<std::string> roots;
  for (const auto& l : raw_links) {
    if (!child_of.count(l.name)) roots.push_back(l.name);
  }
  if (roots.size() != 1) {
    throw MalformedDescription("expected exactly one root link, found " +
                               std::to_string(roots.size()));
  }

  std::map<std::string, std::size_t> model_link;
  std::string cur = roots.front();
  model.links.push_back(cur);
  model_link[cur] = 0;
  while (children.count(cur)) {
    const JointSpec* j = children[cur].front();
    model.chain.push_back(*j);
    cur = j->child_link;
    model_link[cur] = model.links.size();
    model.links.push_back(cur);
  }
  if (model.dof() == 0) {
    throw MalformedDescription("chain has no movable joint");
  }

  if (gripper_node) {
    GripperSpec g;
    g.jaw_count = jaws;
    for (const auto& jn : finger_order) {
      const auto it = std::find_if(joints.begin(), joints.end(),
                                   [&](const JointSpec& j) { return j.name == jn; });
      if (!it->movable()) {
        throw MalformedDescription("finger joint '" + jn + "' is fixed");
      }
      const auto parent = model_link.find(it->parent_link);
      if (parent == model_link.end()) {
        throw MalformedDescription("finger '" + jn + "' does not hang off the chain");
      }
      FingerJoint f;
      f.joint = *it;
      f.parent_link = parent->second;
      f.link = model.links.size();
      f.closed = finger_values[jn].first;
      f.open = finger_values[jn].second;
      model_link[it->child_link] = f.link;
      model.links.push_back(it->child_link);
      g.fingers.push_back(std::move(f));
    }
    model.gripper = std::move(g);
  }

  if (model.links.size() != raw_links.size()) {
    throw MalformedDescription("description contains links not connected to the chain");
  }

  for (const auto& l : raw_links) {
    for (const auto& v : l.visuals) {
      LinkVisual lv;
      lv.link = model_link.at(l.name);
      lv.attach = v.attach;
      lv.mesh = v.mesh;
      if (v.albedo) lv.albedo = *v.albedo;
      model.visuals.push_back(std::move(lv));
    }
  }
  return model;
}

RobotModel LoadRobotDescription(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedDescription("cannot open robot description " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseRobotDescription(ss.str(),
                               std::filesystem::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Kinematics

namespace {

void CheckLength(const RobotModel& model, const JointConfig& q) {
  if (std::size_t(q.size()) != model.dof()) {
    throw ConfigLengthMismatch("config has " + std::to_string(q.size()) +
                               " values, model '" + model.name + "' has " +
                               std::to_string(model.dof()) + " movable joints");
  }
}

// Walks the chain once. `joint_frames` (optional) receives, for each movable
// joint, the world frame of the joint before its motion is applied.
RigidTransform WalkChain(const RobotModel& model, const JointConfig& q,
                         const RigidTransform& base,
                         std::vector<RigidTransform>* links,
                         std::vector<RigidTransform>* joint_frames) {
  RigidTransform t = base;
  if (links) links->push_back(t);
  Eigen::Index k = 0;
  for (const auto& j : model.chain) {
    t = t * j.origin;
    if (j.movable()) {
      if (joint_frames) joint_frames->push_back(t);
      t = t * j.Motion(q[k++]);
    }
    if (links) links->push_back(t);
  }
  return t;
}

}  // namespace

FkResult ForwardKinematics(const RobotModel& model, const JointConfig& q,
                           const RigidTransform& base) {
  return ForwardKinematics(model, q, base, {});
}

FkResult ForwardKinematics(const RobotModel& model, const JointConfig& q,
                           const RigidTransform& base,
                           const std::vector<double>& finger_values) {
  CheckLength(model, q);
  FkResult out;
  out.links.reserve(model.links.size());
  const RigidTransform flange = WalkChain(model, q, base, &out.links, nullptr);
  out.end_effector = flange * model.tool_offset;
  if (model.gripper) {
    const auto& fingers = model.gripper->fingers;
    for (std::size_t i = 0; i < fingers.size(); ++i) {
      const auto& f = fingers[i];
      const double v = i < finger_values.size() ? finger_values[i] : f.closed;
      out.links.push_back(out.links[f.parent_link] * f.joint.origin *
                          f.joint.Motion(v));
    }
  }
  return out;
}

RigidTransform EndEffectorPose(const RobotModel& model, const JointConfig& q,
                               const RigidTransform& base) {
  CheckLength(model, q);
  return WalkChain(model, q, base, nullptr, nullptr) * model.tool_offset;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> Jacobian(const RobotModel& model,
                                                  const JointConfig& q,
                                                  const RigidTransform& base) {
  CheckLength(model, q);
  std::vector<RigidTransform> frames;
  frames.reserve(model.dof());
  const RigidTransform ee =
      WalkChain(model, q, base, nullptr, &frames) * model.tool_offset;
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, Eigen::Index(model.dof()));
  Eigen::Index col = 0;
  std::size_t fi = 0;
  for (const auto& j : model.chain) {
    if (!j.movable()) continue;
    const RigidTransform& f = frames[fi++];
    const Vec3 axis = f.rotation_matrix() * j.axis;
    if (j.kind == JointKind::kRevolute) {
      jac.block<3, 1>(0, col) = axis.cross(ee.translation() - f.translation());
      jac.block<3, 1>(3, col) = axis;
    } else {
      jac.block<3, 1>(0, col) = axis;
      jac.block<3, 1>(3, col).setZero();
    }
    ++col;
  }
  return jac;
}

IkResult SolveIk(const RobotModel& model, const RigidTransform& target,
                 const JointConfig& seed, const RigidTransform& base,
                 const IkParams& params) {
  CheckLength(model, seed);
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;

  IkResult best;
  double best_norm = std::numeric_limits<double>::infinity();
  JointConfig q = model.Clamp(seed);
  const double lambda2 = params.damping * params.damping;

  for (int it = 0;; ++it) {
    const RigidTransform ee = EndEffectorPose(model, q, base);
    Vec6 e;
    e.head<3>() = target.translation() - ee.translation();
    e.tail<3>() = RotationError(target.rotation(), ee.rotation());
    const double pos_err = e.head<3>().norm();
    const double rot_err = RotationDistance(target.rotation(), ee.rotation());
    const double norm = e.norm();
    if (norm < best_norm) {
      best_norm = norm;
      best.config = q;
      best.position_error_m = pos_err;
      best.orientation_error_rad = rot_err;
      best.iterations = it;
    }
    if (pos_err < params.pos_tol && rot_err < params.rot_tol) {
      best.config = q;
      best.position_error_m = pos_err;
      best.orientation_error_rad = rot_err;
      best.iterations = it;
      best.converged = true;
      return best;
    }
    if (it >= params.max_iterations) break;

    const double pos_scale = pos_err > params.max_position_step
                                 ? params.max_position_step / pos_err
                                 : 1.0;
    const double rot_norm = e.tail<3>().norm();
    const double rot_scale = rot_norm > params.max_rotation_step
                                 ? params.max_rotation_step / rot_norm
                                 : 1.0;
    e.head<3>() *= pos_scale;
    e.tail<3>() *= rot_scale;

    const auto jac = Jacobian(model, q, base);
    const Mat6 a = jac * jac.transpose() + lambda2 * Mat6::Identity();
    const JointConfig dq = jac.transpose() * a.ldlt().solve(e);
    q = model.Clamp(q + dq);
  }
  best.converged = best.position_error_m < params.pos_tol &&
                   best.orientation_error_rad < params.rot_tol;
  return best;
}

}  // namespace crosspaint

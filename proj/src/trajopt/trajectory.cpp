#include "jumprl/trajopt/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "jumprl/model/kinematics.hpp"

namespace jumprl {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& tok) {
  size_t pos = 0;
  const double v = std::stod(tok, &pos);
  if (pos != tok.size()) throw std::runtime_error("trajectory file: bad number '" + tok + "'");
  return v;
}

}  // namespace

const ControlRefs& ReferenceTrajectory::at_time(double t) const {
  int i = static_cast<int>(t / kSampleDt);
  i = std::max(0, std::min(i, size() - 1));
  return samples[i];
}

void extract_foot_refs(const ModelParams& p, const Vec7& q_d, const Vec7& qd_d,
                       std::array<Vec2, 2>& p_d, std::array<Vec2, 2>& v_d) {
  for (int f = 0; f < 2; ++f) {
    const Leg leg = f == 0 ? Leg::kFront : Leg::kRear;
    const double qh = q_d[hip_coord(leg)];
    const double qk = q_d[knee_coord(leg)];
    p_d[f] = foot_pos_hip(p, qh, qk);
    const Vec2 qd_leg(qd_d[hip_coord(leg)], qd_d[knee_coord(leg)]);
    v_d[f] = foot_jacobian_hip(p, qh, qk) * qd_leg;
  }
}

ReferenceTrajectory interpolate(const ModelParams& p, const KnotTrajectory& knots) {
  const int n = knots.num_knots();
  if (n < 2) throw std::invalid_argument("interpolate: need at least two knots");
  const int per_knot = static_cast<int>(std::lround(knots.schedule.h / ReferenceTrajectory::kSampleDt));

  ReferenceTrajectory out;
  out.target = knots.target;
  out.schedule = knots.schedule;
  out.samples.resize((n - 1) * per_knot + 1);
  for (int j = 0; j < out.size(); ++j) {
    int k = j / per_knot;
    double a = static_cast<double>(j - k * per_knot) / per_knot;
    if (k == n - 1) a = 0.0;  // final sample sits exactly on the last knot
    ControlRefs& r = out.samples[j];
    r.t = j * ReferenceTrajectory::kSampleDt;
    r.phase = knots.schedule.knot_phase(k);
    if (a == 0.0) {
      r.q_d = knots.q[k];
      r.qd_d = knots.qd[k];
      r.tau_d = knots.tau[k];
    } else {
      r.q_d = (1.0 - a) * knots.q[k] + a * knots.q[k + 1];
      r.qd_d = (1.0 - a) * knots.qd[k] + a * knots.qd[k + 1];
      r.tau_d = (1.0 - a) * knots.tau[k] + a * knots.tau[k + 1];
    }
    extract_foot_refs(p, r.q_d, r.qd_d, r.p_d, r.v_d);
  }
  return out;
}

std::string phase_name(PhaseLabel ph) {
  switch (ph) {
    case PhaseLabel::kDouble: return "double";
    case PhaseLabel::kSingle: return "single";
    case PhaseLabel::kFlight: return "flight";
  }
  throw std::logic_error("unknown phase label");
}

PhaseLabel phase_from_name(const std::string& name) {
  if (name == "double") return PhaseLabel::kDouble;
  if (name == "single") return PhaseLabel::kSingle;
  if (name == "flight") return PhaseLabel::kFlight;
  throw std::runtime_error("trajectory file: unknown phase '" + name + "'");
}

void save_trajectory(const ReferenceTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory file " + path);
  out << "# jump-trajectory distance=" << fmt(traj.target.distance)
      << " height=" << fmt(traj.target.height) << " t_double=" << fmt(traj.schedule.t_double)
      << " t_single=" << fmt(traj.schedule.t_single) << " t_flight=" << fmt(traj.schedule.t_flight)
      << " h=" << fmt(traj.schedule.h) << " samples=" << traj.size() << "\n";
  out << "# t q_d[7] qd_d[7] tau_d[4] p_d[fx fz rx rz] v_d[fx fz rx rz] phase\n";
  for (const ControlRefs& r : traj.samples) {
    out << fmt(r.t);
    for (int i = 0; i < kNumCoords; ++i) out << ' ' << fmt(r.q_d[i]);
    for (int i = 0; i < kNumCoords; ++i) out << ' ' << fmt(r.qd_d[i]);
    for (int i = 0; i < kNumJoints; ++i) out << ' ' << fmt(r.tau_d[i]);
    for (int f = 0; f < 2; ++f) out << ' ' << fmt(r.p_d[f].x()) << ' ' << fmt(r.p_d[f].y());
    for (int f = 0; f < 2; ++f) out << ' ' << fmt(r.v_d[f].x()) << ' ' << fmt(r.v_d[f].y());
    out << ' ' << phase_name(r.phase) << "\n";
  }
  if (!out) throw std::runtime_error("write failed for trajectory file " + path);
}

ReferenceTrajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file " + path);

  std::string header;
  if (!std::getline(in, header) || header.rfind("# jump-trajectory", 0) != 0)
    throw std::runtime_error("trajectory file " + path + ": missing header");

  ReferenceTrajectory traj;
  int expected = -1;
  {
    std::istringstream hs(header.substr(std::string("# jump-trajectory").size()));
    std::string kv;
    while (hs >> kv) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("trajectory file: malformed header entry '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      if (key == "distance") traj.target.distance = parse_double(val);
      else if (key == "height") traj.target.height = parse_double(val);
      else if (key == "t_double") traj.schedule.t_double = parse_double(val);
      else if (key == "t_single") traj.schedule.t_single = parse_double(val);
      else if (key == "t_flight") traj.schedule.t_flight = parse_double(val);
      else if (key == "h") traj.schedule.h = parse_double(val);
      else if (key == "samples") expected = std::stoi(val);
      else throw std::runtime_error("trajectory file: unknown header key '" + key + "'");
    }
  }
  if (expected < 2) throw std::runtime_error("trajectory file: bad sample count in header");

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.size() != 28)
      throw std::runtime_error("trajectory file: expected 28 columns, got " +
                               std::to_string(tok.size()));
    ControlRefs r;
    int i = 0;
    r.t = parse_double(tok[i++]);
    for (int c = 0; c < kNumCoords; ++c) r.q_d[c] = parse_double(tok[i++]);
    for (int c = 0; c < kNumCoords; ++c) r.qd_d[c] = parse_double(tok[i++]);
    for (int c = 0; c < kNumJoints; ++c) r.tau_d[c] = parse_double(tok[i++]);
    for (int f = 0; f < 2; ++f) {
      r.p_d[f].x() = parse_double(tok[i++]);
      r.p_d[f].y() = parse_double(tok[i++]);
    }
    for (int f = 0; f < 2; ++f) {
      r.v_d[f].x() = parse_double(tok[i++]);
      r.v_d[f].y() = parse_double(tok[i++]);
    }
    r.phase = phase_from_name(tok[i]);
    traj.samples.push_back(r);
  }
  if (traj.size() != expected)
    throw std::runtime_error("trajectory file: header announces " + std::to_string(expected) +
                             " samples but " + std::to_string(traj.size()) + " rows follow");
  return traj;
}

}  // namespace jumprl

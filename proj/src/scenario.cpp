#include "stlplan/scenario.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stlplan/rng.hpp"

namespace stlplan {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void collect_preds(const Formula& f,
                   std::vector<std::shared_ptr<const Predicate>>& out) {
  if (f.kind == FKind::Pred) out.push_back(f.pred);
  for (const Formula& k : f.kids) collect_preds(k, out);
}

std::uint64_t hash_string(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) h = splitmix64(h ^ c);
  return h;
}

std::string fmt(double v) { return print_double(v); }

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario JSON: ") + e.what());
  }
  require(j.is_object(), "scenario must be a JSON object");

  Scenario sc;
  sc.name = j.value("name", std::string("scenario"));
  require(j.contains("formula") && j["formula"].is_string(),
          "scenario needs a \"formula\" string");
  sc.formula_text = j["formula"].get<std::string>();
  sc.formula = parse_formula(sc.formula_text);

  require(j.contains("robots") && j["robots"].is_array() && !j["robots"].empty(),
          "scenario needs a non-empty \"robots\" array");
  int max_id = 0;
  for (const auto& rj : j["robots"]) {
    require(rj.is_object() && rj.contains("id"), "each robot needs an \"id\"");
    RobotSpec r;
    r.id = rj["id"].get<int>();
    require(r.id >= 1, "robot ids start at 1");
    require(rj.contains("x0") && rj["x0"].is_array(), "robot needs an \"x0\" array");
    r.x0 = rj["x0"].get<std::vector<double>>();
    require(!r.x0.empty() && r.x0.size() <= static_cast<size_t>(kMaxDim),
            "x0 must have 1.." + std::to_string(kMaxDim) + " components");
    require(rj.contains("lo") && rj.contains("hi"), "robot needs \"lo\" and \"hi\" box arrays");
    r.lo = rj["lo"].get<std::vector<double>>();
    r.hi = rj["hi"].get<std::vector<double>>();
    require(r.lo.size() == r.x0.size() && r.hi.size() == r.x0.size(),
            "lo/hi must match the x0 dimension");
    for (size_t k = 0; k < r.lo.size(); ++k)
      require(r.lo[k] < r.hi[k], "workspace box must have positive extent");
    sc.robots.push_back(std::move(r));
    max_id = std::max(max_id, sc.robots.back().id);
  }

  sc.params.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("params")) {
    const auto& pj = j["params"];
    require(pj.is_object(), "\"params\" must be an object");
    sc.params.delta = pj.value("delta", sc.params.delta);
    sc.params.eta = pj.value("eta", sc.params.eta);
    sc.params.L = pj.value("L", sc.params.L);
    sc.params.Lp = pj.value("Lp", sc.params.Lp);
    sc.params.attempts = pj.value("attempts", sc.params.attempts);
    sc.params.dt = pj.value("dt", sc.params.dt);
    sc.params.time_limit_s = pj.value("time_limit_s", sc.params.time_limit_s);
    sc.params.parallel = pj.value("parallel", sc.params.parallel);
    require(sc.params.delta > 0, "delta must be positive");
    require(sc.params.eta >= 0, "eta must be non-negative");
    require(sc.params.L >= 1 && sc.params.Lp >= 1 && sc.params.attempts >= 1,
            "L, Lp and attempts must be at least 1");
    require(sc.params.dt > 0, "dt must be positive");
    require(sc.params.time_limit_s >= 0, "time_limit_s must be non-negative");
  }

  std::vector<int> dims(max_id + 1, 0);
  for (const RobotSpec& r : sc.robots) {
    require(dims[r.id] == 0, "duplicate robot id x" + std::to_string(r.id));
    dims[r.id] = static_cast<int>(r.x0.size());
  }
  std::vector<std::shared_ptr<const Predicate>> preds;
  collect_preds(sc.formula, preds);
  for (const auto& p : preds) {
    int width;
    try {
      width = check_shape(p->h, dims);
    } catch (const EvalError& e) {
      throw std::invalid_argument(e.what());
    }
    require(width == 1, "predicate must be scalar-valued: " + p->text);
    require(!p->owners.empty(), "predicate must reference a robot: " + p->text);
    require(p->owners.size() <= 2,
            "a predicate may couple at most two robots: " + p->text);
  }

  std::uint64_t h = splitmix64(0x7c0ffee5u);
  h = hash_string(h, print_formula(sc.formula));
  for (const RobotSpec& r : sc.robots) {
    h = splitmix64(h ^ static_cast<std::uint64_t>(r.id));
    for (double v : r.x0) h = hash_string(h, fmt(v));
    for (double v : r.lo) h = hash_string(h, fmt(v));
    for (double v : r.hi) h = hash_string(h, fmt(v));
  }
  for (double v : {sc.params.delta, sc.params.eta, sc.params.dt})
    h = hash_string(h, fmt(v));
  h = splitmix64(h ^ static_cast<std::uint64_t>(sc.params.L));
  h = splitmix64(h ^ static_cast<std::uint64_t>(sc.params.Lp));
  h = splitmix64(h ^ static_cast<std::uint64_t>(sc.params.attempts));
  sc.hash = h;
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void write_trajectory(const std::string& path, const Trajectory& tr,
                      const std::map<std::string, std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
  out << "# stlplan trajectory\n";
  for (const auto& [k, v] : header) out << "# " << k << ": " << v << "\n";
  out << "# columns: robot t c0 c1 ...\n";
  for (const auto& [r, verts] : tr.tracks)
    for (const Vertex& v : verts) {
      out << r << ' ' << fmt(v.t);
      for (double c : v.x) out << ' ' << fmt(c);
      out << '\n';
    }
  if (!out) throw std::runtime_error("failed writing trajectory file: " + path);
}

TrajectoryFile read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trajectory file: " + path);
  TrajectoryFile tf;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto colon = line.find(':');
      if (colon != std::string::npos) {
        std::string key = line.substr(1, colon - 1);
        std::string val = line.substr(colon + 1);
        auto trim = [](std::string& s) {
          s.erase(0, s.find_first_not_of(" \t"));
          s.erase(s.find_last_not_of(" \t\r") + 1);
        };
        trim(key);
        trim(val);
        if (!key.empty()) tf.header[key] = val;
      }
      continue;
    }
    std::istringstream row(line);
    int robot;
    double t;
    if (!(row >> robot >> t))
      throw std::invalid_argument("trajectory line " + std::to_string(lineno) +
                                  ": expected 'robot t c0 ...'");
    std::vector<double> x;
    double c;
    while (row >> c) x.push_back(c);
    if (x.empty())
      throw std::invalid_argument("trajectory line " + std::to_string(lineno) +
                                  ": waypoint has no coordinates");
    auto& track = tf.trajectory.tracks[robot];
    if (!track.empty()) {
      if (track.back().x.size() != x.size())
        throw std::invalid_argument("trajectory line " + std::to_string(lineno) +
                                    ": inconsistent dimension for robot " +
                                    std::to_string(robot));
      if (t <= track.back().t)
        throw std::invalid_argument("trajectory line " + std::to_string(lineno) +
                                    ": times must increase per robot");
    }
    track.push_back({t, std::move(x)});
  }
  if (tf.trajectory.tracks.empty())
    throw std::invalid_argument("trajectory file has no waypoints: " + path);
  return tf;
}

namespace {

json json_finite(double v) {
  if (std::isnan(v)) return nullptr;
  if (v > 1e300) return 1e300;
  if (v < -1e300) return -1e300;
  return v;
}

}  // namespace

std::string report_json(const Scenario& sc, const PlanResult& res) {
  char hash_hex[20];
  std::snprintf(hash_hex, sizeof hash_hex, "%016" PRIx64, sc.hash);
  json j;
  j["scenario"] = sc.name;
  j["scenario_hash"] = hash_hex;
  j["seed"] = sc.params.seed;
  j["satisfied"] = res.satisfied;
  j["branch"] = res.branch;
  j["branch_formula"] = res.branch_text;
  j["attempts"] = res.attempts_used;
  j["iterations"] = res.iterations;
  j["messages"] = res.messages;
  j["wall_s"] = res.wall_s;
  if (!res.note.empty()) j["note"] = res.note;
  j["paths"] = json::array();
  for (const PathReport& p : res.paths) {
    json pj;
    pj["robot"] = p.robot;
    pj["path"] = p.path_index;
    pj["predicate"] = p.leaf;
    pj["satisfied"] = p.satisfied;
    pj["witness"] = json_finite(p.witness);
    pj["vd"] = {json_finite(p.vd_lo), json_finite(p.vd_hi)};
    pj["kind"] = p.f_sampled ? "F_sampled" : "G_covered";
    pj["nodes"] = p.chain_node_ids;
    j["paths"].push_back(std::move(pj));
  }
  return j.dump(2) + "\n";
}

std::string monitor_json(const MonitorReport& rep) {
  json j;
  j["rho"] = json_finite(rep.rho);
  j["satisfied"] = rep.satisfied;
  j["predicates"] = json::array();
  for (const PredicateStat& p : rep.predicates) {
    json pj;
    pj["text"] = p.text;
    pj["h_min"] = json_finite(p.h_min);
    pj["h_max"] = json_finite(p.h_max);
    j["predicates"].push_back(std::move(pj));
  }
  return j.dump(2) + "\n";
}

}  // namespace stlplan

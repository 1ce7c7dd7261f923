#include "dtfdd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string_view>

namespace dtfdd {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double to_double(const std::string& path, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || v.empty()) fail(path, "expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& path, const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || v.empty()) {
    fail(path, "expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

std::size_t to_size(const std::string& path, const std::string& v) {
  return static_cast<std::size_t>(to_u64(path, v));
}

std::string fmt(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

std::string fmt(std::uint64_t x) { return std::to_string(x); }

NodeKind to_kind(const std::string& path, const std::string& v) {
  if (v == "gue") return NodeKind::Gue;
  if (v == "uav") return NodeKind::Uav;
  fail(path, "unknown UE type '" + v + "' (expected gue or uav)");
}

std::vector<NodeKind> to_kinds(const std::string& path, const std::string& v) {
  std::vector<NodeKind> out;
  if (trim(v).empty()) return out;
  for (const auto& t : split(v, ',')) out.push_back(to_kind(path, t));
  return out;
}

std::string fmt_kinds(const std::vector<NodeKind>& kinds) {
  std::string s;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) s += ",";
    s += kinds[i] == NodeKind::Uav ? "uav" : "gue";
  }
  return s;
}

struct Field {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

/// Raw topology inputs resolved after all keys are read.
struct PendingTopology {
  std::optional<std::pair<std::size_t, std::size_t>> grid;
  std::optional<std::vector<Position3D>> positions;
  std::optional<std::vector<NodeKind>> pattern;
  std::optional<std::vector<std::vector<NodeKind>>> cells;
  bool gue_dl_norm_set = false;
  bool uav_dl_norm_set = false;
};

std::vector<Position3D> grid_positions(std::size_t rows, std::size_t cols, double area) {
  std::vector<Position3D> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out.push_back({(static_cast<double>(c) + 0.5) * area / static_cast<double>(cols),
                     (static_cast<double>(r) + 0.5) * area / static_cast<double>(rows), 0.0});
    }
  }
  return out;
}

void bind_pathloss(std::map<std::string, Field>& f, ChannelParams& ch, LinkClass cls) {
  const std::string sec = std::string("pathloss.") + to_string(cls) + ".";
  auto num = [&](const std::string& key, double PathLossClass::*m) {
    const std::string path = sec + key;
    f[path] = {[&ch, cls, m, path](const std::string& v) { ch.pathloss[cls].*m = to_double(path, v); },
               [&ch, cls, m] { return fmt(ch.pathloss[cls].*m); }};
  };
  num("a_los_db", &PathLossClass::a_los_db);
  num("alpha_los", &PathLossClass::alpha_los);
  num("a_nlos_db", &PathLossClass::a_nlos_db);
  num("alpha_nlos", &PathLossClass::alpha_nlos);
  num("nlos_height_slope", &PathLossClass::nlos_height_slope);
}

void bind_slice(std::map<std::string, Field>& f, SliceProfile& sl, const std::string& name,
                bool& dl_norm_set) {
  const std::string sec = "slice." + name + ".";
  auto num = [&](const std::string& key, double SliceProfile::*m) {
    const std::string path = sec + key;
    f[path] = {[&sl, m, path](const std::string& v) { sl.*m = to_double(path, v); },
               [&sl, m] { return fmt(sl.*m); }};
  };
  num("lambda_ul_kb", &SliceProfile::lambda_ul_kb);
  num("lambda_dl_kb", &SliceProfile::lambda_dl_kb);
  num("d_max", &SliceProfile::d_max);
  num("buffer_kb", &SliceProfile::q_max_ul_kb);
  const std::string path = sec + "dl_norm_kb";
  f[path] = {[&sl, &dl_norm_set, path](const std::string& v) {
               sl.dl_norm_kb = to_double(path, v);
               dl_norm_set = true;
             },
             [&sl] { return fmt(sl.dl_norm_kb); }};
}

std::map<std::string, Field> bind_fields(ExperimentConfig& c, PendingTopology& pend) {
  std::map<std::string, Field> f;
  auto num = [&f](const std::string& path, double& ref) {
    f[path] = {[&ref, path](const std::string& v) { ref = to_double(path, v); },
               [&ref] { return fmt(ref); }};
  };
  auto count = [&f](const std::string& path, std::size_t& ref) {
    f[path] = {[&ref, path](const std::string& v) { ref = to_size(path, v); },
               [&ref] { return fmt(static_cast<std::uint64_t>(ref)); }};
  };

  TopologyConfig& t = c.topology;
  num("topology.area_m", t.area_m);
  num("topology.bs_height_m", t.bs_height_m);
  num("topology.ue_distance_m", t.ue_distance_m);
  num("topology.gue_height_m", t.gue_height_m);
  num("topology.uav_height_m", t.uav_height_m);
  num("topology.uav_orbit_radius_m", t.uav_orbit_radius_m);
  count("topology.uav_waypoints", t.uav_waypoints);
  f["topology.bs_grid"] = {
      [&pend](const std::string& v) {
        const auto parts = split(v, 'x');
        if (parts.size() != 2) fail("topology.bs_grid", "expected ROWSxCOLS, got '" + v + "'");
        pend.grid = {to_size("topology.bs_grid", parts[0]), to_size("topology.bs_grid", parts[1])};
      },
      nullptr};
  f["topology.bs_positions"] = {
      [&pend](const std::string& v) {
        std::vector<Position3D> ps;
        for (const auto& item : split(v, '|')) {
          const auto xy = split(item, ',');
          if (xy.size() != 2) fail("topology.bs_positions", "expected x,y pairs separated by |");
          ps.push_back({to_double("topology.bs_positions", xy[0]),
                        to_double("topology.bs_positions", xy[1]), 0.0});
        }
        pend.positions = ps;
      },
      [&t] {
        std::string s;
        for (std::size_t i = 0; i < t.bs_positions.size(); ++i) {
          if (i) s += " | ";
          s += fmt(t.bs_positions[i].x) + "," + fmt(t.bs_positions[i].y);
        }
        return s;
      }};
  f["topology.ue_types"] = {
      [&pend](const std::string& v) { pend.pattern = to_kinds("topology.ue_types", v); },
      nullptr};
  f["topology.cell_ue_types"] = {
      [&pend](const std::string& v) {
        std::vector<std::vector<NodeKind>> cells;
        for (const auto& item : split(v, '|')) cells.push_back(to_kinds("topology.cell_ue_types", item));
        pend.cells = cells;
      },
      [&t] {
        std::string s;
        for (std::size_t i = 0; i < t.cell_ue_kinds.size(); ++i) {
          if (i) s += " | ";
          s += fmt_kinds(t.cell_ue_kinds[i]);
        }
        return s;
      }};
  f["topology.association"] = {
      [&t](const std::string& v) {
        if (v == "nearest") t.association = Association::Nearest;
        else if (v == "generator") t.association = Association::Generator;
        else fail("topology.association", "expected nearest or generator, got '" + v + "'");
      },
      [&t] { return std::string(t.association == Association::Nearest ? "nearest" : "generator"); }};

  RadioConfig& r = c.radio;
  count("radio.subchannels", r.n_subchannels);
  count("radio.subframes", r.n_subframes);
  num("radio.bs_power_dbm", r.bs_power_dbm);
  num("radio.ue_power_dbm", r.ue_power_dbm);
  num("radio.noise_bs_dbm", r.noise_bs_dbm);
  num("radio.noise_gue_dbm", r.noise_gue_dbm);
  num("radio.noise_uav_dbm", r.noise_uav_dbm);
  num("radio.sinr_threshold_ue_db", r.sinr_threshold_ue_db);
  num("radio.sinr_threshold_bs_db", r.sinr_threshold_bs_db);
  num("radio.bandwidth_hz", r.bandwidth_hz);
  num("radio.subframe_s", r.subframe_s);

  num("channel.c1", c.channel.env.c1);
  num("channel.c2", c.channel.env.c2);
  num("channel.c3", c.channel.env.c3);
  f["channel.fading_m"] = {
      [&c](const std::string& v) { c.channel.env.m = static_cast<int>(to_size("channel.fading_m", v)); },
      [&c] { return std::to_string(c.channel.env.m); }};
  for (LinkClass cls : {LinkClass::BsGue, LinkClass::BsUav, LinkClass::BsBs, LinkClass::UavUav,
                        LinkClass::GueGue, LinkClass::GueUav}) {
    bind_pathloss(f, c.channel, cls);
  }

  bind_slice(f, c.gue_slice, "gue", pend.gue_dl_norm_set);
  bind_slice(f, c.uav_slice, "uav", pend.uav_dl_norm_set);

  LearningConfig& l = c.learning;
  AgentConfig& a = l.agent;
  count("learning.epochs", l.epochs);
  count("learning.steps", l.steps);
  num("learning.actor_lr", a.actor_lr);
  num("learning.critic_lr", a.critic_lr);
  num("learning.gamma", a.gamma);
  num("learning.kappa", a.kappa);
  count("learning.k", a.k);
  count("learning.batch", a.batch);
  count("learning.buffer", a.buffer_capacity);
  num("learning.ou_theta", a.ou_theta);
  num("learning.ou_sigma", a.ou_sigma);
  num("learning.ou_mu", a.ou_mu);
  num("learning.ou_sigma_decay", a.ou_sigma_decay);
  f["learning.penalty_kb"] = {
      [&l](const std::string& v) {
        if (v == "auto") l.penalty_kb.reset();
        else l.penalty_kb = to_double("learning.penalty_kb", v);
      },
      [&l] { return l.penalty_kb ? fmt(*l.penalty_kb) : std::string("auto"); }};
  count("learning.window", l.window);
  f["learning.hidden"] = {
      [&a](const std::string& v) {
        a.hidden.clear();
        for (const auto& s : split(v, ',')) a.hidden.push_back(to_size("learning.hidden", s));
      },
      [&a] {
        std::string s;
        for (std::size_t i = 0; i < a.hidden.size(); ++i) {
          if (i) s += ",";
          s += std::to_string(a.hidden[i]);
        }
        return s;
      }};
  f["learning.exchange_period"] = {
      [&l](const std::string& v) {
        if (v == "never") l.exchange_period.reset();
        else l.exchange_period = to_size("learning.exchange_period", v);
      },
      [&l] { return l.exchange_period ? std::to_string(*l.exchange_period) : std::string("never"); }};

  num("federation.radius_m", c.federation.radius_m);
  f["federation.edges"] = {
      [&c](const std::string& v) {
        c.federation.edges.clear();
        if (trim(v).empty()) return;
        for (const auto& e : split(v, ',')) {
          const auto ends = split(e, '-');
          if (ends.size() != 2) fail("federation.edges", "expected a-b pairs, got '" + e + "'");
          c.federation.edges.emplace_back(to_size("federation.edges", ends[0]),
                                          to_size("federation.edges", ends[1]));
        }
      },
      [&c] {
        std::string s;
        for (std::size_t i = 0; i < c.federation.edges.size(); ++i) {
          if (i) s += ", ";
          s += std::to_string(c.federation.edges[i].first) + "-" +
               std::to_string(c.federation.edges[i].second);
        }
        return s;
      }};

  f["static.dl_subframes"] = {
      [&c](const std::string& v) {
        if (v == "auto") c.static_dl_subframes.reset();
        else c.static_dl_subframes = to_size("static.dl_subframes", v);
      },
      [&c] {
        return c.static_dl_subframes ? std::to_string(*c.static_dl_subframes) : std::string("auto");
      }};

  f["run.policy"] = {
      [&c](const std::string& v) {
        try {
          c.policy = parse_policy_kind(v);
        } catch (const std::invalid_argument& e) {
          fail("run.policy", e.what());
        }
      },
      [&c] { return std::string(to_string(c.policy)); }};
  f["run.seed"] = {[&c](const std::string& v) { c.seed = to_u64("run.seed", v); },
                   [&c] { return fmt(c.seed); }};
  return f;
}

void apply_penalties(ExperimentConfig& c) {
  for (SliceProfile* sl : {&c.gue_slice, &c.uav_slice}) {
    const double kb = c.learning.penalty_kb.value_or(0.5 * (sl->lambda_ul_kb + sl->lambda_dl_kb));
    sl->penalty_bits = static_cast<double>(kb_to_bits(kb));
  }
}

void finalize(ExperimentConfig& c, const PendingTopology& pend) {
  TopologyConfig& t = c.topology;
  if (pend.positions) {
    t.bs_positions = *pend.positions;
  } else if (pend.grid) {
    t.bs_positions = grid_positions(pend.grid->first, pend.grid->second, t.area_m);
  }
  if (pend.cells) {
    t.cell_ue_kinds = *pend.cells;
  } else if (pend.pattern || pend.positions || pend.grid) {
    const std::vector<NodeKind> pattern =
        pend.pattern ? *pend.pattern
                     : std::vector<NodeKind>{NodeKind::Gue, NodeKind::Gue, NodeKind::Uav};
    t.cell_ue_kinds.assign(t.bs_positions.size(), pattern);
  }
  if (!pend.gue_dl_norm_set) c.gue_slice.dl_norm_kb = c.gue_slice.q_max_ul_kb;
  if (!pend.uav_dl_norm_set) c.uav_slice.dl_norm_kb = c.uav_slice.q_max_ul_kb;
  apply_penalties(c);
}

bool uses_federation(PolicyKind k) {
  return k == PolicyKind::Fwddpg || k == PolicyKind::MyopicDTfdd || k == PolicyKind::DTdd;
}

void require_positive(const std::string& path, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be a positive number, got " + fmt(v));
}

void require_finite(const std::string& path, double v) {
  if (!std::isfinite(v)) fail(path, "must be finite");
}

void require_unit(const std::string& path, double v) {
  if (!(v >= 0.0 && v <= 1.0)) fail(path, "must lie in [0, 1], got " + fmt(v));
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.topology.bs_positions = grid_positions(2, 5, c.topology.area_m);
  c.topology.cell_ue_kinds.assign(c.topology.bs_positions.size(),
                                  {NodeKind::Gue, NodeKind::Gue, NodeKind::Uav});

  auto& pl = c.channel.pathloss;
  pl[LinkClass::BsGue] = {34.02, 2.2, 19.56, 3.9, 0.0};
  pl[LinkClass::BsUav] = {34.02, 2.2, 20.96, 4.6, -0.7};
  pl[LinkClass::BsBs] = {38.4, 2.0, 49.36, 4.0, 0.0};
  pl[LinkClass::UavUav] = {34.02, 2.2, 20.96, 4.6, -0.7};
  pl[LinkClass::GueGue] = {38.4, 2.0, 49.36, 4.0, 0.0};
  pl[LinkClass::GueUav] = pl[LinkClass::UavUav];

  c.gue_slice = {150.0, 200.0, 0.3, 250.0, 0.0, 250.0};
  c.uav_slice = {50.0, 80.0, 0.1, 150.0, 0.0, 150.0};
  apply_penalties(c);
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg = default_config();
  PendingTopology pend;
  auto fields = bind_fields(cfg, pend);

  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string s = trim(line);
    if (s.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      const std::string prefix = section + ".";
      const auto known = fields.lower_bound(prefix);
      if (known == fields.end() || known->first.compare(0, prefix.size(), prefix) != 0) {
        throw ConfigError(where + ": unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    const std::string path = section.empty() ? key : section + "." + key;
    auto it = fields.find(path);
    if (it == fields.end()) throw ConfigError(where + ": unknown key '" + path + "'");
    if (auto prev = seen.find(path); prev != seen.end()) {
      throw ConfigError(where + ": duplicate key '" + path + "' (first set on line " +
                        std::to_string(prev->second) + ")");
    }
    seen.emplace(path, lineno);
    it->second.set(value);
  }
  finalize(cfg, pend);
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
  const TopologyConfig& t = c.topology;
  require_positive("topology.area_m", t.area_m);
  require_positive("topology.bs_height_m", t.bs_height_m);
  require_positive("topology.gue_height_m", t.gue_height_m);
  require_positive("topology.uav_height_m", t.uav_height_m);
  if (!(t.ue_distance_m >= 0.0)) fail("topology.ue_distance_m", "must be >= 0");
  if (!(t.uav_orbit_radius_m >= 0.0)) fail("topology.uav_orbit_radius_m", "must be >= 0");
  if (t.uav_waypoints == 0) fail("topology.uav_waypoints", "must be >= 1");
  if (t.bs_positions.empty()) fail("topology.bs_positions", "at least one BS required");
  for (std::size_t b = 0; b < t.bs_positions.size(); ++b) {
    const auto& p = t.bs_positions[b];
    if (!(p.x >= 0.0 && p.x <= t.area_m && p.y >= 0.0 && p.y <= t.area_m)) {
      fail("topology.bs_positions", "BS " + std::to_string(b) + " lies outside the area");
    }
  }
  if (t.cell_ue_kinds.size() != t.bs_positions.size()) {
    fail("topology.cell_ue_types", "expected one UE list per BS (" +
                                       std::to_string(t.bs_positions.size()) + "), got " +
                                       std::to_string(t.cell_ue_kinds.size()));
  }

  const RadioConfig& r = c.radio;
  if (r.n_subchannels == 0) fail("radio.subchannels", "must be >= 1");
  if (r.n_subframes == 0) fail("radio.subframes", "must be >= 1");
  require_finite("radio.bs_power_dbm", r.bs_power_dbm);
  require_finite("radio.ue_power_dbm", r.ue_power_dbm);
  require_finite("radio.noise_bs_dbm", r.noise_bs_dbm);
  require_finite("radio.noise_gue_dbm", r.noise_gue_dbm);
  require_finite("radio.noise_uav_dbm", r.noise_uav_dbm);
  require_finite("radio.sinr_threshold_ue_db", r.sinr_threshold_ue_db);
  require_finite("radio.sinr_threshold_bs_db", r.sinr_threshold_bs_db);
  require_positive("radio.bandwidth_hz", r.bandwidth_hz);
  require_positive("radio.subframe_s", r.subframe_s);

  require_positive("channel.c1", c.channel.env.c1);
  require_positive("channel.c2", c.channel.env.c2);
  require_positive("channel.c3", c.channel.env.c3);
  if (c.channel.env.m < 1) fail("channel.fading_m", "must be >= 1");
  for (const auto& [cls, pl] : c.channel.pathloss) {
    const std::string sec = std::string("pathloss.") + to_string(cls) + ".";
    require_finite(sec + "a_los_db", pl.a_los_db);
    require_finite(sec + "a_nlos_db", pl.a_nlos_db);
    require_positive(sec + "alpha_los", pl.alpha_los);
    require_finite(sec + "nlos_height_slope", pl.nlos_height_slope);
    if (!pl.height_dependent()) require_positive(sec + "alpha_nlos", pl.alpha_nlos);
  }

  for (const auto& [name, sl] : {std::pair<const char*, const SliceProfile&>{"gue", c.gue_slice},
                                 std::pair<const char*, const SliceProfile&>{"uav", c.uav_slice}}) {
    const std::string sec = std::string("slice.") + name + ".";
    if (!(sl.lambda_ul_kb >= 0.0) || !std::isfinite(sl.lambda_ul_kb)) fail(sec + "lambda_ul_kb", "must be >= 0");
    if (!(sl.lambda_dl_kb >= 0.0) || !std::isfinite(sl.lambda_dl_kb)) fail(sec + "lambda_dl_kb", "must be >= 0");
    require_unit(sec + "d_max", sl.d_max);
    require_positive(sec + "buffer_kb", sl.q_max_ul_kb);
    require_positive(sec + "dl_norm_kb", sl.dl_norm_kb);
  }

  const LearningConfig& l = c.learning;
  const AgentConfig& a = l.agent;
  if (l.epochs == 0) fail("learning.epochs", "must be >= 1");
  if (l.steps == 0) fail("learning.steps", "must be >= 1");
  require_positive("learning.actor_lr", a.actor_lr);
  require_positive("learning.critic_lr", a.critic_lr);
  require_unit("learning.gamma", a.gamma);
  if (!(a.kappa > 0.0 && a.kappa <= 1.0)) fail("learning.kappa", "must lie in (0, 1]");
  if (a.k == 0) fail("learning.k", "must be >= 1");
  if (a.batch == 0) fail("learning.batch", "must be >= 1");
  if (a.buffer_capacity < a.batch) fail("learning.buffer", "must hold at least one minibatch");
  if (a.hidden.empty()) fail("learning.hidden", "at least one hidden layer required");
  for (std::size_t h : a.hidden) {
    if (h == 0) fail("learning.hidden", "layer widths must be >= 1");
  }
  if (!(a.ou_theta >= 0.0)) fail("learning.ou_theta", "must be >= 0");
  if (!(a.ou_sigma >= 0.0)) fail("learning.ou_sigma", "must be >= 0");
  require_finite("learning.ou_mu", a.ou_mu);
  if (!(a.ou_sigma_decay > 0.0 && a.ou_sigma_decay <= 1.0)) {
    fail("learning.ou_sigma_decay", "must lie in (0, 1]");
  }
  if (l.penalty_kb && (!(*l.penalty_kb >= 0.0) || !std::isfinite(*l.penalty_kb))) {
    fail("learning.penalty_kb", "must be >= 0 or 'auto'");
  }
  if (l.window == 0) fail("learning.window", "must be >= 1");
  if (l.exchange_period && *l.exchange_period == 0) {
    fail("learning.exchange_period", "must be >= 1 or 'never'");
  }

  const std::size_t n_bs = t.bs_positions.size();
  require_positive("federation.radius_m", c.federation.radius_m);
  for (const auto& [x, y] : c.federation.edges) {
    if (x >= n_bs || y >= n_bs) fail("federation.edges", "edge references a missing BS");
    if (x == y) fail("federation.edges", "self-loops are not allowed");
  }
  if (c.static_dl_subframes && *c.static_dl_subframes > r.n_subframes) {
    fail("static.dl_subframes", "exceeds the number of subframes");
  }

  const Topology topo = build_topology(c);
  const auto cells = topo.ues_by_bs();
  for (std::size_t b = 0; b < cells.size(); ++b) {
    if (cells[b].size() > r.n_subchannels) {
      fail("radio.subchannels", "N = " + std::to_string(r.n_subchannels) + " is less than the " +
                                    std::to_string(cells[b].size()) + " UEs served by BS " +
                                    std::to_string(b));
    }
  }
  try {
    (void)action_space_size(r.n_subchannels, [&] {
      std::size_t m = 0;
      for (const auto& cell : cells) m = std::max(m, cell.size());
      return m;
    }(), r.n_subframes);
  } catch (const std::overflow_error&) {
    fail("radio.subchannels", "action space does not fit in 64 bits");
  }

  if (uses_federation(c.policy) && n_bs > 1 && !build_federation_graph(c).connected()) {
    fail(c.federation.edges.empty() ? "federation.radius_m" : "federation.edges",
         "the BS graph is disconnected");
  }
}

Topology build_topology(const ExperimentConfig& cfg) {
  const TopologyConfig& t = cfg.topology;
  Topology topo;
  for (const auto& p : t.bs_positions) topo.bs_positions.push_back({p.x, p.y, t.bs_height_m});
  for (std::size_t b = 0; b < t.cell_ue_kinds.size() && b < topo.bs_positions.size(); ++b) {
    const auto& kinds = t.cell_ue_kinds[b];
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) /
                           static_cast<double>(kinds.size());
      const double ax = topo.bs_positions[b].x + t.ue_distance_m * std::cos(angle);
      const double ay = topo.bs_positions[b].y + t.ue_distance_m * std::sin(angle);
      UeSite site;
      site.kind = kinds[i];
      site.serving_bs = b;
      site.trajectory =
          kinds[i] == NodeKind::Uav
              ? Trajectory::circle(ax, ay, t.uav_orbit_radius_m, t.uav_height_m, t.uav_waypoints)
              : Trajectory::stationary({ax, ay, t.gue_height_m});
      if (t.association == Association::Nearest) {
        const Position3D p0 = site.trajectory.waypoints().front();
        double best = INFINITY;
        for (std::size_t c = 0; c < topo.bs_positions.size(); ++c) {
          const double d = std::hypot(p0.x - topo.bs_positions[c].x, p0.y - topo.bs_positions[c].y);
          if (d < best) {
            best = d;
            site.serving_bs = c;
          }
        }
      }
      topo.ues.push_back(std::move(site));
    }
  }
  return topo;
}

LinkBudget build_link_budget(const RadioConfig& r) {
  LinkBudget lb;
  lb.p_bs = dbm_to_watts(r.bs_power_dbm);
  lb.p_ue = dbm_to_watts(r.ue_power_dbm);
  lb.n0w_bs = dbm_to_watts(r.noise_bs_dbm);
  lb.n0w_gue = dbm_to_watts(r.noise_gue_dbm);
  lb.n0w_uav = dbm_to_watts(r.noise_uav_dbm);
  lb.sinr_threshold_ue = db_to_linear(r.sinr_threshold_ue_db);
  lb.sinr_threshold_bs = db_to_linear(r.sinr_threshold_bs_db);
  lb.tau = r.subframe_s;
  lb.w = r.bandwidth_hz;
  return lb;
}

EnvConfig build_env_config(const ExperimentConfig& cfg) {
  EnvConfig e;
  e.topology = build_topology(cfg);
  e.channel = cfg.channel;
  e.budget = build_link_budget(cfg.radio);
  e.n_subchannels = cfg.radio.n_subchannels;
  e.n_subframes = cfg.radio.n_subframes;
  e.gue_slice = cfg.gue_slice;
  e.uav_slice = cfg.uav_slice;
  e.window = cfg.learning.window;
  return e;
}

BsGraph build_federation_graph(const ExperimentConfig& cfg) {
  const auto& ps = cfg.topology.bs_positions;
  if (cfg.federation.edges.empty()) {
    std::vector<Position3D> flat;
    for (const auto& p : ps) flat.push_back({p.x, p.y, cfg.topology.bs_height_m});
    return build_graph(flat, cfg.federation.radius_m);
  }
  BsGraph g(ps.size());
  for (const auto& [a, b] : cfg.federation.edges) {
    if (!g.has_edge(a, b)) g.add_edge(a, b);
  }
  return g;
}

double reward_scale(const RadioConfig& r) {
  return 1.0 / (static_cast<double>(r.n_subframes) * static_cast<double>(r.n_subchannels) *
                r.subframe_s * r.bandwidth_hz);
}

std::string render_config(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  PendingTopology pend;
  const auto fields = bind_fields(copy, pend);
  std::string out;
  std::string section;
  for (const auto& [path, field] : fields) {
    if (!field.get) continue;
    const auto dot = path.rfind('.');
    const std::string sec = path.substr(0, dot);
    if (sec != section) {
      if (!out.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += path.substr(dot + 1) + " = " + field.get() + "\n";
  }
  return out;
}

}  // namespace dtfdd

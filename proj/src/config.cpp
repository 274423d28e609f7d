#include "ccm/config.hpp"

#include <fstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ccm/errors.hpp"

namespace ccm {

namespace {

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
  const YAML::Node v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("config: key '{}' has the wrong type", key));
  }
}

void read_face(const YAML::Node& node, const char* key, Face& out) {
  std::string s;
  read(node, key, s);
  if (s.empty()) return;
  if (s == "inner")
    out = Face::inner;
  else if (s == "outer")
    out = Face::outer;
  else
    throw ConfigError("config: face must be inner or outer");
}

void read_env(const YAML::Node& node, const char* key, FaceEnvironment& env) {
  const YAML::Node n = node[key];
  if (!n) return;
  read(n, "t_env", env.t_env);
  read(n, "c_rad", env.c_rad);
}

void read_schedule(const YAML::Node& node, const char* key, Schedule& out) {
  const YAML::Node n = node[key];
  if (!n) return;
  if (n.IsScalar()) {
    out = Schedule::constant(n.as<double>());
    return;
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : n) {
    if (!row.IsSequence() || row.size() != 2) throw ConfigError(fmt::format("config: '{}' rows must be [t, value]", key));
    pts.emplace_back(row[0].as<double>(), row[1].as<double>());
  }
  if (pts.empty()) throw ConfigError(fmt::format("config: '{}' is empty", key));
  out = Schedule(std::move(pts));
}

SectionSpec read_section(const YAML::Node& n, const SectionSpec& base) {
  SectionSpec s = base;
  read(n, "name", s.name);
  std::string kind;
  read(n, "kind", kind);
  if (kind == "curvilinear")
    s.kind = SectionKind::curvilinear;
  else if (kind == "rectilinear")
    s.kind = SectionKind::rectilinear;
  else if (!kind.empty())
    throw ConfigError("config: section kind must be curvilinear or rectilinear");
  read(n, "r_m", s.r_m);
  read(n, "phi_span", s.phi_span);
  read(n, "z_p", s.z_p);
  read(n, "x_f", s.x_f);
  read(n, "nozzles", s.nozzles);
  read(n, "w", s.w);
  read(n, "nodes", s.nodes);
  read_env(n, "inner", s.inner);
  read_env(n, "outer", s.outer);
  return s;
}

SweepCell read_cell(const YAML::Node& n) {
  SweepCell c;
  std::string seq = "harmonic";
  read(n, "seq", seq);
  c.kind = parse_sequence(seq);
  read(n, "a", c.a);
  read(n, "b", c.b);
  read(n, "initial_factor", c.initial_factor);
  StepSequence{c.kind, c.a, c.b}.validate();
  return c;
}

void overlay(ExperimentConfig& cfg, const YAML::Node& root) {
  if (const YAML::Node m = root["machine"]) {
    read(m, "casting_speed", cfg.casting_speed);
    read(m, "pour_temperature", cfg.pour_temperature);
    read(m, "initial_strand_temperature", cfg.initial_strand_temperature);
    read(m, "initial_wall_temperature", cfg.initial_wall_temperature);
    std::string backend;
    read(m, "backend", backend);
    if (backend == "openmp")
      cfg.backend = kernels::Backend::openmp;
    else if (backend == "serial")
      cfg.backend = kernels::Backend::serial;
    else if (!backend.empty())
      throw ConfigError("config: backend must be serial or openmp");
    read(m, "material", cfg.material);
    if (const YAML::Node g = m["mould"]) {
      read(g, "l", cfg.mould.l);
      read(g, "big_z", cfg.mould.big_z);
      read(g, "d", cfg.mould.d);
      read(g, "z0", cfg.mould.z0);
      read(g, "delta", cfg.mould.delta);
    }
    if (const YAML::Node w = m["wall"]) {
      read(w, "c", cfg.wall.c);
      read(w, "rho", cfg.wall.rho);
      read(w, "lambda", cfg.wall.lambda);
    }
    if (const YAML::Node e = m["mould_env"]) {
      auto& me = cfg.mould_env;
      read(e, "lambda_gz", me.lambda_gz);
      read(e, "sigma_n", me.sigma_n);
      read(e, "c_n", me.c_n);
      read(e, "alpha_2", me.alpha_2);
      read(e, "alpha_3", me.alpha_3);
      read(e, "alpha_4", me.alpha_4);
      read(e, "t_os1", me.t_os1);
      read(e, "t_os2", me.t_os2);
      read(e, "t_os3", me.t_os3);
    }
    if (const YAML::Node w = m["water"]) {
      auto& wc = cfg.water;
      read(w, "c_w", wc.c_w);
      read(w, "s_ch", wc.s_ch);
      read(w, "v_water", wc.v_water);
      read(w, "p_i", wc.p_i);
      read(w, "p_e", wc.p_e);
      read(w, "alpha_1", wc.alpha_1);
      read(w, "alpha_e", wc.alpha_e);
      read(w, "t_e", wc.t_e);
      read_schedule(w, "inlet", wc.inlet);
      read(w, "initial", wc.initial);
    }
    if (const YAML::Node s = m["sections"]) {
      if (!s.IsSequence()) throw ConfigError("config: machine.sections must be a list");
      std::vector<SectionSpec> out;
      for (std::size_t k = 0; k < s.size(); ++k)
        out.push_back(read_section(s[k], k < cfg.sections.size() ? cfg.sections[k] : SectionSpec{}));
      cfg.sections = std::move(out);
    }
  }
  if (const YAML::Node g = root["grid"]) {
    read(g, "thickness_nodes", cfg.grid.thickness_nodes);
    read(g, "mould_nodes", cfg.grid.mould_nodes);
    read(g, "wall_nodes", cfg.grid.wall_nodes);
    read(g, "dt", cfg.grid.dt);
  }
  if (const YAML::Node t = root["truth"]) {
    read(t, "alpha_c", cfg.truth_alpha_c);
    read(t, "alpha_p", cfg.truth_alpha_p);
  }
  if (const YAML::Node p = root["prior"]) {
    read(p, "alpha_c", cfg.prior_alpha_c);
    read(p, "alpha_p", cfg.prior_alpha_p);
  }
  if (const YAML::Node n = root["noise"]) {
    read(n, "distribution", cfg.noise.distribution);
    read(n, "sigma", cfg.noise.sigma);
    read(n, "sigma_tuning", cfg.noise.sigma_tuning);
    read(n, "seed", cfg.noise.seed);
  }
  if (const YAML::Node i = root["identification"]) {
    read(i, "section", cfg.identification.section);
    read_face(i, "face", cfg.identification.face);
    read(i, "warmup", cfg.identification.warmup);
    read(i, "thickness_nodes", cfg.identification.thickness_nodes);
    read(i, "seeds", cfg.identification.seeds);
    read(i, "outlier_fraction", cfg.identification.outlier_fraction);
    read(i, "outlier_magnitude", cfg.identification.outlier_magnitude);
  }
  if (const YAML::Node t = root["tuning"]) {
    read(t, "section", cfg.tuning.section);
    read_face(t, "face", cfg.tuning.face);
    if (t["coord"] && !t["coord"].IsNull()) cfg.tuning.coord = t["coord"].as<double>();
    read(t, "interval", cfg.tuning.interval);
    read(t, "iterations", cfg.tuning.iterations);
    read(t, "initial_factor", cfg.tuning.initial_factor);
    read(t, "eps_rel", cfg.tuning.eps_rel);
    read(t, "m", cfg.tuning.m);
    read(t, "warmup", cfg.tuning.warmup);
  }
  if (const YAML::Node s = root["sweep"]) {
    cfg.sweep.clear();
    for (const auto& c : s) cfg.sweep.push_back(read_cell(c));
  }
  read(root, "output_dir", cfg.output_dir);
}

YAML::Node load_yaml(const std::filesystem::path& path) {
  try {
    return YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

const char* face_name(Face f) { return f == Face::inner ? "inner" : "outer"; }

}  // namespace

void ExperimentConfig::validate() const {
  if (!(casting_speed >= 0.0)) throw ConfigError("config: casting speed must be >= 0");
  if (!(noise.sigma >= 0.0) || !(noise.sigma_tuning >= 0.0)) throw ConfigError("config: noise sigma must be >= 0");
  if (noise.distribution != "gaussian" && noise.distribution != "uniform")
    throw ConfigError("config: noise distribution must be gaussian or uniform");
  if (!(truth_alpha_c > 0.0) || !(truth_alpha_p >= 0.0)) throw ConfigError("config: truth alpha_c > 0, alpha_p >= 0");
  if (!(prior_alpha_c > 0.0) || !(prior_alpha_p >= 0.0)) throw ConfigError("config: prior alpha_c > 0, alpha_p >= 0");
  if (sections.empty()) throw ConfigError("config: at least one secondary-cooling section is required");
  if (identification.seeds < 1) throw ConfigError("config: identification.seeds must be >= 1");
  if (!(tuning.interval > 0.0) || tuning.iterations < 1) throw ConfigError("config: tuning interval/iterations");
  if (!(tuning.initial_factor > 0.0)) throw ConfigError("config: tuning.initial_factor must be > 0");
  for (const auto& c : sweep) StepSequence{c.kind, c.a, c.b}.validate();
  machine_config(*this, truth_alpha_c, truth_alpha_p).validate();
}

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  SectionSpec c1;
  c1.name = "curv1";
  c1.r_m = 4.0;
  c1.phi_span = 0.6;
  c1.nozzles = {0.1, 0.3, 0.5};
  c1.w = 0.05;
  c1.nodes = 121;
  SectionSpec c2;
  c2.name = "curv2";
  c2.r_m = 6.0;
  c2.phi_span = 0.4;
  c2.nozzles = {0.1, 0.3};
  c2.w = 0.04;
  c2.nodes = 61;
  SectionSpec r;
  r.name = "rect";
  r.kind = SectionKind::rectilinear;
  r.z_p = 0.0;
  r.x_f = 4.0;
  r.nozzles = {0.5, 1.5, 2.5, 3.5};
  r.w = 0.2;
  r.nodes = 81;
  cfg.sections = {c1, c2, r};
  cfg.sweep = {
      {SequenceKind::harmonic, 0.5, 0.0, 0.0},     {SequenceKind::harmonic, 1.0, 0.0, 0.0},
      {SequenceKind::harmonic, 2.0, 0.0, 0.0},     {SequenceKind::harmonic, 4.0, 0.0, 0.0},
      {SequenceKind::harmonic, 1.0, 10.0, 0.0},    {SequenceKind::sign_reset, 1.0, 0.0, 0.0},
      {SequenceKind::sign_increment, 1.35, 0.0, 0.0},
  };
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  ExperimentConfig cfg = default_experiment();
  overlay(cfg, load_yaml(path));
  cfg.validate();
  return cfg;
}

std::vector<SweepCell> load_sweep_grid(const std::filesystem::path& path) {
  const YAML::Node root = load_yaml(path);
  const YAML::Node cells = root["cells"] ? root["cells"] : root;
  if (!cells.IsSequence()) throw ConfigError(path.string() + ": expected a list of sweep cells");
  std::vector<SweepCell> out;
  for (const auto& c : cells) out.push_back(read_cell(c));
  return out;
}

std::string dump_experiment(const ExperimentConfig& cfg) {
  YAML::Emitter e;
  e.SetDoublePrecision(12);
  e << YAML::BeginMap;
  e << YAML::Key << "machine" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "casting_speed" << YAML::Value << cfg.casting_speed;
  e << YAML::Key << "pour_temperature" << YAML::Value << cfg.pour_temperature;
  e << YAML::Key << "initial_strand_temperature" << YAML::Value << cfg.initial_strand_temperature;
  e << YAML::Key << "initial_wall_temperature" << YAML::Value << cfg.initial_wall_temperature;
  e << YAML::Key << "backend" << YAML::Value << (cfg.backend == kernels::Backend::openmp ? "openmp" : "serial");
  e << YAML::Key << "material" << YAML::Value << cfg.material;
  e << YAML::Key << "mould" << YAML::Value << YAML::BeginMap << YAML::Key << "l" << YAML::Value << cfg.mould.l
    << YAML::Key << "big_z" << YAML::Value << cfg.mould.big_z << YAML::Key << "d" << YAML::Value << cfg.mould.d
    << YAML::Key << "z0" << YAML::Value << cfg.mould.z0 << YAML::Key << "delta" << YAML::Value << cfg.mould.delta
    << YAML::EndMap;
  e << YAML::Key << "wall" << YAML::Value << YAML::BeginMap << YAML::Key << "c" << YAML::Value << cfg.wall.c
    << YAML::Key << "rho" << YAML::Value << cfg.wall.rho << YAML::Key << "lambda" << YAML::Value << cfg.wall.lambda
    << YAML::EndMap;
  const auto& me = cfg.mould_env;
  e << YAML::Key << "mould_env" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lambda_gz" << YAML::Value << me.lambda_gz << YAML::Key << "sigma_n" << YAML::Value << me.sigma_n
    << YAML::Key << "c_n" << YAML::Value << me.c_n << YAML::Key << "alpha_2" << YAML::Value << me.alpha_2
    << YAML::Key << "alpha_3" << YAML::Value << me.alpha_3 << YAML::Key << "alpha_4" << YAML::Value << me.alpha_4
    << YAML::Key << "t_os1" << YAML::Value << me.t_os1 << YAML::Key << "t_os2" << YAML::Value << me.t_os2
    << YAML::Key << "t_os3" << YAML::Value << me.t_os3;
  e << YAML::EndMap;
  const auto& w = cfg.water;
  e << YAML::Key << "water" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "c_w" << YAML::Value << w.c_w << YAML::Key << "s_ch" << YAML::Value << w.s_ch << YAML::Key
    << "v_water" << YAML::Value << w.v_water << YAML::Key << "p_i" << YAML::Value << w.p_i << YAML::Key << "p_e"
    << YAML::Value << w.p_e << YAML::Key << "alpha_1" << YAML::Value << w.alpha_1 << YAML::Key << "alpha_e"
    << YAML::Value << w.alpha_e << YAML::Key << "t_e" << YAML::Value << w.t_e;
  e << YAML::Key << "inlet" << YAML::Value << YAML::BeginSeq;
  for (const auto& [t, v] : w.inlet.points()) e << YAML::Flow << YAML::BeginSeq << t << v << YAML::EndSeq;
  e << YAML::EndSeq;
  e << YAML::Key << "initial" << YAML::Value << w.initial << YAML::EndMap;
  e << YAML::Key << "sections" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : cfg.sections) {
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << s.name;
    e << YAML::Key << "kind" << YAML::Value
      << (s.kind == SectionKind::curvilinear ? "curvilinear" : "rectilinear");
    if (s.kind == SectionKind::curvilinear)
      e << YAML::Key << "r_m" << YAML::Value << s.r_m << YAML::Key << "phi_span" << YAML::Value << s.phi_span;
    else
      e << YAML::Key << "z_p" << YAML::Value << s.z_p << YAML::Key << "x_f" << YAML::Value << s.x_f;
    e << YAML::Key << "nozzles" << YAML::Value << YAML::Flow << s.nozzles;
    e << YAML::Key << "w" << YAML::Value << s.w << YAML::Key << "nodes" << YAML::Value << s.nodes;
    for (const auto& [key, env] : {std::pair{"inner", s.inner}, std::pair{"outer", s.outer}})
      e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "t_env" << YAML::Value
        << env.t_env << YAML::Key << "c_rad" << YAML::Value << env.c_rad << YAML::EndMap;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;

  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap << YAML::Key << "thickness_nodes" << YAML::Value
    << cfg.grid.thickness_nodes << YAML::Key << "mould_nodes" << YAML::Value << cfg.grid.mould_nodes << YAML::Key
    << "wall_nodes" << YAML::Value << cfg.grid.wall_nodes << YAML::Key << "dt" << YAML::Value << cfg.grid.dt
    << YAML::EndMap;
  e << YAML::Key << "truth" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "alpha_c" << YAML::Value
    << cfg.truth_alpha_c << YAML::Key << "alpha_p" << YAML::Value << cfg.truth_alpha_p << YAML::EndMap;
  e << YAML::Key << "prior" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "alpha_c" << YAML::Value
    << cfg.prior_alpha_c << YAML::Key << "alpha_p" << YAML::Value << cfg.prior_alpha_p << YAML::EndMap;
  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap << YAML::Key << "distribution" << YAML::Value
    << cfg.noise.distribution << YAML::Key << "sigma" << YAML::Value << cfg.noise.sigma << YAML::Key
    << "sigma_tuning" << YAML::Value << cfg.noise.sigma_tuning << YAML::Key << "seed" << YAML::Value
    << cfg.noise.seed << YAML::EndMap;
  const auto& id = cfg.identification;
  e << YAML::Key << "identification" << YAML::Value << YAML::BeginMap << YAML::Key << "section" << YAML::Value
    << id.section << YAML::Key << "face" << YAML::Value << face_name(id.face) << YAML::Key << "warmup"
    << YAML::Value << id.warmup << YAML::Key << "thickness_nodes" << YAML::Value << id.thickness_nodes << YAML::Key << "seeds" << YAML::Value << id.seeds << YAML::Key
    << "outlier_fraction" << YAML::Value << id.outlier_fraction << YAML::Key << "outlier_magnitude" << YAML::Value
    << id.outlier_magnitude << YAML::EndMap;
  const auto& t = cfg.tuning;
  e << YAML::Key << "tuning" << YAML::Value << YAML::BeginMap << YAML::Key << "section" << YAML::Value << t.section
    << YAML::Key << "face" << YAML::Value << face_name(t.face) << YAML::Key << "coord" << YAML::Value;
  if (t.coord)
    e << *t.coord;
  else
    e << YAML::Null;
  e << YAML::Key << "interval" << YAML::Value << t.interval << YAML::Key << "iterations" << YAML::Value
    << t.iterations << YAML::Key << "initial_factor" << YAML::Value << t.initial_factor << YAML::Key << "eps_rel"
    << YAML::Value << t.eps_rel << YAML::Key << "m" << YAML::Value << t.m << YAML::Key << "warmup" << YAML::Value
    << t.warmup << YAML::EndMap;
  e << YAML::Key << "sweep" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : cfg.sweep) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "seq" << YAML::Value << to_string(c.kind) << YAML::Key << "a"
      << YAML::Value << c.a << YAML::Key << "b" << YAML::Value << c.b;
    if (c.initial_factor > 0.0) e << YAML::Key << "initial_factor" << YAML::Value << c.initial_factor;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::shared_ptr<const MaterialProperties> resolve_material(const std::string& ref) {
  if (ref == "st40") return std::make_shared<const MaterialProperties>(st40());
  return std::make_shared<const MaterialProperties>(load_material(ref));
}

MachineConfig machine_config(const ExperimentConfig& cfg, double alpha_c, double alpha_p) {
  MachineConfig mc;
  mc.layout.mould = cfg.mould;
  mc.grid = cfg.grid;
  mc.grid.along_nodes.clear();
  for (const auto& s : cfg.sections) {
    mc.grid.along_nodes.push_back(s.nodes);
    ChtcProfile p;
    p.alpha_c = alpha_c;
    p.alpha_p = alpha_p;
    p.w = s.w;
    p.nozzles = s.nozzles;
    mc.sections.push_back({s.inner, s.outer, p, p});
    if (s.kind == SectionKind::curvilinear) {
      CurvilinearSection c;
      c.name = s.name;
      c.index_m = static_cast<int>(mc.layout.curvilinear.size()) + 1;
      c.r_m = s.r_m;
      c.phi_span = s.phi_span;
      c.nozzles = s.nozzles;
      c.w = s.w;
      if (mc.layout.rectilinear) throw ConfigError("config: curvilinear sections must precede the rectilinear one");
      mc.layout.curvilinear.push_back(c);
    } else {
      if (mc.layout.rectilinear) throw ConfigError("config: at most one rectilinear section");
      RectilinearSection r;
      r.name = s.name;
      r.z_p = s.z_p;
      r.x_f = s.x_f;
      r.nozzles = s.nozzles;
      r.w = s.w;
      mc.layout.rectilinear = r;
    }
  }
  mc.material = resolve_material(cfg.material);
  mc.wall = cfg.wall;
  mc.mould_env = cfg.mould_env;
  mc.water = cfg.water;
  mc.casting_speed = Schedule::constant(cfg.casting_speed);
  mc.pour_temperature = cfg.pour_temperature;
  mc.initial_strand_temperature = cfg.initial_strand_temperature;
  mc.initial_wall_temperature = cfg.initial_wall_temperature;
  mc.backend = cfg.backend;
  return mc;
}

}  // namespace ccm

#include "subflow/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "subflow/errors.hpp"
#include "subflow/units.hpp"

namespace subflow {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }

// Walks one JSON object, remembering which keys were read so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(path(key), "expected a number");
    return v->get<double>();
  }
  double positive(const std::string& key, double def) {
    const double v = number(key, def);
    if (!(v > 0.0)) throw ConfigError(path(key), "must be > 0");
    return v;
  }
  double non_negative(const std::string& key, double def) {
    const double v = number(key, def);
    if (!(v >= 0.0)) throw ConfigError(path(key), "must be >= 0");
    return v;
  }
  int integer(const std::string& key, int def, int min_value) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
    const auto x = v->get<long long>();
    if (x < min_value || x > 1'000'000'000) throw ConfigError(path(key), "out of range");
    return static_cast<int>(x);
  }
  std::uint64_t seed(const std::string& key, std::uint64_t def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_unsigned()) throw ConfigError(path(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v->get<bool>();
  }
  std::string string(const std::string& key, const std::string& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(path(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(path(item.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void section(ObjectReader& parent, const std::string& key, F&& body) {
  static const json empty = json::object();
  const json* v = parent.find(key);
  ObjectReader r(v ? *v : empty, parent.path(key));
  body(r);
  r.finish();
}

std::vector<double> bound_vector(ObjectReader& r, const std::string& key, double def, int n) {
  const json* v = r.find(key);
  if (!v) return std::vector<double>(static_cast<std::size_t>(n), def);
  if (v->is_number()) return std::vector<double>(static_cast<std::size_t>(n), v->get<double>());
  if (!v->is_array() || v->size() != static_cast<std::size_t>(n))
    throw ConfigError(r.path(key), "expected a number or an array of n_modes numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_number()) throw ConfigError(r.path(key) + "/" + std::to_string(i), "expected a number");
    out.push_back((*v)[i].get<double>());
  }
  return out;
}

json bound_json(const std::vector<double>& v) {
  for (double x : v)
    if (x != v.front()) return v;
  return v.empty() ? json(0.0) : json(v.front());
}

WellConfig parse_well(const json& j, const std::string& path, int nz) {
  ObjectReader r(j, path);
  WellConfig w;
  w.name = r.string("name", "");
  if (w.name.empty()) throw ConfigError(r.path("name"), "required");
  if (!r.has("i")) throw ConfigError(r.path("i"), "required");
  if (!r.has("j")) throw ConfigError(r.path("j"), "required");
  w.i = r.integer("i", 1, 1);
  w.j = r.integer("j", 1, 1);
  w.k_top = r.integer("k_top", 1, 1);
  w.k_bot = r.integer("k_bot", nz, 1);
  w.rw = r.positive("rw", 0.1);
  const std::string control = r.string("control", "");
  if (control == "rate") {
    if (!r.has("rate_m3_per_day")) throw ConfigError(r.path("rate_m3_per_day"), "required for rate control");
    w.value = r.number("rate_m3_per_day", 0.0);
  } else if (control == "bhp") {
    if (!r.has("bhp_bar")) throw ConfigError(r.path("bhp_bar"), "required for bhp control");
    w.bhp_control = true;
    w.value = r.positive("bhp_bar", 0.0);
  } else {
    throw ConfigError(r.path("control"), "expected \"rate\" or \"bhp\"");
  }
  r.finish();
  return w;
}

template <class F>
void rethrow_as_config(const std::string& path, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

bool ScenarioConfig::operator==(const ScenarioConfig& o) const { return to_json(*this) == to_json(o); }

std::vector<WellConfig> corner_wells(int nz, bool bhp_control, double value) {
  const int xy[4][2] = {{11, 21}, {51, 21}, {11, 201}, {51, 201}};
  std::vector<WellConfig> out;
  for (int n = 0; n < 4; ++n)
    out.push_back({"P" + std::to_string(n + 1), xy[n][0], xy[n][1], 1, nz, 0.1, bhp_control, value});
  return out;
}

ScenarioConfig parse_config(const json& doc) {
  ScenarioConfig c;
  ObjectReader root(doc, "");

  section(root, "grid", [&](ObjectReader& r) {
    c.grid.nx = r.integer("nx", c.grid.nx, 1);
    c.grid.ny = r.integer("ny", c.grid.ny, 1);
    c.grid.nz = r.integer("nz", c.grid.nz, 1);
    c.grid.lx = r.positive("lx", c.grid.lx);
    c.grid.ly = r.positive("ly", c.grid.ly);
    c.grid.lz = r.positive("lz", c.grid.lz);
    c.grid.z_top = r.number("z_top", c.grid.z_top);
  });
  section(root, "formation", [&](ObjectReader& r) {
    auto& f = c.formation;
    f.porosity = r.positive("porosity", f.porosity);
    if (f.porosity >= 1.0) throw ConfigError(r.path("porosity"), "must be < 1");
    f.density = r.non_negative("density_kg_m3", f.density);
    f.viscosity_mpas = r.positive("viscosity_mpas", f.viscosity_mpas);
    f.compressibility_per_bar = r.positive("compressibility_per_bar", f.compressibility_per_bar);
    f.formation_factor = r.positive("formation_factor", f.formation_factor);
    f.gravity = r.non_negative("gravity", f.gravity);
    f.p_ref_top_bar = r.positive("p_ref_top_bar", f.p_ref_top_bar);
  });
  section(root, "permeability", [&](ObjectReader& r) {
    auto& k = c.covariance;
    k.mean_lnk = r.number("mean_lnk", k.mean_lnk);
    k.variance = r.non_negative("variance", k.variance);
    k.eta_x = r.positive("eta_x", k.eta_x);
    k.eta_y = r.positive("eta_y", k.eta_y);
    k.eta_z = r.positive("eta_z", k.eta_z);
    c.n_modes = r.integer("n_modes", c.n_modes, 1);
  });
  const long long cells = static_cast<long long>(c.grid.nx) * c.grid.ny * c.grid.nz;
  if (c.n_modes > cells) throw ConfigError("/permeability/n_modes", "exceeds the cell count");

  if (const json* wells = root.find("wells")) {
    if (!wells->is_array()) throw ConfigError("/wells", "expected an array");
    for (std::size_t n = 0; n < wells->size(); ++n)
      c.wells.push_back(parse_well((*wells)[n], "/wells/" + std::to_string(n), c.grid.nz));
  }
  section(root, "schedule", [&](ObjectReader& r) {
    c.dt_days = r.positive("dt_days", c.dt_days);
    c.n_steps = r.integer("n_steps", c.n_steps, 1);
  });
  section(root, "seeds", [&](ObjectReader& r) {
    c.seeds.field = r.seed("field", c.seeds.field);
    c.seeds.virtual_ = r.seed("virtual", c.seeds.virtual_);
    c.seeds.ensemble = r.seed("ensemble", c.seeds.ensemble);
    c.seeds.pso = r.seed("pso", c.seeds.pso);
    c.seeds.wells = r.seed("wells", c.seeds.wells);
    c.seeds.truth = r.seed("truth", c.seeds.truth);
  });
  section(root, "solver", [&](ObjectReader& r) {
    c.solver.tol_rel = r.positive("tol_rel", c.solver.tol_rel);
    if (c.solver.tol_rel >= 1.0) throw ConfigError(r.path("tol_rel"), "must be < 1");
    c.solver.max_iter = r.integer("max_iter", c.solver.max_iter, 1);
  });
  section(root, "loss", [&](ObjectReader& r) {
    c.loss.data = r.non_negative("data", 1.0);
    c.loss.pde = r.non_negative("pde", 1.0);
    c.loss.bc = r.non_negative("bc", 1.0);
    const std::string n = r.string("normalization", "mean");
    if (n == "mean") c.normalization = Normalization::Mean;
    else if (n == "sum") c.normalization = Normalization::Sum;
    else throw ConfigError(r.path("normalization"), "expected \"mean\" or \"sum\"");
  });
  section(root, "pso", [&](ObjectReader& r) {
    auto& p = c.pso;
    p.omega = r.number("omega", 0.9);
    p.c1 = r.non_negative("c1", 2.0);
    p.c2 = r.non_negative("c2", 2.0);
    p.maxgen = r.integer("maxgen", 50, 1);
    p.sizepop = r.integer("sizepop", 20, 2);
    p.workers = r.integer("workers", 1, 1);
    p.vmin = bound_vector(r, "vmin", -1.0, c.n_modes);
    p.vmax = bound_vector(r, "vmax", 1.0, c.n_modes);
    p.xmin = bound_vector(r, "xmin", -4.0, c.n_modes);
    p.xmax = bound_vector(r, "xmax", 4.0, c.n_modes);
  });
  section(root, "training", [&](ObjectReader& r) {
    auto& t = c.training;
    t.n_lnk_train = r.integer("n_lnk_train", t.n_lnk_train, 1);
    t.nt_train = r.integer("nt_train", t.nt_train, 1);
    t.n_lnk_virtual = r.integer("n_lnk_virtual", t.n_lnk_virtual, 0);
    t.varying_wells = r.boolean("varying_wells", false);
    t.n_well_train = r.integer("n_well_train", t.varying_wells ? t.n_lnk_train : 0, 0);
    t.n_well_virtual = r.integer("n_well_virtual", t.varying_wells ? t.n_lnk_virtual : 0, 0);
    if (t.varying_wells && t.n_well_train != t.n_lnk_train)
      throw ConfigError(r.path("n_well_train"), "well images pair with fields: must equal n_lnk_train");
    if (t.varying_wells && t.n_well_virtual != t.n_lnk_virtual)
      throw ConfigError(r.path("n_well_virtual"), "must equal n_lnk_virtual");
    if (!t.varying_wells && (t.n_well_train != 0 || t.n_well_virtual != 0))
      throw ConfigError(r.path("n_well_train"), "well images require varying_wells");
  });
  section(root, "uq", [&](ObjectReader& r) {
    c.uq.n_realizations = r.integer("n_realizations", c.uq.n_realizations, 2);
    c.uq.workers = r.integer("workers", c.uq.workers, 1);
    c.uq.chunk_size = r.integer("chunk_size", c.uq.chunk_size, 1);
  });
  bool any_rate = false;
  for (const auto& w : c.wells) any_rate = any_rate || !w.bhp_control;
  section(root, "inversion", [&](ObjectReader& r) {
    auto& v = c.inversion;
    v.observed_steps = r.integer("observed_steps", std::min(v.observed_steps, c.n_steps), 1);
    if (v.observed_steps > c.n_steps) throw ConfigError(r.path("observed_steps"), "exceeds schedule/n_steps");
    v.lambda_rate = r.non_negative("lambda_rate", v.lambda_rate);
    v.lambda_perm = r.non_negative("lambda_perm", v.lambda_perm);
    v.lambda_bhp = r.non_negative("lambda_bhp", any_rate ? 10.0 : 0.0);
    const std::string d = r.string("perm_domain", "ln_md");
    if (d == "ln_md") v.perm_in_md = false;
    else if (d == "md") v.perm_in_md = true;
    else throw ConfigError(r.path("perm_domain"), "expected \"ln_md\" or \"md\"");
    v.noise = r.non_negative("noise", v.noise);
    v.variance_min = r.non_negative("variance_min", v.variance_min);
    v.variance_max = r.non_negative("variance_max", v.variance_max);
    if (!(v.variance_min < v.variance_max)) throw ConfigError(r.path("variance_max"), "must exceed variance_min");
    v.eta_min = r.positive("eta_min", v.eta_min);
    v.eta_max = r.positive("eta_max", v.eta_max);
    if (!(v.eta_min < v.eta_max)) throw ConfigError(r.path("eta_max"), "must exceed eta_min");
    v.truth_variance = r.non_negative("truth_variance", c.covariance.variance);
    v.truth_eta = r.positive("truth_eta", c.covariance.eta_x);
  });
  root.finish();

  rethrow_as_config("/grid", [&] { (void)make_grid(c); });
  rethrow_as_config("/permeability", [&] {
    CovarianceSpec k = c.covariance;
    if (k.variance == 0.0) k.variance = 1.0;  // zero variance is a valid (deterministic) field
    k.validate();
  });
  rethrow_as_config("/formation", [&] { make_props(c).validate(); });
  rethrow_as_config("/wells", [&] {
    const auto wells = make_wells(c);
    validate_wells(make_grid(c), wells);
  });
  rethrow_as_config("/pso", [&] { make_pso_params(c).validate(); });
  rethrow_as_config("/loss", [&] { c.loss.validate(); });
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("/", "cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ScenarioConfig& c) {
  json wells = json::array();
  for (const auto& w : c.wells) {
    json jw = {{"name", w.name}, {"i", w.i}, {"j", w.j}, {"k_top", w.k_top}, {"k_bot", w.k_bot}, {"rw", w.rw},
               {"control", w.bhp_control ? "bhp" : "rate"}};
    jw[w.bhp_control ? "bhp_bar" : "rate_m3_per_day"] = w.value;
    wells.push_back(jw);
  }
  const auto& f = c.formation;
  const auto& t = c.training;
  const auto& v = c.inversion;
  return json{
      {"grid", {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"nz", c.grid.nz}, {"lx", c.grid.lx},
                {"ly", c.grid.ly}, {"lz", c.grid.lz}, {"z_top", c.grid.z_top}}},
      {"formation", {{"porosity", f.porosity}, {"density_kg_m3", f.density}, {"viscosity_mpas", f.viscosity_mpas},
                     {"compressibility_per_bar", f.compressibility_per_bar},
                     {"formation_factor", f.formation_factor}, {"gravity", f.gravity},
                     {"p_ref_top_bar", f.p_ref_top_bar}}},
      {"permeability", {{"mean_lnk", c.covariance.mean_lnk}, {"variance", c.covariance.variance},
                        {"eta_x", c.covariance.eta_x}, {"eta_y", c.covariance.eta_y},
                        {"eta_z", c.covariance.eta_z}, {"n_modes", c.n_modes}}},
      {"wells", wells},
      {"schedule", {{"dt_days", c.dt_days}, {"n_steps", c.n_steps}}},
      {"seeds", {{"field", c.seeds.field}, {"virtual", c.seeds.virtual_}, {"ensemble", c.seeds.ensemble},
                 {"pso", c.seeds.pso}, {"wells", c.seeds.wells}, {"truth", c.seeds.truth}}},
      {"solver", {{"tol_rel", c.solver.tol_rel}, {"max_iter", c.solver.max_iter}}},
      {"loss", {{"data", c.loss.data}, {"pde", c.loss.pde}, {"bc", c.loss.bc},
                {"normalization", c.normalization == Normalization::Mean ? "mean" : "sum"}}},
      {"pso", {{"omega", c.pso.omega}, {"c1", c.pso.c1}, {"c2", c.pso.c2}, {"maxgen", c.pso.maxgen},
               {"sizepop", c.pso.sizepop}, {"workers", c.pso.workers}, {"vmin", bound_json(c.pso.vmin)},
               {"vmax", bound_json(c.pso.vmax)}, {"xmin", bound_json(c.pso.xmin)},
               {"xmax", bound_json(c.pso.xmax)}}},
      {"training", {{"n_lnk_train", t.n_lnk_train}, {"nt_train", t.nt_train}, {"n_lnk_virtual", t.n_lnk_virtual},
                    {"varying_wells", t.varying_wells}, {"n_well_train", t.n_well_train},
                    {"n_well_virtual", t.n_well_virtual}}},
      {"uq", {{"n_realizations", c.uq.n_realizations}, {"workers", c.uq.workers},
              {"chunk_size", c.uq.chunk_size}}},
      {"inversion", {{"observed_steps", v.observed_steps}, {"lambda_rate", v.lambda_rate},
                     {"lambda_perm", v.lambda_perm}, {"lambda_bhp", v.lambda_bhp},
                     {"perm_domain", v.perm_in_md ? "md" : "ln_md"}, {"noise", v.noise},
                     {"variance_min", v.variance_min}, {"variance_max", v.variance_max},
                     {"eta_min", v.eta_min}, {"eta_max", v.eta_max},
                     {"truth_variance", v.truth_variance}, {"truth_eta", v.truth_eta}}},
  };
}

Grid3D make_grid(const ScenarioConfig& c) {
  return Grid3D(c.grid.nx, c.grid.ny, c.grid.nz, c.grid.lx, c.grid.ly, c.grid.lz, c.grid.z_top);
}

FormationProps make_props(const ScenarioConfig& c) {
  FormationProps p;
  p.porosity = c.formation.porosity;
  p.oil_density = c.formation.density;
  p.viscosity = units::mpas_to_pas(c.formation.viscosity_mpas);
  p.compressibility = units::per_bar_to_per_pa(c.formation.compressibility_per_bar);
  p.formation_factor = c.formation.formation_factor;
  p.gravity = c.formation.gravity;
  return p;
}

std::vector<WellSpec> make_wells(const ScenarioConfig& c) {
  std::vector<WellSpec> out;
  for (const auto& w : c.wells) {
    WellSpec s;
    s.name = w.name;
    s.i = w.i - 1;
    s.j = w.j - 1;
    s.k_top = w.k_top - 1;
    s.k_bot = w.k_bot - 1;
    s.rw = w.rw;
    if (w.bhp_control) s.control = BhpControl{units::bar_to_pa(w.value)};
    else s.control = RateControl{units::m3_per_day_to_si(w.value)};
    out.push_back(s);
  }
  return out;
}

WellConfig to_well_config(const WellSpec& s) {
  WellConfig w{s.name, s.i + 1, s.j + 1, s.k_top + 1, s.k_bot + 1, s.rw, !s.is_rate_controlled(), 0.0};
  if (const auto* r = std::get_if<RateControl>(&s.control)) w.value = units::si_to_m3_per_day(r->rate);
  else w.value = units::pa_to_bar(std::get<BhpControl>(s.control).bhp);
  return w;
}

Scenario make_scenario(const ScenarioConfig& c) {
  const Grid3D grid = make_grid(c);
  Scenario s{grid, make_props(c), ScalarField3D(grid, units::md_to_m2(std::exp(c.covariance.mean_lnk))),
             make_wells(c)};
  s.dt = units::days_to_s(c.dt_days);
  s.n_steps = c.n_steps;
  s.p_ref_top = units::bar_to_pa(c.formation.p_ref_top_bar);
  s.solver = c.solver;
  return s;
}

PsoParams make_pso_params(const ScenarioConfig& c) {
  PsoParams p = c.pso;
  p.seed = c.seeds.pso;
  return p;
}

InverseProblem make_inverse_problem(const ScenarioConfig& c, SearchMode mode) {
  InverseProblem p{make_scenario(c), c.covariance};
  p.n_modes = c.n_modes;
  p.observed_steps = c.inversion.observed_steps;
  p.mode = mode;
  p.variance_min = c.inversion.variance_min;
  p.variance_max = c.inversion.variance_max;
  p.eta_min = c.inversion.eta_min;
  p.eta_max = c.inversion.eta_max;
  p.fitness.w_rate = c.inversion.lambda_rate;
  p.fitness.w_perm = c.inversion.lambda_perm;
  p.fitness.w_bhp = c.inversion.lambda_bhp;
  p.fitness.perm_domain = c.inversion.perm_in_md ? PermDomain::Md : PermDomain::LogMd;
  return p;
}

}  // namespace subflow

#include "renyivmc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "renyivmc/epdo.hpp"
#include "renyivmc/sbdo.hpp"

namespace rvmc {

namespace {

using nlohmann::json;

std::string join_problems(const std::vector<std::string>& problems) {
  std::ostringstream out;
  out << "invalid configuration (" << problems.size() << " problem(s)):";
  for (const auto& p : problems) out << "\n  - " << p;
  return out.str();
}

/// Collects validation problems; `get` fetches typed keys and records a
/// problem instead of throwing on mismatch.
struct Checker {
  std::vector<std::string> problems;

  void complain(const std::string& what) { problems.push_back(what); }

  void check_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      complain(where + " must be an object");
      return;
    }
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) complain(where + ": unknown key '" + key + "'");
    }
  }

  template <typename T>
  bool get(const json& j, const std::string& where, const std::string& key, T& out,
           bool required = false) {
    if (!j.is_object() || !j.contains(key)) {
      if (required) complain(where + ": missing required key '" + key + "'");
      return false;
    }
    try {
      out = j.at(key).get<T>();
      return true;
    } catch (const json::exception&) {
      complain(where + "." + key + ": wrong type");
      return false;
    }
  }
};

const std::set<std::string> kTopKeys = {"model",     "ansatz", "objective", "sampler",
                                        "optimizer", "seed",   "output_dir", "threads"};
const std::set<std::string> kModelKeys = {"geometry", "j", "h_z", "h_x"};
const std::set<std::string> kGeometryKeys = {"kind", "sites", "lx", "ly"};
const std::set<std::string> kObjectiveKeys = {"beta_r"};
const std::set<std::string> kSamplerKeys = {"chains", "burn_in_sweeps", "sweeps_per_sample",
                                            "samples_per_chain", "site_order"};
const std::set<std::string> kOptimizerKeys = {
    "method",          "learning_rate",     "sr_shift",          "max_iterations",
    "convergence_threshold", "convergence_window", "warmup_iterations", "decay",
    "entropy_every",   "final_samples",     "exact_expectations", "checkpoint_every"};

const std::set<std::string> kAnsatzCommonKeys = {"kind", "init_scale"};
const std::set<std::string> kAnsatzKeysByKind[] = {
    /*mpdo*/ {"bond_dim", "kraus_dim"},
    /*epdo*/ {"plaquette_width", "kraus_dim"},
    /*sbdo*/ {"bond_dim", "kraus_dim", "num_strings"},
    /*rbm*/ {"hidden_density", "ancilla_density"},
};

int kind_index(const std::string& kind) {
  if (kind == "mpdo") return 0;
  if (kind == "epdo") return 1;
  if (kind == "sbdo") return 2;
  if (kind == "rbm") return 3;
  return -1;
}

Geometry parse_geometry(Checker& c, const json& j) {
  c.check_keys(j, "model.geometry", kGeometryKeys);
  std::string kind = "chain";
  c.get(j, "model.geometry", "kind", kind, true);
  if (kind == "chain") {
    int sites = 0;
    if (c.get(j, "model.geometry", "sites", sites, true) && sites >= 2) {
      return Geometry::chain(sites);
    }
    if (sites < 2) c.complain("model.geometry.sites: chain needs at least 2 sites");
  } else if (kind == "square") {
    int lx = 0, ly = 0;
    const bool have_lx = c.get(j, "model.geometry", "lx", lx, true);
    const bool have_ly = c.get(j, "model.geometry", "ly", ly, true);
    if (have_lx && have_ly && lx >= 2 && ly >= 2) return Geometry::square(lx, ly);
    if (have_lx && have_ly) c.complain("model.geometry: square needs lx, ly >= 2");
  } else {
    c.complain("model.geometry.kind must be 'chain' or 'square'");
  }
  return Geometry::chain(2);  // placeholder; problems already recorded
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems_in)
    : std::runtime_error(join_problems(problems_in)), problems(std::move(problems_in)) {}

RunConfig RunConfig::from_json(const json& j) {
  Checker c;
  RunConfig cfg;
  c.check_keys(j, "config", kTopKeys);

  if (!j.contains("model")) {
    c.complain("config: missing required section 'model'");
  } else {
    const json& model = j.at("model");
    c.check_keys(model, "model", kModelKeys);
    if (model.contains("geometry")) {
      cfg.geometry = parse_geometry(c, model.at("geometry"));
    } else {
      c.complain("model: missing required key 'geometry'");
    }
    c.get(model, "model", "j", cfg.j, true);
    c.get(model, "model", "h_z", cfg.h_z, true);
    c.get(model, "model", "h_x", cfg.h_x, true);
  }

  if (!j.contains("ansatz")) {
    c.complain("config: missing required section 'ansatz'");
  } else {
    const json& ans = j.at("ansatz");
    std::string kind;
    if (c.get(ans, "ansatz", "kind", kind, true)) {
      const int ki = kind_index(kind);
      if (ki < 0) {
        c.complain("ansatz.kind must be one of mpdo, epdo, sbdo, rbm");
      } else {
        std::set<std::string> allowed = kAnsatzCommonKeys;
        allowed.insert(kAnsatzKeysByKind[ki].begin(), kAnsatzKeysByKind[ki].end());
        c.check_keys(ans, "ansatz", allowed);
      }
    }
    cfg.ansatz_section = ans;
    c.get(ans, "ansatz", "init_scale", cfg.init_scale);
    if (cfg.init_scale < 0.0) c.complain("ansatz.init_scale must be >= 0");
  }

  if (!j.contains("objective")) {
    c.complain("config: missing required section 'objective'");
  } else {
    const json& obj = j.at("objective");
    c.check_keys(obj, "objective", kObjectiveKeys);
    if (!obj.contains("beta_r")) {
      c.complain("objective: missing required key 'beta_r'");
    } else if (obj.at("beta_r").is_array()) {
      try {
        cfg.beta_r = obj.at("beta_r").get<std::vector<double>>();
      } catch (const json::exception&) {
        c.complain("objective.beta_r: wrong type");
      }
      if (cfg.beta_r.empty()) c.complain("objective.beta_r: list must not be empty");
      for (std::size_t i = 1; i < cfg.beta_r.size(); ++i) {
        if (cfg.beta_r[i] < cfg.beta_r[i - 1]) {
          c.complain("objective.beta_r: list must ascend");
          break;
        }
      }
    } else if (obj.at("beta_r").is_number()) {
      cfg.beta_r = {obj.at("beta_r").get<double>()};
    } else {
      c.complain("objective.beta_r: wrong type");
    }
    for (double b : cfg.beta_r) {
      if (b < 0.0) c.complain("objective.beta_r: values must be >= 0");
    }
  }

  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    c.check_keys(s, "sampler", kSamplerKeys);
    c.get(s, "sampler", "chains", cfg.sampler.chains);
    c.get(s, "sampler", "burn_in_sweeps", cfg.sampler.burn_in_sweeps);
    c.get(s, "sampler", "sweeps_per_sample", cfg.sampler.sweeps_per_sample);
    c.get(s, "sampler", "samples_per_chain", cfg.sampler.samples_per_chain);
    std::string order = "random";
    if (c.get(s, "sampler", "site_order", order)) {
      if (order == "random") {
        cfg.sampler.site_order = SamplerConfig::SiteOrder::random;
      } else if (order == "sequential") {
        cfg.sampler.site_order = SamplerConfig::SiteOrder::sequential;
      } else {
        c.complain("sampler.site_order must be 'random' or 'sequential'");
      }
    }
    try {
      cfg.sampler.validate();
    } catch (const std::exception& e) {
      c.complain(std::string("sampler: ") + e.what());
    }
  }

  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    c.check_keys(o, "optimizer", kOptimizerKeys);
    std::string method = "adam";
    if (c.get(o, "optimizer", "method", method)) {
      if (method == "sgd") {
        cfg.optimizer.method = OptimizerConfig::Method::sgd;
      } else if (method == "adam") {
        cfg.optimizer.method = OptimizerConfig::Method::adam;
      } else if (method == "sr") {
        cfg.optimizer.method = OptimizerConfig::Method::sr;
      } else {
        c.complain("optimizer.method must be sgd, adam, or sr");
      }
    }
    c.get(o, "optimizer", "learning_rate", cfg.optimizer.learning_rate);
    c.get(o, "optimizer", "sr_shift", cfg.optimizer.sr_shift);
    c.get(o, "optimizer", "max_iterations", cfg.optimizer.max_iterations);
    c.get(o, "optimizer", "convergence_threshold", cfg.optimizer.convergence_threshold);
    c.get(o, "optimizer", "convergence_window", cfg.optimizer.convergence_window);
    c.get(o, "optimizer", "warmup_iterations", cfg.optimizer.warmup_iterations);
    c.get(o, "optimizer", "decay", cfg.optimizer.decay);
    c.get(o, "optimizer", "entropy_every", cfg.optimizer.entropy_every);
    long fs = cfg.optimizer.final_samples;
    if (c.get(o, "optimizer", "final_samples", fs)) cfg.optimizer.final_samples = fs;
    c.get(o, "optimizer", "exact_expectations", cfg.optimizer.exact_expectations);
    c.get(o, "optimizer", "checkpoint_every", cfg.checkpoint_every);
  }

  c.get(j, "config", "seed", cfg.seed);
  c.get(j, "config", "output_dir", cfg.output_dir);
  c.get(j, "config", "threads", cfg.threads);

  if (c.problems.empty()) {
    try {
      (void)cfg.hamiltonian();
      (void)cfg.resolved_ansatz_spec();
    } catch (const std::exception& e) {
      c.complain(e.what());
    }
  }
  if (!c.problems.empty()) throw ConfigError(std::move(c.problems));
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  json j;
  json geom;
  if (geometry.kind == Geometry::Kind::chain) {
    geom = {{"kind", "chain"}, {"sites", geometry.num_sites()}};
  } else {
    geom = {{"kind", "square"}, {"lx", geometry.lx}, {"ly", geometry.ly}};
  }
  j["model"] = {{"geometry", geom}, {"j", this->j}, {"h_z", h_z}, {"h_x", h_x}};
  j["ansatz"] = ansatz_section;
  j["objective"]["beta_r"] = beta_r;
  j["sampler"] = {
      {"chains", sampler.chains},
      {"burn_in_sweeps", sampler.burn_in_sweeps},
      {"sweeps_per_sample", sampler.sweeps_per_sample},
      {"samples_per_chain", sampler.samples_per_chain},
      {"site_order",
       sampler.site_order == SamplerConfig::SiteOrder::random ? "random" : "sequential"},
  };
  const char* method = optimizer.method == OptimizerConfig::Method::sgd    ? "sgd"
                       : optimizer.method == OptimizerConfig::Method::adam ? "adam"
                                                                           : "sr";
  j["optimizer"] = {
      {"method", method},
      {"learning_rate", optimizer.learning_rate},
      {"sr_shift", optimizer.sr_shift},
      {"max_iterations", optimizer.max_iterations},
      {"convergence_threshold", optimizer.convergence_threshold},
      {"convergence_window", optimizer.convergence_window},
      {"warmup_iterations", optimizer.warmup_iterations},
      {"decay", optimizer.decay},
      {"entropy_every", optimizer.entropy_every},
      {"final_samples", optimizer.final_samples},
      {"exact_expectations", optimizer.exact_expectations},
      {"checkpoint_every", checkpoint_every},
  };
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["threads"] = threads;
  return j;
}

std::string RunConfig::config_hash() const {
  // Semantic identity of the experiment: seed, output path, and execution
  // settings stay out of the hash.
  json j = to_json();
  j.erase("seed");
  j.erase("output_dir");
  j.erase("threads");
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json RunConfig::resolved_ansatz_spec() const {
  const std::string kind = ansatz_section.value("kind", "");
  const int n = geometry.num_sites();
  json spec;
  spec["sites"] = n;
  if (kind == "mpdo") {
    const int d = ansatz_section.value("bond_dim", 2);
    const int chi = ansatz_section.value("kraus_dim", 2);
    if (geometry.kind == Geometry::Kind::chain) {
      spec["kind"] = "mpdo";
      spec["bond_dim"] = d;
      spec["kraus_dim"] = chi;
    } else {
      // matrix product ansatz on a 2D lattice: one boustrophedon string
      spec["kind"] = "sbdo";
      spec["strings"] = snake_strings(geometry.lx, geometry.ly, 1);
      spec["bond_dim"] = d;
      spec["kraus_dim"] = chi;
    }
  } else if (kind == "sbdo") {
    const int n_s = ansatz_section.value("num_strings", 2);
    if (geometry.kind == Geometry::Kind::chain) {
      if (n_s != 1) {
        throw std::invalid_argument("sbdo on a chain supports num_strings = 1 only");
      }
      std::vector<int> identity(n);
      for (int i = 0; i < n; ++i) identity[i] = i;
      spec["strings"] = std::vector<std::vector<int>>{identity};
    } else {
      spec["strings"] = snake_strings(geometry.lx, geometry.ly, n_s);
    }
    spec["kind"] = "sbdo";
    spec["bond_dim"] = ansatz_section.value("bond_dim", 4);
    spec["kraus_dim"] = ansatz_section.value("kraus_dim", 2);
  } else if (kind == "epdo") {
    const int width = ansatz_section.value("plaquette_width", 2);
    spec["kind"] = "epdo";
    spec["plaquettes"] = default_plaquettes(geometry, width);
    spec["kraus_dim"] =
        ansatz_section.value("kraus_dim", 1 << (geometry.kind == Geometry::Kind::chain
                                                    ? width
                                                    : width * width));
  } else if (kind == "rbm") {
    spec["kind"] = "rbm";
    spec["hidden_density"] = ansatz_section.value("hidden_density", 1.0);
    spec["ancilla_density"] = ansatz_section.value("ancilla_density", 1.0);
  } else {
    throw std::invalid_argument("ansatz.kind must be one of mpdo, epdo, sbdo, rbm");
  }
  return spec;
}

}  // namespace rvmc

#include "treedet/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "treedet/comms.hpp"

namespace treedet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(join(prefix, it.key()), "unknown field");
  }
}

const json* find(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_num(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "must be a number");
  return v.get<double>();
}

long long as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "must be an integer");
  return v.get<long long>();
}

double req_num(const json& obj, const std::string& prefix, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) fail(join(prefix, key), "required field is missing");
  return as_num(*v, join(prefix, key));
}

double opt_num(const json& obj, const std::string& prefix, const std::string& key,
               double dflt) {
  const json* v = find(obj, key);
  return v ? as_num(*v, join(prefix, key)) : dflt;
}

int req_int(const json& obj, const std::string& prefix, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) fail(join(prefix, key), "required field is missing");
  return static_cast<int>(as_int(*v, join(prefix, key)));
}

int opt_int(const json& obj, const std::string& prefix, const std::string& key, int dflt) {
  const json* v = find(obj, key);
  return v ? static_cast<int>(as_int(*v, join(prefix, key))) : dflt;
}

std::uint64_t opt_u64(const json& obj, const std::string& prefix, const std::string& key,
                      std::uint64_t dflt) {
  const json* v = find(obj, key);
  if (!v) return dflt;
  const std::string path = join(prefix, key);
  if (v->is_number_unsigned()) return v->get<std::uint64_t>();
  const long long i = as_int(*v, path);
  if (i < 0) fail(path, "must be non-negative");
  return static_cast<std::uint64_t>(i);
}

bool opt_bool(const json& obj, const std::string& prefix, const std::string& key,
              bool dflt) {
  const json* v = find(obj, key);
  if (!v) return dflt;
  if (!v->is_boolean()) fail(join(prefix, key), "must be a boolean");
  return v->get<bool>();
}

std::string req_str(const json& obj, const std::string& prefix, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) fail(join(prefix, key), "required field is missing");
  if (!v->is_string()) fail(join(prefix, key), "must be a string");
  return v->get<std::string>();
}

std::string opt_str(const json& obj, const std::string& prefix, const std::string& key,
                    const std::string& dflt) {
  const json* v = find(obj, key);
  if (!v) return dflt;
  if (!v->is_string()) fail(join(prefix, key), "must be a string");
  return v->get<std::string>();
}

std::vector<double> req_num_list(const json& obj, const std::string& prefix,
                                 const std::string& key) {
  const json* v = find(obj, key);
  const std::string path = join(prefix, key);
  if (!v) fail(path, "required field is missing");
  if (!v->is_array() || v->empty()) fail(path, "must be a non-empty array of numbers");
  std::vector<double> out;
  for (const json& e : *v) out.push_back(as_num(e, path));
  return out;
}

std::vector<int> opt_int_list(const json& obj, const std::string& prefix,
                              const std::string& key, std::vector<int> dflt) {
  const json* v = find(obj, key);
  if (!v) return dflt;
  const std::string path = join(prefix, key);
  if (!v->is_array() || v->empty()) fail(path, "must be a non-empty array of integers");
  std::vector<int> out;
  for (const json& e : *v) out.push_back(static_cast<int>(as_int(e, path)));
  return out;
}

void require_even_q(int q, const std::string& path) {
  if (q < 2 || q > 12 || q % 2 != 0) fail(path, "must be an even bit count in [2, 12]");
}

IddConfig parse_idd(const json& obj, const std::string& prefix, json& echo) {
  check_keys(obj, prefix,
             {"n", "l", "q", "snr_db", "iterations", "info_bits", "interleaver_bits",
              "detector", "m", "j", "n_l", "llr_clip", "ordering", "channel",
              "block_fading"});
  IddConfig c;
  c.n = req_int(obj, prefix, "n");
  c.l = opt_int(obj, prefix, "l", c.n);
  c.q = req_int(obj, prefix, "q");
  c.snr_db = req_num_list(obj, prefix, "snr_db");
  c.iterations = opt_int(obj, prefix, "iterations", 7);
  c.info_bits = opt_u64(obj, prefix, "info_bits", 200000);
  c.interleaver_bits = opt_int(obj, prefix, "interleaver_bits", 12000);
  c.block_fading = opt_bool(obj, prefix, "block_fading", false);

  const std::string det = opt_str(obj, prefix, "detector", "issma");
  if (det == "issma") {
    c.detector = DetectorKind::kIssma;
  } else if (det == "conventional_ma") {
    c.detector = DetectorKind::kConventionalMa;
  } else if (det == "mmse_pic") {
    c.detector = DetectorKind::kMmsePic;
  } else {
    fail(join(prefix, "detector"), "must be one of issma, conventional_ma, mmse_pic");
  }
  if (c.detector == DetectorKind::kMmsePic) {
    c.search.m = opt_int(obj, prefix, "m", 1);
  } else {
    c.search.m = req_int(obj, prefix, "m");
  }
  c.search.j = opt_int(obj, prefix, "j", 16);
  c.search.n_l = opt_int(obj, prefix, "n_l", 5);
  c.search.llr_clip = opt_num(obj, prefix, "llr_clip", 8.0);
  c.search.metric = c.detector == DetectorKind::kConventionalMa ? Metric::kCausal
                                                                : Metric::kLookahead;
  const std::string ord = opt_str(obj, prefix, "ordering", "vblast");
  if (ord == "vblast") {
    c.search.ordering = Ordering::kVblast;
  } else if (ord == "none") {
    c.search.ordering = Ordering::kNone;
  } else {
    fail(join(prefix, "ordering"), "must be vblast or none");
  }

  std::string kind = "iid";
  double rho_rx = 0.0, rho_tx = 0.0;
  const json* ch = find(obj, "channel");
  if (ch) {
    if (!ch->is_object()) fail(join(prefix, "channel"), "must be an object");
    const std::string cpath = join(prefix, "channel");
    check_keys(*ch, cpath, {"kind", "rho_rx", "rho_tx"});
    kind = req_str(*ch, cpath, "kind");
    if (kind == "kronecker") {
      rho_rx = req_num(*ch, cpath, "rho_rx");
      rho_tx = req_num(*ch, cpath, "rho_tx");
      if (rho_rx < 0.0 || rho_rx >= 1.0 || rho_tx < 0.0 || rho_tx >= 1.0) {
        fail(cpath, "correlation coefficients must lie in [0, 1)");
      }
    } else if (kind != "iid") {
      fail(join(cpath, "kind"), "must be iid or kronecker");
    }
  }
  if (c.n >= 1 && c.l >= 1) {
    c.channel = kind == "iid"
                    ? ChannelModel::iid(c.l, c.n)
                    : ChannelModel::kronecker(exponential_correlation(c.l, rho_rx),
                                              exponential_correlation(c.n, rho_tx));
  }

  echo = json{{"n", c.n},
              {"l", c.l},
              {"q", c.q},
              {"snr_db", c.snr_db},
              {"iterations", c.iterations},
              {"info_bits", c.info_bits},
              {"interleaver_bits", c.interleaver_bits},
              {"detector", det},
              {"m", c.search.m},
              {"j", c.search.j},
              {"n_l", c.search.n_l},
              {"llr_clip", c.search.llr_clip},
              {"ordering", ord},
              {"block_fading", c.block_fading}};
  echo["channel"] = kind == "iid" ? json{{"kind", "iid"}}
                                  : json{{"kind", "kronecker"},
                                         {"rho_rx", rho_rx},
                                         {"rho_tx", rho_tx}};
  return c;
}

CplSweepConfig parse_cpl(const json& obj, const std::string& prefix, json& echo) {
  check_keys(obj, prefix,
             {"n", "l", "q", "snr_db", "trials", "m", "n_l", "metric", "bound_samples"});
  CplSweepConfig c;
  c.n = opt_int(obj, prefix, "n", 5);
  c.l = opt_int(obj, prefix, "l", c.n);
  c.q = opt_int(obj, prefix, "q", 2);
  c.snr_db = req_num_list(obj, prefix, "snr_db");
  c.trials = opt_u64(obj, prefix, "trials", 100000);
  c.m = opt_int(obj, prefix, "m", 1);
  c.n_l = opt_int(obj, prefix, "n_l", 5);
  c.bound_samples = opt_u64(obj, prefix, "bound_samples", 2000);
  const std::string metric = opt_str(obj, prefix, "metric", "lookahead");
  if (metric == "lookahead") {
    c.metric = Metric::kLookahead;
  } else if (metric == "causal") {
    c.metric = Metric::kCausal;
  } else {
    fail(join(prefix, "metric"), "must be lookahead or causal");
  }
  if (c.n < 2) fail(join(prefix, "n"), "must be >= 2");
  if (c.l < c.n) fail(join(prefix, "l"), "must be >= n");
  require_even_q(c.q, join(prefix, "q"));
  if (c.m < 1) fail(join(prefix, "m"), "must be >= 1");
  if (c.n_l < 0) fail(join(prefix, "n_l"), "must be >= 0");
  if (c.trials == 0) fail(join(prefix, "trials"), "must be positive");
  if (c.bound_samples == 0) fail(join(prefix, "bound_samples"), "must be positive");

  echo = json{{"n", c.n},
              {"l", c.l},
              {"q", c.q},
              {"snr_db", c.snr_db},
              {"trials", c.trials},
              {"m", c.m},
              {"n_l", c.n_l},
              {"metric", metric},
              {"bound_samples", c.bound_samples}};
  return c;
}

ScalingConfig parse_scaling(const json& obj, const std::string& prefix, json& echo) {
  check_keys(obj, prefix, {"n_list", "snr_db", "q", "samples", "lambda_max"});
  ScalingConfig c;
  c.n_list = opt_int_list(obj, prefix, "n_list", {5, 10, 15, 20});
  c.snr_db = req_num_list(obj, prefix, "snr_db");
  c.q = opt_int(obj, prefix, "q", 2);
  c.samples = opt_u64(obj, prefix, "samples", 20000);
  c.lambda_max = opt_num(obj, prefix, "lambda_max", 1.0);
  for (const int n : c.n_list) {
    if (n < 2) fail(join(prefix, "n_list"), "entries must be >= 2");
  }
  require_even_q(c.q, join(prefix, "q"));
  if (c.samples == 0) fail(join(prefix, "samples"), "must be positive");
  if (!(c.lambda_max > 0.0)) fail(join(prefix, "lambda_max"), "must be positive");

  echo = json{{"n_list", c.n_list},
              {"snr_db", c.snr_db},
              {"q", c.q},
              {"samples", c.samples},
              {"lambda_max", c.lambda_max}};
  return c;
}

SinrConfig parse_sinr(const json& obj, const std::string& prefix, json& echo) {
  check_keys(obj, prefix, {"n", "l", "snr_db", "samples"});
  SinrConfig c;
  c.n = req_int(obj, prefix, "n");
  c.l = opt_int(obj, prefix, "l", c.n);
  c.snr_db = req_num_list(obj, prefix, "snr_db");
  c.samples = opt_int(obj, prefix, "samples", 100);
  if (c.n < 2) fail(join(prefix, "n"), "must be >= 2");
  if (c.l < c.n) fail(join(prefix, "l"), "must be >= n");
  if (c.samples < 1) fail(join(prefix, "samples"), "must be >= 1");

  echo = json{{"n", c.n}, {"l", c.l}, {"snr_db", c.snr_db}, {"samples", c.samples}};
  return c;
}

ComplexityConfig parse_complexity(const json& obj, const std::string& prefix, json& echo) {
  check_keys(obj, prefix, {"n", "l", "q", "m", "n_l_list", "vectors", "snr_db"});
  ComplexityConfig c;
  c.n = opt_int(obj, prefix, "n", 12);
  c.l = opt_int(obj, prefix, "l", c.n);
  c.q = opt_int(obj, prefix, "q", 4);
  c.m = req_int(obj, prefix, "m");
  c.n_l_list = opt_int_list(obj, prefix, "n_l_list", {2, 3, 5, 8});
  c.vectors = opt_int(obj, prefix, "vectors", 200);
  c.snr_db = opt_num(obj, prefix, "snr_db", 15.0);
  if (c.n < 1) fail(join(prefix, "n"), "must be >= 1");
  if (c.l < c.n) fail(join(prefix, "l"), "must be >= n");
  require_even_q(c.q, join(prefix, "q"));
  if (c.m < 1) fail(join(prefix, "m"), "must be >= 1");
  for (const int v : c.n_l_list) {
    if (v < 0) fail(join(prefix, "n_l_list"), "entries must be >= 0");
  }
  if (c.vectors < 1) fail(join(prefix, "vectors"), "must be >= 1");

  echo = json{{"n", c.n},      {"l", c.l},
              {"q", c.q},      {"m", c.m},
              {"n_l_list", c.n_l_list}, {"vectors", c.vectors},
              {"snr_db", c.snr_db}};
  return c;
}

AsymptoticsConfig parse_asym(const json& obj, const std::string& prefix, json& echo) {
  check_keys(obj, prefix, {"gamma", "beta", "lambda_min", "lambda_max", "sigma2"});
  AsymptoticsConfig c;
  c.gamma = opt_num(obj, prefix, "gamma", 0.5);
  c.beta = opt_num(obj, prefix, "beta", 1.0);
  c.lambda_min = opt_num(obj, prefix, "lambda_min", 1.0);
  c.lambda_max = opt_num(obj, prefix, "lambda_max", 1.0);
  c.sigma2 = req_num_list(obj, prefix, "sigma2");
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) fail(join(prefix, "gamma"), "must lie in (0, 1)");
  if (!(c.beta > 0.0 && c.beta <= 1.0)) fail(join(prefix, "beta"), "must lie in (0, 1]");
  if (!(c.lambda_min > 0.0 && c.lambda_max >= c.lambda_min)) {
    fail(join(prefix, "lambda_min"), "need 0 < lambda_min <= lambda_max");
  }
  for (const double s : c.sigma2) {
    if (!(s > 0.0)) fail(join(prefix, "sigma2"), "entries must be positive");
  }

  echo = json{{"gamma", c.gamma},
              {"beta", c.beta},
              {"lambda_min", c.lambda_min},
              {"lambda_max", c.lambda_max},
              {"sigma2", c.sigma2}};
  return c;
}

std::string subkey_for(const std::string& experiment) {
  if (experiment == "ber_sweep") return "idd";
  if (experiment == "cpl_sweep") return "cpl";
  if (experiment == "scaling_gain") return "scaling";
  if (experiment == "sinr_bounds") return "sinr";
  if (experiment == "complexity_report") return "complexity";
  return "asymptotics";
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: root must be an object");
  ExperimentConfig cfg;
  cfg.experiment = req_str(j, "", "experiment");
  static const char* kKinds[] = {"ber_sweep",   "cpl_sweep",         "scaling_gain",
                                 "sinr_bounds", "complexity_report", "asymptotics"};
  bool known = false;
  for (const char* k : kKinds) known = known || cfg.experiment == k;
  if (!known) {
    fail("experiment",
         "must be one of ber_sweep, cpl_sweep, scaling_gain, sinr_bounds, "
         "complexity_report, asymptotics");
  }
  cfg.seed = opt_u64(j, "", "seed", 1);
  cfg.workers = opt_int(j, "", "workers", 1);
  if (cfg.workers < 1) fail("workers", "must be >= 1");
  cfg.out = opt_str(j, "", "out", cfg.experiment + ".csv");
  if (cfg.out.empty()) fail("out", "must be a non-empty path");

  const std::string sub = subkey_for(cfg.experiment);
  check_keys(j, "", {"experiment", "seed", "workers", "out", sub.c_str()});

  const json* s = find(j, sub);
  if (s && !s->is_object()) fail(sub, "must be an object");
  const json empty = json::object();
  const json& sobj = s ? *s : empty;

  json echo;
  if (cfg.experiment == "ber_sweep") {
    cfg.idd = parse_idd(sobj, sub, echo);
    cfg.idd.seed = cfg.seed;
    cfg.idd.workers = cfg.workers;
    validate_idd(cfg.idd);
  } else if (cfg.experiment == "cpl_sweep") {
    cfg.cpl = parse_cpl(sobj, sub, echo);
  } else if (cfg.experiment == "scaling_gain") {
    cfg.scaling = parse_scaling(sobj, sub, echo);
  } else if (cfg.experiment == "sinr_bounds") {
    cfg.sinr = parse_sinr(sobj, sub, echo);
  } else if (cfg.experiment == "complexity_report") {
    cfg.complexity = parse_complexity(sobj, sub, echo);
  } else {
    cfg.asym = parse_asym(sobj, sub, echo);
  }

  cfg.resolved = json{{"experiment", cfg.experiment},
                      {"seed", cfg.seed},
                      {"workers", cfg.workers},
                      {"out", cfg.out},
                      {sub, echo}};
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: not valid JSON: " + path);
  for (const std::string& o : overrides) apply_override(j, o);
  return parse_config(j);
}

void apply_override(nlohmann::json& j, const std::string& expr) {
  const std::size_t eq = expr.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set: expected key=value, got " + expr);
  }
  const std::string key = expr.substr(0, eq);
  const std::string val = expr.substr(eq + 1);

  json parsed = json::parse(val, nullptr, false);
  if (parsed.is_discarded()) parsed = val;  // bare words become strings

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("--set: empty path segment in " + key);
    if (!node->is_object()) throw ConfigError("--set: " + key + " crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

std::string config_hash(const nlohmann::json& resolved) {
  json j = resolved;
  j.erase("out");
  j.erase("workers");
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace treedet

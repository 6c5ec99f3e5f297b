#include "tfe/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace tfe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool to_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

bool to_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  out = static_cast<int>(v);
  return static_cast<long>(out) == v;
}

bool to_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty() || s[0] == '-') return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtoull(s.c_str(), &end, 10);
  return errno == 0 && end == s.c_str() + s.size();
}

bool to_double_list(const std::string& s, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!to_double(trim(item), v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

struct Entry {
  int line;
  std::string value;
};

}  // namespace

ParseResult parse_config(const std::string& text) {
  ParseResult res;
  std::vector<ConfigError>& errs = res.errors;
  std::map<std::string, Entry> kv;

  std::stringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back({lineno, "", "expected 'key = value'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      errs.push_back({lineno, "", "empty key"});
      continue;
    }
    if (value.empty()) {
      errs.push_back({lineno, key, "empty value"});
      continue;
    }
    if (kv.count(key)) {
      errs.push_back({lineno, key, "duplicate key"});
      continue;
    }
    kv[key] = {lineno, value};
  }

  RunConfig cfg;
  auto take = [&](const char* key) -> const Entry* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    return &it->second;
  };
  auto bad = [&](const char* key, const Entry& e, const std::string& why) {
    errs.push_back({e.line, key, why});
  };

  auto get_int = [&](const char* key, int& dst, auto constraint, const char* why) {
    if (const Entry* e = take(key)) {
      int v;
      if (!to_int(e->value, v))
        bad(key, *e, "not an integer: '" + e->value + "'");
      else if (!constraint(v))
        bad(key, *e, why);
      else
        dst = v;
    }
  };
  auto get_double = [&](const char* key, double& dst, auto constraint, const char* why) {
    if (const Entry* e = take(key)) {
      double v;
      if (!to_double(e->value, v))
        bad(key, *e, "not a real number: '" + e->value + "'");
      else if (!constraint(v))
        bad(key, *e, why);
      else
        dst = v;
    }
  };

  get_int("dim", cfg.dim, [](int v) { return v == 1 || v == 2; }, "dim must be 1 or 2");
  get_int("n", cfg.n, [](int v) { return v >= 4; }, "n >= 4");
  get_double("length", cfg.length, [](double v) { return v > 0; }, "length > 0");
  get_double("t_final", cfg.t_final, [](double v) { return v > 0; }, "t_final > 0");
  get_int("n_steps", cfg.n_steps, [](int v) { return v >= 1; }, "n_steps >= 1");
  get_int("snapshot_stride", cfg.snapshot_stride, [](int v) { return v >= 0; },
          "snapshot_stride >= 0");
  get_int("max_newton", cfg.max_newton, [](int v) { return v >= 1; }, "max_newton >= 1");
  get_int("evi_tests", cfg.evi_tests, [](int v) { return v >= 1; }, "evi_tests >= 1");
  get_int("threads", cfg.threads, [](int v) { return v >= 1; }, "threads >= 1");

  if (const Entry* e = take("truncation")) {
    double v;
    if (e->value == "none") {
      cfg.truncation.reset();
    } else if (e->value == "auto") {
      cfg.truncation_auto = true;
    } else if (to_double(e->value, v) && v > 0) {
      cfg.truncation = v;
    } else {
      bad("truncation", *e, "must be a positive real, 'auto', or 'none'");
    }
  }
  if (const Entry* e = take("c_star")) {
    double v;
    if (e->value == "auto")
      cfg.c_star.reset();
    else if (to_double(e->value, v) && v > 0)
      cfg.c_star = v;
    else
      bad("c_star", *e, "must be a positive real or 'auto'");
  }
  if (const Entry* e = take("grad_tol")) {
    double v;
    if (e->value == "auto")
      cfg.grad_tol.reset();
    else if (to_double(e->value, v) && v > 0)
      cfg.grad_tol = v;
    else
      bad("grad_tol", *e, "must be a positive real or 'auto'");
  }
  if (const Entry* e = take("max_cg")) {
    int v;
    if (e->value == "auto")
      cfg.max_cg.reset();
    else if (to_int(e->value, v) && v >= 1)
      cfg.max_cg = v;
    else
      bad("max_cg", *e, "must be a positive integer or 'auto'");
  }
  if (const Entry* e = take("out")) cfg.out_dir = e->value;

  if (const Entry* e = take("ic.preset")) {
    if (!preset_exists(e->value))
      bad("ic.preset", *e,
          "unknown preset '" + e->value +
              "' (cosine, gaussian_bump, cone, random_bandlimited, from_file)");
    else
      cfg.ic.name = e->value;
  }
  get_double("ic.amplitude", cfg.ic.amplitude,
             [](double) { return true; }, "");
  get_int("ic.k", cfg.ic.k, [](int v) { return v >= 1; }, "ic.k >= 1");
  get_double("ic.width", cfg.ic.width, [](double v) { return v > 0; }, "ic.width > 0");
  get_double("ic.slope", cfg.ic.slope, [](double) { return true; }, "");
  get_int("ic.max_mode", cfg.ic.max_mode, [](int v) { return v >= 1; }, "ic.max_mode >= 1");
  if (const Entry* e = take("ic.seed")) {
    std::uint64_t v;
    if (!to_u64(e->value, v))
      bad("ic.seed", *e, "not an unsigned integer: '" + e->value + "'");
    else
      cfg.ic.seed = v;
  }
  if (const Entry* e = take("ic.path")) cfg.ic.path = e->value;
  if (const Entry* e = take("ic.center")) {
    std::vector<double> c;
    if (!to_double_list(e->value, c))
      bad("ic.center", *e, "expected a comma-separated list of reals");
    else
      cfg.ic.center = c;
  }

  if (const Entry* e = take("sweep.axis")) {
    const std::string& v = e->value;
    if (v != "n_steps" && v != "n" && v != "amplitude" && v != "truncation")
      bad("sweep.axis", *e, "axis must be one of n_steps, n, amplitude, truncation");
    else
      cfg.sweep_axis = v;
  }
  if (const Entry* e = take("sweep.values")) {
    std::vector<double> vals;
    if (!to_double_list(e->value, vals))
      bad("sweep.values", *e, "expected a comma-separated list of reals");
    else
      cfg.sweep_values = vals;
  }
  if (const Entry* e = take("convergence.steps")) {
    std::vector<double> vals;
    bool ok = to_double_list(e->value, vals);
    std::vector<int> steps;
    if (ok) {
      int prev = 0;
      for (double v : vals) {
        const int s = static_cast<int>(v);
        if (static_cast<double>(s) != v || s < 1 || s <= prev) {
          ok = false;
          break;
        }
        steps.push_back(s);
        prev = s;
      }
    }
    if (!ok)
      bad("convergence.steps", *e, "expected an increasing list of positive integers");
    else
      cfg.convergence_steps = steps;
  }

  static const char* known[] = {
      "dim", "n", "length", "t_final", "n_steps", "snapshot_stride",
      "max_newton", "evi_tests", "threads", "truncation", "c_star", "grad_tol",
      "max_cg", "out", "ic.preset", "ic.amplitude", "ic.k", "ic.width",
      "ic.slope", "ic.max_mode", "ic.seed", "ic.path", "ic.center",
      "sweep.axis", "sweep.values", "convergence.steps"};
  for (const auto& [key, entry] : kv) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) errs.push_back({entry.line, key, "unknown key"});
  }

  auto require = [&](const char* key) {
    if (!kv.count(key)) errs.push_back({0, key, "required key missing"});
  };
  require("dim");
  require("n");
  require("ic.preset");
  require("t_final");
  require("n_steps");

  if (kv.count("ic.preset") && cfg.ic.name == "from_file" && cfg.ic.path.empty())
    errs.push_back({0, "ic.path", "required for preset from_file"});
  if (!cfg.sweep_axis.empty() && cfg.sweep_values.empty())
    errs.push_back({0, "sweep.values", "required when sweep.axis is set"});
  if (cfg.ic.center.size() > 2)
    errs.push_back({0, "ic.center", "at most one value per axis"});

  if (errs.empty()) res.config = cfg;
  return res;
}

ParseResult parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.errors.push_back({0, path, "cannot open config file"});
    return r;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace tfe

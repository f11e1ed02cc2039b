#include "tgc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tgc/errors.hpp"

namespace tgc {

Field FieldPreset::materialize(const Domain& domain) const {
  Field f(domain);
  const auto m = domain.cell_count();
  switch (kind) {
    case Kind::constant:
      for (Eigen::Index i = 0; i < m; ++i) f[i] = value;
      break;
    case Kind::cosine:
      for (Eigen::Index i = 0; i < m; ++i) {
        double v = amplitude * std::cos(std::numbers::pi * domain.center(i, 0) / domain.lengths[0]);
        if (domain.dim == 2)
          v *= std::cos(std::numbers::pi * domain.center(i, 1) / domain.lengths[1]);
        f[i] = v + offset;
      }
      break;
    case Kind::gaussian:
      for (Eigen::Index i = 0; i < m; ++i) {
        double d2 = 0.0;
        for (int axis = 0; axis < domain.dim; ++axis) {
          const double d = domain.center(i, axis) - 0.5 * domain.lengths[axis];
          d2 += d * d;
        }
        f[i] = amplitude * std::exp(-d2 / (2.0 * width * width)) + offset;
      }
      break;
  }
  return f;
}

Domain RunConfig::domain() const {
  std::array<double, 2> len{1.0, 1.0};
  std::array<std::int64_t, 2> cel{2, 1};
  for (int axis = 0; axis < dim && axis < 2; ++axis) {
    if (axis < static_cast<int>(lengths.size())) len[axis] = lengths[axis];
    if (axis < static_cast<int>(cells.size())) cel[axis] = cells[axis];
  }
  return build_domain(dim, len, cel);
}

StateSnapshot RunConfig::initial_snapshot(const Domain& domain) const {
  return StateSnapshot{mu0.materialize(domain), phi0.materialize(domain),
                       sigma0.materialize(domain)};
}

CostSpec RunConfig::cost_spec(const Domain& domain) const {
  CostSpec cost;
  cost.gamma1 = gamma1;
  cost.gamma2 = gamma2;
  cost.gamma3 = gamma3;
  cost.gamma4 = gamma4;
  cost.gamma5 = gamma5;
  cost.gamma6 = gamma6;
  cost.phi_Q.assign(steps, phi_Q.materialize(domain));
  cost.sigma_Q.assign(steps, sigma_Q.materialize(domain));
  cost.phi_Omega = phi_Omega.materialize(domain);
  cost.sigma_Omega = sigma_Omega.materialize(domain);
  return cost;
}

Problem RunConfig::problem() const {
  Problem p;
  p.params = model;
  p.potential = potential;
  const Domain dom = domain();
  p.initial = initial_snapshot(dom);
  p.grid = time_grid();
  p.box = box;
  p.cost = cost_spec(dom);
  p.solver = solver;
  return p;
}

namespace {

struct RawValue {
  std::string value;
  int line = 0;
  bool consumed = false;
};

using RawSection = std::map<std::string, RawValue>;
using RawConfig = std::map<std::string, RawSection>;

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError(lineno, "empty section name");
      raw[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    if (section.empty()) throw ParseError(lineno, "key outside any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    if (raw[section].count(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
    raw[section][key] = RawValue{value, lineno, false};
  }
  return raw;
}

void apply_overrides(RawConfig& raw, const std::vector<std::string>& overrides) {
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("override '" + ov + "' is not section.key=value");
    const std::string path = trim(ov.substr(0, eq));
    const std::string value = trim(ov.substr(eq + 1));
    const std::size_t dot = path.find('.');
    if (dot == std::string::npos)
      throw InvalidArgument("override '" + ov + "' is not section.key=value");
    raw[path.substr(0, dot)][path.substr(dot + 1)] = RawValue{value, 0, false};
  }
}

class Extractor {
 public:
  explicit Extractor(RawConfig& raw) : raw_(raw) {}

  bool has(const std::string& section, const std::string& key) {
    auto s = raw_.find(section);
    return s != raw_.end() && s->second.count(key) > 0;
  }

  std::string take(const std::string& section, const std::string& key) {
    RawValue& rv = raw_[section][key];
    rv.consumed = true;
    return rv.value;
  }

  int line(const std::string& section, const std::string& key) {
    return raw_[section][key].line;
  }

  double number(const std::string& section, const std::string& key, double fallback) {
    if (!has(section, key)) return fallback;
    const std::string v = take(section, key);
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return x;
    } catch (...) {
      throw ParseError(line(section, key), "expected a number for " + section + "." + key);
    }
  }

  std::int64_t integer(const std::string& section, const std::string& key, std::int64_t fallback) {
    if (!has(section, key)) return fallback;
    const std::string v = take(section, key);
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return x;
    } catch (...) {
      throw ParseError(line(section, key), "expected an integer for " + section + "." + key);
    }
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) {
    if (!has(section, key)) return fallback;
    const std::string v = take(section, key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ParseError(line(section, key), "expected true/false for " + section + "." + key);
  }

  std::string word(const std::string& section, const std::string& key,
                   const std::string& fallback) {
    if (!has(section, key)) return fallback;
    return take(section, key);
  }

  std::vector<double> number_list(const std::string& section, const std::string& key,
                                  std::vector<double> fallback) {
    if (!has(section, key)) return fallback;
    const std::string v = take(section, key);
    std::vector<double> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument("");
      } catch (...) {
        throw ParseError(line(section, key), "expected a comma list of numbers for " + section +
                                                 "." + key);
      }
    }
    if (out.empty())
      throw ParseError(line(section, key), "empty list for " + section + "." + key);
    return out;
  }

  std::vector<std::int64_t> integer_list(const std::string& section, const std::string& key,
                                         std::vector<std::int64_t> fallback) {
    if (!has(section, key)) return fallback;
    std::vector<double> nums = number_list(section, key, {});
    std::vector<std::int64_t> out;
    for (double x : nums) {
      if (x != std::floor(x))
        throw ParseError(line(section, key), "expected integers for " + section + "." + key);
      out.push_back(static_cast<std::int64_t>(x));
    }
    return out;
  }

  FieldPreset preset(const std::string& section, const std::string& name,
                     const FieldPreset& fallback) {
    FieldPreset p = fallback;
    const std::string kind = word(section, name, "");
    if (!kind.empty()) {
      if (kind == "constant")
        p.kind = FieldPreset::Kind::constant;
      else if (kind == "cosine")
        p.kind = FieldPreset::Kind::cosine;
      else if (kind == "gaussian")
        p.kind = FieldPreset::Kind::gaussian;
      else
        throw ParseError(line(section, name),
                         "unknown preset '" + kind + "' (constant|cosine|gaussian)");
    }
    p.value = number(section, name + "_value", p.value);
    p.amplitude = number(section, name + "_amplitude", p.amplitude);
    p.offset = number(section, name + "_offset", p.offset);
    p.width = number(section, name + "_width", p.width);
    return p;
  }

  void reject_unknown() const {
    static const std::map<std::string, bool> known_sections = {
        {"domain", true},  {"time", true}, {"model", true},     {"potential", true},
        {"h", true},       {"init", true}, {"cost", true},      {"box", true},
        {"optimizer", true}, {"solver", true}, {"output", true}, {"run", true}};
    for (const auto& [section, keys] : raw_) {
      if (!known_sections.count(section))
        throw ValidationError("unknown section [" + section + "]");
      for (const auto& [key, rv] : keys)
        if (!rv.consumed)
          throw ValidationError("unknown key " + section + "." + key +
                                (rv.line > 0 ? " (line " + std::to_string(rv.line) + ")" : ""));
    }
  }

 private:
  RawConfig& raw_;
};

void validate_config(const RunConfig& cfg) {
  cfg.domain();  // throws on bad dim/lengths/cells
  TimeGrid grid = cfg.time_grid();
  grid.validate();
  cfg.model.validate();
  if (cfg.potential.variant != PotentialVariant::regular && !(cfg.potential.k > 1.0))
    throw ValidationError("potential: k must be > 1 for the logarithmic variants");
  if (cfg.potential.variant == PotentialVariant::yosida_logarithmic &&
      !(cfg.potential.eps > 0.0 && cfg.potential.eps < 1.0))
    throw ValidationError("potential: eps must be in (0,1)");
  if (cfg.h_variant != "quintic_smoothstep")
    throw ValidationError("h: unknown variant '" + cfg.h_variant + "'");
  const double gammas[] = {cfg.gamma1, cfg.gamma2, cfg.gamma3, cfg.gamma4, cfg.gamma5, cfg.gamma6};
  double total = 0.0;
  for (double g : gammas) {
    if (g < 0.0) throw ValidationError("cost: weights must be >= 0 (A5)");
    total += g;
  }
  if (total == 0.0) throw ValidationError("cost: at least one weight must be positive (A5)");
  cfg.box.validate();
  cfg.optimizer.validate();
  if (!(cfg.solver.newton_tol > 0.0)) throw ValidationError("solver: newton_tol must be > 0");
  if (cfg.solver.newton_max_iters < 1)
    throw ValidationError("solver: newton_max_iters must be >= 1");
  if (cfg.snapshot_cadence < 1) throw ValidationError("output: snapshot_cadence must be >= 1");
}

std::string preset_kind_name(FieldPreset::Kind kind) {
  switch (kind) {
    case FieldPreset::Kind::constant:
      return "constant";
    case FieldPreset::Kind::cosine:
      return "cosine";
    default:
      return "gaussian";
  }
}

std::string variant_name(PotentialVariant v) {
  switch (v) {
    case PotentialVariant::regular:
      return "regular";
    case PotentialVariant::logarithmic:
      return "logarithmic";
    default:
      return "yosida_logarithmic";
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  RawConfig raw = tokenize(text);
  apply_overrides(raw, overrides);
  Extractor ex(raw);

  RunConfig cfg;
  cfg.dim = static_cast<int>(ex.integer("domain", "dim", cfg.dim));
  cfg.lengths = ex.number_list("domain", "lengths", cfg.lengths);
  cfg.cells = ex.integer_list("domain", "cells", cfg.cells);

  cfg.T = ex.number("time", "T", cfg.T);
  cfg.steps = static_cast<int>(ex.integer("time", "steps", cfg.steps));

  cfg.model.alpha = ex.number("model", "alpha", cfg.model.alpha);
  cfg.model.beta = ex.number("model", "beta", cfg.model.beta);
  cfg.model.chi = ex.number("model", "chi", cfg.model.chi);
  cfg.model.P = ex.number("model", "P", cfg.model.P);
  cfg.model.A = ex.number("model", "A", cfg.model.A);
  cfg.model.B = ex.number("model", "B", cfg.model.B);
  cfg.model.D = ex.number("model", "D", cfg.model.D);
  cfg.model.sigma_s = ex.number("model", "sigma_s", cfg.model.sigma_s);

  const std::string variant = ex.word("potential", "variant", "regular");
  if (variant == "regular")
    cfg.potential.variant = PotentialVariant::regular;
  else if (variant == "logarithmic")
    cfg.potential.variant = PotentialVariant::logarithmic;
  else if (variant == "yosida_logarithmic")
    cfg.potential.variant = PotentialVariant::yosida_logarithmic;
  else
    throw ValidationError("potential: unknown variant '" + variant + "'");
  cfg.potential.k = ex.number("potential", "k", cfg.potential.k);
  cfg.potential.eps = ex.number("potential", "eps", cfg.potential.eps);

  cfg.h_variant = ex.word("h", "variant", cfg.h_variant);

  FieldPreset mu0_default;  // constant 0
  FieldPreset phi0_default;
  phi0_default.kind = FieldPreset::Kind::cosine;
  phi0_default.amplitude = 0.5;
  FieldPreset sigma0_default;
  sigma0_default.value = 0.5;
  cfg.mu0 = ex.preset("init", "mu0", mu0_default);
  cfg.phi0 = ex.preset("init", "phi0", phi0_default);
  cfg.sigma0 = ex.preset("init", "sigma0", sigma0_default);

  cfg.gamma1 = ex.number("cost", "gamma1", cfg.gamma1);
  cfg.gamma2 = ex.number("cost", "gamma2", cfg.gamma2);
  cfg.gamma3 = ex.number("cost", "gamma3", cfg.gamma3);
  cfg.gamma4 = ex.number("cost", "gamma4", cfg.gamma4);
  cfg.gamma5 = ex.number("cost", "gamma5", cfg.gamma5);
  cfg.gamma6 = ex.number("cost", "gamma6", cfg.gamma6);
  FieldPreset phiQ_default;
  phiQ_default.value = -0.5;
  FieldPreset sigmaQ_default;
  sigmaQ_default.value = 0.5;
  cfg.phi_Q = ex.preset("cost", "phi_Q", phiQ_default);
  cfg.sigma_Q = ex.preset("cost", "sigma_Q", sigmaQ_default);
  cfg.phi_Omega = ex.preset("cost", "phi_Omega", phiQ_default);
  cfg.sigma_Omega = ex.preset("cost", "sigma_Omega", sigmaQ_default);

  cfg.box.u_lo = ex.number("box", "u_lo", cfg.box.u_lo);
  cfg.box.u_hi = ex.number("box", "u_hi", cfg.box.u_hi);
  cfg.box.w_lo = ex.number("box", "w_lo", cfg.box.w_lo);
  cfg.box.w_hi = ex.number("box", "w_hi", cfg.box.w_hi);

  cfg.optimizer.max_iters =
      static_cast<int>(ex.integer("optimizer", "max_iters", cfg.optimizer.max_iters));
  cfg.optimizer.stationarity_tol = ex.number("optimizer", "tol", cfg.optimizer.stationarity_tol);
  cfg.optimizer.armijo_c1 = ex.number("optimizer", "armijo_c1", cfg.optimizer.armijo_c1);
  cfg.optimizer.backtrack_factor =
      ex.number("optimizer", "backtrack_factor", cfg.optimizer.backtrack_factor);
  cfg.optimizer.initial_step = ex.number("optimizer", "initial_step", cfg.optimizer.initial_step);
  cfg.optimizer.probe_step = ex.number("optimizer", "probe_step", cfg.optimizer.probe_step);
  const std::string rule = ex.word("optimizer", "step_rule", "barzilai_borwein");
  if (rule == "fixed")
    cfg.optimizer.step_rule = StepRule::fixed;
  else if (rule == "barzilai_borwein")
    cfg.optimizer.step_rule = StepRule::barzilai_borwein;
  else
    throw ValidationError("optimizer: unknown step_rule '" + rule + "'");

  cfg.solver.newton_tol = ex.number("solver", "newton_tol", cfg.solver.newton_tol);
  cfg.solver.newton_max_iters =
      static_cast<int>(ex.integer("solver", "newton_max_iters", cfg.solver.newton_max_iters));
  cfg.solver.store_factorizations =
      ex.boolean("solver", "store_factorizations", cfg.solver.store_factorizations);

  cfg.output_directory = ex.word("output", "directory", cfg.output_directory);
  cfg.snapshot_cadence =
      static_cast<int>(ex.integer("output", "snapshot_cadence", cfg.snapshot_cadence));

  cfg.seed = static_cast<std::uint64_t>(ex.integer("run", "seed", cfg.seed));

  ex.reject_unknown();
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, overrides);
}

namespace {

void echo_preset(std::ostringstream& out, const std::string& name, const FieldPreset& p) {
  out << name << " = " << preset_kind_name(p.kind) << "\n";
  out << name << "_value = " << p.value << "\n";
  out << name << "_amplitude = " << p.amplitude << "\n";
  out << name << "_offset = " << p.offset << "\n";
  out << name << "_width = " << p.width << "\n";
}

}  // namespace

std::string RunConfig::echo() const {
  std::ostringstream out;
  out.precision(17);
  out << "[domain]\ndim = " << dim << "\nlengths = ";
  for (std::size_t i = 0; i < lengths.size(); ++i) out << (i ? "," : "") << lengths[i];
  out << "\ncells = ";
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
  out << "\n\n[time]\nT = " << T << "\nsteps = " << steps << "\n";
  out << "\n[model]\nalpha = " << model.alpha << "\nbeta = " << model.beta
      << "\nchi = " << model.chi << "\nP = " << model.P << "\nA = " << model.A
      << "\nB = " << model.B << "\nD = " << model.D << "\nsigma_s = " << model.sigma_s << "\n";
  out << "\n[potential]\nvariant = " << variant_name(potential.variant) << "\nk = " << potential.k
      << "\neps = " << potential.eps << "\n";
  out << "\n[h]\nvariant = " << h_variant << "\n";
  out << "\n[init]\n";
  echo_preset(out, "mu0", mu0);
  echo_preset(out, "phi0", phi0);
  echo_preset(out, "sigma0", sigma0);
  out << "\n[cost]\ngamma1 = " << gamma1 << "\ngamma2 = " << gamma2 << "\ngamma3 = " << gamma3
      << "\ngamma4 = " << gamma4 << "\ngamma5 = " << gamma5 << "\ngamma6 = " << gamma6 << "\n";
  echo_preset(out, "phi_Q", phi_Q);
  echo_preset(out, "sigma_Q", sigma_Q);
  echo_preset(out, "phi_Omega", phi_Omega);
  echo_preset(out, "sigma_Omega", sigma_Omega);
  out << "\n[box]\nu_lo = " << box.u_lo << "\nu_hi = " << box.u_hi << "\nw_lo = " << box.w_lo
      << "\nw_hi = " << box.w_hi << "\n";
  out << "\n[optimizer]\nmax_iters = " << optimizer.max_iters
      << "\ntol = " << optimizer.stationarity_tol << "\narmijo_c1 = " << optimizer.armijo_c1
      << "\nbacktrack_factor = " << optimizer.backtrack_factor
      << "\ninitial_step = " << optimizer.initial_step << "\nprobe_step = " << optimizer.probe_step
      << "\nstep_rule = "
      << (optimizer.step_rule == StepRule::fixed ? "fixed" : "barzilai_borwein") << "\n";
  out << "\n[solver]\nnewton_tol = " << solver.newton_tol
      << "\nnewton_max_iters = " << solver.newton_max_iters << "\nstore_factorizations = "
      << (solver.store_factorizations ? "true" : "false") << "\n";
  out << "\n[output]\ndirectory = " << output_directory
      << "\nsnapshot_cadence = " << snapshot_cadence << "\n";
  out << "\n[run]\nseed = " << seed << "\n";
  return out.str();
}

}  // namespace tgc

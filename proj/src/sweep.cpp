#include "twistphase/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "twistphase/errors.hpp"
#include "twistphase/parallel.hpp"

namespace twistphase {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Token {
  std::string key;
  std::string value;
  std::size_t line;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    for (std::string word; ls >> word;) {
      auto eq = word.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == word.size())
        throw ParseError("expected key=value, got '" + word + "'", lineno);
      out.push_back({word.substr(0, eq), word.substr(eq + 1), lineno});
    }
  }
  return out;
}

double to_double(const Token& t, std::string_view s) {
  std::string str(s);
  try {
    std::size_t used = 0;
    double v = std::stod(str, &used);
    if (used != str.size() || !std::isfinite(v)) throw std::invalid_argument(str);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("malformed number '" + str + "' for " + t.key, t.line);
  }
}

int to_int(const Token& t, std::string_view s) {
  std::string str(s);
  try {
    std::size_t used = 0;
    long v = std::stol(str, &used);
    if (used != str.size() || v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      throw std::invalid_argument(str);
    return static_cast<int>(v);
  } catch (const std::logic_error&) {
    throw ParseError("malformed integer '" + str + "' for " + t.key, t.line);
  }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

std::vector<int> to_int_list(const Token& t) {
  std::vector<int> out;
  for (auto part : split(t.value, ',')) out.push_back(to_int(t, part));
  return out;
}

bool is_sweep(const std::string& v) { return v.rfind("sweep(", 0) == 0; }

SweptParameter to_sweep(const Token& t) {
  if (t.value.back() != ')') throw ParseError("malformed sweep(...) for " + t.key, t.line);
  auto inner = std::string_view(t.value).substr(6, t.value.size() - 7);
  auto parts = split(inner, ',');
  if (parts.size() != 3) throw ParseError("sweep needs (start,stop,count)", t.line);
  SweptParameter s{t.key, to_double(t, parts[0]), to_double(t, parts[1]), to_int(t, parts[2])};
  if (s.count < 2) throw ParseError("sweep count must be >= 2", t.line);
  if (!(s.start < s.stop)) throw ParseError("sweep needs start < stop", t.line);
  return s;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ordered_json json_number(double x) {
  if (std::isfinite(x)) return x == 0.0 ? 0.0 : x;
  return fmt(x);
}

double from_json_number(const ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "nan") return kNaN;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw std::invalid_argument("non-numeric JSONL field");
}

ResultRow nan_row(double param, double min_gap, long n_singular) {
  return {param, kNaN, kNaN, kNaN, kNaN, kNaN, min_gap, n_singular};
}

/// One table row under the configured singular-mode policy.
ResultRow evaluate_row(const ModelSpec& model, const MomentumGrid& grid, const EvalOptions& eo, double param,
                       SingularPolicy policy, bool strict, double& max_factor) {
  double gap = kNaN;
  try {
    gap = min_gap(model, grid).min_gap;
    auto r = evaluate(model, grid, eo);
    max_factor = std::max(max_factor, r.max_factor_abs);
    if (!r.singular_modes.empty()) {
      if (strict)
        throw EvaluationError(std::to_string(r.singular_modes.size()) + " singular mode(s), first at k = " +
                              r.singular_modes.front().str());
      if (policy == SingularPolicy::NanRow)
        return nan_row(param, gap, static_cast<long>(r.singular_modes.size()));
    }
    return make_row(param, r, gap);
  } catch (const EvaluationError&) {
    if (strict) throw;
    return nan_row(param, gap, static_cast<long>(grid.size()));
  } catch (const TrivialTwist&) {
    if (strict) throw;
    return nan_row(param, gap, 0);
  }
}

std::vector<int> default_dims(int dim) {
  switch (dim) {
    case 1: return {101};
    case 2: return {41, 41};
    default: return {21, 21, 21};
  }
}

}  // namespace

double SweptParameter::value(int i) const {
  if (i == count - 1) return stop;
  return start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
}

ModelSpec SweepSpec::model_at(double value) const {
  if (!sweep) return model;
  const auto& name = sweep->name;
  if (model.is_free_fermion()) {
    auto p = model.free_fermion_params();
    if (name == "lambda") p.lambda = value;
    if (name == "gamma") p.gamma = value;
    return ModelSpec::free_fermion(p.dim, p.lambda, p.gamma);
  }
  if (model.is_ssh()) return ModelSpec::ssh(value);
  return model;
}

double SweepSpec::primary_value() const {
  if (model.is_free_fermion()) return model.free_fermion_params().lambda;
  if (model.is_ssh()) return model.ssh_params().phi;
  return 0.0;
}

EvalOptions SweepSpec::eval_options() const {
  EvalOptions eo;
  eo.twist_axis = twist_axis;
  eo.threshold = threshold;
  eo.n_convention = n_convention;
  return eo;
}

SweepSpec parse_config(std::string_view text, const std::string& base_dir) {
  static const std::set<std::string> kKeys{"model", "d",     "lambda",     "gamma",     "phi",    "dims",
                                           "sizes", "table", "twist_axis", "threshold", "format", "n_convention"};
  auto tokens = tokenize(text);
  std::map<std::string, Token> kv;
  for (const auto& t : tokens) {
    if (!kKeys.count(t.key)) throw ParseError("unknown key '" + t.key + "'", t.line);
    if (!kv.emplace(t.key, t).second) throw ParseError("duplicate key '" + t.key + "'", t.line);
  }
  auto get = [&](const std::string& k) -> const Token* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  const std::size_t last_line = tokens.empty() ? 1 : tokens.back().line;
  const Token* model_tok = get("model");
  if (!model_tok) throw ParseError("missing model=", last_line);

  auto reject = [&](const std::vector<std::string>& keys, const std::string& model) {
    for (const auto& k : keys)
      if (const Token* t = get(k)) throw ParseError("parameter '" + k + "' does not belong to model " + model, t->line);
  };

  std::optional<SweptParameter> sweep;
  auto scalar = [&](const std::string& key, double fallback) -> double {
    const Token* t = get(key);
    if (!t) return fallback;
    if (is_sweep(t->value)) {
      if (sweep) throw ParseError("only one parameter may be swept", t->line);
      sweep = to_sweep(*t);
      return sweep->start;
    }
    return to_double(*t, t->value);
  };

  std::optional<ModelSpec> model;
  const std::string& name = model_tok->value;
  try {
    if (name == "free_fermion") {
      reject({"phi", "table"}, name);
      const Token* dt = get("d");
      int d = dt ? to_int(*dt, dt->value) : 1;
      if (d < 1 || d > 3) throw ParseError("free_fermion needs d in {1,2,3}", dt ? dt->line : model_tok->line);
      double lambda = scalar("lambda", 0.0);
      double gamma = scalar("gamma", 1.0);
      if (!sweep || sweep->name != "gamma") {
        if (gamma == 0.0) {
          const Token* gt = get("gamma");
          throw ParseError("trivial twist: gamma = 0 makes the twist commute with H; z carries no phase information",
                           gt ? gt->line : model_tok->line);
        }
      }
      model = ModelSpec::free_fermion(d, lambda, gamma);
    } else if (name == "ssh") {
      reject({"d", "lambda", "gamma", "table"}, name);
      double phi = scalar("phi", 0.5);
      if (sweep && !(sweep->start >= -1.0 && sweep->stop <= 1.0))
        throw ParseError("phi sweep must stay within [-1, 1]", get("phi")->line);
      if (!(std::abs(phi) <= 1.0)) throw ParseError("phi must satisfy |phi| <= 1", get("phi")->line);
      model = ModelSpec::ssh(phi);
    } else if (name == "custom") {
      reject({"d", "lambda", "gamma", "phi"}, name);
      const Token* tt = get("table");
      if (!tt) throw ParseError("custom model needs table=<file>", model_tok->line);
      std::filesystem::path path(tt->value);
      if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
      try {
        model = load_custom_table_file(path.string());
      } catch (const ParseError& e) {
        throw ParseError(std::string("in table: ") + e.what(), tt->line);
      } catch (const Error& e) {
        throw ParseError(e.what(), tt->line);
      }
    } else {
      throw ParseError("unknown model '" + name + "'", model_tok->line);
    }
  } catch (const InvalidModel& e) {
    throw ParseError(e.what(), model_tok->line);
  }

  SweepSpec spec{*model, std::nullopt, {}, {}};
  spec.sweep = sweep;
  if (sweep && model->is_free_fermion()) {
    // the far end of the sweep must be valid too
    try {
      (void)spec.model_at(sweep->stop);
    } catch (const InvalidModel& e) {
      throw ParseError(e.what(), get(sweep->name)->line);
    }
  }

  const int D = model->dim();
  if (const Token* t = get("dims")) {
    spec.dims = to_int_list(*t);
    if (static_cast<int>(spec.dims.size()) != D)
      throw ParseError("dims needs " + std::to_string(D) + " value(s)", t->line);
    for (int L : spec.dims)
      if (L < 2) throw ParseError("every linear size must be >= 2", t->line);
    if (model->is_custom() && spec.dims != model->custom_params().dims)
      throw ParseError("dims do not match the custom table", t->line);
  } else {
    spec.dims = model->is_custom() ? model->custom_params().dims : default_dims(D);
  }
  if (const Token* t = get("sizes")) {
    if (model->is_custom()) throw ParseError("custom models have a fixed grid; sizes= is not supported", t->line);
    spec.sizes = to_int_list(*t);
    if (spec.sizes.size() < 3) throw ParseError("a trend needs at least 3 sizes", t->line);
    for (int L : spec.sizes)
      if (L < 2) throw ParseError("every size must be >= 2", t->line);
  }
  if (const Token* t = get("twist_axis")) {
    int axis = to_int(*t, t->value);
    if (axis < 1 || axis > D) throw ParseError("twist_axis must be in 1.." + std::to_string(D), t->line);
    spec.twist_axis = axis - 1;
  }
  if (const Token* t = get("threshold")) {
    spec.threshold = to_double(*t, t->value);
    if (!(spec.threshold > 0.0)) throw ParseError("threshold must be positive", t->line);
  }
  if (const Token* t = get("format")) {
    if (t->value == "csv")
      spec.format = OutputFormat::Csv;
    else if (t->value == "jsonl")
      spec.format = OutputFormat::Jsonl;
    else
      throw ParseError("format must be csv or jsonl", t->line);
  }
  if (const Token* t = get("n_convention")) {
    if (t->value == "total")
      spec.n_convention = NConvention::TotalModes;
    else if (t->value == "linear")
      spec.n_convention = NConvention::LinearSize;
    else
      throw ParseError("n_convention must be total or linear", t->line);
  }
  return spec;
}

bool ResultRow::singular() const { return std::isnan(abs_z); }
bool ResultRow::ill_defined() const { return std::isnan(gamma_g) && !std::isnan(abs_z); }

ResultRow make_row(double param, const TwistResult& r, double min_gap) {
  ResultRow row;
  row.param = param;
  row.re_z = r.z.real();
  row.im_z = r.z.imag();
  row.abs_z = std::abs(r.z);
  row.log_abs_z = r.log_abs_z;
  row.gamma_g = r.ill_defined ? kNaN : r.gamma_g;
  row.min_gap = min_gap;
  row.n_singular = static_cast<long>(r.singular_modes.size());
  return row;
}

ResultTable run_point(const SweepSpec& spec, const RunOptions& opt) {
  ResultTable t;
  t.param_name = spec.sweep ? spec.sweep->name : "param";
  MomentumGrid grid(spec.dims);
  auto eo = spec.eval_options();
  eo.workers = opt.workers;
  t.rows.push_back(evaluate_row(spec.model, grid, eo, spec.primary_value(),
                                opt.policy.value_or(SingularPolicy::NanRow), opt.strict, t.max_factor_abs));
  return t;
}

ResultTable run_sweep(const SweepSpec& spec, const RunOptions& opt) {
  if (!spec.sweep) throw InvalidModel("sweep needs a swept parameter, e.g. lambda=sweep(0,2,201)");
  const auto& sw = *spec.sweep;
  ResultTable t;
  t.param_name = sw.name;
  t.rows.resize(sw.count);
  std::vector<double> max_factor(sw.count, 0.0);
  const MomentumGrid grid(spec.dims);
  const auto eo = spec.eval_options();
  const auto policy = opt.policy.value_or(SingularPolicy::NanRow);
  parallel_for(static_cast<std::size_t>(sw.count), opt.workers, [&](std::size_t i) {
    const double v = sw.value(static_cast<int>(i));
    t.rows[i] = evaluate_row(spec.model_at(v), grid, eo, v, policy, opt.strict, max_factor[i]);
  });
  t.max_factor_abs = *std::max_element(max_factor.begin(), max_factor.end());
  return t;
}

ResultTable finite_size_trend(const SweepSpec& spec, const RunOptions& opt) {
  if (spec.sizes.size() < 3) throw InvalidModel("a trend needs at least 3 sizes");
  ResultTable t;
  t.param_name = "total_modes";
  const std::size_t n = spec.sizes.size();
  t.rows.resize(n);
  std::vector<double> max_factor(n, 0.0);
  const auto eo = spec.eval_options();
  const auto policy = opt.policy.value_or(SingularPolicy::ExcludeModes);
  const int D = spec.model.dim();
  parallel_for(n, opt.workers, [&](std::size_t i) {
    MomentumGrid grid(std::vector<int>(D, spec.sizes[i]));
    t.rows[i] = evaluate_row(spec.model, grid, eo, static_cast<double>(grid.total_modes()), policy, opt.strict,
                             max_factor[i]);
  });
  std::stable_sort(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) { return a.param < b.param; });
  t.max_factor_abs = *std::max_element(max_factor.begin(), max_factor.end());
  return t;
}

std::string to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::ZMinimum: return "z-minimum";
    case TransitionKind::GammaJump: return "gamma-jump";
    case TransitionKind::IllDefinedOnset: return "ill-defined-onset";
  }
  return "?";
}

std::vector<Transition> detect_transitions(const ResultTable& table, const DetectOptions& opt) {
  std::vector<Transition> out;
  const auto& rows = table.rows;

  std::vector<std::size_t> finite;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!rows[i].singular()) finite.push_back(i);
  for (std::size_t j = 1; j + 1 < finite.size(); ++j) {
    const double a = rows[finite[j - 1]].abs_z, b = rows[finite[j]].abs_z, c = rows[finite[j + 1]].abs_z;
    if (b < a && b <= c && b < opt.z_minimum_below) out.push_back({rows[finite[j]].param, TransitionKind::ZMinimum});
  }

  std::vector<std::size_t> defined;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!std::isnan(rows[i].gamma_g)) defined.push_back(i);
  std::optional<std::pair<double, double>> run;  // [first param, last param] of the current jump run
  std::size_t run_end = 0;
  for (std::size_t j = 1; j < defined.size(); ++j) {
    const auto &prev = rows[defined[j - 1]], &cur = rows[defined[j]];
    const bool jump = std::abs(principal_angle(cur.gamma_g - prev.gamma_g)) > opt.gamma_jump_above;
    if (!jump) continue;
    if (run && run_end == j - 1) {
      run->second = cur.param;
    } else {
      if (run) out.push_back({0.5 * (run->first + run->second), TransitionKind::GammaJump});
      run = {prev.param, cur.param};
    }
    run_end = j;
  }
  if (run) out.push_back({0.5 * (run->first + run->second), TransitionKind::GammaJump});

  for (const auto& r : rows)
    if (r.ill_defined()) {
      out.push_back({r.param, TransitionKind::IllDefinedOnset});
      break;
    }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  return out;
}

std::string emit(const ResultTable& table, OutputFormat format) {
  std::string out;
  if (format == OutputFormat::Csv) {
    out += "# gamma_g in (-pi, pi]; +pi and -pi denote the same phase\n";
    out += "param,re_z,im_z,abs_z,log_abs_z,gamma_g,min_gap,n_singular\n";
    for (const auto& r : table.rows) {
      out += fmt(r.param) + ',' + fmt(r.re_z) + ',' + fmt(r.im_z) + ',' + fmt(r.abs_z) + ',' + fmt(r.log_abs_z) + ',' +
             fmt(r.gamma_g) + ',' + fmt(r.min_gap) + ',' + std::to_string(r.n_singular) + '\n';
    }
    return out;
  }
  for (const auto& r : table.rows) {
    ordered_json j;
    j["param"] = json_number(r.param);
    j["re_z"] = json_number(r.re_z);
    j["im_z"] = json_number(r.im_z);
    j["abs_z"] = json_number(r.abs_z);
    j["log_abs_z"] = json_number(r.log_abs_z);
    j["gamma_g"] = json_number(r.gamma_g);
    j["min_gap"] = json_number(r.min_gap);
    j["n_singular"] = r.n_singular;
    out += j.dump() + '\n';
  }
  return out;
}

ResultTable parse_jsonl(std::string_view text) {
  ResultTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = ordered_json::parse(line);
      ResultRow r;
      r.param = from_json_number(j.at("param"));
      r.re_z = from_json_number(j.at("re_z"));
      r.im_z = from_json_number(j.at("im_z"));
      r.abs_z = from_json_number(j.at("abs_z"));
      r.log_abs_z = from_json_number(j.at("log_abs_z"));
      r.gamma_g = from_json_number(j.at("gamma_g"));
      r.min_gap = from_json_number(j.at("min_gap"));
      r.n_singular = j.at("n_singular").get<long>();
      t.rows.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return t;
}

std::vector<GapRow> gap_scan(const SweepSpec& spec, const RunOptions& opt) {
  const MomentumGrid grid(spec.dims);
  const int count = spec.sweep ? spec.sweep->count : 1;
  std::vector<GapRow> rows(count);
  parallel_for(static_cast<std::size_t>(count), opt.workers, [&](std::size_t i) {
    const double v = spec.sweep ? spec.sweep->value(static_cast<int>(i)) : spec.primary_value();
    auto g = min_gap(spec.model_at(v), grid);
    rows[i] = {v, g.min_gap, g.k};
  });
  return rows;
}

std::string emit_gaps(const std::vector<GapRow>& rows, OutputFormat format) {
  std::string out;
  const int D = rows.empty() ? 0 : rows.front().k.dim;
  if (format == OutputFormat::Csv) {
    out += "param,min_gap";
    for (int a = 0; a < D; ++a) out += ",k" + std::to_string(a + 1);
    out += '\n';
    for (const auto& r : rows) {
      out += fmt(r.param) + ',' + fmt(r.min_gap);
      for (int a = 0; a < D; ++a) out += ',' + fmt(r.k.k[a]);
      out += '\n';
    }
    return out;
  }
  for (const auto& r : rows) {
    ordered_json j;
    j["param"] = json_number(r.param);
    j["min_gap"] = json_number(r.min_gap);
    auto k = ordered_json::array();
    for (int a = 0; a < D; ++a) k.push_back(r.k.k[a]);
    j["k"] = k;
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace twistphase

#include "odex/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "odex/bundled.hpp"
#include "odex/error.hpp"

namespace odex {

std::string format_number(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw Error(ErrorKind::InvalidArgument, "cannot format number");
  return std::string(buf.data(), ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << source << ": line " << line << ": " << msg;
  throw Error(ErrorKind::Parse, os.str());
}

double parse_double(const std::string& text, const std::string& source, std::size_t line,
                    const std::string& field) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (text.empty() || ec != std::errc{} || ptr != e)
    parse_fail(source, line, "field '" + field + "' is not a number: '" + text + "'");
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

Table read_table(std::istream& in, const std::string& source) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      parse_fail(source, lineno,
                 "expected " + std::to_string(t.header.size()) + " fields, found " +
                     std::to_string(cells.size()));
    t.rows.emplace_back(lineno, std::move(cells));
  }
  if (t.header.empty()) throw Error(ErrorKind::Parse, source + ": empty file");
  return t;
}

std::vector<Run> parse_runs(const Table& t, const std::string& source, bool day_required) {
  std::array<int, kNumFactors> cols{};
  for (int j = 0; j < kNumFactors; ++j) {
    cols[j] = t.column(std::string(kFactorNames[j]));
    if (cols[j] < 0)
      throw Error(ErrorKind::Parse, source + ": missing column '" + std::string(kFactorNames[j]) + "'");
  }
  const int day_col = t.column("day");
  if (day_required && day_col < 0) throw Error(ErrorKind::Parse, source + ": missing column 'day'");

  std::vector<Run> runs;
  for (const auto& [lineno, cells] : t.rows) {
    Run r;
    for (int j = 0; j < kNumFactors; ++j) {
      const std::string name(kFactorNames[j]);
      r.coords[j] = parse_double(cells[static_cast<std::size_t>(cols[j])], source, lineno, name);
      if (!(r.coords[j] >= kBoxLower && r.coords[j] <= kBoxUpper))
        parse_fail(source, lineno, "field '" + name + "' lies outside [-2, 2]");
    }
    if (day_col >= 0) {
      const std::string& d = cells[static_cast<std::size_t>(day_col)];
      if (d == "0") r.day = 0;
      else if (d == "1") r.day = 1;
      else parse_fail(source, lineno, "field 'day' must be 0 or 1, found '" + d + "'");
    }
    runs.push_back(r);
  }
  return runs;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
  return in;
}

void write_run_cells(std::ostream& out, std::size_t index, const Run& r) {
  out << index + 1;
  for (double x : r.coords) out << ',' << format_number(x);
  out << ',' << r.day;
}

}  // namespace

Design read_design_csv(std::istream& in, const std::string& source) {
  const Table t = read_table(in, source);
  Design d;
  d.runs = parse_runs(t, source, true);
  d.label = source;
  return d;
}

Design read_design_csv_file(const std::string& path) {
  auto in = open_in(path);
  return read_design_csv(in, path);
}

void write_design_csv(std::ostream& out, const Design& design) {
  out << "run,L,K,D,FDV,day\n";
  for (std::size_t i = 0; i < design.size(); ++i) {
    write_run_cells(out, i, design.runs[i]);
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in, const std::string& source) {
  const Table t = read_table(in, source);
  Dataset data;
  data.runs = parse_runs(t, source, false);
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const std::string& name = t.header[c];
    if (name == "run" || name == "day" || t.column(name) != static_cast<int>(c)) continue;
    bool is_factor = false;
    for (auto f : kFactorNames) is_factor = is_factor || f == name;
    if (is_factor) continue;
    std::vector<double> values;
    for (const auto& [lineno, cells] : t.rows) {
      const double v = parse_double(cells[c], source, lineno, name);
      if (!(v > 0.0))
        parse_fail(source, lineno, "response '" + name + "' = " + cells[c] +
                                       " is not positive (Gamma responses must be > 0)");
      values.push_back(v);
    }
    data.responses.emplace(name, std::move(values));
  }
  return data;
}

Dataset read_dataset_csv_file(const std::string& path) {
  auto in = open_in(path);
  return read_dataset_csv(in, path);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "run,L,K,D,FDV,day";
  // Canonical response order first, then anything else alphabetically.
  std::vector<std::string> names;
  for (const auto& r : kResponseNames)
    if (data.responses.count(std::string(r))) names.emplace_back(r);
  for (const auto& [name, _] : data.responses)
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    write_run_cells(out, i, data.runs[i]);
    for (const auto& n : names) out << ',' << format_number(data.responses.at(n)[i]);
    out << '\n';
  }
}

// JSON ------------------------------------------------------------------------

namespace {

json term_to_json(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Intercept: return json::array({"intercept"});
    case Term::Kind::Main: return json::array({"main", factor_name(t.a)});
    case Term::Kind::Square: return json::array({"square", factor_name(t.a)});
    case Term::Kind::Interaction:
      return json::array({"interaction", factor_name(t.a), factor_name(t.b)});
  }
  return {};
}

Term term_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::Parse, "term must be a non-empty array");
  const auto kind = j.at(0).get<std::string>();
  auto factor = [&](std::size_t i) { return parse_factor(j.at(i).get<std::string>()); };
  if (kind == "intercept") return Term::intercept();
  if (kind == "main") return Term::main(factor(1));
  if (kind == "square") return Term::square(factor(1));
  if (kind == "interaction") return Term::interaction(factor(1), factor(2));
  throw Error(ErrorKind::Parse, "unknown term kind '" + kind + "'");
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

template <class Fn>
auto wrap_json(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string(what) + ": " + e.what());
  }
}

}  // namespace

json to_json(const ModelSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["link"] = link_name(spec.link);
  j["factors"] = json::array();
  for (Factor f : spec.factors) j["factors"].push_back(factor_name(f));
  j["terms"] = json::array();
  for (const Term& t : spec.terms) j["terms"].push_back(term_to_json(t));
  return j;
}

ModelSpec model_spec_from_json(const json& j) {
  return wrap_json("model spec", [&] {
    ModelSpec s;
    s.name = j.at("name").get<std::string>();
    s.link = parse_link(j.at("link").get<std::string>());
    for (const auto& f : j.at("factors")) s.factors.push_back(parse_factor(f.get<std::string>()));
    for (const auto& t : j.at("terms")) s.terms.push_back(term_from_json(t));
    s.validate();
    return s;
  });
}

json to_json(const FittedModel& m) {
  json j;
  j["spec"] = to_json(m.spec);
  j["response"] = m.response;
  j["beta_hat"] = vector_to_json(m.beta_hat);
  j["gamma_hat"] = m.gamma_hat ? json(*m.gamma_hat) : json(nullptr);
  j["nu_hat"] = m.nu_hat;
  j["dispersion"] = m.dispersion;
  j["std_errors"] = vector_to_json(m.std_errors);
  json cov = json::array();
  for (Eigen::Index r = 0; r < m.covariance.rows(); ++r)
    cov.push_back(vector_to_json(m.covariance.row(r).transpose()));
  j["covariance"] = cov;
  j["log_likelihood"] = m.log_likelihood;
  j["bic"] = m.bic;
  j["n"] = m.n;
  j["iterations"] = m.iterations;
  return j;
}

FittedModel fitted_model_from_json(const json& j) {
  return wrap_json("fitted model", [&] {
    FittedModel m;
    m.spec = model_spec_from_json(j.at("spec"));
    m.response = j.at("response").get<std::string>();
    m.beta_hat = vector_from_json(j.at("beta_hat"));
    if (!j.at("gamma_hat").is_null()) m.gamma_hat = j.at("gamma_hat").get<double>();
    m.nu_hat = j.at("nu_hat").get<double>();
    m.dispersion = j.at("dispersion").get<double>();
    m.std_errors = vector_from_json(j.at("std_errors"));
    const auto& cov = j.at("covariance");
    const auto k = static_cast<Eigen::Index>(cov.size());
    m.covariance.resize(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      const auto row = vector_from_json(cov.at(static_cast<std::size_t>(r)));
      if (row.size() != k) throw Error(ErrorKind::Parse, "covariance must be square");
      m.covariance.row(r) = row.transpose();
    }
    m.log_likelihood = j.at("log_likelihood").get<double>();
    m.bic = j.at("bic").get<double>();
    m.n = j.at("n").get<int>();
    m.iterations = j.value("iterations", 0);
    if (m.beta_hat.size() != m.spec.num_params())
      throw Error(ErrorKind::Dimension, "beta_hat does not match the model terms");
    return m;
  });
}

json to_json(const PsoConfig& c) {
  return json{{"swarm_size", c.swarm_size}, {"iterations", c.iterations},
              {"inertia", c.inertia},       {"cognitive", c.cognitive},
              {"social", c.social},         {"restarts", c.restarts},
              {"seed", c.seed},             {"tolerance", c.tolerance},
              {"stall_iterations", c.stall_iterations}, {"threads", c.threads}};
}

PsoConfig pso_config_from_json(const json& j, PsoConfig c) {
  return wrap_json("PSO config", [&] {
    c.swarm_size = j.value("swarm_size", c.swarm_size);
    c.iterations = j.value("iterations", c.iterations);
    c.inertia = j.value("inertia", c.inertia);
    c.cognitive = j.value("cognitive", c.cognitive);
    c.social = j.value("social", c.social);
    c.restarts = j.value("restarts", c.restarts);
    c.seed = j.value("seed", c.seed);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.stall_iterations = j.value("stall_iterations", c.stall_iterations);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
  });
}

json ensemble_to_json(const ScenarioEnsemble& ens) {
  json j;
  j["scenarios"] = json::array();
  for (const Scenario& s : ens.scenarios()) {
    json e;
    e["model"] = to_json(s.spec);
    e["beta"] = vector_to_json(s.params.beta);
    e["gamma"] = *s.params.gamma;
    e["weight"] = s.weight;
    e["label"] = s.label;
    j["scenarios"].push_back(e);
  }
  j["m"] = ens.m();
  return j;
}

ScenarioEnsemble ensemble_from_json(const json& j, const Design& initial) {
  return wrap_json("ensemble", [&] {
    std::vector<Scenario> scenarios;
    for (const auto& e : j.at("scenarios")) {
      Scenario s;
      const auto& model = e.at("model");
      s.spec = model.is_string() ? bundled::model(model.get<std::string>())
                                 : model_spec_from_json(model);
      s.params.beta = e.contains("beta") ? vector_from_json(e.at("beta"))
                                         : bundled::estimates(s.spec.name).beta;
      s.params.gamma = e.contains("gamma") ? e.at("gamma").get<double>()
                                           : bundled::default_gamma(s.spec.name);
      s.weight = e.value("weight", 1.0);
      s.label = e.value("label", s.spec.name);
      if (s.params.beta.size() != s.spec.num_params())
        throw Error(ErrorKind::Dimension,
                    "scenario '" + s.label + "': beta length does not match the model terms");
      scenarios.push_back(std::move(s));
    }
    return ScenarioEnsemble(std::move(scenarios), initial, j.value("m", 4));
  });
}

json read_json_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace odex

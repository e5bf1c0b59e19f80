#include "siph/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace siph {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument(path + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

double num_at(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double pos_at(const json& j, const std::string& path) {
  const double v = num_at(j, path);
  if (!(v > 0.0) || !std::isfinite(v)) fail(path, "expected a positive number");
  return v;
}

std::vector<double> vec_at(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(num_at(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

Matrix mat_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const int p = static_cast<int>(j.size());
  Matrix m(p, p);
  for (int i = 0; i < p; ++i) {
    const std::vector<double> row = vec_at(j[i], path + "[" + std::to_string(i) + "]");
    if (static_cast<int>(row.size()) != p) fail(path, "expected a square matrix");
    for (int k = 0; k < p; ++k) m(i, k) = row[k];
  }
  return m;
}

json mat_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

json phase_to_json(const PhaseParams& p) {
  json j;
  j["pi"] = p.pi;
  j["t"] = mat_to_json(p.t);
  return j;
}

PhaseParams phase_at(const json& j, const std::string& path) {
  PhaseParams p;
  p.pi = vec_at(member(j, "pi", path), path + ".pi");
  p.t = mat_at(member(j, "t", path), path + ".t");
  if (static_cast<int>(p.pi.size()) != p.t.rows())
    fail(path, "pi and t disagree on the number of phases");
  return p;
}

json intensity_to_json(const Intensity& f) {
  json j;
  j["family"] = f.family_name();
  const std::vector<std::string> names = f.param_names();
  const std::vector<double> params = f.params();
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = params[i];
  return j;
}

Intensity intensity_at(const json& j, const std::string& path) {
  const json& fam = member(j, "family", path);
  if (!fam.is_string()) fail(path + ".family", "expected a string");
  const std::string name = fam.get<std::string>();
  if (name == "constant") return Intensity::constant();
  if (name == "pareto") return Intensity::pareto(pos_at(member(j, "eta", path), path + ".eta"));
  if (name == "weibull") return Intensity::weibull(pos_at(member(j, "eta", path), path + ".eta"));
  if (name == "lognormal")
    return Intensity::lognormal(num_at(member(j, "gamma", path), path + ".gamma"));
  if (name == "loglogistic")
    return Intensity::loglogistic(pos_at(member(j, "eta", path), path + ".eta"),
                                  pos_at(member(j, "gamma", path), path + ".gamma"));
  if (name == "gompertz")
    return Intensity::gompertz(pos_at(member(j, "eta", path), path + ".eta"));
  fail(path + ".family", "unknown intensity family '" + name + "'");
}

json scaling_to_json(const ScalingFamily& f) {
  json j;
  j["family"] = f.name();
  switch (f.kind()) {
    case ScalingFamily::Kind::gamma:
    case ScalingFamily::Kind::positive_stable:
      j["alpha"] = f.alpha();
      break;
    case ScalingFamily::Kind::inverse_gaussian:
      j["sigma2"] = f.sigma2();
      break;
    case ScalingFamily::Kind::pvf:
      j["eta"] = f.eta();
      j["gamma"] = f.gamma_param();
      break;
    case ScalingFamily::Kind::compound_poisson_gamma:
      j["rho"] = f.rho();
      j["alpha"] = f.alpha();
      j["shifted"] = f.shifted();
      break;
    case ScalingFamily::Kind::discrete:
      j["atoms"] = f.atoms();
      j["weights"] = f.weights();
      break;
    case ScalingFamily::Kind::degenerate:
      j["point"] = f.point();
      break;
  }
  return j;
}

ScalingFamily scaling_at(const json& j, const std::string& path) {
  const json& fam = member(j, "family", path);
  if (!fam.is_string()) fail(path + ".family", "expected a string");
  const std::string name = fam.get<std::string>();
  if (name == "gamma")
    return ScalingFamily::gamma(pos_at(member(j, "alpha", path), path + ".alpha"));
  if (name == "positive_stable")
    return ScalingFamily::positive_stable(pos_at(member(j, "alpha", path), path + ".alpha"));
  if (name == "inverse_gaussian")
    return ScalingFamily::inverse_gaussian(pos_at(member(j, "sigma2", path), path + ".sigma2"));
  if (name == "pvf")
    return ScalingFamily::pvf(pos_at(member(j, "eta", path), path + ".eta"),
                              pos_at(member(j, "gamma", path), path + ".gamma"));
  if (name == "compound_poisson_gamma") {
    const json& sh = member(j, "shifted", path);
    if (!sh.is_boolean()) fail(path + ".shifted", "expected a boolean");
    return ScalingFamily::compound_poisson_gamma(
        pos_at(member(j, "rho", path), path + ".rho"),
        pos_at(member(j, "alpha", path), path + ".alpha"), sh.get<bool>());
  }
  if (name == "discrete")
    return ScalingFamily::discrete(vec_at(member(j, "atoms", path), path + ".atoms"),
                                   vec_at(member(j, "weights", path), path + ".weights"));
  if (name == "degenerate")
    return ScalingFamily::degenerate(pos_at(member(j, "point", path), path + ".point"));
  fail(path + ".family", "unknown scaling family '" + name + "'");
}

json model_to_json(const AnyModel& m) {
  json j;
  if (const SiphModel* s = std::get_if<SiphModel>(&m)) {
    j["kind"] = "siph";
    j["pi"] = s->phase.pi;
    j["t"] = mat_to_json(s->phase.t);
    j["intensity"] = intensity_to_json(s->intensity);
    j["scaling"] = scaling_to_json(s->scaling);
    j["beta"] = s->beta;
  } else if (const MmlModel* s = std::get_if<MmlModel>(&m)) {
    j["kind"] = "mml";
    j["pi"] = s->phase.pi;
    j["t"] = mat_to_json(s->phase.t);
    j["alpha"] = s->alpha;
  } else if (const SharedModel* s = std::get_if<SharedModel>(&m)) {
    j["kind"] = "shared";
    json margins = json::array();
    for (const PhaseParams& p : s->margins) margins.push_back(phase_to_json(p));
    j["margins"] = margins;
    json fs = json::array();
    for (const Intensity& f : s->intensities) fs.push_back(intensity_to_json(f));
    j["intensities"] = fs;
    j["scaling"] = scaling_to_json(s->scaling);
  } else {
    const CorrelatedGammaModel& c = std::get<CorrelatedGammaModel>(m);
    j["kind"] = "correlated";
    json margins = json::array();
    for (const PhaseParams& p : c.margins) margins.push_back(phase_to_json(p));
    j["margins"] = margins;
    json fs = json::array();
    for (const Intensity& f : c.intensities) fs.push_back(intensity_to_json(f));
    j["intensities"] = fs;
    j["kappa0"] = c.kappa0;
    j["kappa1"] = c.kappa1;
    j["kappa2"] = c.kappa2;
    j["eta1"] = c.eta1;
    j["eta2"] = c.eta2;
  }
  return j;
}

AnyModel model_from_json(const json& j, const std::string& path) {
  const json& kindj = member(j, "kind", path);
  if (!kindj.is_string()) fail(path + ".kind", "expected a string");
  const std::string kind = kindj.get<std::string>();

  if (kind == "siph") {
    SiphModel m;
    m.phase = phase_at(j, path);
    m.intensity = intensity_at(member(j, "intensity", path), path + ".intensity");
    m.scaling = scaling_at(member(j, "scaling", path), path + ".scaling");
    if (j.contains("beta")) m.beta = vec_at(j["beta"], path + ".beta");
    m.validate();
    return m;
  }
  if (kind == "mml") {
    MmlModel m;
    m.phase = phase_at(j, path);
    m.alpha = pos_at(member(j, "alpha", path), path + ".alpha");
    if (m.alpha > 1.0) fail(path + ".alpha", "expected a value in (0, 1]");
    m.phase.validate();
    return m;
  }
  if (kind == "shared") {
    SharedModel m;
    const json& margins = member(j, "margins", path);
    if (!margins.is_array() || margins.empty())
      fail(path + ".margins", "expected a non-empty array");
    for (std::size_t i = 0; i < margins.size(); ++i)
      m.margins.push_back(phase_at(margins[i], path + ".margins[" + std::to_string(i) + "]"));
    const json& fs = member(j, "intensities", path);
    if (!fs.is_array() || fs.size() != margins.size())
      fail(path + ".intensities", "expected one intensity per margin");
    for (std::size_t i = 0; i < fs.size(); ++i)
      m.intensities.push_back(
          intensity_at(fs[i], path + ".intensities[" + std::to_string(i) + "]"));
    m.scaling = scaling_at(member(j, "scaling", path), path + ".scaling");
    m.validate();
    return m;
  }
  if (kind == "correlated") {
    CorrelatedGammaModel m;
    const json& margins = member(j, "margins", path);
    if (!margins.is_array() || margins.size() != 2)
      fail(path + ".margins", "expected exactly two margins");
    for (int i = 0; i < 2; ++i)
      m.margins[i] = phase_at(margins[i], path + ".margins[" + std::to_string(i) + "]");
    if (j.contains("intensities")) {
      const json& fs = j["intensities"];
      if (!fs.is_array() || fs.size() != 2)
        fail(path + ".intensities", "expected exactly two intensities");
      for (int i = 0; i < 2; ++i)
        m.intensities[i] =
            intensity_at(fs[i], path + ".intensities[" + std::to_string(i) + "]");
    }
    m.kappa0 = pos_at(member(j, "kappa0", path), path + ".kappa0");
    m.kappa1 = pos_at(member(j, "kappa1", path), path + ".kappa1");
    m.kappa2 = pos_at(member(j, "kappa2", path), path + ".kappa2");
    m.eta1 = pos_at(member(j, "eta1", path), path + ".eta1");
    m.eta2 = pos_at(member(j, "eta2", path), path + ".eta2");
    m.validate();
    return m;
  }
  fail(path + ".kind", "unknown model kind '" + kind + "'");
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return j;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const std::size_t a = cell.find_first_not_of(" \t\r");
    const std::size_t b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_num(const std::string& cell, const std::string& path, long line_no) {
  const char* s = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    fail(path, "line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
  return v;
}

}  // namespace

std::string model_kind(const AnyModel& m) {
  if (std::holds_alternative<SiphModel>(m)) return "siph";
  if (std::holds_alternative<MmlModel>(m)) return "mml";
  if (std::holds_alternative<SharedModel>(m)) return "shared";
  return "correlated";
}

AnyModel load_model(const std::string& path) {
  return model_from_json(parse_file(path), "model");
}

void save_model(const AnyModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << model_to_json(m).dump(2) << "\n";
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_csv(line).empty() && !line.empty()) break;
  }
  const std::vector<std::string> header = split_csv(line);
  if (header.empty()) fail(path, "missing header row");

  Dataset ds;
  int q = 0;
  bool has_censor = false;

  if (header[0] == "y") {
    std::size_t i = 1;
    while (i < header.size() && header[i] == "x" + std::to_string(i)) ++i;
    q = static_cast<int>(i - 1);
    if (i < header.size() && header[i] == "censor") {
      has_censor = true;
      ++i;
    }
    if (i != header.size())
      fail(path, "unexpected header column '" + header[i] + "'; expected y[,x1..xq][,censor]");
    ds.dim = 1;
  } else if (header[0] == "y1") {
    std::size_t i = 0;
    while (i < header.size() && header[i] == "y" + std::to_string(i + 1)) ++i;
    if (i != header.size() || header.size() < 2)
      fail(path, "expected header y[,x1..xq][,censor] or y1..yd");
    ds.dim = static_cast<int>(header.size());
  } else {
    fail(path, "expected header y[,x1..xq][,censor] or y1..yd");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (static_cast<int>(cells.size()) != static_cast<int>(header.size()))
      fail(path, "line " + std::to_string(line_no) + ": expected " +
                     std::to_string(header.size()) + " columns, found " +
                     std::to_string(cells.size()));
    if (ds.dim == 1) {
      Observation o;
      o.y = parse_num(cells[0], path, line_no);
      if (!(o.y > 0.0) || !std::isfinite(o.y))
        fail(path, "line " + std::to_string(line_no) + ": response must be positive");
      for (int k = 0; k < q; ++k) o.x.push_back(parse_num(cells[1 + k], path, line_no));
      if (has_censor) {
        const double c = parse_num(cells[1 + q], path, line_no);
        if (c != 0.0 && c != 1.0)
          fail(path, "line " + std::to_string(line_no) + ": censor flag must be 0 or 1");
        o.censored = c == 1.0;
      }
      ds.uni.push_back(std::move(o));
    } else {
      MvObservation o;
      for (int k = 0; k < ds.dim; ++k) {
        const double v = parse_num(cells[k], path, line_no);
        if (!(v > 0.0) || !std::isfinite(v))
          fail(path, "line " + std::to_string(line_no) + ": responses must be positive");
        o.y.push_back(v);
      }
      ds.mv.push_back(std::move(o));
    }
  }
  if (ds.size() == 0) fail(path, "no data rows");
  return ds;
}

void save_observations(const std::vector<Observation>& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::size_t q = data.empty() ? 0 : data.front().x.size();
  bool any_censored = false;
  for (const Observation& o : data) any_censored |= o.censored;

  out << "y";
  for (std::size_t k = 0; k < q; ++k) out << ",x" << (k + 1);
  if (any_censored) out << ",censor";
  out << "\n";

  char buf[40];
  for (const Observation& o : data) {
    std::snprintf(buf, sizeof(buf), "%.17g", o.y);
    out << buf;
    for (double x : o.x) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << "," << buf;
    }
    if (any_censored) out << "," << (o.censored ? 1 : 0);
    out << "\n";
  }
}

void save_mv_observations(const std::vector<MvObservation>& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::size_t d = data.empty() ? 0 : data.front().y.size();
  for (std::size_t k = 0; k < d; ++k) out << (k ? "," : "") << "y" << (k + 1);
  out << "\n";
  char buf[40];
  for (const MvObservation& o : data) {
    for (std::size_t k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", o.y[k]);
      out << (k ? "," : "") << buf;
    }
    out << "\n";
  }
}

void save_report(const FitReport& rep, const std::string& path) {
  json j;
  j["model"] = model_to_json(rep.model);
  j["loglik"] = rep.loglik();
  j["loglik_trace"] = rep.loglik_trace;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["seed"] = rep.seed;
  j["note"] = rep.note;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace siph

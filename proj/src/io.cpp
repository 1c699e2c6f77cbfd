#include "nlvar/io.hpp"

#include "nlvar/detail/overloaded.hpp"
#include "nlvar/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nlvar::io {

using detail::overloaded;

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(child(path, key), "missing required field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw SchemaError(path, "expected an integer");
  return j.get<long>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

std::vector<double> numbers(const json& j, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) out.push_back(number(j[i], child(path, i)));
  return out;
}

void expect_count(const json& list, long n, const std::string& path) {
  if (n >= 1 && list.size() != static_cast<std::size_t>(n)) {
    throw SchemaError(path, "expected k+1 = " + std::to_string(n) + " entries, got " + std::to_string(list.size()));
  }
}

ThresholdFamily threshold_from_json(const json& j, const std::string& path, long lags_expected) {
  ThresholdFamily f;
  f.a = vector_from_json(field(j, "a", path), child(path, "a"));
  f.tau = numbers(field(j, "tau", path), child(path, "tau"));
  const json& lags = array(field(j, "pieces", path), child(path, "pieces"));
  expect_count(lags, lags_expected, child(path, "pieces"));
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const std::string lp = child(child(path, "pieces"), i);
    std::vector<AffinePiece> regimes;
    for (std::size_t l = 0; l < array(lags[i], lp).size(); ++l) {
      const std::string rp = child(lp, l);
      regimes.push_back({vector_from_json(field(lags[i][l], "offset", rp), child(rp, "offset")),
                         matrix_from_json(field(lags[i][l], "matrix", rp), child(rp, "matrix"))});
    }
    f.pieces.push_back(std::move(regimes));
  }
  return f;
}

json threshold_to_json(const ThresholdFamily& f) {
  json pieces = json::array();
  for (const auto& lag : f.pieces) {
    json regimes = json::array();
    for (const AffinePiece& piece : lag) regimes.push_back({{"offset", to_json(piece.offset)}, {"matrix", to_json(piece.matrix)}});
    pieces.push_back(std::move(regimes));
  }
  return {{"a", to_json(f.a)}, {"tau", f.tau}, {"pieces", std::move(pieces)}};
}

}  // namespace

Vec vector_from_json(const json& j, const std::string& path) {
  const std::vector<double> v = numbers(j, path);
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat matrix_from_json(const json& j, const std::string& path) {
  array(j, path);
  const auto rows = j.size();
  if (rows == 0) return Mat(0, 0);
  const auto cols = array(j[0], child(path, 0)).size();
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = child(path, i);
    if (array(j[i], rp).size() != cols) throw SchemaError(rp, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = number(j[i][c], child(rp, c));
  }
  return m;
}

json to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    out.push_back(std::move(row));
  }
  return out;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ModelSpec model_from_json(const json& j) {
  const std::string type = [&] {
    const json& t = field(j, "type", "");
    if (!t.is_string()) throw SchemaError("/type", "expected a string");
    return t.get<std::string>();
  }();
  const int p = static_cast<int>(integer(field(j, "p", ""), "/p"));
  const int k = static_cast<int>(integer(field(j, "k", ""), "/k"));
  const Vec c = j.contains("c") ? vector_from_json(j["c"], "/c") : Vec::Zero(std::max(p, 0));

  Family family;
  if (type == "linear") {
    LinearFamily f;
    const json& phi = array(field(j, "phi", ""), "/phi");
    expect_count(phi, k + 1, "/phi");
    for (std::size_t i = 0; i < phi.size(); ++i) f.phi.push_back(matrix_from_json(phi[i], child("/phi", i)));
    family = std::move(f);
  } else if (type == "threshold") {
    family = threshold_from_json(j, "", k + 1);
  } else if (type == "conic") {
    ConicFamily f;
    f.basis = matrix_from_json(field(j, "basis", ""), "/basis").transpose();
    f.regimes = static_cast<std::size_t>(integer(field(j, "regimes", ""), "/regimes"));
    const json& map = array(field(j, "regime_of_cone", ""), "/regime_of_cone");
    for (std::size_t m = 0; m < map.size(); ++m) {
      const long l = integer(map[m], child("/regime_of_cone", m));
      if (l < 0) throw SchemaError(child("/regime_of_cone", m), "regime index must be nonnegative");
      f.regime_of_cone.push_back(static_cast<RegimeIndex>(l));
    }
    const json& lags = array(field(j, "matrices", ""), "/matrices");
    expect_count(lags, k + 1, "/matrices");
    for (std::size_t i = 0; i < lags.size(); ++i) {
      const std::string lp = child("/matrices", i);
      std::vector<Mat> regimes;
      for (std::size_t l = 0; l < array(lags[i], lp).size(); ++l) regimes.push_back(matrix_from_json(lags[i][l], child(lp, l)));
      f.matrices.push_back(std::move(regimes));
    }
    family = std::move(f);
  } else if (type == "smoothed") {
    SmoothedFamily f;
    f.sigma = number(field(j, "sigma", ""), "/sigma");
    f.base = threshold_from_json(field(j, "base", ""), "/base", k + 1);
    family = std::move(f);
  } else {
    throw SchemaError("/type", "unknown model type '" + type + "'");
  }

  try {
    return make_model(p, k, c, std::move(family));
  } catch (const SchemaError&) {
    throw;
  } catch (const InputError& e) {
    throw SchemaError("/", e.what());
  }
}

json model_to_json(const ModelSpec& model) {
  json j{{"type", family_name(model)}, {"p", model.p()}, {"k", model.k()}, {"c", to_json(model.c())}};
  std::visit(overloaded{
                 [&](const LinearFamily& f) {
                   json phi = json::array();
                   for (const Mat& m : f.phi) phi.push_back(to_json(m));
                   j["phi"] = std::move(phi);
                 },
                 [&](const ThresholdFamily& f) { j.update(threshold_to_json(f)); },
                 [&](const ConicFamily& f) {
                   j["basis"] = to_json(Mat(f.basis.transpose()));
                   j["regimes"] = f.regimes;
                   j["regime_of_cone"] = f.regime_of_cone;
                   json lags = json::array();
                   for (const auto& lag : f.matrices) {
                     json regimes = json::array();
                     for (const Mat& m : lag) regimes.push_back(to_json(m));
                     lags.push_back(std::move(regimes));
                   }
                   j["matrices"] = std::move(lags);
                 },
                 [&](const SmoothedFamily& f) {
                   j["sigma"] = f.sigma;
                   j["base"] = threshold_to_json(f.base);
                 },
             },
             model.family());
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

ModelSpec load_model(const std::string& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path + "#" + e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
}

json to_json(const JsrBracket& b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"depth", b.depth}, {"certified", b.certified}};
}

json to_json(const MembershipReport& r) {
  json betas = json::array();
  for (const Mat& b : r.betas) betas.push_back(to_json(b));
  json mu_bars = json::array();
  for (const Vec& m : r.mu_bars) mu_bars.push_back(to_json(m));
  json out{{"verdict", to_string(r.verdict)},
           {"reason", r.reason},
           {"p", r.p},
           {"k", r.k},
           {"r", r.r},
           {"q", r.q},
           {"stationary", r.stationary},
           {"alpha", to_json(r.alpha)},
           {"alpha_perp", to_json(r.alpha_perp)},
           {"mu", r.mu.size() ? to_json(r.mu) : json::array()},
           {"betas", std::move(betas)},
           {"mu_bars", std::move(mu_bars)},
           {"b_bar", r.b_bar},
           {"homeo_ok", r.homeo_ok},
           {"phi0_determinants", r.phi0_determinants},
           {"jsr", to_json(r.jsr)}};
  return out;
}

TransitoryConfig transitory_from_json(const json& j) {
  TransitoryConfig c;
  c.alpha_inner = vector_from_json(field(j, "alpha_inner", ""), "/alpha_inner");
  c.alpha_outer = vector_from_json(field(j, "alpha_outer", ""), "/alpha_outer");
  c.beta = vector_from_json(field(j, "beta", ""), "/beta");
  if (j.contains("magnitudes")) {
    c.magnitudes = numbers(j["magnitudes"], "/magnitudes");
  } else {
    const json& g = field(j, "grid", "");
    const double from = number(field(g, "from", "/grid"), "/grid/from");
    const double to = number(field(g, "to", "/grid"), "/grid/to");
    const long count = integer(field(g, "count", "/grid"), "/grid/count");
    if (count < 1) throw SchemaError("/grid/count", "must be >= 1");
    for (long i = 0; i < count; ++i) {
      c.magnitudes.push_back(count == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
  }
  if (j.contains("horizon")) c.horizon = static_cast<int>(integer(j["horizon"], "/horizon"));
  if (j.contains("tol")) c.tol = number(j["tol"], "/tol");
  return c;
}

std::vector<Mat> matrices_from_json(const json& j) {
  const bool wrapped = j.is_object();
  const json& list = wrapped ? field(j, "matrices", "") : j;
  const std::string base = wrapped ? "/matrices" : "";
  std::vector<Mat> out;
  for (std::size_t i = 0; i < array(list, base.empty() ? "/" : base).size(); ++i) {
    out.push_back(matrix_from_json(list[i], child(base, i)));
  }
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable parse_csv(std::istream& in, const std::string& name) {
  CsvTable t;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();

    std::vector<double> values;
    bool numeric = true;
    for (const std::string& s : fields) {
      const char* begin = s.c_str();
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(begin, &end);
      while (*end == ' ' || *end == '\t') ++end;
      if (end == begin || *end != '\0') {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && t.header.empty()) {
        for (std::string& s : fields) {
          s.erase(0, s.find_first_not_of(" \t"));
          s.erase(s.find_last_not_of(" \t") + 1);
        }
        t.header = fields;
        continue;
      }
      throw InputError(name + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw InputError(name + ":" + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                       " fields");
    }
    rows.push_back(std::move(values));
  }
  const std::size_t cols = rows.empty() ? t.header.size() : rows.front().size();
  if (!t.header.empty() && !rows.empty() && t.header.size() != cols) {
    throw InputError(name + ": header and rows disagree on the column count");
  }
  t.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < cols; ++c) t.rows(i, c) = rows[i][c];
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_csv(in, path);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Mat& rows,
               const std::optional<std::string>& comment) {
  if (comment) out << "# " << *comment << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << format_double(rows(i, c));
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header, const Mat& rows,
                    const std::optional<std::string>& comment) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_csv(out, header, rows, comment);
  if (!out) throw InputError("failed writing " + path);
}

std::vector<std::string> numbered(const std::string& stem, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

CsvTable path_table(const PathResult& path) {
  const auto p = path.path.cols();
  const auto k = path.window0.rows();
  CsvTable t;
  t.header = {"t"};
  for (const auto& s : numbered("z", static_cast<int>(p))) t.header.push_back(s);
  for (const auto& s : numbered("u", static_cast<int>(p))) t.header.push_back(s);
  t.rows = Mat::Zero(k + path.T(), 1 + 2 * p);
  for (Eigen::Index i = 0; i < k; ++i) {
    const int tt = static_cast<int>(i - k + 1);
    t.rows(i, 0) = tt;
    t.rows.block(i, 1, 1, p) = path.z(tt).transpose();
  }
  for (int s = 1; s <= path.T(); ++s) {
    const Eigen::Index i = k + s - 1;
    t.rows(i, 0) = s;
    t.rows.block(i, 1, 1, p) = path.path.row(s - 1);
    t.rows.block(i, 1 + p, 1, p) = path.shocks.row(s - 1);
  }
  return t;
}

PathResult path_from_table(const CsvTable& table, int p, int k) {
  if (table.rows.cols() != 1 + 2 * p) throw InputError("path CSV must have 1 + 2p columns");
  PathResult r;
  r.window0 = Mat::Zero(k, p);
  std::vector<bool> seen(k, false);
  std::vector<std::pair<int, Eigen::Index>> later;
  for (Eigen::Index i = 0; i < table.rows.rows(); ++i) {
    const double tv = table.rows(i, 0);
    const int t = static_cast<int>(std::lround(tv));
    if (tv != t) throw InputError("path CSV: non-integer period in row " + std::to_string(i + 1));
    if (t <= 0) {
      if (-t >= k) throw InputError("path CSV: period " + std::to_string(t) + " lies before the initial window");
      r.window0.row(-t) = table.rows.block(i, 1, 1, p);
      seen[-t] = true;
    } else {
      later.emplace_back(t, i);
    }
  }
  for (int i = 0; i < k; ++i) {
    if (!seen[i]) throw InputError("path CSV: initial window misses period " + std::to_string(-i));
  }
  std::sort(later.begin(), later.end());
  r.path = Mat(static_cast<Eigen::Index>(later.size()), p);
  r.shocks = Mat(static_cast<Eigen::Index>(later.size()), p);
  for (std::size_t s = 0; s < later.size(); ++s) {
    if (later[s].first != static_cast<int>(s) + 1) throw InputError("path CSV: periods must run 1..T without gaps");
    r.path.row(s) = table.rows.block(later[s].second, 1, 1, p);
    r.shocks.row(s) = table.rows.block(later[s].second, 1 + p, 1, p);
  }
  return r;
}

CsvTable decomposition_table(const GjrtDecomposition& d, const MembershipReport& report) {
  const int q = report.q;
  const int r = report.r;
  const auto m = d.xi.cols();
  const auto T = d.xi.rows();
  CsvTable t;
  t.header = {"t"};
  for (const auto& s : numbered("psi", q)) t.header.push_back(s);
  for (const auto& s : numbered("theta", r)) t.header.push_back(s);
  for (const auto& s : numbered("xi", static_cast<int>(m))) t.header.push_back(s);
  t.header.push_back("residual");
  t.rows = Mat(T, 1 + q + r + m + 1);
  for (Eigen::Index i = 0; i < T; ++i) {
    t.rows(i, 0) = static_cast<double>(i + 1);
    t.rows.block(i, 1, 1, q + r) = d.chi_values.row(i);
    t.rows.block(i, 1 + q + r, 1, m) = d.xi.row(i);
    t.rows(i, 1 + q + r + m) = d.residual(i);
  }
  return t;
}

}  // namespace nlvar::io

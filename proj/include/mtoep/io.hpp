#pragma once

// JSON and CSV formats.
//
//   operator   {"dim":N,"provenance":{...},"data":[[re,im],...]}  (row-major)
//   symbol     {"coeffs":{"-1":[0.5,0.0],"1":[0.5,0.0]}}
//   report     {"quantity":"P","value":...,"lower":...,"upper":...,"verdict":"Pass",...}
//   sweep CSV  beta_re,beta_im,N,n_max,M_hat,M_lo,M_hi,P_hat,P_lo,P_hi,verdict
//   trajectory n,u_norm,v_norm,envelope

#include "mtoep/analysis.hpp"
#include "mtoep/common.hpp"
#include "mtoep/stability.hpp"
#include "mtoep/symbols.hpp"
#include "mtoep/theorems.hpp"

#include "json.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>

namespace mtoep::io {

using json = nlohmann::ordered_json;

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ParseError("expected a number or [re, im]");
}

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "Pass";
    case Verdict::Fail: return "Fail";
    case Verdict::Advisory: return "Advisory";
  }
  return "";
}

// ---------------------------------------------------------------- symbols

inline json symbol_to_json(const LaurentSymbol& f) {
  json coeffs = json::object();
  for (const auto& [k, c] : f.coeffs()) coeffs[std::to_string(k)] = to_json(c);
  return json{{"coeffs", coeffs}};
}

inline LaurentSymbol symbol_from_json(const json& j) {
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_object())
    throw ParseError("symbol JSON needs a \"coeffs\" object");
  std::map<int, Complex> coeffs;
  for (const auto& [key, value] : j["coeffs"].items()) {
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ParseError("symbol index '" + key + "' is not an integer");
    }
    coeffs[k] = complex_from_json(value);
  }
  return LaurentSymbol(coeffs);
}

// ---------------------------------------------------------------- operators

inline json provenance_to_json(const Provenance& p) {
  json j;
  j["construction"] = std::string(to_string(p.construction));
  if (p.family) {
    j["family"] = std::string(to_string(p.family->family()));
    j["beta"] = to_json(p.family->beta());
    if (p.family->family() == Family::Custom) {
      j["f"] = symbol_to_json(p.family->symbol());
      j["g"] = symbol_to_json(p.family->conjugator());
    }
  }
  if (p.symbol) j["symbol"] = symbol_to_json(*p.symbol);
  j["power"] = p.power;
  if (p.lambda) j["lambda"] = to_json(*p.lambda);
  j["formula"] = p.formula;
  return j;
}

inline Provenance provenance_from_json(const json& j) {
  Provenance p;
  if (!j.is_object()) return p;
  if (j.contains("construction")) p.construction = parse_construction(j["construction"].get<std::string>());
  if (j.contains("family")) {
    const Family fam = parse_family(j["family"].get<std::string>());
    if (fam == Family::Custom) {
      if (!j.contains("f") || !j.contains("g")) throw ParseError("custom provenance needs f and g");
      p.family = FamilyParams::custom(symbol_from_json(j["f"]), symbol_from_json(j["g"]));
    } else {
      if (!j.contains("beta")) throw ParseError("family provenance needs beta");
      p.family = FamilyParams::make(fam, complex_from_json(j["beta"]));
    }
  }
  if (j.contains("symbol")) p.symbol = symbol_from_json(j["symbol"]);
  if (j.contains("power")) p.power = j["power"].get<int>();
  if (j.contains("lambda")) p.lambda = complex_from_json(j["lambda"]);
  if (j.contains("formula")) p.formula = j["formula"].get<std::string>();
  return p;
}

inline json operator_to_json(const TruncatedOperator& op) {
  const Eigen::Index n = op.dim();
  json data = json::array();
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < op.data.cols(); ++c) data.push_back(to_json(op.data(r, c)));
  json j;
  j["dim"] = n;
  j["provenance"] = provenance_to_json(op.provenance);
  j["data"] = std::move(data);
  return j;
}

/// Accepts the flat row-major list of entries or a list of rows; entries
/// are [re, im] pairs or plain reals.
inline TruncatedOperator operator_from_json(const json& j) {
  if (!j.is_object() || !j.contains("data")) throw ParseError("operator JSON needs \"data\"");
  const auto& data = j["data"];
  if (!data.is_array() || data.empty()) throw ParseError("operator data must be a nonempty array");
  TruncatedOperator op;
  const auto total = static_cast<Eigen::Index>(data.size());
  const auto root = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(total))));
  const bool rows = data[0].is_array() &&
                    (data[0].empty() || data[0][0].is_array() || data[0].size() != 2 ||
                     root * root != total);
  Eigen::Index n = 0;
  if (rows) {
    n = static_cast<Eigen::Index>(data.size());
    op.data.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (!data[r].is_array() || static_cast<Eigen::Index>(data[r].size()) != n)
        throw ParseError("operator rows must all have length N");
      for (Eigen::Index c = 0; c < n; ++c) op.data(r, c) = complex_from_json(data[r][c]);
    }
  } else {
    n = root;
    if (n * n != total) throw ParseError("flat operator data must have N*N entries");
    op.data.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) op.data(r, c) = complex_from_json(data[r * n + c]);
  }
  if (j.contains("dim") && j["dim"].get<Eigen::Index>() != n)
    throw DimensionError("operator \"dim\" does not match its data");
  if (j.contains("provenance")) op.provenance = provenance_from_json(j["provenance"]);
  return op;
}

inline Vector vector_from_json(const json& j) {
  const json& arr = j.is_object() && j.contains("data") ? j["data"] : j;
  if (!arr.is_array()) throw ParseError("vector JSON must be an array");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(arr[i]);
  return v;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("invalid JSON in '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------- reports

inline json report_to_json(const BoundReport& r) {
  json j;
  j["quantity"] = std::string(to_string(r.quantity));
  j["value"] = r.value;
  j["lower"] = r.lower ? json(*r.lower) : json(nullptr);
  j["upper"] = r.upper ? json(*r.upper) : json(nullptr);
  j["tolerance"] = r.tolerance;
  j["verdict"] = std::string(verdict_name(r.verdict));
  j["converged"] = r.converged;
  if (r.argmax_lambda) j["argmax_lambda"] = to_json(*r.argmax_lambda);
  if (r.argmax_n) j["argmax_n"] = *r.argmax_n;
  j["refine_depth"] = r.refine_depth;
  json d = json::object();
  for (const auto& [k, v] : r.diagnostics) d[k] = v;
  j["diagnostics"] = std::move(d);
  return j;
}

inline json check_to_json(const Check& c) {
  json j;
  j["label"] = c.label;
  if (c.has_beta) j["beta"] = to_json(c.beta);
  j["line"] = format_check(c);
  j["report"] = report_to_json(c.report);
  return j;
}

// ---------------------------------------------------------------- CSV

inline std::string csv_num(double x) { return fmt_double(x, 17); }

inline std::string csv_opt(const std::optional<double>& x) { return x ? csv_num(*x) : ""; }

inline std::string sweep_csv(const SweepReport& s) {
  std::ostringstream os;
  os << "beta_re,beta_im,N,n_max,M_hat,M_lo,M_hi,P_hat,P_lo,P_hi,verdict\n";
  for (const auto& r : s.rows) {
    os << csv_num(r.beta.real()) << ',' << csv_num(r.beta.imag()) << ',' << r.dim << ','
       << r.n_max << ',' << csv_num(r.m.value) << ',' << csv_opt(r.m.lower) << ','
       << csv_opt(r.m.upper) << ',' << csv_num(r.p.value) << ',' << csv_opt(r.p.lower) << ','
       << csv_opt(r.p.upper) << ',' << verdict_name(r.verdict) << '\n';
  }
  return os.str();
}

inline std::string slope_line(const char* name, const SlopeFit& f) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s slope=%.6g±%.3g expected [%.4g,%.4g] %s", name, f.slope,
                f.halfwidth, f.expected_lo, f.expected_hi, f.in_range() ? "PASS" : "FAIL");
  return buf;
}

inline json sweep_to_json(const SweepReport& s) {
  json j;
  j["family"] = std::string(to_string(s.family));
  json rows = json::array();
  for (const auto& r : s.rows) {
    json row;
    row["beta"] = to_json(r.beta);
    row["N"] = r.dim;
    row["n_max"] = r.n_max;
    row["M"] = report_to_json(r.m);
    row["P"] = report_to_json(r.p);
    row["verdict"] = std::string(verdict_name(r.verdict));
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  auto fit = [](const SlopeFit& f) {
    return json{{"slope", f.slope},
                {"halfwidth", f.halfwidth},
                {"expected", json::array({f.expected_lo, f.expected_hi})},
                {"in_range", f.in_range()}};
  };
  j["m_fit"] = fit(s.m_fit);
  j["p_fit"] = fit(s.p_fit);
  j["warnings"] = s.warnings;
  return j;
}

inline std::string trajectory_csv(const SchemeResult& r) {
  std::ostringstream os;
  os << "n,u_norm,v_norm,envelope\n";
  for (std::size_t i = 0; i < r.error.norms.size(); ++i)
    os << i << ',' << csv_num(r.u_norms[i]) << ',' << csv_num(r.error.norms[i]) << ','
       << csv_num(r.error.envelope) << '\n';
  return os.str();
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace mtoep::io

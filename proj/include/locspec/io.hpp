#pragma once
// Text descriptors and JSON files used by the command-line tool.
//
//   mask    name[:key=value[,key=value...]]   lists inside values use '/'
//           disc:R=0.5642   ball:R=1   polydisc:R=0.5/0.8   p-ball:R=1,p=4
//           weighted-quadratic:R=2,alpha=1/2   complement:R=1   gaussian:a=0.7
//           fubini-study   radial-table:r=0/0.5/1.2,f=1/0.6/0   constant:c=1
//           square:a=1   point
//           (every polyradial mask accepts c=... and scale=...)
//   window  hermite:K            (d = 2: hermite:1/2)
//   state   parity | thermal:E=1 | gaussian:k=0.16/0.32 | gaussian:M=cov.json
//           | hermite:2 | grid:file=symbol.bin

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "eigenvalues.hpp"
#include "opmatrix.hpp"
#include "phasespace.hpp"
#include "reinhardt.hpp"
#include "symplectic.hpp"

namespace locspec::io {

struct Descriptor {
  std::string name;
  std::map<std::string, std::string> args;

  bool has(const std::string& k) const { return args.count(k) > 0; }

  double num(const std::string& k) const {
    auto it = args.find(k);
    if (it == args.end()) throw config_error("descriptor '" + name + "': missing " + k + "=");
    return to_double(it->second, name + "." + k);
  }
  double num(const std::string& k, double fallback) const { return has(k) ? num(k) : fallback; }

  std::vector<double> list(const std::string& k) const {
    auto it = args.find(k);
    if (it == args.end()) throw config_error("descriptor '" + name + "': missing " + k + "=");
    return split_numbers(it->second, name + "." + k);
  }

  static double to_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size() || !std::isfinite(v)) throw config_error(what + ": not a number: '" + s + "'");
    return v;
  }

  static std::vector<double> split_numbers(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, '/')) out.push_back(to_double(tok, what));
    if (out.empty()) throw config_error(what + ": empty list");
    return out;
  }
};

// "name:k=v,k=v". A bare value after the colon is stored under "" (hermite:2).
inline Descriptor parse_descriptor(const std::string& text) {
  Descriptor d;
  const auto colon = text.find(':');
  d.name = text.substr(0, colon);
  if (d.name.empty()) throw config_error("empty descriptor");
  if (colon == std::string::npos) return d;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const std::string key = eq == std::string::npos ? "" : item.substr(0, eq);
    const std::string val = eq == std::string::npos ? item : item.substr(eq + 1);
    if (d.args.count(key)) throw config_error("descriptor '" + d.name + "': repeated key '" + key + "'");
    d.args[key] = val;
  }
  return d;
}

inline std::vector<int> parse_indices(const std::string& s, std::size_t d) {
  std::vector<int> out;
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', '/');
  for (double v : Descriptor::split_numbers(t, "index")) {
    if (v < 0 || v != std::floor(v)) throw config_error("index entries must be non-negative integers: '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  if (out.size() == 1 && d > 1) out.assign(d, out[0]);
  if (out.size() != d) throw config_error("index '" + s + "' does not have " + std::to_string(d) + " entries");
  return out;
}

// ---------------------------------------------------------------- masks

inline opmatrix::PhaseMask parse_mask(const std::string& text, int d) {
  using namespace reinhardt;
  const auto D = parse_descriptor(text);
  const std::string& n = D.name;
  if (n == "square") {
    if (d != 1) throw config_error("square mask is d = 1");
    return opmatrix::square_mask(D.num("a", 1.0));
  }
  if (n == "point") return opmatrix::point_mask(d);
  MaskSpec m;
  if (n == "disc") {
    if (d != 1) throw config_error("disc mask is d = 1 (use ball for d = 2)");
    m = indicator_mask(ball_shadow(1, D.num("R")));
  } else if (n == "ball") {
    m = indicator_mask(ball_shadow(d, D.num("R")));
  } else if (n == "polydisc") {
    auto r = D.list("R");
    if (r.size() == 1) r.assign(d, r[0]);
    if (static_cast<int>(r.size()) != d) throw config_error("polydisc: need " + std::to_string(d) + " radii");
    m = indicator_mask(polydisc_shadow(r));
  } else if (n == "p-ball") {
    m = indicator_mask(p_ball_shadow(d, D.num("R"), D.num("p")));
  } else if (n == "weighted-quadratic") {
    std::vector<int> alpha;
    for (double a : D.list("alpha")) alpha.push_back(static_cast<int>(a));
    if (alpha.size() == 1) alpha.assign(d, alpha[0]);
    if (static_cast<int>(alpha.size()) != d) throw config_error("weighted-quadratic: need " + std::to_string(d) + " weights");
    m = indicator_mask(weighted_quadratic_shadow(alpha, D.num("R")));
  } else if (n == "complement") {
    m = complement_mask(ball_shadow(d, D.num("R")));
  } else if (n == "gaussian") {
    m = gaussian_mask(d, D.num("a", 1.0));
  } else if (n == "fubini-study") {
    if (d != 1) throw config_error("fubini-study mask is d = 1");
    m = fubini_study_mask();
  } else if (n == "radial-table") {
    const auto r = D.list("r"), f = D.list("f");
    if (r.size() != f.size()) throw config_error("radial-table: r and f lengths differ");
    std::vector<std::pair<double, double>> t;
    for (std::size_t i = 0; i < r.size(); ++i) t.emplace_back(r[i], f[i]);
    m = radial_table_mask(d, t);
  } else if (n == "constant") {
    m = constant_mask(d, D.num("c"));
  } else {
    throw config_error("unknown mask '" + n + "'");
  }
  if (D.has("scale")) {
    if (m.kind == ProfileKind::none) throw config_error("constant mask takes no scale");
    m.scale *= D.num("scale");
  }
  if (D.has("c") && n != "constant") m.c += D.num("c");
  return opmatrix::radial(m);
}

inline MultiIndex parse_window(const std::string& text, int d) {
  const auto D = parse_descriptor(text);
  if (D.name != "hermite") throw config_error("unknown window '" + D.name + "' (expected hermite:K)");
  const auto it = D.args.find("");
  return MultiIndex(parse_indices(it == D.args.end() ? "0" : it->second, d));
}

// ---------------------------------------------------------------- JSON files

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("'" + path + "': " + e.what());
  }
}

inline symplectic::RMat json_matrix(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw config_error(what + ": expected a nested array");
  const std::size_t r = j.size(), c = j[0].size();
  symplectic::RMat M(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (!j[i].is_array() || j[i].size() != c) throw config_error(what + ": ragged rows");
    for (std::size_t k = 0; k < c; ++k) {
      if (!j[i][k].is_number()) throw config_error(what + ": non-numeric entry");
      M(i, k) = j[i][k].get<double>();
    }
  }
  return M;
}

inline nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    j.push_back(row);
  }
  return j;
}

// {"d": 2, "Q_re": [[..]], "Q_im": [[..]], "P_re": [[..]], "P_im": [[..]]}
inline symplectic::LagrangianFrame frame_from_json(const nlohmann::json& j) {
  for (const char* k : {"Q_re", "Q_im", "P_re", "P_im"})
    if (!j.contains(k)) throw config_error(std::string("frame: missing ") + k);
  const auto Qr = json_matrix(j["Q_re"], "Q_re"), Qi = json_matrix(j["Q_im"], "Q_im");
  const auto Pr = json_matrix(j["P_re"], "P_re"), Pi = json_matrix(j["P_im"], "P_im");
  const auto d = Qr.rows();
  for (const auto* M : {&Qr, &Qi, &Pr, &Pi})
    if (M->rows() != d || M->cols() != d) throw config_error("frame: blocks must all be d x d");
  if (j.contains("d") && j["d"].get<int>() != d) throw config_error("frame: d does not match the blocks");
  const cplx i(0, 1);
  return symplectic::validate_frame(Qr.cast<cplx>() + i * Qi.cast<cplx>(), Pr.cast<cplx>() + i * Pi.cast<cplx>());
}

inline nlohmann::json frame_to_json(const symplectic::LagrangianFrame& f) {
  return {{"d", f.dim()},
          {"Q_re", matrix_json(f.Q.real())},
          {"Q_im", matrix_json(f.Q.imag())},
          {"P_re", matrix_json(f.P.real())},
          {"P_im", matrix_json(f.P.imag())}};
}

inline symplectic::LagrangianFrame read_frame(const std::string& path) { return frame_from_json(read_json(path)); }

// {"M": [[..]]} or a bare nested array.
inline symplectic::RMat read_covariance(const std::string& path) {
  const auto j = read_json(path);
  return json_matrix(j.is_object() ? j.value("M", nlohmann::json()) : j, "covariance");
}

// ---------------------------------------------------------------- states

inline eigen::StateSymbol parse_state(const std::string& text, int d) {
  const auto D = parse_descriptor(text);
  const std::string& n = D.name;
  if (n == "parity") return eigen::parity_state(d);
  if (n == "thermal") return eigen::thermal_state(d, D.num("E"));
  if (n == "hermite") {
    const auto it = D.args.find("");
    return eigen::hermite_state(MultiIndex(parse_indices(it == D.args.end() ? "0" : it->second, d)));
  }
  if (n == "gaussian") {
    if (D.has("M")) {
      const auto M = read_covariance(D.args.at("M"));
      if (M.rows() != 2 * d || M.cols() != 2 * d) throw config_error("gaussian state: M must be 2d x 2d");
      if (!symplectic::gaussian_admissible(M)) throw config_error("gaussian state: M + iJ/(4 pi) is not positive semidefinite");
      const auto w = symplectic::williamson(M);
      if ((w.T.T - symplectic::RMat::Identity(2 * d, 2 * d)).norm() > 1e-8)
        throw config_error("gaussian state: M is not Williamson-diagonal; transport the mask by T and pass k= instead");
      return eigen::gaussian_state(std::vector<double>(w.k.data(), w.k.data() + d));
    }
    auto k = D.list("k");
    if (k.size() == 1) k.assign(d, k[0]);
    if (static_cast<int>(k.size()) != d) throw config_error("gaussian state: need " + std::to_string(d) + " values of k");
    return eigen::gaussian_state(k);
  }
  if (n == "grid") {
    if (!D.has("file")) throw config_error("grid state: missing file=");
    std::ifstream in(D.args.at("file"), std::ios::binary);
    if (!in) throw config_error("grid state: cannot open '" + D.args.at("file") + "'");
    return eigen::grid_state(phasespace::read_binary(in));
  }
  throw config_error("unknown state '" + n + "'");
}

}  // namespace locspec::io

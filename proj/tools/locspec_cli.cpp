// locspec: eigenvalue tables, double-orthogonality reports, phase-space
// samples and Williamson forms from the command line.
//
// Exit codes: 0 ok, 2 configuration, 3 numerical tolerance, 4 verification.

#include <CLI11.hpp>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "locspec/locspec.hpp"

namespace {

using namespace locspec;
using nlohmann::json;

constexpr int exit_config = 2;
constexpr int exit_tolerance = 3;
constexpr int exit_verify = 4;

// Flat JSON object -> CLI11 config items. Nested objects become sections.
class ConfigJSON : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  static void walk(const json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& out) {
    if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
    for (const auto& [key, v] : j.items()) {
      if (v.is_object()) {
        auto p = parents;
        p.push_back(key);
        walk(v, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (v.is_array())
        for (const auto& e : v) item.inputs.push_back(scalar(e));
      else if (v.is_boolean())
        item.inputs.push_back(v.get<bool>() ? "true" : "false");
      else
        item.inputs.push_back(scalar(v));
      out.push_back(std::move(item));
    }
  }
};

struct JobConfig {
  std::string command;
  std::string mask;
  std::string window = "hermite:0";
  std::string state;
  std::string frame;
  std::string matrix;
  std::string method = "closed";
  std::string grid;
  std::string what = "wavepacket";
  std::string index = "0";
  std::string out;
  std::string dump;
  int nmax = 8;
  int d = 0;      // 0: from the frame, else 1
  int basis = 0;  // 0: nmax + 4, capped
  double tol = 1e-5;

  // Everything that influences the numbers; output paths are excluded.
  json canonical() const {
    return {{"command", command}, {"mask", mask},   {"window", window}, {"state", state}, {"frame", frame},
            {"matrix", matrix},   {"method", method}, {"grid", grid},   {"what", what},   {"index", index},
            {"nmax", nmax},       {"d", d},           {"basis", basis}, {"tol", tol}};
  }

  std::string hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical().dump()) {
      h ^= c;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void comment_line(std::ostream& os, const JobConfig& c) { os << "# locspec " << version << " config=" << c.hash() << "\n"; }

// Resolved problem: dimension, optional frame, mask and window or state.
struct Problem {
  int d = 1;
  std::optional<symplectic::LagrangianFrame> frame;
  std::optional<symplectic::SymplecticMatrix> T;
  std::optional<opmatrix::PhaseMask> mask;
  MultiIndex k;
  std::optional<eigen::StateSymbol> state;

  std::string tag() const { return state ? "state=" + state->describe() : "k=" + k.str(); }
};

Problem resolve(const JobConfig& c, bool need_mask) {
  Problem p;
  if (!c.frame.empty()) {
    p.frame = io::read_frame(c.frame);
    p.T = symplectic::frame_to_symplectic(*p.frame);
    if (c.d && c.d != p.frame->dim()) throw config_error("--d does not match the frame dimension");
    p.d = p.frame->dim();
  } else {
    p.d = c.d ? c.d : 1;
  }
  if (p.d < 1 || p.d > 2) throw config_error("--d must be 1 or 2");
  if (c.nmax < 1) throw config_error("--nmax must be positive");
  if (need_mask) {
    if (c.mask.empty()) throw config_error("--mask is required");
    p.mask = io::parse_mask(c.mask, p.d);
    if (p.T) {
      if (p.mask->kind != opmatrix::PhaseMask::Kind::polyradial) throw config_error("--frame needs a polyradial mask");
      p.mask = opmatrix::transported(p.mask->base, *p.T);
    }
  }
  if (!c.state.empty())
    p.state = io::parse_state(c.state, p.d);
  else
    p.k = io::parse_window(c.window, p.d);
  return p;
}

opmatrix::Basis make_basis(const Problem& p, int N) {
  return p.T ? opmatrix::hagedorn_basis(*p.T, N) : opmatrix::hermite_basis(p.d, N);
}

int basis_size(const JobConfig& c, int d) {
  const int cap = d == 1 ? opmatrix::max_basis_d1 : opmatrix::max_basis_d2;
  const int N = c.basis ? c.basis : std::min(cap, c.nmax + 4);
  if (N > cap) throw config_error("--basis exceeds the cap of " + std::to_string(cap) + " for d = " + std::to_string(d));
  if (c.nmax > N - 2)
    throw config_error("--nmax " + std::to_string(c.nmax) + " leaves no trusted margin in a basis of " + std::to_string(N) +
                       " per axis");
  return N;
}

opmatrix::OperatorMatrix assemble(const Problem& p, int N) {
  const auto b = make_basis(p, N);
  auto op = p.state ? opmatrix::assemble_mixed(*p.mask, *p.state, b) : opmatrix::assemble_localization(*p.mask, p.k, b);
  if (!op.diag.converged) throw tolerance_error("matrix assembly did not converge (" + op.diag.route + " route)");
  return op;
}

eigen::EigenvalueTable closed_table(const Problem& p, const std::vector<MultiIndex>& idx) {
  if (p.mask->kind != opmatrix::PhaseMask::Kind::polyradial)
    throw config_error("closed-form eigenvalues need a polyradial mask (" + p.mask->describe() + ")");
  const auto& base = p.mask->base;
  std::function<quad::QuadResult(const MultiIndex&)> fn;
  if (p.state)
    fn = [&](const MultiIndex& n) { return eigen::eig_mixed(n, base, *p.state); };
  else
    fn = [&](const MultiIndex& n) { return eigen::eig_weighted(n, p.k, base); };
  return eigen::closed_form_table(idx, fn, p.tag(), p.mask->describe());
}

// Trusted matrix eigenpairs whose dominant index lies in the requested box.
eigen::EigenvalueTable matrix_table(const opmatrix::Spectrum& s, int nmax) {
  eigen::EigenvalueTable t = s.table;
  t.indices.clear();
  t.values.clear();
  t.errors.clear();
  for (std::size_t i = 0; i < s.dominant.size(); ++i) {
    const auto& k = s.dominant[i];
    bool in = !s.untrusted[i];
    for (std::size_t j = 0; j < k.dim(); ++j) in = in && k[j] < nmax;
    if (!in) continue;
    t.indices.push_back(k);
    t.values.push_back(s.table.values[i]);
    t.errors.push_back(s.table.errors[i]);
  }
  return t;
}

// Pairs every closed-form row with a matrix eigenvalue: first by dominant
// index, then the leftovers (rotated degenerate multiplets) in sorted order.
std::vector<double> match(const eigen::EigenvalueTable& closed, const eigen::EigenvalueTable& mat) {
  const std::size_t n = closed.size();
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> used(mat.size(), 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < mat.size(); ++j)
      if (!used[j] && mat.indices[j] == closed.indices[i]) {
        out[i] = mat.values[j];
        used[j] = 1;
        break;
      }
  std::vector<std::size_t> rows;
  std::vector<double> rest;
  for (std::size_t i = 0; i < n; ++i)
    if (std::isnan(out[i])) rows.push_back(i);
  for (std::size_t j = 0; j < mat.size(); ++j)
    if (!used[j]) rest.push_back(mat.values[j]);
  std::sort(rows.begin(), rows.end(), [&](auto a, auto b) { return closed.values[a] > closed.values[b]; });
  std::sort(rest.begin(), rest.end(), std::greater<>());
  for (std::size_t r = 0; r < rows.size() && r < rest.size(); ++r) out[rows[r]] = rest[r];
  return out;
}

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path, std::ios::binary);
    if (!file) throw config_error("cannot write '" + path + "'");
    os = &file;
  }
  std::ostream& operator*() { return *os; }
};

void dump_matrix(const JobConfig& c, const opmatrix::OperatorMatrix& op) {
  if (c.dump.empty()) return;
  std::ofstream csv(c.dump + ".csv", std::ios::binary), side(c.dump + ".json", std::ios::binary);
  if (!csv || !side) throw config_error("cannot write '" + c.dump + ".csv/.json'");
  comment_line(csv, c);
  opmatrix::write_matrix_csv(op, csv);
  side << opmatrix::sidecar(op).dump(2) << "\n";
}

int cmd_eigvals(const JobConfig& c) {
  if (c.method != "closed" && c.method != "matrix" && c.method != "both")
    throw config_error("--method must be closed, matrix or both");
  const Problem p = resolve(c, true);
  const auto idx = box_indices(p.d, c.nmax);

  std::optional<eigen::EigenvalueTable> closed, mat;
  if (c.method != "matrix") closed = closed_table(p, idx);
  if (c.method != "closed") {
    const auto op = assemble(p, basis_size(c, p.d));
    dump_matrix(c, op);
    mat = matrix_table(opmatrix::diagonalize(op), c.nmax);
  }

  Output out(c.out);
  comment_line(*out, c);
  if (c.method == "closed") {
    closed->write_csv(*out);
    return 0;
  }
  if (c.method == "matrix") {
    mat->write_csv(*out);
    return 0;
  }

  const auto other = match(*closed, *mat);
  double worst = 0;
  std::ostream& os = *out;
  for (int j = 0; j < p.d; ++j) os << "n_" << j + 1 << ",";
  os << "tag,lambda,est_error,method,lambda_matrix,agreement\n";
  for (std::size_t i = 0; i < closed->size(); ++i) {
    const double agree = std::abs(closed->values[i] - other[i]);
    worst = std::isnan(agree) ? std::numeric_limits<double>::infinity() : std::max(worst, agree);
    for (int j = 0; j < p.d; ++j) os << closed->indices[i][j] << ",";
    os << closed->tag << "," << num(closed->values[i]) << "," << num(closed->errors[i]) << ",both," << num(other[i]) << ","
       << num(agree) << "\n";
  }
  os.flush();
  if (worst > c.tol) {
    std::cerr << "locspec: closed form and matrix disagree by " << worst << " > tol " << c.tol << "\n";
    return exit_tolerance;
  }
  return 0;
}

std::string entry(const MultiIndex& m, const MultiIndex& n) {
  if (m.dim() == 1) return "(" + std::to_string(m[0]) + "," + std::to_string(n[0]) + ")";
  return "(" + m.str() + "," + n.str() + ")";
}

int cmd_verify(const JobConfig& c) {
  const Problem p = resolve(c, true);
  if (p.state) throw config_error("verify takes a window, not a state");
  const int cap = p.d == 1 ? opmatrix::max_basis_d1 : opmatrix::max_basis_d2;
  if (c.nmax > cap) throw config_error("--nmax exceeds the basis cap of " + std::to_string(cap));
  const auto b = make_basis(p, c.nmax);
  const auto r = opmatrix::verify_double_orthogonality(b, p.k, *p.mask);

  struct Check {
    std::string name;
    double value;
    double limit;
    std::string note;
    bool ok() const { return value <= limit; }
  };
  std::vector<Check> checks;
  checks.push_back({"gram_offdiag", r.gram_offdiag, c.tol, ""});
  // Upper-triangle entries over tolerance, row-major.
  const auto idx = b.indices();
  std::vector<std::pair<std::size_t, std::size_t>> bad;
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j)
      if (std::abs(r.weighted(i, j)) > c.tol) bad.emplace_back(i, j);
  std::string note;
  if (!bad.empty())
    note = "first entry " + entry(idx[bad[0].first], idx[bad[0].second]) + ", worst " + entry(r.worst.first, r.worst.second) +
           ", " + std::to_string(bad.size()) + " over tolerance";
  checks.push_back({"weighted_offdiag", r.weighted_offdiag, c.tol, note});
  const symplectic::CMat& W = r.weighted;
  checks.push_back({"hermitian", (W - W.adjoint()).cwiseAbs().maxCoeff(), opmatrix::hermitian_tol, ""});

  const auto& m = *p.mask;
  const bool positive = m.kind != opmatrix::PhaseMask::Kind::polyradial ||
                        (m.base.c >= 0 && m.base.scale >= 0 && m.base.c + m.base.scale >= 0);
  if (positive) {
    const Eigen::SelfAdjointEigenSolver<symplectic::CMat> es(0.5 * (W + W.adjoint()), Eigen::EigenvaluesOnly);
    checks.push_back({"psd", std::max(0.0, -es.eigenvalues().minCoeff()), opmatrix::psd_tol, ""});
  }
  if (m.kind == opmatrix::PhaseMask::Kind::polyradial) {
    double dev = 0;
    for (std::size_t i = 0; i < idx.size(); ++i)
      dev = std::max(dev, std::abs(r.c(static_cast<Eigen::Index>(i)) - eigen::eig_weighted(idx[i], p.k, m.base).value));
    checks.push_back({"closed_form", dev, c.tol, ""});
  }

  bool ok = true;
  for (const auto& ch : checks) ok = ok && ch.ok();

  std::cout << "locspec " << version << " verify basis=" << b.describe() << " window=" << p.k.str()
            << " mask=" << m.describe() << "\n";
  for (const auto& ch : checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%-18s %.3e  (limit %.1e)  %s", ch.name.c_str(), ch.value, ch.limit,
                  ch.ok() ? "PASS" : "FAIL");
    std::cout << line << (ch.note.empty() ? "" : "  " + ch.note) << "\n";
  }
  std::cout << "result " << (ok ? "PASS" : "FAIL") << "\n";

  if (!c.out.empty()) {
    json rep;
    rep["version"] = version;
    rep["config"] = c.hash();
    rep["basis"] = b.describe();
    rep["window"] = p.k.entries();
    rep["mask"] = m.describe();
    rep["pass"] = ok;
    rep["worst_entry"] = {r.worst.first.entries(), r.worst.second.entries()};
    rep["violations"] = json::array();
    for (const auto& [i, j] : bad)
      rep["violations"].push_back({{"m", idx[i].entries()}, {"n", idx[j].entries()}, {"abs", std::abs(r.weighted(i, j))}});
    rep["b"] = std::vector<double>(r.b.data(), r.b.data() + r.b.size());
    rep["c"] = std::vector<double>(r.c.data(), r.c.data() + r.c.size());
    for (const auto& ch : checks) rep["checks"][ch.name] = {{"value", ch.value}, {"limit", ch.limit}, {"pass", ch.ok()}};
    Output out(c.out);
    *out << rep.dump(2) << "\n";
  }
  return ok ? 0 : exit_verify;
}

phasespace::PhaseGrid sample_grid(const JobConfig& c, int d, bool phase) {
  phasespace::PhaseGrid g{d, d == 1 ? 6.0 : (phase ? 4.0 : 5.0), d == 1 ? (phase ? 128 : 256) : (phase ? 16 : 64)};
  if (!c.grid.empty()) {
    std::string s = c.grid;
    std::replace(s.begin(), s.end(), ',', '/');
    const auto v = io::Descriptor::split_numbers(s, "--grid");
    if (v.size() != 2 || !(v[0] > 0) || v[1] < 2 || v[1] != std::floor(v[1])) throw config_error("--grid expects L,N");
    g.L = v[0];
    g.N = static_cast<int>(v[1]);
  }
  const double points = std::pow(static_cast<double>(g.N), phase ? 2 * d : d);
  if (points > 1 << 24) throw config_error("--grid: " + num(points) + " sample points is too many");
  return g;
}

int cmd_sample(const JobConfig& c) {
  if (c.what != "wavepacket" && c.what != "stft" && c.what != "wigner")
    throw config_error("--what must be wavepacket, stft or wigner");
  const Problem p = resolve(c, false);
  if (p.state) throw config_error("sample takes a window, not a state");
  const MultiIndex n(io::parse_indices(c.index, p.d));
  const auto frame = p.frame ? *p.frame : symplectic::standard_frame(p.d);
  const bool phase = c.what != "wavepacket";
  const auto g = sample_grid(c, p.d, phase);
  const int axes = phase ? 2 * p.d : p.d;

  Output out(c.out);
  std::ostream& os = *out;
  comment_line(os, c);
  const char* t = phase ? "x" : "t";
  for (int a = 0; a < axes; ++a) {
    if (phase && a >= p.d)
      os << "omega_" << a - p.d + 1 << ",";
    else
      os << t << "_" << a + 1 << ",";
  }
  os << "re,im,abs\n";

  const hagedorn::FrameCache fc(frame);
  const symplectic::RMat Tinv = symplectic::frame_to_symplectic(frame).inverse();
  std::size_t total = 1;
  for (int a = 0; a < axes; ++a) total *= g.N;
  std::vector<double> z(axes);
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t r = f;
    for (int a = axes - 1; a >= 0; --a) {
      z[a] = g.coord(static_cast<int>(r % g.N));
      r /= g.N;
    }
    cplx v;
    if (c.what == "wavepacket")
      v = fc.eval(n, z);
    else if (c.what == "stft")
      v = phasespace::hagedorn_stft_closed(n, p.k, Tinv, z);
    else
      v = phasespace::hagedorn_wigner_closed(n, p.k, Tinv, z);
    for (double x : z) os << num(x) << ",";
    os << num(v.real()) << "," << num(v.imag()) << "," << num(std::abs(v)) << "\n";
  }
  return 0;
}

int cmd_williamson(const JobConfig& c) {
  if (c.matrix.empty()) throw config_error("--matrix is required");
  const auto M = io::read_covariance(c.matrix);
  const auto w = symplectic::williamson(M);
  const auto K = w.K();
  json rep;
  rep["version"] = version;
  rep["config"] = c.hash();
  rep["d"] = w.T.dim();
  rep["k"] = std::vector<double>(w.k.data(), w.k.data() + w.k.size());
  rep["K"] = io::matrix_json(K);
  rep["T"] = io::matrix_json(w.T.T);
  rep["admissible"] = symplectic::gaussian_admissible(M);
  rep["reconstruction_residual"] = (w.T.T * K * w.T.T.transpose() - M).norm() / M.norm();
  rep["symplectic_residual"] = symplectic::symplectic_residual(w.T.T);
  Output out(c.out);
  *out << rep.dump(2) << "\n";
  return 0;
}

// Picks the config formatter from the --config extension before parsing.
void choose_config_format(CLI::App& app, int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i], path;
    if (a == "--config" && i + 1 < argc)
      path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0)
      path = a.substr(9);
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
      app.config_formatter(std::make_shared<ConfigJSON>());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localization operator spectra: closed forms, operator matrices and phase-space samples"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML or JSON config file (by extension); flags override it");

  JobConfig c;
  app.add_option("--mask", c.mask, "mask descriptor, e.g. disc:R=0.5642, ball:R=1, gaussian:a=0.7, square:a=1");
  app.add_option("--window", c.window, "window descriptor hermite:K (d = 2: hermite:K1/K2)")->capture_default_str();
  app.add_option("--state", c.state, "state descriptor: parity | thermal:E=.. | gaussian:k=.. | gaussian:M=file | hermite:K | grid:file=..");
  app.add_option("--frame", c.frame, "Lagrangian frame JSON (Q_re, Q_im, P_re, P_im)");
  app.add_option("--matrix", c.matrix, "covariance matrix JSON for williamson");
  app.add_option("--method", c.method, "closed | matrix | both")->capture_default_str();
  app.add_option("--nmax", c.nmax, "indices per axis: n_j < nmax")->capture_default_str();
  app.add_option("--d", c.d, "phase-space half-dimension (default: frame dimension, else 1)");
  app.add_option("--basis", c.basis, "matrix basis functions per axis (default nmax + 4, capped)");
  app.add_option("--grid", c.grid, "sampling grid L,N: N points on [-L, L) per axis");
  app.add_option("--what", c.what, "sample: wavepacket | stft | wigner (against the --window function)")->capture_default_str();
  app.add_option("--index", c.index, "sample: multi-index, e.g. 3 or 2,1")->capture_default_str();
  app.add_option("--out", c.out, "output file (default stdout)");
  app.add_option("--dump-matrix", c.dump, "eigvals: write the operator matrix to PREFIX.csv and PREFIX.json");
  app.add_option("--tol", c.tol, "agreement / verification tolerance")->capture_default_str();

  auto sub = [&](const char* name, const char* help) { return app.add_subcommand(name, help)->fallthrough(); };
  sub("eigvals", "eigenvalue table (closed form, operator matrix, or both)");
  sub("verify", "double-orthogonality and invariant report; exit 4 on failure");
  sub("sample", "wavepacket, STFT or Wigner samples as CSV");
  sub("williamson", "Williamson normal form of a covariance matrix");

  choose_config_format(app, argc, argv);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    if (c.command == "eigvals") return cmd_eigvals(c);
    if (c.command == "verify") return cmd_verify(c);
    if (c.command == "sample") return cmd_sample(c);
    return cmd_williamson(c);
  } catch (const config_error& e) {
    std::cerr << "locspec: " << e.what() << "\n";
    return exit_config;
  } catch (const tolerance_error& e) {
    std::cerr << "locspec: " << e.what() << "\n";
    return exit_tolerance;
  } catch (const std::invalid_argument& e) {
    std::cerr << "locspec: " << e.what() << "\n";
    return exit_config;
  } catch (const std::domain_error& e) {
    std::cerr << "locspec: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "locspec: " << e.what() << "\n";
    return 1;
  }
}

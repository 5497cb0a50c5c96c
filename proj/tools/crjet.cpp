// crjet: command-line front end for the CR jet-parametrization library.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "crjet/crjet.hpp"

using namespace crjet;

namespace {

constexpr int kOk = 0, kResidual = 1, kPrecondition = 2, kUsage = 64;
constexpr int kProbeOrder = 12;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string file, source, target;
  int order = 0;
  std::vector<std::string> base_points;
  std::string target_point;
  std::string mode = "numeric";
  std::string format = "json";
  std::string out;
  std::string map, jet_file, system_file;
};

struct Result {
  json report;
  int code = kOk;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// One hypersurface per file; '#' starts a comment line.
std::string read_hypersurface(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line, text;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    if (!text.empty()) text += ' ';
    text += line.substr(b, e - b + 1);
  }
  if (text.empty()) throw usage_error("'" + path + "' contains no hypersurface");
  return text;
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw parse_error("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// A hypersurface together with the base point it is studied at.
struct Side {
  std::string text;
  Point point;
  int n = 1;
};

Side make_side(const std::string& text, const std::string& point) {
  Side s;
  s.text = text;
  s.n = parse_hypersurface(text, 1).coords.n;
  s.point = point.empty() ? Point(s.n + 1, GaussQ(0)) : parse_point(point, s.n + 1);
  return s;
}

NormalForm normalize(const Side& s, int D) { return normal_coordinates(parse_hypersurface(s.text, D, s.n), s.point); }

int order_for(const Options& o, const Side& s) {
  if (o.order > 0) return o.order;
  return default_order(parse_hypersurface(s.text, kProbeOrder, s.n), s.point, kProbeOrder);
}

/// Source and target from --source/--target, or one positional file for both.
std::pair<Side, Side> two_sides(const Options& o) {
  std::string src = o.source.empty() ? o.file : o.source;
  std::string tgt = o.target.empty() ? o.file : o.target;
  if (src.empty() || tgt.empty()) throw usage_error("give a hypersurface file or --source and --target");
  if (o.base_points.size() > 1) throw usage_error("--base-point takes one point here");
  std::string sp = o.base_points.empty() ? "" : o.base_points.front();
  std::string tp = o.target_point.empty() ? sp : o.target_point;
  return {make_side(read_hypersurface(src), sp), make_side(read_hypersurface(tgt), tp)};
}

Side one_side(const Options& o) {
  if (o.file.empty()) throw usage_error("missing hypersurface file");
  if (o.base_points.size() > 1) throw usage_error("--base-point takes one point here");
  return make_side(read_hypersurface(o.file), o.base_points.empty() ? "" : o.base_points.front());
}

json changes_json(const NormalForm& s, const NormalForm& t) {
  json j = json::object();
  j["source"] = coordinate_change_to_json(s);
  j["target"] = coordinate_change_to_json(t);
  return j;
}

json map_json(const SeriesTuple<GaussQ>& K, const Coordinates& C) { return series_tuple_to_json(K, C.holomorphic()); }

/// A jet file is either a jet object or any report carrying one under "jet".
JetGroupElement<GaussQ> load_jet(const std::string& path, const Coordinates& C) {
  json j = read_json(path);
  if (j.contains("jet")) j = j["jet"];
  try {
    return jet_from_json(j, C);
  } catch (const json::exception& e) {
    throw parse_error("'" + path + "' is not a jet: " + e.what());
  }
}

/// The jet from --jet or the jet of --map; the identity when neither is given and allowed.
JetGroupElement<GaussQ> pick_jet(const Options& o, const Coordinates& C, int order, int D, bool identity_default) {
  if (!o.jet_file.empty() && !o.map.empty()) throw usage_error("give either --jet or --map");
  if (!o.jet_file.empty()) return load_jet(o.jet_file, C);
  if (!o.map.empty()) {
    auto H = as_map(parse_map(o.map, C, D), C, D);
    try {
      return eta(H, C, order);
    } catch (const math_error& e) {
      throw precondition_error(e.what());
    }
  }
  if (identity_default) return JetGroupElement<GaussQ>::identity(C, order);
  throw usage_error("give --jet or --map");
}

/// Pipeline rebuilt from the provenance stored in a system file.
Pipeline pipeline_from_meta(const SystemMeta& m) {
  Side s{m.sources[0], m.base_points[0], m.n}, t{m.sources[1], m.base_points[1], m.n};
  Pipeline P(normalize(s, m.D), normalize(t, m.D), m.D);
  if (P.k0() != m.k0 || P.jet_order() != m.jet_order || P.witness_report().witness != m.witness)
    throw parse_error("system file does not match the pipeline rebuilt from its sources");
  return P;
}

std::vector<std::string> jet_variable_names(const Coordinates& C, int order) {
  auto ctx = jet_symbols(C, order);
  std::vector<std::string> out;
  for (std::size_t v = 0; v < ctx->size(); v += 2) out.push_back(ctx->names[v]);
  return out;
}

// Commands -------------------------------------------------------------------

Result cmd_normal_form(const Options& o) {
  Side s = one_side(o);
  int D = o.order > 0 ? o.order : kProbeOrder;
  auto nf = normalize(s, D);
  Result r;
  r.report = normal_form_to_json(nf);
  return r;
}

Result cmd_nondegen(const Options& o) {
  Side s = one_side(o);
  int D = o.order > 0 ? o.order : kProbeOrder;
  if (D < 2) throw precondition_error("--order must be at least 2");
  auto nf = normalize(s, D);
  auto rep = nondegeneracy(nf, D - 1);
  Result r;
  r.report = nondegeneracy_to_json(rep);
  r.report["D"] = D;
  r.report["base_point"] = point_to_json(s.point);
  r.report["coordinate_change"] = coordinate_change_to_json(nf);
  return r;
}

Result cmd_param_equations(const Options& o) {
  auto [s, t] = two_sides(o);
  int D = order_for(o, t);
  Pipeline P(normalize(s, D), normalize(t, D), D);
  const Coordinates& C = P.coords();
  SystemMeta meta = system_meta(P, o.mode);
  Result r;
  if (o.mode == "symbolic") {
    if (!o.jet_file.empty() || !o.map.empty()) throw usage_error("symbolic mode takes no jet");
    auto ms = materialize(P);
    r.report = materialized_to_json(ms, meta);
  } else {
    auto jet = pick_jet(o, C, P.jet_order(), D, true);
    meta.variables = jet_variable_names(C, P.jet_order());
    if (o.mode == "dual") {
      auto ps = dual_system(P, jet);
      r.report = param_system_to_json(ps, meta);
      r.report["slot_layout"] = "slot 2k: real direction of variables[k]; slot 2k+1: imaginary direction";
    } else {
      auto ps = evaluate_system(P, jet);
      r.report = param_system_to_json(ps, meta);
      auto rr = residual_report(ps);
      r.report["residual_zero"] = rr.zero();
      if (!rr.zero()) r.code = kResidual;
    }
    r.report["jet"] = jet_to_json(jet.truncated(P.jet_order()));
  }
  r.report["coordinate_changes"] = changes_json(P.source(), P.target());
  return r;
}

/// Evaluates a system file at a jet: symbolic files directly, others by rebuilding the pipeline.
struct SystemEvaluation {
  ResidualReport residuals;
  std::optional<SeriesTuple<GaussQ>> K;
  SystemMeta meta;
  std::optional<Pipeline> P;
};

SystemEvaluation evaluate_system_file(const Options& o, bool need_map_coords) {
  json j = read_json(o.system_file);
  SystemEvaluation ev;
  try {
    ev.meta = meta_from_json(j.at("meta"));
  } catch (const json::exception& e) {
    throw parse_error("'" + o.system_file + "' is not a system file: " + e.what());
  }
  auto C = Coordinates::make(ev.meta.n);
  auto jet = pick_jet(o, C, ev.meta.jet_order, ev.meta.D, false);
  if (ev.meta.mode == "symbolic") {
    MaterializedSystem ms;
    try {
      ms = materialized_from_json(j);
    } catch (const json::exception& e) {
      throw parse_error("'" + o.system_file + "' is malformed: " + e.what());
    }
    if (jet.order() < ms.jet_order) throw precondition_error("jet order below 2k0");
    ev.residuals = evaluate_system(ms, jet);
    if (ev.residuals.zero()) ev.K = reconstruct(ms, jet);
    if (need_map_coords) ev.P.emplace(pipeline_from_meta(ev.meta));
  } else {
    ev.P.emplace(pipeline_from_meta(ev.meta));
    auto ps = evaluate_system(*ev.P, jet);
    ev.residuals = residual_report(ps);
    if (ev.residuals.zero()) ev.K = ps.K;
  }
  return ev;
}

Result cmd_verify(const Options& o) {
  if (o.map.empty()) throw usage_error("verify needs --map");
  Result r;
  if (!o.system_file.empty()) {
    auto ev = evaluate_system_file(o, true);
    const Pipeline& P = *ev.P;
    auto rep = verify_map(parse_map(o.map, P.coords(), P.D()), P.source(), P.target(), P.D());
    r.report = verification_to_json(rep);
    r.report["system"] = residual_report_to_json(ev.residuals);
    r.report["system_mode"] = ev.meta.mode;
    r.report["coordinate_changes"] = changes_json(P.source(), P.target());
    r.code = rep.verified() && ev.residuals.zero() ? kOk : kResidual;
    return r;
  }
  auto [s, t] = two_sides(o);
  int D = order_for(o, t);
  auto src = normalize(s, D), tgt = normalize(t, D);
  auto rep = verify_map(parse_map(o.map, src.coords, D), src, tgt, D);
  if (rep.k0 && D < 2 * *rep.k0 + 2)
    throw precondition_error("order " + std::to_string(D) + " is below 2k0 + 2 = " + std::to_string(2 * *rep.k0 + 2));
  r.report = verification_to_json(rep);
  r.report["coordinate_changes"] = changes_json(src, tgt);
  r.code = rep.verified() ? kOk : kResidual;
  return r;
}

Result cmd_reconstruct(const Options& o) {
  Result r;
  std::optional<SeriesTuple<GaussQ>> K;
  ResidualReport rr;
  Coordinates C;
  json changes;
  if (!o.system_file.empty()) {
    auto ev = evaluate_system_file(o, false);
    rr = ev.residuals;
    K = ev.K;
    C = Coordinates::make(ev.meta.n);
    r.report["system_mode"] = ev.meta.mode;
    if (ev.P) changes = changes_json(ev.P->source(), ev.P->target());
  } else {
    auto [s, t] = two_sides(o);
    int D = order_for(o, t);
    Pipeline P(normalize(s, D), normalize(t, D), D);
    C = P.coords();
    auto ps = evaluate_system(P, pick_jet(o, C, P.jet_order(), D, false));
    rr = residual_report(ps);
    if (rr.zero()) K = ps.K;
    changes = changes_json(P.source(), P.target());
  }
  r.report["residuals"] = residual_report_to_json(rr);
  if (K) {
    r.report["map"] = map_json(*K, C);
    json ks = json::array();
    for (const auto& k : *K) ks.push_back(series_to_json(k));
    r.report["map_series"] = ks;
  }
  if (!changes.is_null()) r.report["coordinate_changes"] = changes;
  r.code = rr.zero() ? kOk : kResidual;
  return r;
}

Result cmd_lie_dim(const Options& o) {
  Side s = one_side(o);
  int D = order_for(o, s);
  auto nf = normalize(s, D);
  Pipeline P(nf, nf, D);
  Result r;
  r.report = lie_dim_to_json(lie_dim(P));
  r.report["base_point"] = point_to_json(s.point);
  r.report["coordinate_change"] = coordinate_change_to_json(nf);
  return r;
}

Result cmd_lie_dim_sweep(const Options& o) {
  if (o.file.empty()) throw usage_error("missing hypersurface file");
  if (o.base_points.empty()) throw usage_error("lie-dim-sweep needs at least one --base-point");
  std::string text = read_hypersurface(o.file);
  int n = parse_hypersurface(text, 1).coords.n;
  std::vector<Point> pts;
  for (const auto& p : o.base_points) pts.push_back(parse_point(p, n + 1));
  Result r;
  json entries = json::array();
  for (const auto& e : lie_dim_sweep(text, pts, o.order)) {
    json x = json::object();
    x["base_point"] = point_to_json(e.point);
    if (e.report) {
      x["report"] = lie_dim_to_json(*e.report);
      // The recentred hypersurface the dimension refers to.
      auto nf = normalize(Side{text, e.point, n}, e.report->D);
      x["normal_form"] = to_string(nf.Q);
      x["coordinate_change"] = coordinate_change_to_json(nf);
    } else {
      x["error"] = e.error;
      r.code = kPrecondition;
    }
    entries.push_back(x);
  }
  r.report["source"] = text;
  r.report["points"] = entries;
  return r;
}

Result cmd_formal_check(const Options& o) {
  if (o.map.empty()) throw usage_error("formal-check needs --map");
  auto [s, t] = two_sides(o);
  int D = order_for(o, t);
  Pipeline P(normalize(s, D), normalize(t, D), D);
  auto fc = formal_to_convergent(parse_map(o.map, P.coords(), D), P);
  Result r;
  r.report["accepted"] = fc.accepted();
  r.report["agrees_with_input"] = fc.agrees;
  r.report["verification"] = verification_to_json(fc.verification);
  if (fc.residuals) r.report["residuals"] = residual_report_to_json(*fc.residuals);
  if (!fc.reconstructed.empty()) r.report["reconstructed"] = map_json(fc.reconstructed, P.coords());
  r.report["coordinate_changes"] = changes_json(P.source(), P.target());
  r.code = fc.accepted() ? kOk : kResidual;
  return r;
}

// Output ---------------------------------------------------------------------

void render_text(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) render_text(v, prefix.empty() ? k : prefix + "." + k, os);
    return;
  }
  if (j.is_array()) {
    bool flat = true;
    for (const auto& x : j) flat = flat && !x.is_structured();
    if (flat) {
      os << prefix << ": " << j.dump() << "\n";
      return;
    }
    for (std::size_t i = 0; i < j.size(); ++i) render_text(j[i], prefix + "[" + std::to_string(i) + "]", os);
    return;
  }
  os << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
}

void emit(const json& report, const Options& o) {
  std::ostringstream ss;
  if (o.format == "text")
    render_text(report, "", ss);
  else
    ss << report.dump(2) << "\n";
  if (o.out.empty()) {
    std::cout << ss.str();
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw usage_error("cannot write '" + o.out + "'");
  f << ss.str();
}

json error_json(const std::string& kind, const std::string& message) {
  json j = json::object();
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jet parametrization of CR automorphisms of real hypersurfaces"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--order", o.order, "truncation degree D (default 2k0 + 4)")->check(CLI::PositiveNumber);
    sc->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "text"}));
    sc->add_option("--out", o.out, "write the report to a file");
  };
  auto add_file = [&](CLI::App* sc) { sc->add_option("file", o.file, "hypersurface file"); };
  auto add_point = [&](CLI::App* sc) {
    sc->add_option("--base-point", o.base_points, "base point \"<z>,<w>\" on the hypersurface")->allow_extra_args(false);
  };
  auto add_pair = [&](CLI::App* sc) {
    add_file(sc);
    sc->add_option("--source", o.source, "source hypersurface file");
    sc->add_option("--target", o.target, "target hypersurface file");
    add_point(sc);
    sc->add_option("--target-point", o.target_point, "base point on the target (default: --base-point)");
  };

  auto* nf = app.add_subcommand("normal-form", "normal coordinates at a point");
  add_common(nf);
  add_file(nf);
  add_point(nf);

  auto* nd = app.add_subcommand("nondegen", "nondegeneracy order and witness");
  add_common(nd);
  add_file(nd);
  add_point(nd);

  auto* pe = app.add_subcommand("param-equations", "the c, d and e equations of the jet system");
  add_common(pe);
  add_pair(pe);
  pe->add_option("--mode", o.mode, "coefficient mode")->check(CLI::IsMember({"numeric", "dual", "symbolic"}));
  pe->add_option("--map", o.map, "evaluate at the jet of this map");
  pe->add_option("--jet", o.jet_file, "evaluate at the jet in this JSON file");

  auto* ve = app.add_subcommand("verify", "check that a map sends the source into the target");
  add_common(ve);
  add_pair(ve);
  ve->add_option("--map", o.map, "map tuple in normal coordinates")->required();
  ve->add_option("--system", o.system_file, "also evaluate a saved system at the map's jet");

  auto* rc = app.add_subcommand("reconstruct", "the map determined by a jet");
  add_common(rc);
  add_pair(rc);
  rc->add_option("--map", o.map, "use the jet of this map");
  rc->add_option("--jet", o.jet_file, "jet JSON file");
  rc->add_option("--system", o.system_file, "saved system from param-equations");

  auto* ld = app.add_subcommand("lie-dim", "dimension of the isotropy algebra");
  add_common(ld);
  add_file(ld);
  add_point(ld);

  auto* sw = app.add_subcommand("lie-dim-sweep", "lie-dim at several base points");
  add_common(sw);
  add_file(sw);
  add_point(sw);

  auto* fc = app.add_subcommand("formal-check", "recover a truncated formal map from its jet");
  add_common(fc);
  add_pair(fc);
  fc->add_option("--map", o.map, "truncated formal map")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    Result r;
    if (nf->parsed()) r = cmd_normal_form(o);
    else if (nd->parsed()) r = cmd_nondegen(o);
    else if (pe->parsed()) r = cmd_param_equations(o);
    else if (ve->parsed()) r = cmd_verify(o);
    else if (rc->parsed()) r = cmd_reconstruct(o);
    else if (ld->parsed()) r = cmd_lie_dim(o);
    else if (sw->parsed()) r = cmd_lie_dim_sweep(o);
    else if (fc->parsed()) r = cmd_formal_check(o);
    emit(r.report, o);
    return r.code;
  } catch (const usage_error& e) {
    std::cerr << "crjet: " << e.what() << "\n";
    return kUsage;
  } catch (const parse_error& e) {
    emit(error_json("parse", e.what()), o);
  } catch (const precondition_error& e) {
    emit(error_json("precondition", e.what()), o);
  } catch (const math_error& e) {
    emit(error_json("math", e.what()), o);
  } catch (const std::invalid_argument& e) {
    emit(error_json("input", e.what()), o);
  }
  return kPrecondition;
}

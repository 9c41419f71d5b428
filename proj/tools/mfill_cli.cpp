// mfill: command-line front end for the filling library.
//
// Exit codes: 0 success, 2 validation failure (bad input, failed invariant),
// 3 budget exceeded. Errors go to stderr as one JSON object.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "invariant_suite.hpp"
#include "mfill/mfill.hpp"

using namespace mfill;
using json = nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 2;
constexpr int exit_budget = 3;

int report_error(const std::string& code, const std::string& detail, int status) {
  std::cerr << json{{"error", code}, {"detail", detail}, {"exit_code", status}}.dump() << '\n';
  return status;
}

std::string join_args(int argc, char** argv) {
  std::string s = "mfill";
  for (int k = 1; k < argc; ++k) s += std::string(" ") + argv[k];
  return s;
}

/// Writes to `path`, or stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << text;
}

void emit_json(const std::string& path, const json& j) { emit(path, j.dump(2) + "\n"); }

SpaceRef load_antipodal(const std::string& path) { return share(AntipodalSpace(io::read_space(path))); }

/// Point names on the command line are labels; a bare index is accepted when
/// no label matches.
std::size_t resolve_point(const FiniteSemiMetric& s, const std::string& name) {
  const auto& labels = s.labels();
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == name) return k;
  try {
    std::size_t used = 0;
    const auto k = std::stoul(name, &used);
    if (used == name.size() && k < s.size()) return k;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidParameter, "unknown point \"" + name + "\"");
}

/// Matrix from either a space file ("rho") or a ball sample ("gram").
SquareMatrix read_distance_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  const char* key = j.contains("gram") ? "gram" : "rho";
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, path + " has neither \"gram\" nor \"rho\"");
  return SquareMatrix::from_rows(j.at(key).get<std::vector<std::vector<double>>>());
}

json map_json(const PointMap& f) {
  const auto r = rough_isometry_report(f);
  return json{{"epsilon", r.epsilon}, {"distortion", r.distortion}, {"covering_radius", r.covering_radius},
              {"map", f.assignment}};
}

SearchMode parse_mode(const std::string& m) {
  if (m == "exact") return SearchMode::Exact;
  if (m == "heuristic") return SearchMode::Heuristic;
  throw Error(ErrorCode::InvalidParameter, "mode must be exact or heuristic");
}

void require_seed(const std::optional<std::uint64_t>& seed, const std::string& command) {
  if (!seed) throw Error(ErrorCode::InvalidParameter, command + " is stochastic and needs --seed <u64>");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fillings of finite antipodal spaces: flows, distances, convergence experiments"};
  app.require_subcommand(1);
  const std::string invocation = join_args(argc, argv);

  std::string space_path, out_path, mode = "exact", kind;
  std::vector<double> tau, tau2, etas;
  std::vector<std::size_t> nets;
  std::vector<std::string> quad;
  std::optional<std::uint64_t> seed;
  double tolerance = tol::membership, radius = 3.0, horizon = 10.0, step = 0.05, eta = 0.05;
  std::size_t count = 200, n = 16, branching = 2, depth = 3, stride = 1, restarts = 32, extra = 8;
  std::string other_path;

  auto add_space = [&](CLI::App* c) { c->add_option("space,--space", space_path, "space JSON file")->required(); };
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", seed, "u64 seed"); };

  auto* validate = app.add_subcommand("validate", "check a space file and print its invariant report");
  add_space(validate);

  auto* xratio = app.add_subcommand("cross-ratio", "cross-ratio [a b c d] of four points");
  add_space(xratio);
  xratio->add_option("--points", quad, "four point labels a,b,c,d")->delimiter(',')->required()->expected(4);

  auto* disc = app.add_subcommand("discrepancy", "discrepancy D(tau) of a function on the space");
  add_space(disc);
  disc->add_option("--tau", tau, "comma-separated values")->delimiter(',')->required();

  auto* antip = app.add_subcommand("antipodalize", "flow tau to an antipodal function");
  add_space(antip);
  antip->add_option("--tau", tau)->delimiter(',')->required();
  antip->add_option("--tol", tolerance, "membership tolerance")->check(CLI::PositiveNumber);
  antip->add_option("--step", step, "Euler step")->check(CLI::PositiveNumber);

  auto* trace = app.add_subcommand("flow-trace", "CSV trace of the antipodal flow");
  add_space(trace);
  trace->add_option("--tau", tau)->delimiter(',')->required();
  trace->add_option("--horizon", horizon)->check(CLI::PositiveNumber);
  trace->add_option("--step", step)->check(CLI::PositiveNumber);
  trace->add_option("--stride", stride, "record every k-th step")->check(CLI::PositiveNumber);
  trace->add_option("--out", out_path);

  auto* ball = app.add_subcommand("ball-sample", "sample a ball around the base point");
  add_space(ball);
  ball->add_option("--radius", radius)->check(CLI::PositiveNumber);
  ball->add_option("--count", count)->check(CLI::PositiveNumber);
  add_seed(ball);
  ball->add_option("--out", out_path);

  auto* dist = app.add_subcommand("distance", "sup-metric between two antipodal functions");
  add_space(dist);
  dist->add_option("--tau", tau)->delimiter(',')->required();
  dist->add_option("--tau2", tau2, "second point; the base point if omitted")->delimiter(',');
  dist->add_option("--tol", tolerance)->check(CLI::PositiveNumber);

  auto* ai = app.add_subcommand("ai-dist", "AI-distance between two semi-metric spaces");
  ai->add_option("a", space_path)->required();
  ai->add_option("b", other_path)->required();
  ai->add_option("--mode", mode, "exact or heuristic");
  ai->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
  add_seed(ai);

  auto* gh = app.add_subcommand("gh-ball", "GH-distance between two sampled balls (or metric spaces)");
  gh->add_option("a", space_path)->required();
  gh->add_option("b", other_path)->required();
  gh->add_option("--mode", mode, "exact or heuristic");
  std::size_t anneal = 2000;
  gh->add_option("--anneal-steps", anneal)->check(CLI::PositiveNumber);
  add_seed(gh);

  auto* fill = app.add_subcommand("fill-converge", "filling convergence along farthest-point nets");
  add_space(fill);
  fill->add_option("--nets", nets, "increasing net sizes")->delimiter(',')->required();
  fill->add_option("--radius", radius)->check(CLI::PositiveNumber);
  fill->add_option("--samples", count)->check(CLI::PositiveNumber);
  add_seed(fill);
  fill->add_option("--out", out_path);

  auto* bnd = app.add_subcommand("boundary-converge", "boundary recovery along a perturbation ladder");
  add_space(bnd);
  bnd->add_option("--etas", etas)->delimiter(',')->required();
  bnd->add_option("--radius", radius)->check(CLI::PositiveNumber);
  bnd->add_option("--extra", extra, "random sphere points besides ray points");
  add_seed(bnd);
  bnd->add_option("--out", out_path);

  auto* gal = app.add_subcommand("gallery", "write a model antipodal space");
  gal->add_option("--kind", kind)->required()->check(CLI::IsMember({"circle", "tree", "random", "perturb"}));
  gal->add_option("--n", n, "points (circle, random) or base circle size (perturb; 0 = Z4)");
  gal->add_option("--branching", branching);
  gal->add_option("--depth", depth);
  gal->add_option("--eta", eta);
  add_seed(gal);
  gal->add_option("--out", out_path);

  auto* inv = app.add_subcommand("invariant-suite", "run the seeded invariant battery");
  add_seed(inv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("ParseError", e.what(), exit_invalid);
  }

  try {
    if (*validate) {
      const auto s = io::read_space(space_path);
      const AntipodalSpace z(s);
      emit_json("", json{{"valid", true},
                         {"n", s.size()},
                         {"labels", s.labels()},
                         {"diameter", s.diameter()},
                         {"min_separation", s.min_separation()},
                         {"quasimetric_constant", quasimetric_constant(s)},
                         {"triangle_inequality", satisfies_triangle_inequality(s.matrix())}});
    } else if (*xratio) {
      const auto s = io::read_space(space_path);
      const auto a = resolve_point(s, quad[0]), b = resolve_point(s, quad[1]), c = resolve_point(s, quad[2]),
                 d = resolve_point(s, quad[3]);
      emit_json("", json{{"points", quad}, {"cross_ratio", cross_ratio(s, a, b, c, d)}});
    } else if (*disc) {
      const auto z = load_antipodal(space_path);
      check_dimension(tau, *z);
      const auto d = discrepancy(tau, *z);
      const double norm = sup_norm(d.values);
      emit_json("", json{{"discrepancy", d.values}, {"argmax", d.argmax}, {"norm", norm},
                         {"member", norm <= tol::membership}});
    } else if (*antip) {
      const auto z = load_antipodal(space_path);
      check_dimension(tau, *z);
      AntipodalizeStats stats;
      const double d0 = discrepancy_norm(tau, *z);
      const auto out = antipodalize_values(tau, *z, tolerance, {step, FlowOptions{}.max_steps}, &stats);
      emit_json("", json{{"tau_infinity", out},
                         {"residual", stats.residual},
                         {"initial_discrepancy", d0},
                         {"displacement", sup_distance(out, tau)},
                         {"flow_time", stats.time},
                         {"steps", stats.steps}});
    } else if (*trace) {
      const auto z = load_antipodal(space_path);
      check_dimension(tau, *z);
      const auto t = flow_trajectory(tau, *z, step, horizon, stride);
      emit(out_path, io::report_string(io::to_rows(t), io::flow_schema, invocation));
    } else if (*ball) {
      require_seed(seed, "ball-sample");
      const auto z = load_antipodal(space_path);
      emit_json(out_path, io::ball_to_json(sample_ball(z, radius, count, *seed)));
    } else if (*dist) {
      const auto z = load_antipodal(space_path);
      auto member = [&](const std::vector<double>& v) {
        check_dimension(v, *z);
        const auto rep = is_member(TauVector{z, v}, tolerance);
        if (!rep.member)
          throw Error(ErrorCode::InvalidParameter,
                      "tau is not antipodal (residual " + io::format_number(rep.residual) + "); antipodalize first");
        return *rep.point;
      };
      const auto a = member(tau);
      const auto b = tau2.empty() ? base_point(z) : member(tau2);
      emit_json("", json{{"distance", moebius_metric(a, b)}});
    } else if (*ai) {
      const SearchMode m = parse_mode(mode);
      if (m == SearchMode::Heuristic) require_seed(seed, "ai-dist --mode heuristic");
      const auto a = io::read_space(space_path), b = io::read_space(other_path);
      const auto r = ai_distance(a, b, {m, restarts, seed.value_or(0), 8});
      emit_json("", json{{"ai_distance", r.value},
                         {"exact", r.exact},
                         {"forward", map_json(r.forward)},
                         {"backward", map_json(r.backward)}});
    } else if (*gh) {
      require_seed(seed, "gh-ball");
      GhOptions o;
      o.mode = parse_mode(mode);
      o.anneal_steps = anneal;
      o.seed = *seed;
      const auto r = gh_distance(read_distance_matrix(space_path), read_distance_matrix(other_path), o);
      json pairs = json::array();
      for (const auto& p : r.witness.pairs) pairs.push_back({p.first, p.second});
      emit_json("", json{{"gh_distance", r.value}, {"exact", r.exact}, {"correspondence", pairs}});
    } else if (*fill) {
      require_seed(seed, "fill-converge");
      const auto z = load_antipodal(space_path);
      const auto rep = filling_convergence_experiment(z, nets, radius, count, *seed);
      emit(out_path, io::report_string(io::to_rows(rep), io::filling_schema, invocation));
    } else if (*bnd) {
      require_seed(seed, "boundary-converge");
      const auto z = load_antipodal(space_path);
      BoundaryExperimentOptions o;
      o.extra_points = extra;
      const auto rep = boundary_convergence_experiment(*z, etas, radius, *seed, o);
      emit(out_path, io::report_string(io::to_rows(rep), io::boundary_schema, invocation));
    } else if (*gal) {
      GallerySpec spec;
      if (kind == "circle") {
        spec = CircleSpec{n};
      } else if (kind == "tree") {
        spec = TreeSpec{branching, depth};
      } else if (kind == "random") {
        require_seed(seed, "gallery --kind random");
        spec = RandomSpec{n, *seed};
      } else {
        require_seed(seed, "gallery --kind perturb");
        spec = PerturbSpec{gal->count("--n") ? n : 0, eta, *seed};
      }
      emit_json(out_path, io::space_to_json(make_space(spec).metric()));
    } else if (*inv) {
      require_seed(seed, "invariant-suite");
      const auto results = suite::run_all(*seed);
      json checks = json::array();
      bool all = true;
      for (const auto& r : results) {
        checks.push_back({{"name", r.name}, {"pass", r.pass}, {"worst", r.worst}, {"note", r.note}});
        all = all && r.pass;
      }
      emit_json("", json{{"seed", *seed}, {"all_pass", all}, {"checks", checks}});
      if (!all) return report_error("InvariantViolated", "at least one invariant check failed", exit_invalid);
    }
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.code())), e.detail(),
                        is_budget_error(e.code()) ? exit_budget : exit_invalid);
  } catch (const json::exception& e) {
    return report_error("ParseError", e.what(), exit_invalid);
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what(), exit_invalid);
  }
  return exit_ok;
}

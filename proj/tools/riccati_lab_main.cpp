// riccati-lab: classify second-order equations (p x')' = q x by the
// convergence pattern of int dt/p and int q dt, construct global Riccati
// solutions by fixed-point iteration, reproduce solution bases, and verify
// them against exact references.
//
//   riccati-lab classify --config FILE [--format json|table]
//   riccati-lab solve    --config FILE [--out DIR] [--kind NAME]
//   riccati-lab verify   --config FILE [--out DIR] [--format json|table]
//   riccati-lab sweep    --config FILE [--out DIR] [--format json|csv|table]
//
// Exit codes: 0 success, 1 error, 2 inconclusive classification,
// 3 construction not applicable.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include "rlab/config.hpp"
#include "rlab/report.hpp"

namespace {

using namespace rlab;
using report::Json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitNotApplicable = 3;

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << contents;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "json";
};

int cmd_classify(const CommonArgs& args) {
  auto cfg = config::Config::parse_file(args.config_path);
  auto settings = config::settings_from(cfg);
  auto ws = pipeline::prepare(config::coefficients_from(cfg), settings);
  if (args.format == "table")
    std::cout << report::classify_table(ws);
  else
    std::cout << report::classify_json(ws).dump(2) << '\n';
  return ws.eqclass.c == classify::Case::Unknown ? kExitInconclusive : kExitOk;
}

int cmd_solve(const CommonArgs& args, const std::string& kind_name) {
  auto cfg = config::Config::parse_file(args.config_path);
  auto settings = config::settings_from(cfg);
  auto ws = pipeline::prepare(config::coefficients_from(cfg), settings);
  if (ws.eqclass.c == classify::Case::Unknown) {
    std::cerr << "classification inconclusive; cannot pick a construction\n";
    return kExitInconclusive;
  }

  std::vector<pipeline::SolveOutcome> outcomes;
  std::string kind = kind_name.empty()
                         ? cfg.get_string("solve", "kind", "auto")
                         : kind_name;
  if (kind == "auto") {
    outcomes = pipeline::solve_auto(ws, settings);
  } else {
    auto k = riccati::kind_from_string(kind);
    if (!k) {
      std::cerr << "unknown operator kind '" << kind << "'\n";
      return kExitError;
    }
    riccati::OperatorSpec spec{*k};
    spec.omega = settings.case3_omega;
    if (auto bp = cfg.get_optional_double("solve", "band_param")) spec.band_param = bp;
    outcomes.push_back(pipeline::solve_kind(ws, spec, settings));
  }

  std::filesystem::create_directories(args.out_dir);
  Json meta;
  meta["schema_version"] = report::kSchemaVersion;
  meta["classification"] = report::classify_json(ws);
  Json list = Json::array();

  bool any_na = false, any_err = false;
  int idx = 0;
  for (const auto& oc : outcomes) {
    ++idx;
    Json j = report::outcome_json(oc);
    if (oc.ok()) {
      std::string stem = "solution_" + std::to_string(idx) + "_" +
                         std::string(riccati::to_string(oc.spec.kind));
      auto csv_path = std::filesystem::path(args.out_dir) / (stem + ".csv");
      write_file(csv_path, report::solution_csv(*oc.sol));
      j["csv"] = csv_path.string();
    } else if (oc.not_applicable()) {
      any_na = true;
    } else {
      any_err = true;
    }
    list.push_back(j);
  }
  meta["solutions"] = list;
  if (outcomes.empty()) {
    meta["note"] = "no general construction for this class";
    any_na = true;
  }
  auto meta_path = std::filesystem::path(args.out_dir) / "solve.json";
  write_file(meta_path, meta.dump(2) + "\n");
  std::cout << meta.dump(2) << '\n';

  if (any_err) return kExitError;
  if (any_na) return kExitNotApplicable;
  return kExitOk;
}

int cmd_verify(const CommonArgs& args) {
  auto cfg = config::Config::parse_file(args.config_path);
  auto settings = config::settings_from(cfg);
  auto ws = pipeline::prepare(config::coefficients_from(cfg), settings);
  auto rep = pipeline::run_verify_battery(ws, settings);
  std::filesystem::create_directories(args.out_dir);
  write_file(std::filesystem::path(args.out_dir) / "verify.json",
             report::verification_json(rep).dump(2) + "\n");
  if (args.format == "table")
    std::cout << report::verification_table(rep);
  else
    std::cout << report::verification_json(rep).dump(2) << '\n';
  return rep.all_pass() ? kExitOk : kExitError;
}

struct SweepCell {
  double k, lambda, mu;
  Json result;
};

Json sweep_cell(const config::Config& cfg, const pipeline::Settings& settings, double k,
                double lambda, double mu) {
  Json j;
  j["k"] = k;
  j["lambda"] = lambda;
  j["mu"] = mu;
  try {
    FamilySpec spec;
    spec.family = cfg.get_string("problem", "family", "power_log_P");
    spec.p = expr::Expression::parse(cfg.get_string("problem", "p", "1"));
    if (cfg.has("problem", "P"))
      spec.P = expr::Expression::parse(cfg.get_string("problem", "P", "t"));
    if (cfg.has("problem", "pi"))
      spec.pi = expr::Expression::parse(cfg.get_string("problem", "pi", "exp(-t)"));
    spec.k = k;
    spec.lambda = lambda;
    spec.mu = mu;
    spec.a = cfg.get_double("problem", "a", 0.0);
    auto ws = pipeline::prepare(make_family(spec), settings);

    j["case"] = classify::to_string(ws.eqclass.c);
    std::string assignment = "unresolved";
    if (ws.menu && !ws.menu->unresolved) {
      bool extreme = ws.menu->menu.front().flavor == classify::Flavor::Extreme;
      assignment = extreme ? "extreme" : "moderate";
    }
    j["assignment"] = assignment;
    if (ws.criteria) j["criteria"] = report::criteria_json(*ws.criteria);

    Json constructions = Json::array();
    for (const auto& oc : pipeline::solve_auto(ws, settings)) {
      Json e;
      e["kind"] = riccati::to_string(oc.spec.kind);
      e["role"] = oc.role;
      if (oc.ok()) {
        e["status"] = "ok";
        e["iterations"] = oc.ric->iterations;
        e["in_band"] = oc.ric->in_band;
        e["T"] = oc.threshold.T;
        e["terminal_estimate"] = oc.sol->terminal_estimate
                                     ? Json(oc.sol->terminal_estimate->tag)
                                     : Json(nullptr);
      } else if (oc.not_applicable()) {
        e["status"] = "not_applicable";
        e["measured"] = oc.threshold.measured;
        e["bound"] = oc.threshold.bound;
      } else {
        e["status"] = "error";
        e["error"] = oc.error;
      }
      constructions.push_back(e);
    }
    j["constructions"] = constructions;
  } catch (const std::exception& e) {
    j["error"] = e.what();
  }
  return j;
}

int cmd_sweep(const CommonArgs& args) {
  auto cfg = config::Config::parse_file(args.config_path);
  auto settings = config::settings_from(cfg);
  auto grid = config::sweep_grid_from(cfg);

  struct CellSpec {
    double k, lambda, mu;
  };
  std::vector<CellSpec> cells;
  for (double k : grid.k)
    for (double lambda : grid.lambda)
      for (double mu : grid.mu) cells.push_back({k, lambda, mu});

  // Cells are independent: run them concurrently, collect in order.
  std::vector<std::future<Json>> futures;
  futures.reserve(cells.size());
  for (const auto& c : cells)
    futures.push_back(std::async(std::launch::async, [&, c] {
      return sweep_cell(cfg, settings, c.k, c.lambda, c.mu);
    }));

  Json out;
  out["schema_version"] = report::kSchemaVersion;
  Json arr = Json::array();
  for (auto& f : futures) arr.push_back(f.get());
  out["cells"] = arr;

  std::filesystem::create_directories(args.out_dir);
  write_file(std::filesystem::path(args.out_dir) / "sweep.json", out.dump(2) + "\n");

  if (args.format == "table" || args.format == "csv") {
    const char* sep = args.format == "csv" ? "," : "  ";
    std::cout << "k" << sep << "lambda" << sep << "mu" << sep << "case" << sep
              << "assignment" << sep << "constructions" << '\n';
    for (const auto& cell : arr) {
      std::cout << cell["k"].dump() << sep << cell["lambda"].dump() << sep
                << cell["mu"].dump() << sep;
      std::cout << (cell.contains("case") ? cell["case"].get<std::string>() : "error")
                << sep;
      std::cout << (cell.contains("assignment") ? cell["assignment"].get<std::string>()
                                                : "-")
                << sep;
      if (cell.contains("constructions")) {
        std::string cs;
        for (const auto& e : cell["constructions"]) {
          if (!cs.empty()) cs += "/";
          cs += e["status"].get<std::string>();
        }
        std::cout << cs;
      }
      std::cout << '\n';
    }
  } else {
    std::cout << out.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonoscillatory second-order equations via Riccati fixed points"};
  app.require_subcommand(1);
  app.footer(R"(Configuration file sections and defaults:
  [problem]  p, q, a=0, t_start=a            (inline coefficients), or
             family = power_log_P | power_log_pi | constant_q |
                      gen_u_grow | gen_u_decay | gen_v_grow | gen_v_decay
             with p, P / pi / phi + phi_prime, k=1, lambda=2, mu=0
  [quad]     horizon_scale=1e6  p_probe_horizon=1e6  horizon=(unset)
             panel_tol=1e-10  r_conv=0.75  conv_windows=3  div_windows=4
             divergence_threshold=1e12  tail_tol=1e-3
  [classify] probe_window_scale=10  probe_points=513  margin=0.05
  [riccati]  nodes=512  tol=1e-9  max_iter=200  threshold_margin=0.9
  [solve]    kind=auto  omega=1  band_param=(unset)
  [verify]   band=0.02  oracle_tol=1e-4  window_factor=2
  [sweep]    k, lambda, mu as comma-separated lists
Exit codes: 0 success, 1 error, 2 inconclusive classification,
3 construction not applicable.)");

  CommonArgs args;
  std::string kind;

  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", args.config_path, "configuration file")->required();
    sub->add_option("--format", args.format, "output format: json, csv or table")
        ->default_val("json");
    if (with_out)
      sub->add_option("--out", args.out_dir, "output directory")->default_val(".");
  };

  auto* c_classify = app.add_subcommand("classify", "classify the equation");
  add_common(c_classify, false);
  auto* c_solve = app.add_subcommand("solve", "construct Riccati and equation solutions");
  add_common(c_solve, true);
  c_solve->add_option("--kind", kind, "operator kind (default: from config or auto)");
  auto* c_verify = app.add_subcommand("verify", "run the fixture's verification battery");
  add_common(c_verify, true);
  auto* c_sweep = app.add_subcommand("sweep", "parameter sweep over a family");
  add_common(c_sweep, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_classify->parsed()) return cmd_classify(args);
    if (c_solve->parsed()) return cmd_solve(args, kind);
    if (c_verify->parsed()) return cmd_verify(args);
    if (c_sweep->parsed()) return cmd_sweep(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

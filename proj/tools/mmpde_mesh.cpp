// mmpde-mesh: moving-mesh smoothing/adaptation driver and verification CLI.
//
// Subcommands: smooth, adapt, stats, verify, gradcheck, study.
// Exit codes: 0 = all asserted properties held, 1 = property violation,
// 2 = usage or I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "mmpde/diagnostics.hpp"
#include "mmpde/mesh_io.hpp"
#include "mmpde/scenarios.hpp"

namespace fs = std::filesystem;
using namespace mmpde;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyViolation = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string config_path;
  std::string scenario;
  std::vector<std::string> mesh_paths;  // node, ele
  std::string out_dir = "out";
  std::string functional = "huang";
  double p = 1.5;
  double theta = 1.0 / 3.0;
  double tau = 0.0;  // 0: scenario default
  std::string boundary = "slide";
  unsigned long seed = 1;
  int cells = 0;
  double amplitude = -1.0;
  std::string field_path;  // nodal u values for adapt --mesh
  std::string sizes = "8,16,32,64";
  int samples = 10000;
  int gradcheck_meshes = 10;
  double t_end = 0.0;  // 0: command default
  double stop_rel_tol = 0.0;
  std::string scheme = "euler";
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "flat key-value config file; flags override");
  cmd->add_option("--scenario", opt.scenario, "smooth2d|sinewave|smooth3d|ninespheres");
  cmd->add_option("--mesh", opt.mesh_paths, "input mesh: <file.node> <file.ele>")->expected(2);
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--seed", opt.seed, "random seed");
  cmd->add_option("--functional", opt.functional, "huang|winslow");
  cmd->add_option("--p", opt.p, "Huang exponent p");
  cmd->add_option("--theta", opt.theta, "Huang balance theta");
  cmd->add_option("--tau", opt.tau, "MMPDE time-scale constant");
  cmd->add_option("--boundary", opt.boundary, "fixed|slide");
  cmd->add_option("--n", opt.cells, "cells per box edge");
  cmd->add_option("--amplitude", opt.amplitude, "perturbation amplitude (smoothing)");
  cmd->add_option("--field", opt.field_path, "nodal scalar field file (adapt with --mesh)");
  cmd->add_option("--sizes", opt.sizes, "comma-separated cell counts (study)");
  cmd->add_option("--samples", opt.samples, "bound-check sample count (verify)");
  cmd->add_option("--meshes", opt.gradcheck_meshes, "mesh count per case (gradcheck)");
  cmd->add_option("--t-end", opt.t_end, "integration time limit");
  cmd->add_option("--stop-rel-tol", opt.stop_rel_tol, "stopping tolerance");
  cmd->add_option("--scheme", opt.scheme, "euler|rk2");
}

// Flat "key = value" or "key value" lines; '#' comments. Flags override file
// values, so the file is applied only where the flag was not passed.
void apply_config_file(const CLI::App& cmd, CommonOptions& opt) {
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) throw MeshError("could not open config '" + opt.config_path + "'");
  auto unset = [&](const std::string& flag) { return cmd.get_option(flag)->count() == 0; };
  std::string line;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string value;
    ls >> value;
    if (value == "=") ls >> value;
    std::string extra;

    if (key == "scenario" && unset("--scenario")) opt.scenario = value;
    else if (key == "out" && unset("--out")) opt.out_dir = value;
    else if (key == "seed" && unset("--seed")) opt.seed = std::stoul(value);
    else if (key == "functional" && unset("--functional")) opt.functional = value;
    else if (key == "p" && unset("--p")) opt.p = std::stod(value);
    else if (key == "theta" && unset("--theta")) opt.theta = std::stod(value);
    else if (key == "tau" && unset("--tau")) opt.tau = std::stod(value);
    else if (key == "boundary" && unset("--boundary")) opt.boundary = value;
    else if (key == "n" && unset("--n")) opt.cells = std::stoi(value);
    else if (key == "amplitude" && unset("--amplitude")) opt.amplitude = std::stod(value);
    else if (key == "field" && unset("--field")) opt.field_path = value;
    else if (key == "sizes" && unset("--sizes")) opt.sizes = value;
    else if (key == "samples" && unset("--samples")) opt.samples = std::stoi(value);
    else if (key == "meshes" && unset("--meshes")) opt.gradcheck_meshes = std::stoi(value);
    else if (key == "t-end" && unset("--t-end")) opt.t_end = std::stod(value);
    else if (key == "stop-rel-tol" && unset("--stop-rel-tol")) opt.stop_rel_tol = std::stod(value);
    else if (key == "scheme" && unset("--scheme")) opt.scheme = value;
    else if (key == "mesh" && unset("--mesh") && (ls >> extra)) opt.mesh_paths = {value, extra};
  }
}

FunctionalSpec make_spec(const CommonOptions& opt) {
  if (opt.functional == "winslow") return FunctionalSpec::winslow();
  if (opt.functional == "huang") return FunctionalSpec::huang(opt.p, opt.theta);
  throw MeshError("unknown functional '" + opt.functional + "' (expected huang or winslow)");
}

IntegratorConfig make_integrator_config(const CommonOptions& opt, double default_t_end,
                                        double default_tol) {
  IntegratorConfig config;
  config.t_end = opt.t_end > 0.0 ? opt.t_end : default_t_end;
  config.stop_rel_tol = opt.stop_rel_tol > 0.0 ? opt.stop_rel_tol : default_tol;
  config.stop_window = 20;
  if (opt.scheme == "rk2") config.scheme = Scheme::Rk2Adaptive;
  else if (opt.scheme != "euler") throw MeshError("unknown scheme '" + opt.scheme + "'");
  return config;
}

std::vector<int> parse_sizes(const std::string& sizes) {
  std::vector<int> out;
  std::istringstream ss(sizes);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw MeshError("no sizes given");
  return out;
}

void write_report(const std::string& path, const std::string& content) {
  const fs::path dir = fs::path(path).parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  write_text_file(path, content);
}

// Problem from --mesh files: metric is identity (smooth) or the Hessian-based metric pipeline
// over --field values (adapt); boundary vertices are fixed, since the files
// carry no surface geometry.
MmpdeProblem problem_from_files(const CommonOptions& opt, bool adapt, MetricPipelineResult* pipeline_out) {
  SimplicialMesh mesh = load_mesh(opt.mesh_paths[0], opt.mesh_paths[1]);
  mesh.validate();
  fix_all_boundary(mesh);

  MetricField metric = MetricField::identity(mesh.dim);
  if (adapt) {
    if (opt.field_path.empty()) throw MeshError("adapt with --mesh needs --field <values-file>");
    const std::vector<double> u = load_vertex_field(opt.field_path, mesh.n_vertices());
    MetricPipelineResult pipeline = build_metric_from_field(mesh, u);
    metric = pipeline.field;
    if (pipeline_out) *pipeline_out = std::move(pipeline);
  }
  const int n = mesh.n_elements();
  const int d = mesh.dim;
  const double tau = opt.tau > 0.0 ? opt.tau : (adapt ? 0.01 : 1.0);
  return MmpdeProblem(std::move(mesh), ComputationalMesh::master_copies(n, d), std::move(metric),
                      make_spec(opt), tau);
}

ScenarioSetup scenario_from(const CommonOptions& opt, const std::string& fallback_scenario) {
  ScenarioConfig sc;
  sc.name = opt.scenario.empty() ? fallback_scenario : opt.scenario;
  sc.cells = opt.cells;
  sc.spec = make_spec(opt);
  sc.tau = opt.tau;
  sc.slide_boundary = opt.boundary != "fixed";
  sc.perturb_amplitude = opt.amplitude;
  sc.seed = opt.seed;
  return make_scenario(sc);
}

int run_flow_command(CommonOptions opt, bool adapt) {
  MetricPipelineResult pipeline{MetricField::identity(2), 1.0, false, false};
  MmpdeProblem problem = [&] {
    if (!opt.mesh_paths.empty()) return problem_from_files(opt, adapt, &pipeline);
    ScenarioSetup setup = scenario_from(opt, adapt ? "sinewave" : "smooth2d");
    pipeline = std::move(setup.metric_info);
    return std::move(setup.problem);
  }();

  const QualityReport before = quality_report(problem.mesh, problem.metric);
  const double i_h0 = discrete_functional(problem);

  // with a coercive functional, the altitude/volume floors are asserted at
  // every accepted state of the run
  std::string floors_text;
  bool floors_ok = true;
  double min_volume_seen = before.min_volume;
  double min_altitude_seen = before.min_metric_altitude;
  NonsingularityFloors floors;
  const bool coercive = problem.spec.coercive(problem.mesh.dim);
  if (coercive) {
    floors = nonsingularity_floors(problem, i_h0);
    floors_text = floors.to_text();
  }
  StepObserver observer;
  if (coercive) {
    observer = [&](double, const MmpdeProblem& p, double, double) {
      const QualityReport q = quality_report(p.mesh, p.metric);
      min_volume_seen = std::min(min_volume_seen, q.min_volume);
      min_altitude_seen = std::min(min_altitude_seen, q.min_metric_altitude);
    };
  }

  const IntegratorConfig config = make_integrator_config(opt, adapt ? 10.0 : 200.0, 1e-7);
  const IntegrateResult result = integrate(problem, config, observer);
  const QualityReport after = quality_report(result.mesh, problem.metric);
  if (coercive)
    floors_ok = min_volume_seen >= floors.volume_floor && min_altitude_seen >= floors.altitude_floor;

  fs::create_directories(opt.out_dir);
  save_mesh(result.mesh, opt.out_dir + "/final.node", opt.out_dir + "/final.ele");
  write_text_file(opt.out_dir + "/trace.csv", result.trace.to_csv());

  std::ostringstream report;
  report << "command=" << (adapt ? "adapt" : "smooth") << "\n";
  report << "termination=" << to_string(result.reason) << "\n";
  report << "t_final=" << result.t_final << "\n";
  report << "accepted_steps=" << result.trace.rows.size() - 1 << "\n";
  report << "I_h_initial=" << i_h0 << "\n";
  report << "I_h_final=" << result.final_i_h << "\n";
  if (adapt) {
    report << "alpha=" << pipeline.alpha << "\n";
    if (pipeline.alpha_clamped) report << "alpha_clamped=1\n";
    if (pipeline.alpha_degenerate) report << "alpha_degenerate_target=1\n";
  }
  report << "\nbefore:\n" << before.to_text();
  report << "\nafter:\n" << after.to_text();
  if (coercive) {
    report << "\n" << floors_text;
    report << "floors_held=" << (floors_ok ? 1 : 0) << " (min |K| " << min_volume_seen
           << ", min a_KM " << min_altitude_seen << " over the run)\n";
  }
  write_text_file(opt.out_dir + "/report.txt", report.str());
  std::cout << report.str();

  if (result.reason == TerminationReason::DtUnderflow) {
    std::cerr << "integration stalled: dt underflow\n";
    return kExitPropertyViolation;
  }
  if (!floors_ok) {
    std::cerr << "nonsingularity floors violated along the run\n";
    return kExitPropertyViolation;
  }
  return kExitOk;
}

int run_stats(const CommonOptions& opt) {
  SimplicialMesh mesh;
  if (!opt.mesh_paths.empty()) {
    mesh = load_mesh(opt.mesh_paths[0], opt.mesh_paths[1]);
    mesh.validate();
  } else {
    mesh = scenario_from(opt, "smooth2d").problem.mesh;
  }
  const QualityReport report = quality_report(mesh, MetricField::identity(mesh.dim));
  std::cout << report.to_text();
  if (!opt.out_dir.empty()) write_report(opt.out_dir + "/stats.txt", report.to_text());
  return kExitOk;
}

int run_verify(const CommonOptions& opt) {
  bool ok = true;
  std::ostringstream out;
  for (int d : {2, 3}) {
    const BoundSampleReport alt = check_altitude_norm_bounds(opt.samples, opt.seed, d);
    const BoundSampleReport diam = check_diameter_norm_bounds(opt.samples, opt.seed + 1, d);
    out << "altitude_norm_bounds d=" << d << " samples=" << alt.samples
        << " violations=" << alt.violations << " worst_lower=" << alt.worst_lower_margin
        << " worst_upper=" << alt.worst_upper_margin << "\n";
    out << "diameter_norm_bounds d=" << d << " samples=" << diam.samples
        << " violations=" << diam.violations << " worst_lower=" << diam.worst_lower_margin
        << " worst_upper=" << diam.worst_upper_margin << "\n";
    ok = ok && alt.violations == 0 && diam.violations == 0;
  }
  out << (ok ? "verify: PASS\n" : "verify: FAIL\n");
  std::cout << out.str();
  return ok ? kExitOk : kExitPropertyViolation;
}

int run_gradcheck(const CommonOptions& opt) {
  std::mt19937_64 seeds(opt.seed);
  double worst = 0.0;
  const std::vector<FunctionalSpec> specs = {FunctionalSpec::winslow(), make_spec(opt)};
  for (int d : {2, 3}) {
    for (const FunctionalSpec& spec : specs) {
      for (int m = 0; m < opt.gradcheck_meshes; ++m) {
        const unsigned long seed = seeds();
        SimplicialMesh mesh = d == 2 ? make_uniform_grid_2d(4) : make_uniform_grid_3d(2);
        apply_box_constraints(mesh, Vec::zero(d), d == 2 ? Vec(1.0, 1.0) : Vec(1.0, 1.0, 1.0), true);
        double amplitude = 0.25 / (d == 2 ? 4 : 2);
        SimplicialMesh perturbed;
        while (true) {
          perturbed = perturb_mesh(mesh, amplitude, seed);
          try {
            perturbed.validate();
            break;
          } catch (const MeshError&) {
            amplitude *= 0.5;
          }
        }
        const int n = perturbed.n_elements();
        MmpdeProblem problem(std::move(perturbed), ComputationalMesh::master_copies(n, d),
                             MetricField::identity(d), spec, 1.0);

        const VelocityField assembled = assemble_velocities(problem);
        const std::vector<Vec> grad = fd_gradient(problem, 0.0);
        const std::vector<Mat> vm = vertex_metric_values(problem);
        double scale = 0.0;
        std::vector<Vec> expected(problem.mesh.n_vertices());
        for (int i = 0; i < problem.mesh.n_vertices(); ++i) {
          expected[i] = -(balance_p(problem.spec, vm[i]) / problem.tau) * grad[i];
          scale = std::max(scale, expected[i].norm());
        }
        for (int i = 0; i < problem.mesh.n_vertices(); ++i) {
          if (problem.mesh.constraint(i).kind != ConstraintKind::Free) continue;
          worst = std::max(worst, (assembled.v[i] - expected[i]).norm() / scale);
        }
      }
    }
  }
  std::cout << "gradcheck: max relative deviation " << worst << " (bound 1e-6)\n";
  return worst <= 1e-6 ? kExitOk : kExitPropertyViolation;
}

int run_study(const CommonOptions& opt) {
  const std::vector<int> sizes = parse_sizes(opt.sizes);
  const std::string scenario = opt.scenario.empty() ? "sinewave" : opt.scenario;

  auto factory = [&](int cells) {
    ScenarioConfig sc;
    sc.name = scenario;
    sc.cells = cells;
    sc.spec = make_spec(opt);
    sc.tau = opt.tau;
    sc.slide_boundary = opt.boundary != "fixed";
    sc.seed = opt.seed;
    return make_scenario(sc).problem;
  };
  const IntegratorConfig config = make_integrator_config(opt, 1.0, 1e-6);
  const StudyResult study = scaling_study(factory, sizes, config);

  std::cout << study.to_csv();
  if (!opt.out_dir.empty()) write_report(opt.out_dir + "/study.csv", study.to_csv());

  const bool slope_ok = study.slope >= -1.4 && study.slope <= -0.7;
  bool floors_ok = true;
  for (const StudyRow& row : study.rows)
    if (row.volume_floor > 0.0 && row.k_min < row.volume_floor) floors_ok = false;
  std::cout << "study: slope=" << study.slope << " (expected in [-1.4,-0.7]) "
            << (slope_ok && floors_ok ? "PASS" : "FAIL") << "\n";
  return slope_ok && floors_ok ? kExitOk : kExitPropertyViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moving-mesh generation and adaptation (smoothing, metric adaptation, theory checks)"};
  app.require_subcommand(1);

  CommonOptions opt;
  CLI::App* smooth = app.add_subcommand("smooth", "smooth a (perturbed) mesh with M = I");
  CLI::App* adapt = app.add_subcommand("adapt", "adapt a mesh to a metric from a nodal field");
  CLI::App* stats = app.add_subcommand("stats", "mesh quality statistics");
  CLI::App* verify = app.add_subcommand("verify", "metric-geometry norm bound sampling checks");
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "velocity vs finite-difference gradient");
  CLI::App* study = app.add_subcommand("study", "K_min vs N scaling study");
  for (CLI::App* cmd : {smooth, adapt, stats, verify, gradcheck, study}) add_common_flags(cmd, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    apply_config_file(*cmd, opt);
    if (cmd == smooth) return run_flow_command(opt, false);
    if (cmd == adapt) return run_flow_command(opt, true);
    if (cmd == stats) return run_stats(opt);
    if (cmd == verify) return run_verify(opt);
    if (cmd == gradcheck) return run_gradcheck(opt);
    if (cmd == study) return run_study(opt);
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

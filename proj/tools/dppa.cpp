// Command-line front end: generate benchmark instances, analyze their
// constants, run proximal/explicit trajectories, verify recorded runs
// against the bound curves, and plot error traces.
//
// Exit codes: 0 ok, 2 run diverged, 3 validation failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dppa/algorithms.hpp"
#include "dppa/instance.hpp"
#include "dppa/svg.hpp"
#include "dppa/theory.hpp"
#include "dppa/trajectory_io.hpp"
#include "dppa/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiverged = 2;
constexpr int kExitValidation = 3;

std::string manifest_path_for(const std::string& csv_path) {
  std::string base = csv_path;
  if (base.size() > 4 && base.substr(base.size() - 4) == ".csv")
    base.resize(base.size() - 4);
  return base + ".manifest.json";
}

std::string file_stem(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Runs one trajectory against an instance file and writes CSV + manifest.
int run_one(const dppa::InstanceFile& inst, const std::string& instance_path,
            dppa::Algo algo, double eta, long rounds, const std::string& out_csv,
            bool quiet = false) {
  const auto consts = dppa::compute_instance_constants(inst.costs, inst.w);
  if (consts.degenerate())
    throw dppa::ValidationError(
        "instance has a singular aggregate Hessian; no unique optimizer to measure against");

  const Eigen::MatrixXd fixed_point =
      dppa::solve_network_fixed_point(inst.costs, inst.w, eta);

  dppa::AlgoConfig cfg;
  cfg.eta = eta;
  cfg.rounds = rounds;
  const auto costs = dppa::cost_list(inst.costs);
  const auto traj = dppa::run(algo, cfg, inst.w, costs, consts, &fixed_point);

  dppa::write_trajectory_csv(out_csv, traj);
  dppa::RunManifest manifest;
  manifest.instance_path = instance_path;
  manifest.algo = algo;
  manifest.eta = eta;
  manifest.rounds = rounds;
  manifest.out_csv = out_csv;
  manifest.diverged = traj.diverged;
  manifest.constants = consts;
  dppa::write_manifest(manifest_path_for(out_csv), manifest);

  if (!quiet) {
    if (traj.diverged) {
      std::cout << dppa::algo_name(algo) << " eta=" << eta << ": diverged at round "
                << traj.final_state.t << " -> " << out_csv << "\n";
    } else {
      std::cout << dppa::algo_name(algo) << " eta=" << eta << ": completed " << rounds
                << " rounds, plateau(mean_err)=" << dppa::plateau_mean(traj.rows)
                << " -> " << out_csv << "\n";
    }
  }
  return traj.diverged ? kExitDiverged : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed proximal point / gradient descent benchmark lab"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "sample a random connected instance");
  int gen_n = 20, gen_m = 5, gen_d = 10;
  double gen_p = 0.4, gen_scale = 0.5;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--n", gen_n, "number of agents")->capture_default_str();
  gen->add_option("--m", gen_m, "rows per local least-squares block")->capture_default_str();
  gen->add_option("--d", gen_d, "decision dimension")->capture_default_str();
  gen->add_option("--link-prob", gen_p, "edge probability")->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_option("--scale", gen_scale, "cost scale c in c*||Ax-y||^2")->capture_default_str();
  gen->add_option("--out", gen_out, "instance JSON path")->required();

  auto* analyze = app.add_subcommand("analyze", "derive instance constants");
  std::string an_instance, an_out;
  analyze->add_option("--instance", an_instance, "instance JSON path")->required();
  analyze->add_option("--out", an_out, "constants JSON path (default stdout)");

  auto* runc = app.add_subcommand("run", "run one trajectory");
  std::string run_instance, run_algo = "dppa", run_out;
  double run_eta = 0.0;
  long run_rounds = 500;
  runc->add_option("--instance", run_instance, "instance JSON path")->required();
  runc->add_option("--algo", run_algo, "dppa or dgd")->capture_default_str();
  runc->add_option("--eta", run_eta, "stepsize")->required();
  runc->add_option("--rounds", run_rounds, "number of rounds")->capture_default_str();
  runc->add_option("--out", run_out, "trajectory CSV path")->required();

  auto* verifyc = app.add_subcommand("verify", "check a recorded trajectory");
  std::string ver_instance, ver_traj, ver_manifest, ver_out;
  verifyc->add_option("--instance", ver_instance, "instance JSON path")->required();
  verifyc->add_option("--trajectory", ver_traj, "trajectory CSV path")->required();
  verifyc->add_option("--manifest", ver_manifest,
                      "run manifest (default: derived from the CSV path)");
  verifyc->add_option("--out", ver_out, "report JSON path (default stdout)");

  auto* plotc = app.add_subcommand("plot", "render log10(mean_err) vs t as SVG");
  std::vector<std::string> plot_csvs, plot_labels;
  std::string plot_out;
  plotc->add_option("csv", plot_csvs, "trajectory CSV paths")->required();
  plotc->add_option("--labels", plot_labels, "legend labels (default: file stems)")
      ->delimiter(',');
  plotc->add_option("--out", plot_out, "output SVG path")->required();

  auto* sweepc = app.add_subcommand("sweep", "run one instance over a stepsize list");
  std::string sw_instance, sw_algo = "dppa", sw_prefix;
  std::vector<double> sw_etas;
  long sw_rounds = 2000;
  sweepc->add_option("--instance", sw_instance, "instance JSON path")->required();
  sweepc->add_option("--algo", sw_algo, "dppa or dgd")->capture_default_str();
  sweepc->add_option("--eta", sw_etas, "stepsizes")->required()->delimiter(',');
  sweepc->add_option("--rounds", sw_rounds, "rounds per stepsize")->capture_default_str();
  sweepc->add_option("--out", sw_prefix, "output path prefix")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto inst =
          dppa::generate_instance(gen_n, gen_m, gen_d, gen_p, gen_seed, gen_scale);
      dppa::write_instance(gen_out, inst);
      std::cout << "wrote " << gen_out << " (n=" << gen_n << ", edges="
                << inst.graph.edges.size() << ", rho_w=" << inst.w.rho_w << ")\n";
      return kExitOk;
    }

    if (analyze->parsed()) {
      const auto inst = dppa::read_instance(an_instance);
      const auto consts = dppa::compute_instance_constants(inst.costs, inst.w);
      const auto j = dppa::constants_to_json(consts);
      if (an_out.empty())
        std::cout << dppa::canonical_dump(j);
      else
        dppa::write_json_file(an_out, j);
      if (consts.degenerate())
        std::cerr << "note: aggregate Hessian is singular; optimizer-dependent "
                     "quantities are null and bound checks are disabled\n";
      return kExitOk;
    }

    if (runc->parsed()) {
      const auto inst = dppa::read_instance(run_instance);
      return run_one(inst, run_instance, dppa::parse_algo(run_algo), run_eta, run_rounds,
                     run_out);
    }

    if (verifyc->parsed()) {
      const auto inst = dppa::read_instance(ver_instance);
      const auto rows = dppa::read_trajectory_csv(ver_traj);
      const auto manifest = dppa::read_manifest(
          ver_manifest.empty() ? manifest_path_for(ver_traj) : ver_manifest);
      const auto report = dppa::verify_trajectory(inst, manifest, rows);
      const auto j = dppa::report_to_json(report);
      if (ver_out.empty())
        std::cout << dppa::canonical_dump(j);
      else
        dppa::write_json_file(ver_out, j);
      return report.passed() ? kExitOk : kExitValidation;
    }

    if (plotc->parsed()) {
      if (!plot_labels.empty() && plot_labels.size() != plot_csvs.size())
        throw dppa::ValidationError("plot: label count does not match CSV count");
      std::vector<dppa::PlotSeries> series;
      for (std::size_t i = 0; i < plot_csvs.size(); ++i) {
        dppa::PlotSeries s;
        s.label = plot_labels.empty() ? file_stem(plot_csvs[i]) : plot_labels[i];
        for (const auto& row : dppa::read_trajectory_csv(plot_csvs[i]))
          s.points.emplace_back(static_cast<double>(row.t), std::log10(row.err.mean_err));
        series.push_back(std::move(s));
      }
      write_text_file(plot_out, dppa::render_line_chart(series, "t", "log10(mean_err)"));
      std::cout << "wrote " << plot_out << "\n";
      return kExitOk;
    }

    if (sweepc->parsed()) {
      const auto inst = dppa::read_instance(sw_instance);
      const auto algo = dppa::parse_algo(sw_algo);
      int status = kExitOk;
      for (double eta : sw_etas) {
        char suffix[48];
        std::snprintf(suffix, sizeof suffix, "_eta%g.csv", eta);
        const int rc = run_one(inst, sw_instance, algo, eta, sw_rounds, sw_prefix + suffix);
        if (rc != kExitOk) status = rc;
      }
      return status;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

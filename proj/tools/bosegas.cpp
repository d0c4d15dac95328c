// bosegas command line: every library operation behind one reproducible
// entry point.  JSON for scalar reports, CSV for tabulated data; the resolved
// configuration is embedded in every JSON output.
//
// exit codes: 0 success, 1 usage, 2 precondition violation, 3 numerical failure

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bosegas/bogoliubov.hpp"
#include "bosegas/fockspace.hpp"
#include "bosegas/lattice.hpp"
#include "bosegas/parallel.hpp"
#include "bosegas/potential.hpp"
#include "bosegas/potential_io.hpp"
#include "bosegas/scattering.hpp"
#include "bosegas/selftest.hpp"
#include "bosegas/simulate.hpp"

using nlohmann::json;
using namespace bosegas;

namespace {

void emit(const json &j, const std::string &output_path) {
  if (output_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(output_path);
    if (!out)
      throw precondition_error("cannot write output file: " + output_path);
    out << j.dump(2) << "\n";
  }
}

void emit_csv(const std::string &text, const std::string &output_path) {
  if (output_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output_path);
    if (!out)
      throw precondition_error("cannot write output file: " + output_path);
    out << text;
  }
}

OccupationList parse_occupations(const std::string &spec) {
  // "nx,ny,nz:count;nx,ny,nz:count;..." with momenta in units of 2 pi
  OccupationList occ;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty())
      continue;
    const auto colon = item.find(':');
    require(colon != std::string::npos, "spectrum: occupation entry needs p:n");
    std::array<int, 3> p{};
    char comma = 0;
    std::istringstream ps(item.substr(0, colon));
    ps >> p[0] >> comma >> p[1] >> comma >> p[2];
    require(static_cast<bool>(ps), "spectrum: cannot parse momentum triple");
    occ[p] += std::stol(item.substr(colon + 1));
  }
  return occ;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"bosegas: Bogoliubov theory of a dilute Bose gas in a unit box"};
  app.require_subcommand(1);
  app.fallthrough(); // global flags may follow the subcommand

  int threads = 0;
  app.add_option("--threads", threads, "cap worker threads (0 = hardware)");

  std::string potential_path;
  std::string output_path;

  auto add_common = [&](CLI::App *cmd, bool needs_potential) {
    if (needs_potential)
      cmd->add_option("--potential", potential_path, "potential JSON file")->required();
    cmd->add_option("--output,-o", output_path, "output file (default stdout)");
  };

  json config;

  // scatter
  auto *scatter = app.add_subcommand("scatter", "zero-energy scattering length");
  add_common(scatter, true);
  std::string profile_csv;
  scatter->add_option("--profile-csv", profile_csv, "write (r, f) table to a file");

  // born
  auto *born = app.add_subcommand("born", "Born approximations of a0");
  add_common(born, true);
  int born_order = 1;
  born->add_option("--order", born_order, "0 or 1");

  // neumann
  auto *neumann_cmd = app.add_subcommand("neumann", "Neumann problem on the ball");
  add_common(neumann_cmd, true);
  long neumann_n = 100;
  neumann_cmd->add_option("--N", neumann_n, "particle number")->required();
  std::string neumann_profile_csv;
  neumann_cmd->add_option("--profile-csv", neumann_profile_csv, "write (r, f_N) table");

  // eta
  auto *eta_cmd = app.add_subcommand("eta", "correlation kernel eta_p (CSV)");
  add_common(eta_cmd, true);
  long eta_n = 100;
  double eta_mu = 0.0;
  int eta_shells = 64;
  eta_cmd->add_option("--N", eta_n, "particle number")->required();
  eta_cmd->add_option("--mu", eta_mu, "high-pass cutoff (0 = none)");
  eta_cmd->add_option("--max-shell", eta_shells, "lattice shells |n|^2 <= this");

  // elambda
  auto *elambda_cmd = app.add_subcommand("elambda", "finite-volume constant e_Lambda");
  add_common(elambda_cmd, false);
  int max_level = 120;
  std::string method = "averaged";
  elambda_cmd->add_option("--max-level", max_level, "cube truncation M");
  elambda_cmd->add_option("--method", method, "raw|averaged|abel");

  // bogsum
  auto *bogsum_cmd = app.add_subcommand("bogsum", "Bogoliubov ground-state lattice sum");
  add_common(bogsum_cmd, false);
  double bs_a0 = 0.01;
  int bs_level = 160;
  bogsum_cmd->add_option("--a0", bs_a0, "scattering length")->required();
  bogsum_cmd->add_option("--max-shell", bs_level, "shell truncation level");

  // energy
  auto *energy_cmd = app.add_subcommand("energy", "ground-state energy prediction");
  add_common(energy_cmd, true);
  long energy_n = 100;
  energy_cmd->add_option("--N", energy_n, "particle number")->required();

  // spectrum
  auto *spectrum_cmd = app.add_subcommand("spectrum", "excitation spectrum for occupations");
  std::string occ_spec;
  double spec_a0 = -1.0;
  spectrum_cmd->add_option("--occ", occ_spec, "e.g. \"1,0,0:2;0,1,1:1\" (units of 2 pi)")
      ->required();
  spectrum_cmd->add_option("--a0", spec_a0, "scattering length");
  spectrum_cmd->add_option("--potential", potential_path, "or derive a0 from a potential");
  spectrum_cmd->add_option("--output,-o", output_path, "output file");

  // depletion
  auto *depl_cmd = app.add_subcommand("depletion", "condensate depletion");
  add_common(depl_cmd, false);
  double depl_rho = 1.0, depl_a0 = -1.0;
  depl_cmd->add_option("--rho", depl_rho, "density")->required();
  depl_cmd->add_option("--a0", depl_a0, "constant-kernel scattering length");
  depl_cmd->add_option("--potential", potential_path, "momentum-dependent kernel");

  // lhy
  auto *lhy_cmd = app.add_subcommand("lhy", "Lee-Huang-Yang energy per particle");
  add_common(lhy_cmd, false);
  double lhy_rho = 1.0, lhy_a0 = 0.01;
  lhy_cmd->add_option("--rho", lhy_rho, "density")->required();
  lhy_cmd->add_option("--a0", lhy_a0, "scattering length")->required();

  // coeffs
  auto *coeffs_cmd = app.add_subcommand("coeffs", "renormalized coefficient table (CSV)");
  add_common(coeffs_cmd, true);
  long coeffs_n = 1000;
  double coeffs_mu = pi;
  int coeffs_shells = 32;
  coeffs_cmd->add_option("--N", coeffs_n, "particle number")->required();
  coeffs_cmd->add_option("--mu", coeffs_mu, "eta high-pass cutoff")->required();
  coeffs_cmd->add_option("--max-shell", coeffs_shells, "lattice shells |n|^2 <= this");

  // sum-vs-integral
  auto *svi_cmd = app.add_subcommand("sum-vs-integral", "lattice sum against the LHY integral");
  add_common(svi_cmd, false);
  double svi_a0 = 0.1, svi_r = 1e4;
  svi_cmd->add_option("--a0", svi_a0, "scattering length")->required();
  svi_cmd->add_option("--R", svi_r, "rescaling parameter")->required();

  // simulate
  auto *sim_cmd = app.add_subcommand("simulate", "exact diagonalization cascade");
  add_common(sim_cmd, true);
  fock::SimulateOptions sim_opt;
  sim_cmd->add_option("--N", sim_opt.n_particles, "particle number")->required();
  sim_cmd->add_option("--pmax", sim_opt.p_max, "mode cutoff |p| <= pmax");
  sim_cmd->add_option("--beta", sim_opt.beta, "scaling exponent in [0,1]");
  sim_cmd->add_option("--kappa", sim_opt.kappa, "coupling constant");
  sim_cmd->add_option("--eta-mu", sim_opt.mu, "eta high-pass cutoff");
  sim_cmd->add_option("--nu", sim_opt.nu, "low-momentum boundary for the cubic sets");
  sim_cmd->add_flag("--cascade", sim_opt.cascade, "run the full unitary cascade");
  sim_cmd->add_option("--dim-cap", sim_opt.dim_cap, "basis dimension cap");

  // check
  auto *check_cmd = app.add_subcommand("check", "run the acceptance suite");
  std::string suite = "all";
  check_cmd->add_option("--suite", suite, "all");
  check_cmd->add_option("--output,-o", output_path, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e); // prints usage/help
    return code == 0 ? 0 : 1;
  }

  if (threads > 0)
    max_threads() = threads;
  config["threads"] = threads;

  try {
    if (*scatter) {
      const auto pot = load_potential(potential_path);
      const auto sol = solve_zero_energy(pot);
      config["subcommand"] = "scatter";
      config["potential"] = potential_to_json(pot);
      json j{{"a0", sol.a0},
             {"residual", sol.residual},
             {"identity_integral", scattering_length_integral(pot, sol)},
             {"config", config}};
      emit(j, output_path);
      if (!profile_csv.empty()) {
        std::ostringstream csv;
        csv << "r,f\n";
        const double r_out = 3.0 * pot.range();
        for (int i = 0; i <= 400; ++i) {
          const double r = r_out * i / 400.0;
          csv << r << "," << sol.f(r) << "\n";
        }
        emit_csv(csv.str(), profile_csv);
      }
    } else if (*born) {
      const auto pot = load_potential(potential_path);
      const auto series = born_series(pot, born_order);
      config["subcommand"] = "born";
      config["order"] = born_order;
      config["potential"] = potential_to_json(pot);
      json j{{"born", series}, {"config", config}};
      emit(j, output_path);
    } else if (*neumann_cmd) {
      const auto pot = load_potential(potential_path);
      const auto sol = solve_neumann(pot, neumann_n);
      config["subcommand"] = "neumann";
      config["N"] = neumann_n;
      config["potential"] = potential_to_json(pot);
      json j{{"lambda_N", sol.lambda},
             {"boundary_defect", sol.boundary_defect},
             {"interaction_f_integral", interaction_f_integral(pot, sol)},
             {"config", config}};
      emit(j, output_path);
      if (!neumann_profile_csv.empty()) {
        std::ostringstream csv;
        csv << "r,f_N\n";
        for (int i = 0; i <= 500; ++i) {
          const double r = 0.5 * i / 500.0;
          csv << r << "," << sol.f(r) << "\n";
        }
        emit_csv(csv.str(), neumann_profile_csv);
      }
    } else if (*eta_cmd) {
      const auto pot = load_potential(potential_path);
      const auto sol = solve_neumann(pot, eta_n);
      std::ostringstream csv;
      csv << "p,eta_p\n";
      const auto r3 = three_squares_table(eta_shells);
      for (std::int64_t s = 1; s <= eta_shells; ++s) {
        if (!r3[static_cast<std::size_t>(s)])
          continue;
        const double p = two_pi * std::sqrt(static_cast<double>(s));
        const double value = (eta_mu > 0.0 && p < eta_mu) ? 0.0 : eta_kernel(sol, p);
        csv << p << "," << value << "\n";
      }
      emit_csv(csv.str(), output_path);
    } else if (*elambda_cmd) {
      config["subcommand"] = "elambda";
      config["max_level"] = max_level;
      config["method"] = method;
      const LatticeSumResult res =
          (method == "abel") ? e_lambda_abel() : e_lambda(max_level, method);
      json j{{"value", res.value},
             {"cos_sum", res.cos_sum},
             {"truncation", res.truncation},
             {"error_estimate", res.error_estimate},
             {"method", res.method},
             {"config", config}};
      if (res.warning)
        j["warning"] = res.warning_text;
      emit(j, output_path);
    } else if (*bogsum_cmd) {
      config["subcommand"] = "bogsum";
      config["a0"] = bs_a0;
      config["max_shell"] = bs_level;
      const auto res = bogoliubov_lattice_sum(bs_a0, bs_level);
      json j{{"value", res.value},
             {"truncation", res.truncation},
             {"error_estimate", res.error_estimate},
             {"method", res.method},
             {"config", config}};
      emit(j, output_path);
    } else if (*energy_cmd) {
      const auto pot = load_potential(potential_path);
      const auto e = ground_state_energy_gp(pot, energy_n);
      config["subcommand"] = "energy";
      config["N"] = energy_n;
      config["potential"] = potential_to_json(pot);
      json j{{"total", e.total},
             {"leading", e.leading},
             {"finite_volume", e.finite_volume},
             {"bogoliubov_sum", e.bogoliubov_sum},
             {"a0", e.a0},
             {"e_lambda", e.e_lambda},
             {"config", config}};
      emit(j, output_path);
    } else if (*spectrum_cmd) {
      double a0 = spec_a0;
      if (a0 < 0.0) {
        require(!potential_path.empty(), "spectrum: provide --a0 or --potential");
        a0 = solve_zero_energy(load_potential(potential_path)).a0;
      }
      const auto occ = parse_occupations(occ_spec);
      config["subcommand"] = "spectrum";
      config["a0"] = a0;
      config["occ"] = occ_spec;
      json j{{"energy", excitation_energy(a0, occ)}, {"config", config}};
      emit(j, output_path);
    } else if (*depl_cmd) {
      config["subcommand"] = "depletion";
      config["rho"] = depl_rho;
      double value = 0.0;
      if (!potential_path.empty()) {
        const auto pot = load_potential(potential_path);
        config["potential"] = potential_to_json(pot);
        value = depletion_integral(depl_rho, pot);
      } else {
        require(depl_a0 >= 0.0, "depletion: provide --a0 or --potential");
        config["a0"] = depl_a0;
        value = depletion_integral(depl_rho, depl_a0);
      }
      json j{{"rho_plus", value}, {"config", config}};
      emit(j, output_path);
    } else if (*lhy_cmd) {
      const auto res = lhy_energy_per_particle(lhy_rho, lhy_a0);
      config["subcommand"] = "lhy";
      config["rho"] = lhy_rho;
      config["a0"] = lhy_a0;
      json j{{"energy_per_particle", res.value},
             {"dilute_warning", res.dilute_warning},
             {"coefficient", kLhyCoefficient},
             {"config", config}};
      emit(j, output_path);
    } else if (*coeffs_cmd) {
      const auto pot = load_potential(potential_path);
      std::vector<double> p_norms;
      const auto r3 = three_squares_table(coeffs_shells);
      for (std::int64_t s = 1; s <= coeffs_shells; ++s)
        if (r3[static_cast<std::size_t>(s)])
          p_norms.push_back(two_pi * std::sqrt(static_cast<double>(s)));
      const auto co = renormalized_coefficients(pot, coeffs_n, coeffs_mu, p_norms);
      std::ostringstream csv;
      csv << "p,gamma,sigma,F,G,tau,sqrtF2mG2,dispersion\n";
      for (const auto &row : co.rows)
        csv << row.p << "," << row.gamma << "," << row.sigma << "," << row.F << ","
            << row.G << "," << row.tau << "," << row.diag << ","
            << dispersion(co.a0, row.p) << "\n";
      emit_csv(csv.str(), output_path);
    } else if (*svi_cmd) {
      const auto res = sum_vs_integral_check(svi_a0, svi_r);
      config["subcommand"] = "sum-vs-integral";
      config["a0"] = svi_a0;
      config["R"] = svi_r;
      json j{{"sum", res.sum},
             {"integral", res.integral},
             {"ratio", res.ratio},
             {"config", config}};
      emit(j, output_path);
    } else if (*sim_cmd) {
      if (sim_opt.mu > 0.0 && sim_opt.nu > 0.0)
        require(sim_opt.mu > sim_opt.nu, "simulate: need mu > nu > 0");
      const auto pot = load_potential(potential_path);
      const auto rep = fock::run_simulation(pot, sim_opt);
      config["subcommand"] = "simulate";
      config["N"] = sim_opt.n_particles;
      config["pmax"] = sim_opt.p_max;
      config["beta"] = sim_opt.beta;
      config["kappa"] = sim_opt.kappa;
      config["eta_mu"] = sim_opt.mu;
      config["nu"] = sim_opt.nu;
      config["cascade"] = sim_opt.cascade;
      config["potential"] = potential_to_json(pot);
      json stages = json::array();
      for (const auto &st : rep.stages) {
        json s{{"stage", st.name}, {"vacuum_expectation", st.vacuum_expectation}};
        if (st.spectrum_drift)
          s["spectrum_drift"] = *st.spectrum_drift;
        stages.push_back(s);
      }
      json j{{"dimension", rep.dimension},
             {"dropped_terms", rep.dropped_terms},
             {"cubic_dropped_terms", rep.cubic_dropped_terms},
             {"a0", rep.a0},
             {"E_exact", rep.e_exact},
             {"lanczos_residual", rep.lanczos_residual},
             {"E_bogoliubov_prediction", rep.e_bogoliubov_prediction},
             {"vacuum_expectations", stages},
             {"overlap_bare", rep.overlap_bare},
             {"overlap_pair", rep.overlap_pair},
             {"overlap_dressed", rep.overlap_dressed},
             {"config", config}};
      emit(j, output_path);
    } else if (*check_cmd) {
      require(suite == "all", "check: only --suite all is defined");
      const auto results = selftest::run_all();
      bool all_ok = true;
      json lines = json::array();
      for (const auto &r : results) {
        std::fprintf(stderr, "[%s] %2d. %-34s (%7.2f s)  %s\n",
                     r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                     r.detail.c_str());
        lines.push_back(json{{"id", r.id},
                             {"name", r.name},
                             {"passed", r.passed},
                             {"seconds", r.seconds},
                             {"detail", r.detail}});
        all_ok = all_ok && r.passed;
      }
      config["subcommand"] = "check";
      config["suite"] = suite;
      json j{{"criteria", lines}, {"all_passed", all_ok}, {"config", config}};
      emit(j, output_path);
      return all_ok ? 0 : 1;
    }
  } catch (const precondition_error &e) {
    std::fprintf(stderr, "precondition violation: %s\n", e.what());
    return 2;
  } catch (const numerical_error &e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}

// Command-line front for the laboratory: run experiments from config files,
// inspect the traveling wave, fit the front position, evaluate the prefactor
// routes and the expansion formulas, and run the acceptance suite.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kpp/kpp.hpp"

namespace {

kpp::RunConfig load_run_config(const std::string& config_path,
                               const std::string& out_dir,
                               long long seed_override) {
  kpp::Config cfg = kpp::Config::parse_file(config_path);
  kpp::RunConfig rc = kpp::RunConfig::from_config(cfg);
  if (!out_dir.empty()) rc.out_dir = out_dir;
  if (seed_override >= 0) rc.seed = (std::uint64_t)seed_override;
  return rc;
}

void print_estimate(const kpp::PhiEstimate& e) {
  std::printf("c=%.6g  route=%-11s  value=%.10g  uncertainty=%.3g%s\n", e.c,
              kpp::route_name(e.route), e.value, e.uncertainty,
              e.flagged ? "  [flagged]" : "");
  if (!e.diagnostics.empty()) std::printf("    note: %s\n", e.diagnostics.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-KPP front laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = -1;
  int threads = 1;
  app.add_option("--config", config_path, "config file path");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed, "seed override for stochastic runs");
  app.add_option("--threads", threads, "worker count (reserved; runs are sequential)")
      ->check(CLI::PositiveNumber);

  auto* cmd_wave = app.add_subcommand("wave", "solve the critical wave profile");
  auto* cmd_evolve = app.add_subcommand("evolve", "run the PDE and persist series");
  auto* cmd_phi = app.add_subcommand("phi", "prefactor estimates, all routes");
  auto* cmd_mufit = app.add_subcommand("mu-fit", "fit the front-position expansion");
  auto* cmd_magic = app.add_subcommand("magic-check", "residuals of the exact relation");
  auto* cmd_expand = app.add_subcommand("expand", "evaluate the Phi(2+eps) expansion");
  auto* cmd_fk = app.add_subcommand("fk-mc", "Monte Carlo route only");
  auto* cmd_accept = app.add_subcommand("accept", "run acceptance criteria");

  double ex_alpha = 1.0, ex_beta = 0.0;
  std::vector<double> ex_eps = {0.4, 0.2, 0.1, 0.05};
  cmd_expand->add_option("--alpha", ex_alpha, "wave tail slope (shifted)");
  cmd_expand->add_option("--beta", ex_beta, "wave tail offset (shifted)");
  cmd_expand->add_option("--eps", ex_eps, "eps values");

  std::string group = "all";
  cmd_accept->add_option("--group", group,
                         "fast | lemma42 | linear | routes | front | all");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_wave->parsed()) {
      const kpp::Wave w = kpp::solve_wave(kpp::Nonlinearity::quadratic());
      std::printf("alpha_tilde=%.12g beta_tilde=%.12g\n", w.alpha_tilde,
                  w.beta_tilde);
      std::printf("tail_fit_rms=%.3g ode_residual=%.3g branch_mismatch=%.3g\n",
                  w.tail_fit_rms, kpp::max_ode_residual(w), w.branch_mismatch);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        kpp::CsvWriter tab(out_dir + "/wave.csv", 0, {"z", "omega", "domega"});
        for (std::size_t i = 0; i < w.omega.size(); i += 10)
          tab.row({w.z(i), w.omega[i], w.domega[i]});
        std::printf("wrote %s/wave.csv\n", out_dir.c_str());
      }
      return 0;
    }

    if (cmd_evolve->parsed() || cmd_phi->parsed() || cmd_fk->parsed()) {
      kpp::RunConfig rc = load_run_config(config_path, out_dir, seed);
      if (cmd_fk->parsed()) {
        if (rc.fk_paths <= 0)
          throw kpp::ConfigError("fk-mc: config must set fk.n_paths");
        rc.validate();
        kpp::FrontRun fr = kpp::evolve(rc.ic, rc.nl, rc.solver, rc.t_max,
                                       rc.observe);
        const kpp::FkArchive ar = kpp::build_fk_archive(fr);
        std::optional<kpp::Wave> wv;
        std::optional<kpp::ExpansionCoefficients> fit;
        if (!rc.nl.is_zero()) {
          wv.emplace(kpp::solve_wave(rc.nl));
          if (rc.t_max >= 20.0 * rc.fit_t_min)
            fit = kpp::fit_mu(fr.t, fr.mu, rc.fit_t_min);
        }
        for (const double c : rc.c_list) {
          kpp::FkParams fp;
          fp.n_paths = rc.fk_paths;
          fp.ds = rc.fk_ds;
          fp.seed = rc.seed;
          print_estimate(kpp::fk_phi(c, ar, rc.nl, rc.ic, fp,
                                     wv ? &*wv : nullptr,
                                     fit ? &*fit : nullptr));
        }
        return 0;
      }
      const kpp::Report rep = kpp::run(rc);
      std::printf("config_hash=%016llx wall=%.1fs\n",
                  (unsigned long long)rep.cfg_hash, rep.wall_seconds);
      for (const auto& t : rep.tables) std::printf("wrote %s\n", t.c_str());
      for (const auto& row : rep.rows)
        std::printf("%-40s %s  value=%.10g +- %.3g  %s\n", row.key.c_str(),
                    row.pass ? "ok  " : "FLAG", row.measured, row.tolerance,
                    row.detail.c_str());
      return 0;
    }

    if (cmd_mufit->parsed()) {
      kpp::RunConfig rc = load_run_config(config_path, out_dir, seed);
      rc.validate();
      kpp::FrontRun fr = kpp::evolve(rc.ic, rc.nl, rc.solver, rc.t_max,
                                     rc.observe);
      const auto ec = kpp::fit_mu(fr.t, fr.mu, rc.fit_t_min);
      std::printf("a=%.10g b=%.10g c=%.10g residual_rms=%.3g\n", ec.a, ec.b,
                  ec.c, ec.residual_rms);
      return 0;
    }

    if (cmd_magic->parsed()) {
      kpp::RunConfig rc = load_run_config(config_path, out_dir, seed);
      rc.validate();
      kpp::FrontRun fr = kpp::evolve(rc.ic, rc.nl, rc.solver, rc.t_max,
                                     rc.observe);
      std::optional<kpp::Wave> wv;
      std::optional<kpp::ExpansionCoefficients> fit;
      if (!rc.nl.is_zero()) {
        wv.emplace(kpp::solve_wave(rc.nl));
        fit = kpp::fit_mu(fr.t, fr.mu, rc.fit_t_min);
      }
      const auto rows = kpp::magic_check(rc, fr, wv ? &*wv : nullptr,
                                         fit ? &*fit : nullptr);
      std::filesystem::create_directories(rc.out_dir);
      kpp::CsvWriter tab(kpp::detail::table_path(rc, "magic"), rc.cfg_hash,
                         {"eps", "lhs", "rhs", "residual"});
      for (const auto& row : rows) {
        tab.row({row.eps, row.lhs, row.rhs, row.residual});
        std::printf("eps=%+.4f lhs=%.10g rhs=%.10g residual=%+.3e\n", row.eps,
                    row.lhs, row.rhs, row.residual);
      }
      return 0;
    }

    if (cmd_expand->parsed()) {
      for (const double e : ex_eps)
        std::printf("eps=%.4f main=%.10g no_logs=%.10g\n", e,
                    kpp::main_expansion(e, ex_alpha, ex_beta, true),
                    kpp::main_expansion(e, ex_alpha, ex_beta, false));
      return 0;
    }

    if (cmd_accept->parsed()) {
      const auto results = kpp::acceptance::run_group(group);
      if (results.empty()) {
        std::fprintf(stderr, "unknown group: %s\n", group.c_str());
        return 2;
      }
      return kpp::acceptance::print_and_score(results);
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}

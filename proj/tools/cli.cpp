#include "cli.hpp"

#include "nlvar/dynamics.hpp"
#include "nlvar/errors.hpp"
#include "nlvar/gjrt.hpp"
#include "nlvar/io.hpp"
#include "nlvar/jsr.hpp"
#include "nlvar/longrun.hpp"
#include "nlvar/membership.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <functional>
#include <optional>
#include <ostream>

namespace nlvar::cli {

namespace {

struct Context {
  std::ostream& out;
  std::string command_line;
  bool reproducible = false;

  std::optional<std::string> comment() const {
    if (reproducible) return std::nullopt;
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return "nlvar " NLVAR_VERSION " | " + command_line + " | " + stamp;
  }

  void write(const std::string& path, const io::CsvTable& t) const { io::write_csv_file(path, t.header, t.rows, comment()); }
};

MembershipReport member_report(const ModelSpec& model, double rho_bar, int depth) {
  MembershipReport rep = check_membership(model, rho_bar, depth);
  require_member(rep);
  return rep;
}

std::vector<Vec> table_rows(const io::CsvTable& t, Eigen::Index width, const std::string& what) {
  if (t.rows.rows() > 0 && t.rows.cols() != width) {
    throw InputError(what + " must have " + std::to_string(width) + " columns");
  }
  std::vector<Vec> out;
  for (Eigen::Index i = 0; i < t.rows.rows(); ++i) out.push_back(t.rows.row(i).transpose());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlinear cointegrated VAR toolkit", "nlvar"};
  app.require_subcommand(1, 1);
  Context ctx{out, "nlvar"};
  for (const std::string& a : args) ctx.command_line += " " + a;
  app.add_flag("--reproducible", ctx.reproducible, "Omit the commented header line from output files");

  std::function<int()> action;
  std::string model_path, out_path;
  double rho_bar = 1.0;
  int depth = 12;

  auto add_model = [&](CLI::App* sub) { sub->add_option("--model", model_path, "Model JSON file")->required(); };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", out_path, "Output CSV file")->required(); };
  auto add_jsr = [&](CLI::App* sub) {
    sub->add_option("--rho-bar", rho_bar, "Contraction bound in (0, 1]");
    sub->add_option("--depth", depth, "Maximum product length for the JSR search");
  };

  auto* check = app.add_subcommand("check", "Decide class membership and print the report as JSON");
  add_model(check);
  add_jsr(check);
  check->callback([&] {
    action = [&] {
      const ModelSpec model = io::load_model(model_path);
      const MembershipReport rep = check_membership(model, rho_bar, depth);
      out << io::to_json(rep).dump(2) << '\n';
      return rep.member() ? 0 : 1;
    };
  });

  std::string init_path, shocks_path, gaussian_path;
  int T = 0;
  std::uint64_t seed = 0;
  auto* sim = app.add_subcommand("simulate", "Simulate a path");
  add_model(sim);
  sim->add_option("--init", init_path, "Initial window CSV: k rows, z_0 first")->required();
  auto* shocks_opt = sim->add_option("--shocks", shocks_path, "Shock CSV, one row per period");
  auto* gauss_opt = sim->add_option("--gaussian", gaussian_path, "Covariance JSON for Gaussian shocks");
  sim->add_option("--T", T, "Number of periods for Gaussian shocks");
  sim->add_option("--seed", seed, "Seed for Gaussian shocks");
  shocks_opt->excludes(gauss_opt);
  add_out(sim);
  sim->callback([&] {
    action = [&] {
      const ModelSpec model = io::load_model(model_path);
      const io::CsvTable init = io::read_csv(init_path);
      if (init.rows.rows() != model.k() || init.rows.cols() != model.p()) {
        throw InputError(init_path + ": initial window must be k x p");
      }
      ShockPlan plan;
      if (!shocks_path.empty()) {
        plan = GivenShocks{io::read_csv(shocks_path).rows};
      } else if (!gaussian_path.empty()) {
        if (T < 1) throw InputError("--T must be >= 1 with --gaussian");
        const io::json j = io::read_json_file(gaussian_path);
        const Mat sigma = j.is_object() ? io::matrix_from_json(j.at("sigma"), "/sigma") : io::matrix_from_json(j, "");
        plan = GaussianShocks{sigma, seed, T};
      } else {
        throw InputError("simulate needs --shocks or --gaussian");
      }
      const PathResult path = simulate(model, init.rows, plan);
      ctx.write(out_path, io::path_table(path));
      return 0;
    };
  });

  std::string path_path;
  auto* dec = app.add_subcommand("decompose", "Granger-Johansen decomposition of a simulated path");
  add_model(dec);
  add_jsr(dec);
  dec->add_option("--path", path_path, "Path CSV from simulate")->required();
  add_out(dec);
  dec->callback([&] {
    action = [&] {
      const ModelSpec model = io::load_model(model_path);
      const MembershipReport rep = member_report(model, rho_bar, depth);
      const PathResult path = io::path_from_table(io::read_csv(path_path), model.p(), model.k());
      const GjrtDecomposition d = decompose(model, rep, path);
      ctx.write(out_path, io::decomposition_table(d, rep));
      out << io::json{{"periods", path.T()},
                      {"max_residual", d.residual.size() ? d.residual.maxCoeff() : 0.0},
                      {"max_relative_residual", d.max_relative_residual(path)}}
                 .dump(2)
          << '\n';
      return 0;
    };
  });

  std::string grid_path;
  auto* attr = app.add_subcommand("attractor", "Points of the attractor for a grid of common-trend values");
  add_model(attr);
  add_jsr(attr);
  attr->add_option("--grid", grid_path, "Grid CSV, one q-vector per row")->required();
  add_out(attr);
  attr->callback([&] {
    action = [&] {
      const ModelSpec model = io::load_model(model_path);
      const MembershipReport rep = member_report(model, rho_bar, depth);
      const AttractorSample s = attractor_points(model, rep, table_rows(io::read_csv(grid_path), rep.q, grid_path));
      io::CsvTable t;
      t.header = io::numbered("w", rep.q);
      for (const auto& h : io::numbered("z", model.p())) t.header.push_back(h);
      t.rows = Mat(static_cast<Eigen::Index>(s.points.size()), rep.q + model.p());
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        t.rows.row(i) << s.grid[i].transpose(), s.points[i].transpose();
      }
      ctx.write(out_path, t);
      return 0;
    };
  });

  std::string at_path;
  auto* mult = app.add_subcommand("multipliers", "Long-run multiplier matrices at attractor points");
  add_model(mult);
  add_jsr(mult);
  mult->add_option("--at", at_path, "CSV of attractor points, one per row")->required();
  add_out(mult);
  mult->callback([&] {
    action = [&] {
      const ModelSpec model = io::load_model(model_path);
      const MembershipReport rep = member_report(model, rho_bar, depth);
      const int p = model.p();
      const std::vector<Vec> points = table_rows(io::read_csv(at_path), p, at_path);
      io::CsvTable t;
      t.header = {"point", "row"};
      for (const auto& h : io::numbered("theta", p)) t.header.push_back(h);
      t.header.push_back("rank");
      t.header.push_back("differentiable");
      t.rows = Mat(static_cast<Eigen::Index>(points.size()) * p, p + 4);
      for (std::size_t i = 0; i < points.size(); ++i) {
        const MultiplierResult m = longrun_multipliers(model, rep, points[i]);
        for (int row = 0; row < p; ++row) {
          const Eigen::Index at = static_cast<Eigen::Index>(i) * p + row;
          t.rows(at, 0) = static_cast<double>(i);
          t.rows(at, 1) = row;
          t.rows.block(at, 2, 1, p) = m.theta_inf.row(row);
          t.rows(at, 2 + p) = m.rank;
          t.rows(at, 3 + p) = m.differentiable ? 1.0 : 0.0;
        }
      }
      ctx.write(out_path, t);
      return 0;
    };
  });

  int m = 1;
  auto* ident = app.add_subcommand("identify", "Structural rotation satisfying long-run restrictions");
  add_model(ident);
  add_jsr(ident);
  ident->add_option("--m", m, "Number of shocks with transitory effects")->required();
  add_out(ident);
  ident->callback([&] {
    action = [&] {
      const ModelSpec model = io::load_model(model_path);
      const MembershipReport rep = member_report(model, rho_bar, depth);
      const Mat upsilon = lr_identify_construct(rep, m);
      const IdentificationCheck c = lr_identify_check(rep, upsilon, m, 1e-12);
      ctx.write(out_path, {io::numbered("col", model.p()), upsilon});
      out << io::json{{"m", m}, {"residual", c.residual}, {"ok", c.ok}}.dump(2) << '\n';
      return c.ok ? 0 : 1;
    };
  });

  std::string config_path;
  auto* trans = app.add_subcommand("transitory", "Directions of shocks with only transitory effects");
  trans->add_option("--config", config_path, "Experiment JSON")->required();
  add_out(trans);
  trans->callback([&] {
    action = [&] {
      const TransitoryConfig cfg = io::transitory_from_json(io::read_json_file(config_path));
      const TransitoryCurve curve = transitory_direction_curve(cfg);
      io::CsvTable t;
      t.header = {"magnitude", "ratio", "iterations", "converged"};
      t.rows = Mat(static_cast<Eigen::Index>(curve.magnitudes.size()), 4);
      io::json extra = io::json::array();
      for (std::size_t i = 0; i < curve.magnitudes.size(); ++i) {
        t.rows.row(i) << curve.magnitudes[i], curve.ratios[i], curve.iterations[i], curve.converged[i] ? 1.0 : 0.0;
        if (curve.roots[i].size() > 1) {
          io::json ratios = io::json::array();
          for (const TransitoryRoot& r : curve.roots[i]) ratios.push_back(r.ratio);
          extra.push_back({{"magnitude", curve.magnitudes[i]}, {"ratios", ratios}});
        }
      }
      ctx.write(out_path, t);
      out << io::json{{"points", curve.magnitudes.size()}, {"multiple_roots", extra}}.dump(2) << '\n';
      return std::all_of(curve.converged.begin(), curve.converged.end(), [](bool b) { return b; }) ? 0 : 1;
    };
  });

  std::string matrices_path;
  std::optional<double> jsr_target;
  auto* jsr = app.add_subcommand("jsr", "Bracket the joint spectral radius of a matrix set");
  jsr->add_option("--matrices", matrices_path, "JSON list of matrices")->required();
  jsr->add_option("--depth", depth, "Maximum product length");
  jsr->add_option("--rho-bar", jsr_target, "Also decide whether the JSR is below this bound");
  jsr->callback([&] {
    action = [&] {
      const std::vector<Mat> mats = io::matrices_from_json(io::read_json_file(matrices_path));
      io::json j;
      if (jsr_target) {
        const JsrDecision d = jsr_decision(mats, *jsr_target, depth);
        j = io::to_json(d.bracket);
        j["verdict"] = to_string(d.verdict);
      } else {
        JsrOptions opts;
        opts.depth = depth;
        j = io::to_json(jsr_bounds(mats, opts));
      }
      out << j.dump(2) << '\n';
      return 0;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace nlvar::cli

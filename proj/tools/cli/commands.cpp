#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "manifest.hpp"
#include "version.hpp"
#include "vcg/csv.hpp"
#include "vcg/curves.hpp"
#include "vcg/design.hpp"
#include "vcg/distribution.hpp"
#include "vcg/error.hpp"
#include "vcg/panel_store.hpp"
#include "vcg/preprocess.hpp"
#include "vcg/sim_spec_io.hpp"
#include "vcg/simulate.hpp"

namespace vcg::cli {
namespace {

namespace fs = std::filesystem;

// Writes one output file and registers it with the manifest.
class OutputDir {
 public:
  OutputDir(fs::path dir, RunManifest& manifest) : dir_(std::move(dir)), manifest_(manifest) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path p = dir_ / name;
    {
      std::ofstream out(p, std::ios::binary);
      if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
      body(out);
      if (!out) throw Error(ErrorCode::IoError, "write failed for " + p.string());
    }
    std::lock_guard lock(mu_);
    written_.push_back(p);
  }

  void write_json(const std::string& name, const nlohmann::json& doc) {
    write(name, [&](std::ostream& o) { o << doc.dump(2) << "\n"; });
  }

  // Registers outputs in name order so the manifest does not depend on thread timing.
  void finish() {
    std::sort(written_.begin(), written_.end());
    for (const auto& p : written_) manifest_.add_output(p);
    manifest_.write(dir_);
  }

  [[nodiscard]] const fs::path& path() const noexcept { return dir_; }

 private:
  fs::path dir_;
  RunManifest& manifest_;
  std::mutex mu_;
  std::vector<fs::path> written_;
};

nlohmann::json fit_config_json(const FitConfig& c) {
  return {{"convergence_threshold", c.convergence_threshold},
          {"max_iterations", c.max_iterations},
          {"weight_floor", c.weight_floor},
          {"covariance", c.covariance == CovarianceKind::sandwich ? "sandwich" : "naive"},
          {"stars", {c.stars.one, c.stars.two, c.stars.three}}};
}

std::map<std::string, std::string> read_groups(const fs::path& path) {
  const auto table = csv::Table::read(path);
  const auto c_country = table.require("country");
  const auto c_group = table.require("group");
  std::map<std::string, std::string> out;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (!out.emplace(table.cell(r, c_country), table.cell(r, c_group)).second) {
      throw Error(ErrorCode::DuplicateRow, path.string() + " line " + std::to_string(table.line_of(r)) +
                                               ": country '" + table.cell(r, c_country) + "' listed twice");
    }
  }
  return out;
}

std::string year_list(const std::vector<int>& years) {
  std::string s;
  for (std::size_t i = 0; i < years.size() && i < 10; ++i) s += (i ? " " : "") + std::to_string(years[i]);
  if (years.size() > 10) s += " ...";
  return s;
}

int report_error(const std::exception& e, RunManifest* manifest, OutputDir* dir, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (manifest && dir) {
    const auto* ve = dynamic_cast<const Error*>(&e);
    manifest->set_status(ve ? std::string(to_string(ve->code())) : "error");
    try {
      dir->finish();
    } catch (const std::exception& inner) {
      err << "error: could not write manifest: " << inner.what() << "\n";
    }
  }
  return 1;
}

}  // namespace

void print_version(std::ostream& out) { out << "vcgrowth " << kVersion << "\n"; }

int run_prepare(const CommonOptions& common, const PrepareOptions& opts, std::ostream& log, std::ostream& err) {
  RunManifest manifest("prepare", common.argv);
  std::unique_ptr<OutputDir> dir;
  try {
    if (opts.first_year > opts.last_year) throw Error(ErrorCode::InvalidArgument, "first year after last year");
    if (!(opts.poverty_line > 0.0) || !(opts.poverty_cpi > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "poverty line and its price level must be positive");
    }
    manifest.set_config({{"first_year", opts.first_year},
                         {"last_year", opts.last_year},
                         {"hp_lambda", opts.hp_lambda},
                         {"depreciation", opts.depreciation},
                         {"poverty_line", opts.poverty_line},
                         {"poverty_cpi", opts.poverty_cpi},
                         {"output", opts.output_name}});
    for (const auto& p : {opts.raw, opts.grids, opts.cpi, opts.groups}) manifest.add_input(p);

    const auto raw = read_raw_series(opts.raw);
    const auto cpi = read_cpi(opts.cpi);
    const auto groups = read_groups(opts.groups);
    std::map<std::string, std::map<int, IncomeGrid>> grids;
    for (auto g : read_grids(opts.grids)) {
      const GridCheck check = normalize_grid(g);
      if (check.resorted) {
        log << "warning: grid " << g.country << " " << g.year << " re-sorted (largest drop "
            << csv::format_double(check.max_disorder) << ")\n";
      }
      const std::string c = g.country;
      const int y = g.year;
      if (!grids[c].emplace(y, std::move(g)).second) {
        throw Error(ErrorCode::DuplicateRow, "grid for " + c + " " + std::to_string(y) + " appears twice");
      }
    }

    std::set<std::string> countries;
    for (const auto& s : raw) countries.insert(s.country);
    for (const auto& [c, _] : grids) countries.insert(c);

    PreprocessConfig pcfg;
    pcfg.hp.lambda = opts.hp_lambda;
    pcfg.depreciation = opts.depreciation;

    std::vector<PanelObservation> obs;
    std::map<std::string, std::string> kept_groups;
    std::vector<std::pair<std::string, std::string>> dropped;
    const int first = opts.first_year, last = opts.last_year;

    for (const auto& c : countries) {
      std::vector<int> missing;
      const auto git = grids.find(c);
      for (int y = first; y <= last; ++y) {
        if (git == grids.end() || !git->second.count(y)) missing.push_back(y);
      }
      if (!missing.empty()) {
        dropped.emplace_back(c, "missing income grid for " + year_list(missing));
        continue;
      }
      for (int y = first; y <= last; ++y) {
        if (!cpi.count({c, y})) {
          throw Error(ErrorCode::MissingSeries, "no CPI entry for " + c + " " + std::to_string(y));
        }
      }

      std::vector<RawSeries> mine;
      for (const auto& s : raw) {
        if (s.country == c) mine.push_back(s);
      }
      CountryVariables vars;
      try {
        for (auto& s : mine) {
          if (s.variable != raw_vars::attainment) continue;
          const auto dense = spline_impute(s, first, last);
          s.values.clear();
          for (int y = first; y <= last; ++y) s.values[y] = dense[static_cast<std::size_t>(y - first)];
        }
        vars = build_variables(c, mine, cpi, first, last, pcfg);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::MissingSeries && e.code() != ErrorCode::TooFewKnots) throw;
        dropped.emplace_back(c, e.what());
        continue;
      }
      const auto grp = groups.find(c);
      if (grp == groups.end()) throw Error(ErrorCode::UnmappedCountry, "no group for country " + c);

      std::vector<double> poor, rich;
      for (int y = first; y <= last; ++y) {
        const IncomeGrid& g = git->second.at(y);
        const double price = cpi.at({c, y});
        poor.push_back(quintile_log_mean(g, Quintile::bottom, price));
        rich.push_back(quintile_log_mean(g, Quintile::top, price));
      }
      const auto poor_trend = hp_trend(poor, pcfg.hp);
      const auto rich_trend = hp_trend(rich, pcfg.hp);

      for (int y = first; y <= last; ++y) {
        const auto t = static_cast<std::size_t>(y - first);
        const IncomeGrid& g = git->second.at(y);
        PanelObservation o;
        o.country = c;
        o.year = y;
        o.y = vars.y[t];
        o.lnn = vars.lnn[t];
        o.lnsk = vars.lnsk[t];
        o.lnattain = vars.lnattain[t];
        // Incomes are rebased by the CPI, so the line is compared in the same prices.
        o.pov = poverty_headcount(g, opts.poverty_line, opts.poverty_cpi / cpi.at({c, y}));
        o.gini = gini(g);
        o.middleclass = middle_class_share(g);
        o.y_poor = poor_trend[t];
        o.y_rich = rich_trend[t];
        obs.push_back(std::move(o));
      }
      kept_groups[c] = grp->second;
    }
    if (obs.empty()) throw Error(ErrorCode::InvalidArgument, "no country has complete data");

    const Panel panel = Panel::from_observations(std::move(obs), std::move(kept_groups));
    dir = std::make_unique<OutputDir>(common.out, manifest);
    dir->write(opts.output_name, [&](std::ostream& o) { write_panel(o, panel); });
    dir->write("dropped.csv", [&](std::ostream& o) {
      csv::write_row(o, {"country", "reason"});
      for (const auto& [c, why] : dropped) csv::write_row(o, {c, why});
    });
    dir->finish();

    log << "prepared " << panel.n() << " countries x " << panel.T() << " years -> "
        << (common.out / opts.output_name).string() << "\n";
    for (const auto& [c, why] : dropped) log << "dropped " << c << ": " << why << "\n";
    return 0;
  } catch (const std::exception& e) {
    return report_error(e, &manifest, dir.get(), err);
  }
}

int run_fit(const CommonOptions& common, const FitOptions& opts, std::ostream& log, std::ostream& err) {
  RunManifest manifest("fit", common.argv);
  std::unique_ptr<OutputDir> dir;
  try {
    opts.fit.validate();
    BasisSpec basis;
    basis.degree = opts.degree;
    basis.drivers = opts.drivers;
    basis.validate();
    std::vector<DependentVariable> deps;
    for (const auto& d : opts.deps) deps.push_back(parse_dependent(d));
    CurveConfig ccfg;
    ccfg.points = opts.points;
    ccfg.level = opts.level;
    ccfg.allow_nonconverged = opts.allow_nonconverged;

    manifest.set_config({{"deps", opts.deps},
                         {"lag", opts.lag},
                         {"fit", fit_config_json(opts.fit)},
                         {"allow_nonconverged", opts.allow_nonconverged},
                         {"fixed_effects", opts.fixed_effects},
                         {"basis", {{"drivers", basis.drivers}, {"degree", basis.degree}}},
                         {"curves", {{"points", opts.points}, {"level", opts.level}}}});
    manifest.add_input(opts.panel);
    const Panel panel = ingest_panel(opts.panel);
    dir = std::make_unique<OutputDir>(common.out, manifest);

    // Each dependent variable is an independent pipeline.
    std::vector<std::string> errors(deps.size());
    std::vector<std::string> logs(deps.size());
    std::vector<std::string> error_codes(deps.size());
    auto one = [&](std::size_t j) {
      const DependentVariable dep = deps[j];
      const std::string tag(to_string(dep));
      try {
        const AlignedPanel aligned = lag_align(panel, dep, opts.lag);
        const StackedDesign d = build_stacked(aligned, basis, opts.fixed_effects);
        const IdentificationReport id = check_identification(d);
        dir->write_json("identification_" + tag + ".json",
                        {{"rows", id.rows},
                         {"columns", id.columns},
                         {"rank", id.rank},
                         {"deficiency", id.deficiency},
                         {"largest_singular_value", id.largest_singular_value},
                         {"smallest_singular_value", id.smallest_singular_value},
                         {"tolerance", id.tolerance},
                         {"status", id.pass ? "PASS" : "FAIL"}});
        if (!id.pass) {
          throw Error(ErrorCode::IdentificationFailed, tag + ": design has rank " + std::to_string(id.rank) + " of " +
                                                           std::to_string(id.columns) + " columns");
        }
        const FitResult fit = fit_iterated(d, opts.fit);
        dir->write_json("fit_" + tag + ".json", fit_to_json(fit, d));
        if (!fit.converged && !opts.allow_nonconverged) {
          throw Error(ErrorCode::NotConverged, tag + ": stopped after " + std::to_string(fit.iterations) +
                                                   " iterations (" + fit.stop_reason + ")");
        }
        std::vector<CoefficientCurve> curves;
        for (std::size_t k = 0; k < d.K; ++k) {
          for (const auto& drv : basis.drivers) {
            curves.push_back(eval_curve(fit, d, k, drv, aligned, ccfg));
            const auto& cv = curves.back();
            dir->write("curve_" + tag + "_" + cv.regressor + "_" + drv + ".csv",
                       [&](std::ostream& o) { write_curve_csv(o, cv); });
          }
        }
        const auto stats = group_boxstats(observation_betas(fit, d, aligned), panel.group_of());
        dir->write("boxstats_" + tag + ".csv", [&](std::ostream& o) { write_boxstats_csv(o, stats); });
        dir->write_json("curves_" + tag + ".json", curves_summary(curves, stats));
        logs[j] = tag + ": rho = " + format_estimate(fit.rho, fit.inference_available ? fit.stars[0] : 0) + ", " +
                  std::to_string(fit.iterations) + " iterations, " + fit.stop_reason;
      } catch (const Error& e) {
        errors[j] = e.what();
        error_codes[j] = std::string(to_string(e.code()));
      }
    };
    if (common.threads > 1 && deps.size() > 1) {
      std::vector<std::thread> pool;
      for (std::size_t j = 0; j < deps.size(); ++j) pool.emplace_back(one, j);
      for (auto& t : pool) t.join();
    } else {
      for (std::size_t j = 0; j < deps.size(); ++j) one(j);
    }

    int rc = 0;
    for (std::size_t j = 0; j < deps.size(); ++j) {
      if (!logs[j].empty()) log << logs[j] << "\n";
      if (!errors[j].empty()) {
        err << "error: " << errors[j] << "\n";
        if (rc == 0) manifest.set_status(error_codes[j]);
        rc = 1;
      }
    }
    dir->finish();
    return rc;
  } catch (const std::exception& e) {
    return report_error(e, &manifest, dir.get(), err);
  }
}

int run_simulate(const CommonOptions& common, const SimulateOptions& opts, std::ostream& log, std::ostream& err) {
  RunManifest manifest("simulate", common.argv);
  std::unique_ptr<OutputDir> dir;
  try {
    opts.fit.validate();
    SimFile file;
    if (opts.spec) {
      manifest.add_input(*opts.spec);
      file = load_sim_file(*opts.spec);
    }
    SimSpec& spec = file.spec;
    if (common.seed) spec.seed = *common.seed;
    spec.validate();

    auto study_value = [&](const std::string& key) -> std::optional<std::string> {
      auto it = file.study.find(key);
      if (it == file.study.end()) return std::nullopt;
      return it->second;
    };
    for (const auto& [k, _] : file.study) {
      if (k != "replications" && k != "rho_grid" && k != "estimator") {
        throw Error(ErrorCode::InvalidSpec, "study." + k + ": unknown key");
      }
    }

    const std::size_t default_reps = opts.study == "variance" ? 1000 : 200;
    std::size_t reps = default_reps;
    if (opts.replications) {
      reps = *opts.replications;
    } else if (auto v = study_value("replications")) {
      const auto parsed = csv::parse_double(*v);
      if (!parsed || *parsed < 1 || *parsed != static_cast<double>(static_cast<std::size_t>(*parsed))) {
        throw Error(ErrorCode::InvalidSpec, "study.replications: '" + *v + "' is not a positive integer");
      }
      reps = static_cast<std::size_t>(*parsed);
    }
    std::vector<double> grid{0.91, 0.93, 0.95, 0.97};
    if (opts.rho_grid) {
      grid = *opts.rho_grid;
    } else if (auto v = study_value("rho_grid")) {
      grid.clear();
      std::string cur;
      for (char ch : *v + ",") {
        if (ch == ',') {
          if (!cur.empty()) {
            auto d = csv::parse_double(cur);
            if (!d) throw Error(ErrorCode::InvalidSpec, "study.rho_grid: '" + cur + "' is not a number");
            grid.push_back(*d);
          }
          cur.clear();
        } else if (ch != ' ') {
          cur += ch;
        }
      }
    }
    std::string estimator = opts.estimator.value_or(study_value("estimator").value_or("ols"));
    if (estimator != "ols" && estimator != "iterated") {
      throw Error(ErrorCode::InvalidArgument, "estimator must be ols or iterated, got '" + estimator + "'");
    }
    if (opts.study != "recovery" && opts.study != "variance" && opts.study != "nickell") {
      throw Error(ErrorCode::InvalidArgument, "study must be recovery, variance or nickell, got '" + opts.study + "'");
    }

    nlohmann::json cfg{{"study", opts.study},
                       {"replications", reps},
                       {"spec", sim_spec_to_json(spec)},
                       {"fit", fit_config_json(opts.fit)},
                       {"fixed_effects", opts.fixed_effects}};
    if (opts.study == "nickell") {
      cfg["rho_grid"] = grid;
      cfg["estimator"] = estimator;
    }
    // Thread count never changes results, so it stays out of the hashed config.
    manifest.set_config(cfg);

    dir = std::make_unique<OutputDir>(common.out, manifest);
    dir->write("spec.ini", [&](std::ostream& o) { write_sim_spec(o, spec); });

    StudyOptions so;
    so.fit = opts.fit;
    so.fixed_effects = opts.fixed_effects;
    so.threads = common.threads;

    if (opts.study == "recovery") {
      const SimResult res = recovery_study(spec, reps, so);
      dir->write("replications.csv", [&](std::ostream& o) { write_replications_csv(o, res); });
      dir->write_json("recovery_summary.json", recovery_summary(res));
      log << "recovery: " << reps << " replications, " << res.failures << " failed, " << res.nonconverged
          << " not converged; rho bias " << csv::format_double(res.summary[0].bias) << " (MC s.e. "
          << csv::format_double(res.summary[0].mc_se) << ")\n";
    } else if (opts.study == "variance") {
      const VarianceReport rep = variance_structure_check(spec, reps, common.threads);
      dir->write("variance_cells.csv", [&](std::ostream& o) { write_variance_csv(o, rep); });
      dir->write_json("variance_summary.json", variance_summary(rep));
      log << "variance: " << rep.cells.size() << " cells, " << csv::format_double(rep.cell_pass_fraction)
          << " within 3 s.e.; off-diagonal " << csv::format_double(rep.pair_pass_fraction) << "\n";
    } else {
      NickellOptions no;
      no.study = so;
      no.estimator = estimator == "ols" ? NickellEstimator::ols : NickellEstimator::iterated;
      const auto rows = nickell_bias_study(grid, spec, reps, no);
      dir->write("nickell.csv", [&](std::ostream& o) { write_nickell_csv(o, rows); });
      dir->write_json("nickell_summary.json", nickell_summary(rows, no));
      for (const auto& r : rows) {
        log << "nickell: rho " << csv::format_double(r.rho) << " bias " << csv::format_double(r.rho_bias)
            << " (MC s.e. " << csv::format_double(r.rho_mc_se) << ") " << (r.pass ? "PASS" : "FLAG") << "\n";
      }
    }
    dir->finish();
    return 0;
  } catch (const std::exception& e) {
    return report_error(e, &manifest, dir.get(), err);
  }
}

}  // namespace vcg::cli

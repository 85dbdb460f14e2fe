#include "pals/cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include "pals/cli/pipeline.hpp"
#include "pals/cli/run_config.hpp"
#include "pals/core/errors.hpp"
#include "pals/core/parallel.hpp"
#include "pals/io/formats.hpp"
#include "pals/io/gradcheck.hpp"
#include "pals/io/metrics.hpp"
#include "pals/io/phantom.hpp"

namespace pals::cli {

namespace fs = std::filesystem;

SimModality sim_modality_from_name(const std::string& s);

namespace {

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void apply_log_level() {
  const char* env = std::getenv("PALS_LOG");
  if (!env || !*env) {
    spdlog::set_level(spdlog::level::warn);
    return;
  }
  const auto level = spdlog::level::from_str(env);
  // from_str maps unknown names to off; accept that rather than failing the run.
  spdlog::set_level(level);
}

// Flags shared by every subcommand that reads a run config.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir = ".";
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "run config JSON");
  sub->add_option("--seed", f.seed, "random seed (overrides config)");
  sub->add_option("--threads", f.threads, "worker cap, 0 = all cores");
  sub->add_option("--out-dir", f.out_dir, "output directory");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (f.seed) {
    c.seed = *f.seed;
    c.noise.seed = *f.seed;
  }
  if (f.threads) c.threads = *f.threads;
  c.validate();
  set_thread_count(c.threads);
  return c;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void log_config(const fs::path& dir, const RunConfig& c) { atomic_write(dir / "config_used.json", run_config_to_json(c)); }

// ---- phantom ----

struct PhantomFlags {
  CommonFlags common;
  std::string name;
  std::optional<int> dims;
  std::string output = "phantom";
  std::string dtype = "u8";
};

int cmd_phantom(const PhantomFlags& f, std::ostream& out) {
  RunConfig c = resolve(f.common);
  if (!f.name.empty()) c.phantom = f.name;
  GridConfig g = c.grid_hi;
  if (f.dims) g.dims = {*f.dims, *f.dims, *f.dims};
  if (f.dtype != "u8" && f.dtype != "f32") throw ConfigError("--dtype must be u8 or f32");
  const GridSpec grid = g.spec();
  const Phantom phantom = Phantom::named(c.phantom, grid);
  const ScalarField field = voxelize(phantom, grid);
  const fs::path dir = prepare_out_dir(f.common.out_dir);
  write_voxel_grid(dir / f.output, field, f.dtype == "u8" ? VoxelDtype::u8 : VoxelDtype::f32);
  log_config(dir, c);
  out << "wrote " << (dir / f.output).string() << ".json (" << field.sum() << " voxels inside)\n";
  return kExitOk;
}

// ---- simulate ----

struct SimulateFlags {
  CommonFlags common;
  std::string modality;
  std::string phantom;
  std::optional<int> n_experiments;
};

std::string acquisitions_json(const std::vector<AcquisitionParams>& truth,
                              const std::vector<AcquisitionParams>& recorded) {
  ExtendedParameters t(ParameterVector(BasisKind::spherical));
  t.acq = truth;
  ExtendedParameters r(ParameterVector(BasisKind::spherical));
  r.acq = recorded;
  std::ostringstream os;
  os << "{\n\"truth\": " << params_to_json(t) << ",\n\"recorded\": " << params_to_json(r) << "}\n";
  return os.str();
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
  RunConfig c = resolve(f.common);
  if (!f.modality.empty()) c.simulation.modality = sim_modality_from_name(f.modality);
  if (!f.phantom.empty()) c.phantom = f.phantom;
  if (f.n_experiments) c.simulation.n_experiments = *f.n_experiments;
  c.validate();
  const GridSpec hi = c.grid_hi.spec();
  const GridSpec lo = c.grid.spec();
  const Phantom phantom = Phantom::named(c.phantom, hi);
  const SimulationResult sim = simulate(phantom, hi, lo, c.simulation, c.noise);

  const fs::path dir = prepare_out_dir(f.common.out_dir);
  std::string written;
  switch (c.simulation.modality) {
    case SimModality::dip:
      write_dip_csv(dir / "dips.csv", sim.dips);
      written = "dips.csv";
      break;
    case SimModality::silhouette:
      write_silhouettes(dir / "silhouettes.json", sim.silhouettes, lo.dims()[0], lo.dims()[1]);
      written = "silhouettes.json";
      break;
    case SimModality::point_cloud:
      for (std::size_t i = 0; i < sim.clouds.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "cloud_%03zu.txt", i);
        write_point_cloud(dir / name, sim.clouds[i], sim.recorded[i]);
      }
      written = std::to_string(sim.clouds.size()) + " point cloud file(s)";
      break;
  }
  atomic_write(dir / "acquisition.json", acquisitions_json(sim.truth, sim.recorded));
  write_voxel_grid(dir / "truth", voxelize(phantom, lo), VoxelDtype::u8);
  log_config(dir, c);
  out << "wrote " << written << ", acquisition.json and truth.json to " << dir.string() << "\n";
  return kExitOk;
}

// ---- reconstruct ----

struct ReconstructFlags {
  CommonFlags common;
  std::string dip;
  std::string sfs;
  std::vector<std::string> pc;
  std::optional<std::string> gamma;
  bool calibrate = false;
  std::optional<int> outer_iters;
  std::string truth;
};

int cmd_reconstruct(const ReconstructFlags& f, std::ostream& out) {
  RunConfig c = resolve(f.common);
  if (!f.dip.empty()) c.inputs.dip = f.dip;
  if (!f.sfs.empty()) c.inputs.sfs = f.sfs;
  if (!f.pc.empty()) c.inputs.pc = f.pc;
  if (f.calibrate) c.estimate_calibration = true;
  if (f.outer_iters) c.schedule.outer_iters = *f.outer_iters;
  if (f.gamma) {
    if (*f.gamma == "auto") {
      c.gamma = GammaMode::automatic();
    } else {
      try {
        c.gamma = GammaMode::fixed(std::stod(*f.gamma));
      } catch (const std::exception&) {
        throw ConfigError("--gamma must be \"auto\" or a number");
      }
    }
  }
  c.validate();
  if (!c.inputs.dip && !c.inputs.sfs && c.inputs.pc.empty()) {
    throw ConfigError("reconstruct needs at least one input (--dip, --sfs or --pc)");
  }

  const FieldOptions fo = c.field_options();
  const ReconstructionResult res = run_reconstruction(c, load_experiments(c), [](const TraceRecord& r) {
    spdlog::info("outer {} step {}: misfit {:.6e} reg {:.3e} n_rbf {}", r.outer, r.iter, r.misfit, r.reg, r.n_rbf);
  });

  std::optional<Metrics> metrics;
  if (!f.truth.empty()) metrics = compare(res.binary, read_voxel_grid(f.truth));

  // Everything is computed before the first file is written.
  const fs::path dir = prepare_out_dir(f.common.out_dir);
  write_params(dir / "params.json", res.params, &fo);
  write_voxel_grid(dir / "recon", res.binary, VoxelDtype::u8);
  write_voxel_grid(dir / "field", res.field, VoxelDtype::f32);
  atomic_write(dir / "trace.csv", trace_to_csv(res.trace));
  atomic_write(dir / "trace.svg", trace_to_svg(res.trace));
  log_config(dir, c);

  out << "n_rbf " << res.params.pals.size() << " misfit " << res.trace.initial_misfit() << " -> "
      << res.trace.final_misfit() << "\n";
  if (metrics) out << "iou " << metrics->iou << " volume_rel_err " << metrics->volume_rel_err << "\n";
  return kExitOk;
}

// ---- gradcheck ----

struct GradcheckFlags {
  std::string family = "all";
  int trials = 5;
  double tolerance = 0.0;
  std::uint64_t seed = 1;
  std::optional<int> threads;
};

int cmd_gradcheck(const GradcheckFlags& f, std::ostream& out, std::ostream& err) {
  if (f.threads) set_thread_count(*f.threads);
  if (f.trials < 1) throw ConfigError("--trials must be >= 1");
  const GradcheckReport report = gradcheck(f.family, f.trials, f.tolerance, f.seed);
  char line[256];
  for (const GradcheckFamilyReport& r : report.families) {
    std::snprintf(line, sizeof line, "%-16s trials %d  max_rel_err %.3e  tol %.0e  skipped %d  %s\n", r.family.c_str(),
                  r.trials, r.max_rel_err, r.tolerance, r.skipped_columns, r.passed ? "ok" : "FAILED");
    out << line;
  }
  if (!report.passed()) {
    err << "error: numerical: gradient check failed\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// ---- metrics ----

int cmd_metrics(const std::string& recon, const std::string& truth, const std::string& trace, std::ostream& out) {
  const Metrics m = compare(read_voxel_grid(recon), read_voxel_grid(truth));
  char line[128];
  std::snprintf(line, sizeof line, "iou %.6f\nvolume_rel_err %.6f\n", m.iou, m.volume_rel_err);
  out << line;
  if (!trace.empty()) {
    // First and last misfit of a trace CSV written by reconstruct.
    std::istringstream is(read_file(trace));
    std::string row, first, last;
    std::getline(is, row);
    while (std::getline(is, row)) {
      if (row.empty()) continue;
      if (first.empty()) first = row;
      last = row;
    }
    auto misfit = [](const std::string& r) {
      const auto a = r.find(',');
      const auto b = r.find(',', a + 1);
      if (a == std::string::npos || b == std::string::npos) throw ConfigError("malformed trace CSV");
      return std::stod(r.substr(a + 1, b - a - 1));
    };
    if (first.empty()) throw ConfigError("empty trace CSV");
    std::snprintf(line, sizeof line, "misfit_reduction %.6e\n", misfit(first) / misfit(last));
    out << line;
  }
  return kExitOk;
}

// ---- export ----

struct ExportFlags {
  CommonFlags common;
  std::string params;
  std::vector<int> dims;
  std::string output = "export";
  bool soft = false;
  bool fill = false;
  std::optional<double> threshold;
};

int cmd_export(const ExportFlags& f, std::ostream& out) {
  RunConfig c = resolve(f.common);
  const std::string text = read_file(f.params);
  const ExtendedParameters m = params_from_json(text);
  const FieldOptions fo = field_options_from_json(text).value_or(c.field_options());
  GridConfig g = c.grid;
  if (f.dims.size() == 1) {
    g.dims = {f.dims[0], f.dims[0], f.dims[0]};
  } else if (f.dims.size() == 3) {
    g.dims = {f.dims[0], f.dims[1], f.dims[2]};
  } else if (!f.dims.empty()) {
    throw ConfigError("--dims takes one or three values");
  }
  const GridSpec grid = g.spec();
  const ScalarField field = field_eval(m.pals, grid, fo.heaviside, fo.order, false).field;
  const fs::path dir = prepare_out_dir(f.common.out_dir);
  if (f.soft) {
    write_voxel_grid(dir / f.output, field, VoxelDtype::f32);
  } else {
    ScalarField binary = binarize(field, f.threshold.value_or(c.schedule.binarize_threshold));
    if (f.fill) binary = fill_enclosed(binary);
    write_voxel_grid(dir / f.output, binary, VoxelDtype::u8);
  }
  out << "exported " << m.pals.size() << " bases (" << m.pals.flat_size() << " parameters) to " << grid.dims()[0]
      << "x" << grid.dims()[1] << "x" << grid.dims()[2] << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  apply_log_level();
  CLI::App app{"parametric level-set shape reconstruction", "pals"};
  app.require_subcommand(1);

  PhantomFlags ph;
  CLI::App* s_ph = app.add_subcommand("phantom", "voxelize a named phantom");
  add_common(s_ph, ph.common);
  s_ph->add_option("--name", ph.name, "sphere, ellipsoid, nonconvex or cube");
  s_ph->add_option("--dims", ph.dims, "cube edge in voxels (default: grid_hi)");
  s_ph->add_option("--output", ph.output, "output base name");
  s_ph->add_option("--dtype", ph.dtype, "u8 or f32");

  SimulateFlags sim;
  CLI::App* s_sim = app.add_subcommand("simulate", "simulate experiment files");
  add_common(s_sim, sim.common);
  s_sim->add_option("--modality", sim.modality, "dip, sfs or pc");
  s_sim->add_option("--phantom", sim.phantom, "phantom name");
  s_sim->add_option("--n-experiments", sim.n_experiments, "number of experiments");

  ReconstructFlags rec;
  CLI::App* s_rec = app.add_subcommand("reconstruct", "fit PaLS parameters to data");
  add_common(s_rec, rec.common);
  s_rec->add_option("--dip", rec.dip, "dip trace CSV");
  s_rec->add_option("--sfs", rec.sfs, "silhouette manifest");
  s_rec->add_option("--pc", rec.pc, "point-cloud file(s)");
  s_rec->add_option("--gamma", rec.gamma, "modality weight or \"auto\"");
  s_rec->add_flag("--calibrate", rec.calibrate, "estimate acquisition parameters");
  s_rec->add_option("--outer-iters", rec.outer_iters, "outer iteration budget");
  s_rec->add_option("--truth", rec.truth, "ground-truth voxel grid for a final IoU line");

  GradcheckFlags gc;
  CLI::App* s_gc = app.add_subcommand("gradcheck", "compare analytic derivatives with finite differences");
  s_gc->add_option("--family", gc.family, "derivative family or all");
  s_gc->add_option("--trials", gc.trials, "random configurations per family");
  s_gc->add_option("--tol", gc.tolerance, "tolerance override (<= 0: family default)");
  s_gc->add_option("--seed", gc.seed, "random seed");
  s_gc->add_option("--threads", gc.threads, "worker cap");

  std::string m_recon, m_truth, m_trace;
  CLI::App* s_m = app.add_subcommand("metrics", "IoU and volume error of two voxel grids");
  s_m->add_option("--recon", m_recon, "reconstructed grid")->required();
  s_m->add_option("--truth", m_truth, "reference grid")->required();
  s_m->add_option("--trace", m_trace, "trace CSV for the misfit reduction");

  ExportFlags ex;
  CLI::App* s_ex = app.add_subcommand("export", "evaluate a parameter file on a voxel grid");
  add_common(s_ex, ex.common);
  s_ex->add_option("--params", ex.params, "parameter JSON")->required();
  s_ex->add_option("--dims", ex.dims, "one or three voxel counts")->expected(1, 3);
  s_ex->add_option("--output", ex.output, "output base name");
  s_ex->add_flag("--soft", ex.soft, "write the continuous field instead of the binary one");
  s_ex->add_option("--threshold", ex.threshold, "binarization threshold");
  s_ex->add_flag("--fill", ex.fill, "fill background enclosed by the surface (point-cloud fits)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: validation: " << one_line(e.what()) << "\n";
    return kExitValidation;
  }

  try {
    if (s_ph->parsed()) return cmd_phantom(ph, out);
    if (s_sim->parsed()) return cmd_simulate(sim, out);
    if (s_rec->parsed()) return cmd_reconstruct(rec, out);
    if (s_gc->parsed()) return cmd_gradcheck(gc, out, err);
    if (s_m->parsed()) return cmd_metrics(m_recon, m_truth, m_trace, out);
    if (s_ex->parsed()) return cmd_export(ex, out);
  } catch (const NumericalError& e) {
    err << "error: numerical: " << one_line(e.what()) << "\n";
    return kExitNumerical;
  } catch (const std::runtime_error& e) {
    // ConfigError, ContractError, DomainError, UnsupportedKindError, I/O failures.
    err << "error: validation: " << one_line(e.what()) << "\n";
    return kExitValidation;
  } catch (const std::logic_error& e) {
    err << "error: validation: " << one_line(e.what()) << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace pals::cli

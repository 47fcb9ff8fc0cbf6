// msi: batch command line for index computation, threshold evaluation,
// LAI estimation, separability statistics and synthetic scenes.

#include <iostream>

#include <CLI11.hpp>

#include "msi/cli.hpp"
#include "msi/error.hpp"
#include "msi/indices.hpp"
#include "msi/lai.hpp"

namespace {

using namespace msi::cli;

void add_index_options(CLI::App* cmd, IndexOptions& o) {
  cmd->add_option("--index", o.indices, "Index id (repeatable)");
  cmd->add_flag("--all", o.all, "Every catalog index");
  cmd->add_option("--param", o.params, "Parameter override, name=value or ID.name=value");
  cmd->add_option("--updm", o.updm, "Container with C_V, C_S, C_W and C_4 grids");
  cmd->add_option("--muwi", o.muwi, "MuWI coefficient JSON");
  cmd->add_option("--swir", o.swir, "Band used for the plain SWIR symbol")->capture_default_str();
  cmd->add_option("--swir-long", o.swir_long, "Band used for SWIR_L")->capture_default_str();
}

int list_indices() {
  const auto catalog = msi::IndexCatalog::standard();
  for (const auto& e : catalog.entries()) {
    std::cout << e.id << ',' << msi::to_string(e.group) << ',';
    const auto roles = msi::required_bands(e);
    for (std::size_t i = 0; i < roles.size(); ++i) {
      std::cout << (i ? " " : "") << msi::to_string(roles[i]);
    }
    std::cout << ',' << (e.needs_context ? "context" : "") << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multispectral index toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--profile", global.profile, "Sensor profile id or JSON path")
      ->capture_default_str();
  app.add_option("--out", global.out, "Output directory")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads (0 = default)");
  app.add_flag("--keep-going", global.keep_going, "Skip failing indices, exit 2 on partial runs");

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Map raw sensor bands onto spectral roles");
  c_ingest->add_option("--raw", ingest.raw, "Raw container header")->required();

  ComputeOptions compute;
  bool list = false;
  auto* c_compute = app.add_subcommand("compute", "Compute index maps and stats.csv");
  c_compute->add_option("--stack", compute.stack, "Band stack header");
  c_compute->add_flag("--list", list, "Print the catalog and exit");
  add_index_options(c_compute, compute.index);

  RenderOptions render;
  auto* c_render = app.add_subcommand("render", "Render an index map as PGM");
  c_render->add_option("--map", render.map, "Index map header")->required();
  c_render->add_option("--image", render.output, "Output image path");

  CirOptions cir;
  auto* c_cir = app.add_subcommand("cir", "Color-infrared composite as PPM");
  c_cir->add_option("--stack", cir.stack, "Band stack header")->required();
  c_cir->add_option("--image", cir.output, "Output image path");

  EvaluateOptions evaluate;
  std::vector<std::string> mask_args;
  std::string policy = "peak";
  auto* c_eval = app.add_subcommand("evaluate", "Optimal threshold ranges against masks");
  c_eval->add_option("--stack", evaluate.stack, "Band stack header")->required();
  c_eval->add_option("--mask", mask_args, "Feature mask, label=path (repeatable)")->required();
  c_eval->add_option("--region", evaluate.region, "Region name for the rows")
      ->capture_default_str();
  c_eval->add_option("--bins", evaluate.threshold.bins, "Histogram bins")->capture_default_str();
  c_eval->add_option("--sigma", evaluate.threshold.sigma_bins, "Smoothing sigma in bins")
      ->capture_default_str();
  c_eval->add_option("--tau", evaluate.threshold.tau, "Peak expansion fraction")
      ->capture_default_str();
  c_eval->add_option("--policy", policy, "peak or exhaustive")
      ->check(CLI::IsMember({"peak", "exhaustive"}))
      ->capture_default_str();
  c_eval->add_flag("--normalize,!--no-normalize", evaluate.normalize,
                   "Rescale maps onto [-1, 1] before thresholding")
      ->capture_default_str();
  add_index_options(c_eval, evaluate.index);

  LaiOptions lai;
  auto* c_lai = app.add_subcommand("lai", "Leaf area index map");
  c_lai->add_option("--stack", lai.stack, "Band stack header")->required();
  c_lai->add_option("--model", lai.model, "Model id")->capture_default_str();
  c_lai->add_option("--param", lai.params, "k=, idvi_a=, idvi_b=, ndvi_model=");
  c_lai->add_option("--swir", lai.swir, "Band used for the plain SWIR symbol")
      ->capture_default_str();

  MetricsOptions metrics;
  auto* c_metrics = app.add_subcommand("metrics", "Separability, tests and mask agreement");
  c_metrics->add_option("--samples", metrics.samples, "CSV with value,label columns");
  c_metrics->add_option("--predicted", metrics.predicted, "Predicted mask header");
  c_metrics->add_option("--truth", metrics.truth, "Reference mask header");

  ReportOptions report;
  auto* c_report = app.add_subcommand("report", "Compare results with a fixture table");
  c_report->add_option("--results", report.results, "Results CSV")->required();
  c_report->add_option("--fixture", report.fixture, "Fixture CSV")->required();

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic scene with masks");
  c_synth->add_option("--spec", synth.spec, "Scene JSON")->required();

  CLI11_PARSE(app, argc, argv);

  if (c_ingest->parsed()) return cmd_ingest(global, ingest, std::cerr);
  if (c_compute->parsed()) {
    if (list) return list_indices();
    if (compute.stack.empty()) {
      std::cerr << "error: compute needs --stack\n";
      return kFatal;
    }
    return cmd_compute(global, compute, std::cerr);
  }
  if (c_render->parsed()) return cmd_render(global, render, std::cerr);
  if (c_cir->parsed()) return cmd_cir(global, cir, std::cerr);
  if (c_eval->parsed()) {
    evaluate.threshold.policy =
        policy == "exhaustive" ? msi::RangePolicy::Exhaustive : msi::RangePolicy::PeakExpansion;
    for (const auto& m : mask_args) {
      const auto eq = m.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "error: --mask expects label=path\n";
        return kFatal;
      }
      evaluate.masks.emplace_back(m.substr(0, eq), m.substr(eq + 1));
    }
    return cmd_evaluate(global, evaluate, std::cerr);
  }
  if (c_lai->parsed()) return cmd_lai(global, lai, std::cerr);
  if (c_metrics->parsed()) return cmd_metrics(global, metrics, std::cerr);
  if (c_report->parsed()) return cmd_report(global, report, std::cerr);
  if (c_synth->parsed()) return cmd_synth(global, synth, std::cerr);
  return kFatal;
}

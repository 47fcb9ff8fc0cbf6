#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "msi/bandmap.hpp"
#include "msi/cli.hpp"
#include "msi/error.hpp"
#include "msi/indices.hpp"
#include "msi/lai.hpp"
#include "msi/metrics.hpp"
#include "msi/synthgen.hpp"

namespace msi::cli {

namespace {

template <class Body>
int guarded(const GlobalOptions& g, std::ostream& log, Body&& body) {
  try {
    if (g.threads > 0) {
      omp_set_num_threads(g.threads);
    }
    fs::create_directories(g.out);
    return body();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kFatal;
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Characters allowed in output file names derived from ids.
std::string file_stem(std::string_view id) {
  std::string s(id);
  for (char& c : s) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return s;
}

IndexCatalog make_catalog(const IndexOptions& o) {
  RoleAliases aliases;
  aliases.swir = parse_role(o.swir);
  aliases.swir_long = parse_role(o.swir_long);
  IndexCatalog catalog = IndexCatalog::standard(aliases);
  for (const auto& p : o.params) {
    if (catalog.apply_override(p) == 0) {
      throw FormatError("parameter override '" + p + "' matches no index");
    }
  }
  return catalog;
}

std::vector<std::string> index_ids(const IndexOptions& o, const IndexCatalog& catalog) {
  std::vector<std::string> ids;
  if (o.all) {
    for (const auto& e : catalog.entries()) {
      ids.push_back(e.id);
    }
  } else {
    for (const auto& id : o.indices) {
      ids.push_back(catalog.at(id).id);
    }
  }
  if (ids.empty()) {
    throw Error("no index requested");
  }
  return ids;
}

ImageContext make_context(const BandStack& stack, const IndexCatalog& catalog,
                          const IndexOptions& o, std::ostream& log) {
  ImageContext ctx;
  try {
    ctx = build_context(stack, catalog);
  } catch (const DomainError& e) {
    log << "warning: " << e.what() << '\n';
  }
  if (o.updm) {
    ctx.updm = updm_from_grids(load_grids(*o.updm), stack.meta());
  }
  if (o.muwi) {
    ctx.muwi = parse_muwi(read_text(*o.muwi));
  }
  return ctx;
}

struct MapStats {
  std::size_t valid = 0;
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double mean = std::numeric_limits<double>::quiet_NaN();
};

// Serial, fixed-order accumulation so the CSV is reproducible across
// thread counts.
MapStats map_stats(const IndexMap& map) {
  MapStats s;
  double sum = 0.0;
  for (float v : map.data) {
    if (is_nodata(v)) continue;
    if (s.valid == 0) {
      s.min = s.max = v;
    } else {
      s.min = std::min<double>(s.min, v);
      s.max = std::max<double>(s.max, v);
    }
    sum += v;
    ++s.valid;
  }
  if (s.valid) {
    s.mean = sum / static_cast<double>(s.valid);
  }
  return s;
}

CsvTable stats_table() {
  CsvTable t;
  t.header = {"index_id", "status", "valid", "singular", "min", "max", "mean", "message"};
  return t;
}

void add_ok_row(CsvTable& t, const IndexMap& map) {
  const MapStats s = map_stats(map);
  t.rows.push_back({map.index_id, "ok", std::to_string(s.valid),
                    std::to_string(map.singular_count), format_general(s.min),
                    format_general(s.max), format_general(s.mean), ""});
}

void add_error_row(CsvTable& t, const std::string& id, const std::string& what) {
  t.rows.push_back({id, "error", "0", "0", "nan", "nan", "nan", sanitize_field(what)});
}

}  // namespace

int cmd_ingest(const GlobalOptions& g, const IngestOptions& o, std::ostream& log) {
  return guarded(g, log, [&] {
    const SensorProfile profile = select_profile(g.profile);
    const BandStack stack = ingest(load_grids(o.raw), profile);
    save_stack(stack, g.out / "stack.json");
    log << "ingested " << stack.band_count() << " bands with profile " << profile.sensor_id
        << '\n';
    return kOk;
  });
}

int cmd_compute(const GlobalOptions& g, const ComputeOptions& o, std::ostream& log) {
  return guarded(g, log, [&] {
    const IndexCatalog catalog = make_catalog(o.index);
    const auto ids = index_ids(o.index, catalog);
    const BandStack stack = load_stack(o.stack);
    const ImageContext ctx = make_context(stack, catalog, o.index, log);

    CsvTable stats = stats_table();
    int code = kOk;
    for (const auto& id : ids) {
      const IndexSpec& spec = catalog.at(id);
      try {
        check_computable(spec, stack, ctx);
        const IndexMap map = compute_map(spec, stack, ctx);
        save_index_map(map, g.out / (file_stem(id) + ".json"));
        add_ok_row(stats, map);
      } catch (const Error& e) {
        add_error_row(stats, id, e.what());
        log << id << ": " << e.what() << '\n';
        if (!g.keep_going) {
          code = kFatal;
          break;
        }
        code = kPartial;
      }
    }
    write_csv(stats, g.out / "stats.csv");
    return code;
  });
}

int cmd_render(const GlobalOptions& g, const RenderOptions& o, std::ostream& log) {
  return guarded(g, log, [&] {
    const IndexMap map = load_index_map(o.map);
    const fs::path out = o.output ? *o.output : g.out / (o.map.stem().string() + ".pgm");
    render_gray(map, out);
    return kOk;
  });
}

int cmd_cir(const GlobalOptions& g, const CirOptions& o, std::ostream& log) {
  return guarded(g, log, [&] {
    const BandStack stack = load_stack(o.stack);
    write_ppm(cir_composite(stack), o.output ? *o.output : g.out / "cir.ppm");
    return kOk;
  });
}

int cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o, std::ostream& log) {
  return guarded(g, log, [&] {
    if (o.masks.empty()) {
      throw Error("evaluate needs at least one --mask label=path");
    }
    const IndexCatalog catalog = make_catalog(o.index);
    const auto ids = index_ids(o.index, catalog);
    const BandStack stack = load_stack(o.stack);
    std::vector<std::pair<std::string, FeatureMask>> masks;
    for (const auto& [label, path] : o.masks) {
      FeatureMask m = load_mask(path);
      if (!m.meta.same_shape(stack.meta())) {
        throw DimensionError("mask " + path.string() + " differs in shape from the stack");
      }
      masks.emplace_back(label, std::move(m));
    }
    const ImageContext ctx = make_context(stack, catalog, o.index, log);

    CsvTable out;
    out.header = {"index_id", "region", "feature", "range_lo", "range_hi",
                  "tp",       "tn",     "fp",      "fn",       "accuracy"};
    int code = kOk;
    for (const auto& id : ids) {
      try {
        const IndexSpec& spec = catalog.at(id);
        check_computable(spec, stack, ctx);
        IndexMap map = compute_map(spec, stack, ctx);
        if (o.normalize) {
          map = normalize_map(map);
        }
        std::vector<ThresholdEvalResult> results;
        for (const auto& [label, mask] : masks) {
          results.push_back(evaluate_index(map, mask, o.threshold, label));
        }
        for (const auto& r : results) {
          out.rows.push_back({id, sanitize_field(o.region), sanitize_field(r.feature_label),
                              format_general(r.range.lo), format_general(r.range.hi),
                              std::to_string(r.confusion.tp), std::to_string(r.confusion.tn),
                              std::to_string(r.confusion.fp), std::to_string(r.confusion.fn),
                              format_fixed(100.0 * r.accuracy, 2)});
        }
      } catch (const Error& e) {
        log << id << ": " << e.what() << '\n';
        if (!g.keep_going) {
          code = kFatal;
          break;
        }
        code = kPartial;
      }
    }
    write_csv(out, g.out / "evaluate.csv");
    return code;
  });
}

int cmd_lai(const GlobalOptions& g, const LaiOptions& o, std::ostream& log) {
  return guarded(g, log, [&] {
    LaiModelSpec model = lai_model(o.model);
    for (const auto& p : o.params) {
      apply_lai_override(model, p);
    }
    RoleAliases aliases;
    aliases.swir = parse_role(o.swir);
    const IndexCatalog catalog = IndexCatalog::standard(aliases);
    const BandStack stack = load_stack(o.stack);
    const IndexMap map = lai_map(model, stack, catalog);
    const std::string stem = "LAI_" + file_stem(model.id);
    save_index_map(map, g.out / (stem + ".json"));
    CsvTable stats = stats_table();
    add_ok_row(stats, map);
    write_csv(stats, g.out / "lai_stats.csv");
    if (map.singular_count) {
      log << model.id << ": " << map.singular_count << " pixels outside the model domain\n";
    }
    return kOk;
  });
}

int cmd_metrics(const GlobalOptions& g, const MetricsOptions& o, std::ostream& log) {
  return guarded(g, log, [&] {
    if (!o.samples && !(o.predicted && o.truth)) {
      throw Error("metrics needs --samples or both --predicted and --truth");
    }
    if (o.predicted.has_value() != o.truth.has_value()) {
      throw Error("--predicted and --truth go together");
    }
    int code = kOk;
    if (o.samples) {
      const CsvTable in = read_csv(*o.samples);
      const auto c_value = in.column("value");
      const auto c_label = in.column("label");
      std::vector<ClassSample> groups;
      std::map<std::string, std::size_t> slot;
      for (const auto& r : in.rows) {
        auto [it, fresh] = slot.try_emplace(r[c_label], groups.size());
        if (fresh) {
          groups.push_back({{}, r[c_label]});
        }
        groups[it->second].values.push_back(parse_number(r[c_value]));
      }
      if (groups.size() < 2) {
        throw DomainError("metrics needs at least two labels");
      }

      CsvTable out;
      out.header = {"measure", "group_a", "group_b", "value", "p_value"};
      auto row = [&](const std::string& measure, const std::string& a, const std::string& b,
                     auto&& fn) {
        try {
          const auto [v, p] = fn();
          out.rows.push_back({measure, sanitize_field(a), sanitize_field(b), format_general(v),
                              format_general(p)});
        } catch (const Error& e) {
          log << measure << " " << a << "/" << b << ": " << e.what() << '\n';
          out.rows.push_back({measure, sanitize_field(a), sanitize_field(b), "nan", "nan"});
          code = kPartial;
        }
      };
      constexpr double kNone = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
          const auto& a = groups[i];
          const auto& b = groups[j];
          row("jmd", a.label, b.label, [&] { return std::pair{jmd(a, b), kNone}; });
          row("td", a.label, b.label, [&] { return std::pair{td(a, b), kNone}; });
          row("sdi", a.label, b.label, [&] { return std::pair{sdi(a, b), kNone}; });
          row("t", a.label, b.label, [&] {
            const auto r = t_test(a, b);
            return std::pair{r.statistic, r.p_value};
          });
          row("mwu", a.label, b.label, [&] {
            const auto r = mann_whitney_u(a, b);
            return std::pair{r.statistic, r.p_value};
          });
        }
      }
      row("anova", "all", "all", [&] {
        const auto r = anova(groups);
        return std::pair{r.statistic, r.p_value};
      });
      row("kruskal_wallis", "all", "all", [&] {
        const auto r = kruskal_wallis(groups);
        return std::pair{r.statistic, r.p_value};
      });
      write_csv(out, g.out / "metrics.csv");
    }
    if (o.predicted) {
      const FeatureMask pred = load_mask(*o.predicted);
      const FeatureMask truth = load_mask(*o.truth);
      const ConfusionCounts c = confusion(pred, truth);
      const ConfusionCounts background{c.tn, c.tp, c.fn, c.fp};
      const std::array<ConfusionCounts, 2> classes = {c, background};
      CsvTable out;
      out.header = {"metric", "value"};
      out.rows = {{"tp", std::to_string(c.tp)},
                  {"tn", std::to_string(c.tn)},
                  {"fp", std::to_string(c.fp)},
                  {"fn", std::to_string(c.fn)},
                  {"accuracy", format_general(accuracy(c))},
                  {"sensitivity", c.tp + c.fn ? format_general(sensitivity(c)) : "nan"},
                  {"miou", format_general(miou(classes))}};
      write_csv(out, g.out / "classification.csv");
    }
    return code;
  });
}

int cmd_report(const GlobalOptions& g, const ReportOptions& o, std::ostream& log) {
  return guarded(g, log, [&] {
    const Report rep = build_report(read_fixture(o.results), read_fixture(o.fixture));
    CsvTable rows;
    rows.header = {"index_id", "region",  "feature", "result_accuracy",
                   "fixture_accuracy", "delta", "jaccard"};
    for (const auto& r : rep.rows) {
      rows.rows.push_back({sanitize_field(r.index_id), sanitize_field(r.region),
                           sanitize_field(r.feature), format_fixed(r.result_accuracy, 2),
                           format_fixed(r.fixture_accuracy, 2), format_general(r.delta),
                           format_general(r.jaccard)});
    }
    CsvTable summary;
    summary.header = {"feature", "rows", "mean_abs_delta", "mean_jaccard"};
    for (const auto& s : rep.summary) {
      summary.rows.push_back({sanitize_field(s.feature), std::to_string(s.rows),
                              format_general(s.mean_abs_delta), format_general(s.mean_jaccard)});
    }
    write_csv(rows, g.out / "report.csv");
    write_csv(summary, g.out / "report_summary.csv");
    log << rep.rows.size() << " rows matched, " << rep.unmatched_results
        << " result rows and " << rep.unmatched_fixtures << " fixture rows unmatched\n";
    return kOk;
  });
}

int cmd_synth(const GlobalOptions& g, const SynthOptions& o, std::ostream& log) {
  return guarded(g, log, [&] {
    const Scene scene = generate(load_scene_spec(o.spec));
    save_scene(scene, g.out);
    return kOk;
  });
}

}  // namespace msi::cli

#include "gelscan/cli.hpp"

#include <CLI11.hpp>

#include <optional>

#include "gelscan/config_file.hpp"
#include "gelscan/error.hpp"
#include "gelscan/image_io.hpp"
#include "gelscan/report.hpp"
#include "gelscan/service.hpp"
#include "gelscan/synthgel.hpp"

namespace gelscan {

namespace {

constexpr int kUsageExit = 2;

struct AnalyzeArgs {
  std::string input;
  std::string out;
  std::string config_file;
  std::string axis;
  std::optional<double> alpha;
  std::optional<double> prominence;
  std::optional<double> bracket;
  std::string se_shape;
  std::optional<int> se_size;
  std::optional<int> median;
  bool enhance = false;
  std::optional<long long> min_area;
  std::string ratio;
  std::string roi;
  std::string format = "both";
  std::optional<int> connectivity;
};

struct SynthArgs {
  std::uint64_t seed = 0;
  std::string preset = "clean";
  std::string spec_file;
  std::string out;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string reports = "reports";
  std::string static_dir;
  std::size_t max_sessions = 16;
};

std::pair<std::int32_t, std::int32_t> parse_ratio(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    std::size_t used_ref = 0;
    std::size_t used_n = 0;
    const std::string ref_text = text.substr(0, colon);
    const std::string n_text = text.substr(colon + 1);
    const int ref = std::stoi(ref_text, &used_ref);
    const int n = std::stoi(n_text, &used_n);
    if (used_ref != ref_text.size() || used_n != n_text.size()) throw std::invalid_argument(text);
    return {ref, n};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "--ratio expects REF:N with integer labels, got '" + text + "'");
  }
}

PipelineConfig build_config(const AnalyzeArgs& a) {
  PipelineConfig cfg = a.config_file.empty() ? PipelineConfig{} : load_config(a.config_file);
  if (!a.axis.empty()) set_config_value(cfg, "axis", a.axis);
  if (a.alpha) cfg.alpha_override = *a.alpha;
  if (a.prominence) cfg.prominence_frac = *a.prominence;
  if (a.bracket) cfg.bracket_position = *a.bracket;
  if (!a.se_shape.empty() || a.se_size) {
    const std::string shape =
        !a.se_shape.empty() ? a.se_shape
                            : (cfg.se.shape() == StructuringElement::Shape::Disk ? "disk" : "square");
    set_config_value(cfg, "se", shape + ":" + std::to_string(a.se_size.value_or(cfg.se.size())));
  }
  if (a.median) cfg.median_window = *a.median;
  if (a.enhance) cfg.enhance = true;
  if (a.min_area) cfg.min_band_area = *a.min_area;
  if (!a.roi.empty()) set_config_value(cfg, "roi", a.roi);
  if (a.connectivity) set_config_value(cfg, "connectivity", std::to_string(*a.connectivity));
  cfg.validate();
  return cfg;
}

int run_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const PipelineConfig cfg = build_config(a);
  std::optional<std::pair<std::int32_t, std::int32_t>> ratio;
  if (!a.ratio.empty()) ratio = parse_ratio(a.ratio);

  const auto bytes = read_file_bytes(a.input);
  const GrayImage img = decode_image(bytes);
  const PipelineResult result = run_pipeline(img, cfg);
  const BandReport rep = make_report({a.input, sha256_hex(bytes)}, cfg, result,
                                     ratio ? std::optional(ratio->first) : std::nullopt);

  const auto& d = rep.decision;
  out << "threshold: alpha=" << format_double(d.alpha) << " th_level=" << format_double(d.th_level)
      << " (" << source_name(d.source) << ")\n";
  out << "bands: " << rep.bands.size() << "\n";
  if (ratio) {
    const auto find = [&](std::int32_t label) -> const Band& {
      for (const auto& b : result.bands) {
        if (b.label == label) return b;
      }
      throw Error(ErrorCode::UnknownBand, "no band with label " + std::to_string(label));
    };
    const double r = ratio_size(static_cast<double>(find(ratio->second).area),
                                static_cast<double>(find(ratio->first).area));
    out << "ratio " << ratio->second << " vs " << ratio->first << ": " << format_double(r) << "\n";
  }
  if (!a.out.empty()) {
    const ReportFormat format = a.format == "report" ? ReportFormat::Report
                                : a.format == "table" ? ReportFormat::Table
                                                      : ReportFormat::Both;
    const WrittenFiles files = write_report(rep, a.out, img, format);
    if (files.report) out << "wrote " << files.report->string() << "\n";
    if (files.table) out << "wrote " << files.table->string() << "\n";
    out << "wrote " << files.overlay.string() << "\n";
  }
  return 0;
}

int run_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticSpec spec;
  if (!a.spec_file.empty()) {
    const auto bytes = read_file_bytes(a.spec_file);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CorruptData, std::string("spec file is not valid JSON: ") + e.what());
    }
    spec = spec_from_json(j.contains("spec") ? j["spec"] : j);
  } else {
    spec = a.preset == "faint" ? faint_spec(a.seed) : clean_spec(a.seed);
  }
  const SyntheticGel gel = synth_gel(spec);
  const auto sidecar = write_synthetic(spec, gel, a.out);
  out << "wrote " << a.out << " (" << gel.truth.bands.size() << " bands)\n";
  out << "wrote " << sidecar.string() << "\n";
  return 0;
}

int run_serve(const ServeArgs& a, std::ostream& out) {
  ServiceOptions options;
  options.max_sessions = a.max_sessions;
  options.report_dir = a.reports;
  if (!a.static_dir.empty()) options.static_dir = a.static_dir;
  Service service(options);
  int port = a.port;
  if (port == 0) {
    port = service.bind_any_port(a.host);
    if (port < 0) throw Error(ErrorCode::IoFailure, "cannot bind " + a.host);
  } else if (!service.bind(a.host, port)) {
    throw Error(ErrorCode::IoFailure, "cannot bind " + a.host + ":" + std::to_string(port));
  }
  out << "listening on http://" << a.host << ":" << port << std::endl;
  service.serve();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gel electrophoresis band detection", "gelscan"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Detect and measure bands in a gel image");
  analyze->add_option("--input", an.input, "PGM or PNG gel image")->required();
  analyze->add_option("--out", an.out, "Directory for report.json, bands.csv, overlay.png");
  analyze->add_option("--config", an.config_file, "Pipeline configuration file");
  analyze->add_option("--axis", an.axis, "Profile axis")->check(CLI::IsMember({"cols", "rows"}));
  analyze->add_option("--alpha", an.alpha, "Override the automatic alpha");
  analyze->add_option("--prominence", an.prominence, "Minimum peak prominence, fraction of the profile range");
  analyze->add_option("--bracket", an.bracket, "Threshold position between sigma_min and the lowest peak");
  analyze->add_option("--se-shape", an.se_shape, "Top-hat element shape")
      ->check(CLI::IsMember({"disk", "square"}));
  analyze->add_option("--se-size", an.se_size, "Disk radius or square side");
  analyze->add_option("--median", an.median, "Median window");
  analyze->add_flag("--enhance", an.enhance, "Run the top-hat/bottom-hat enhancement first");
  analyze->add_option("--min-area", an.min_area, "Smallest band kept, in pixels");
  analyze->add_option("--ratio", an.ratio, "Print ratio-size of band N against reference REF")
      ->type_name("REF:N");
  analyze->add_option("--roi", an.roi, "Analyse only this rectangle")->type_name("X,Y,W,H");
  analyze->add_option("--format", an.format, "Which files to write")
      ->check(CLI::IsMember({"report", "table", "both"}));
  analyze->add_option("--connectivity", an.connectivity, "Pixel connectivity")
      ->check(CLI::IsMember({4, 8}));

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic gel and its ground truth");
  synth->add_option("--seed", sy.seed, "Generator seed");
  synth->add_option("--preset", sy.preset, "Corpus regime")->check(CLI::IsMember({"clean", "faint"}));
  synth->add_option("--spec", sy.spec_file, "JSON spec (or a previous .truth.json) instead of a preset");
  synth->add_option("--out", sy.out, "Image path (.png or .pgm)")->required();

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP analysis service");
  serve->add_option("--host", sv.host, "Bind address");
  serve->add_option("--port", sv.port, "Port (0 picks a free one)");
  serve->add_option("--reports", sv.reports, "Where POST .../report writes");
  serve->add_option("--static", sv.static_dir, "Directory served at /");
  serve->add_option("--max-sessions", sv.max_sessions, "Sessions kept before LRU eviction")
      ->check(CLI::PositiveNumber);

  // CLI11 wants argv with the program name first.
  std::vector<const char*> argv{"gelscan"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    if (*analyze) return run_analyze(an, out);
    if (*synth) return run_synth(sy, out);
    return run_serve(sv, out);
  } catch (const Error& e) {
    err << "gelscan: " << e.what() << "\n";
    if (e.code() == ErrorCode::NoPeaks) err << "hint: pass --alpha to set the threshold manually\n";
    return exit_code_for(e.code());
  }
}

}  // namespace gelscan

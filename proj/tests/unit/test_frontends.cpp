#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "gelscan/cli.hpp"
#include "gelscan/config_file.hpp"
#include "gelscan/error.hpp"
#include "gelscan/image_io.hpp"
#include "gelscan/report.hpp"
#include "gelscan/service.hpp"
#include "gelscan/synthgel.hpp"
#include "support/scratch.hpp"

using namespace gelscan;
using nlohmann::json;

namespace {

struct CliRun {
  int status;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Service on an ephemeral port, served from a background thread.
class LiveService {
 public:
  explicit LiveService(ServiceOptions options) : service_(std::move(options)) {
    port_ = service_.bind_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { service_.serve(); });
    service_.wait_until_ready();
  }
  ~LiveService() {
    service_.stop();
    thread_.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }
  Service& service() { return service_; }

 private:
  Service service_;
  int port_ = -1;
  std::thread thread_;
};

std::string upload(httplib::Client& c, const std::string& bytes, const std::string& name = "gel.png") {
  auto res = c.Post("/api/sessions?name=" + name, bytes, "application/octet-stream");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  return json::parse(res->body)["id"].get<std::string>();
}

json post_json(httplib::Client& c, const std::string& path, const json& body, int expect = 200) {
  auto res = c.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == expect);
  return json::parse(res->body);
}

std::string png_bytes(const GrayImage& img) {
  const auto png = encode_image(img, ImageFormat::Png);
  return {png.begin(), png.end()};
}

GrayImage quantized(const GrayImage& img) {
  std::vector<double> px;
  for (double v : img.pixels()) px.push_back(quantize_sample(v, img.max_range()));
  return img.with_pixels(px);
}

std::string error_code(const json& body) { return body["error"]["code"].get<std::string>(); }

}  // namespace

TEST_CASE("cli analyze writes the report files") {
  scratch::Dir dir("cli_analyze");
  const SyntheticGel gel = synth_gel(clean_spec(2));
  save_image(gel.image, dir / "gel.png");
  const auto run = cli({"analyze", "--input", (dir / "gel.png").string(), "--out", (dir / "out").string()});
  CHECK(run.status == 0);
  CHECK(run.out.find("(Automatic)") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "out" / "report.json"));
  CHECK(std::filesystem::exists(dir / "out" / "bands.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "overlay.png"));

  const BandReport rep = read_report(dir / "out" / "report.json");
  CHECK(run.out.find("bands: " + std::to_string(rep.bands.size()) + "\n") != std::string::npos);
  CHECK(rep.source.sha256 == sha256_hex(encode_image(gel.image, ImageFormat::Png)));

  const auto table_only = cli({"analyze", "--input", (dir / "gel.png").string(), "--out",
                               (dir / "t").string(), "--format", "table"});
  CHECK(table_only.status == 0);
  CHECK(!std::filesystem::exists(dir / "t" / "report.json"));
  CHECK(std::filesystem::exists(dir / "t" / "bands.csv"));
}

TEST_CASE("cli reports pipeline errors by name and exit status") {
  scratch::Dir dir("cli_const");
  save_image(GrayImage::filled(64, 64, 90), dir / "constant.png");
  const auto run = cli({"analyze", "--input", (dir / "constant.png").string()});
  CHECK(run.status == exit_code_for(ErrorCode::ConstantImage));
  CHECK(run.status != 0);
  CHECK(run.err.find("ConstantImage") != std::string::npos);

  const auto missing = cli({"analyze", "--input", (dir / "nope.png").string()});
  CHECK(missing.status == exit_code_for(ErrorCode::FileNotFound));
  CHECK(missing.err.find("FileNotFound") != std::string::npos);
}

TEST_CASE("cli override and enhancement are recorded") {
  scratch::Dir dir("cli_override");
  save_image(synth_gel(faint_spec(1003)).image, dir / "faint.png");
  const auto run = cli({"analyze", "--input", (dir / "faint.png").string(), "--enhance", "--alpha", "0.15",
                        "--out", (dir / "out").string()});
  REQUIRE(run.status == 0);
  CHECK(run.out.find("alpha=0.15") != std::string::npos);
  CHECK(run.out.find("(UserOverride)") != std::string::npos);
  const BandReport rep = read_report(dir / "out" / "report.json");
  CHECK(rep.decision.source == ThresholdSource::UserOverride);
  CHECK(rep.decision.alpha == 0.15);
  CHECK(rep.config.enhance);
  CHECK(rep.config.alpha_override == 0.15);
}

TEST_CASE("cli ratio") {
  scratch::Dir dir("cli_ratio");
  save_image(synth_gel(clean_spec(2)).image, dir / "gel.png");
  const auto run =
      cli({"analyze", "--input", (dir / "gel.png").string(), "--ratio", "1:2", "--out", (dir / "o").string()});
  REQUIRE(run.status == 0);
  const BandReport rep = read_report(dir / "o" / "report.json");
  REQUIRE(rep.bands.size() >= 2);
  CHECK(rep.reference == 1);
  const double want = ratio_size(static_cast<double>(rep.bands[1].area), static_cast<double>(rep.bands[0].area));
  CHECK(run.out.find("ratio 2 vs 1: " + format_double(want)) != std::string::npos);

  CHECK(cli({"analyze", "--input", (dir / "gel.png").string(), "--ratio", "1:999"}).status ==
        exit_code_for(ErrorCode::UnknownBand));
  CHECK(cli({"analyze", "--input", (dir / "gel.png").string(), "--ratio", "x"}).status ==
        exit_code_for(ErrorCode::InvalidArgument));
}

TEST_CASE("cli synth writes image and sidecar") {
  scratch::Dir dir("cli_synth");
  const auto run = cli({"synth", "--seed", "5", "--preset", "faint", "--out", (dir / "s.png").string()});
  REQUIRE(run.status == 0);
  CHECK(load_image(dir / "s.png") == synth_gel(faint_spec(5)).image);
  const json side = json::parse(slurp(dir / "s.truth.json"));
  CHECK(spec_from_json(side["spec"]) == faint_spec(5));

  // A sidecar replays as a spec file.
  const auto replay = cli({"synth", "--spec", (dir / "s.truth.json").string(), "--out", (dir / "r.pgm").string()});
  REQUIRE(replay.status == 0);
  CHECK(load_image(dir / "r.pgm") == load_image(dir / "s.png"));
}

TEST_CASE("cli usage errors exit 2") {
  CHECK(cli({}).status == 2);
  CHECK(cli({"analyze"}).status == 2);
  CHECK(cli({"analyze", "--input", "x.png", "--connectivity", "6"}).status == 2);
  CHECK(cli({"frobnicate"}).status == 2);
  const auto help = cli({"--help"});
  CHECK(help.status == 0);
  CHECK(help.out.find("analyze") != std::string::npos);
}

TEST_CASE("service session lifecycle matches the cli") {
  scratch::Dir dir("svc");
  ServiceOptions opt;
  opt.report_dir = dir / "reports";
  LiveService live(opt);
  auto c = live.client();

  const SyntheticGel gel = synth_gel(clean_spec(2));
  save_image(gel.image, dir / "gel.png");
  const std::string bytes = slurp(dir / "gel.png");
  const std::string id = upload(c, bytes);

  auto summary = c.Get("/api/sessions/" + id);
  REQUIRE(summary);
  const json s = json::parse(summary->body);
  CHECK(s["width"] == 512);
  CHECK(s["analyzed"] == false);
  CHECK(s["source"]["sha256"] == sha256_hex(encode_image(gel.image, ImageFormat::Png)));

  const json analysis = post_json(c, "/api/sessions/" + id + "/analyze", json::object());
  CHECK(analysis["decision"]["source"] == "Automatic");
  CHECK(analysis["stages"] == json{"input", "thresholded", "shifted", "filtered"});

  REQUIRE(cli({"analyze", "--input", (dir / "gel.png").string(), "--out", (dir / "cli").string()}).status == 0);
  const json cli_report = json::parse(slurp(dir / "cli" / "report.json"));
  auto bands = c.Get("/api/sessions/" + id + "/bands");
  REQUIRE(bands);
  CHECK(json::parse(bands->body)["bands"] == cli_report["bands"]);
  CHECK(analysis["decision"] == cli_report["decision"]);

  const BandReport rep = read_report(dir / "cli" / "report.json");
  REQUIRE(rep.bands.size() >= 3);
  const json ratio = post_json(c, "/api/sessions/" + id + "/ratio", {{"ref", 1}, {"n", 3}});
  const PipelineResult direct = run_pipeline(gel.image, PipelineConfig{});
  CHECK(ratio["ratio"].get<double>() ==
        ratio_size(static_cast<double>(direct.bands[2].area), static_cast<double>(direct.bands[0].area)));

  const json written = post_json(c, "/api/sessions/" + id + "/report", {{"reference", 1}});
  const std::filesystem::path path = written["path"].get<std::string>();
  CHECK(path == dir / "reports" / id / "report.json");
  BandReport from_service = read_report(path);
  BandReport from_cli = make_report(rep.source, rep.config, direct, 1);
  from_service.source.path = from_cli.source.path;  // upload name differs from the file path
  CHECK(from_service == from_cli);
  CHECK(std::filesystem::exists(written["overlay"].get<std::string>()));
}

TEST_CASE("service recomputes only when the configuration changes") {
  LiveService live({});
  auto c = live.client();
  const std::string id = upload(c, png_bytes(synth_gel(clean_spec(4)).image));
  auto session = live.service().sessions().find(id);
  REQUIRE(session);
  const std::string path = "/api/sessions/" + id + "/analyze";

  post_json(c, path, json::object());
  CHECK(session->analysis_runs == 1);
  post_json(c, path, json::object());
  post_json(c, path, {{"prominence_frac", 0.05}});
  CHECK(session->analysis_runs == 1);
  REQUIRE(c.Get("/api/sessions/" + id + "/bands"));
  CHECK(session->analysis_runs == 1);

  const json changed = post_json(c, path, {{"median_window", 3}});
  CHECK(session->analysis_runs == 2);
  CHECK(changed["config"]["median_window"] == 3);

  // A failed run leaves the previous analysis in place.
  const json bad = post_json(c, path, {{"median_window", 4}}, 400);
  CHECK(error_code(bad) == "InvalidArgument");
  CHECK(session->analysis_runs == 2);
  CHECK(post_json(c, path, json::object())["config"]["median_window"] == 3);
}

TEST_CASE("service enhancement finds at least as many faint bands") {
  LiveService live({});
  auto c = live.client();
  for (std::uint64_t seed = 1000; seed < 1005; ++seed) {
    const std::string id = upload(c, png_bytes(synth_gel(faint_spec(seed)).image));
    const std::string path = "/api/sessions/" + id + "/analyze";
    const auto plain = post_json(c, path, json::object())["bands"].size();
    const auto enhanced = post_json(c, path, {{"enhance", true}})["bands"].size();
    CAPTURE(seed);
    CHECK(enhanced >= plain);
  }
}

TEST_CASE("service stage images") {
  LiveService live({});
  auto c = live.client();
  const GrayImage img = synth_gel(clean_spec(4)).image;
  const std::string id = upload(c, png_bytes(img));
  auto input = c.Get("/api/sessions/" + id + "/image");
  REQUIRE(input);
  CHECK(input->status == 200);
  CHECK(input->get_header_value("Content-Type") == "image/png");
  const std::vector<std::uint8_t> bytes(input->body.begin(), input->body.end());
  CHECK(decode_image(bytes) == img);

  auto filtered = c.Get("/api/sessions/" + id + "/image?stage=filtered");
  REQUIRE(filtered);
  CHECK(filtered->status == 200);
  const PipelineResult direct = run_pipeline(img, PipelineConfig{});
  const std::vector<std::uint8_t> fbytes(filtered->body.begin(), filtered->body.end());
  CHECK(decode_image(fbytes) == quantized(*direct.stage("filtered")));

  auto enhanced = c.Get("/api/sessions/" + id + "/image?stage=enhanced");
  REQUIRE(enhanced);
  CHECK(enhanced->status == 404);
  CHECK(error_code(json::parse(enhanced->body)) == "UnknownStage");
}

TEST_CASE("service errors") {
  LiveService live({});
  auto c = live.client();
  auto missing = c.Get("/api/sessions/0000000000000000");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  const json body = json::parse(missing->body);
  CHECK(error_code(body) == "UnknownSession");
  CHECK(body["error"]["stage"].is_null());
  CHECK(body["error"]["message"].is_string());

  auto junk = c.Post("/api/sessions", std::string("not an image"), "application/octet-stream");
  REQUIRE(junk);
  CHECK(junk->status == 415);
  CHECK(error_code(json::parse(junk->body)) == "UnsupportedFormat");

  const std::string id = upload(c, png_bytes(synth_gel(clean_spec(4)).image));
  const std::string base = "/api/sessions/" + id;
  auto broken = c.Post(base + "/analyze", std::string("{nope"), "application/json");
  REQUIRE(broken);
  CHECK(broken->status == 400);
  CHECK(error_code(json::parse(broken->body)) == "MalformedBody");
  CHECK(error_code(post_json(c, base + "/analyze", json::array(), 400)) == "MalformedBody");
  CHECK(error_code(post_json(c, base + "/ratio", {{"ref", 1}}, 400)) == "MalformedBody");
  CHECK(error_code(post_json(c, base + "/ratio", {{"ref", 1}, {"n", 999}}, 404)) == "UnknownBand");
  CHECK(error_code(post_json(c, base + "/report", {{"reference", 999}}, 404)) == "UnknownBand");
  CHECK(error_code(post_json(c, base + "/analyze", {{"colour", "blue"}}, 400)) == "InvalidArgument");

  const std::string flat = upload(c, png_bytes(GrayImage::filled(32, 32, 7)));
  const json failed = post_json(c, "/api/sessions/" + flat + "/analyze", json::object(), 422);
  CHECK(error_code(failed) == "ConstantImage");
  CHECK(failed["error"]["stage"].is_string());
}

TEST_CASE("service evicts the least recently used session") {
  ServiceOptions opt;
  opt.max_sessions = 2;
  LiveService live(opt);
  auto c = live.client();
  const std::string img = png_bytes(GrayImage::filled(8, 8, 3));
  const std::string a = upload(c, img), b = upload(c, img);
  CHECK(a != b);
  REQUIRE(c.Get("/api/sessions/" + a));  // a is now more recent than b
  const std::string third = upload(c, img);
  CHECK(c.Get("/api/sessions/" + a)->status == 200);
  CHECK(c.Get("/api/sessions/" + third)->status == 200);
  CHECK(c.Get("/api/sessions/" + b)->status == 404);
  CHECK(live.service().sessions().size() == 2);
}

TEST_CASE("service serves a static directory") {
  scratch::Dir dir("svc_static");
  {
    std::ofstream(dir / "index.html") << "<p>gel</p>";
  }
  ServiceOptions opt;
  opt.static_dir = dir.path();
  LiveService live(opt);
  auto c = live.client();
  auto page = c.Get("/index.html");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(page->body == "<p>gel</p>");
  auto api = c.Get("/api/sessions/ffffffffffffffff");
  REQUIRE(api);
  CHECK(api->status == 404);

  ServiceOptions missing;
  missing.static_dir = dir / "absent";
  CHECK_THROWS_AS(Service{missing}, Error);
}

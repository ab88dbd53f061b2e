#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gelscan/error.hpp"
#include "gelscan/image_io.hpp"
#include "gelscan/morph.hpp"
#include "gelscan/pipeline.hpp"
#include "gelscan/report.hpp"
#include "gelscan/synthgel.hpp"

namespace py = pybind11;
using namespace gelscan;

namespace {

GrayImage image_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a,
                           int bit_depth) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array (rows, columns)");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  std::vector<double> px(a.data(), a.data() + a.size());
  return GrayImage(w, h, std::move(px), bit_depth);
}

py::array_t<double> image_to_array(const GrayImage& img) {
  py::array_t<double> out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

PipelineConfig config_from_text(const std::string& deltas) {
  return config_from_json(nlohmann::json::parse(deltas));
}

// Runs the pipeline and returns (summary JSON, {stage: array}).
py::tuple analyze(const GrayImage& img, const std::string& deltas) {
  const PipelineConfig cfg = config_from_text(deltas);
  PipelineResult result;
  {
    py::gil_scoped_release release;
    result = run_pipeline(img, cfg);
  }
  const BandReport rep = make_report({}, cfg, result);
  nlohmann::ordered_json j;
  j["config"] = config_to_json(cfg);
  j["decision"] = decision_to_json(rep.decision);
  auto bands = nlohmann::ordered_json::array();
  for (const auto& b : rep.bands) bands.push_back(band_to_json(b));
  j["bands"] = std::move(bands);
  py::dict stages;
  for (const auto& s : result.stages) stages[py::str(s.name)] = image_to_array(s.image);
  return py::make_tuple(j.dump(), stages);
}

std::string report_for_file(const std::string& path, const std::string& deltas,
                            std::optional<std::int32_t> reference) {
  const PipelineConfig cfg = config_from_text(deltas);
  const auto bytes = read_file_bytes(path);
  const GrayImage img = decode_image(bytes);
  const PipelineResult result = run_pipeline(img, cfg);
  return report_to_text(make_report({path, sha256_hex(bytes)}, cfg, result, reference));
}

}  // namespace

PYBIND11_MODULE(_gelscan, m) {
  m.doc() = "Gel band detection core";

  static py::exception<Error> error_type(m, "GelscanError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      exc.attr("stage") = e.stage();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<GrayImage>(m, "Image")
      .def(py::init(&image_from_array), py::arg("pixels"), py::arg("bit_depth") = 8)
      .def_property_readonly("width", &GrayImage::width)
      .def_property_readonly("height", &GrayImage::height)
      .def_property_readonly("bit_depth", &GrayImage::bit_depth)
      .def("to_array", &image_to_array)
      .def("save", [](const GrayImage& img, const std::filesystem::path& p) { save_image(img, p); })
      .def("__eq__", [](const GrayImage& a, const GrayImage& b) { return a == b; })
      .def("__repr__", [](const GrayImage& img) {
        return "<Image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) + ">";
      });

  m.def("load_image", [](const std::filesystem::path& p) { return load_image(p); });
  m.def("decode_image", [](const py::bytes& b) {
    const std::string s = b;
    return decode_image(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  });

  m.def("erode", [](const GrayImage& i, const std::string& se) { return erode(i, StructuringElement::parse(se)); });
  m.def("dilate", [](const GrayImage& i, const std::string& se) { return dilate(i, StructuringElement::parse(se)); });
  m.def("open", [](const GrayImage& i, const std::string& se) { return open(i, StructuringElement::parse(se)); });
  m.def("close", [](const GrayImage& i, const std::string& se) { return close(i, StructuringElement::parse(se)); });
  m.def("top_hat", [](const GrayImage& i, const std::string& se) { return top_hat(i, StructuringElement::parse(se)); });
  m.def("bottom_hat", [](const GrayImage& i, const std::string& se) {
    return bottom_hat(i, StructuringElement::parse(se));
  });
  m.def("median_filter", &median_filter, py::arg("image"), py::arg("window"));
  m.def("enhance", [](const GrayImage& i, const std::string& se) { return enhance(i, StructuringElement::parse(se)); });
  m.def("apply_threshold", &apply_threshold);
  m.def("std_profile", [](const GrayImage& i, const std::string& axis) {
    const StdProfile p = std_profile(i, axis == "rows" ? ProfileAxis::AcrossRows : ProfileAxis::AcrossColumns);
    return p.values;
  }, py::arg("image"), py::arg("axis") = "cols");

  m.def("ratio_size", &ratio_size, py::arg("area_n"), py::arg("area_ref"));

  m.def("_analyze", &analyze);
  m.def("_report_for_file", &report_for_file, py::arg("path"), py::arg("deltas"),
        py::arg("reference") = std::nullopt);
  m.def("_synth", [](const std::string& preset, std::uint64_t seed) {
    const SyntheticSpec spec = preset == "faint" ? faint_spec(seed) : clean_spec(seed);
    SyntheticGel gel = synth_gel(spec);
    return py::make_tuple(gel.image, truth_to_json(gel.truth).dump());
  });
}

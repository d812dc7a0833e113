#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "wirefit/cnn.hpp"
#include "wirefit/errors.hpp"
#include "wirefit/estimate.hpp"
#include "wirefit/field.hpp"
#include "wirefit/fit.hpp"
#include "wirefit/image.hpp"
#include "wirefit/pipeline.hpp"
#include "wirefit/simplex.hpp"
#include "wirefit/verify.hpp"

namespace py = pybind11;
using namespace wirefit;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::tuple point(FieldPoint p) { return py::make_tuple(p.x, p.y); }

FieldPoint to_point(const py::sequence& s) {
    if (py::len(s) != 2) throw InvalidArgument("expected an (x, y) pair");
    return {s[0].cast<double>(), s[1].cast<double>()};
}

FloatArray to_array(const MfiImage& img) {
    const auto n = static_cast<py::ssize_t>(img.size());
    FloatArray out({n, n});
    std::copy(img.data().begin(), img.data().end(), out.mutable_data());
    return out;
}

MfiImage from_array(const FrameGeometry& frame, const FloatArray& data, double noise_sigma) {
    if (data.ndim() != 2 || data.shape(0) != data.shape(1) ||
        static_cast<std::size_t>(data.shape(0)) != frame.size) {
        throw InvalidArgument("data must be a size x size array matching the frame");
    }
    return MfiImage(frame, std::vector<float>(data.data(), data.data() + data.size()), noise_sigma);
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
    const std::string s = b;
    return {s.begin(), s.end()};
}

std::string repr(const SegmentParams& p) {
    std::ostringstream os;
    os.precision(10);
    os << "SegmentParams(x0=" << p.x0 << ", y0=" << p.y0 << ", z0=" << p.z0 << ", length=" << p.length
       << ", current=" << p.current << ", axis=" << to_string(p.axis) << ")";
    return os.str();
}

}  // namespace

PYBIND11_MODULE(_wirefit, m) {
    m.doc() = "Current-segment reconstruction from Bz magnetic field images";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<FormatError>(m, "FormatError", error.ptr());
    py::register_exception<UndefinedSnr>(m, "UndefinedSnr", error.ptr());
    py::register_exception<ClassificationFailure>(m, "ClassificationFailure", error.ptr());
    py::register_exception<EstimationError>(m, "EstimationError", error.ptr());

    py::enum_<Axis>(m, "Axis").value("X", Axis::X).value("Y", Axis::Y);

    py::class_<SegmentParams>(m, "SegmentParams")
        .def(py::init<double, double, double, double, double, Axis>(), py::arg("x0"), py::arg("y0"), py::arg("z0"),
             py::arg("length"), py::arg("current"), py::arg("axis"))
        .def_readwrite("x0", &SegmentParams::x0)
        .def_readwrite("y0", &SegmentParams::y0)
        .def_readwrite("z0", &SegmentParams::z0)
        .def_readwrite("length", &SegmentParams::length)
        .def_readwrite("current", &SegmentParams::current)
        .def_readwrite("axis", &SegmentParams::axis)
        .def_property_readonly("beta", &SegmentParams::beta)
        .def(py::self == py::self)
        .def("__repr__", &repr);

    m.def("bz_at", [](const SegmentParams& s, double x, double y) { return bz_at(s, {x, y}); }, py::arg("seg"),
          py::arg("x"), py::arg("y"), "Bz in tesla at sensor point (x, y) in micrometres");
    m.def("pp_ratio", &pp_ratio, py::arg("beta"));
    m.def("pp_distance", &pp_distance, py::arg("length"), py::arg("z0"));
    m.def("depth_from_pp", &depth_from_pp, py::arg("pp"), py::arg("beta"));
    m.def("peak_current_estimate", &peak_current_estimate, py::arg("peak_field"), py::arg("length"), py::arg("z0"));

    py::class_<FrameGeometry>(m, "FrameGeometry")
        .def(py::init([](std::size_t size, double pitch, const py::sequence& origin) {
                 return FrameGeometry{size, pitch, to_point(origin)};
             }),
             py::arg("size"), py::arg("pitch"), py::arg("origin"))
        .def_readwrite("size", &FrameGeometry::size)
        .def_readwrite("pitch", &FrameGeometry::pitch)
        .def_property(
            "origin", [](const FrameGeometry& f) { return point(f.origin); },
            [](FrameGeometry& f, const py::sequence& o) { f.origin = to_point(o); })
        .def("position", [](const FrameGeometry& f, std::size_t r, std::size_t c) { return point(f.position(r, c)); })
        .def(py::self == py::self);
    m.def("default_frame", &default_frame, py::arg("seg"), py::arg("size") = kDefaultImageSize);

    py::class_<MfiImage>(m, "MfiImage")
        .def(py::init(&from_array), py::arg("frame"), py::arg("data"), py::arg("noise_sigma") = 0.0)
        .def_property_readonly("size", &MfiImage::size)
        .def_property_readonly("pitch", &MfiImage::pitch)
        .def_property_readonly("origin", [](const MfiImage& i) { return point(i.origin()); })
        .def_property_readonly("frame", &MfiImage::frame)
        .def_property_readonly("noise_sigma", &MfiImage::noise_sigma)
        .def_property_readonly("data", &to_array, "Copy of the pixels, rows along y")
        .def("position", [](const MfiImage& i, std::size_t r, std::size_t c) { return point(i.position(r, c)); })
        .def(py::self == py::self);

    py::class_<ExtremaReport>(m, "ExtremaReport")
        .def_property_readonly("max_pos", [](const ExtremaReport& e) { return point(e.max_pos); })
        .def_property_readonly("min_pos", [](const ExtremaReport& e) { return point(e.min_pos); })
        .def_readonly("max_val", &ExtremaReport::max_val)
        .def_readonly("min_val", &ExtremaReport::min_val);

    m.def("render", py::overload_cast<const SegmentParams&, const FrameGeometry&>(&render), py::arg("seg"),
          py::arg("frame"));
    m.def("add_noise", &add_noise, py::arg("image"), py::arg("sigma"), py::arg("seed"));
    m.def("find_extrema", &find_extrema, py::arg("image"));
    m.def("snr", &snr, py::arg("image"));
    m.def("encode_mfi", [](const MfiImage& i) { return to_bytes(encode_mfi(i)); }, py::arg("image"));
    m.def("decode_mfi", [](const py::bytes& b) { return decode_mfi(from_bytes(b)); }, py::arg("data"));
    m.def("write_mfi", py::overload_cast<const MfiImage&, const std::filesystem::path&>(&write_mfi),
          py::arg("image"), py::arg("path"));
    m.def("read_mfi", py::overload_cast<const std::filesystem::path&>(&read_mfi), py::arg("path"));

    py::enum_<EstimateSource>(m, "EstimateSource")
        .value("Neural", EstimateSource::Neural)
        .value("AnalyticFallback", EstimateSource::AnalyticFallback);

    py::class_<EstimateBundle>(m, "EstimateBundle")
        .def_readonly("params", &EstimateBundle::params)
        .def_readonly("beta", &EstimateBundle::beta)
        .def_readonly("pp", &EstimateBundle::pp)
        .def_readonly("source", &EstimateBundle::source);

    py::class_<BetaEstimator>(m, "BetaEstimator")
        .def("estimate",
             [](const BetaEstimator& e, const MfiImage& img) {
                 const BetaAxis ba = e.estimate(img);
                 return py::make_tuple(ba.beta, ba.axis);
             })
        .def_property_readonly("source", &BetaEstimator::source);
    py::class_<AnalyticBetaEstimator, BetaEstimator>(m, "AnalyticBetaEstimator").def(py::init<>());

    m.def("classify_axis_analytic", &classify_axis_analytic, py::arg("image"));
    m.def("fallback_beta_grid", &fallback_beta_grid);
    m.def("estimate_from_beta", &estimate_from_beta, py::arg("image"), py::arg("beta"), py::arg("axis"),
          py::arg("source") = EstimateSource::AnalyticFallback);
    m.def("initial_estimate", &initial_estimate, py::arg("image"), py::arg("estimator"));

    py::class_<SimplexConfig>(m, "SimplexConfig")
        .def(py::init<>())
        .def_readwrite("reflection", &SimplexConfig::reflection)
        .def_readwrite("expansion", &SimplexConfig::expansion)
        .def_readwrite("contraction", &SimplexConfig::contraction)
        .def_readwrite("shrink", &SimplexConfig::shrink)
        .def_readwrite("f_tol", &SimplexConfig::f_tol)
        .def_readwrite("x_tol", &SimplexConfig::x_tol)
        .def_readwrite("max_evaluations", &SimplexConfig::max_evaluations);

    py::class_<Objective>(m, "Objective")
        .def(py::init<MfiImage, Axis, double>(), py::arg("data"), py::arg("axis"), py::arg("sigma_b"))
        .def(py::init<MfiImage, Axis>(), py::arg("data"), py::arg("axis"))
        .def_property_readonly("axis", &Objective::axis)
        .def_property_readonly("sigma_b", &Objective::sigma_b);

    py::class_<FitReport>(m, "FitReport")
        .def_readonly("params", &FitReport::params)
        .def_readonly("chi2", &FitReport::chi2)
        .def_readonly("iterations", &FitReport::iterations)
        .def_readonly("evaluations", &FitReport::evaluations)
        .def_readonly("converged", &FitReport::converged)
        .def_readonly("residual", &FitReport::residual)
        .def_readonly("chi2_history", &FitReport::chi2_history);

    m.def("noise_scale", &noise_scale, py::arg("image"));
    m.def("chi2", &chi2, py::arg("objective"), py::arg("params"));
    m.def("residual", &residual, py::arg("objective"), py::arg("params"));
    m.def("minimize", &minimize, py::arg("objective"), py::arg("start"), py::arg("config") = SimplexConfig{},
          py::call_guard<py::gil_scoped_release>());

    py::class_<PipelineResult>(m, "PipelineResult")
        .def_readonly("estimate", &PipelineResult::estimate)
        .def_readonly("fit", &PipelineResult::fit);
    m.def(
        "fit_image",
        [](const MfiImage& img, const BetaEstimator* estimator, const SimplexConfig& cfg) {
            py::gil_scoped_release release;
            const AnalyticBetaEstimator fallback;
            return fit_image(img, estimator ? *estimator : fallback, cfg);
        },
        py::arg("image"), py::arg("estimator") = nullptr, py::arg("config") = SimplexConfig{},
        "Initial estimate followed by the simplex fit; the analytic estimator is used when none is given");

    py::enum_<HeadKind>(m, "HeadKind")
        .value("Regression", HeadKind::Regression)
        .value("Classification", HeadKind::Classification);
    py::enum_<LayerKind>(m, "LayerKind").value("Conv", LayerKind::Conv).value("Dense", LayerKind::Dense);

    py::class_<LayerParams>(m, "LayerParams")
        .def_readwrite("kind", &LayerParams::kind)
        .def_readwrite("dims", &LayerParams::dims)
        .def_readwrite("weights", &LayerParams::weights)
        .def_readwrite("bias", &LayerParams::bias);

    py::class_<WeightFile>(m, "WeightFile")
        .def_readwrite("version", &WeightFile::version)
        .def_readwrite("head", &WeightFile::head)
        .def_readwrite("layers", &WeightFile::layers)
        .def(py::self == py::self);

    m.def("zero_weights", &zero_weights, py::arg("head"));
    m.def("validate_weights", &validate, py::arg("weights"));
    m.def("encode_weights", [](const WeightFile& w) { return to_bytes(encode_weights(w)); }, py::arg("weights"));
    m.def("decode_weights", [](const py::bytes& b) { return decode_weights(from_bytes(b)); }, py::arg("data"));
    m.def("save_weights", &save_weights, py::arg("weights"), py::arg("path"));
    m.def("load_weights", &load_weights, py::arg("path"));
    m.def(
        "preprocess",
        [](const MfiImage& img) {
            const auto t = preprocess(img);
            const auto n = static_cast<py::ssize_t>(kCnnInputSize);
            FloatArray out({n, n});
            std::copy(t.begin(), t.end(), out.mutable_data());
            return out;
        },
        py::arg("image"));
    m.def("infer_beta", &infer_beta, py::arg("weights"), py::arg("image"));
    m.def(
        "infer_axis",
        [](const WeightFile& w, const MfiImage& img) {
            const AxisPrediction p = infer_axis(w, img);
            return py::make_tuple(p.axis, p.confidence, py::make_tuple(p.probabilities[0], p.probabilities[1]));
        },
        py::arg("weights"), py::arg("image"), "(axis, confidence, (p_x, p_y))");
    py::class_<NeuralBetaEstimator, BetaEstimator>(m, "NeuralBetaEstimator")
        .def(py::init<WeightFile, std::optional<WeightFile>>(), py::arg("regression"),
             py::arg("classification") = std::nullopt);

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("name", &CheckResult::name)
        .def_readonly("measured", &CheckResult::measured)
        .def_readonly("tolerance", &CheckResult::tolerance)
        .def_readonly("passed", &CheckResult::passed)
        .def_readonly("seconds", &CheckResult::seconds);
    m.def("bz_quadrature", [](const SegmentParams& s, double x, double y) { return bz_quadrature(s, {x, y}); },
          py::arg("seg"), py::arg("x"), py::arg("y"));
    m.def("run_self_checks", &run_self_checks, py::call_guard<py::gil_scoped_release>());
}

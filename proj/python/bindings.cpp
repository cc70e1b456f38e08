#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "nomadet/config.hpp"
#include "nomadet/datapipe.hpp"
#include "nomadet/density.hpp"
#include "nomadet/error.hpp"
#include "nomadet/nn/checkpoint.hpp"
#include "nomadet/nn/loss.hpp"
#include "nomadet/nn/train.hpp"
#include "nomadet/wavelet.hpp"

namespace py = pybind11;
using namespace nomadet;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using FArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

SignalFrame to_frame(const CArray& a, int sps) {
    if (a.ndim() != 1) throw ShapeError("samples must be a 1-d complex array");
    return SignalFrame(std::vector<cplx>(a.data(), a.data() + a.size()), sps);
}

CArray to_array(const SignalFrame& f) {
    CArray out(static_cast<py::ssize_t>(f.size()));
    std::copy(f.samples().begin(), f.samples().end(), out.mutable_data());
    return out;
}

FArray grid_array(const DensityDiagram& d) {
    FArray out({d.grid_size, d.grid_size});
    std::copy(d.grid.begin(), d.grid.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_nomadet, m) {
    m.doc() = "NOMA far-UT modulation detection: simulation, preprocessing, ResNet inference";

    // Translators registered later are tried first, so the base goes first.
    auto& base = py::register_exception<Error>(m, "NomadetError");
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());

    m.def("scheme_names", [] {
        std::vector<std::string> out;
        for (auto s : kAllSchemes) out.emplace_back(scheme_name(s));
        return out;
    });

    m.def("default_scenario", [] { return to_json(NomaScenario{}).dump(); });

    m.def(
        "generate_frame",
        [](const std::string& scenario_json, std::uint64_t seed) {
            const auto sc = scenario_from_json(Json::parse(scenario_json));
            const auto f = generate_noma_frame(sc, seed);
            return py::make_tuple(to_array(f.received), f.received.samples_per_symbol(),
                                  std::string(scheme_name(f.label)));
        },
        py::arg("scenario_json"), py::arg("seed"));

    m.def(
        "denoise",
        [](const CArray& samples, int sps, const std::string& wavelet_json) {
            const auto spec = wavelet_json.empty() ? WaveletSpec{} : wavelet_from_json(Json::parse(wavelet_json));
            return to_array(denoise_frame(to_frame(samples, sps), spec));
        },
        py::arg("samples"), py::arg("samples_per_symbol") = 1, py::arg("wavelet_json") = "");

    m.def(
        "symbol_centers",
        [](const CArray& samples, int sps) { return to_array(sample_symbol_centers(to_frame(samples, sps))); },
        py::arg("samples"), py::arg("samples_per_symbol"));

    m.def(
        "density_diagram",
        [](const CArray& samples, int grid) { return grid_array(density_diagram(to_frame(samples, 1), grid)); },
        py::arg("samples"), py::arg("grid_size") = kDefaultGridSize);

    m.def(
        "load_dataset",
        [](const std::string& path) {
            const auto d = load_dataset(path);
            const auto n = static_cast<py::ssize_t>(d.samples.size());
            const auto g = static_cast<py::ssize_t>(d.grid_size);
            FArray grids({n, g, g});
            py::array_t<std::uint8_t> labels(n);
            py::array_t<float> snr(n);
            py::array_t<std::uint64_t> seeds(n);
            const std::size_t px = static_cast<std::size_t>(d.grid_size) * d.grid_size;
            for (std::size_t i = 0; i < d.samples.size(); ++i) {
                const auto& s = d.samples[i];
                std::copy(s.diagram.grid.begin(), s.diagram.grid.end(), grids.mutable_data() + i * px);
                labels.mutable_data()[i] = s.label;
                snr.mutable_data()[i] = s.snr_db;
                seeds.mutable_data()[i] = s.seed;
            }
            return py::dict(py::arg("grids") = grids, py::arg("labels") = labels, py::arg("snr_db") = snr,
                            py::arg("seeds") = seeds, py::arg("scenario_digest") = d.scenario_digest);
        },
        py::arg("path"));

    py::class_<nn::Model>(m, "Model")
        .def_static("load", [](const std::string& path) { return nn::load_checkpoint(path); }, py::arg("path"))
        .def_property_readonly("parameter_count", [](nn::Model& self) { return self.parameter_count(); })
        .def_property_readonly("input_size", [](const nn::Model& self) { return self.config().input_size; })
        .def(
            "predict",
            [](const nn::Model& self, const FArray& grids) {
                if (grids.ndim() != 3) throw ShapeError("grids must be N x S x S");
                const int n = static_cast<int>(grids.shape(0)), s = static_cast<int>(grids.shape(1));
                if (grids.shape(2) != s) throw ShapeError("grids must be square");
                const auto logits =
                    self.infer(nn::Tensor<float>({n, 1, s, s}, std::span<const float>(grids.data(), grids.size())));
                const auto p = nn::softmax(logits);
                py::array_t<float> out({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(p.dim(1))});
                std::copy(p.values().begin(), p.values().end(), out.mutable_data());
                return out;
            },
            py::arg("grids"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}

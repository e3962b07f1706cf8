#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spseg/classifier.hpp"
#include "spseg/color.hpp"
#include "spseg/descriptor.hpp"
#include "spseg/errors.hpp"
#include "spseg/evaluation.hpp"
#include "spseg/image_io.hpp"
#include "spseg/mrf.hpp"
#include "spseg/pipeline.hpp"
#include "spseg/presegment.hpp"
#include "spseg/report.hpp"

namespace py = pybind11;
using namespace spseg;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

template <typename Grid>
Grid grid_from_array(const DoubleArray& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected an H x W x 3 array");
    Grid g(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), g.data.begin());
    return g;
}

DoubleArray array_from_grid(const ColorGrid& g) {
    DoubleArray a({static_cast<py::ssize_t>(g.height), static_cast<py::ssize_t>(g.width), py::ssize_t{3}});
    std::copy(g.data.begin(), g.data.end(), a.mutable_data());
    return a;
}

Matrix matrix_from_array(const DoubleArray& a) {
    if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
}

DoubleArray array_from_matrix(const Matrix& m) {
    DoubleArray a({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
    std::copy(m.data().begin(), m.data().end(), a.mutable_data());
    return a;
}

IntArray array_from_labels(const std::vector<int>& labels, int width, int height) {
    IntArray a({static_cast<py::ssize_t>(height), static_cast<py::ssize_t>(width)});
    std::copy(labels.begin(), labels.end(), a.mutable_data());
    return a;
}

std::vector<int> labels_from_array(const IntArray& a, int& width, int& height) {
    if (a.ndim() != 2) throw py::value_error("expected an H x W label array");
    height = static_cast<int>(a.shape(0));
    width = static_cast<int>(a.shape(1));
    return {a.data(), a.data() + a.size()};
}

LabelMap label_map_from_array(const IntArray& a) {
    int w = 0, h = 0;
    auto ids = labels_from_array(a, w, h);
    LabelMap lm(w, h);
    std::copy(ids.begin(), ids.end(), lm.data.begin());
    compact_labels(lm);
    return lm;
}

BinaryMask mask_from_array(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw py::value_error("expected an H x W mask");
    BinaryMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.size(); ++i) m.data[i] = a.data()[i] ? 1 : 0;
    return m;
}

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

AdjacencyGraph graph_from_lists(const std::vector<std::vector<int>>& neighbors,
                                const std::vector<std::vector<double>>& weights) {
    if (neighbors.size() != weights.size()) throw py::value_error("neighbors and weights differ in length");
    AdjacencyGraph g;
    g.neighbors = neighbors;
    g.weights = weights;
    for (std::size_t i = 0; i < neighbors.size(); ++i)
        if (neighbors[i].size() != weights[i].size()) throw py::value_error("ragged neighbor weights");
    return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Superpixel SVM/MRF segmentation core";

    py::register_exception<Error>(m, "Error");
    py::register_exception<IoError>(m, "IoError", m.attr("Error"));
    py::register_exception<FormatError>(m, "FormatError", m.attr("Error"));
    py::register_exception<OverflowError>(m, "LabelOverflowError", m.attr("Error"));
    py::register_exception<InvalidParams>(m, "InvalidParams", m.attr("Error"));
    py::register_exception<DegenerateLabels>(m, "DegenerateLabels", m.attr("Error"));
    py::register_exception<SingleClass>(m, "SingleClass", m.attr("Error"));
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", m.attr("Error"));
    py::register_exception<EmptyMask>(m, "EmptyMask", m.attr("Error"));
    py::register_exception<EmptyRegion>(m, "EmptyRegion", m.attr("Error"));
    py::register_exception<LengthMismatch>(m, "LengthMismatch", m.attr("Error"));

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_property("superpixels", [](const PipelineConfig& c) { return c.slic.superpixels; },
                      [](PipelineConfig& c, int v) { c.slic.superpixels = v; })
        .def_property("compactness", [](const PipelineConfig& c) { return c.slic.compactness; },
                      [](PipelineConfig& c, double v) { c.slic.compactness = v; })
        .def_property("slic_iters", [](const PipelineConfig& c) { return c.slic.max_iters; },
                      [](PipelineConfig& c, int v) { c.slic.max_iters = v; })
        .def_property("min_region_frac", [](const PipelineConfig& c) { return c.slic.min_region_frac; },
                      [](PipelineConfig& c, double v) { c.slic.min_region_frac = v; })
        .def_property("gamma", [](const PipelineConfig& c) { return c.svm.gamma; },
                      [](PipelineConfig& c, double v) { c.svm.gamma = v; })
        .def_property("c", [](const PipelineConfig& c) { return c.svm.c; },
                      [](PipelineConfig& c, double v) { c.svm.c = v; })
        .def_property("mrf_alpha", [](const PipelineConfig& c) { return c.mrf.alpha; },
                      [](PipelineConfig& c, double v) { c.mrf.alpha = v; })
        .def_property("mrf_tol", [](const PipelineConfig& c) { return c.mrf.tol; },
                      [](PipelineConfig& c, double v) { c.mrf.tol = v; })
        .def_property("mrf_max_sweeps", [](const PipelineConfig& c) { return c.mrf.max_sweeps; },
                      [](PipelineConfig& c, int v) { c.mrf.max_sweeps = v; })
        .def_readwrite("max_iters", &PipelineConfig::max_outer_iters)
        .def_property("texture_t1", [](const PipelineConfig& c) { return c.texture.t1; },
                      [](PipelineConfig& c, double v) { c.texture.t1 = v; })
        .def_property("texture_t2", [](const PipelineConfig& c) { return c.texture.t2; },
                      [](PipelineConfig& c, double v) { c.texture.t2 = v; })
        .def("to_dict", [](const PipelineConfig& c) { return json_to_py(to_json(c)); });

    // image-io
    m.def("load_image", [](const std::string& path) { return array_from_grid(load_image(path)); });
    m.def("save_image", [](const DoubleArray& img, const std::string& path) {
        save_image(grid_from_array<RasterImage>(img), path);
    });
    m.def("load_mask", [](const std::string& path) {
        const BinaryMask mask = load_mask(path);
        py::array_t<bool> a({static_cast<py::ssize_t>(mask.height), static_cast<py::ssize_t>(mask.width)});
        for (std::size_t i = 0; i < mask.pixel_count(); ++i) a.mutable_data()[i] = mask.data[i] != 0;
        return a;
    });
    m.def("save_label_map", [](const IntArray& labels, const std::string& path) {
        int w = 0, h = 0;
        auto ids = labels_from_array(labels, w, h);
        LabelMap lm(w, h);
        std::copy(ids.begin(), ids.end(), lm.data.begin());
        lm.num_labels = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
        save_label_map(lm, path);
    });
    m.def("load_label_map", [](const std::string& path) {
        const LabelMap lm = load_label_map(path);
        return array_from_labels(std::vector<int>(lm.data.begin(), lm.data.end()), lm.width, lm.height);
    });
    m.def("rgb_to_lab", [](const DoubleArray& img) { return array_from_grid(rgb_to_lab(grid_from_array<RasterImage>(img))); });
    m.def("lab_to_rgb", [](const DoubleArray& lab) { return array_from_grid(lab_to_rgb(grid_from_array<LabImage>(lab))); });

    // presegment
    m.def(
        "slic",
        [](const DoubleArray& lab, int superpixels, double compactness, int max_iters, double min_region_frac) {
            const SuperpixelPartition p =
                slic(grid_from_array<LabImage>(lab), SlicParams{superpixels, compactness, max_iters, min_region_frac});
            return array_from_labels(p.labels, p.width, p.height);
        },
        py::arg("lab"), py::arg("superpixels") = 400, py::arg("compactness") = 10.0, py::arg("max_iters") = 10,
        py::arg("min_region_frac") = 0.25);

    // descriptor
    m.def("color_moments", [](const DoubleArray& pixels) {
        if (pixels.ndim() != 2 || pixels.shape(1) != 3) throw py::value_error("expected an N x 3 array");
        std::vector<Rgb> px(static_cast<std::size_t>(pixels.shape(0)));
        for (std::size_t i = 0; i < px.size(); ++i)
            px[i] = {pixels.data()[3 * i], pixels.data()[3 * i + 1], pixels.data()[3 * i + 2]};
        const auto mom = color_moments(px);
        return std::vector<double>(mom.begin(), mom.end());
    });
    m.def(
        "texture_codes",
        [](const DoubleArray& lab, double t1, double t2) {
            const LabImage l = grid_from_array<LabImage>(lab);
            const auto codes = texture_codes(l, TextureParams{t1, t2});
            return array_from_labels(std::vector<int>(codes.begin(), codes.end()), l.width, l.height);
        },
        py::arg("lab"), py::arg("t1") = 5.0, py::arg("t2") = 20.0);
    m.def(
        "describe",
        [](const DoubleArray& img, const IntArray& labels, double t1, double t2) {
            const RasterImage rgb = grid_from_array<RasterImage>(img);
            const LabImage lab = rgb_to_lab(rgb);
            int w = 0, h = 0;
            auto ids = labels_from_array(labels, w, h);
            SuperpixelPartition p = partition_from_labels(w, h, std::move(ids));
            superpixel_stats(p, rgb, lab);
            const auto codes = texture_codes(lab, TextureParams{t1, t2});
            return array_from_matrix(describe_all(p, rgb, codes));
        },
        py::arg("image"), py::arg("labels"), py::arg("t1") = 5.0, py::arg("t2") = 20.0);

    // classifier
    m.def("standardize", [](const DoubleArray& x) { return array_from_matrix(standardize(matrix_from_array(x)).first); });
    m.def(
        "train_binary_svm",
        [](const DoubleArray& x, const std::vector<int>& y, double c, double gamma) {
            const SvmModel model = train_binary_svm(matrix_from_array(x), y, SvmParams{c, gamma});
            py::dict d;
            d["alpha"] = model.alpha;
            d["bias"] = model.bias;
            d["support"] = model.support;
            return d;
        },
        py::arg("x"), py::arg("y"), py::arg("c") = 1.0, py::arg("gamma") = 0.001);
    m.def("platt_fit", [](const std::vector<double>& scores, const std::vector<int>& y) {
        const PlattParams p = platt_fit(scores, y);
        return py::make_tuple(p.a, p.b);
    });
    m.def(
        "classify",
        [](const DoubleArray& x, const std::vector<int>& labels, double c, double gamma) {
            const Matrix features = matrix_from_array(x);
            return array_from_matrix(classify_all(train_bank(features, labels, SvmParams{c, gamma}), features));
        },
        py::arg("x"), py::arg("labels"), py::arg("c") = 1.0, py::arg("gamma") = 0.001,
        "Trains a one-vs-all bank on (x, labels) and returns in-sample probabilities.");

    // mrf
    m.def("adjacency", [](const IntArray& labels, const DoubleArray& image) {
        int w = 0, h = 0;
        auto ids = labels_from_array(labels, w, h);
        SuperpixelPartition p = partition_from_labels(w, h, std::move(ids));
        const RasterImage rgb = grid_from_array<RasterImage>(image);
        superpixel_stats(p, rgb, rgb_to_lab(rgb));
        AdjacencyGraph g = build_adjacency(p);
        edge_weights(g, p);
        return py::make_tuple(g.neighbors, g.weights);
    });
    m.def("kl", [](const std::vector<double>& p, const std::vector<double>& q) { return kl(p, q); });
    m.def(
        "regularize",
        [](const DoubleArray& likelihood, const std::vector<std::vector<int>>& neighbors,
           const std::vector<std::vector<double>>& weights, double alpha, double tol, int max_sweeps) {
            const RegularizeResult r = regularize(matrix_from_array(likelihood), graph_from_lists(neighbors, weights),
                                                  MrfParams{alpha, tol, max_sweeps});
            py::dict d;
            d["prior"] = array_from_matrix(r.state.prior);
            d["posterior"] = array_from_matrix(r.state.posterior);
            d["sweeps"] = r.sweeps;
            d["residual"] = r.residual;
            d["converged"] = r.converged;
            return d;
        },
        py::arg("likelihood"), py::arg("neighbors"), py::arg("weights"), py::arg("alpha") = 0.5,
        py::arg("tol") = 1e-6, py::arg("max_sweeps") = 100);
    m.def("energy", [](const DoubleArray& prior, const DoubleArray& posterior, const DoubleArray& likelihood,
                       const std::vector<std::vector<int>>& neighbors, const std::vector<std::vector<double>>& weights,
                       const std::vector<int>& hard_labels) {
        BeliefState st{matrix_from_array(prior), matrix_from_array(posterior), matrix_from_array(likelihood)};
        return energy(st, graph_from_lists(neighbors, weights), hard_labels);
    });

    // pipeline
    m.def(
        "segment",
        [](const DoubleArray& img, const PipelineConfig& config) {
            SegmentResult r;
            {
                py::gil_scoped_release release;
                r = run(grid_from_array<RasterImage>(img), config);
            }
            const LabelMap& lm = r.labels;
            return py::make_tuple(array_from_labels(std::vector<int>(lm.data.begin(), lm.data.end()), lm.width, lm.height),
                                  json_to_py(to_json(r.diagnostics, config)));
        },
        py::arg("image"), py::arg("config") = PipelineConfig{});

    // evaluation
    m.def("f_measure", &f_measure);
    m.def(
        "evaluate",
        [](const IntArray& labels, const std::vector<py::array_t<bool, py::array::c_style | py::array::forcecast>>& masks,
           int exact_limit) {
            std::vector<BinaryMask> ms;
            for (const auto& a : masks) ms.push_back(mask_from_array(a));
            return json_to_py(to_json(evaluate(label_map_from_array(labels), ms, exact_limit)));
        },
        py::arg("labels"), py::arg("masks"), py::arg("exact_limit") = 20);
}

// Python bindings. Arrays cross the boundary with one sample per ROW (the
// numpy convention); the C++ side stores one sample per column.

#include "pwu/bounds.hpp"
#include "pwu/data.hpp"
#include "pwu/errors.hpp"
#include "pwu/evaluation.hpp"
#include "pwu/geometry.hpp"
#include "pwu/linprog.hpp"
#include "pwu/model_io.hpp"
#include "pwu/train.hpp"
#include "pwu/unlearning.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pwu;

namespace {

Dataset make_dataset(const Mat& rows, const std::vector<int>& y, int num_classes) {
  Dataset d;
  d.x = rows.transpose();
  d.y = y;
  d.num_classes = num_classes;
  d.validate();
  return d;
}

py::dict report_dict(const UnlearnReport& r) {
  py::dict d;
  d["mode"] = to_string(r.mode);
  d["status"] = to_string(r.status);
  d["total"] = r.total;
  d["flip_rate"] = r.flip_rate;
  d["patch_count"] = r.patch_count;
  d["support_count"] = r.support_count;
  d["failed_clusters"] = r.failed_clusters;
  d["flipped"] = r.flipped;
  d["residual"] = r.residual;
  d["already_misclassified"] = r.already_misclassified;
  d["purity"] = r.purity;
  d["band"] = r.band;
  py::list its;
  for (const IterationRecord& it : r.iterations) {
    py::dict row;
    row["iteration"] = it.iteration;
    row["clusters"] = it.clusters;
    row["patches"] = it.patches;
    row["supports"] = it.supports;
    row["flipped"] = it.flipped;
    row["residual"] = it.residual;
    row["success"] = it.success;
    its.append(row);
  }
  d["iterations"] = its;
  d["timings"] = r.timings;
  d["text"] = report_to_text(r);
  return d;
}

UnlearnMode parse_mode(const std::string& m) {
  if (m == "single") {
    return UnlearnMode::single;
  }
  if (m == "multi" || m == "multipoint") {
    return UnlearnMode::multipoint;
  }
  if (m == "class") {
    return UnlearnMode::class_;
  }
  throw ValidationError("mode must be single, multipoint or class");
}

} // namespace

PYBIND11_MODULE(_pwu, m) {
  m.doc() = "Patch-based unlearning for ReLU classifiers";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<EmptyRegionError>(m, "EmptyRegionError", PyExc_RuntimeError);
  py::register_exception<SamplingError>(m, "SamplingError", PyExc_RuntimeError);

  py::class_<Box>(m, "Box")
      .def(py::init([](const Vec& lo, const Vec& hi) { return Box{lo, hi}; }), py::arg("lo"), py::arg("hi"))
      .def_readonly("lo", &Box::lo)
      .def_readonly("hi", &Box::hi)
      .def("contains", &Box::contains, py::arg("x"), py::arg("tol") = 0.0);

  py::class_<LinearRegion>(m, "LinearRegion")
      .def_property_readonly("a", [](const LinearRegion& r) { return Mat(r.a); })
      .def_readonly("b", &LinearRegion::b)
      .def_readonly("anchor", &LinearRegion::anchor)
      .def_readonly("domain", &LinearRegion::domain)
      .def_property_readonly("size", &LinearRegion::size)
      .def("contains", &LinearRegion::contains, py::arg("x"), py::arg("tol") = 1e-9)
      .def("sample", [](const LinearRegion& r, std::size_t n, std::uint64_t seed) { return sample_region(r, n, seed); },
           py::arg("n"), py::arg("seed") = 0);

  py::class_<PatchedModel>(m, "Model")
      .def_property_readonly("input_dim", [](const PatchedModel& pm) { return pm.featuremap.raw_dim; })
      .def_property_readonly("feature_dim", &PatchedModel::feature_dim)
      .def_property_readonly("num_classes", &PatchedModel::num_classes)
      .def_property_readonly("hidden_widths", [](const PatchedModel& pm) { return pm.base.hidden_widths(); })
      .def_property_readonly("patch_count", [](const PatchedModel& pm) { return pm.patches.size(); })
      .def_property_readonly("support_count", &PatchedModel::support_count)
      .def_readonly("domain", &PatchedModel::domain)
      .def("logits", [](const PatchedModel& pm, const Mat& rows) {
        Mat out(rows.rows(), pm.num_classes());
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
          out.row(i) = pm.forward(rows.row(i).transpose()).transpose();
        }
        return out;
      }, py::arg("x"), "Logits for raw inputs, one per row.")
      .def("predict", [](const PatchedModel& pm, const Mat& rows) { return predict_all(pm, rows.transpose()); },
           py::arg("x"))
      .def("features", [](const PatchedModel& pm, const Mat& rows) { return Mat(pm.features(rows.transpose()).transpose()); },
           py::arg("x"))
      .def("to_json", [](const PatchedModel& pm) { return model_to_json(pm); })
      .def("save", [](const PatchedModel& pm, const std::filesystem::path& p) { save_model(pm, p); }, py::arg("path"));

  m.def("load_model", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"));
  m.def("model_from_json", [](const std::string& s) { return model_from_json(s); }, py::arg("text"));

  m.def("load_data", [](const std::string& spec) {
    const DataBundle b = load_data(spec);
    py::dict d;
    d["train_x"] = Mat(b.train.x.transpose());
    d["train_y"] = b.train.y;
    d["test_x"] = Mat(b.test.x.transpose());
    d["test_y"] = b.test.y;
    d["num_classes"] = b.train.num_classes;
    d["domain"] = b.domain;
    return d;
  }, py::arg("spec"), "Load a data spec (blobs:..., idx:dir=..., csv:...); arrays have one sample per row.");

  m.def("train", [](const Mat& x, const std::vector<int>& y, int num_classes, std::vector<int> widths, int epochs,
                    double lr, int batch, std::uint64_t seed, std::optional<Box> domain) {
    TrainOptions o;
    o.widths = std::move(widths);
    o.epochs = epochs;
    o.lr = lr;
    o.batch = batch;
    o.seed = seed;
    const Mat cols = x.transpose();
    MlpNetwork net = train_mlp(cols, y, num_classes, o);
    return PatchedModel::wrap(std::move(net), domain ? *domain : Box::padded(cols));
  }, py::arg("x"), py::arg("y"), py::arg("num_classes"), py::arg("widths") = std::vector<int>{16, 16},
     py::arg("epochs") = 50, py::arg("lr") = 0.05, py::arg("batch") = 32, py::arg("seed") = 1,
     py::arg("domain") = std::nullopt);

  m.def("unlearn", [](const PatchedModel& model, const Mat& points, const std::vector<int>& labels,
                      const std::string& mode, int k, double delta, std::uint64_t seed, std::optional<Mat> guard,
                      std::optional<int> y_unlearn, const std::string& confusion, double epsilon,
                      double lambda_initial, double lambda_max, int max_iterations) {
    UnlearnRequest req;
    req.mode = parse_mode(mode);
    req.points = model.features(points.transpose());
    req.labels = labels;
    req.k = k;
    req.delta = delta;
    req.seed = seed;
    if (guard) {
      req.guard = model.features(guard->transpose());
    }
    req.y_unlearn = y_unlearn;
    if (req.mode == UnlearnMode::class_ && !req.y_unlearn && !labels.empty()) {
      req.y_unlearn = labels.front();
    }
    if (confusion != "constant" && confusion != "affine") {
      throw ValidationError("confusion must be constant or affine");
    }
    req.confusion = confusion == "affine" ? ConfusionMode::affine : ConfusionMode::constant;
    req.epsilon = epsilon;
    req.lambda.initial = lambda_initial;
    req.lambda.max = lambda_max;
    req.max_iterations = max_iterations;
    UnlearnResult res;
    {
      py::gil_scoped_release release;
      res = unlearn(model, req);
    }
    return py::make_tuple(std::move(res.model), report_dict(res.report));
  }, py::arg("model"), py::arg("points"), py::arg("labels"), py::arg("mode") = "multipoint", py::arg("k") = 1,
     py::arg("delta") = 0.9, py::arg("seed") = 0, py::arg("guard") = std::nullopt, py::arg("y_unlearn") = std::nullopt,
     py::arg("confusion") = "constant", py::arg("epsilon") = 1e-3, py::arg("lambda_initial") = 1e4,
     py::arg("lambda_max") = 1e8, py::arg("max_iterations") = 50,
     "Patch `model` so the given raw points (one per row) are forgotten; returns (model, report).");

  m.def("accuracy", [](const PatchedModel& pm, const Mat& x, const std::vector<int>& y) {
    return accuracy(pm, make_dataset(x, y, pm.num_classes()));
  }, py::arg("model"), py::arg("x"), py::arg("y"));
  m.def("mean_loss", [](const PatchedModel& pm, const Mat& x, const std::vector<int>& y) {
    return mean_loss(pm, make_dataset(x, y, pm.num_classes()));
  }, py::arg("model"), py::arg("x"), py::arg("y"));
  m.def("mia_recall", [](const PatchedModel& pm, const Mat& x, const std::vector<int>& y, double tau) {
    return mia_recall(pm, make_dataset(x, y, pm.num_classes()), tau);
  }, py::arg("model"), py::arg("x"), py::arg("y"), py::arg("tau"));

  m.def("region_of", [](const PatchedModel& pm, const Vec& raw) { return region_of(pm, pm.featuremap.apply(raw)); },
        py::arg("model"), py::arg("x"), "Exact linear region (feature space) of the patched model around x.");
  m.def("robust_radius", [](const PatchedModel& pm, const Vec& raw, int label) {
    return robust_radius(pm.base, pm.featuremap.apply(raw), label, pm.domain);
  }, py::arg("model"), py::arg("x"), py::arg("label"));

  m.def("solve_lp", [](const Vec& c, const Mat& a_ub, const Vec& b_ub, const Vec& lower, const Vec& upper, bool maximize) {
    LpProblem p;
    p.objective = c;
    p.sense = maximize ? Sense::maximize : Sense::minimize;
    for (Eigen::Index i = 0; i < a_ub.rows(); ++i) {
      p.add(a_ub.row(i).transpose(), Relation::le, b_ub[i]);
    }
    p.lower = lower;
    p.upper = upper;
    const LpSolution s = solve_lp(p);
    return py::make_tuple(to_string(s.status), s.x, s.objective);
  }, py::arg("c"), py::arg("a_ub"), py::arg("b_ub"), py::arg("lower"), py::arg("upper"), py::arg("maximize") = false,
     "Solve an LP with <= rows; returns (status, x, objective).");
}

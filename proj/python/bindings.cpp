#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "delcode/conv.hpp"
#include "delcode/experiment.hpp"
#include "delcode/verify.hpp"

namespace py = pybind11;
using namespace delcode;

namespace {

using BitsIn = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using RealsIn = py::array_t<double, py::array::c_style | py::array::forcecast>;

BitSeq bits(const BitsIn& a) {
    if (a.ndim() != 1)
        throw py::value_error("expected a 1-d bit array");
    BitSeq out(a.data(), a.data() + a.size());
    for (auto b : out)
        if (b > 1)
            throw py::value_error("bit arrays may only hold 0 and 1");
    return out;
}

std::vector<double> reals(const RealsIn& a) {
    if (a.ndim() != 1)
        throw py::value_error("expected a 1-d array");
    return {a.data(), a.data() + a.size()};
}

py::array_t<std::uint8_t> to_numpy(const BitSeq& v) {
    py::array_t<std::uint8_t> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<double> to_numpy(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<double> to_numpy(const nn::Mat<double>& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto r = out.mutable_unchecked<2>();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            r(i, j) = m(i, j);
    return out;
}

MarkerConfig marker_config(const std::vector<int>& marker, std::size_t nc) {
    MarkerConfig c;
    c.marker.clear();
    for (int b : marker) {
        if (b != 0 && b != 1)
            throw py::value_error("marker bits must be 0 or 1");
        c.marker.push_back(static_cast<std::uint8_t>(b));
    }
    c.nc = nc;
    c.validate();
    return c;
}

py::dict point_dict(const CurvePoint& p) {
    py::dict d;
    d["pd"] = p.pd;
    d["ps"] = p.ps;
    d["assumed_ps"] = p.assumed_ps;
    d["frames"] = p.frames;
    d["bit_errors"] = p.bit_errors;
    d["frame_errors"] = p.frame_errors;
    d["ber"] = p.ber;
    d["fer"] = p.fer;
    d["wall_time"] = p.wall_time;
    return d;
}

// Double-precision network for gradient and reference comparisons.
// Inputs are (T, B, features) arrays; logits come back as (T, B).
class Net {
public:
    Net(nn::NetConfig cfg, std::uint64_t seed) : net_(cfg, seed) {}

    nn::SeqBatch<double> batch(const py::array_t<double, py::array::c_style | py::array::forcecast>& x) const {
        if (x.ndim() != 3)
            throw py::value_error("expected a (T, B, features) array");
        const int T = static_cast<int>(x.shape(0)), B = static_cast<int>(x.shape(1)), F = static_cast<int>(x.shape(2));
        nn::SeqBatch<double> s(F, T, B);
        auto r = x.unchecked<3>();
        for (int t = 0; t < T; ++t)
            for (int b = 0; b < B; ++b)
                for (int f = 0; f < F; ++f)
                    s.data(f, t * B + b) = r(t, b, f);
        return s;
    }

    static py::array_t<double> unbatch(const nn::Mat<double>& m, int T, int B) {
        py::array_t<double> out({T, B});
        auto w = out.mutable_unchecked<2>();
        for (int t = 0; t < T; ++t)
            for (int b = 0; b < B; ++b)
                w(t, b) = m(0, t * B + b);
        return out;
    }

    py::dict tensors(bool buffers) {
        py::dict d;
        for (auto& p : buffers ? net_.buffers() : net_.parameters())
            d[py::str(p.name)] = to_numpy(*p.value);
        return d;
    }

    void set(const std::string& name, const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
        auto all = net_.parameters();
        auto more = net_.buffers();
        all.insert(all.end(), more.begin(), more.end());
        for (auto& p : all) {
            if (p.name != name)
                continue;
            if (v.ndim() != 2 || v.shape(0) != p.value->rows() || v.shape(1) != p.value->cols())
                throw py::value_error("shape mismatch for '" + name + "'");
            auto r = v.unchecked<2>();
            for (Eigen::Index i = 0; i < p.value->rows(); ++i)
                for (Eigen::Index j = 0; j < p.value->cols(); ++j)
                    (*p.value)(i, j) = r(i, j);
            return;
        }
        throw py::key_error(name);
    }

    py::array_t<double> forward(const py::array_t<double, py::array::c_style | py::array::forcecast>& x, bool train) {
        const auto s = batch(x);
        return unbatch(net_.forward(s, train ? nn::Mode::Train : nn::Mode::Eval), s.T, s.B);
    }

    py::tuple loss_and_grad(const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                            const py::array_t<double, py::array::c_style | py::array::forcecast>& labels,
                            const std::string& loss) {
        const auto s = batch(x);
        if (labels.ndim() != 2 || labels.shape(0) != s.T || labels.shape(1) != s.B)
            throw py::value_error("labels must have shape (T, B)");
        nn::Mat<double> y(1, s.T * s.B);
        auto r = labels.unchecked<2>();
        for (int t = 0; t < s.T; ++t)
            for (int b = 0; b < s.B; ++b)
                y(0, t * s.B + b) = r(t, b);
        // leave running statistics untouched
        auto copy = net_;
        typename nn::BiGruNet<double>::Tape tape;
        const auto res = nn::loss_from_logits(copy.forward(s, nn::Mode::Train, &tape), y, nn::parse_loss(loss));
        auto g = copy.zeros_like();
        copy.backward(tape, res.dlogits, g);
        py::dict grads;
        for (auto& p : g.parameters())
            grads[py::str(p.name)] = to_numpy(*p.value);
        return py::make_tuple(res.value, grads);
    }

    std::size_t parameter_count() { return net_.parameter_count(); }

private:
    nn::BiGruNet<double> net_;
};

}  // namespace

PYBIND11_MODULE(_delcode, m) {
    m.doc() = "Marker-coded deletion channel: channel, codes, detectors, networks and sweeps";

    py::register_exception<Error>(m, "DelcodeError", PyExc_RuntimeError);

    // channel
    m.def(
        "transmit",
        [](const BitsIn& x, double pd, double ps, std::uint64_t seed) {
            return to_numpy(transmit(bits(x), ChannelParams{pd, ps}, seed));
        },
        py::arg("x"), py::arg("pd"), py::arg("ps") = 0.0, py::arg("seed") = 0);

    // markers and interleaving
    py::class_<MarkerConfig>(m, "MarkerConfig")
        .def(py::init(&marker_config), py::arg("marker") = std::vector<int>{0, 1}, py::arg("nc") = 5)
        .def_property_readonly("marker", [](const MarkerConfig& c) { return std::vector<int>(c.marker.begin(), c.marker.end()); })
        .def_readonly("nc", &MarkerConfig::nc)
        .def("num_markers", &MarkerConfig::num_markers)
        .def("frame_length", &MarkerConfig::frame_length);
    m.def("insert_markers", [](const BitsIn& c, const MarkerConfig& cfg) { return to_numpy(insert_markers(bits(c), cfg)); });
    m.def("marker_mask", [](const MarkerConfig& cfg, std::size_t n) {
        const auto v = marker_mask(cfg, n);
        return std::vector<bool>(v.begin(), v.end());
    });
    m.def("strip_marker_llrs", [](const RealsIn& l, const MarkerConfig& cfg, std::size_t n) {
        return to_numpy(strip_marker_llrs(reals(l), cfg, n));
    });
    m.def("overall_rate", [](const MarkerConfig& cfg, std::size_t k, std::size_t n) {
        const auto r = overall_rate(cfg, k, n);
        return py::make_tuple(r.num, r.den);
    });
    py::class_<Interleaver>(m, "Interleaver")
        .def(py::init<std::vector<std::size_t>>())
        .def_static("make", &Interleaver::make, py::arg("n"), py::arg("seed"))
        .def_static("identity", &Interleaver::identity)
        .def_property_readonly("perm", &Interleaver::perm)
        .def("__len__", &Interleaver::size)
        .def("interleave", [](const Interleaver& il, const BitsIn& c) { return to_numpy(il.interleave(bits(c))); })
        .def("deinterleave", [](const Interleaver& il, const BitsIn& c) { return to_numpy(il.deinterleave(bits(c))); })
        .def("deinterleave_llrs",
             [](const Interleaver& il, const RealsIn& l) { return to_numpy(il.deinterleave_llrs(reals(l))); });

    // outer codes
    m.def("conv_encode", [](const BitsIn& msg) { return to_numpy(conv::encode(bits(msg))); });
    m.def("viterbi_sdd", [](const RealsIn& l) { return to_numpy(conv::viterbi_sdd(reals(l))); });
    m.def("viterbi_hdd", [](const RealsIn& l) { return to_numpy(conv::viterbi_hdd(reals(l))); });
    m.def("llr_to_hard", [](const RealsIn& l) { return to_numpy(conv::llr_to_hard(reals(l))); });

    py::class_<OuterCode>(m, "OuterCode")
        .def_static("ldpc_from_alist", [](const std::filesystem::path& p) { return OuterCode::ldpc(ldpc::load_alist(p)); })
        .def_static("conv", &OuterCode::conv, py::arg("k"))
        .def_static("uncoded", &OuterCode::uncoded, py::arg("n"))
        .def_property_readonly("k", &OuterCode::k)
        .def_property_readonly("n", &OuterCode::n)
        .def("encode", [](const OuterCode& c, const BitsIn& msg) { return to_numpy(c.encode(bits(msg))); })
        .def(
            "spa_decode",
            [](const OuterCode& c, const RealsIn& l, int max_iter) {
                const auto r = ldpc::spa_decode(c.parity_check(), c.ldpc_encoder(), reals(l), max_iter);
                py::dict d;
                d["message"] = to_numpy(r.message);
                d["codeword"] = to_numpy(r.codeword);
                d["posterior"] = to_numpy(r.posterior);
                d["iterations"] = r.iterations;
                d["converged"] = r.converged;
                return d;
            },
            py::arg("llrs"), py::arg("max_iter") = 100)
        .def("syndrome_ok", [](const OuterCode& c, const BitsIn& cw) { return c.parity_check().is_codeword(bits(cw)); });

    // MAP detector
    m.def(
        "map_detect",
        [](const BitsIn& y, const MarkerConfig& cfg, std::size_t n, double pd, double ps, double clip) {
            return to_numpy(map_detect(bits(y), cfg, n, DetectorParams{pd, ps, clip}));
        },
        py::arg("y"), py::arg("marker"), py::arg("n"), py::arg("pd"), py::arg("ps") = 0.0, py::arg("llr_clip") = 10.0);
    m.def(
        "brute_force_llrs",
        [](const BitsIn& y, const std::vector<int>& kind, double pd, double ps, double clip) {
            TemplateSpec t;
            for (int k : kind)
                t.kind.push_back(static_cast<std::int8_t>(k));
            return to_numpy(brute_force_llrs(bits(y), t, DetectorParams{pd, ps, clip}));
        },
        py::arg("y"), py::arg("template"), py::arg("pd"), py::arg("ps") = 0.0, py::arg("llr_clip") = 10.0);
    m.def("marker_template", [](const MarkerConfig& cfg, std::size_t n) {
        const auto t = TemplateSpec::from_markers(cfg, n);
        return std::vector<int>(t.kind.begin(), t.kind.end());
    });
    m.def("estimate_pd", &estimate_pd);

    // networks
    py::class_<Net>(m, "Net")
        .def(py::init([](int in_dim, int layers, int hidden, std::vector<int> mlp, bool bias, const std::string& act,
                         std::uint64_t seed) {
                 nn::NetConfig c;
                 c.in_dim = in_dim;
                 c.layers = layers;
                 c.hidden = hidden;
                 c.mlp = std::move(mlp);
                 c.gru_bias = bias;
                 c.hidden_act = nn::parse_activation(act);
                 return Net(c, seed);
             }),
             py::arg("in_dim") = 2, py::arg("layers") = 2, py::arg("hidden") = 64,
             py::arg("mlp") = std::vector<int>{32, 1}, py::arg("bias") = false, py::arg("activation") = "relu",
             py::arg("seed") = 1)
        .def("parameters", [](Net& n) { return n.tensors(false); })
        .def("buffers", [](Net& n) { return n.tensors(true); })
        .def("set", &Net::set)
        .def("forward", &Net::forward, py::arg("x"), py::arg("train") = false)
        .def("loss_and_grad", &Net::loss_and_grad, py::arg("x"), py::arg("labels"), py::arg("loss") = "bce")
        .def_property_readonly("parameter_count", &Net::parameter_count);

    m.def("featurize",
          [](const BitsIn& y, std::size_t T, const std::string& mode) {
              return to_numpy(featurize<double>(bits(y), T, parse_feature_mode(mode)));
          },
          py::arg("y"), py::arg("T"), py::arg("mode") = "pair-window");

    py::class_<LlrEstimator>(m, "Estimator")
        .def_static("load", [](const std::filesystem::path& p) { return LlrEstimator::from_checkpoint(nn::load_checkpoint(p)); })
        .def_property_readonly("T", &LlrEstimator::T)
        .def("estimate_llrs", [](const LlrEstimator& e, const BitsIn& y) { return to_numpy(e.estimate_llrs(bits(y))); });
    py::class_<OneShotDecoder>(m, "OneShotDecoder")
        .def_static("load", [](const std::filesystem::path& p) { return OneShotDecoder::from_checkpoint(nn::load_checkpoint(p)); })
        .def("decode", [](const OneShotDecoder& d, const RealsIn& l) { return to_numpy(d.decode_messages(reals(l))); });

    // experiments
    m.def(
        "run_point",
        [](const std::filesystem::path& config, double pd, double ps, std::optional<double> assumed_ps,
           std::optional<std::uint64_t> seed, std::optional<long> max_frames, std::optional<long> min_frame_errors,
           int workers) {
            auto cfg = experiment_from_config(IniConfig::load(config));
            if (seed)
                cfg.seed = *seed;
            if (max_frames)
                cfg.stopping.max_frames = *max_frames;
            if (min_frame_errors)
                cfg.stopping.min_frame_errors = *min_frame_errors;
            if (workers > 0)
                cfg.workers = workers;
            CurvePoint p;
            {
                py::gil_scoped_release nogil;
                p = run_point(cfg, pd, ps, assumed_ps);
            }
            return point_dict(p);
        },
        py::arg("config"), py::arg("pd"), py::arg("ps") = 0.0, py::arg("assumed_ps") = py::none(),
        py::arg("seed") = py::none(), py::arg("max_frames") = py::none(), py::arg("min_frame_errors") = py::none(),
        py::arg("workers") = 0);
    m.def(
        "sweep_csv",
        [](const std::filesystem::path& config, std::optional<std::uint64_t> seed) {
            auto cfg = experiment_from_config(IniConfig::load(config));
            if (seed)
                cfg.seed = *seed;
            std::ostringstream os;
            {
                py::gil_scoped_release nogil;
                write_csv(os, run_sweep(cfg));
            }
            return os.str();
        },
        py::arg("config"), py::arg("seed") = py::none());

    m.def(
        "oracle_check",
        [](long instances, std::uint64_t seed) {
            OracleSuiteConfig c;
            c.instances = instances;
            const auto r = run_oracle_suite(c, seed);
            py::dict d;
            d["instances"] = r.instances;
            d["failures"] = r.failures;
            d["max_abs_deviation"] = r.max_abs_deviation;
            d["pass"] = r.pass();
            return d;
        },
        py::arg("instances") = 1000, py::arg("seed") = 1);
}

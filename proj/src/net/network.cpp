#include "qfdi/net/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "qfdi/common/rng.hpp"
#include "qfdi/kernels/dispatch.hpp"

namespace qfdi::net {

using json = nlohmann::json;

const char* to_string(Arch a) { return a == Arch::mlp ? "mlp" : "lstm"; }

Arch arch_from(const std::string& s) {
    if (s == "mlp") return Arch::mlp;
    if (s == "lstm") return Arch::lstm;
    throw ShapeError("unknown arch: " + s);
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_finite4(const std::array<double, 4>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite output");
}

}  // namespace

MlpNetwork MlpNetwork::make(int input_width) {
    MlpNetwork n;
    const int dims[7] = {input_width, 128, 128, 128, 128, 64, 4};
    for (int l = 0; l < 6; ++l) {
        n.W.emplace_back(std::vector<int>{dims[l + 1], dims[l]});
        n.b.emplace_back(std::vector<int>{dims[l + 1]});
    }
    return n;
}

std::vector<int> MlpNetwork::dims() const {
    std::vector<int> d;
    d.push_back(W.front().cols());
    for (const auto& w : W) d.push_back(w.rows());
    return d;
}

LstmNetwork LstmNetwork::make(int input_width, int hidden) {
    LstmNetwork n;
    n.hidden = hidden;
    n.input_width = input_width;
    n.W = Tensor({4 * hidden, input_width + hidden});
    n.b = Tensor({4 * hidden});
    const int head_dims[4] = {hidden, 128, 64, 4};
    for (int l = 0; l < 3; ++l) {
        n.headW.emplace_back(std::vector<int>{head_dims[l + 1], head_dims[l]});
        n.headB.emplace_back(std::vector<int>{head_dims[l + 1]});
    }
    return n;
}

std::vector<TensorRef> FdiNetwork::tensors() {
    std::vector<TensorRef> out;
    if (arch == Arch::mlp) {
        for (std::size_t l = 0; l < mlp.W.size(); ++l) {
            out.push_back({"mlp.W" + std::to_string(l), &mlp.W[l]});
            out.push_back({"mlp.b" + std::to_string(l), &mlp.b[l]});
        }
    } else {
        out.push_back({"lstm.W", &lstm.W});
        out.push_back({"lstm.b", &lstm.b});
        for (std::size_t l = 0; l < lstm.headW.size(); ++l) {
            out.push_back({"head.W" + std::to_string(l), &lstm.headW[l]});
            out.push_back({"head.b" + std::to_string(l), &lstm.headB[l]});
        }
    }
    return out;
}

std::vector<const Tensor*> FdiNetwork::tensors() const {
    auto refs = const_cast<FdiNetwork*>(this)->tensors();
    std::vector<const Tensor*> out;
    out.reserve(refs.size());
    for (auto& r : refs) out.push_back(r.t);
    return out;
}

std::int64_t FdiNetwork::param_count() const {
    std::int64_t n = 0;
    for (const Tensor* t : tensors()) n += t->numel();
    return n;
}

FdiNetwork make_network(Arch arch, const FeatureSpec& spec, int hidden,
                        std::uint64_t seed) {
    FdiNetwork net;
    net.arch = arch;
    net.spec = spec;
    net.hidden = arch == Arch::lstm ? hidden : 0;
    net.init_seed = seed;
    if (arch == Arch::mlp)
        net.mlp = MlpNetwork::make(spec.flat());
    else
        net.lstm = LstmNetwork::make(spec.per_step(), hidden);

    auto g = rng::stream(seed, "net-init");
    int last_cols = 1;  // biases reuse their weight matrix's fan-in
    for (TensorRef ref : net.tensors()) {
        if (ref.t->shape.size() == 2) last_cols = ref.t->cols();
        const double bound = 1.0 / std::sqrt(static_cast<double>(last_cols));
        for (double& v : ref.t->data) v = rng::uniform(g, -bound, bound);
    }
    return net;
}

Gradients Gradients::zeros_like(FdiNetwork& net) {
    Gradients g;
    for (TensorRef ref : net.tensors())
        g.g.emplace_back(ref.t->data.size(), 0.0);
    return g;
}

void Gradients::add(const Gradients& other) {
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& src = other.g[i];
        auto& dst = g[i];
        kern::active().axpy(1.0, src.data(), dst.data(), dst.size());
    }
}

void Gradients::scale(double s) {
    for (auto& t : g)
        for (double& v : t) v *= s;
}

bool Gradients::finite() const {
    for (const auto& t : g)
        for (double v : t)
            if (!std::isfinite(v)) return false;
    return true;
}

ForwardResult forward_mlp(const MlpNetwork& net,
                          const std::vector<double>& features) {
    if (static_cast<int>(features.size()) != net.W.front().cols())
        throw ShapeError("forward_mlp: feature length mismatch");
    const auto& k = kern::active();
    std::vector<double> a = features, z;
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        const auto& W = net.W[l];
        z.assign(static_cast<std::size_t>(W.rows()), 0.0);
        k.gemv(W.data.data(), a.data(), z.data(),
               static_cast<std::size_t>(W.rows()), static_cast<std::size_t>(W.cols()));
        for (int r = 0; r < W.rows(); ++r) z[static_cast<std::size_t>(r)] += net.b[l].data[static_cast<std::size_t>(r)];
        if (l + 1 < net.W.size())
            for (double& v : z) v = std::tanh(v);
        else
            for (double& v : z) v = sigmoid(v);
        a.swap(z);
    }
    ForwardResult out{{a[0], a[1], a[2], a[3]}};
    check_finite4(out.pred, "forward_mlp");
    return out;
}

namespace {

// Shared LSTM sweep; when `trace` is non-null stores everything BPTT needs.
struct LstmTrace {
    std::vector<std::vector<double>> xh;      // per step, F+H
    std::vector<std::vector<double>> gates;   // per step, 4H post-activation
    std::vector<std::vector<double>> c;       // per step, H
    std::vector<std::vector<double>> tanh_c;  // per step, H
    std::vector<double> h_final;
    std::vector<std::vector<double>> head_act;  // activations entering each head layer
};

std::array<double, 4> lstm_sweep(const LstmNetwork& net,
                                 const std::vector<double>& features,
                                 LstmTrace* trace) {
    const int H = net.hidden, F = net.input_width;
    if (static_cast<int>(features.size()) % F != 0)
        throw ShapeError("forward_lstm: features not a multiple of input width");
    const int T = static_cast<int>(features.size()) / static_cast<int>(F);
    if (T < 1) throw ShapeError("forward_lstm: empty window");
    const auto& k = kern::active();

    std::vector<double> h(static_cast<std::size_t>(H), 0.0), c(static_cast<std::size_t>(H), 0.0);
    std::vector<double> xh(static_cast<std::size_t>(F + H));
    std::vector<double> z(static_cast<std::size_t>(4 * H));
    for (int t = 0; t < T; ++t) {
        std::memcpy(xh.data(), features.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(F),
                    static_cast<std::size_t>(F) * sizeof(double));
        std::memcpy(xh.data() + F, h.data(), static_cast<std::size_t>(H) * sizeof(double));
        k.gemv(net.W.data.data(), xh.data(), z.data(),
               static_cast<std::size_t>(4 * H), static_cast<std::size_t>(F + H));
        for (int r = 0; r < 4 * H; ++r) z[static_cast<std::size_t>(r)] += net.b.data[static_cast<std::size_t>(r)];
        // gates [i; f; g; o]
        for (int j = 0; j < H; ++j) {
            const auto ji = static_cast<std::size_t>(j);
            const double iv = sigmoid(z[ji]);
            const double fv = sigmoid(z[static_cast<std::size_t>(H) + ji]);
            const double gv = std::tanh(z[static_cast<std::size_t>(2 * H) + ji]);
            const double ov = sigmoid(z[static_cast<std::size_t>(3 * H) + ji]);
            z[ji] = iv;
            z[static_cast<std::size_t>(H) + ji] = fv;
            z[static_cast<std::size_t>(2 * H) + ji] = gv;
            z[static_cast<std::size_t>(3 * H) + ji] = ov;
            c[ji] = fv * c[ji] + iv * gv;
            h[ji] = ov * std::tanh(c[ji]);
        }
        if (trace) {
            trace->xh.push_back(xh);
            trace->gates.push_back(z);
            trace->c.push_back(c);
            std::vector<double> tc(static_cast<std::size_t>(H));
            for (int j = 0; j < H; ++j) tc[static_cast<std::size_t>(j)] = std::tanh(c[static_cast<std::size_t>(j)]);
            trace->tanh_c.push_back(tc);
        }
    }

    // head: H -> 128 -> 64 -> 4
    std::vector<double> a = h, zz;
    if (trace) trace->h_final = h;
    for (std::size_t l = 0; l < net.headW.size(); ++l) {
        if (trace) trace->head_act.push_back(a);
        const auto& W = net.headW[l];
        zz.assign(static_cast<std::size_t>(W.rows()), 0.0);
        k.gemv(W.data.data(), a.data(), zz.data(),
               static_cast<std::size_t>(W.rows()), static_cast<std::size_t>(W.cols()));
        for (int r = 0; r < W.rows(); ++r) zz[static_cast<std::size_t>(r)] += net.headB[l].data[static_cast<std::size_t>(r)];
        if (l + 1 < net.headW.size())
            for (double& v : zz) v = std::tanh(v);
        else
            for (double& v : zz) v = sigmoid(v);
        a.swap(zz);
    }
    if (trace) trace->head_act.push_back(a);  // final sigmoid outputs
    return {a[0], a[1], a[2], a[3]};
}

}  // namespace

ForwardResult forward_lstm(const LstmNetwork& net,
                           const std::vector<double>& features) {
    ForwardResult out{lstm_sweep(net, features, nullptr)};
    check_finite4(out.pred, "forward_lstm");
    return out;
}

ForwardResult forward(const FdiNetwork& net,
                      const std::vector<double>& features) {
    return net.arch == Arch::mlp ? forward_mlp(net.mlp, features)
                                 : forward_lstm(net.lstm, features);
}

double loss_hinge(const std::array<double, 4>& pred,
                  const sim::FaultVector& label, double epsilon) {
    double d2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double d = pred[ii] - label.theta[ii];
        d2 += d * d;
    }
    const double dist = std::sqrt(d2);
    return dist > epsilon ? dist - epsilon : 0.0;
}

namespace {

// dL/dpred for the hinge; zero in the flat region and at the kink.
bool hinge_grad(const std::array<double, 4>& pred,
                const sim::FaultVector& label, double epsilon,
                std::array<double, 4>& dpred, double& loss) {
    double d2 = 0.0;
    std::array<double, 4> diff{};
    for (std::size_t i = 0; i < 4; ++i) {
        diff[i] = pred[i] - label.theta[i];
        d2 += diff[i] * diff[i];
    }
    const double dist = std::sqrt(d2);
    loss = dist > epsilon ? dist - epsilon : 0.0;
    if (dist <= epsilon || dist == 0.0) return false;
    for (std::size_t i = 0; i < 4; ++i) dpred[i] = diff[i] / dist;
    return true;
}

double backward_mlp(const MlpNetwork& net, const std::vector<double>& features,
                    const sim::FaultVector& label, double epsilon,
                    Gradients& grad) {
    const auto& k = kern::active();
    // forward with stored activations
    std::vector<std::vector<double>> acts;  // inputs to each layer + output
    acts.push_back(features);
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        const auto& W = net.W[l];
        std::vector<double> z(static_cast<std::size_t>(W.rows()), 0.0);
        k.gemv(W.data.data(), acts.back().data(), z.data(),
               static_cast<std::size_t>(W.rows()), static_cast<std::size_t>(W.cols()));
        for (int r = 0; r < W.rows(); ++r) z[static_cast<std::size_t>(r)] += net.b[l].data[static_cast<std::size_t>(r)];
        if (l + 1 < net.W.size())
            for (double& v : z) v = std::tanh(v);
        else
            for (double& v : z) v = sigmoid(v);
        acts.push_back(std::move(z));
    }
    const auto& out = acts.back();
    std::array<double, 4> pred{out[0], out[1], out[2], out[3]};
    check_finite4(pred, "backward(mlp)");

    double loss = 0.0;
    std::array<double, 4> dpred{};
    if (!hinge_grad(pred, label, epsilon, dpred, loss)) return loss;

    std::vector<double> da(4);
    for (std::size_t i = 0; i < 4; ++i)
        da[i] = dpred[i] * pred[i] * (1.0 - pred[i]);  // through sigmoid
    for (int l = static_cast<int>(net.W.size()) - 1; l >= 0; --l) {
        const auto lu = static_cast<std::size_t>(l);
        const auto& W = net.W[lu];
        const auto& a_in = acts[lu];
        auto& gW = grad.g[2 * lu];
        auto& gb = grad.g[2 * lu + 1];
        k.ger(gW.data(), da.data(), a_in.data(),
              static_cast<std::size_t>(W.rows()), static_cast<std::size_t>(W.cols()));
        for (int r = 0; r < W.rows(); ++r) gb[static_cast<std::size_t>(r)] += da[static_cast<std::size_t>(r)];
        if (l == 0) break;
        std::vector<double> dprev(static_cast<std::size_t>(W.cols()), 0.0);
        for (int r = 0; r < W.rows(); ++r)
            k.axpy(da[static_cast<std::size_t>(r)], W.data.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(W.cols()),
                   dprev.data(), static_cast<std::size_t>(W.cols()));
        // previous layer output went through tanh
        const auto& a_prev = acts[lu];
        for (std::size_t i = 0; i < dprev.size(); ++i)
            dprev[i] *= (1.0 - a_prev[i] * a_prev[i]);
        da.swap(dprev);
    }
    return loss;
}

double backward_lstm(const LstmNetwork& net, const std::vector<double>& features,
                     const sim::FaultVector& label, double epsilon,
                     Gradients& grad) {
    const int H = net.hidden, F = net.input_width;
    const auto& k = kern::active();
    LstmTrace trace;
    const auto out = lstm_sweep(net, features, &trace);
    std::array<double, 4> pred{out[0], out[1], out[2], out[3]};
    check_finite4(pred, "backward(lstm)");
    const int T = static_cast<int>(trace.xh.size());

    double loss = 0.0;
    std::array<double, 4> dpred{};
    if (!hinge_grad(pred, label, epsilon, dpred, loss)) return loss;

    // gradient buffer layout mirrors tensors(): lstm.W, lstm.b, head pairs
    auto& gW = grad.g[0];
    auto& gb = grad.g[1];

    // head backward (sigmoid at the end, tanh between)
    std::vector<double> da(4);
    for (std::size_t i = 0; i < 4; ++i)
        da[i] = dpred[i] * pred[i] * (1.0 - pred[i]);
    for (int l = 2; l >= 0; --l) {
        const auto lu = static_cast<std::size_t>(l);
        const auto& W = net.headW[lu];
        const auto& a_in = trace.head_act[lu];
        auto& ghW = grad.g[2 + 2 * lu];
        auto& ghb = grad.g[2 + 2 * lu + 1];
        k.ger(ghW.data(), da.data(), a_in.data(),
              static_cast<std::size_t>(W.rows()), static_cast<std::size_t>(W.cols()));
        for (int r = 0; r < W.rows(); ++r) ghb[static_cast<std::size_t>(r)] += da[static_cast<std::size_t>(r)];
        std::vector<double> dprev(static_cast<std::size_t>(W.cols()), 0.0);
        for (int r = 0; r < W.rows(); ++r)
            k.axpy(da[static_cast<std::size_t>(r)], W.data.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(W.cols()),
                   dprev.data(), static_cast<std::size_t>(W.cols()));
        if (l > 0) {
            const auto& a_prev = trace.head_act[lu];
            for (std::size_t i = 0; i < dprev.size(); ++i)
                dprev[i] *= (1.0 - a_prev[i] * a_prev[i]);
        }
        da.swap(dprev);
    }
    // da is now dL/dh_final (head input is h_final untouched by tanh)
    std::vector<double> dh = da;
    std::vector<double> dc(static_cast<std::size_t>(H), 0.0);
    std::vector<double> dz(static_cast<std::size_t>(4 * H));
    std::vector<double> dxh(static_cast<std::size_t>(F + H));

    for (int t = T - 1; t >= 0; --t) {
        const auto tu = static_cast<std::size_t>(t);
        const auto& gates = trace.gates[tu];
        const auto& tanh_c = trace.tanh_c[tu];
        const std::vector<double>* c_prev = t > 0 ? &trace.c[tu - 1] : nullptr;
        for (int j = 0; j < H; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double iv = gates[ju];
            const double fv = gates[static_cast<std::size_t>(H) + ju];
            const double gv = gates[static_cast<std::size_t>(2 * H) + ju];
            const double ov = gates[static_cast<std::size_t>(3 * H) + ju];
            const double tc = tanh_c[ju];
            const double cprev = c_prev ? (*c_prev)[ju] : 0.0;

            const double dcj = dh[ju] * ov * (1.0 - tc * tc) + dc[ju];
            dz[ju] = dcj * gv * iv * (1.0 - iv);
            dz[static_cast<std::size_t>(H) + ju] = dcj * cprev * fv * (1.0 - fv);
            dz[static_cast<std::size_t>(2 * H) + ju] = dcj * iv * (1.0 - gv * gv);
            dz[static_cast<std::size_t>(3 * H) + ju] = dh[ju] * tc * ov * (1.0 - ov);
            dc[ju] = dcj * fv;
        }
        k.ger(gW.data(), dz.data(), trace.xh[tu].data(),
              static_cast<std::size_t>(4 * H), static_cast<std::size_t>(F + H));
        for (int r = 0; r < 4 * H; ++r) gb[static_cast<std::size_t>(r)] += dz[static_cast<std::size_t>(r)];
        std::fill(dxh.begin(), dxh.end(), 0.0);
        for (int r = 0; r < 4 * H; ++r)
            k.axpy(dz[static_cast<std::size_t>(r)],
                   net.W.data.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(F + H),
                   dxh.data(), static_cast<std::size_t>(F + H));
        std::memcpy(dh.data(), dxh.data() + F, static_cast<std::size_t>(H) * sizeof(double));
    }
    return loss;
}

}  // namespace

double backward(const FdiNetwork& net, const std::vector<double>& features,
                const sim::FaultVector& label, double epsilon, Gradients& grad) {
    const double loss =
        net.arch == Arch::mlp
            ? backward_mlp(net.mlp, features, label, epsilon, grad)
            : backward_lstm(net.lstm, features, label, epsilon, grad);
    return loss;
}

void sgd_step(FdiNetwork& net, const Gradients& grad, const SgdConfig& cfg) {
    auto refs = net.tensors();
    if (refs.size() != grad.g.size())
        throw ShapeError("sgd_step: gradient/parameter shape mismatch");
    const auto& k = kern::active();
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (refs[i].t->data.size() != grad.g[i].size())
            throw ShapeError("sgd_step: gradient/parameter shape mismatch");
        k.axpy(-cfg.learning_rate, grad.g[i].data(), refs[i].t->data.data(),
               grad.g[i].size());
    }
}

namespace {

constexpr int kCheckpointVersion = 1;

void write_le64(std::ofstream& os, const double* p, std::size_t n) {
    std::vector<unsigned char> buf(n * 8);
    for (std::size_t i = 0; i < n; ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(p[i]);
        for (int b = 0; b < 8; ++b)
            buf[i * 8 + static_cast<std::size_t>(b)] =
                static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
}

bool read_le64(std::ifstream& is, double* p, std::size_t n) {
    std::vector<unsigned char> buf(n * 8);
    if (!is.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size())))
        return false;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b)
            bits = (bits << 8) | buf[i * 8 + static_cast<std::size_t>(b)];
        p[i] = std::bit_cast<double>(bits);
    }
    return true;
}

}  // namespace

void save_checkpoint(const FdiNetwork& net, const std::string& path) {
    json hdr;
    hdr["format_version"] = kCheckpointVersion;
    hdr["kind"] = "fdi-checkpoint";
    hdr["arch"] = to_string(net.arch);
    hdr["feature_mode"] = to_string(net.spec.mode);
    hdr["p"] = net.spec.p;
    hdr["m"] = net.spec.m;
    hdr["T"] = net.spec.T;
    hdr["hidden"] = net.hidden;
    hdr["seed"] = net.init_seed;
    json dir = json::array();
    auto& mut = const_cast<FdiNetwork&>(net);
    for (TensorRef ref : mut.tensors())
        dir.push_back({{"name", ref.name}, {"shape", ref.t->shape}});
    hdr["tensors"] = dir;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os << hdr.dump() << "\n";
    for (TensorRef ref : mut.tensors())
        write_le64(os, ref.t->data.data(), ref.t->data.size());
    if (!os) throw std::runtime_error("save_checkpoint: write failed: " + path);
}

FdiNetwork load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("load_checkpoint: missing header: " + path);
    json hdr;
    try {
        hdr = json::parse(line);
    } catch (const json::exception& e) {
        throw std::runtime_error("load_checkpoint: corrupt header: " +
                                 std::string(e.what()));
    }
    if (hdr.value("format_version", -1) != kCheckpointVersion)
        throw std::runtime_error("load_checkpoint: format version mismatch");
    if (hdr.value("kind", "") != "fdi-checkpoint")
        throw std::runtime_error("load_checkpoint: not a checkpoint file");

    FeatureSpec spec;
    spec.mode = feature_mode_from(hdr.at("feature_mode").get<std::string>());
    spec.p = hdr.at("p").get<int>();
    spec.m = hdr.at("m").get<int>();
    spec.T = hdr.at("T").get<int>();
    FdiNetwork net = make_network(arch_from(hdr.at("arch").get<std::string>()),
                                  spec, hdr.value("hidden", 128),
                                  hdr.value("seed", std::uint64_t{0}));
    auto refs = net.tensors();
    const auto& dir = hdr.at("tensors");
    if (dir.size() != refs.size())
        throw std::runtime_error("load_checkpoint: tensor directory mismatch");
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (dir[i].at("name").get<std::string>() != refs[i].name ||
            dir[i].at("shape").get<std::vector<int>>() != refs[i].t->shape)
            throw std::runtime_error("load_checkpoint: tensor " + refs[i].name +
                                     " does not match the declared spec");
        if (!read_le64(is, refs[i].t->data.data(), refs[i].t->data.size()))
            throw std::runtime_error("load_checkpoint: truncated payload in " +
                                     path);
    }
    return net;
}

}  // namespace qfdi::net

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "delcode/nn/adam.hpp"
#include "delcode/nn/checkpoint.hpp"
#include "delcode/nn/loss.hpp"

namespace delcode::nn {

Activation parse_activation(const std::string& s) {
    if (s == "relu")
        return Activation::Relu;
    if (s == "tanh")
        return Activation::Tanh;
    if (s == "identity" || s == "none")
        return Activation::Identity;
    throw Error("unknown activation '" + s + "'");
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Relu:
            return "relu";
        case Activation::Tanh:
            return "tanh";
        case Activation::Identity:
            return "identity";
    }
    return "?";
}

LossKind parse_loss(const std::string& s) {
    if (s == "mse")
        return LossKind::Mse;
    if (s == "bce")
        return LossKind::Bce;
    throw Error("unknown loss '" + s + "'");
}

std::string to_string(LossKind k) { return k == LossKind::Mse ? "mse" : "bce"; }

ClipMode parse_clip_mode(const std::string& s) {
    if (s == "norm" || s == "global_norm")
        return ClipMode::GlobalNorm;
    if (s == "value")
        return ClipMode::Value;
    if (s == "none")
        return ClipMode::None;
    throw Error("unknown clip mode '" + s + "'");
}

void NetConfig::validate() const {
    if (in_dim <= 0 || layers <= 0 || hidden <= 0)
        throw Error("network: in_dim, layers and hidden must be positive");
    if (mlp.empty())
        throw Error("network: MLP head needs at least one layer");
    for (int d : mlp)
        if (d <= 0)
            throw Error("network: MLP widths must be positive");
    if (!(bn_eps > 0.0) || !(bn_momentum >= 0.0 && bn_momentum <= 1.0))
        throw Error("network: invalid batch-norm settings");
}

namespace {

constexpr const char* kMagic = "DELCODE-CHECKPOINT 1";

std::string exact(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
    auto u = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

float get_f32(const std::uint8_t* p) {
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i)
        u |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(u);
}

std::vector<NamedTensor<float>> all_tensors(BiGruNet<float>& m) {
    auto t = m.parameters();
    auto b = m.buffers();
    t.insert(t.end(), b.begin(), b.end());
    return t;
}

}  // namespace

std::string checkpoint_header(const Checkpoint& ckpt) {
    std::ostringstream os;
    const auto& n = ckpt.net;
    os << kMagic << '\n';
    os << "kind " << (ckpt.kind.empty() ? "model" : ckpt.kind) << '\n';
    os << "in_dim " << n.in_dim << '\n';
    os << "layers " << n.layers << '\n';
    os << "hidden " << n.hidden << '\n';
    os << "mlp";
    for (int d : n.mlp)
        os << ' ' << d;
    os << '\n';
    os << "gru_bias " << (n.gru_bias ? 1 : 0) << '\n';
    os << "hidden_activation " << to_string(n.hidden_act) << '\n';
    os << "bn_momentum " << exact(n.bn_momentum) << '\n';
    os << "bn_eps " << exact(n.bn_eps) << '\n';
    for (const auto& [k, v] : ckpt.meta) {
        if (k.find_first_of(" \t\n") != std::string::npos || v.find('\n') != std::string::npos)
            throw Error("checkpoint: meta keys must be single tokens and values single lines");
        os << "meta " << k << ' ' << v << '\n';
    }
    auto& model = const_cast<BiGruNet<float>&>(ckpt.model);
    for (const auto& t : all_tensors(model))
        os << "tensor " << t.name << ' ' << t.value->rows() << ' ' << t.value->cols() << '\n';
    os << "end\n";
    return os.str();
}

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt) {
    if (!(ckpt.model.config() == ckpt.net))
        throw Error("checkpoint: model architecture does not match header config");
    const auto header = checkpoint_header(ckpt);
    std::vector<std::uint8_t> out(header.begin(), header.end());
    auto& model = const_cast<BiGruNet<float>&>(ckpt.model);
    for (const auto& t : all_tensors(model)) {
        const auto& m = *t.value;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                put_f32(out, m(i, j));
    }
    return out;
}

Checkpoint deserialize(std::span<const std::uint8_t> bytes) {
    // Header lines up to and including "end\n".
    std::size_t pos = 0;
    std::vector<std::string> lines;
    while (true) {
        std::size_t nl = pos;
        while (nl < bytes.size() && bytes[nl] != '\n')
            ++nl;
        if (nl >= bytes.size())
            throw Error("checkpoint: truncated header");
        lines.emplace_back(reinterpret_cast<const char*>(bytes.data() + pos), nl - pos);
        pos = nl + 1;
        if (lines.back() == "end")
            break;
        if (lines.size() > 100000)
            throw Error("checkpoint: header too long");
    }
    if (lines.empty() || lines[0] != kMagic)
        throw Error("checkpoint: bad magic line");

    Checkpoint ck;
    struct Entry {
        std::string name;
        long rows, cols;
    };
    std::vector<Entry> entries;
    bool have_mlp = false;
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
        std::istringstream ls(lines[i]);
        std::string key;
        ls >> key;
        auto fail = [&]() { throw Error("checkpoint: malformed header line '" + lines[i] + "'"); };
        if (key == "kind") {
            ls >> ck.kind;
        } else if (key == "in_dim") {
            ls >> ck.net.in_dim;
        } else if (key == "layers") {
            ls >> ck.net.layers;
        } else if (key == "hidden") {
            ls >> ck.net.hidden;
        } else if (key == "mlp") {
            ck.net.mlp.clear();
            int d;
            while (ls >> d)
                ck.net.mlp.push_back(d);
            have_mlp = true;
            continue;
        } else if (key == "gru_bias") {
            int b;
            ls >> b;
            ck.net.gru_bias = b != 0;
        } else if (key == "hidden_activation") {
            std::string a;
            ls >> a;
            ck.net.hidden_act = parse_activation(a);
        } else if (key == "bn_momentum") {
            ls >> ck.net.bn_momentum;
        } else if (key == "bn_eps") {
            ls >> ck.net.bn_eps;
        } else if (key == "meta") {
            std::string k;
            ls >> k;
            std::string v;
            std::getline(ls, v);
            if (!v.empty() && v[0] == ' ')
                v.erase(0, 1);
            ck.meta[k] = v;
            continue;
        } else if (key == "tensor") {
            Entry e;
            ls >> e.name >> e.rows >> e.cols;
            if (ls.fail() || e.rows < 0 || e.cols < 0)
                fail();
            entries.push_back(e);
            continue;
        } else {
            fail();
        }
        if (ls.fail())
            fail();
    }
    if (!have_mlp)
        throw Error("checkpoint: missing mlp line");
    ck.net.validate();
    ck.model = BiGruNet<float>(ck.net);
    auto tensors = all_tensors(ck.model);
    if (tensors.size() != entries.size())
        throw Error("checkpoint: tensor count does not match architecture");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        auto& m = *tensors[i].value;
        if (entries[i].name != tensors[i].name || entries[i].rows != m.rows() || entries[i].cols != m.cols())
            throw Error("checkpoint: tensor '" + entries[i].name + "' does not match architecture");
        const std::size_t need = static_cast<std::size_t>(m.size()) * 4;
        if (pos + need > bytes.size())
            throw Error("checkpoint: truncated tensor data");
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                m(r, c) = get_f32(bytes.data() + pos);
                pos += 4;
            }
    }
    if (pos != bytes.size())
        throw Error("checkpoint: trailing bytes after tensor data");
    return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto bytes = serialize(ckpt);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("checkpoint: cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("checkpoint: cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

std::uint64_t checkpoint_digest(const Checkpoint& ckpt) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : serialize(ckpt)) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace delcode::nn

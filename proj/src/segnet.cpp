#include "deint/segnet.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deint/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format requires a little-endian host");

namespace deint::segnet {

using gradkit::Param;
using gradkit::Tensor;

void UNetConfig::validate() const {
    if (in_channels < 1) throw ConfigError("unet: in_channels must be >= 1");
    if (base_channels < 1) throw ConfigError("unet: base_channels must be >= 1");
    if (depth < 1) throw ConfigError("unet: depth must be >= 1");
    if (out_channels < 2) throw ConfigError("unet: out_channels must be >= 2");
}

namespace {

struct ConvDesc {
    std::string name;
    int in_ch = 0;
    int out_ch = 0;
};

// Convolutions in execution order; forward consumes them sequentially.
std::vector<ConvDesc> conv_layout(const UNetConfig& cfg) {
    std::vector<ConvDesc> layout;
    const int base = cfg.base_channels;
    for (int e = 0; e < cfg.depth; ++e) {
        const int in = e == 0 ? cfg.in_channels : base << (e - 1);
        const int out = base << e;
        layout.push_back({"enc" + std::to_string(e) + ".c0", in, out});
        layout.push_back({"enc" + std::to_string(e) + ".c1", out, out});
    }
    layout.push_back({"bott.c0", base << (cfg.depth - 1), base << cfg.depth});
    layout.push_back({"bott.c1", base << cfg.depth, base << cfg.depth});
    for (int d = cfg.depth - 1; d >= 0; --d) {
        const int out = base << d;
        layout.push_back({"dec" + std::to_string(d) + ".up", out * 2, out});
        layout.push_back({"dec" + std::to_string(d) + ".c0", out * 2, out});
        layout.push_back({"dec" + std::to_string(d) + ".c1", out, out});
    }
    layout.push_back({"head", base, cfg.out_channels});
    return layout;
}

}  // namespace

Param& Model::find(const std::string& name) {
    for (Param& p : params)
        if (p.name == name) return p;
    throw std::invalid_argument("Model: no parameter named " + name);
}

const Param& Model::find(const std::string& name) const {
    return const_cast<Model*>(this)->find(name);
}

std::int64_t Model::parameter_count() const {
    std::int64_t n = 0;
    for (const Param& p : params) n += p.numel();
    return n;
}

Model init_model(const UNetConfig& config) {
    config.validate();
    Model model;
    model.config = config;
    Rng rng(config.seed);
    for (const ConvDesc& d : conv_layout(config)) {
        Param w;
        w.name = d.name + ".w";
        w.shape = {d.out_ch, d.in_ch, 3, 3};
        const double scale = std::sqrt(2.0 / (d.in_ch * 9.0));
        w.values.resize(static_cast<std::size_t>(w.numel()));
        for (double& v : w.values) v = scale * rng.normal();
        model.params.push_back(std::move(w));

        Param b;
        b.name = d.name + ".b";
        b.shape = {d.out_ch};
        b.values.assign(d.out_ch, 0.0);
        model.params.push_back(std::move(b));
    }
    return model;
}

ForwardResult forward(gradkit::Tape& tape, const Model& model, const Tensor& image,
                      bool with_grad) {
    const UNetConfig& cfg = model.config;
    if (image.shape().size() != 3 || image.shape()[0] != cfg.in_channels)
        throw std::invalid_argument("forward: expected (" + std::to_string(cfg.in_channels) +
                                    ",H,W) image, got " + gradkit::shape_str(image.shape()));
    const int h = image.shape()[1], w = image.shape()[2];
    const int div = 1 << cfg.depth;
    if (h % div != 0 || w % div != 0)
        throw std::invalid_argument("forward: spatial dims " + std::to_string(h) + "x" +
                                    std::to_string(w) + " must be divisible by " +
                                    std::to_string(div));

    ForwardResult result;
    result.param_tensors.reserve(model.params.size());
    for (const Param& p : model.params)
        result.param_tensors.push_back(tape.tensor(p.shape, p.values, with_grad));

    std::size_t next = 0;
    auto conv = [&](const Tensor& x) {
        const Tensor& cw = result.param_tensors[next++];
        const Tensor& cb = result.param_tensors[next++];
        return gradkit::conv2d(x, cw, cb);
    };

    Tensor x = image;
    std::vector<Tensor> skips;
    for (int e = 0; e < cfg.depth; ++e) {
        x = gradkit::relu(conv(x));
        x = gradkit::relu(conv(x));
        skips.push_back(x);
        x = gradkit::maxpool2x2(x);
    }
    x = gradkit::relu(conv(x));
    x = gradkit::relu(conv(x));
    for (int d = cfg.depth - 1; d >= 0; --d) {
        x = gradkit::upsample_nearest2x(x);
        x = gradkit::relu(conv(x));
        x = gradkit::concat_channels({x, skips[d]});
        x = gradkit::relu(conv(x));
        x = gradkit::relu(conv(x));
    }
    result.logits = conv(x);  // no activation on the head
    return result;
}

void save_checkpoint(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_checkpoint: cannot open " + path);

    nlohmann::json cfg;
    cfg["in_channels"] = model.config.in_channels;
    cfg["base_channels"] = model.config.base_channels;
    cfg["depth"] = model.config.depth;
    cfg["out_channels"] = model.config.out_channels;
    cfg["seed"] = model.config.seed;

    out << "DEINT_UNET_CKPT v1\n" << cfg.dump() << "\n" << model.params.size() << "\n";
    for (const Param& p : model.params) {
        out << p.name << " " << p.shape.size();
        for (int d : p.shape) out << " " << d;
        out << "\n";
        out.write(reinterpret_cast<const char*>(p.values.data()),
                  static_cast<std::streamsize>(p.values.size() * sizeof(double)));
        out << "\n";
    }
    if (!out) throw DataError("save_checkpoint: write failed for " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_checkpoint: cannot open " + path);

    std::string magic;
    std::getline(in, magic);
    if (magic != "DEINT_UNET_CKPT v1")
        throw DataError("load_checkpoint: " + path + " is not a checkpoint file");

    std::string cfg_line;
    std::getline(in, cfg_line);
    UNetConfig cfg;
    try {
        const auto j = nlohmann::json::parse(cfg_line);
        cfg.in_channels = j.at("in_channels").get<int>();
        cfg.base_channels = j.at("base_channels").get<int>();
        cfg.depth = j.at("depth").get<int>();
        cfg.out_channels = j.at("out_channels").get<int>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_checkpoint: bad config header: " + std::string(e.what()));
    }
    cfg.validate();

    std::size_t count = 0;
    in >> count;
    in.ignore(1, '\n');

    // rebuild the expected layout and demand an exact match
    Model expected = init_model(cfg);
    if (count != expected.params.size())
        throw DataError("load_checkpoint: parameter count " + std::to_string(count) +
                        " does not match config (want " +
                        std::to_string(expected.params.size()) + ")");

    Model model;
    model.config = cfg;
    for (std::size_t k = 0; k < count; ++k) {
        std::string header;
        std::getline(in, header);
        std::istringstream hs(header);
        Param p;
        std::size_t ndim = 0;
        hs >> p.name >> ndim;
        for (std::size_t i = 0; i < ndim; ++i) {
            int d = 0;
            hs >> d;
            p.shape.push_back(d);
        }
        if (!hs) throw DataError("load_checkpoint: bad tensor header: " + header);
        const Param& want = expected.params[k];
        if (p.name != want.name || p.shape != want.shape)
            throw DataError("load_checkpoint: tensor " + p.name + " with shape " +
                            gradkit::shape_str(p.shape) + " does not match config layout (want " +
                            want.name + " " + gradkit::shape_str(want.shape) + ")");
        p.values.resize(static_cast<std::size_t>(p.numel()));
        in.read(reinterpret_cast<char*>(p.values.data()),
                static_cast<std::streamsize>(p.values.size() * sizeof(double)));
        in.ignore(1, '\n');
        if (!in) throw DataError("load_checkpoint: truncated tensor data for " + p.name);
        for (double v : p.values)
            if (!std::isfinite(v))
                throw DataError("load_checkpoint: non-finite value in " + p.name);
        model.params.push_back(std::move(p));
    }
    return model;
}

}  // namespace deint::segnet

#include "inspecta/model.hpp"

#include <cstring>
#include <fstream>

#include "inspecta/error.hpp"
#include "inspecta/hash.hpp"
#include "inspecta/loss.hpp"

namespace inspecta {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

void put_string(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
}

class Reader {
public:
    Reader(const std::string& data, std::string origin)
        : data_(data), origin_(std::move(origin)) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(u_bytes(4)); }
    std::uint64_t u64() { return u_bytes(8); }
    std::uint8_t u8() { return static_cast<std::uint8_t>(u_bytes(1)); }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string str() {
        const std::uint32_t n = u32();
        if (pos_ + n > data_.size()) fail();
        std::string out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    void raw(char* out, std::size_t n) {
        if (pos_ + n > data_.size()) fail();
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
    }

    std::size_t position() const { return pos_; }

private:
    std::uint64_t u_bytes(int n) {
        if (pos_ + static_cast<std::size_t>(n) > data_.size()) fail();
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    [[noreturn]] void fail() const { throw IoError("corrupt model file: " + origin_); }

    const std::string& data_;
    std::string origin_;
    std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(ModelKind kind) {
    return kind == ModelKind::classifier ? "classifier" : "detector";
}

ModelKind model_kind_from_string(const std::string& text) {
    if (text == "classifier") return ModelKind::classifier;
    if (text == "detector") return ModelKind::detector;
    throw ConfigError("unknown model kind '" + text + "' (want classifier or detector)");
}

double sigmoid_score(const ModelParams& params, const FeatureVector& features) {
    if (params.weights.size() != features.values.size())
        throw ValidationError("sigmoid_score: weight length " + std::to_string(params.weights.size()) +
                              " does not match feature length " + std::to_string(features.values.size()));
    double z = params.bias;
    for (std::size_t i = 0; i < params.weights.size(); ++i) z += params.weights[i] * features.values[i];
    return logistic(z);
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
    std::string blob;
    blob.append("INSP");
    put_u32(blob, ModelParams::kFormatVersion);
    blob.push_back(static_cast<char>(params.kind));
    put_u32(blob, static_cast<std::uint32_t>(params.features.input_size));
    put_u32(blob, static_cast<std::uint32_t>(params.features.grid));
    put_u32(blob, static_cast<std::uint32_t>(params.features.orient_bins));
    put_f64(blob, params.features.pooled_mean);
    put_f64(blob, params.features.pooled_std);
    put_f64(blob, params.features.grad_mean);
    put_f64(blob, params.features.grad_std);
    put_f64(blob, params.features.grad_floor);
    put_u32(blob, static_cast<std::uint32_t>(params.window_stride));
    put_string(blob, params.training_config_hash);
    put_u64(blob, params.weights.size());
    put_f64(blob, params.bias);
    for (double w : params.weights) put_f64(blob, w);
    put_u32(blob, crc32(blob.data(), blob.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model file: " + path.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("short write on model file: " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < 8 || data.compare(0, 4, "INSP") != 0)
        throw IoError("corrupt model file: " + path.string() + " (bad magic)");
    if (data.size() < 4 + 4)
        throw IoError("corrupt model file: " + path.string());

    Reader reader(data, path.string());
    char magic[4];
    reader.raw(magic, 4);
    const std::uint32_t version = reader.u32();
    if (version > ModelParams::kFormatVersion)
        throw IoError("unsupported version " + std::to_string(version) + " in model file: " + path.string());

    ModelParams params;
    const std::uint8_t kind = reader.u8();
    if (kind > 1) throw IoError("corrupt model file: " + path.string() + " (bad kind)");
    params.kind = static_cast<ModelKind>(kind);
    params.features.input_size = static_cast<int>(reader.u32());
    params.features.grid = static_cast<int>(reader.u32());
    params.features.orient_bins = static_cast<int>(reader.u32());
    params.features.pooled_mean = reader.f64();
    params.features.pooled_std = reader.f64();
    params.features.grad_mean = reader.f64();
    params.features.grad_std = reader.f64();
    params.features.grad_floor = reader.f64();
    params.window_stride = static_cast<int>(reader.u32());
    params.training_config_hash = reader.str();
    const std::uint64_t n_weights = reader.u64();
    params.bias = reader.f64();
    if (reader.position() + n_weights * 8 + 4 != data.size())
        throw IoError("corrupt model file: " + path.string() + " (bad length)");
    params.weights.resize(n_weights);
    for (std::uint64_t i = 0; i < n_weights; ++i) params.weights[i] = reader.f64();

    const std::uint32_t stored_crc = reader.u32();
    const std::uint32_t actual_crc = crc32(data.data(), data.size() - 4);
    if (stored_crc != actual_crc)
        throw IoError("corrupt model file: " + path.string() + " (checksum mismatch)");

    if (params.weights.size() != static_cast<std::size_t>(params.features.feature_length()))
        throw ValidationError("model file " + path.string() + ": weight length does not match extractor config");
    return params;
}

}  // namespace inspecta

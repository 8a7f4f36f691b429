#include "gateseed/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace gateseed::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError(path, "cannot open for writing");
    }
    template <typename V>
    void pod(V v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(V));
    }
    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void record(const std::string& name, const Shape& shape, const float* data, std::size_t n) {
        pod(static_cast<std::uint32_t>(name.size()));
        bytes(name.data(), name.size());
        pod(static_cast<std::uint32_t>(shape.size()));
        for (int d : shape) pod(static_cast<std::uint32_t>(d));
        bytes(data, n * sizeof(float));
    }
    void finish() {
        out_.flush();
        if (!out_) throw IoError(path_, "write failed");
    }

private:
    std::string path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw IoError(path, "cannot open");
    }
    template <typename V>
    V pod() {
        V v{};
        read(&v, sizeof(V));
        return v;
    }
    void read(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) throw IoError(path_, "truncated checkpoint");
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
};

}  // namespace

void save_checkpoint(const std::string& path, const NetworkParams<float>& params, const AdamState<float>* adam) {
    const auto named = params.named_tensors();
    const auto trainable_names = params.trainable_names();
    std::uint32_t count = static_cast<std::uint32_t>(named.size());
    if (adam) count += static_cast<std::uint32_t>(2 * adam->m.size() + 1);

    Writer w(path);
    w.bytes("PCLN", 4);
    w.pod(kCheckpointVersion);
    w.pod(params.arch.digest());
    w.pod(count);
    for (const auto& [name, t] : named) w.record(name, t->shape(), t->data(), t->size());
    if (adam) {
        for (std::size_t i = 0; i < adam->m.size(); ++i) {
            w.record("adam.m/" + trainable_names[i], adam->m[i].shape(), adam->m[i].data(), adam->m[i].size());
            w.record("adam.v/" + trainable_names[i], adam->v[i].shape(), adam->v[i].data(), adam->v[i].size());
        }
        const float step = static_cast<float>(adam->step);
        w.record("adam.step", {1}, &step, 1);
    }
    w.finish();
}

Checkpoint load_checkpoint(const std::string& path, const Architecture& arch) {
    Reader r(path);
    char magic[4];
    r.read(magic, 4);
    if (std::memcmp(magic, "PCLN", 4) != 0) throw IoError(path, "not a checkpoint (bad magic)");
    const auto version = r.pod<std::uint32_t>();
    if (version != kCheckpointVersion) throw IoError(path, "unsupported checkpoint version " + std::to_string(version));
    const auto digest = r.pod<std::uint64_t>();
    if (digest != arch.digest())
        throw InvalidArgument(path + ": architecture digest mismatch (checkpoint does not match " + arch.describe() + ")");
    const auto count = r.pod<std::uint32_t>();

    std::map<std::string, Tensor> records;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = r.pod<std::uint32_t>();
        if (name_len > 4096) throw IoError(path, "corrupt record name length");
        std::string name(name_len, '\0');
        r.read(name.data(), name_len);
        const auto rank = r.pod<std::uint32_t>();
        if (rank > 8) throw IoError(path, "corrupt tensor rank in '" + name + "'");
        Shape shape;
        for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<int>(r.pod<std::uint32_t>()));
        Tensor t(shape);
        r.read(t.data(), t.size() * sizeof(float));
        records.emplace(std::move(name), std::move(t));
    }

    Checkpoint ck{NetworkParams<float>::zeros(arch), std::nullopt};
    auto take = [&](const std::string& name, Tensor& dst) {
        auto it = records.find(name);
        if (it == records.end()) throw IoError(path, "missing tensor '" + name + "'");
        if (it->second.shape() != dst.shape())
            throw IoError(path, "tensor '" + name + "' has shape " + shape_string(it->second.shape()) + ", expected " +
                                    shape_string(dst.shape()));
        if (!it->second.all_finite()) throw IoError(path, "tensor '" + name + "' contains non-finite values");
        dst = std::move(it->second);
    };
    for (auto& [name, t] : ck.params.named_tensors()) take(name, *t);
    for (const auto& b : ck.params.blocks)
        for (float v : b.running_var.values())
            if (v < 0.0f) throw IoError(path, "negative running variance");

    if (records.count("adam.step")) {
        AdamState<float> adam = AdamState<float>::for_params(ck.params);
        const auto names = ck.params.trainable_names();
        for (std::size_t i = 0; i < names.size(); ++i) {
            take("adam.m/" + names[i], adam.m[i]);
            take("adam.v/" + names[i], adam.v[i]);
        }
        adam.step = static_cast<std::int64_t>(records.at("adam.step")[0]);
        ck.adam = std::move(adam);
    }
    return ck;
}

}  // namespace gateseed::nn

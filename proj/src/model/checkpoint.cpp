#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "qocr/error.hpp"
#include "qocr/model.hpp"

// Layout: "QOCR", u16 version, u32 section count, then per section
//   u16 name length, name, u64 payload length, u64 FNV-1a of payload, payload.
// Integers and doubles are little-endian; doubles are stored bit-exact.

namespace qocr::model {

namespace {

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer {
public:
    template <class T>
    void integer(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) bytes.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
    void real(double v) { integer(std::bit_cast<std::uint64_t>(v)); }
    void text(const std::string& s) {
        integer<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    void tensor(const std::string& name, const Tensor& t) {
        text(name);
        integer<std::uint64_t>(t.rank());
        for (auto d : t.shape()) integer<std::uint64_t>(d);
        for (double v : t.values()) real(v);
    }
    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& b, std::string section) : bytes_(b), section_(std::move(section)) {}

    template <class T>
    T integer() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    double real() { return std::bit_cast<double>(integer<std::uint64_t>()); }
    std::string text() {
        const auto n = integer<std::uint32_t>();
        need(n);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }
    std::pair<std::string, Tensor> tensor() {
        auto name = text();
        const auto rank = integer<std::uint64_t>();
        if (rank == 0 || rank > 8) fail("tensor '" + name + "' has implausible rank");
        Shape shape;
        std::size_t count = 1;
        for (std::uint64_t i = 0; i < rank; ++i) {
            shape.push_back(integer<std::uint64_t>());
            if (shape.back() == 0 || shape.back() > (std::size_t{1} << 32)) fail("tensor '" + name + "' has a bad extent");
            count *= shape.back();
        }
        need(count * 8);
        std::vector<double> data(count);
        for (auto& v : data) v = real();
        return {std::move(name), Tensor(std::move(shape), std::move(data))};
    }
    void finish() const {
        if (pos_ != bytes_.size()) fail("trailing bytes");
    }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) fail("truncated");
    }
    [[noreturn]] void fail(const std::string& why) const {
        throw CheckpointCorruptError("checkpoint section '" + section_ + "': " + why);
    }

    const std::vector<std::uint8_t>& bytes_;
    std::string section_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> encode_config(const ModelConfig& c) {
    Writer w;
    w.text(c.name);
    w.integer<std::uint64_t>(c.input_width);
    w.integer<std::uint64_t>(c.input_height);
    w.integer<std::uint64_t>(c.conv.size());
    for (const auto& l : c.conv) {
        w.integer<std::uint64_t>(l.kernel);
        w.integer<std::uint64_t>(l.filters);
        w.integer<std::uint64_t>(l.pool.along_width);
        w.integer<std::uint64_t>(l.pool.along_height);
    }
    w.integer<std::uint64_t>(c.lstm_hidden);
    w.integer<std::uint64_t>(c.lstm_layers);
    w.integer<std::uint64_t>(c.vocab_size);
    w.integer<std::uint8_t>(c.right_to_left ? 1 : 0);
    w.real(c.bn_momentum);
    w.real(c.bn_epsilon);
    return w.bytes;
}

ModelConfig decode_config(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes, "config");
    ModelConfig c;
    c.name = r.text();
    c.input_width = r.integer<std::uint64_t>();
    c.input_height = r.integer<std::uint64_t>();
    const auto n = r.integer<std::uint64_t>();
    if (n > 64) throw CheckpointCorruptError("checkpoint section 'config': implausible layer count");
    c.conv.resize(n);
    for (auto& l : c.conv) {
        l.kernel = r.integer<std::uint64_t>();
        l.filters = r.integer<std::uint64_t>();
        l.pool.along_width = r.integer<std::uint64_t>();
        l.pool.along_height = r.integer<std::uint64_t>();
    }
    c.lstm_hidden = r.integer<std::uint64_t>();
    c.lstm_layers = r.integer<std::uint64_t>();
    c.vocab_size = r.integer<std::uint64_t>();
    c.right_to_left = r.integer<std::uint8_t>() != 0;
    c.bn_momentum = r.real();
    c.bn_epsilon = r.real();
    r.finish();
    return c;
}

const char* const kSections[] = {"config", "vocabulary", "tensors", "optimizer", "counter"};

}  // namespace

void save_checkpoint(const TrainingState& state, const std::filesystem::path& path) {
    std::map<std::string, std::vector<std::uint8_t>> payload;
    payload["config"] = encode_config(state.config);
    {
        Writer w;
        w.integer<std::uint64_t>(state.vocabulary.size());
        for (const auto& s : state.vocabulary.symbols()) w.text(s);
        payload["vocabulary"] = std::move(w.bytes);
    }
    {
        Writer w;
        const auto named = state.params.tensors();
        w.integer<std::uint64_t>(named.size());
        for (const auto& t : named) w.tensor(t.name, *t.tensor);
        payload["tensors"] = std::move(w.bytes);
    }
    {
        Writer w;
        const auto named = state.params.trainable();
        w.integer<std::uint64_t>(named.size());
        for (std::size_t i = 0; i < named.size(); ++i) w.tensor(named[i].name, state.accumulators.at(i));
        payload["optimizer"] = std::move(w.bytes);
    }
    {
        Writer w;
        w.integer<std::uint64_t>(state.iteration);
        w.integer<std::uint64_t>(state.seed);
        w.real(state.hyper.learning_rate);
        w.real(state.hyper.rho);
        w.real(state.hyper.epsilon);
        w.integer<std::uint64_t>(state.hyper.batch_size);
        payload["counter"] = std::move(w.bytes);
    }

    Writer file;
    for (char c : std::string("QOCR")) file.integer<std::uint8_t>(static_cast<std::uint8_t>(c));
    file.integer<std::uint16_t>(kCheckpointVersion);
    file.integer<std::uint32_t>(static_cast<std::uint32_t>(std::size(kSections)));
    for (const char* name : kSections) {
        const auto& bytes = payload[name];
        const std::string n(name);
        file.integer<std::uint16_t>(static_cast<std::uint16_t>(n.size()));
        file.bytes.insert(file.bytes.end(), n.begin(), n.end());
        file.integer<std::uint64_t>(bytes.size());
        file.integer<std::uint64_t>(fnv1a(bytes));
        file.bytes.insert(file.bytes.end(), bytes.begin(), bytes.end());
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out.write(reinterpret_cast<const char*>(file.bytes.data()), static_cast<std::streamsize>(file.bytes.size()));
    if (!out) throw IoError("write failed for checkpoint " + path.string());
}

TrainingState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    const std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in), {});

    Reader header(bytes, "header");
    std::string magic;
    for (int i = 0; i < 4; ++i) magic += static_cast<char>(header.integer<std::uint8_t>());
    if (magic != "QOCR") throw CheckpointCorruptError(path.string() + " is not a checkpoint (bad magic)");
    const auto version = header.integer<std::uint16_t>();
    if (version != kCheckpointVersion)
        throw CheckpointVersionError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                                     std::to_string(kCheckpointVersion) + ")");
    const auto count = header.integer<std::uint32_t>();

    std::map<std::string, std::vector<std::uint8_t>> sections;
    std::size_t pos = 10;
    for (std::uint32_t s = 0; s < count; ++s) {
        auto need = [&](std::size_t n) {
            if (bytes.size() - pos < n) throw CheckpointCorruptError("checkpoint truncated in section table");
        };
        need(2);
        const std::size_t name_len = bytes[pos] | (std::size_t{bytes[pos + 1]} << 8);
        pos += 2;
        need(name_len + 16);
        std::string name(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + name_len));
        pos += name_len;
        std::uint64_t len = 0, sum = 0;
        for (int i = 0; i < 8; ++i) len |= std::uint64_t{bytes[pos + i]} << (8 * i);
        for (int i = 0; i < 8; ++i) sum |= std::uint64_t{bytes[pos + 8 + i]} << (8 * i);
        pos += 16;
        if (bytes.size() - pos < len) throw CheckpointCorruptError("checkpoint section '" + name + "': truncated");
        std::vector<std::uint8_t> payload(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                          bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
        if (fnv1a(payload) != sum) throw CheckpointCorruptError("checkpoint section '" + name + "': checksum mismatch");
        sections[name] = std::move(payload);
    }
    if (pos != bytes.size()) throw CheckpointCorruptError("checkpoint has trailing bytes");
    for (const char* name : kSections)
        if (!sections.count(name)) throw CheckpointCorruptError(std::string("checkpoint lacks section '") + name + "'");

    const ModelConfig cfg = decode_config(sections["config"]);

    std::vector<std::string> symbols;
    {
        Reader r(sections["vocabulary"], "vocabulary");
        const auto n = r.integer<std::uint64_t>();
        if (n > 1'000'000) throw CheckpointCorruptError("checkpoint section 'vocabulary': implausible size");
        for (std::uint64_t i = 0; i < n; ++i) symbols.push_back(r.text());
        r.finish();
    }
    const Vocabulary vocab(std::move(symbols));
    if (vocab.size() != cfg.vocab_size)
        throw CheckpointMismatchError("checkpoint vocabulary has " + std::to_string(vocab.size()) +
                                      " symbols but the config expects " + std::to_string(cfg.vocab_size));

    Reader cr(sections["counter"], "counter");
    const auto iteration = cr.integer<std::uint64_t>();
    const auto seed = cr.integer<std::uint64_t>();
    Hyperparameters hyper;
    hyper.learning_rate = cr.real();
    hyper.rho = cr.real();
    hyper.epsilon = cr.real();
    hyper.batch_size = cr.integer<std::uint64_t>();
    cr.finish();

    TrainingState state;
    try {
        state = build_model(cfg, vocab, seed, hyper);
    } catch (const ConfigError& e) {
        throw CheckpointMismatchError(std::string("checkpoint config is inconsistent: ") + e.what());
    }
    if (!(state.config == cfg)) throw CheckpointMismatchError("checkpoint config does not round-trip");
    state.iteration = iteration;

    auto fill = [&](const std::string& section, std::vector<NamedTensor<Tensor>> targets) {
        Reader r(sections[section], section);
        const auto n = r.integer<std::uint64_t>();
        if (n != targets.size())
            throw CheckpointMismatchError("checkpoint section '" + section + "' holds " + std::to_string(n) +
                                          " tensors, the config implies " + std::to_string(targets.size()));
        for (auto& target : targets) {
            auto [name, t] = r.tensor();
            if (name != target.name)
                throw CheckpointMismatchError("checkpoint section '" + section + "': expected tensor '" + target.name +
                                              "', found '" + name + "'");
            if (t.shape() != target.tensor->shape())
                throw CheckpointMismatchError("checkpoint tensor '" + name + "' has shape " + shape_string(t.shape()) +
                                              ", the config implies " + shape_string(target.tensor->shape()));
            *target.tensor = std::move(t);
        }
        r.finish();
    };
    fill("tensors", state.params.tensors());

    std::vector<NamedTensor<Tensor>> acc;
    const auto names = state.params.trainable();
    for (std::size_t i = 0; i < names.size(); ++i) acc.push_back({names[i].name, &state.accumulators[i], true});
    fill("optimizer", acc);
    return state;
}

}  // namespace qocr::model

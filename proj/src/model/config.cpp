#include "qocr/error.hpp"
#include "qocr/model.hpp"

namespace qocr::model {

namespace {

// Expected output extents per conv block of the default preset on a 128x32 input.
const std::vector<FeatureShape> kPaperChain{{64, 16, 32}, {32, 8, 64}, {32, 4, 128}, {32, 2, 128}, {32, 1, 256}};

}  // namespace

ModelConfig ModelConfig::paper(std::size_t vocab_size) {
    ModelConfig c;
    c.name = "paper";
    c.conv = {{5, 32, {2, 2}}, {5, 64, {2, 2}}, {3, 128, {1, 2}}, {3, 128, {1, 2}}, {3, 256, {1, 2}}};
    c.lstm_hidden = 256;
    c.lstm_layers = 2;
    c.vocab_size = vocab_size;
    return c;
}

ModelConfig ModelConfig::toy(std::size_t vocab_size) {
    ModelConfig c = paper(vocab_size);
    c.name = "toy";
    for (auto& layer : c.conv) layer.filters /= 2;
    c.lstm_hidden = 64;
    return c;
}

ModelConfig ModelConfig::preset(const std::string& name, std::size_t vocab_size) {
    if (name == "paper") return paper(vocab_size);
    if (name == "toy") return toy(vocab_size);
    throw ConfigError("unknown model config '" + name + "' (expected paper or toy)");
}

std::vector<FeatureShape> conv_shape_chain(const ModelConfig& cfg) {
    if (cfg.conv.empty()) throw ConfigError("model needs at least one conv layer");
    if (cfg.input_width == 0 || cfg.input_height == 0) throw ConfigError("input extents must be positive");
    std::vector<FeatureShape> chain;
    std::size_t w = cfg.input_width, h = cfg.input_height;
    for (std::size_t i = 0; i < cfg.conv.size(); ++i) {
        const auto& l = cfg.conv[i];
        const std::string where = "conv layer " + std::to_string(i + 1) + ": ";
        if (l.kernel == 0 || l.kernel % 2 == 0) throw ConfigError(where + "kernel size must be odd");
        if (l.filters == 0) throw ConfigError(where + "needs at least one filter");
        if (l.pool.along_width == 0 || l.pool.along_height == 0) throw ConfigError(where + "pool window must be positive");
        if (w % l.pool.along_width != 0 || h % l.pool.along_height != 0)
            throw ConfigError(where + "pool window (" + std::to_string(l.pool.along_width) + "," +
                              std::to_string(l.pool.along_height) + ") does not divide feature map " +
                              std::to_string(w) + "x" + std::to_string(h));
        w /= l.pool.along_width;
        h /= l.pool.along_height;
        chain.push_back({w, h, l.filters});
    }
    if (chain.back().height != 1)
        throw ConfigError("conv layer " + std::to_string(cfg.conv.size()) + ": final feature height is " +
                          std::to_string(chain.back().height) + ", expected 1 to form a sequence");
    if (cfg.name == "paper") {
        for (std::size_t i = 0; i < chain.size() && i < kPaperChain.size(); ++i)
            if (!(chain[i] == kPaperChain[i]))
                throw ConfigError("conv layer " + std::to_string(i + 1) + ": output (" + std::to_string(chain[i].width) +
                                  "," + std::to_string(chain[i].height) + "," + std::to_string(chain[i].channels) +
                                  ") departs from the paper network's (" + std::to_string(kPaperChain[i].width) + "," +
                                  std::to_string(kPaperChain[i].height) + "," +
                                  std::to_string(kPaperChain[i].channels) + ")");
        if (chain.size() != kPaperChain.size()) throw ConfigError("paper network has exactly 5 conv layers");
    }
    return chain;
}

void validate_config(const ModelConfig& cfg) {
    const auto chain = conv_shape_chain(cfg);
    if (cfg.lstm_layers == 0 || cfg.lstm_hidden == 0) throw ConfigError("recurrent stack must be non-empty");
    if (cfg.vocab_size == 0) throw ConfigError("vocabulary must be non-empty");
    if (!(cfg.bn_momentum > 0.0 && cfg.bn_momentum < 1.0)) throw ConfigError("batch-norm momentum must lie in (0,1)");
    if (!(cfg.bn_epsilon > 0.0)) throw ConfigError("batch-norm epsilon must be positive");
}

}  // namespace qocr::model

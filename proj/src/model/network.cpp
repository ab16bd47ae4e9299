#include <algorithm>
#include <cmath>

#include "qocr/error.hpp"
#include "qocr/model.hpp"

namespace qocr::model {

namespace {

template <class Self, class T>
std::vector<NamedTensor<T>> collect(Self& p, bool include_buffers) {
    std::vector<NamedTensor<T>> out;
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        const std::string b = "block" + std::to_string(i + 1) + ".";
        auto& blk = p.blocks[i];
        out.push_back({b + "conv.kernels", &blk.conv.kernels, true});
        out.push_back({b + "conv.bias", &blk.conv.bias, true});
        out.push_back({b + "norm.gamma", &blk.norm.gamma, true});
        out.push_back({b + "norm.beta", &blk.norm.beta, true});
        if (include_buffers) {
            out.push_back({b + "norm.running_mean", &blk.norm.running_mean, false});
            out.push_back({b + "norm.running_var", &blk.norm.running_var, false});
        }
    }
    for (std::size_t l = 0; l < p.recurrent.size(); ++l) {
        const std::string r = "lstm" + std::to_string(l + 1) + ".";
        for (auto [dir, cell] : {std::pair{"fwd.", &p.recurrent[l].forward}, std::pair{"bwd.", &p.recurrent[l].backward}}) {
            out.push_back({r + dir + "input_weights", &cell->input_weights, true});
            out.push_back({r + dir + "recurrent_weights", &cell->recurrent_weights, true});
            out.push_back({r + dir + "bias", &cell->bias, true});
        }
    }
    out.push_back({"projection.weight", &p.projection.weight, true});
    out.push_back({"projection.bias", &p.projection.bias, true});
    return out;
}

}  // namespace

std::vector<NamedTensor<Tensor>> ModelParams::tensors() { return collect<ModelParams, Tensor>(*this, true); }
std::vector<NamedTensor<const Tensor>> ModelParams::tensors() const {
    return collect<const ModelParams, const Tensor>(*this, true);
}
std::vector<NamedTensor<Tensor>> ModelParams::trainable() { return collect<ModelParams, Tensor>(*this, false); }
std::vector<NamedTensor<const Tensor>> ModelParams::trainable() const {
    return collect<const ModelParams, const Tensor>(*this, false);
}

TrainingState build_model(ModelConfig cfg, const Vocabulary& vocabulary, std::uint64_t seed, Hyperparameters hyper) {
    cfg.vocab_size = vocabulary.size();
    validate_config(cfg);
    const auto chain = conv_shape_chain(cfg);

    TrainingState s;
    s.config = cfg;
    s.vocabulary = vocabulary;
    s.seed = seed;
    s.hyper = hyper;

    SplitMix64 rng(derive_seed(seed, 0x696E6974ULL));
    std::size_t channels = 1;
    for (const auto& layer : cfg.conv) {
        ConvBlockParams blk{nn::init_conv(layer.kernel, layer.kernel, channels, layer.filters, rng),
                            nn::init_batchnorm(layer.filters)};
        blk.norm.momentum = cfg.bn_momentum;
        blk.norm.epsilon = cfg.bn_epsilon;
        s.params.blocks.push_back(std::move(blk));
        channels = layer.filters;
    }
    std::size_t width = chain.back().channels;
    for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
        nn::BiLstmParams bi;
        bi.forward = nn::init_lstm(width, cfg.lstm_hidden, rng);
        bi.backward = nn::init_lstm(width, cfg.lstm_hidden, rng);
        s.params.recurrent.push_back(std::move(bi));
        width = 2 * cfg.lstm_hidden;
    }
    s.params.projection = nn::init_dense(width, cfg.vocab_size + 1, rng);

    for (const auto& t : s.params.trainable()) s.accumulators.emplace_back(t.tensor->shape());
    return s;
}

ForwardTrace forward_trace(const ModelConfig& cfg, const ModelParams& params, const Tensor& images, nn::Mode mode) {
    if (images.rank() != 3 || images.dim(1) != cfg.input_width || images.dim(2) != cfg.input_height)
        throw DimensionError("model expects images [N," + std::to_string(cfg.input_width) + "," +
                             std::to_string(cfg.input_height) + "], got " + shape_string(images.shape()));
    const std::size_t N = images.dim(0);
    ForwardTrace tr;
    Tensor x = images.reshaped({N, cfg.input_width, cfg.input_height, 1});
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
        const auto& blk = params.blocks[i];
        BlockTrace bt;
        bt.input = std::move(x);
        bt.conv_out = nn::conv2d_forward(bt.input, blk.conv);
        auto norm = nn::batchnorm_forward(bt.conv_out, blk.norm, mode);
        bt.norm = std::move(norm.cache);
        bt.norm_out = std::move(norm.output);
        bt.relu_out = nn::relu(bt.norm_out);
        auto pooled = nn::maxpool_forward(bt.relu_out, cfg.conv[i].pool);
        bt.pool_argmax = std::move(pooled.argmax);
        bt.pool_out = std::move(pooled.output);
        x = bt.pool_out;
        tr.blocks.push_back(std::move(bt));
    }
    // [N][T][1][C] -> [N][T][C]: the unit height axis is dropped, width becomes time.
    tr.sequence = x.reshaped({N, x.dim(1), x.dim(3)});
    Tensor seq = tr.sequence;
    for (const auto& layer : params.recurrent) {
        tr.recurrent_inputs.push_back(seq);
        tr.recurrent.push_back(nn::bidirectional_lstm(seq, layer));
        seq = tr.recurrent.back().output;
    }
    tr.logits = nn::project(seq, params.projection);
    check_finite(tr.logits, "model forward");
    return tr;
}

Tensor forward(const TrainingState& state, const Tensor& images, nn::Mode mode) {
    return forward_trace(state.config, state.params, images, mode).logits;
}

ModelParams backward([[maybe_unused]] const ModelConfig& cfg, const ModelParams& params, const ForwardTrace& trace,
                     const Tensor& grad_logits) {
    ModelParams g;
    g.blocks.resize(params.blocks.size());
    g.recurrent.resize(params.recurrent.size());

    const Tensor& last_seq = trace.recurrent.empty() ? trace.sequence : trace.recurrent.back().output;
    auto dense = nn::project_backward(last_seq, params.projection, grad_logits);
    g.projection = {std::move(dense.weight), std::move(dense.bias)};
    Tensor d = std::move(dense.input);

    for (std::size_t l = params.recurrent.size(); l-- > 0;) {
        auto bg = nn::bidirectional_lstm_backward(trace.recurrent[l], params.recurrent[l], d);
        g.recurrent[l].forward = {std::move(bg.forward.input_weights), std::move(bg.forward.recurrent_weights),
                                  std::move(bg.forward.bias)};
        g.recurrent[l].backward = {std::move(bg.backward.input_weights), std::move(bg.backward.recurrent_weights),
                                   std::move(bg.backward.bias)};
        d = std::move(bg.input);
    }

    const auto& last_pool = trace.blocks.back().pool_out;
    d = std::move(d).reshaped(last_pool.shape());
    for (std::size_t i = params.blocks.size(); i-- > 0;) {
        const auto& bt = trace.blocks[i];
        d = nn::maxpool_backward(bt.relu_out.shape(), bt.pool_argmax, d);
        d = nn::relu_backward(bt.norm_out, d);
        auto ng = nn::batchnorm_backward(bt.norm, params.blocks[i].norm, d);
        g.blocks[i].norm.gamma = std::move(ng.gamma);
        g.blocks[i].norm.beta = std::move(ng.beta);
        auto cg = nn::conv2d_backward(bt.input, params.blocks[i].conv, ng.input, i > 0);
        g.blocks[i].conv = {std::move(cg.kernels), std::move(cg.bias)};
        d = std::move(cg.input);
    }
    return g;
}

ctc::LabelSequence encode_label(const TrainingState& state, const std::string& word) {
    auto label = state.vocabulary.encode(word);
    if (state.config.right_to_left) std::reverse(label.begin(), label.end());
    return label;
}

std::string decode_label(const TrainingState& state, const ctc::LabelSequence& label) {
    auto ordered = label;
    if (state.config.right_to_left) std::reverse(ordered.begin(), ordered.end());
    return state.vocabulary.decode(ordered);
}

LossResult loss_and_gradients(const ModelConfig& cfg, const ModelParams& params, const Batch& batch) {
    const std::size_t N = batch.images.dim(0);
    if (batch.labels.size() != N)
        throw DimensionError("batch has " + std::to_string(N) + " images but " + std::to_string(batch.labels.size()) +
                             " labels");
    LossResult r;
    r.trace = forward_trace(cfg, params, batch.images, nn::Mode::train);
    const std::size_t T = r.trace.logits.dim(1), K = r.trace.logits.dim(2);
    Tensor grad(r.trace.logits.shape());
    double total = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        Tensor logits({T, K}, std::vector<double>(r.trace.logits.data() + n * T * K, r.trace.logits.data() + (n + 1) * T * K));
        ctc::CtcResult c;
        try {
            c = ctc::ctc_loss(logits, batch.labels[n]);
        } catch (const InfeasibleLabelError& e) {
            const std::string who = n < batch.record_ids.size() ? "record " + std::to_string(batch.record_ids[n])
                                                                 : "batch sample " + std::to_string(n);
            throw InfeasibleLabelError(who + ": " + e.what());
        }
        total += c.loss;
        for (std::size_t i = 0; i < T * K; ++i) grad[n * T * K + i] = c.grad_logits[i] / static_cast<double>(N);
    }
    r.mean_loss = total / static_cast<double>(N);
    r.grads = backward(cfg, params, r.trace, grad);
    return r;
}

void apply_rmsprop(TrainingState& state, const ModelParams& grads) {
    auto params = state.params.trainable();
    const auto g = grads.trainable();
    const auto& h = state.hyper;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& theta = *params[i].tensor;
        const Tensor& grad = *g[i].tensor;
        Tensor& acc = state.accumulators[i];
        for (std::size_t j = 0; j < theta.size(); ++j) {
            acc[j] = h.rho * acc[j] + (1.0 - h.rho) * grad[j] * grad[j];
            theta[j] -= h.learning_rate * grad[j] / (std::sqrt(acc[j]) + h.epsilon);
        }
    }
}

StepResult train_step(TrainingState& state, const Batch& batch) {
    auto r = loss_and_gradients(state.config, state.params, batch);
    for (std::size_t i = 0; i < state.params.blocks.size(); ++i)
        nn::update_running_stats(state.params.blocks[i].norm, r.trace.blocks[i].norm);
    apply_rmsprop(state, r.grads);
    ++state.iteration;
    return {r.mean_loss};
}

std::vector<std::string> recognize_all(const TrainingState& state, const std::vector<Tensor>& preprocessed) {
    std::vector<std::string> out;
    out.reserve(preprocessed.size());
    const std::size_t chunk = std::max<std::size_t>(1, state.hyper.batch_size);
    const std::size_t W = state.config.input_width, H = state.config.input_height;
    for (std::size_t start = 0; start < preprocessed.size(); start += chunk) {
        const std::size_t n = std::min(chunk, preprocessed.size() - start);
        Tensor images({n, W, H});
        for (std::size_t i = 0; i < n; ++i) {
            const Tensor& img = preprocessed[start + i];
            if (img.size() != W * H) throw DimensionError("preprocessed image has shape " + shape_string(img.shape()));
            std::copy_n(img.data(), W * H, images.data() + i * W * H);
        }
        const Tensor logits = forward(state, images, nn::Mode::infer);
        const std::size_t T = logits.dim(1), K = logits.dim(2);
        for (std::size_t i = 0; i < n; ++i) {
            Tensor row({T, K}, std::vector<double>(logits.data() + i * T * K, logits.data() + (i + 1) * T * K));
            out.push_back(decode_label(state, ctc::best_path_decode(row)));
        }
    }
    return out;
}

std::string recognize(const TrainingState& state, const dataset::GrayImage& img) {
    return recognize_all(state, {dataset::preprocess_resize(img, state.config.input_width, state.config.input_height)})
        .front();
}

Activations inspect_activations(const TrainingState& state, const dataset::GrayImage& img) {
    const auto& cfg = state.config;
    Tensor x = dataset::preprocess_resize(img, cfg.input_width, cfg.input_height)
                   .reshaped({1, cfg.input_width, cfg.input_height});
    const auto tr = forward_trace(cfg, state.params, x, nn::Mode::infer);
    Activations a;
    for (const auto& bt : tr.blocks) {
        const auto& s = bt.pool_out.shape();
        a.blocks.push_back(bt.pool_out.reshaped({s[1], s[2], s[3]}));
    }
    a.sequence = tr.sequence.reshaped({tr.sequence.dim(1), tr.sequence.dim(2)});
    a.logits = tr.logits.reshaped({tr.logits.dim(1), tr.logits.dim(2)});
    a.argmax = ctc::argmax_path(a.logits);
    return a;
}

}  // namespace qocr::model

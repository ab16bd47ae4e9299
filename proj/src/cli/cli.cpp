#include "qocr/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qocr/dataset.hpp"
#include "qocr/error.hpp"
#include "qocr/model.hpp"
#include "qocr/rng.hpp"

namespace qocr::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr const char* kBuiltinVocab = "builtin";

// --------------------------------------------------------------- manifests

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const json& options,
                    std::vector<std::string> outputs) {
    outputs.push_back(kManifestFile);
    json m;
    m["tool"] = "qocr";
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    m["options"] = options;
    m["outputs"] = outputs;
    write_text(dir / kManifestFile, m.dump(2) + "\n");
}

// Rebuilds the command line recorded in a manifest, optionally redirecting --out.
std::vector<std::string> replay_args(const fs::path& path, const std::string& out_override) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    json m;
    try {
        m = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("manifest " + path.string() + ": " + e.what());
    }
    if (!m.contains("subcommand") || !m["subcommand"].is_string() || !m.contains("options") ||
        !m["options"].is_object())
        throw ParseError("manifest " + path.string() + " lacks a subcommand or options");
    std::vector<std::string> args{m["subcommand"].get<std::string>()};
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    for (const auto& [key, value] : m["options"].items()) {
        const std::string flag = "--" + key;
        if (key == "out" && !out_override.empty()) {
            args.insert(args.end(), {flag, out_override});
        } else if (value.is_null()) {
            continue;
        } else if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
        } else if (value.is_array()) {
            args.push_back(flag);
            for (const auto& v : value) args.push_back(scalar(v));
        } else {
            args.insert(args.end(), {flag, scalar(value)});
        }
    }
    return args;
}

// --------------------------------------------------------------- helpers

fs::path prepare_out(const std::string& out, const std::vector<std::string>& inputs = {}) {
    const fs::path dir(out);
    for (const auto& in : inputs)
        if (!in.empty() && fs::exists(in) && fs::exists(dir) && fs::equivalent(fs::path(in), dir))
            throw ArgumentError("--out must not be an input directory (" + in + ")");
    fs::create_directories(dir);
    return dir;
}

// "builtin" unless a vocabulary file was given or the data directory carries one.
std::string resolve_vocab(const std::string& flag, const std::string& data_dir) {
    if (!flag.empty()) return flag;
    if (!data_dir.empty() && fs::exists(fs::path(data_dir) / dataset::kVocabFile))
        return (fs::path(data_dir) / dataset::kVocabFile).string();
    return kBuiltinVocab;
}

Vocabulary load_vocab(const std::string& resolved) {
    return resolved == kBuiltinVocab ? Vocabulary::arabic_default() : Vocabulary::load(resolved);
}

json opt_or_null(const std::string& s) { return s.empty() ? json(nullptr) : json(s); }

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::vector<std::string> read_word_list(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open word list " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) words.push_back(line);
    }
    if (words.empty()) throw ArgumentError("word list " + path.string() + " is empty");
    return words;
}

dataset::GrayImage pick_image(const std::string& image, const std::string& data, long index) {
    if (!image.empty() && !data.empty()) throw UsageError("give either --image or --data/--index, not both");
    if (!image.empty()) return dataset::read_pgm(image);
    if (data.empty() || index < 0) throw UsageError("an input image is required: --image FILE or --data DIR --index N");
    const auto repo = dataset::read_repository(data);
    if (static_cast<std::size_t>(index) >= repo.size())
        throw ArgumentError("--index " + std::to_string(index) + " is out of range (repository has " +
                            std::to_string(repo.size()) + " records)");
    return repo.image(static_cast<std::size_t>(index));
}

// Per-channel min-max scaled feature maps tiled into one grayscale image.
dataset::GrayImage tile_channels(const Tensor& act) {
    const std::size_t W = act.dim(0), H = act.dim(1), C = act.dim(2);
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(C))));
    const std::size_t rows = (C + cols - 1) / cols;
    dataset::GrayImage img(static_cast<std::uint32_t>(cols * (W + 1) + 1), static_cast<std::uint32_t>(rows * (H + 1) + 1),
                           255);
    for (std::size_t c = 0; c < C; ++c) {
        double lo = act[c], hi = act[c];
        for (std::size_t i = c; i < act.size(); i += C) {
            lo = std::min(lo, act[i]);
            hi = std::max(hi, act[i]);
        }
        const std::size_t ox = 1 + (c % cols) * (W + 1), oy = 1 + (c / cols) * (H + 1);
        for (std::size_t x = 0; x < W; ++x)
            for (std::size_t y = 0; y < H; ++y) {
                const double v = act[(x * H + y) * C + c];
                const double u = hi > lo ? (v - lo) / (hi - lo) : 0.5;
                img.at(static_cast<std::uint32_t>(ox + x), static_cast<std::uint32_t>(oy + y)) =
                    static_cast<std::uint8_t>(std::lround(255.0 * u));
            }
    }
    return img;
}

// ------------------------------------------------------------ subcommands

struct GenOptions {
    std::string words, vocab, out, style = "bold";
    std::size_t random = 0, min_len = 7, max_len = 10, fonts = 2;
    std::uint32_t size_pt = 26;
    std::uint64_t seed = 0;
};

void cmd_gen(const GenOptions& o, std::ostream& out) {
    if (o.words.empty() == (o.random == 0)) throw UsageError("gen needs exactly one of --words FILE or --random N");
    if (o.fonts == 0) throw UsageError("--fonts must be at least 1");
    const std::string vocab_path = resolve_vocab(o.vocab, "");
    dataset::RendererConfig cfg;
    cfg.vocabulary = load_vocab(vocab_path);
    cfg.seed = o.seed;
    cfg.size_pt = o.size_pt;
    cfg.style = dataset::parse_style(o.style);
    const auto words = o.words.empty()
                           ? dataset::random_words(cfg.vocabulary, o.random, o.min_len, o.max_len, derive_seed(o.seed, 1))
                           : read_word_list(o.words);
    std::vector<std::uint32_t> fonts(o.fonts);
    for (std::size_t i = 0; i < fonts.size(); ++i) fonts[i] = static_cast<std::uint32_t>(i);
    const auto repo = dataset::generate_samples(words, fonts, cfg);

    const auto dir = prepare_out(o.out);
    dataset::write_repository(repo, dir);
    cfg.vocabulary.save(dir / dataset::kVocabFile);
    write_manifest(dir, "gen",
                   {{"words", opt_or_null(o.words)}, {"random", o.random}, {"min-len", o.min_len},
                    {"max-len", o.max_len}, {"fonts", o.fonts}, {"size-pt", o.size_pt}, {"style", o.style},
                    {"seed", o.seed}, {"vocab", vocab_path}, {"out", o.out}},
                   {dataset::kLabelsFile, dataset::kBlobFile, dataset::kVocabFile});
    out << "generated " << repo.size() << " samples (" << words.size() << " words x " << o.fonts << " fonts) in "
        << o.out << "\n";
}

struct SplitOptions {
    std::string data, out;
    std::vector<double> ratios{dataset::kDefaultRatios.begin(), dataset::kDefaultRatios.end()};
    std::uint64_t seed = 0;
};

void cmd_split(const SplitOptions& o, std::ostream& out) {
    if (o.ratios.size() != 3) throw UsageError("--ratios takes exactly three values (train validate test)");
    const auto repo = dataset::read_repository(o.data);
    const auto s = dataset::split_dataset(repo, {o.ratios[0], o.ratios[1], o.ratios[2]}, o.seed);
    const auto dir = prepare_out(o.out, {o.data});
    dataset::write_split(dir / "split.tsv", s);
    write_manifest(dir, "split", {{"data", o.data}, {"ratios", o.ratios}, {"seed", o.seed}, {"out", o.out}},
                   {"split.tsv"});
    out << "train " << s.train.size() << ", validate " << s.validate.size() << ", test " << s.test.size() << "\n";
}

struct NoiseOptions {
    std::string data, out;
    double sp_density = 0.05, speckle_var = 0.04;
    std::uint64_t seed = 0;
};

void cmd_noise(const NoiseOptions& o, std::ostream& out) {
    const auto repo = dataset::read_repository(o.data);
    const auto noisy = dataset::apply_noise(repo, {o.sp_density, o.speckle_var}, o.seed);
    const auto dir = prepare_out(o.out, {o.data});
    dataset::write_repository(noisy, dir);
    std::vector<std::string> outputs{dataset::kLabelsFile, dataset::kBlobFile};
    if (fs::exists(fs::path(o.data) / dataset::kVocabFile)) {
        fs::copy_file(fs::path(o.data) / dataset::kVocabFile, dir / dataset::kVocabFile,
                      fs::copy_options::overwrite_existing);
        outputs.push_back(dataset::kVocabFile);
    }
    write_manifest(dir, "noise",
                   {{"data", o.data}, {"sp-density", o.sp_density}, {"speckle-var", o.speckle_var}, {"seed", o.seed},
                    {"out", o.out}},
                   outputs);
    out << "wrote " << noisy.size() << " noisy samples to " << o.out << "\n";
}

struct TrainOptions {
    std::string data, split, config = "paper", vocab, resume, out;
    double lr = 0.001;
    std::size_t batch = 32;
    std::uint64_t iters = 2000, eval_every = 0, seed = 0;
    std::optional<double> stop_crr, stop_wrr;
};

void cmd_train(const TrainOptions& o, std::ostream& out) {
    const auto repo = dataset::read_repository(o.data);
    const std::string vocab_path = resolve_vocab(o.vocab, o.data);
    model::TrainingState state;
    if (!o.resume.empty()) {
        state = model::load_checkpoint(o.resume);
    } else {
        const auto vocab = load_vocab(vocab_path);
        model::Hyperparameters h;
        h.learning_rate = o.lr;
        h.batch_size = o.batch;
        state = model::build_model(model::ModelConfig::preset(o.config, vocab.size()), vocab, o.seed, h);
    }
    if (o.batch == 0) throw UsageError("--batch must be at least 1");

    dataset::Split split;
    if (!o.split.empty()) {
        split = dataset::read_split(o.split);
        for (const auto* part : {&split.train, &split.validate, &split.test})
            for (auto i : *part)
                if (i >= repo.size())
                    throw ArgumentError("split index " + std::to_string(i) + " exceeds the repository size " +
                                        std::to_string(repo.size()));
    } else {
        for (std::size_t i = 0; i < repo.size(); ++i) split.train.push_back(i);
    }

    const auto dir = prepare_out(o.out, {o.data});
    std::ofstream epochs(dir / "epochs.csv", std::ios::binary);
    std::ofstream losses(dir / "losses.csv", std::ios::binary);
    if (!epochs || !losses) throw IoError("cannot write training logs under " + o.out);
    epochs << "epoch,iteration,mean_loss,crr,wrr\n";
    losses << "iteration,loss\n";

    model::Schedule schedule;
    schedule.iterations = o.iters;
    schedule.eval_every = o.eval_every;
    schedule.on_step = [&](std::uint64_t iteration, double loss) {
        losses << iteration << ',' << fmt(loss, "%.17g") << '\n';
    };
    schedule.on_report = [&](const model::EpochReport& r, const model::TrainingState&) {
        epochs << r.epoch << ',' << r.iteration << ',' << fmt(r.mean_loss) << ',' << fmt(r.crr) << ',' << fmt(r.wrr)
               << '\n';
        epochs.flush();
        losses.flush();
        out << "epoch " << r.epoch << " iteration " << r.iteration << " loss " << fmt(r.mean_loss, "%.4f") << " crr "
            << fmt(r.crr, "%.4f") << " wrr " << fmt(r.wrr, "%.4f") << std::endl;
    };
    schedule.on_best = [&](const model::TrainingState& s) { model::save_checkpoint(s, dir / "best.qocr"); };
    if (o.stop_crr || o.stop_wrr)
        schedule.stop_when = [&](const model::EpochReport& r) {
            return r.crr >= o.stop_crr.value_or(0.0) && r.wrr >= o.stop_wrr.value_or(0.0);
        };
    model::train(state, repo, split, schedule);
    model::save_checkpoint(state, dir / "last.qocr");

    auto opt_num = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    write_manifest(dir, "train",
                   {{"data", o.data}, {"split", opt_or_null(o.split)}, {"config", state.config.name},
                    {"vocab", vocab_path}, {"lr", state.hyper.learning_rate}, {"batch", state.hyper.batch_size},
                    {"iters", o.iters}, {"eval-every", o.eval_every}, {"seed", state.seed},
                    {"resume", opt_or_null(o.resume)}, {"stop-crr", opt_num(o.stop_crr)},
                    {"stop-wrr", opt_num(o.stop_wrr)}, {"out", o.out}},
                   {"epochs.csv", "losses.csv", "best.qocr", "last.qocr"});
}

struct EvalOptions {
    std::string ckpt, data, split, set = "test", name, out;
};

void cmd_eval(const EvalOptions& o, std::ostream& out) {
    const auto state = model::load_checkpoint(o.ckpt);
    const auto repo = dataset::read_repository(o.data);
    std::vector<std::size_t> indices;
    if (!o.split.empty()) {
        indices = dataset::split_part(dataset::read_split(o.split), o.set);
    } else {
        for (std::size_t i = 0; i < repo.size(); ++i) indices.push_back(i);
    }
    if (indices.empty()) throw ArgumentError("nothing to evaluate: the selected set is empty");
    const std::string label = o.name.empty() ? fs::path(o.data).filename().string() : o.name;
    const auto report = metrics::evaluate_dataset(state, repo, indices, label);
    const auto dir = prepare_out(o.out, {o.data});
    metrics::write_report_csv(dir / "report.csv", {report});
    metrics::write_transcripts_csv(dir / "transcripts.csv", report);
    write_manifest(dir, "eval",
                   {{"ckpt", o.ckpt}, {"data", o.data}, {"split", opt_or_null(o.split)}, {"set", o.set},
                    {"name", label}, {"out", o.out}},
                   {"report.csv", "transcripts.csv"});
    out << label << ": samples " << report.samples << " crr " << fmt(report.crr, "%.4f") << " wrr "
        << fmt(report.wrr, "%.4f") << "\n";
}

struct ImageOptions {
    std::string ckpt, image, data, out;
    long index = -1;
};

json image_options(const ImageOptions& o) {
    return {{"ckpt", o.ckpt}, {"image", opt_or_null(o.image)}, {"data", opt_or_null(o.data)},
            {"index", o.index < 0 ? json(nullptr) : json(o.index)}, {"out", opt_or_null(o.out)}};
}

void cmd_recognize(const ImageOptions& o, std::ostream& out) {
    const auto state = model::load_checkpoint(o.ckpt);
    const auto text = model::recognize(state, pick_image(o.image, o.data, o.index));
    out << text << "\n";
    if (o.out.empty()) return;
    const auto dir = prepare_out(o.out, {o.data});
    write_text(dir / "prediction.txt", text + "\n");
    write_manifest(dir, "recognize", image_options(o), {"prediction.txt"});
}

void cmd_inspect(const ImageOptions& o, std::ostream& out) {
    if (o.out.empty()) throw UsageError("inspect needs --out");
    const auto state = model::load_checkpoint(o.ckpt);
    const auto act = model::inspect_activations(state, pick_image(o.image, o.data, o.index));
    const auto dir = prepare_out(o.out, {o.data});
    std::vector<std::string> outputs;
    for (std::size_t i = 0; i < act.blocks.size(); ++i) {
        const std::string name = "block" + std::to_string(i + 1) + ".pgm";
        dataset::write_pgm(dir / name, tile_channels(act.blocks[i]));
        outputs.push_back(name);
        const auto& s = act.blocks[i].shape();
        out << "block " << i + 1 << ": " << s[0] << "x" << s[1] << "x" << s[2] << "\n";
    }
    std::ostringstream logits;
    const std::size_t T = act.logits.dim(0), K = act.logits.dim(1);
    logits << "step";
    for (std::size_t k = 0; k < K; ++k) logits << ",k" << k;
    logits << ",argmax\n";
    for (std::size_t t = 0; t < T; ++t) {
        logits << t;
        for (std::size_t k = 0; k < K; ++k) logits << ',' << fmt(act.logits.at({t, k}));
        logits << ',' << act.argmax[t] << '\n';
    }
    write_text(dir / "logits.csv", logits.str());
    outputs.push_back("logits.csv");
    write_manifest(dir, "inspect", image_options(o), outputs);
    out << "sequence: " << act.sequence.dim(0) << " steps x " << act.sequence.dim(1) << " features\n";
}

struct ReportOptions {
    std::vector<std::string> inputs;
    std::string out;
};

void cmd_report(const ReportOptions& o, std::ostream& out) {
    std::vector<metrics::EvalReport> reports;
    for (const auto& in : o.inputs) {
        auto rows = metrics::read_report_csv(in);
        reports.insert(reports.end(), rows.begin(), rows.end());
    }
    if (reports.empty()) throw ArgumentError("the input reports hold no rows");
    const auto dir = prepare_out(o.out);
    metrics::write_report_csv(dir / "summary.csv", reports);
    write_text(dir / "chart.svg", bar_chart_svg(reports));
    write_manifest(dir, "report", {{"inputs", o.inputs}, {"out", o.out}}, {"summary.csv", "chart.svg"});
    out << "summarized " << reports.size() << " experiments in " << o.out << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Segmentation-free text-line recognizer", "qocr"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(0, 1);
    std::string manifest, replay_out;
    app.add_option("--manifest", manifest, "Replay the run recorded in a manifest.json");
    app.add_option("--replay-out", replay_out, "Output directory for a replayed run (default: the recorded one)");

    GenOptions gen;
    auto* g = app.add_subcommand("gen", "Render a synthetic word-image repository");
    g->add_option("--words", gen.words, "Word list, one word per line");
    g->add_option("--random", gen.random, "Draw this many distinct random words instead of reading --words");
    g->add_option("--min-len", gen.min_len, "Shortest random word (symbols)")->capture_default_str();
    g->add_option("--max-len", gen.max_len, "Longest random word (symbols)")->capture_default_str();
    g->add_option("--fonts", gen.fonts, "Number of synthetic fonts")->capture_default_str();
    g->add_option("--size-pt", gen.size_pt, "Nominal glyph size")->capture_default_str();
    g->add_option("--style", gen.style, "regular or bold")->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--vocab", gen.vocab, "Vocabulary file, one symbol per line (default: built-in)");
    g->add_option("--out", gen.out)->required();

    SplitOptions split;
    auto* sp = app.add_subcommand("split", "Shuffle a repository into train/validate/test");
    sp->add_option("--data", split.data)->required();
    sp->add_option("--ratios", split.ratios, "Train, validate and test fractions")->expected(3)->capture_default_str();
    sp->add_option("--seed", split.seed)->capture_default_str();
    sp->add_option("--out", split.out)->required();

    NoiseOptions noise;
    auto* n = app.add_subcommand("noise", "Write a noisy copy of a repository");
    n->add_option("--data", noise.data)->required();
    n->add_option("--sp-density", noise.sp_density, "Salt-and-pepper density")->capture_default_str();
    n->add_option("--speckle-var", noise.speckle_var, "Speckle variance")->capture_default_str();
    n->add_option("--seed", noise.seed)->capture_default_str();
    n->add_option("--out", noise.out)->required();

    TrainOptions train;
    auto* t = app.add_subcommand("train", "Train a recognizer");
    t->add_option("--data", train.data)->required();
    t->add_option("--split", train.split, "split.tsv; without it every record is used for training");
    t->add_option("--config", train.config, "paper or toy")->capture_default_str();
    t->add_option("--vocab", train.vocab, "Vocabulary file (default: <data>/vocab.txt, else built-in)");
    t->add_option("--lr", train.lr)->capture_default_str();
    t->add_option("--batch", train.batch)->capture_default_str();
    t->add_option("--iters", train.iters, "Train until the iteration counter reaches this")->capture_default_str();
    t->add_option("--eval-every", train.eval_every, "Iterations between evaluations (0: once per epoch)")
        ->capture_default_str();
    t->add_option("--seed", train.seed)->capture_default_str();
    t->add_option("--resume", train.resume, "Continue from a checkpoint");
    t->add_option("--stop-crr", train.stop_crr, "Stop once validation CRR reaches this (with --stop-wrr)");
    t->add_option("--stop-wrr", train.stop_wrr, "Stop once validation WRR reaches this (with --stop-crr)");
    t->add_option("--out", train.out)->required();

    EvalOptions ev;
    auto* e = app.add_subcommand("eval", "Compute CRR and WRR of a checkpoint on a repository");
    e->add_option("--ckpt", ev.ckpt)->required();
    e->add_option("--data", ev.data)->required();
    e->add_option("--split", ev.split, "split.tsv selecting the records");
    e->add_option("--set", ev.set, "train, validate or test (with --split)")->capture_default_str();
    e->add_option("--name", ev.name, "Experiment label (default: data directory name)");
    e->add_option("--out", ev.out)->required();

    ImageOptions rec;
    auto* r = app.add_subcommand("recognize", "Transcribe one image");
    r->add_option("--ckpt", rec.ckpt)->required();
    r->add_option("--image", rec.image, "Binary PGM image");
    r->add_option("--data", rec.data, "Repository to take the image from");
    r->add_option("--index", rec.index, "Record index within --data");
    r->add_option("--out", rec.out, "Also write prediction.txt and a manifest here");

    ImageOptions ins;
    auto* i = app.add_subcommand("inspect", "Dump per-block feature maps and logits for one image");
    i->add_option("--ckpt", ins.ckpt)->required();
    i->add_option("--image", ins.image, "Binary PGM image");
    i->add_option("--data", ins.data, "Repository to take the image from");
    i->add_option("--index", ins.index, "Record index within --data");
    i->add_option("--out", ins.out)->required();

    ReportOptions rep;
    auto* rp = app.add_subcommand("report", "Merge evaluation CSVs into a summary and a bar chart");
    rp->add_option("--inputs", rep.inputs, "report.csv files")->required();
    rp->add_option("--out", rep.out)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        if (ex.get_exit_code() == 0) {
            app.exit(ex, out, err);
            return 0;
        }
        err << "error: usage: " << ex.what() << "\n";
        return 2;
    }

    try {
        if (!manifest.empty()) {
            if (!app.get_subcommands().empty()) throw UsageError("--manifest cannot be combined with a subcommand");
            return run(replay_args(manifest, replay_out), out, err);
        }
        if (g->parsed()) cmd_gen(gen, out);
        else if (sp->parsed()) cmd_split(split, out);
        else if (n->parsed()) cmd_noise(noise, out);
        else if (t->parsed()) cmd_train(train, out);
        else if (e->parsed()) cmd_eval(ev, out);
        else if (r->parsed()) cmd_recognize(rec, out);
        else if (i->parsed()) cmd_inspect(ins, out);
        else if (rp->parsed()) cmd_report(rep, out);
        else throw UsageError("a subcommand is required (gen, split, noise, train, eval, recognize, inspect, report)");
    } catch (const UsageError& ex) {
        err << "error: usage: " << ex.what() << "\n";
        return 2;
    } catch (const Error& ex) {
        err << "error: " << ex.kind() << ": " << ex.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& ex) {
        err << "error: io: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        err << "error: internal: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace qocr::cli

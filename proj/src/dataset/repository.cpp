#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "qocr/dataset.hpp"
#include "qocr/error.hpp"

namespace qocr::dataset {

namespace fs = std::filesystem;

GrayImage::GrayImage(std::uint32_t w, std::uint32_t h, std::uint8_t fill)
    : width(w), height(h), pixels(std::size_t{w} * h, fill) {}

GrayImage::GrayImage(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> data)
    : width(w), height(h), pixels(std::move(data)) {
    if (pixels.size() != std::size_t{w} * h)
        throw DimensionError("image data length " + std::to_string(pixels.size()) + " does not match " +
                             std::to_string(w) + "x" + std::to_string(h));
}

std::string to_string(Style s) { return s == Style::bold ? "bold" : "regular"; }

Style parse_style(const std::string& s) {
    if (s == "bold") return Style::bold;
    if (s == "regular") return Style::regular;
    throw ParseError("unknown style '" + s + "'");
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[at + i]} << (8 * i);
    return v;
}

template <class T>
T parse_number(const std::string& field, std::size_t line, const char* what) {
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc() || ptr != last)
        throw ParseError("labels line " + std::to_string(line) + ": bad " + what + " '" + field + "'");
    return value;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

std::vector<std::uint8_t> encode_payload(const GrayImage& img) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + img.pixels.size());
    put_u32(out, img.width);
    put_u32(out, img.height);
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

GrayImage decode_payload(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8) throw ParseError("payload shorter than its 8-byte header");
    const std::uint32_t w = get_u32(bytes, 0), h = get_u32(bytes, 4);
    if (w == 0 || h == 0) throw ParseError("payload has a zero image extent");
    if (bytes.size() != 8 + std::size_t{w} * h)
        throw ParseError("payload of " + std::to_string(bytes.size()) + " bytes does not hold a " + std::to_string(w) +
                         "x" + std::to_string(h) + " image");
    return GrayImage(w, h, std::vector<std::uint8_t>(bytes.begin() + 8, bytes.end()));
}

GrayImage read_pgm(const fs::path& path) {
    const auto bytes = read_file(path);
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#')
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            else if (std::isspace(bytes[pos]))
                ++pos;
            else
                break;
        }
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t += static_cast<char>(bytes[pos++]);
        return t;
    };
    if (token() != "P5") throw ParseError(path.string() + ": not a binary PGM (P5) file");
    const auto w = parse_number<std::uint32_t>(token(), 1, "width");
    const auto h = parse_number<std::uint32_t>(token(), 1, "height");
    const auto maxval = parse_number<std::uint32_t>(token(), 1, "maxval");
    if (maxval != 255) throw ParseError(path.string() + ": only 8-bit PGM is supported");
    ++pos;  // single whitespace after maxval
    if (bytes.size() < pos + std::size_t{w} * h) throw ParseError(path.string() + ": truncated pixel data");
    return GrayImage(w, h, std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + std::size_t{w} * h)));
}

void write_pgm(const fs::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

Repository::Repository(std::vector<SampleRecord> records, std::vector<std::uint8_t> blob)
    : records_(std::move(records)), blob_(std::move(blob)) {}

Repository Repository::pack(const std::vector<LabeledImage>& samples) {
    Repository repo;
    for (const auto& s : samples) {
        if (s.word.empty()) throw ArgumentError("cannot store a sample with an empty word");
        if (s.image.width == 0 || s.image.height == 0 ||
            s.image.pixels.size() != std::size_t{s.image.width} * s.image.height)
            throw ArgumentError("invalid image for word '" + s.word + "'");
        auto payload = encode_payload(s.image);
        repo.records_.push_back(
            {s.word, s.font_id, s.style, s.size_pt, repo.blob_.size(), static_cast<std::uint64_t>(payload.size())});
        repo.blob_.insert(repo.blob_.end(), payload.begin(), payload.end());
    }
    return repo;
}

GrayImage Repository::image(std::size_t i) const {
    const auto& r = records_.at(i);
    if (r.start_offset + r.byte_length > blob_.size())
        throw ParseError("record " + std::to_string(i) + " extends past the end of the blob");
    return decode_payload(std::span(blob_).subspan(r.start_offset, r.byte_length));
}

LabeledImage Repository::sample(std::size_t i) const {
    const auto& r = records_.at(i);
    return {r.word, r.font_id, r.style, r.size_pt, image(i)};
}

void Repository::validate() const {
    std::uint64_t expected = 0;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        const std::string where = "labels line " + std::to_string(i + 2) + ": ";
        if (r.start_offset != expected)
            throw ParseError(where + "start offset " + std::to_string(r.start_offset) + " breaks sequential packing (expected " +
                             std::to_string(expected) + ")");
        if (r.start_offset + r.byte_length > blob_.size())
            throw ParseError(where + "record spans bytes [" + std::to_string(r.start_offset) + ", " +
                             std::to_string(r.start_offset + r.byte_length) + ") but the blob holds only " +
                             std::to_string(blob_.size()) + " bytes");
        try {
            decode_payload(std::span(blob_).subspan(r.start_offset, r.byte_length));
        } catch (const ParseError& e) {
            throw ParseError(where + e.what());
        }
        expected += r.byte_length;
    }
    if (expected != blob_.size())
        throw ParseError("blob holds " + std::to_string(blob_.size() - expected) + " bytes beyond the last record");
}

void write_repository(const Repository& repo, const fs::path& labels_path, const fs::path& blob_path) {
    std::ofstream labels(labels_path, std::ios::binary);
    if (!labels) throw IoError("cannot write " + labels_path.string());
    labels << "AMFDS\t1\n";
    for (const auto& r : repo.records()) {
        if (r.word.find_first_of("\t\n\r") != std::string::npos)
            throw ArgumentError("word '" + r.word + "' contains a tab or newline");
        labels << r.word << '\t' << r.font_id << '\t' << to_string(r.style) << '\t' << r.size_pt << '\t'
               << r.start_offset << '\t' << r.byte_length << '\n';
    }
    std::ofstream blob(blob_path, std::ios::binary);
    if (!blob) throw IoError("cannot write " + blob_path.string());
    blob.write(reinterpret_cast<const char*>(repo.blob().data()), static_cast<std::streamsize>(repo.blob().size()));
    if (!labels || !blob) throw IoError("write failed for repository " + labels_path.string());
}

Repository read_repository(const fs::path& labels_path, const fs::path& blob_path) {
    std::ifstream in(labels_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + labels_path.string());
    std::string line;
    if (!std::getline(in, line) || line != "AMFDS\t1")
        throw ParseError("labels line 1: expected header 'AMFDS<TAB>1'");

    std::vector<SampleRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) throw ParseError("labels line " + std::to_string(line_no) + ": empty line");
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, '\t')) fields.push_back(f);
        if (fields.size() != 6)
            throw ParseError("labels line " + std::to_string(line_no) + ": expected 6 tab-separated fields, got " +
                             std::to_string(fields.size()));
        SampleRecord r;
        r.word = fields[0];
        if (r.word.empty()) throw ParseError("labels line " + std::to_string(line_no) + ": empty word");
        r.font_id = parse_number<std::uint32_t>(fields[1], line_no, "font_id");
        try {
            r.style = parse_style(fields[2]);
        } catch (const ParseError& e) {
            throw ParseError("labels line " + std::to_string(line_no) + ": " + e.what());
        }
        r.size_pt = parse_number<std::uint32_t>(fields[3], line_no, "size_pt");
        r.start_offset = parse_number<std::uint64_t>(fields[4], line_no, "start_offset");
        r.byte_length = parse_number<std::uint64_t>(fields[5], line_no, "byte_length");
        records.push_back(std::move(r));
    }
    Repository repo(std::move(records), read_file(blob_path));
    repo.validate();
    return repo;
}

void write_repository(const Repository& repo, const fs::path& dir) {
    fs::create_directories(dir);
    write_repository(repo, dir / kLabelsFile, dir / kBlobFile);
}

Repository read_repository(const fs::path& dir) { return read_repository(dir / kLabelsFile, dir / kBlobFile); }

}  // namespace qocr::dataset

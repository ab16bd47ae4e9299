#include "qocr/vocabulary.hpp"

#include <fstream>

#include "qocr/error.hpp"

namespace qocr {

std::vector<std::string> utf8_split(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        if (lead >= 0xF0 && lead < 0xF8)
            len = 4;
        else if (lead >= 0xE0)
            len = 3;
        else if (lead >= 0xC0)
            len = 2;
        if (lead >= 0xF8 || i + len > text.size()) len = 1;
        for (std::size_t j = 1; j < len; ++j)
            if ((static_cast<unsigned char>(text[i + j]) & 0xC0) != 0x80) len = 1;
        out.emplace_back(text.substr(i, len));
        i += len;
    }
    return out;
}

Vocabulary::Vocabulary(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        const auto& s = symbols_[i];
        if (s.empty()) throw VocabularyError("empty symbol at index " + std::to_string(i));
        if (!index_.emplace(s, i).second) throw VocabularyError("duplicate symbol '" + s + "'");
        longest_ = std::max(longest_, s.size());
    }
}

Vocabulary Vocabulary::arabic_default() {
    return Vocabulary({
        "ا", "ب", "ت", "ث", "ج", "ح", "خ", "د", "ذ", "ر", "ز", "س", "ش", "ص", "ض", "ط", "ظ", "ع", "غ",
        "ف", "ق", "ك", "ل", "م", "ن", "ه", "و", "ي", "ء", "آ", "أ", "ؤ", "إ", "ئ", "ة", "ى", "ٱ", "ﻻ",
    });
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vocabulary file " + path.string());
    std::vector<std::string> symbols;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        symbols.push_back(line);
    }
    return Vocabulary(std::move(symbols));
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocabulary file " + path.string());
    for (const auto& s : symbols_) out << s << '\n';
}

const std::string& Vocabulary::symbol(std::size_t index) const {
    if (index >= symbols_.size())
        throw VocabularyError("symbol index " + std::to_string(index) + " out of range (size " +
                              std::to_string(symbols_.size()) + ")");
    return symbols_[index];
}

bool Vocabulary::contains(std::string_view symbol) const { return index_.count(std::string(symbol)) != 0; }

std::vector<std::size_t> Vocabulary::encode(std::string_view word) const {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < word.size()) {
        bool matched = false;
        for (std::size_t len = std::min(longest_, word.size() - pos); len > 0; --len) {
            auto it = index_.find(std::string(word.substr(pos, len)));
            if (it != index_.end()) {
                out.push_back(it->second);
                pos += len;
                matched = true;
                break;
            }
        }
        if (!matched) {
            const auto cp = utf8_split(word.substr(pos)).front();
            throw VocabularyError("symbol '" + cp + "' in word '" + std::string(word) + "' is not in the vocabulary");
        }
    }
    return out;
}

std::string Vocabulary::decode(const std::vector<std::size_t>& indices) const {
    std::string out;
    for (auto i : indices) out += symbol(i);
    return out;
}

}  // namespace qocr

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qocr {

// Splits UTF-8 text into code points, each returned as its own byte string.
// Invalid sequences are passed through one byte at a time.
std::vector<std::string> utf8_split(std::string_view text);

// Ordered set of recognizable symbols. Indices 0..size()-1 name symbols; the
// CTC blank is implicit at index size() and never appears in the symbol list.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> symbols);

    // 38 Arabic letters and letter forms.
    static Vocabulary arabic_default();

    static Vocabulary load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::size_t size() const noexcept { return symbols_.size(); }
    std::size_t blank() const noexcept { return symbols_.size(); }
    const std::vector<std::string>& symbols() const noexcept { return symbols_; }
    const std::string& symbol(std::size_t index) const;

    bool contains(std::string_view symbol) const;

    // Greedy longest-match tokenization; throws VocabularyError naming the
    // offending symbol and word.
    std::vector<std::size_t> encode(std::string_view word) const;
    std::string decode(const std::vector<std::size_t>& indices) const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.symbols_ == b.symbols_; }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t longest_ = 0;
};

}  // namespace qocr

#include "scope/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace scope {

const std::vector<std::string>& Vocabulary::default_specials() {
    static const std::vector<std::string> specials = {"<pad>", "<mask>", "<bos>", "<eos>", "<unk>"};
    return specials;
}

void Vocabulary::index_specials(const std::vector<std::string>& special_names) {
    if (special_names.size() != 5) throw ConfigError("expected 5 special tokens (PAD, MASK, BOS, EOS, UNK)");
    num_specials_ = 5;
    pad_ = 0;
    mask_ = 1;
    bos_ = 2;
    eos_ = 3;
    unk_ = 4;
}

void Vocabulary::rebuild_index() {
    index_.clear();
    index_.reserve(tokens_.size());
    for (size_t i = 0; i < tokens_.size(); ++i) {
        if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
            throw DataError("duplicate token in vocabulary: " + tokens_[i]);
    }
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus_paths,
                             const std::vector<std::string>& special_names) {
    std::map<std::string, long> counts;
    for (const auto& path : corpus_paths) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open corpus file: " + path);
        std::string word;
        while (in >> word) ++counts[word];
    }
    if (counts.empty()) throw DataError("no tokens");

    std::vector<std::pair<std::string, long>> ordered(counts.begin(), counts.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    v.index_specials(special_names);
    v.tokens_ = special_names;
    for (auto& [tok, cnt] : ordered) {
        if (std::find(special_names.begin(), special_names.end(), tok) == special_names.end())
            v.tokens_.push_back(tok);
    }
    v.rebuild_index();
    return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& content_tokens,
                                   const std::vector<std::string>& special_names) {
    Vocabulary v;
    v.index_specials(special_names);
    v.tokens_ = special_names;
    v.tokens_.insert(v.tokens_.end(), content_tokens.begin(), content_tokens.end());
    v.rebuild_index();
    return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocabulary file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    if (lines.size() < 5) throw DataError("vocabulary file too short: " + path);
    Vocabulary v;
    std::vector<std::string> specials(lines.begin(), lines.begin() + 5);
    v.index_specials(specials);
    v.tokens_ = std::move(lines);
    v.rebuild_index();
    return v;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary file: " + path);
    for (const auto& tok : tokens_) out << tok << '\n';
}

int Vocabulary::id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw DataError("token id out of range: " + std::to_string(id));
    return tokens_[static_cast<size_t>(id)];
}

TokenSeq Vocabulary::encode(std::string_view text) const {
    TokenSeq out;
    std::istringstream in{std::string(text)};
    std::string word;
    while (in >> word) {
        const int tid = id(word);
        out.push_back(tid < 0 ? unk_ : tid);
    }
    return out;
}

std::string Vocabulary::decode(const TokenSeq& seq) const {
    std::string out;
    for (int tid : seq) {
        if (tid < 0 || tid >= size()) throw DataError("token id out of range: " + std::to_string(tid));
        if (is_special(tid) && tid != unk_) continue;
        if (!out.empty()) out += ' ';
        out += tokens_[static_cast<size_t>(tid)];
    }
    return out;
}

uint64_t Vocabulary::digest() const {
    uint64_t h = 14695981039346656037ull;
    for (const auto& tok : tokens_) {
        h = fnv1a64(tok, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

}  // namespace scope

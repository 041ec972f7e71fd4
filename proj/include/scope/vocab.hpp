#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scope/common.hpp"

namespace scope {

/// Token <-> id bijection with fixed special tokens at the front
/// (PAD, MASK, BOS, EOS, UNK in that order).
class Vocabulary {
  public:
    static const std::vector<std::string>& default_specials();

    /// Builds from whitespace-tokenized corpus files: specials first, then
    /// corpus tokens ordered by frequency (desc), ties broken lexicographically.
    static Vocabulary build(const std::vector<std::string>& corpus_paths,
                            const std::vector<std::string>& special_names = default_specials());

    /// Builds from an explicit token list (specials prepended).
    static Vocabulary from_tokens(const std::vector<std::string>& content_tokens,
                                  const std::vector<std::string>& special_names = default_specials());

    static Vocabulary load(const std::string& path);
    void save(const std::string& path) const;

    int size() const { return static_cast<int>(tokens_.size()); }
    int pad() const { return pad_; }
    int mask() const { return mask_; }
    int bos() const { return bos_; }
    int eos() const { return eos_; }
    int unk() const { return unk_; }
    bool is_special(int id) const { return id < num_specials_; }
    int num_specials() const { return num_specials_; }

    /// -1 if the token is not in the vocabulary.
    int id(std::string_view token) const;
    const std::string& token(int id) const;

    /// Whitespace tokenization; unknown tokens map to UNK.
    TokenSeq encode(std::string_view text) const;

    /// Space-joined tokens; specials are skipped except UNK, which is
    /// rendered literally. Throws DataError on out-of-range ids.
    std::string decode(const TokenSeq& seq) const;

    uint64_t digest() const;

  private:
    Vocabulary() = default;
    void index_specials(const std::vector<std::string>& special_names);
    void rebuild_index();

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
    int num_specials_ = 0;
    int pad_ = -1, mask_ = -1, bos_ = -1, eos_ = -1, unk_ = -1;
};

}  // namespace scope

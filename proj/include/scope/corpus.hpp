#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scope/common.hpp"
#include "scope/vocab.hpp"

namespace scope {

/// One attribute domain of the synthetic language: a set of marker tokens, an
/// order-1 Markov transition table over the vocabulary, and the target unigram
/// frequency of marker tokens. Rows of special-token ids hold the document
/// start distribution (the chain is seeded from the BOS row).
struct DomainSpec {
    std::string name;
    std::vector<int> marker_tokens;
    Eigen::MatrixXd transition;  // vocab_size x vocab_size, rows sum to 1
    double marker_rate = 0.0;

    void validate() const;
};

/// Deterministic construction of a domain against a given vocabulary. Row
/// weights are derived from hashes of the (row token, col token) strings, so
/// two vocabularies containing the same tokens yield the same language even
/// if their id order differs.
DomainSpec build_domain_spec(const Vocabulary& vocab, const std::string& name,
                             const std::vector<std::string>& marker_tokens,
                             const std::vector<std::string>& filler_tokens, double marker_rate,
                             uint64_t seed);

/// Writes `num_docs` documents of `doc_len` tokens each, one per line.
/// Byte-identical output under a fixed seed.
void synth_domain_corpus(const DomainSpec& spec, const Vocabulary& vocab, int num_docs,
                         int doc_len, uint64_t seed, const std::string& path);

// Corpus files: UTF-8, one document per line.
std::vector<std::string> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<std::string>& docs);
std::vector<TokenSeq> encode_corpus(const std::vector<std::string>& docs, const Vocabulary& vocab);

/// The default two-domain synthetic alphabet: 24 "a" markers, 24 "b" markers,
/// 16 shared filler tokens.
struct SyntheticAlphabet {
    std::vector<std::string> a_markers;
    std::vector<std::string> b_markers;
    std::vector<std::string> shared;
    std::vector<std::string> all() const;
};
SyntheticAlphabet default_alphabet();

// Domain specs round-trip through JSON (marker tokens stored as strings so
// they survive vocabulary reordering).
void save_domain_specs(const std::string& path, const Vocabulary& vocab,
                       const std::vector<DomainSpec>& specs);
std::vector<DomainSpec> load_domain_specs(const std::string& path, const Vocabulary& vocab);

}  // namespace scope

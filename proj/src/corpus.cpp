#include "scope/corpus.hpp"

#include <fstream>
#include <json.hpp>

#include "scope/rng.hpp"

namespace scope {

using nlohmann::json;

void DomainSpec::validate() const {
    if (transition.rows() != transition.cols()) throw DataError("transition table must be square");
    for (Eigen::Index r = 0; r < transition.rows(); ++r) {
        double sum = 0.0;
        for (Eigen::Index c = 0; c < transition.cols(); ++c) {
            const double p = transition(r, c);
            if (p < 0.0) throw DataError("transition table has negative entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw DataError("transition row does not sum to 1");
    }
    if (marker_rate < 0.0 || marker_rate > 1.0) throw DataError("marker_rate outside [0,1]");
}

namespace {

// Positive weight in [0.25, 1.25) derived from the token-string pair, so the
// language is invariant under vocabulary reordering.
double pair_weight(uint64_t seed, const std::string& from, const std::string& to) {
    uint64_t h = fnv1a64(from, splitmix64(seed));
    h = fnv1a64("->", h);
    h = fnv1a64(to, h);
    return 0.25 + static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
}

void fill_row(Eigen::MatrixXd& t, int row, const Vocabulary& vocab, const std::string& from_tok,
              const std::vector<int>& markers, const std::vector<int>& fillers, double marker_rate,
              uint64_t seed) {
    double marker_sum = 0.0, filler_sum = 0.0;
    std::vector<double> mw(markers.size()), fw(fillers.size());
    for (size_t i = 0; i < markers.size(); ++i) {
        mw[i] = pair_weight(seed, from_tok, vocab.token(markers[i]));
        marker_sum += mw[i];
    }
    for (size_t i = 0; i < fillers.size(); ++i) {
        fw[i] = pair_weight(seed, from_tok, vocab.token(fillers[i]));
        filler_sum += fw[i];
    }
    const double marker_budget = markers.empty() ? 0.0 : marker_rate;
    const double filler_budget = 1.0 - marker_budget;
    if (fillers.empty() && marker_budget < 1.0) throw DataError("domain needs filler tokens when marker_rate < 1");
    for (size_t i = 0; i < markers.size(); ++i) t(row, markers[i]) = marker_budget * mw[i] / marker_sum;
    for (size_t i = 0; i < fillers.size(); ++i) t(row, fillers[i]) = filler_budget * fw[i] / filler_sum;
    // Exact row normalization to absorb rounding.
    const double s = t.row(row).sum();
    t.row(row) /= s;
}

}  // namespace

DomainSpec build_domain_spec(const Vocabulary& vocab, const std::string& name,
                             const std::vector<std::string>& marker_tokens,
                             const std::vector<std::string>& filler_tokens, double marker_rate,
                             uint64_t seed) {
    DomainSpec spec;
    spec.name = name;
    spec.marker_rate = marker_rate;
    std::vector<int> markers, fillers;
    for (const auto& tok : marker_tokens) {
        const int tid = vocab.id(tok);
        if (tid < 0) throw DataError("marker token not in vocabulary: " + tok);
        markers.push_back(tid);
    }
    for (const auto& tok : filler_tokens) {
        const int tid = vocab.id(tok);
        if (tid < 0) throw DataError("filler token not in vocabulary: " + tok);
        fillers.push_back(tid);
    }
    spec.marker_tokens = markers;

    const int v = vocab.size();
    spec.transition = Eigen::MatrixXd::Zero(v, v);
    for (int r = 0; r < v; ++r) {
        // Special-token rows carry the start distribution, keyed off a fixed
        // virtual token so all special rows are identical.
        const std::string& from = vocab.is_special(r) ? std::string("<start>") : vocab.token(r);
        fill_row(spec.transition, r, vocab, from, markers, fillers, marker_rate, seed);
    }
    spec.validate();
    return spec;
}

void synth_domain_corpus(const DomainSpec& spec, const Vocabulary& vocab, int num_docs,
                         int doc_len, uint64_t seed, const std::string& path) {
    if (doc_len < 2) throw DataError("doc_len must be >= 2");
    spec.validate();
    if (spec.transition.rows() != vocab.size()) throw DataError("transition table size mismatch with vocabulary");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write corpus file: " + path);

    const int v = vocab.size();
    auto sample_row = [&](int row, Rng& rng) {
        const double u = rng.next_double();
        double cdf = 0.0;
        for (int c = 0; c < v; ++c) {
            cdf += spec.transition(row, c);
            if (u <= cdf) return c;
        }
        return v - 1;
    };

    for (int d = 0; d < num_docs; ++d) {
        Rng rng(derive_seed(seed, fnv1a64(spec.name), static_cast<uint64_t>(d)));
        int cur = sample_row(vocab.bos(), rng);
        out << vocab.token(cur);
        for (int t = 1; t < doc_len; ++t) {
            cur = sample_row(cur, rng);
            out << ' ' << vocab.token(cur);
        }
        out << '\n';
    }
}

std::vector<std::string> read_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);
    std::vector<std::string> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) docs.push_back(line);
    }
    return docs;
}

void write_corpus(const std::string& path, const std::vector<std::string>& docs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write corpus file: " + path);
    for (const auto& doc : docs) out << doc << '\n';
}

std::vector<TokenSeq> encode_corpus(const std::vector<std::string>& docs, const Vocabulary& vocab) {
    std::vector<TokenSeq> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) out.push_back(vocab.encode(doc));
    return out;
}

SyntheticAlphabet default_alphabet() {
    SyntheticAlphabet a;
    char buf[8];
    for (int i = 0; i < 24; ++i) {
        std::snprintf(buf, sizeof(buf), "a%02d", i);
        a.a_markers.emplace_back(buf);
    }
    for (int i = 0; i < 24; ++i) {
        std::snprintf(buf, sizeof(buf), "b%02d", i);
        a.b_markers.emplace_back(buf);
    }
    for (int i = 0; i < 16; ++i) {
        std::snprintf(buf, sizeof(buf), "s%02d", i);
        a.shared.emplace_back(buf);
    }
    return a;
}

std::vector<std::string> SyntheticAlphabet::all() const {
    std::vector<std::string> out = a_markers;
    out.insert(out.end(), b_markers.begin(), b_markers.end());
    out.insert(out.end(), shared.begin(), shared.end());
    return out;
}

void save_domain_specs(const std::string& path, const Vocabulary& vocab,
                       const std::vector<DomainSpec>& specs) {
    json root = json::array();
    for (const auto& spec : specs) {
        json j;
        j["name"] = spec.name;
        j["marker_rate"] = spec.marker_rate;
        json markers = json::array();
        for (int tid : spec.marker_tokens) markers.push_back(vocab.token(tid));
        j["marker_tokens"] = markers;
        json rows = json::array();
        for (Eigen::Index r = 0; r < spec.transition.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < spec.transition.cols(); ++c) row.push_back(spec.transition(r, c));
            rows.push_back(std::move(row));
        }
        j["transition"] = std::move(rows);
        root.push_back(std::move(j));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write domain spec file: " + path);
    out << root.dump(2) << '\n';
}

std::vector<DomainSpec> load_domain_specs(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open domain spec file: " + path);
    json root = json::parse(in, nullptr, true);
    std::vector<DomainSpec> specs;
    for (const auto& j : root) {
        DomainSpec spec;
        spec.name = j.at("name").get<std::string>();
        spec.marker_rate = j.at("marker_rate").get<double>();
        for (const auto& tok : j.at("marker_tokens")) {
            const int tid = vocab.id(tok.get<std::string>());
            if (tid < 0) throw DataError("domain marker token not in vocabulary: " + tok.get<std::string>());
            spec.marker_tokens.push_back(tid);
        }
        const auto& rows = j.at("transition");
        const int v = static_cast<int>(rows.size());
        spec.transition = Eigen::MatrixXd::Zero(v, v);
        for (int r = 0; r < v; ++r)
            for (int c = 0; c < v; ++c) spec.transition(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
        spec.validate();
        specs.push_back(std::move(spec));
    }
    return specs;
}

}  // namespace scope

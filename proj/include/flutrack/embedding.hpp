#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "flutrack/common.hpp"
#include "flutrack/csv.hpp"
#include "flutrack/rng.hpp"
#include "flutrack/taxonomy.hpp"

namespace flutrack::emb {

// Word vectors over normalized query tokens. Out-of-vocabulary tokens map to
// the zero vector; a query embedding is the mean of its token vectors.
class EmbeddingModel {
public:
    EmbeddingModel() = default;
    EmbeddingModel(std::size_t dim, std::vector<std::string> vocab, std::vector<double> vectors)
        : dim_(dim), vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
        if (vectors_.size() != vocab_.size() * dim_)
            throw numeric_error("embedding matrix size does not match vocabulary");
        for (std::size_t i = 0; i < vocab_.size(); ++i) index_[vocab_[i]] = i;
    }

    std::size_t dim() const { return dim_; }
    std::size_t vocab_size() const { return vocab_.size(); }
    const std::vector<std::string>& vocab() const { return vocab_; }

    bool contains(const std::string& token) const { return index_.count(token) != 0; }

    const double* vector_of(const std::string& token) const {
        const auto it = index_.find(token);
        return it == index_.end() ? nullptr : vectors_.data() + it->second * dim_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> vocab_;
    std::vector<double> vectors_; // row-major, vocab_.size() x dim_
    std::unordered_map<std::string, std::size_t> index_;
};

// Mean of token vectors; OOV tokens contribute zero vectors, an all-OOV or
// empty text yields the zero vector.
inline std::vector<double> embed_document(const std::string& normalized_text,
                                          const EmbeddingModel& model) {
    std::vector<double> out(model.dim(), 0.0);
    const auto tokens = tax::tokenize(normalized_text);
    if (tokens.empty()) return out;
    for (const auto& tok : tokens) {
        if (const double* v = model.vector_of(tok))
            for (std::size_t k = 0; k < model.dim(); ++k) out[k] += v[k];
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (double& x : out) x *= inv;
    return out;
}

inline double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Cosine similarity; zero vectors have no direction, so either side being
// zero yields 0.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct TrainOptions {
    int dim = 50;
    int window = 4;
    int epochs = 5;
    int negative = 5;
    int min_count = 2;
    double alpha = 0.05; // initial learning rate, decays linearly to alpha/20
    std::uint64_t seed = 1;
};

// Skip-gram with negative sampling over the query corpus. Single-threaded on
// purpose: given the seed, the trained vectors are bit-reproducible.
inline EmbeddingModel train_embeddings(const std::vector<std::string>& corpus,
                                       const TrainOptions& opt) {
    if (corpus.empty()) throw numeric_error("train_embeddings: empty corpus");
    if (opt.dim <= 0 || opt.window <= 0 || opt.epochs <= 0)
        throw std::invalid_argument("train_embeddings: dim, window, epochs must be positive");

    // Vocabulary: tokens with count >= min_count, ordered by count desc then
    // token asc so ids are stable.
    std::map<std::string, std::int64_t> counts;
    std::vector<std::vector<std::string>> sentences;
    sentences.reserve(corpus.size());
    for (const auto& text : corpus) {
        sentences.push_back(tax::tokenize(text));
        for (const auto& tok : sentences.back()) ++counts[tok];
    }
    std::vector<std::pair<std::string, std::int64_t>> kept;
    for (const auto& [tok, c] : counts)
        if (c >= opt.min_count) kept.emplace_back(tok, c);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    const std::size_t V = kept.size();
    if (V == 0) throw numeric_error("train_embeddings: no token reaches min_count");

    std::unordered_map<std::string, int> id;
    id.reserve(V * 2);
    std::vector<std::string> vocab(V);
    for (std::size_t i = 0; i < V; ++i) {
        vocab[i] = kept[i].first;
        id[kept[i].first] = static_cast<int>(i);
    }

    // Negative-sampling distribution: unigram counts to the 3/4 power.
    std::vector<double> cum(V);
    double acc = 0.0;
    for (std::size_t i = 0; i < V; ++i) {
        acc += std::pow(static_cast<double>(kept[i].second), 0.75);
        cum[i] = acc;
    }

    const std::size_t d = static_cast<std::size_t>(opt.dim);
    std::vector<double> win(V * d), wout(V * d, 0.0);
    Rng rng(opt.seed);
    for (double& x : win) x = (rng.uniform() - 0.5) / static_cast<double>(d);

    // Token ids per sentence, skipping OOV.
    std::vector<std::vector<int>> encoded;
    encoded.reserve(sentences.size());
    std::int64_t total_tokens = 0;
    for (const auto& sent : sentences) {
        std::vector<int> ids;
        ids.reserve(sent.size());
        for (const auto& tok : sent) {
            const auto it = id.find(tok);
            if (it != id.end()) ids.push_back(it->second);
        }
        total_tokens += static_cast<std::int64_t>(ids.size());
        encoded.push_back(std::move(ids));
    }
    if (total_tokens == 0) throw numeric_error("train_embeddings: corpus has no in-vocabulary tokens");

    const std::int64_t work_total = total_tokens * opt.epochs;
    std::int64_t work_done = 0;
    std::vector<double> grad_center(d);

    auto sample_negative = [&]() -> int {
        const double u = rng.uniform() * acc;
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        return static_cast<int>(it - cum.begin());
    };

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        for (const auto& ids : encoded) {
            const int n = static_cast<int>(ids.size());
            for (int pos = 0; pos < n; ++pos, ++work_done) {
                const double progress = static_cast<double>(work_done) / static_cast<double>(work_total);
                const double lr = std::max(opt.alpha * (1.0 - progress), opt.alpha * 0.05);
                // Reduced-window trick from word2vec: effective window is
                // uniform in [1, window].
                const int reduced = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.window)));
                const int center = ids[pos];
                double* vc = win.data() + static_cast<std::size_t>(center) * d;
                for (int off = -reduced; off <= reduced; ++off) {
                    if (off == 0) continue;
                    const int cpos = pos + off;
                    if (cpos < 0 || cpos >= n) continue;
                    const int context = ids[cpos];
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    for (int neg = 0; neg <= opt.negative; ++neg) {
                        int target;
                        double label;
                        if (neg == 0) {
                            target = context;
                            label = 1.0;
                        } else {
                            target = sample_negative();
                            if (target == context) continue;
                            label = 0.0;
                        }
                        double* vt = wout.data() + static_cast<std::size_t>(target) * d;
                        double dot = 0.0;
                        for (std::size_t k = 0; k < d; ++k) dot += vc[k] * vt[k];
                        const double g = (label - inv_logit(dot)) * lr;
                        for (std::size_t k = 0; k < d; ++k) {
                            grad_center[k] += g * vt[k];
                            vt[k] += g * vc[k];
                        }
                    }
                    for (std::size_t k = 0; k < d; ++k) vc[k] += grad_center[k];
                }
            }
        }
    }
    return EmbeddingModel(d, std::move(vocab), std::move(win));
}

struct Expansion {
    std::vector<std::pair<std::string, double>> ranked; // (normalized text, similarity)
    bool all_candidates_zero = false; // every candidate embedded to the zero vector
};

// Ranks candidates by their best cosine similarity to any seed query.
// Candidates (and seeds) whose embeddings are zero vectors carry no signal
// and are skipped; ties break lexicographically so output is reproducible.
inline Expansion expand_seed(const std::vector<std::string>& seed_a1,
                             const std::vector<std::string>& candidates,
                             const EmbeddingModel& model, std::size_t k) {
    if (k < 1) throw std::invalid_argument("expand_seed: k must be >= 1");
    std::vector<std::vector<double>> seed_vecs;
    for (const auto& s : seed_a1) {
        auto v = embed_document(s, model);
        if (norm(v) > 0.0) seed_vecs.push_back(std::move(v));
    }
    Expansion out;
    if (seed_vecs.empty()) {
        out.all_candidates_zero = true;
        return out;
    }
    std::vector<std::string> uniq = candidates;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    bool any_nonzero = false;
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& cand : uniq) {
        const auto v = embed_document(cand, model);
        if (norm(v) == 0.0) continue;
        any_nonzero = true;
        double best = -1.0;
        for (const auto& sv : seed_vecs) best = std::max(best, cosine(v, sv));
        scored.emplace_back(cand, best);
    }
    if (!any_nonzero) {
        out.all_candidates_zero = true;
        return out;
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > k) scored.resize(k);
    out.ranked = std::move(scored);
    return out;
}

// Text format: header "<vocab_size> <dim>", then one "token v1 ... v_d" line
// per word. Values round-trip exactly.
inline std::string save_embeddings(const EmbeddingModel& model) {
    std::string out = std::to_string(model.vocab_size()) + " " + std::to_string(model.dim()) + "\n";
    for (const auto& tok : model.vocab()) {
        out += tok;
        const double* v = model.vector_of(tok);
        for (std::size_t k = 0; k < model.dim(); ++k) {
            out.push_back(' ');
            out += format_double(v[k]);
        }
        out.push_back('\n');
    }
    return out;
}

inline EmbeddingModel parse_embeddings(const std::string& text, const std::string& source_name) {
    std::istringstream in(text);
    std::size_t vocab_size = 0, dim = 0;
    if (!(in >> vocab_size >> dim) || dim == 0)
        throw config_error(source_name + ":1: expected '<vocab_size> <dim>' header");
    std::vector<std::string> vocab;
    vocab.reserve(vocab_size);
    std::vector<double> vectors;
    vectors.reserve(vocab_size * dim);
    for (std::size_t i = 0; i < vocab_size; ++i) {
        std::string tok;
        if (!(in >> tok))
            throw config_error(source_name + ": truncated at entry " + std::to_string(i + 1));
        vocab.push_back(tok);
        for (std::size_t kk = 0; kk < dim; ++kk) {
            double v;
            if (!(in >> v))
                throw config_error(source_name + ": bad vector for token '" + tok + "'");
            vectors.push_back(v);
        }
    }
    return EmbeddingModel(dim, std::move(vocab), std::move(vectors));
}

inline EmbeddingModel load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open embeddings file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_embeddings(ss.str(), path);
}

} // namespace flutrack::emb

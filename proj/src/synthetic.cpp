#include "varietyir/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "varietyir/error.hpp"
#include "varietyir/rng.hpp"

namespace varietyir {

namespace {

constexpr std::string_view kConsonants = "bdfghklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

struct FamilyAlphabet {
    std::vector<std::string> consonants;
    std::vector<std::string> vowels;
};

const std::vector<FamilyAlphabet>& family_alphabets() {
    static const std::vector<FamilyAlphabet> kAlphabets{
        {{"x", "j", "ç"}, {"à", "ò"}},
        {{"q", "w", "ñ"}, {"ü", "ë"}},
        {{"y", "c", "ł"}, {"å", "ø"}},
        {{"ş", "ž", "ț"}, {"ā", "ī"}},
    };
    return kAlphabets;
}

std::string make_id(const char* prefix, std::size_t i, std::size_t total) {
    const int width = static_cast<int>(std::to_string(std::max<std::size_t>(total, 1) - 1).size());
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
    return buf;
}

std::vector<std::string> make_vocabulary(std::size_t size, Rng& rng) {
    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < size) {
        const std::size_t syllables = 2 + rng.index(3);
        std::string w;
        for (std::size_t s = 0; s < syllables; ++s) {
            w += kConsonants[rng.index(kConsonants.size())];
            w += kVowels[rng.index(kVowels.size())];
        }
        if (rng.index(4) == 0) w += kConsonants[rng.index(kConsonants.size())];
        if (seen.insert(w).second) words.push_back(std::move(w));
    }
    return words;
}

}  // namespace

std::string_view synthetic_consonants() { return kConsonants; }
std::string_view synthetic_vowels() { return kVowels; }

SyntheticData synthesize_corpus(const CorpusSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    const auto vocab = make_vocabulary(spec.vocab_size, rng);

    // Zipf over vocabulary rank.
    std::vector<double> cdf(vocab.size());
    double total = 0.0;
    for (std::size_t r = 0; r < vocab.size(); ++r) {
        total += 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
        cdf[r] = total;
    }
    auto draw_word = [&]() -> std::size_t {
        const double u = rng.uniform() * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), vocab.size() - 1);
    };

    std::vector<std::vector<std::size_t>> passages(spec.doc_count);
    std::vector<Document> docs;
    docs.reserve(spec.doc_count);
    for (std::size_t d = 0; d < spec.doc_count; ++d) {
        const std::size_t len = spec.passage_min_len + rng.index(spec.passage_max_len - spec.passage_min_len + 1);
        std::string text;
        for (std::size_t i = 0; i < len; ++i) {
            passages[d].push_back(draw_word());
            if (i) text += ' ';
            text += vocab[passages[d].back()];
        }
        docs.push_back({make_id("d", d, spec.doc_count), std::move(text), "orig"});
    }

    std::vector<std::vector<std::size_t>> passages_sorted = passages;
    for (auto& p : passages_sorted) std::sort(p.begin(), p.end());

    std::vector<std::size_t> order(spec.doc_count);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));

    SyntheticData out;
    // A query is a handful of distinct passage words plus a few off-topic
    // words drawn from the background distribution.
    auto make_query = [&](std::size_t doc) {
        std::vector<std::size_t> distinct(passages[doc].begin(), passages[doc].end());
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        const std::size_t want = std::min(distinct.size(),
                                          spec.query_min_len + rng.index(spec.query_max_len - spec.query_min_len + 1));
        std::vector<std::size_t> words;
        for (std::size_t k = 0; k < want; ++k) {
            const std::size_t pick = rng.index(distinct.size());
            words.push_back(distinct[pick]);
            distinct.erase(distinct.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        for (std::size_t k = 0; k < spec.query_noise_words; ++k) {
            std::size_t w = draw_word();
            for (int tries = 0; tries < 16 && std::binary_search(passages_sorted[doc].begin(), passages_sorted[doc].end(), w); ++tries) {
                w = draw_word();
            }
            words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.index(words.size() + 1)), w);
        }
        std::string text;
        for (std::size_t k = 0; k < words.size(); ++k) {
            if (k) text += ' ';
            text += vocab[words[k]];
        }
        return text;
    };

    std::vector<Query> train, eval;
    for (std::size_t i = 0; i < spec.train_queries; ++i) {
        const auto doc = order[i];
        train.push_back({make_id("tq", i, spec.train_queries), make_query(doc), "orig"});
        out.qrels[train.back().query_id][docs[doc].doc_id] = 1;
    }
    for (std::size_t i = 0; i < spec.eval_queries; ++i) {
        const auto doc = order[spec.train_queries + i];
        eval.push_back({make_id("eq", i, spec.eval_queries), make_query(doc), "orig"});
        out.qrels[eval.back().query_id][docs[doc].doc_id] = 1;
    }
    out.docs = DocumentCollection(std::move(docs));
    out.train_queries = QuerySet(std::move(train));
    out.eval_queries = QuerySet(std::move(eval));
    return out;
}

std::vector<FamilySpec> make_family_specs(std::size_t families, std::size_t rules_per_family, double fraction,
                                          std::size_t varieties, std::uint64_t seed) {
    const auto& alphabets = family_alphabets();
    if (families > alphabets.size()) {
        throw Error(ErrorCode::ConfigInvalid, "at most " + std::to_string(alphabets.size()) + " generated families");
    }
    std::vector<std::string> syllables;
    for (char c : kConsonants) {
        for (char v : kVowels) syllables.push_back(std::string{c, v});
    }
    if (families * rules_per_family > syllables.size()) {
        throw Error(ErrorCode::ConfigInvalid, "not enough syllables for disjoint rule pools");
    }
    Rng rng(seed);
    rng.shuffle(std::span(syllables));

    std::vector<FamilySpec> out;
    for (std::size_t f = 0; f < families; ++f) {
        FamilySpec spec;
        spec.family_id = "f" + std::to_string(f);
        spec.sampling_fraction = fraction;
        spec.variety_count = varieties;
        spec.seed = derive_seed(seed, 100 + f);
        const auto& alpha = alphabets[f];
        for (std::size_t r = 0; r < rules_per_family; ++r) {
            const auto& lhs = syllables[f * rules_per_family + r];
            std::string rhs;
            if (rng.index(2) == 0) {
                rhs = alpha.consonants[rng.index(alpha.consonants.size())] + lhs.substr(1);
            } else {
                rhs = lhs.substr(0, 1) + alpha.vowels[rng.index(alpha.vowels.size())];
            }
            spec.shared_rule_pool.push_back({lhs, rhs, RuleScope::Anywhere});
        }
        out.push_back(std::move(spec));
    }
    return out;
}

void validate_families(std::span<const FamilySpec> families) {
    std::set<std::string> ids;
    for (const auto& f : families) {
        if (!ids.insert(f.family_id).second) throw Error(ErrorCode::FamilyOverlap, "family id '" + f.family_id + "' repeated");
    }
    for (std::size_t a = 0; a < families.size(); ++a) {
        const std::set<RewriteRule> pool(families[a].shared_rule_pool.begin(), families[a].shared_rule_pool.end());
        for (std::size_t b = a + 1; b < families.size(); ++b) {
            for (const auto& r : families[b].shared_rule_pool) {
                if (pool.contains(r)) {
                    throw Error(ErrorCode::FamilyOverlap, "families " + families[a].family_id + " and " +
                                                              families[b].family_id + " share rule \"" + r.lhs + "\"");
                }
            }
        }
    }
}

}  // namespace varietyir

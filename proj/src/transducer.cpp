#include "varietyir/transducer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "varietyir/analyzer.hpp"
#include "varietyir/error.hpp"
#include "varietyir/rng.hpp"
#include "varietyir/utf8.hpp"

namespace varietyir {

void validate_rule(const RewriteRule& rule) {
    if (rule.lhs.empty()) throw Error(ErrorCode::EmptyLhs, "rule lhs must be non-empty");
    if (rule.scope == RuleScope::Anywhere && rule.lhs == rule.rhs) {
        throw Error(ErrorCode::NoOpRule, "rule \"" + rule.lhs + "\" rewrites to itself");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

struct LineCursor {
    std::string_view line;
    std::size_t pos = 0;
    std::size_t line_no = 0;

    [[noreturn]] void fail(const std::string& what) const { throw Error(ErrorCode::SyntaxError, what, line_no); }

    void skip_space() {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    }
    bool at_end() {
        skip_space();
        return pos >= line.size() || line[pos] == '#';
    }
    std::string_view word() {
        skip_space();
        const auto start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '#') ++pos;
        if (start == pos) fail("expected a word");
        return line.substr(start, pos - start);
    }
    void expect(std::string_view token) {
        if (word() != token) fail("expected '" + std::string(token) + "'");
    }
    std::string quoted() {
        skip_space();
        if (pos >= line.size() || line[pos] != '"') fail("expected a quoted string");
        ++pos;
        std::string out;
        while (true) {
            if (pos >= line.size()) fail("unterminated string");
            char c = line[pos++];
            if (c == '"') return out;
            if (c == '\\') {
                if (pos >= line.size()) fail("dangling escape");
                c = line[pos++];
                if (c != '"' && c != '\\') fail("unknown escape");
            }
            out += c;
        }
    }
};

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

bool word_char_before(std::string_view text, std::size_t pos) {
    if (pos == 0) return false;
    std::size_t start = pos - 1;
    while (start > 0 && (static_cast<unsigned char>(text[start]) & 0xC0) == 0x80) --start;
    const auto cps = utf8::decode(text.substr(start, pos - start));
    return !cps.empty() && is_word_char(cps.front());
}

bool word_char_at(std::string_view text, std::size_t pos) {
    if (pos >= text.size()) return false;
    const auto len = utf8::sequence_length(text, pos);
    const auto cps = utf8::decode(text.substr(pos, len));
    return !cps.empty() && is_word_char(cps.front());
}

bool scope_allows(RuleScope scope, std::string_view text, std::size_t begin, std::size_t end) {
    const bool initial = !word_char_before(text, begin);
    const bool final = !word_char_at(text, end);
    switch (scope) {
        case RuleScope::Anywhere: return true;
        case RuleScope::WordInitial: return initial;
        case RuleScope::WordFinal: return final;
        case RuleScope::WholeWord: return initial && final;
    }
    return false;
}

std::string apply_lexicon(std::string_view text, const std::map<std::string, std::string>& lexicon) {
    if (lexicon.empty()) return std::string(text);
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (!word_char_at(text, pos)) {
            const auto len = utf8::sequence_length(text, pos);
            out.append(text.substr(pos, len));
            pos += len;
            continue;
        }
        const auto start = pos;
        while (pos < text.size() && word_char_at(text, pos)) pos += utf8::sequence_length(text, pos);
        const std::string word(text.substr(start, pos - start));
        auto it = lexicon.find(word);
        out += it == lexicon.end() ? word : it->second;
    }
    return out;
}

}  // namespace

VarietyRuleSet parse_ruleset(std::string_view text) {
    VarietyRuleSet rs;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        LineCursor cur{trim(text.substr(pos, end - pos)), 0, ++line_no};
        pos = end + 1;
        if (cur.at_end()) {
            if (end == text.size()) break;
            continue;
        }
        if (!utf8::is_valid(cur.line)) cur.fail("invalid UTF-8");
        const auto keyword = cur.word();
        if (keyword == "ruleset") {
            if (have_header) cur.fail("duplicate ruleset header");
            rs.ruleset_id = cur.word();
            cur.expect("family");
            rs.family_id = cur.word();
            have_header = true;
        } else if (keyword == "rule") {
            RewriteRule rule;
            rule.lhs = cur.quoted();
            cur.expect("->");
            rule.rhs = cur.quoted();
            if (!cur.at_end()) {
                const auto scope = cur.word();
                if (scope == "initial") rule.scope = RuleScope::WordInitial;
                else if (scope == "final") rule.scope = RuleScope::WordFinal;
                else if (scope == "word") rule.scope = RuleScope::WholeWord;
                else cur.fail("unknown scope '" + std::string(scope) + "'");
            }
            if (rule.lhs.empty()) throw Error(ErrorCode::EmptyLhs, "rule lhs must be non-empty", line_no);
            if (rule.scope == RuleScope::Anywhere && rule.lhs == rule.rhs) {
                throw Error(ErrorCode::NoOpRule, "rule rewrites to itself", line_no);
            }
            rs.rules.push_back(std::move(rule));
        } else if (keyword == "lex") {
            std::string from(cur.word());
            cur.expect("->");
            std::string to(cur.word());
            if (!rs.lexicon.emplace(from, to).second) {
                throw Error(ErrorCode::DuplicateLexiconKey, "lexicon key '" + from + "' repeated", line_no);
            }
        } else {
            cur.fail("unknown directive '" + std::string(keyword) + "'");
        }
        if (!cur.at_end()) cur.fail("trailing tokens");
        if (end == text.size()) break;
    }
    if (!have_header) throw Error(ErrorCode::SyntaxError, "missing 'ruleset <id> family <family_id>' header", 1);
    return rs;
}

VarietyRuleSet load_ruleset(const std::filesystem::path& path) { return parse_ruleset(read_file(path)); }

std::string format_ruleset(const VarietyRuleSet& rs) {
    std::string out = "ruleset " + rs.ruleset_id + " family " + rs.family_id + "\n";
    for (const auto& r : rs.rules) {
        out += "rule " + quote(r.lhs) + " -> " + quote(r.rhs);
        switch (r.scope) {
            case RuleScope::Anywhere: break;
            case RuleScope::WordInitial: out += " initial"; break;
            case RuleScope::WordFinal: out += " final"; break;
            case RuleScope::WholeWord: out += " word"; break;
        }
        out += "\n";
    }
    for (const auto& [from, to] : rs.lexicon) out += "lex " + from + " -> " + to + "\n";
    return out;
}

std::string transduce(std::string_view text, const VarietyRuleSet& rs) {
    const std::string source = apply_lexicon(text, rs.lexicon);
    if (rs.rules.empty()) return source;
    std::string out;
    out.reserve(source.size());
    std::size_t pos = 0;
    const std::string_view view(source);
    while (pos < view.size()) {
        const RewriteRule* best = nullptr;
        for (const auto& rule : rs.rules) {
            if (best != nullptr && rule.lhs.size() <= best->lhs.size()) continue;
            if (view.compare(pos, rule.lhs.size(), rule.lhs) != 0) continue;
            if (!scope_allows(rule.scope, view, pos, pos + rule.lhs.size())) continue;
            best = &rule;
        }
        if (best != nullptr) {
            out += best->rhs;
            pos += best->lhs.size();
        } else {
            const auto len = utf8::sequence_length(view, pos);
            out.append(view.substr(pos, len));
            pos += len;
        }
    }
    return out;
}

QuerySet transduce_queryset(const QuerySet& qs, const VarietyRuleSet& rs) {
    std::vector<Query> out;
    out.reserve(qs.size());
    for (const auto& q : qs) out.push_back({q.query_id, transduce(q.text, rs), rs.ruleset_id});
    return QuerySet(std::move(out));
}

std::vector<VarietyRuleSet> generate_family(const FamilySpec& spec) {
    if (spec.shared_rule_pool.empty()) throw Error(ErrorCode::EmptyPool, "family " + spec.family_id + " has no rules");
    if (!(spec.sampling_fraction > 0.0 && spec.sampling_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "sampling fraction must be in (0, 1]");
    }
    for (const auto& r : spec.shared_rule_pool) validate_rule(r);
    const std::size_t pool = spec.shared_rule_pool.size();
    const auto take = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(spec.sampling_fraction * static_cast<double>(pool) - 1e-9)), 1, pool);

    Rng rng(spec.seed);
    std::vector<VarietyRuleSet> out;
    for (std::size_t v = 0; v < spec.variety_count; ++v) {
        std::vector<std::size_t> rest(pool - 1);
        std::iota(rest.begin(), rest.end(), std::size_t{1});
        rng.shuffle(std::span(rest));
        std::vector<std::size_t> chosen{0};
        chosen.insert(chosen.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(take - 1));
        std::sort(chosen.begin(), chosen.end());

        VarietyRuleSet rs;
        rs.ruleset_id = spec.family_id + "-v" + std::to_string(v);
        rs.family_id = spec.family_id;
        for (auto i : chosen) rs.rules.push_back(spec.shared_rule_pool[i]);
        out.push_back(std::move(rs));
    }
    return out;
}

std::size_t shared_rule_count(const VarietyRuleSet& a, const VarietyRuleSet& b) {
    std::set<RewriteRule> left(a.rules.begin(), a.rules.end());
    std::size_t n = 0;
    std::set<RewriteRule> counted;
    for (const auto& r : b.rules) {
        if (left.contains(r) && counted.insert(r).second) ++n;
    }
    return n;
}

}  // namespace varietyir

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flutrack/common.hpp"

namespace flutrack::tax {

// Query taxonomy: A1 = first-person symptom/diagnosis seeking, A2 = research
// or news interest, SECONDARY / NON_ILI reserved for finer labels, UNLABELED =
// flagged as flu-related but not yet assigned a class.
enum class Label { A1, A2, Secondary, NonIli, Unlabeled };

inline const char* to_string(Label l) {
    switch (l) {
    case Label::A1: return "A1";
    case Label::A2: return "A2";
    case Label::Secondary: return "SECONDARY";
    case Label::NonIli: return "NON_ILI";
    case Label::Unlabeled: return "UNLABELED";
    }
    return "UNLABELED";
}

inline bool parse_label(const std::string& s, Label& out) {
    if (s == "A1") out = Label::A1;
    else if (s == "A2") out = Label::A2;
    else if (s == "SECONDARY") out = Label::Secondary;
    else if (s == "NON_ILI") out = Label::NonIli;
    else if (s == "UNLABELED") out = Label::Unlabeled;
    else return false;
    return true;
}

struct QueryRecord {
    std::int64_t timestamp = 0; // UTC seconds
    std::string zipcode;        // 5 digits
    std::string raw_text;
    std::string normalized_text;
    Label label = Label::Unlabeled;
};

// Lowercases ASCII letters, replaces ASCII punctuation/control characters
// with spaces, collapses whitespace runs and trims. Bytes >= 0x80 pass
// through unchanged, so UTF-8 text survives (un-normalized). Idempotent.
inline std::string normalize(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        char mapped;
        if (c >= 0x80) {
            mapped = static_cast<char>(c);
        } else if (c >= 'A' && c <= 'Z') {
            mapped = static_cast<char>(c - 'A' + 'a');
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            mapped = static_cast<char>(c);
        } else {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(mapped);
    }
    return out;
}

inline std::vector<std::string> tokenize(const std::string& normalized) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start < normalized.size()) {
        std::size_t end = normalized.find(' ', start);
        if (end == std::string::npos) end = normalized.size();
        if (end > start) tokens.push_back(normalized.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

// True when `term` (one or more tokens) appears as a run of whole tokens in
// `text`. Both strings must already be normalized.
inline bool contains_term(const std::string& text, const std::string& term) {
    if (term.empty()) return false;
    const std::string padded_text = " " + text + " ";
    const std::string padded_term = " " + term + " ";
    return padded_text.find(padded_term) != std::string::npos;
}

// Flag terms plus ordered labeling rules. Both come from the same rule file:
// a query is a flu candidate when any pattern matches, and its label is the
// first matching rule's label. Extra flag-only terms can be written as
// `PATTERN<TAB>UNLABELED`.
struct KeywordRules {
    std::vector<std::string> flag_terms;
    std::vector<std::pair<std::string, Label>> rules;
};

// One rule per line: PATTERN<TAB>LABEL. '#' starts a comment line.
inline KeywordRules parse_rules(const std::string& text, const std::string& source_name) {
    KeywordRules out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw config_error(source_name + ":" + std::to_string(lineno) +
                               ": expected PATTERN<TAB>LABEL");
        const std::string pattern = normalize(line.substr(0, tab));
        const std::string label_str = line.substr(tab + 1);
        Label label;
        if (pattern.empty())
            throw config_error(source_name + ":" + std::to_string(lineno) + ": empty pattern");
        if (!parse_label(label_str, label))
            throw config_error(source_name + ":" + std::to_string(lineno) +
                               ": unknown label '" + label_str + "'");
        out.flag_terms.push_back(pattern);
        out.rules.emplace_back(pattern, label);
    }
    if (out.flag_terms.empty())
        throw config_error(source_name + ": rule file defines no patterns");
    return out;
}

inline KeywordRules load_rules(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open rules file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rules(ss.str(), path);
}

// Per-query label overrides, keyed by normalized text. Stands in for the
// human coding pass: anything a reviewer has decided wins over the rules.
struct LabelOverrides {
    std::map<std::string, Label> by_text;
};

inline LabelOverrides parse_overrides(const std::string& text, const std::string& source_name) {
    LabelOverrides out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw config_error(source_name + ":" + std::to_string(lineno) +
                               ": expected TEXT<TAB>LABEL");
        Label label;
        if (!parse_label(line.substr(tab + 1), label))
            throw config_error(source_name + ":" + std::to_string(lineno) +
                               ": unknown label '" + line.substr(tab + 1) + "'");
        out.by_text[normalize(line.substr(0, tab))] = label;
    }
    return out;
}

inline LabelOverrides load_overrides(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open label override file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_overrides(ss.str(), path);
}

inline bool flag_candidate(const std::string& normalized_text, const KeywordRules& rules) {
    for (const auto& term : rules.flag_terms)
        if (contains_term(normalized_text, term)) return true;
    return false;
}

// First matching rule wins; unflagged queries are NON_ILI. A flagged query
// that matches no labeling rule stays UNLABELED (it still counts as a flu
// candidate downstream).
inline Label assign_label(const std::string& normalized_text, const KeywordRules& rules) {
    bool flagged = false;
    for (const auto& [pattern, label] : rules.rules) {
        if (contains_term(normalized_text, pattern)) return label;
    }
    for (const auto& term : rules.flag_terms)
        if (contains_term(normalized_text, term)) { flagged = true; break; }
    return flagged ? Label::Unlabeled : Label::NonIli;
}

// Rules plus overrides. An override marks the reviewer's decision and also
// settles candidacy: any non-NON_ILI override means the query is flu-related.
inline Label assign_label(const std::string& normalized_text, const KeywordRules& rules,
                          const LabelOverrides& overrides) {
    const auto it = overrides.by_text.find(normalized_text);
    if (it != overrides.by_text.end()) return it->second;
    return assign_label(normalized_text, rules);
}

// A query counts toward the flu-candidate denominator iff its label is not
// NON_ILI.
inline bool is_flagged(Label l) { return l != Label::NonIli; }

} // namespace flutrack::tax

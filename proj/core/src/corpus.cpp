#include "extsumm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "extsumm/errors.hpp"
#include "extsumm/io.hpp"
#include "extsumm/log.hpp"

namespace extsumm {
namespace {

using json = nlohmann::json;

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

// Token-like characters: ASCII alphanumerics plus any non-ASCII byte, so
// multi-byte UTF-8 sequences are never split in the middle.
bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

const std::unordered_set<std::string>& abbreviation_guard() {
    // Lowercased, without the final period.
    static const std::unordered_set<std::string> guard = {
        "e.g", "i.e", "etc", "et", "al", "vs", "cf", "fig", "figs", "eq", "eqs",
        "sec", "secs", "no", "nos", "dr", "mr", "mrs", "ms", "prof", "univ",
        "dept", "approx", "resp", "ca", "vol", "vols", "ch", "pp", "st",
    };
    return guard;
}

// The run of non-whitespace characters ending at text[dot] (inclusive),
// without the final period, lowercased.
std::string word_before_dot(std::string_view text, std::size_t dot) {
    std::size_t begin = dot;
    while (begin > 0 && !is_ascii_space(text[begin - 1])) --begin;
    std::string w(text.substr(begin, dot - begin));
    for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return w;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_ascii_space(s[b])) ++b;
    while (e > b && is_ascii_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string join_section_error(const std::filesystem::path& path, std::size_t line_no,
                               const std::string& what) {
    return path.string() + ":" + std::to_string(line_no) + ": " + what;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    if (text.empty()) return out;

    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;

        // Absorb a run of closing punctuation after the terminator so
        // quotes/brackets stay with the sentence.
        std::size_t end = i + 1;
        while (end < text.size() && (text[end] == '"' || text[end] == '\'' || text[end] == ')' ||
                                     text[end] == ']')) {
            ++end;
        }
        if (end >= text.size()) break;  // trailing terminator, no split needed
        if (!is_ascii_space(text[end])) continue;

        std::size_t next = end;
        while (next < text.size() && is_ascii_space(text[next])) ++next;
        if (next >= text.size()) break;
        if (!is_ascii_upper(text[next]) && !is_ascii_digit(text[next])) continue;

        if (c == '.') {
            const std::string w = word_before_dot(text, i);
            if (abbreviation_guard().contains(w)) continue;
        }

        std::string seg = trim(text.substr(start, end - start));
        if (!seg.empty()) out.push_back(std::move(seg));
        start = next;
        i = next - 1;
    }
    std::string tail = trim(text.substr(start));
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

std::vector<std::string> tokenize(std::string_view sentence) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < sentence.size()) {
        if (!is_word_char(static_cast<unsigned char>(sentence[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        bool all_digits = true;
        while (j < sentence.size() && is_word_char(static_cast<unsigned char>(sentence[j]))) {
            if (!is_ascii_digit(sentence[j])) all_digits = false;
            ++j;
        }
        if (all_digits) {
            out.emplace_back("NUM");
        } else {
            std::string tok(sentence.substr(i, j - i));
            for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            out.push_back(std::move(tok));
        }
        i = j;
    }
    return out;
}

namespace {

std::vector<Sentence> to_sentences(std::string_view text) {
    std::vector<Sentence> out;
    for (auto& raw : split_sentences(text)) {
        Sentence s;
        s.tokens = tokenize(raw);
        if (s.tokens.empty()) continue;  // nothing usable, drop
        s.raw = std::move(raw);
        s.position = static_cast<int>(out.size());
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

Document make_document(std::string id, std::string title, std::string_view abstract_text,
                       const std::vector<std::pair<std::string, std::string>>& sections) {
    Document doc;
    doc.id = std::move(id);
    doc.title = std::move(title);
    doc.abstract = to_sentences(abstract_text);
    for (const auto& [heading, text] : sections) {
        doc.sections.push_back({heading, static_cast<int>(doc.body.size())});
        for (auto& s : to_sentences(text)) {
            s.position = static_cast<int>(doc.body.size());
            doc.body.push_back(std::move(s));
        }
    }
    return doc;
}

Vocabulary::Vocabulary() {
    tokens_ = {"<pad>", "<unk>"};
    doc_freq_ = {0, 0};
    lookup_ = {{"<pad>", kPad}, {"<unk>", kUnk}};
}

Vocabulary Vocabulary::build(const std::vector<Document>& docs, int min_count) {
    std::map<std::string, std::int64_t> freq;
    std::map<std::string, std::int32_t> df;
    for (const auto& doc : docs) {
        std::set<std::string> seen;
        auto count = [&](const std::vector<std::string>& tokens) {
            for (const auto& t : tokens) {
                ++freq[t];
                seen.insert(t);
            }
        };
        for (const auto& s : doc.body) count(s.tokens);
        for (const auto& s : doc.abstract) count(s.tokens);
        count(tokenize(doc.title));
        for (const auto& t : seen) ++df[t];
    }

    std::vector<std::pair<std::string, std::int64_t>> kept;
    for (const auto& [tok, n] : freq) {
        if (n >= min_count) kept.emplace_back(tok, n);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    v.min_count_ = min_count;
    v.doc_count_ = static_cast<int>(docs.size());
    for (const auto& [tok, n] : kept) {
        (void)n;
        v.lookup_.emplace(tok, static_cast<std::int32_t>(v.tokens_.size()));
        v.tokens_.push_back(tok);
        v.doc_freq_.push_back(df[tok]);
    }
    return v;
}

std::int32_t Vocabulary::id(std::string_view token) const {
    auto it = lookup_.find(std::string(token));
    return it == lookup_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
    return tokens_.at(static_cast<std::size_t>(id));
}

void Vocabulary::save(const std::filesystem::path& path) const {
    json j;
    j["min_count"] = min_count_;
    j["doc_count"] = doc_count_;
    json entries = json::array();
    for (std::size_t i = 2; i < tokens_.size(); ++i) {
        entries.push_back({{"t", tokens_[i]}, {"df", doc_freq_[i]}});
    }
    j["tokens"] = std::move(entries);
    write_text_file(path, j.dump());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw DataError("invalid vocabulary file " + path.string() + ": " + e.what());
    }
    Vocabulary v;
    v.min_count_ = j.at("min_count").get<int>();
    v.doc_count_ = j.at("doc_count").get<int>();
    for (const auto& entry : j.at("tokens")) {
        const auto tok = entry.at("t").get<std::string>();
        v.lookup_.emplace(tok, static_cast<std::int32_t>(v.tokens_.size()));
        v.tokens_.push_back(tok);
        v.doc_freq_.push_back(entry.at("df").get<std::int32_t>());
    }
    return v;
}

void assign_token_ids(std::vector<Document>& docs, const Vocabulary& vocab) {
    auto assign = [&](Sentence& s) {
        s.token_ids.clear();
        s.token_ids.reserve(s.tokens.size());
        for (const auto& t : s.tokens) s.token_ids.push_back(vocab.id(t));
    };
    for (auto& doc : docs) {
        for (auto& s : doc.abstract) assign(s);
        for (auto& s : doc.body) assign(s);
    }
}

std::pair<std::vector<Document>, Vocabulary> ingest_corpus(const std::filesystem::path& path,
                                                           int min_count) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path.string());

    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> ids_seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(join_section_error(path, line_no, std::string("malformed JSON: ") + e.what()));
        }
        if (!rec.contains("abstract") || !rec.contains("sections")) {
            log_warn(join_section_error(path, line_no, "record missing abstract or sections, skipped"));
            continue;
        }
        std::vector<std::pair<std::string, std::string>> sections;
        for (const auto& sec : rec["sections"]) {
            sections.emplace_back(sec.value("heading", std::string{}), sec.value("text", std::string{}));
        }
        Document doc = make_document(rec.value("id", "line" + std::to_string(line_no)),
                                     rec.value("title", std::string{}),
                                     rec["abstract"].get<std::string>(), sections);
        if (doc.abstract.empty() || doc.body.empty()) {
            log_warn(join_section_error(path, line_no, "record with empty abstract or body, skipped"));
            continue;
        }
        if (!ids_seen.insert(doc.id).second) {
            throw DataError(join_section_error(path, line_no, "duplicate document id: " + doc.id));
        }
        docs.push_back(std::move(doc));
    }

    Vocabulary vocab = Vocabulary::build(docs, min_count);
    assign_token_ids(docs, vocab);
    return {std::move(docs), std::move(vocab)};
}

TfIdfModel compute_tfidf(const std::vector<Document>& corpus, const Vocabulary& vocab) {
    if (corpus.empty()) throw DataError("compute_tfidf: empty corpus");
    TfIdfModel model;
    const double total = static_cast<double>(corpus.size());
    model.idf.assign(static_cast<std::size_t>(vocab.size()), 0.0);
    for (std::int32_t id = 2; id < vocab.size(); ++id) {
        const double df = static_cast<double>(vocab.doc_freq(id));
        model.idf[static_cast<std::size_t>(id)] = std::log((1.0 + total) / (1.0 + df)) + 1.0;
    }
    return model;
}

SparseVec sentence_vector(const Sentence& sentence, const TfIdfModel& tfidf) {
    std::map<std::int32_t, double> counts;
    for (std::int32_t id : sentence.token_ids) {
        if (id == Vocabulary::kPad || id == Vocabulary::kUnk) continue;
        counts[id] += 1.0;
    }
    SparseVec vec;
    double norm_sq = 0.0;
    for (const auto& [id, tf] : counts) {
        const double w = tf * tfidf.idf.at(static_cast<std::size_t>(id));
        if (w != 0.0) {
            vec.emplace_back(id, w);
            norm_sq += w * w;
        }
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [id, w] : vec) w *= inv;
    } else {
        vec.clear();
    }
    return vec;
}

double cosine(const SparseVec& u, const SparseVec& v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    std::size_t i = 0, j = 0;
    while (i < u.size() && j < v.size()) {
        if (u[i].first == v[j].first) {
            dot += u[i].second * v[j].second;
            ++i;
            ++j;
        } else if (u[i].first < v[j].first) {
            ++i;
        } else {
            ++j;
        }
    }
    for (const auto& [id, w] : u) nu += w * w;
    for (const auto& [id, w] : v) nv += w * w;
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double cosine(std::span<const double> u, std::span<const double> v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    const std::size_t n = std::min(u.size(), v.size());
    for (std::size_t i = 0; i < n; ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    for (std::size_t i = n; i < u.size(); ++i) nu += u[i] * u[i];
    for (std::size_t i = n; i < v.size(); ++i) nv += v[i] * v[i];
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace extsumm

#pragma once

// Inverted index: build over a document stream, merge chunks built in
// parallel, persist and reload. The merged result of any chunking is
// identical, posting for posting, to a single-pass build over the same
// stream; ordinals follow stream order, chunks are merged in declared order.
//
// On-disk layout under <dir>/:
//   VERSION    format tag and version
//   docs       per ordinal: id <TAB> token count
//   dict       per term: term <TAB> postings offset <TAB> postings bytes
//   postings   per term: varint df, then (varint doc delta, varint tf)*
//   stats      {"doc_count": N, "total_tokens": T, "version": 1}

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "textproc.hpp"
#include "util.hpp"

namespace clirkit::index {

constexpr int kIndexVersion = 1;
inline constexpr char kIndexMagic[] = "clirkit-index";

struct Posting {
    uint32_t doc;
    uint32_t tf;

    bool operator==(const Posting&) const = default;
};

using PostingList = std::vector<Posting>;

struct TermEntry {
    PostingList postings;
    uint64_t ctf = 0;

    bool operator==(const TermEntry&) const = default;
};

struct DocEntry {
    std::string id;
    uint32_t length = 0;

    bool operator==(const DocEntry&) const = default;
};

struct CollectionStats {
    uint64_t doc_count = 0;
    uint64_t total_tokens = 0;
    double avg_doc_len = 0.0;

    bool operator==(const CollectionStats&) const = default;
};

namespace detail {

inline void put_varint(std::string& out, uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<char>((v & 0x7f) | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<char>(v));
}

inline uint64_t get_varint(const std::string& buf, size_t& pos) {
    uint64_t v = 0;
    int shift = 0;
    while (true) {
        if (pos >= buf.size()) fail("truncated postings data");
        uint8_t b = static_cast<uint8_t>(buf[pos++]);
        v |= static_cast<uint64_t>(b & 0x7f) << shift;
        if (!(b & 0x80)) return v;
        shift += 7;
        if (shift > 63) fail("corrupt varint in postings data");
    }
}

}  // namespace detail

class InvertedIndex {
  public:
    using DocumentSource = std::function<std::optional<corpus::Document>()>;

    /// Single-pass build over a document stream. Indexes title and body as
    /// one field (title + " " + text) through the given pipeline. Ordinals
    /// are assigned in stream order.
    static InvertedIndex build(const DocumentSource& next, const text::TextPipeline& pipe) {
        InvertedIndex idx;
        std::unordered_set<std::string> seen;
        while (auto doc = next()) {
            if (!seen.insert(doc->id).second)
                fail("duplicate document id '", doc->id, "' while indexing");
            auto tokens = pipe.process(doc->title + " " + doc->text);
            uint32_t ordinal = static_cast<uint32_t>(idx.docs_.size());
            idx.docs_.push_back({doc->id, static_cast<uint32_t>(tokens.size())});
            idx.total_tokens_ += tokens.size();
            std::map<std::string, uint32_t> tf;
            for (auto& t : tokens) ++tf[t];
            for (auto& [term, count] : tf) {
                auto& entry = idx.dict_[term];
                entry.postings.push_back({ordinal, count});
                entry.ctf += count;
            }
        }
        if (idx.docs_.empty()) fail("cannot index an empty document stream");
        return idx;
    }

    static InvertedIndex build(const std::vector<corpus::Document>& docs,
                               const text::TextPipeline& pipe) {
        size_t i = 0;
        return build(
            [&]() -> std::optional<corpus::Document> {
                if (i >= docs.size()) return std::nullopt;
                return docs[i++];
            },
            pipe);
    }

    /// Merge chunks in declared order: ordinals renumbered by chunk order
    /// then within-chunk order, per-term postings concatenated after
    /// renumbering, statistics recomputed.
    static InvertedIndex merge(const std::vector<const InvertedIndex*>& chunks) {
        if (chunks.empty()) fail("cannot merge zero index chunks");
        InvertedIndex out;
        std::unordered_set<std::string> seen;
        uint32_t base = 0;
        for (const auto* chunk : chunks) {
            for (const auto& d : chunk->docs_) {
                if (!seen.insert(d.id).second)
                    fail("doc id collision across index chunks: '", d.id, "'");
                out.docs_.push_back(d);
            }
            out.total_tokens_ += chunk->total_tokens_;
            for (const auto& [term, entry] : chunk->dict_) {
                auto& dst = out.dict_[term];
                for (const auto& p : entry.postings) dst.postings.push_back({p.doc + base, p.tf});
                dst.ctf += entry.ctf;
            }
            base += static_cast<uint32_t>(chunk->docs_.size());
        }
        return out;
    }

    static InvertedIndex merge(const std::vector<InvertedIndex>& chunks) {
        std::vector<const InvertedIndex*> ptrs;
        for (const auto& c : chunks) ptrs.push_back(&c);
        return merge(ptrs);
    }

    // --- lookups ------------------------------------------------------

    const PostingList& postings(const std::string& term) const {
        static const PostingList kEmpty;
        auto it = dict_.find(term);
        return it == dict_.end() ? kEmpty : it->second.postings;
    }

    uint32_t df(const std::string& term) const {
        auto it = dict_.find(term);
        return it == dict_.end() ? 0 : static_cast<uint32_t>(it->second.postings.size());
    }

    uint64_t ctf(const std::string& term) const {
        auto it = dict_.find(term);
        return it == dict_.end() ? 0 : it->second.ctf;
    }

    uint32_t doc_len(uint32_t ordinal) const {
        if (ordinal >= docs_.size()) fail("document ordinal out of range: ", ordinal);
        return docs_[ordinal].length;
    }

    const std::string& doc_id(uint32_t ordinal) const {
        if (ordinal >= docs_.size()) fail("document ordinal out of range: ", ordinal);
        return docs_[ordinal].id;
    }

    size_t doc_count() const { return docs_.size(); }
    uint64_t total_tokens() const { return total_tokens_; }

    CollectionStats stats() const {
        CollectionStats s;
        s.doc_count = docs_.size();
        s.total_tokens = total_tokens_;
        s.avg_doc_len =
            docs_.empty() ? 0.0 : static_cast<double>(total_tokens_) / static_cast<double>(docs_.size());
        return s;
    }

    const std::map<std::string, TermEntry>& dictionary() const { return dict_; }
    const std::vector<DocEntry>& doc_table() const { return docs_; }

    bool operator==(const InvertedIndex&) const = default;

    // --- persistence ---------------------------------------------------

    void save(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        write_file(dir / "VERSION", concat(kIndexMagic, " ", kIndexVersion, "\n"));

        std::string docs;
        for (const auto& d : docs_) docs += concat(d.id, "\t", d.length, "\n");
        write_file(dir / "docs", docs);

        std::string postings;
        std::string dict;
        for (const auto& [term, entry] : dict_) {
            size_t start = postings.size();
            detail::put_varint(postings, entry.postings.size());
            uint32_t prev = 0;
            bool first = true;
            for (const auto& p : entry.postings) {
                detail::put_varint(postings, first ? p.doc : p.doc - prev);
                detail::put_varint(postings, p.tf);
                prev = p.doc;
                first = false;
            }
            dict += concat(term, "\t", start, "\t", postings.size() - start, "\n");
        }
        write_file(dir / "postings", postings);
        write_file(dir / "dict", dict);

        nlohmann::json stats{{"version", kIndexVersion},
                             {"doc_count", docs_.size()},
                             {"total_tokens", total_tokens_}};
        write_file(dir / "stats", stats.dump() + "\n");
    }

    static InvertedIndex load(const std::filesystem::path& dir) {
        std::string version = read_file(dir / "VERSION");
        if (version != concat(kIndexMagic, " ", kIndexVersion, "\n"))
            fail("index version mismatch at ", dir.string(), ": got '", version, "'");

        InvertedIndex idx;
        auto stats = nlohmann::json::parse(read_file(dir / "stats"));
        idx.total_tokens_ = stats.at("total_tokens").get<uint64_t>();
        uint64_t doc_count = stats.at("doc_count").get<uint64_t>();

        std::istringstream docs(read_file(dir / "docs"));
        std::string line;
        uint64_t length_sum = 0;
        while (std::getline(docs, line)) {
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos) fail("corrupt docs table at ", dir.string());
            DocEntry d;
            d.id = line.substr(0, tab);
            d.length = static_cast<uint32_t>(std::stoul(line.substr(tab + 1)));
            length_sum += d.length;
            idx.docs_.push_back(std::move(d));
        }
        if (idx.docs_.size() != doc_count)
            fail("index corruption at ", dir.string(), ": docs table has ", idx.docs_.size(),
                 " entries, stats say ", doc_count);
        if (length_sum != idx.total_tokens_)
            fail("index corruption at ", dir.string(), ": document lengths sum to ", length_sum,
                 ", stats say ", idx.total_tokens_);

        std::string postings = read_file(dir / "postings");
        std::istringstream dict(read_file(dir / "dict"));
        while (std::getline(dict, line)) {
            if (line.empty()) continue;
            auto t1 = line.find('\t');
            auto t2 = line.find('\t', t1 + 1);
            if (t1 == std::string::npos || t2 == std::string::npos)
                fail("corrupt dictionary at ", dir.string());
            std::string term = line.substr(0, t1);
            size_t offset = std::stoull(line.substr(t1 + 1, t2 - t1 - 1));
            size_t nbytes = std::stoull(line.substr(t2 + 1));
            if (offset + nbytes > postings.size())
                fail("index corruption at ", dir.string(), ": postings overrun for term '", term,
                     "'");
            size_t pos = offset;
            uint64_t df = detail::get_varint(postings, pos);
            TermEntry entry;
            entry.postings.reserve(df);
            uint32_t doc = 0;
            for (uint64_t i = 0; i < df; ++i) {
                uint64_t delta = detail::get_varint(postings, pos);
                uint64_t tf = detail::get_varint(postings, pos);
                if (i > 0 && delta == 0)
                    fail("index corruption at ", dir.string(),
                         ": non-increasing ordinals for term '", term, "'");
                if (tf == 0)
                    fail("index corruption at ", dir.string(), ": zero tf for term '", term, "'");
                doc = (i == 0) ? static_cast<uint32_t>(delta) : doc + static_cast<uint32_t>(delta);
                if (doc >= idx.docs_.size())
                    fail("index corruption at ", dir.string(), ": ordinal out of range for term '",
                         term, "'");
                entry.postings.push_back({doc, static_cast<uint32_t>(tf)});
                entry.ctf += tf;
            }
            if (pos != offset + nbytes)
                fail("index corruption at ", dir.string(), ": postings length mismatch for term '",
                     term, "'");
            idx.dict_.emplace(std::move(term), std::move(entry));
        }
        return idx;
    }

  private:
    std::map<std::string, TermEntry> dict_;
    std::vector<DocEntry> docs_;
    uint64_t total_tokens_ = 0;
};

}  // namespace clirkit::index

#pragma once

// Document ingestion and the on-disk document store. The store keeps the
// original, unprocessed documents (rerankers tokenize differently than the
// index does) as length-prefixed JSON records plus a sidecar offset table:
//
//   <dir>/records.bin   u32-LE length prefix, then the record's JSON bytes
//   <dir>/offsets.idx   one line per record: id <TAB> offset <TAB> length,
//                       sorted by id
//   <dir>/header        {"count": N, "language": "xx", "version": 1}
//
// The format is deliberately simple enough to read from any language; the
// external reranker protocol hands rerankers a path to one of these.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "util.hpp"

namespace clirkit::corpus {

constexpr int kDocStoreVersion = 1;

struct Document {
    std::string id;
    std::string title;
    std::string text;
    std::string language;

    bool operator==(const Document&) const = default;
};

inline bool valid_doc_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f')
            return false;
    return true;
}

/// Streaming reader for the JSONL document format: one object per line with
/// fields id (required), text (required), title and language (optional).
/// Memory use is independent of collection size apart from the id set kept
/// for duplicate detection.
class JsonlDocumentReader {
  public:
    JsonlDocumentReader(const std::filesystem::path& path, std::string default_language)
        : path_(path.string()), in_(path), default_language_(std::move(default_language)) {
        if (!in_) fail("cannot open document input: ", path_);
    }

    std::optional<Document> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            return parse_line(line);
        }
        if (in_.bad()) fail(path_, ": read error");
        return std::nullopt;
    }

    size_t count() const { return seen_ids_.size(); }

  private:
    Document parse_line(const std::string& line) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(path_, " line ", line_no_, ": invalid JSON: ", e.what());
        }
        if (!j.is_object()) fail(path_, " line ", line_no_, ": record is not a JSON object");
        Document doc;
        doc.id = get_string(j, "id", true);
        doc.text = get_string(j, "text", true);
        doc.title = get_string(j, "title", false);
        doc.language = get_string(j, "language", false);
        if (!valid_doc_id(doc.id))
            fail(path_, " line ", line_no_, ": document id must be non-empty without whitespace");
        if (doc.language.empty()) doc.language = default_language_;
        if (doc.language.empty())
            fail(path_, " line ", line_no_, ": no language on record and no default configured");
        if (!seen_ids_.insert(doc.id).second)
            fail(path_, " line ", line_no_, ": duplicate document id '", doc.id, "'");
        return doc;
    }

    std::string get_string(const nlohmann::json& j, const char* key, bool required) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) fail(path_, " line ", line_no_, ": missing required field '", key, "'");
            return {};
        }
        if (!it->is_string())
            fail(path_, " line ", line_no_, ": field '", key, "' must be a string");
        return it->get<std::string>();
    }

    std::string path_;
    std::ifstream in_;
    std::string default_language_;
    size_t line_no_ = 0;
    std::unordered_set<std::string> seen_ids_;
};

namespace detail {

inline std::string serialize_record(const Document& doc) {
    nlohmann::json j{{"id", doc.id}, {"title", doc.title}, {"text", doc.text},
                     {"language", doc.language}};
    return j.dump();
}

inline Document parse_record(const std::string& bytes) {
    nlohmann::json j = nlohmann::json::parse(bytes);
    return Document{j.at("id").get<std::string>(), j.at("title").get<std::string>(),
                    j.at("text").get<std::string>(), j.at("language").get<std::string>()};
}

struct StoreEntry {
    std::string id;
    uint64_t offset;
    uint32_t length;
};

}  // namespace detail

class DocStoreWriter {
  public:
    DocStoreWriter(const std::filesystem::path& dir, std::string language)
        : dir_(dir), language_(std::move(language)) {
        std::filesystem::create_directories(dir_);
        records_.open(dir_ / "records.bin", std::ios::binary | std::ios::trunc);
        if (!records_) fail("cannot create doc store at ", dir_.string());
    }

    void append(const Document& doc) {
        if (finalized_) fail("doc store append after finalize");
        if (!by_id_.insert(doc.id).second) fail("duplicate document id '", doc.id, "'");
        std::string bytes = detail::serialize_record(doc);
        uint32_t len = static_cast<uint32_t>(bytes.size());
        char prefix[4] = {static_cast<char>(len & 0xff), static_cast<char>((len >> 8) & 0xff),
                          static_cast<char>((len >> 16) & 0xff),
                          static_cast<char>((len >> 24) & 0xff)};
        records_.write(prefix, 4);
        records_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!records_) fail("doc store write error at ", dir_.string());
        entries_.push_back({doc.id, offset_, len});
        offset_ += 4 + len;
    }

    void finalize() {
        if (finalized_) fail("doc store finalized twice");
        finalized_ = true;
        records_.flush();
        if (!records_) fail("doc store write error at ", dir_.string());
        records_.close();
        write_sidecars(dir_, entries_, language_);
    }

    size_t count() const { return entries_.size(); }

    static void write_sidecars(const std::filesystem::path& dir,
                               std::vector<detail::StoreEntry> entries,
                               const std::string& language) {
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.id < b.id; });
        std::string idx;
        for (const auto& e : entries)
            idx += concat(e.id, "\t", e.offset, "\t", e.length, "\n");
        write_file(dir / "offsets.idx", idx);
        nlohmann::json header{{"version", kDocStoreVersion},
                              {"count", entries.size()},
                              {"language", language}};
        write_file(dir / "header", header.dump() + "\n");
    }

  private:
    std::filesystem::path dir_;
    std::string language_;
    std::ofstream records_;
    std::vector<detail::StoreEntry> entries_;
    std::unordered_set<std::string> by_id_;
    uint64_t offset_ = 0;
    bool finalized_ = false;
};

/// Read-only view of a finalized store. Safe for concurrent readers; each
/// get() is one seek plus one read.
class DocStore {
  public:
    explicit DocStore(const std::filesystem::path& dir) : dir_(dir) {
        auto header = nlohmann::json::parse(read_file(dir_ / "header"));
        if (header.at("version").get<int>() != kDocStoreVersion)
            fail("doc store version mismatch at ", dir_.string());
        language_ = header.at("language").get<std::string>();
        size_t count = header.at("count").get<size_t>();

        std::istringstream idx(read_file(dir_ / "offsets.idx"));
        std::string line;
        while (std::getline(idx, line)) {
            if (line.empty()) continue;
            auto t1 = line.find('\t');
            auto t2 = line.find('\t', t1 + 1);
            if (t1 == std::string::npos || t2 == std::string::npos)
                fail("corrupt offsets.idx at ", dir_.string());
            detail::StoreEntry e;
            e.id = line.substr(0, t1);
            e.offset = std::stoull(line.substr(t1 + 1, t2 - t1 - 1));
            e.length = static_cast<uint32_t>(std::stoul(line.substr(t2 + 1)));
            entries_.push_back(std::move(e));
        }
        if (entries_.size() != count)
            fail("doc store count mismatch at ", dir_.string(), ": header says ", count,
                 ", index has ", entries_.size());
        for (size_t i = 0; i < entries_.size(); ++i) by_id_[entries_[i].id] = i;
        if (by_id_.size() != entries_.size()) fail("duplicate id in offsets.idx at ", dir_.string());
        // ordinal order is append order, i.e. ascending file offset
        ordinals_.resize(entries_.size());
        for (size_t i = 0; i < entries_.size(); ++i) ordinals_[i] = i;
        std::sort(ordinals_.begin(), ordinals_.end(), [this](size_t a, size_t b) {
            return entries_[a].offset < entries_[b].offset;
        });
        records_path_ = (dir_ / "records.bin").string();
    }

    size_t count() const { return entries_.size(); }
    const std::string& language() const { return language_; }
    const std::filesystem::path& dir() const { return dir_; }

    bool contains(const std::string& id) const { return by_id_.count(id) > 0; }

    Document get(const std::string& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) fail("unknown document id '", id, "'");
        return read_entry(entries_[it->second]);
    }

    const std::string& id_at(size_t ordinal) const {
        if (ordinal >= ordinals_.size()) fail("document ordinal out of range: ", ordinal);
        return entries_[ordinals_[ordinal]].id;
    }

    Document get_by_ordinal(size_t ordinal) const {
        if (ordinal >= ordinals_.size()) fail("document ordinal out of range: ", ordinal);
        return read_entry(entries_[ordinals_[ordinal]]);
    }

  private:
    Document read_entry(const detail::StoreEntry& e) const {
        std::ifstream in(records_path_, std::ios::binary);
        if (!in) fail("cannot open ", records_path_);
        in.seekg(static_cast<std::streamoff>(e.offset));
        char prefix[4];
        in.read(prefix, 4);
        uint32_t len = static_cast<uint8_t>(prefix[0]) | (static_cast<uint8_t>(prefix[1]) << 8) |
                       (static_cast<uint8_t>(prefix[2]) << 16) |
                       (static_cast<uint8_t>(prefix[3]) << 24);
        if (!in || len != e.length) fail("corrupt doc store record at offset ", e.offset);
        std::string bytes(len, '\0');
        in.read(bytes.data(), len);
        if (!in) fail("truncated doc store record at offset ", e.offset);
        return detail::parse_record(bytes);
    }

    std::filesystem::path dir_;
    std::string records_path_;
    std::string language_;
    std::vector<detail::StoreEntry> entries_;
    std::unordered_map<std::string, size_t> by_id_;
    std::vector<size_t> ordinals_;
};

/// Merge store parts into one store, equivalent to appending every part's
/// records in part order. Parts must be id-disjoint and same-language.
inline void merge_stores(const std::vector<std::filesystem::path>& parts,
                         const std::filesystem::path& out_dir) {
    if (parts.empty()) fail("store merge needs at least one part");
    std::filesystem::create_directories(out_dir);
    std::ofstream records(out_dir / "records.bin", std::ios::binary | std::ios::trunc);
    if (!records) fail("cannot create doc store at ", out_dir.string());

    std::vector<detail::StoreEntry> merged;
    std::unordered_set<std::string> seen;
    std::string language;
    uint64_t base = 0;
    for (const auto& part : parts) {
        DocStore store(part);
        if (language.empty())
            language = store.language();
        else if (language != store.language())
            fail("store merge language mismatch: '", language, "' vs '", store.language(), "'");
        std::istringstream idx(read_file(part / "offsets.idx"));
        std::vector<detail::StoreEntry> entries;
        std::string line;
        while (std::getline(idx, line)) {
            if (line.empty()) continue;
            auto t1 = line.find('\t');
            auto t2 = line.find('\t', t1 + 1);
            detail::StoreEntry e;
            e.id = line.substr(0, t1);
            e.offset = std::stoull(line.substr(t1 + 1, t2 - t1 - 1));
            e.length = static_cast<uint32_t>(std::stoul(line.substr(t2 + 1)));
            if (!seen.insert(e.id).second)
                fail("id collision across store parts: '", e.id, "'");
            entries.push_back(std::move(e));
        }
        std::string bytes = read_file(part / "records.bin");
        records.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!records) fail("doc store write error at ", out_dir.string());
        for (auto& e : entries) {
            e.offset += base;
            merged.push_back(std::move(e));
        }
        base += bytes.size();
    }
    records.close();
    DocStoreWriter::write_sidecars(out_dir, std::move(merged), language);
}

}  // namespace clirkit::corpus

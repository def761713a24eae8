#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "clirkit/corpus.hpp"
#include "support/tmpdir.hpp"

using namespace clirkit;
using testsupport::TempDir;

namespace {

std::vector<corpus::Document> drain(corpus::JsonlDocumentReader& reader) {
    std::vector<corpus::Document> docs;
    while (auto d = reader.next()) docs.push_back(std::move(*d));
    return docs;
}

}  // namespace

TEST_CASE("ingest reads documents in file order") {
    TempDir dir("ingest");
    write_file(dir / "docs.jsonl",
               "{\"id\": \"a\", \"title\": \"first\", \"text\": \"alpha\"}\n"
               "\n"
               "{\"id\": \"b\", \"text\": \"beta\", \"language\": \"de\"}\n"
               "{\"id\": \"c\", \"text\": \"gamma\"}\n");
    corpus::JsonlDocumentReader reader(dir / "docs.jsonl", "en");
    auto docs = drain(reader);
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].id == "a");
    CHECK(docs[0].title == "first");
    CHECK(docs[0].language == "en");  // filled from config default
    CHECK(docs[1].language == "de");  // record value wins
    CHECK(docs[2].id == "c");
}

TEST_CASE("ingest errors carry line numbers and ids") {
    TempDir dir("ingest_err");
    write_file(dir / "bad.jsonl",
               "{\"id\": \"a\", \"text\": \"x\"}\n"
               "{not json}\n");
    corpus::JsonlDocumentReader bad(dir / "bad.jsonl", "en");
    CHECK(bad.next().has_value());
    CHECK_THROWS_WITH(bad.next(), Catch::Matchers::ContainsSubstring("line 2"));

    write_file(dir / "dup.jsonl",
               "{\"id\": \"a\", \"text\": \"x\"}\n"
               "{\"id\": \"b\", \"text\": \"y\"}\n"
               "{\"id\": \"a\", \"text\": \"z\"}\n");
    corpus::JsonlDocumentReader dup(dir / "dup.jsonl", "en");
    CHECK(dup.next().has_value());
    CHECK(dup.next().has_value());
    CHECK_THROWS_WITH(dup.next(), Catch::Matchers::ContainsSubstring("duplicate document id 'a'"));

    write_file(dir / "missing.jsonl", "{\"id\": \"a\"}\n");
    corpus::JsonlDocumentReader missing(dir / "missing.jsonl", "en");
    CHECK_THROWS_WITH(missing.next(), Catch::Matchers::ContainsSubstring("text"));

    write_file(dir / "badid.jsonl", "{\"id\": \"a b\", \"text\": \"x\"}\n");
    corpus::JsonlDocumentReader badid(dir / "badid.jsonl", "en");
    CHECK_THROWS_AS(badid.next(), Error);
}

TEST_CASE("doc store round trip") {
    TempDir dir("store");
    corpus::Document doc{"d1", "Title", "body text with \xc3\xa9 accents\nand newline", "en"};
    {
        corpus::DocStoreWriter writer(dir / "store", "en");
        writer.append(doc);
        writer.finalize();
        CHECK_THROWS_WITH(writer.append(doc), Catch::Matchers::ContainsSubstring("finalize"));
    }
    corpus::DocStore store(dir / "store");
    CHECK(store.count() == 1);
    CHECK(store.language() == "en");
    CHECK(store.get("d1") == doc);  // byte-identical text
    CHECK_THROWS_WITH(store.get("missing"),
                      Catch::Matchers::ContainsSubstring("unknown document id"));
}

TEST_CASE("doc store random access over generated documents") {
    TempDir dir("store_prop");
    std::mt19937 rng(42);
    std::vector<corpus::Document> docs;
    for (int i = 0; i < 2000; ++i) {
        std::string id = "doc" + std::to_string(i);
        std::string text;
        size_t len = rng() % 200;
        for (size_t j = 0; j < len; ++j) text.push_back(static_cast<char>('a' + rng() % 26));
        docs.push_back({id, i % 3 ? "" : "title " + std::to_string(i), text, "en"});
    }
    {
        corpus::DocStoreWriter writer(dir / "store", "en");
        for (const auto& d : docs) writer.append(d);
        writer.finalize();
    }
    corpus::DocStore store(dir / "store");
    REQUIRE(store.count() == docs.size());
    std::vector<size_t> order(docs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i : order) CHECK(store.get(docs[i].id) == docs[i]);
    // ordinal order is append order
    for (size_t i = 0; i < docs.size(); i += 97) CHECK(store.id_at(i) == docs[i].id);
}

TEST_CASE("store merge equals sequential append") {
    TempDir dir("store_merge");
    std::vector<corpus::Document> all;
    for (int part = 0; part < 3; ++part) {
        corpus::DocStoreWriter writer(dir / ("part" + std::to_string(part)), "en");
        for (int i = 0; i < 5 + part; ++i) {
            corpus::Document d{"p" + std::to_string(part) + "_" + std::to_string(i), "",
                               "text " + std::to_string(i), "en"};
            writer.append(d);
            all.push_back(d);
        }
        writer.finalize();
    }
    corpus::merge_stores({dir / "part0", dir / "part1", dir / "part2"}, dir / "merged");

    {
        corpus::DocStoreWriter writer(dir / "sequential", "en");
        for (const auto& d : all) writer.append(d);
        writer.finalize();
    }
    corpus::DocStore merged(dir / "merged");
    corpus::DocStore sequential(dir / "sequential");
    REQUIRE(merged.count() == all.size());
    for (size_t i = 0; i < all.size(); ++i) {
        CHECK(merged.id_at(i) == sequential.id_at(i));
        CHECK(merged.get(all[i].id) == all[i]);
    }
}

TEST_CASE("store merge rejects id collisions") {
    TempDir dir("store_collide");
    for (int part = 0; part < 2; ++part) {
        corpus::DocStoreWriter writer(dir / ("part" + std::to_string(part)), "en");
        writer.append({"shared", "", "text", "en"});
        writer.finalize();
    }
    CHECK_THROWS_WITH(corpus::merge_stores({dir / "part0", dir / "part1"}, dir / "merged"),
                      Catch::Matchers::ContainsSubstring("collision"));
}

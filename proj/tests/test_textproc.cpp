#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "clirkit/textproc.hpp"

using namespace clirkit;
using text::TokenStream;

namespace {
text::ProcessingPolicy en_policy(bool stop, bool stemmer) {
    text::ProcessingPolicy p;
    p.language = "en";
    p.stopwords = stop ? text::StopwordsKind::builtin : text::StopwordsKind::none;
    p.stemmer = stemmer ? text::StemmerKind::porter : text::StemmerKind::none;
    return p;
}
}  // namespace

TEST_CASE("tokenize basics") {
    text::ProcessingPolicy p;
    CHECK(text::tokenize("the quick, brown fox!", p) ==
          TokenStream{"the", "quick", "brown", "fox"});
    CHECK(text::tokenize("", p) == TokenStream{});
    CHECK(text::tokenize("state-of-the-art 2021", p) ==
          TokenStream{"state", "of", "the", "art", "2021"});
    CHECK(text::tokenize("!!! ... ---", p) == TokenStream{});
    CHECK(text::tokenize("a b", p) == TokenStream{"a", "b"});
}

TEST_CASE("tokenize apostrophes and digit separators") {
    text::ProcessingPolicy p;
    CHECK(text::tokenize("the runner's shoes", p) == TokenStream{"the", "runner", "shoes"});
    CHECK(text::tokenize("can't won't", p) == TokenStream{"can't", "won't"});
    CHECK(text::tokenize("runners' shoes", p) == TokenStream{"runners", "shoes"});
    CHECK(text::tokenize("3.14 and 1,000 points", p) ==
          TokenStream{"3.14", "and", "1,000", "points"});
    CHECK(text::tokenize("a.b end.", p) == TokenStream{"a", "b", "end"});
    CHECK(text::tokenize("x86_64 foo_bar", p) == TokenStream{"x86_64", "foo_bar"});
    // U+2019 apostrophe behaves like U+0027
    CHECK(text::tokenize("runner\xe2\x80\x99s", p) == TokenStream{"runner"});
}

TEST_CASE("tokenize keeps combining marks inside words") {
    text::ProcessingPolicy p;
    // "cafe" + combining acute, undecomposed input
    CHECK(text::tokenize("cafe\xcc\x81 bar", p) == TokenStream{"cafe\xcc\x81", "bar"});
}

TEST_CASE("builtin stopword list is frozen") {
    CHECK(text::kBuiltinStopwordsEn.size() == 33);
    auto p = en_policy(true, false);
    auto set = text::resolve_stopwords(p);
    CHECK(set.size() == 33);
    // every builtin stopword alone filters to empty
    for (auto w : text::kBuiltinStopwordsEn) {
        TokenStream one{std::string(w)};
        CHECK(text::remove_stopwords(one, set).empty());
    }
    CHECK(text::remove_stopwords({"the", "cat", "sat"}, set) == TokenStream{"cat", "sat"});
}

TEST_CASE("stopwords none is identity, file list is honored") {
    text::ProcessingPolicy none;
    TokenStream toks{"the", "cat"};
    CHECK(text::remove_stopwords(toks, none) == toks);

    auto dir = std::filesystem::temp_directory_path() / "clirkit_stopwords_test";
    std::filesystem::create_directories(dir);
    write_file(dir / "stop.txt", "# comment line\ncat\n\n  dog  \n");
    text::ProcessingPolicy file_policy;
    file_policy.stopwords = text::StopwordsKind::file;
    file_policy.stopword_file = (dir / "stop.txt").string();
    CHECK(text::remove_stopwords(toks, file_policy) == TokenStream{"the"});

    text::ProcessingPolicy missing = file_policy;
    missing.stopword_file = (dir / "absent.txt").string();
    CHECK_THROWS_AS(text::remove_stopwords(toks, missing), Error);
}

TEST_CASE("policy validation") {
    text::ProcessingPolicy p;
    p.language = "de";
    p.stemmer = text::StemmerKind::porter;
    CHECK_THROWS_WITH(text::validate_policy(p),
                      Catch::Matchers::ContainsSubstring("porter"));
    p.stemmer = text::StemmerKind::none;
    p.stopwords = text::StopwordsKind::builtin;
    CHECK_THROWS_AS(text::validate_policy(p), Error);
}

TEST_CASE("porter stemmer matches the frozen reference fixtures") {
    std::ifstream in(std::string(CLIRKIT_TEST_DATA_DIR) + "/porter_fixtures.tsv");
    REQUIRE(in.good());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        REQUIRE(tab != std::string::npos);
        std::string word = line.substr(0, tab);
        std::string expect = line.substr(tab + 1);
        CAPTURE(word);
        CHECK(text::porter_stem(word) == expect);
        ++n;
    }
    CHECK(n > 150);
}

TEST_CASE("porter stemmer contract cases") {
    CHECK(text::porter_stem("caresses") == "caress");
    CHECK(text::porter_stem("running") == "run");
    CHECK(text::porter_stem("sky") == "sky");
    // non-conforming tokens pass through unchanged
    CHECK(text::porter_stem("Running") == "Running");
    CHECK(text::porter_stem("run2") == "run2");
    CHECK(text::porter_stem("can't") == "can't");
    CHECK(text::porter_stem("caf\xc3\xa9s") == "caf\xc3\xa9s");
    CHECK(text::porter_stem("at") == "at");
    CHECK(text::porter_stem("") == "");
}

TEST_CASE("process composes the steps in order") {
    auto full = en_policy(true, true);
    CHECK(text::process("The Runner's Shoes", full) == TokenStream{"runner", "shoe"});

    text::ProcessingPolicy plain;
    CHECK(text::process("a b", plain) == TokenStream{"a", "b"});

    auto once = text::process("Stemming Stopwords And Diacritics: caf\xc3\xa9!", full);
    auto twice = text::process("Stemming Stopwords And Diacritics: caf\xc3\xa9!", full);
    CHECK(once == twice);
}

TEST_CASE("process applies stopwords before stemming") {
    // "these" stems to "these"->? irrelevant: it must be removed as a stopword
    // while an inflected non-stopword passes through the stemmer.
    auto full = en_policy(true, true);
    CHECK(text::process("these connections", full) == TokenStream{"connect"});
}

TEST_CASE("query/document symmetry") {
    auto full = en_policy(true, true);
    text::TextPipeline pipe(full);
    std::string s = "Reproducible Retrieval Experiments: the PSQ baseline's results (2021)";
    CHECK(pipe.process(s) == pipe.process(s));
    CHECK(pipe.process(s) == text::process(s, full));
}

#include "doctest.h"

#include "sortie/textdoc.hpp"

using namespace sortie;

TEST_CASE("parses nested blocks, ids and entries") {
    const char* text = R"(# comment
outer {
  key 1 2 three
  inner abc {
    flag true
  }
}
)";
    auto nodes = parse_textdoc(text);
    REQUIRE(nodes.size() == 1);
    CHECK(nodes[0].name == "outer");
    const TextEntry* key = nodes[0].find_entry("key");
    REQUIRE(key != nullptr);
    CHECK(key->values == std::vector<std::string>{"1", "2", "three"});
    REQUIRE(nodes[0].children.size() == 1);
    CHECK(nodes[0].children[0].name == "inner");
    CHECK(nodes[0].children[0].id == "abc");
    CHECK(textdoc_bool(*nodes[0].children[0].find_entry("flag"), 0));
}

TEST_CASE("syntax errors carry line positions") {
    try {
        parse_textdoc("a {\n  x 1\n");
        FAIL("expected error");
    } catch (const TextParseError& e) {
        CHECK(std::string(e.what()).find("unterminated") != std::string::npos);
    }

    try {
        parse_textdoc("a {\n}\n}\n");
        FAIL("expected error");
    } catch (const TextParseError& e) {
        CHECK(e.line == 3);
    }

    CHECK_THROWS_AS(parse_textdoc("x 1\n"), TextParseError);          // entry outside block
    CHECK_THROWS_AS(parse_textdoc("a b c d {\n}\n"), TextParseError); // oversized header
}

TEST_CASE("write/parse round-trip preserves structure") {
    TextNode node{"root", "r1"};
    node.entries.push_back({"alpha", {"1", "2"}});
    TextNode child{"child"};
    child.entries.push_back({"beta", {"x"}});
    node.children.push_back(child);

    const std::string text = write_textdoc({node});
    auto parsed = parse_textdoc(text);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].name == "root");
    CHECK(parsed[0].id == "r1");
    CHECK(parsed[0].find_entry("alpha")->values == std::vector<std::string>{"1", "2"});
    CHECK(parsed[0].children[0].find_entry("beta")->values == std::vector<std::string>{"x"});
    // a second round trip is byte-identical
    CHECK(write_textdoc(parsed) == text);
}

TEST_CASE("typed accessors reject malformed values") {
    auto nodes = parse_textdoc("a {\n  n 12\n  r 1.5\n  bad zz\n}\n");
    const TextNode& a = nodes[0];
    CHECK(textdoc_int(*a.find_entry("n"), 0) == 12);
    CHECK(textdoc_real(*a.find_entry("r"), 0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(textdoc_int(*a.find_entry("bad"), 0), TextParseError);
    CHECK_THROWS_AS(textdoc_bool(*a.find_entry("bad"), 0), TextParseError);
    CHECK_THROWS_AS(textdoc_int(*a.find_entry("n"), 5), TextParseError);
}

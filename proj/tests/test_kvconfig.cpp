#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "wbplab/errors.hpp"
#include "wbplab/kvconfig.hpp"

using namespace wbplab;

TEST_CASE("parse and access") {
    KvDoc doc = KvDoc::parse_string(
        "# comment\n[code]\ntype = rm\nr = 2\n\n[train]\nalpha0 = 1e-3\n"
        "snrs = 1 2.5 4\nosd = true\n");
    CHECK(doc.require("code", "type") == "rm");
    CHECK(doc.get_int("code", "r") == 2);
    CHECK(doc.get_double("train", "alpha0") == doctest::Approx(1e-3));
    CHECK(doc.get_bool("train", "osd", false));
    CHECK(doc.get_doubles("train", "snrs") ==
          std::vector<double>{1.0, 2.5, 4.0});
    CHECK_FALSE(doc.has("train", "missing"));
    CHECK_THROWS_AS(doc.require("train", "missing"), ParamError);
}

TEST_CASE("round trip is identity") {
    KvDoc doc;
    doc.set("code", "type", "alist");
    doc.set_double("decoder", "gamma", 0.125);
    doc.set_doubles("weights", "edge", {1.0, 0.3333333333333333, 2e-7});
    doc.set_int("train", "steps", 5000);
    doc.set_bool("decoder", "rrd", true);
    const std::string text = doc.serialize_string();
    CHECK(KvDoc::parse_string(text) == doc);
    CHECK(KvDoc::parse_string(text).serialize_string() == text);
}

TEST_CASE("malformed input reports the line") {
    try {
        KvDoc::parse_string("[a]\nkey value\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(KvDoc::parse_string("key = 1\n"), ParseError);
    CHECK_THROWS_AS(KvDoc::parse_string("[open\n"), ParseError);
}

TEST_CASE("format_double survives the round trip") {
    for (const double v : {0.0, 1.0, -1.5, 1e-3, 8e-4, 0.1 + 0.2,
                           3.141592653589793, 1e300, 5e-324}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.001) == "0.001");
}

TEST_CASE("set overwrites in place") {
    KvDoc doc;
    doc.set("a", "k", "1");
    doc.set("a", "k", "2");
    CHECK(doc.require("a", "k") == "2");
    CHECK(doc.sections().size() == 1);
    CHECK(doc.sections()[0].entries.size() == 1);
}

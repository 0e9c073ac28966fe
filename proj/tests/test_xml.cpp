#include <stdexcept>
#include <string>

#include "doctest.h"
#include "oaaudit/xml.hpp"

using namespace oa;

TEST_CASE("parse builds the element tree with attributes and text") {
    xml::Element root = xml::parse(
        "<?xml version=\"1.0\"?>\n"
        "<response>\n"
        "  <result total=\"120\" offset=\"0\">\n"
        "    <record><dc:title>First</dc:title><dc:creator>A, B</dc:creator></record>\n"
        "    <record><dc:title>Second</dc:title></record>\n"
        "  </result>\n"
        "</response>");
    CHECK(root.name == "response");
    const xml::Element* result = root.first("result");
    REQUIRE(result != nullptr);
    REQUIRE(result->attr("total") != nullptr);
    CHECK(*result->attr("total") == "120");
    CHECK(result->attr("missing") == nullptr);
    auto records = result->all("record");
    REQUIRE(records.size() == 2);
    const xml::Element* title = records[0]->first("dc:title");
    REQUIRE(title != nullptr);
    CHECK(title->text == "First");
    CHECK(records[1]->first("dc:creator") == nullptr);
}

TEST_CASE("predefined entities and numeric references decode") {
    xml::Element root = xml::parse("<r a=\"x&amp;y\">&lt;b&gt; &quot;q&quot; &apos;s&apos; &#65;&#x42;</r>");
    REQUIRE(root.attr("a") != nullptr);
    CHECK(*root.attr("a") == "x&y");
    CHECK(root.text == "<b> \"q\" 's' AB");
}

TEST_CASE("cdata passes through verbatim and comments vanish") {
    xml::Element root = xml::parse("<r><!-- note --><![CDATA[a <raw> & b]]></r>");
    CHECK(root.text == "a <raw> & b");
    CHECK(root.children.empty());
}

TEST_CASE("text collects only the element's own character data") {
    xml::Element root = xml::parse("<r>one<child>inner</child>two</r>");
    CHECK(root.text == "onetwo");
    REQUIRE(root.children.size() == 1);
    CHECK(root.children[0].text == "inner");
}

TEST_CASE("self closing elements are empty children") {
    xml::Element root = xml::parse("<r><empty/><full>x</full></r>");
    REQUIRE(root.children.size() == 2);
    CHECK(root.children[0].name == "empty");
    CHECK(root.children[0].text.empty());
}

TEST_CASE("escape makes arbitrary text safe to embed") {
    std::string nasty = "a < b && \"c\" > 'd'";
    xml::Element root = xml::parse("<r>" + xml::escape(nasty) + "</r>");
    CHECK(root.text == nasty);
}

TEST_CASE("malformed documents throw with the open element path") {
    CHECK_THROWS_AS(xml::parse("<a><b></a>"), std::runtime_error);
    CHECK_THROWS_AS(xml::parse("<a>"), std::runtime_error);
    CHECK_THROWS_AS(xml::parse("plain text"), std::runtime_error);
    CHECK_THROWS_AS(xml::parse(""), std::runtime_error);
    try {
        xml::parse("<outer><inner>");
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("outer") != std::string::npos);
    }
}

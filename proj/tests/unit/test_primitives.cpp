#include <gtest/gtest.h>

#include "didlkit/base64.hpp"
#include "didlkit/bytes.hpp"
#include "didlkit/error.hpp"
#include "didlkit/mime.hpp"
#include "didlkit/timestamp.hpp"
#include "didlkit/uri.hpp"
#include "didlkit/xml.hpp"
#include "oracles.hpp"
#include "random_doc.hpp"

using namespace didlkit;

TEST(Base64, MatchesOracleOnRandomInput) {
  testsupport::Rng rng(11);
  for (std::size_t n = 0; n < 300; ++n) {
    auto bytes = testsupport::random_bytes(rng, n);
    auto ours = base64::encode(bytes);
    EXPECT_EQ(ours, oracle::base64_encode(bytes)) << n;
    auto back = oracle::base64_decode(ours);
    ASSERT_TRUE(back);
    EXPECT_EQ(*back, bytes);
    EXPECT_EQ(base64::decode(ours).value(), bytes);
  }
}

TEST(Base64, Rfc4648Vectors) {
  EXPECT_EQ(base64::encode(as_bytes("")), "");
  EXPECT_EQ(base64::encode(as_bytes("f")), "Zg==");
  EXPECT_EQ(base64::encode(as_bytes("fo")), "Zm8=");
  EXPECT_EQ(base64::encode(as_bytes("foo")), "Zm9v");
  EXPECT_EQ(base64::encode(as_bytes("foobar")), "Zm9vYmFy");
}

TEST(Base64, WrappedLinesAndWhitespaceTolerantDecode) {
  Bytes bytes(200, 0xAB);
  auto wrapped = base64::encode_wrapped(bytes, 76);
  std::size_t start = 0;
  while (true) {
    auto nl = wrapped.find('\n', start);
    auto line = wrapped.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    EXPECT_LE(line.size(), 76u);
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  EXPECT_NE(wrapped.back(), '\n');
  EXPECT_EQ(base64::decode("  " + wrapped + "\n\t").value(), bytes);
}

TEST(Base64, RejectsMalformed) {
  EXPECT_FALSE(base64::decode("Zg="));
  EXPECT_FALSE(base64::decode("Z*=="));
  EXPECT_FALSE(base64::decode("Zg==Zg=="));
  EXPECT_FALSE(base64::decode("=Zg="));
}

TEST(Base64, UrlAlphabet) {
  Bytes bytes{0xfb, 0xff, 0xfe};
  auto text = base64::encode_url(bytes);
  EXPECT_EQ(text, "-__-");
  EXPECT_EQ(base64::decode_url(text).value(), bytes);
  EXPECT_FALSE(base64::decode_url("+//+"));
  EXPECT_FALSE(base64::decode_url("Zg=="));
}

TEST(Digest, Sha256MatchesOracle) {
  EXPECT_EQ(sha256_hex(as_bytes("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  testsupport::Rng rng(5);
  for (std::size_t n : {0u, 1u, 63u, 64u, 65u, 1000u, 70000u}) {
    auto bytes = testsupport::random_bytes(rng, n);
    EXPECT_EQ(sha256_hex(bytes), oracle::sha256_hex(bytes));
  }
}

TEST(Hex, RoundTripAndErrors) {
  Bytes b{0x00, 0x7f, 0xff};
  EXPECT_EQ(hex_encode(b), "007fff");
  EXPECT_EQ(hex_decode("007FFF"), b);
  EXPECT_THROW(hex_decode("abc"), Error);
  EXPECT_THROW(hex_decode("zz"), Error);
}

TEST(Uri, Absolute) {
  EXPECT_TRUE(uri::is_absolute("info:doi/10.1045/july95-arms"));
  EXPECT_TRUE(uri::is_absolute("http://purl.lanl.gov/tech/pdf/015997845.pdf"));
  EXPECT_TRUE(uri::is_absolute("urn:isbn:0451450523"));
  EXPECT_FALSE(uri::is_absolute("july95-arms"));
  EXPECT_FALSE(uri::is_absolute("tech/pdf/x.pdf"));
  EXPECT_FALSE(uri::is_absolute("http://a b"));
  EXPECT_FALSE(uri::is_absolute("1http://x"));
  EXPECT_FALSE(uri::is_absolute(""));
  EXPECT_EQ(uri::scheme("HTTP://x/y").value(), "http");
  EXPECT_FALSE(uri::scheme("no-scheme"));
}

TEST(Uri, SplitAndPercent) {
  auto h = uri::split_hierarchical("http://host.example/a/b.pdf?q=1#f").value();
  EXPECT_EQ(h.scheme, "http");
  EXPECT_EQ(h.host, "host.example");
  EXPECT_EQ(h.path, "a/b.pdf");
  EXPECT_FALSE(uri::split_hierarchical("info:doi/x"));
  std::string raw = "info:lanl-repo/i/abc def&x=y";
  auto enc = uri::percent_encode(raw);
  EXPECT_EQ(enc.find(' '), std::string::npos);
  EXPECT_EQ(enc.find('&'), std::string::npos);
  EXPECT_EQ(uri::percent_decode(enc), raw);
}

TEST(Timestamp, ParseAndRender) {
  auto t = Timestamp::parse("2004-11-22T18:07:18Z").value();
  EXPECT_EQ(t.to_string(), "2004-11-22T18:07:18Z");
  EXPECT_EQ(t.unix_seconds(), 1101146838);
  EXPECT_EQ(Timestamp::parse("2004-11-22T20:07:18.75+02:00").value(), t);
  EXPECT_EQ(Timestamp::parse_date("2004-11-22").value().to_string(), "2004-11-22T00:00:00Z");
  EXPECT_FALSE(Timestamp::parse("2004-11-22"));
  EXPECT_FALSE(Timestamp::parse("2004-13-01T00:00:00Z"));
  EXPECT_FALSE(Timestamp::parse_date("2004-11-22T00:00:00Z"));
  EXPECT_LT(Timestamp::from_unix(1), Timestamp::from_unix(2));
}

TEST(Mime, WellFormedAndEssence) {
  EXPECT_TRUE(mime::is_well_formed("application/pdf"));
  EXPECT_TRUE(mime::is_well_formed("text/xml; charset=UTF-8"));
  EXPECT_TRUE(mime::is_well_formed("text/plain;charset=\"utf-8\""));
  EXPECT_FALSE(mime::is_well_formed("pdf"));
  EXPECT_FALSE(mime::is_well_formed("text/"));
  EXPECT_FALSE(mime::is_well_formed("text/xml; charset"));
  EXPECT_EQ(mime::essence("Text/XML; charset=UTF-8"), "text/xml");
  EXPECT_EQ(mime::essence("bogus"), "");
}

TEST(Xml, ParseRefusesDtdAndDeepNesting) {
  auto dtd = xml::parse("<!DOCTYPE a [<!ENTITY x \"y\">]><a>&x;</a>");
  ASSERT_TRUE(dtd.error);
  EXPECT_EQ(dtd.error->code, "E-DTD");

  std::string deep;
  for (std::size_t i = 0; i < xml::kMaxDepth + 5; ++i) deep += "<a>";
  for (std::size_t i = 0; i < xml::kMaxDepth + 5; ++i) deep += "</a>";
  auto d = xml::parse(deep);
  ASSERT_TRUE(d.error);
  EXPECT_EQ(d.error->code, "E-DEPTH");

  auto bad = xml::parse("<a><b></a>");
  ASSERT_TRUE(bad.error);
  EXPECT_EQ(bad.error->code, "E-XML");
}

TEST(Xml, EquivalenceIgnoresPrefixesAndAttributeOrder) {
  auto a = xml::parse("<p:a xmlns:p='urn:x' x='1' y='2'> <p:b>t</p:b> </p:a>").root.value();
  auto b = xml::parse("<q:a xmlns:q='urn:x' y='2' x='1'><q:b>t</q:b><!-- c --></q:a>").root.value();
  auto c = xml::parse("<q:a xmlns:q='urn:x' y='2' x='1'><q:b>u</q:b></q:a>").root.value();
  EXPECT_TRUE(xml::equivalent(a, b));
  EXPECT_FALSE(xml::equivalent(a, c));
}

TEST(Xml, WriteEscapesAndReparses) {
  xml::Element e;
  e.name = {"urn:x", "e"};
  e.set_attribute({"", "v"}, "a\"<&>'");
  e.children.emplace_back(std::string("1 < 2 & \"q\" ]]>"));
  auto text = xml::write(e, xml::PrefixTable{}, {});
  auto back = xml::parse(text).root.value();
  EXPECT_TRUE(xml::equivalent(e, back));
  EXPECT_EQ(*back.attribute({"", "v"}), "a\"<&>'");
}

#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "didlkit/base64.hpp"
#include "didlkit/error.hpp"
#include "didlkit/resourceio.hpp"
#include "httplib.h"
#include "oracles.hpp"
#include "random_doc.hpp"
#include "temp_dir.hpp"

using namespace didlkit;
using namespace didlkit::resourceio;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return Errc::invalid_argument;
}

void write_file(const std::filesystem::path& p, std::string_view data) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << data;
}

class LocalHttp : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Get("/file.bin", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(5000, 'x'), "application/octet-stream");
    });
    server_.Get("/hop", [](const httplib::Request&, httplib::Response& res) {
      res.status = 302;
      res.set_header("Location", "/file.bin");
    });
    server_.Get("/loop", [](const httplib::Request&, httplib::Response& res) {
      res.status = 302;
      res.set_header("Location", "/loop");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string url(std::string_view path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + std::string(path);
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST(ContentEncoding, MatchesLibdeflateBothWays) {
  testsupport::Rng rng(3);
  for (std::string token : {"gzip", "deflate"}) {
    for (std::size_t n : {0u, 1u, 100u, 4096u, 100000u}) {
      auto bytes = testsupport::random_bytes(rng, n);
      auto ours = encode_content(bytes, token);
      EXPECT_EQ(oracle::decompress(ours, token, n).value(), bytes) << token << n;
      EXPECT_EQ(decode_content(oracle::compress(bytes, token), token), bytes) << token << n;
    }
  }
}

TEST(ContentEncoding, Errors) {
  auto packed = encode_content(as_bytes("hello hello hello hello"), "gzip");
  EXPECT_EQ(code_of([&] { decode_content(ByteView(packed).first(packed.size() - 4), "gzip"); }),
            Errc::decode_error);
  EXPECT_EQ(code_of([&] { decode_content(as_bytes("not gzip at all"), "gzip"); }), Errc::decode_error);
  EXPECT_EQ(code_of([&] { decode_content(packed, "compress"); }), Errc::unsupported_encoding);
  Bytes big(10000, 'a');
  auto bomb = encode_content(big, "deflate");
  EXPECT_EQ(code_of([&] { decode_content(bomb, "deflate", 100); }), Errc::decode_error);
  EXPECT_TRUE(is_supported_content_encoding("gzip"));
  EXPECT_FALSE(is_supported_content_encoding("br"));
}

TEST(Materialize, ByValueForms) {
  auto text = model::make_resource_text("text/plain", "héllo");
  EXPECT_EQ(to_string(materialize(text, nullptr)), "héllo");

  Bytes bytes{0, 1, 2, 250};
  for (std::optional<std::string> c : {std::optional<std::string>{}, std::optional<std::string>{"gzip"},
                                       std::optional<std::string>{"deflate"}}) {
    auto node = embed_by_value(bytes, "application/octet-stream", c);
    EXPECT_EQ(materialize(node, nullptr), bytes);
  }

  auto xml_node = model::make_statement_xml(
      "text/xml", {xml::parse("<a xmlns='urn:x' z='1' b='2'><c/></a>").root.value()});
  auto canon = to_string(materialize(xml_node, nullptr));
  EXPECT_NE(canon.find("b=\"2\" z=\"1\""), std::string::npos) << canon;
}

TEST(Materialize, ErrorCodes) {
  auto urn = model::make_resource_ref("application/pdf", "urn:isbn:0451450523");
  EXPECT_EQ(code_of([&] { materialize(urn, nullptr); }), Errc::non_digital);
  auto http = model::make_resource_ref("application/pdf", "http://x/y");
  EXPECT_EQ(code_of([&] { materialize(http, nullptr); }), Errc::fetch_error);

  auto bad = embed_by_value(as_bytes("abc"), "text/plain");
  bad.payload.encoding = "base32";
  EXPECT_EQ(code_of([&] { materialize(bad, nullptr); }), Errc::unsupported_encoding);
  bad.payload.encoding = "base64";
  bad.payload.content = std::string("*bad*");
  EXPECT_EQ(code_of([&] { materialize(bad, nullptr); }), Errc::decode_error);

  auto component = model::make_component({});
  EXPECT_EQ(code_of([&] { materialize(component, nullptr); }), Errc::invalid_argument);
}

TEST(Materialize, ComponentEquivalence) {
  Bytes bytes = to_bytes("same octets");
  ReplayFetcher fetcher;
  fetcher.add("http://h/a", bytes);
  fetcher.add("http://h/b", to_bytes("other octets"));
  auto same = model::make_component({model::make_resource_ref("text/plain", "http://h/a"),
                                     embed_by_value(bytes, "text/plain", "gzip")});
  auto report = check_component_equivalence(same, model::NodePath({0, 1}), &fetcher);
  EXPECT_TRUE(report.equivalent);
  ASSERT_EQ(report.digests.size(), 2u);
  EXPECT_EQ(report.digests[0].node_path, "/0/1/0");
  EXPECT_EQ(report.digests[1].sha256_hex, oracle::sha256_hex(bytes));

  auto differ = model::make_component({model::make_resource_ref("text/plain", "http://h/a"),
                                       model::make_resource_ref("text/plain", "http://h/b")});
  EXPECT_FALSE(check_component_equivalence(differ, {}, &fetcher).equivalent);

  auto missing = model::make_component({model::make_resource_ref("text/plain", "http://h/zzz")});
  try {
    check_component_equivalence(missing, model::NodePath({4}), &fetcher);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::fetch_error);
    EXPECT_NE(std::string(e.what()).find("/4/0"), std::string::npos);
  }
}

TEST(LocalFetcher, MapsHostAndPath) {
  testsupport::TempDir dir;
  write_file(dir.path() / "purl.lanl.gov/tech/pdf/a b.pdf", "PDF");
  LocalFetcher fetcher(dir.path());
  EXPECT_EQ(to_string(fetcher.fetch("http://purl.lanl.gov/tech/pdf/a%20b.pdf")), "PDF");
  EXPECT_EQ(code_of([&] { fetcher.fetch("http://purl.lanl.gov/none"); }), Errc::fetch_error);
  EXPECT_EQ(code_of([&] { fetcher.fetch("http://purl.lanl.gov/../../etc/passwd"); }), Errc::fetch_error);
  EXPECT_EQ(code_of([&] { fetcher.fetch("http://h/%2e%2e/x"); }), Errc::fetch_error);
  EXPECT_EQ(code_of([&] { fetcher.fetch("info:doi/x"); }), Errc::fetch_error);

  LocalFetcher capped(dir.path(), 2);
  EXPECT_EQ(code_of([&] { capped.fetch("http://purl.lanl.gov/tech/pdf/a%20b.pdf"); }), Errc::fetch_error);
}

TEST(ReplayFetcher, RecordAndReplay) {
  ReplayFetcher inner({{"http://h/x", to_bytes("x")}});
  RecordingFetcher recorder(inner);
  EXPECT_EQ(to_string(recorder.fetch("http://h/x")), "x");
  EXPECT_THROW(recorder.fetch("http://h/y"), Error);
  auto replay = recorder.replay();
  EXPECT_EQ(to_string(replay.fetch("http://h/x")), "x");
  EXPECT_EQ(recorder.recorded().size(), 1u);
}

TEST_F(LocalHttp, FetchesAndFollowsRedirects) {
  HttpFetcher fetcher;
  EXPECT_EQ(fetcher.fetch(url("/file.bin")).size(), 5000u);
  EXPECT_EQ(fetcher.fetch(url("/hop")).size(), 5000u);
  EXPECT_EQ(code_of([&] { fetcher.fetch(url("/loop")); }), Errc::fetch_error);
  EXPECT_EQ(code_of([&] { fetcher.fetch(url("/missing")); }), Errc::fetch_error);
  EXPECT_EQ(code_of([&] { fetcher.fetch("https://127.0.0.1/x"); }), Errc::fetch_error);
}

TEST_F(LocalHttp, SizeCap) {
  HttpOptions options;
  options.max_bytes = 1000;
  HttpFetcher fetcher(options);
  EXPECT_EQ(code_of([&] { fetcher.fetch(url("/file.bin")); }), Errc::fetch_error);
}

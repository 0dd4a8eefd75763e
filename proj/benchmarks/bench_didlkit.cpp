#include <benchmark/benchmark.h>

#include <filesystem>

#include "didlkit/codec.hpp"
#include "didlkit/fixtures.hpp"
#include "didlkit/integrity.hpp"
#include "didlkit/repository.hpp"
#include "didlkit/resourceio.hpp"
#include "didlkit/validator.hpp"
#include "random_doc.hpp"
#include "temp_dir.hpp"

using namespace didlkit;

namespace {

std::vector<model::DidlDocument> corpus(std::size_t n) {
  testsupport::Rng rng(2024);
  std::vector<model::DidlDocument> docs;
  for (std::size_t i = 0; i < n; ++i) docs.push_back(testsupport::random_document(rng));
  return docs;
}

void BM_ParseSample(benchmark::State& state) {
  auto text = fixtures::load_fixture("sample75");
  for (auto _ : state) benchmark::DoNotOptimize(codec::parse_didl(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseSample);

void BM_ParseRandom(benchmark::State& state) {
  std::vector<std::string> texts;
  std::size_t bytes = 0;
  for (const auto& d : corpus(64)) {
    texts.push_back(codec::serialize_didl(d));
    bytes += texts.back().size();
  }
  for (auto _ : state) {
    for (const auto& t : texts) benchmark::DoNotOptimize(codec::parse_didl(t));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}
BENCHMARK(BM_ParseRandom);

void BM_Serialize(benchmark::State& state) {
  auto docs = corpus(64);
  for (auto _ : state) {
    for (const auto& d : docs) benchmark::DoNotOptimize(codec::serialize_didl(d));
  }
}
BENCHMARK(BM_Serialize);

void BM_Canonical(benchmark::State& state) {
  auto docs = corpus(64);
  for (auto _ : state) {
    for (const auto& d : docs) benchmark::DoNotOptimize(codec::canonical_bytes(d));
  }
}
BENCHMARK(BM_Canonical);

void BM_ValidateShallow(benchmark::State& state) {
  auto docs = corpus(64);
  for (auto _ : state) {
    for (const auto& d : docs) benchmark::DoNotOptimize(validator::validate(d));
  }
}
BENCHMARK(BM_ValidateShallow);

void BM_ValidateDeepTable9(benchmark::State& state) {
  auto doc = fixtures::base_document();
  auto fetcher = fixtures::fixture_fetcher();
  validator::Options options;
  options.fetcher = fetcher.get();
  for (auto _ : state) benchmark::DoNotOptimize(validator::validate(doc, options));
}
BENCHMARK(BM_ValidateDeepTable9);

void BM_EmbedMaterialize(benchmark::State& state) {
  testsupport::Rng rng(1);
  auto bytes = testsupport::random_bytes(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto node = resourceio::embed_by_value(bytes, "application/octet-stream", "gzip");
    benchmark::DoNotOptimize(resourceio::materialize(node, nullptr));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_EmbedMaterialize)->Arg(4 << 10)->Arg(1 << 20);

void BM_SealVerifyDocument(benchmark::State& state) {
  auto doc = fixtures::base_document();
  auto key = integrity::SigningKey::from_seed(Bytes(32, 1), "bench");
  integrity::Keyring keyring;
  keyring.add(key);
  integrity::SealOptions options;
  options.key = &key;
  for (auto _ : state) {
    auto sealed = integrity::seal_document(doc, options);
    benchmark::DoNotOptimize(integrity::verify_document(sealed, keyring));
  }
}
BENCHMARK(BM_SealVerifyDocument);

void BM_Ingest(benchmark::State& state) {
  testsupport::TempDir dir;
  repository::StoreOptions options;
  options.durable = state.range(0) != 0;
  repository::Store store(dir.path(), options);
  repository::AssetManifest m;
  m.content_id = "info:doi/10.1045/bench";
  m.metadata_blocks.push_back({"dc", "<dc:title xmlns:dc='http://purl.org/dc/elements/1.1/'>Bench</dc:title>"});
  repository::DatastreamSpec d;
  d.mime_type = "application/octet-stream";
  testsupport::Rng rng(9);
  d.source_bytes = testsupport::random_bytes(rng, 16 << 10);
  d.embed_policy = repository::EmbedPolicy::by_value;
  m.datastreams.push_back(d);
  for (auto _ : state) benchmark::DoNotOptimize(store.ingest(m));
}
BENCHMARK(BM_Ingest)->Arg(0)->Arg(1)->ArgName("durable");

}  // namespace

BENCHMARK_MAIN();

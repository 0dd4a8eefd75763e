#include "didlkit/integrity.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <memory>

#include "didlkit/codec.hpp"
#include "didlkit/error.hpp"
#include "didlkit/namespaces.hpp"
#include "json.hpp"

namespace didlkit::integrity {

using model::Kind;
using model::Node;

std::string_view scope_name(Scope scope) {
  return scope == Scope::component ? "component" : "document";
}

std::string_view verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::ok: return "ok";
    case Verdict::digest_mismatch: return "digest-mismatch";
    case Verdict::signature_invalid: return "signature-invalid";
    case Verdict::unsealed: return "unsealed";
    case Verdict::foreign_signature: return "foreign-signature";
  }
  return {};
}

std::string signed_message(Scope scope, std::string_view digest_hex) {
  return std::string(scope_name(scope)) + ":" + std::string(digest_hex);
}

namespace {

const xml::QName kDigest{std::string(ns::kIntegrity), "Digest"};
const xml::QName kSignature{std::string(ns::kIntegrity), "Signature"};
const xml::QName kDsigSignature{std::string(ns::kDsig), "Signature"};

bool has_foreign_signature(const std::vector<xml::Node>& nodes) {
  for (const auto& n : nodes) {
    if (n.is_element() && n.element().name == kDsigSignature) return true;
  }
  return false;
}

bool is_digest_hex(std::string_view hex) {
  if (hex.size() != 64) return false;
  for (char c : hex) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

std::string trimmed(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

PkeyPtr private_key(const Bytes& seed) {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()),
              EVP_PKEY_free);
  if (!key) throw Error(Errc::key_error, "invalid Ed25519 seed");
  return key;
}

}  // namespace

std::vector<xml::Node> to_xml(const Block& block) {
  std::vector<xml::Node> out;
  xml::Element digest;
  digest.name = kDigest;
  digest.attributes.push_back({{"", "algorithm"}, block.algorithm});
  digest.attributes.push_back({{"", "scope"}, std::string(scope_name(block.scope))});
  if (block.signed_at) digest.attributes.push_back({{"", "signedAt"}, block.signed_at->to_string()});
  digest.children.emplace_back(block.digest_hex);
  out.emplace_back(std::move(digest));
  if (block.signature_hex) {
    xml::Element signature;
    signature.name = kSignature;
    signature.attributes.push_back({{"", "algorithm"}, "ed25519"});
    signature.attributes.push_back({{"", "keyId"}, block.key_id.value_or("")});
    signature.children.emplace_back(*block.signature_hex);
    out.emplace_back(std::move(signature));
  }
  return out;
}

std::optional<Block> find_block(const std::vector<xml::Node>& nodes, Scope scope) {
  std::optional<Block> block;
  for (const auto& n : nodes) {
    if (!n.is_element()) continue;
    const auto& e = n.element();
    if (e.name == kDigest && !block) {
      const auto* s = e.attribute({"", "scope"});
      if (!s || *s != scope_name(scope)) continue;
      block.emplace();
      block->scope = scope;
      if (const auto* a = e.attribute({"", "algorithm"})) block->algorithm = *a;
      if (const auto* t = e.attribute({"", "signedAt"})) block->signed_at = Timestamp::parse(*t);
      block->digest_hex = trimmed(e.text());
    } else if (e.name == kSignature && block && !block->signature_hex) {
      if (const auto* k = e.attribute({"", "keyId"})) block->key_id = *k;
      block->signature_hex = trimmed(e.text());
    }
  }
  return block;
}

// ---------------------------------------------------------------------------
// Keys

SigningKey::SigningKey(Bytes seed, std::string key_id) : seed_(std::move(seed)) {
  auto key = private_key(seed_);
  std::size_t length = 32;
  public_key_.resize(length);
  if (EVP_PKEY_get_raw_public_key(key.get(), public_key_.data(), &length) != 1) {
    throw Error(Errc::key_error, "cannot derive Ed25519 public key");
  }
  key_id_ = key_id.empty() ? sha256_hex(public_key_).substr(0, 16) : std::move(key_id);
}

SigningKey SigningKey::generate(std::string key_id) {
  Bytes seed(32);
  if (RAND_bytes(seed.data(), static_cast<int>(seed.size())) != 1) {
    throw Error(Errc::key_error, "random source unavailable");
  }
  return SigningKey(std::move(seed), std::move(key_id));
}

SigningKey SigningKey::from_seed(ByteView seed, std::string key_id) {
  if (seed.size() != 32) throw Error(Errc::key_error, "Ed25519 seed must be 32 bytes");
  return SigningKey(Bytes(seed.begin(), seed.end()), std::move(key_id));
}

SigningKey SigningKey::from_json(std::string_view json) try {
  auto j = nlohmann::json::parse(json, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("private_key")) {
    throw Error(Errc::key_error, "not a private key document");
  }
  if (j.value("algorithm", "ed25519") != "ed25519") {
    throw Error(Errc::key_error, "unsupported key algorithm");
  }
  Bytes seed;
  try {
    seed = hex_decode(j["private_key"].get<std::string>());
  } catch (const std::exception&) {
    throw Error(Errc::key_error, "private_key is not hex");
  }
  auto key = from_seed(seed, j.value("key_id", ""));
  if (j.contains("public_key") && j["public_key"].get<std::string>() != hex_encode(key.public_key_)) {
    throw Error(Errc::key_error, "public_key does not match private_key");
  }
  return key;
} catch (const nlohmann::json::exception&) {
  throw Error(Errc::key_error, "key document fields must be strings");
}

std::string SigningKey::sign_hex(std::string_view message) const {
  auto key = private_key(seed_);
  MdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  Bytes signature(64);
  std::size_t length = signature.size();
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
      EVP_DigestSign(ctx.get(), signature.data(), &length,
                     reinterpret_cast<const unsigned char*>(message.data()), message.size()) != 1) {
    throw Error(Errc::key_error, "Ed25519 signing failed");
  }
  signature.resize(length);
  return hex_encode(signature);
}

std::string SigningKey::to_json() const {
  nlohmann::ordered_json j;
  j["algorithm"] = "ed25519";
  j["key_id"] = key_id_;
  j["public_key"] = hex_encode(public_key_);
  j["private_key"] = hex_encode(seed_);
  return j.dump(2) + "\n";
}

std::string SigningKey::public_json() const {
  nlohmann::ordered_json j;
  j["algorithm"] = "ed25519";
  j["key_id"] = key_id_;
  j["public_key"] = hex_encode(public_key_);
  return j.dump(2) + "\n";
}

void Keyring::add(std::string key_id, Bytes public_key) {
  keys_[std::move(key_id)] = std::move(public_key);
}

void Keyring::add_json(std::string_view json) {
  auto j = nlohmann::json::parse(json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::key_error, "key file is not JSON");
  if (j.contains("private_key")) {
    add(SigningKey::from_json(json));
    return;
  }
  if (!j.contains("key_id") || !j.contains("public_key")) {
    throw Error(Errc::key_error, "key file lacks key_id or public_key");
  }
  try {
    add(j["key_id"].get<std::string>(), hex_decode(j["public_key"].get<std::string>()));
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::key_error, "key file fields must be strings");
  } catch (const Error&) {
    throw Error(Errc::key_error, "public_key is not hex");
  }
}

bool Keyring::verify(std::string_view key_id, std::string_view message,
                     std::string_view signature_hex) const {
  auto it = keys_.find(key_id);
  if (it == keys_.end() || it->second.size() != 32) return false;
  Bytes signature;
  try {
    signature = hex_decode(signature_hex);
  } catch (const Error&) {
    return false;
  }
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, it->second.data(),
                                          it->second.size()),
              EVP_PKEY_free);
  MdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!key || !ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(),
                          reinterpret_cast<const unsigned char*>(message.data()),
                          message.size()) == 1;
}

// ---------------------------------------------------------------------------
// Sealing

namespace {

Block make_block(std::string digest_hex, Scope scope, const SealOptions& options) {
  Block block;
  block.digest_hex = std::move(digest_hex);
  block.scope = scope;
  block.signed_at = options.signed_at;
  if (options.key) {
    block.key_id = options.key->key_id();
    block.signature_hex = options.key->sign_hex(signed_message(scope, block.digest_hex));
  }
  return block;
}

Verdict check_block(const Block& block, std::string_view actual_digest, const Keyring& keyring) {
  if (block.algorithm != "sha-256" || !is_digest_hex(block.digest_hex) ||
      block.digest_hex != actual_digest) {
    return Verdict::digest_mismatch;
  }
  if (block.signature_hex) {
    if (!block.key_id ||
        !keyring.verify(*block.key_id, signed_message(block.scope, block.digest_hex),
                        *block.signature_hex)) {
      return Verdict::signature_invalid;
    }
  }
  return Verdict::ok;
}

const std::vector<xml::Node>* statement_nodes(const Node& statement) {
  return std::get_if<model::ByValueXml>(&statement.payload.content) == nullptr
             ? nullptr
             : &std::get<model::ByValueXml>(statement.payload.content).nodes;
}

}  // namespace

bool is_integrity_descriptor(const Node& descriptor) {
  if (descriptor.kind != Kind::descriptor) return false;
  for (const auto* s : descriptor.children_of(Kind::statement)) {
    if (const auto* nodes = statement_nodes(*s)) {
      if (find_block(*nodes, Scope::component)) return true;
    }
  }
  return false;
}

Node seal_component(const Node& component, resourceio::Fetcher* fetcher,
                    const SealOptions& options) {
  if (component.kind != Kind::component) {
    throw Error(Errc::invalid_argument, "seal_component needs a Component");
  }
  if (component.children_of(Kind::resource).empty()) {
    throw Error(Errc::invalid_argument, "component binds no resource");
  }
  auto report = resourceio::check_component_equivalence(component, model::NodePath{}, fetcher,
                                                        options.materialize);
  if (!report.equivalent) {
    throw Error(Errc::equivalence_violation, "component resources are not bit-equivalent");
  }
  return seal_component_digest(component, report.digests.front().sha256_hex, options);
}

Node seal_component_digest(const Node& component, std::string digest_hex,
                           const SealOptions& options) {
  auto block = make_block(std::move(digest_hex), Scope::component, options);
  Node sealed = component;
  std::erase_if(sealed.children, [](const Node& n) { return is_integrity_descriptor(n); });
  auto descriptor = model::make_descriptor(
      {model::make_statement_xml(std::string(ns::kXmlStatementMime), to_xml(block))});
  std::size_t position = 0;
  for (std::size_t i = 0; i < sealed.children.size(); ++i) {
    if (sealed.children[i].kind == Kind::descriptor) position = i + 1;
  }
  sealed.children.insert(sealed.children.begin() + static_cast<std::ptrdiff_t>(position),
                         std::move(descriptor));
  return sealed;
}

Verdict verify_component(const Node& component, resourceio::Fetcher* fetcher,
                         const Keyring& keyring,
                         const resourceio::MaterializeOptions& materialize) {
  std::optional<Block> block;
  bool foreign = false;
  for (const auto* d : component.children_of(Kind::descriptor)) {
    for (const auto* s : d->children_of(Kind::statement)) {
      const auto* nodes = statement_nodes(*s);
      if (!nodes) continue;
      if (!block) block = find_block(*nodes, Scope::component);
      foreign = foreign || has_foreign_signature(*nodes);
    }
  }
  if (!block) return foreign ? Verdict::foreign_signature : Verdict::unsealed;
  auto resources = component.children_of(Kind::resource);
  if (resources.empty()) return Verdict::digest_mismatch;
  for (const auto* resource : resources) {
    Bytes bytes;
    try {
      bytes = resourceio::materialize(*resource, fetcher, materialize);
    } catch (const Error& e) {
      if (e.code() == Errc::decode_error) return Verdict::digest_mismatch;
      throw;
    }
    auto verdict = check_block(*block, sha256_hex(bytes), keyring);
    if (verdict != Verdict::ok) return verdict;
  }
  return Verdict::ok;
}

model::DidlDocument strip_document_block(const model::DidlDocument& doc) {
  model::DidlDocument copy = doc;
  std::erase_if(copy.didl_info, [](const xml::Element& e) {
    return e.name == kDigest || e.name == kSignature;
  });
  return copy;
}

std::string document_digest(const model::DidlDocument& doc) {
  codec::SerializeOptions options;
  options.reject_invalid_payloads = false;
  return sha256_hex(as_bytes(codec::canonical_bytes(strip_document_block(doc), options)));
}

model::DidlDocument seal_document(const model::DidlDocument& doc, const SealOptions& options) {
  auto sealed = strip_document_block(doc);
  codec::SerializeOptions serialize;
  auto digest = sha256_hex(as_bytes(codec::canonical_bytes(sealed, serialize)));
  auto block = make_block(digest, Scope::document, options);
  for (auto& n : to_xml(block)) sealed.didl_info.push_back(std::move(n.element()));
  return sealed;
}

Verdict verify_document(const model::DidlDocument& doc, const Keyring& keyring) {
  std::vector<xml::Node> info;
  for (const auto& e : doc.didl_info) info.emplace_back(e);
  auto block = find_block(info, Scope::document);
  if (!block) return has_foreign_signature(info) ? Verdict::foreign_signature : Verdict::unsealed;
  return check_block(*block, document_digest(doc), keyring);
}

}  // namespace didlkit::integrity

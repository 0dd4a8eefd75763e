#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "didlkit/bytes.hpp"
#include "didlkit/model.hpp"
#include "didlkit/resourceio.hpp"
#include "didlkit/timestamp.hpp"

// Digest and signature blocks for components and whole documents.
//
//   <dik:Digest algorithm="sha-256" scope="component" signedAt="...">hex</dik:Digest>
//   <dik:Signature algorithm="ed25519" keyId="...">hex</dik:Signature>
//
// The signature covers the ASCII message "<scope>:<digest hex>".
namespace didlkit::integrity {

enum class Scope { component, document };
std::string_view scope_name(Scope scope);

enum class Verdict { ok, digest_mismatch, signature_invalid, unsealed, foreign_signature };
std::string_view verdict_name(Verdict verdict);

struct Block {
  std::string algorithm = "sha-256";
  std::string digest_hex;
  Scope scope = Scope::component;
  std::optional<Timestamp> signed_at;
  std::optional<std::string> key_id;
  std::optional<std::string> signature_hex;
};

std::vector<xml::Node> to_xml(const Block& block);
// First Digest element (with its Signature sibling) among `nodes`.
std::optional<Block> find_block(const std::vector<xml::Node>& nodes, Scope scope);
std::string signed_message(Scope scope, std::string_view digest_hex);

// Ed25519 signing key held as its 32-byte seed.
class SigningKey {
 public:
  static SigningKey generate(std::string key_id = {});
  static SigningKey from_seed(ByteView seed, std::string key_id = {});
  // {"algorithm": "ed25519", "key_id", "public_key", "private_key"} with hex values.
  static SigningKey from_json(std::string_view json);

  const std::string& key_id() const { return key_id_; }
  const Bytes& public_key() const { return public_key_; }
  std::string sign_hex(std::string_view message) const;
  std::string to_json() const;
  std::string public_json() const;

 private:
  SigningKey(Bytes seed, std::string key_id);
  Bytes seed_;
  Bytes public_key_;
  std::string key_id_;
};

class Keyring {
 public:
  void add(std::string key_id, Bytes public_key);
  void add(const SigningKey& key) { add(key.key_id(), key.public_key()); }
  // Accepts either key JSON form; the private part is ignored.
  void add_json(std::string_view json);
  bool verify(std::string_view key_id, std::string_view message, std::string_view signature_hex) const;
  bool empty() const { return keys_.empty(); }

 private:
  std::map<std::string, Bytes, std::less<>> keys_;
};

struct SealOptions {
  const SigningKey* key = nullptr;
  std::optional<Timestamp> signed_at;
  resourceio::MaterializeOptions materialize;
};

// Component with its integrity Descriptor (re)placed after the last existing
// Descriptor. Throws equivalence_violation when resources differ.
model::Node seal_component(const model::Node& component, resourceio::Fetcher* fetcher,
                           const SealOptions& options = {});
// As seal_component, with the resource digest supplied by the caller.
model::Node seal_component_digest(const model::Node& component, std::string digest_hex,
                                  const SealOptions& options = {});
Verdict verify_component(const model::Node& component, resourceio::Fetcher* fetcher,
                         const Keyring& keyring,
                         const resourceio::MaterializeOptions& materialize = {});

// Digest over canonical_bytes of the document without its DIDLInfo block.
std::string document_digest(const model::DidlDocument& doc);
model::DidlDocument seal_document(const model::DidlDocument& doc, const SealOptions& options = {});
Verdict verify_document(const model::DidlDocument& doc, const Keyring& keyring);

// Copy without the document-scope Digest/Signature elements of DIDLInfo.
model::DidlDocument strip_document_block(const model::DidlDocument& doc);
bool is_integrity_descriptor(const model::Node& descriptor);

}  // namespace didlkit::integrity

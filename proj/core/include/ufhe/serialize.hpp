#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ufhe/bgv.hpp"

namespace ufhe::io {

// Versioned little-endian dumps: "UFHE1", u8 kind, u64 m, u64 p, u32 primes, then the object.
enum class Kind : std::uint8_t { ciphertext = 1, secret_key = 2, public_key = 3, ksw_key = 4, galois_keys = 5 };

std::vector<std::uint8_t> save(const bgv::Ciphertext& ct, const bgv::ContextPtr& ctx);
std::vector<std::uint8_t> save(const bgv::SecretKey& sk, const bgv::ContextPtr& ctx);
std::vector<std::uint8_t> save(const bgv::PublicKey& pk, const bgv::ContextPtr& ctx);
std::vector<std::uint8_t> save(const bgv::KswKey& key, const bgv::ContextPtr& ctx);
std::vector<std::uint8_t> save(const bgv::GaloisKeys& keys, const bgv::ContextPtr& ctx);

// All loaders throw BadFormat on a malformed buffer or a context mismatch.
bgv::Ciphertext load_ciphertext(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx);
bgv::SecretKey load_secret_key(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx);
bgv::PublicKey load_public_key(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx);
bgv::KswKey load_ksw_key(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx);
bgv::GaloisKeys load_galois_keys(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx);

void write_file(const std::string& path, const std::vector<std::uint8_t>& buf);
std::vector<std::uint8_t> read_file(const std::string& path);

}  // namespace ufhe::io

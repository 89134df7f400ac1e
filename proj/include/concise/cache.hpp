#pragma once

#include "concise/gateway.hpp"

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

namespace concise::gateway {

/// One stored completion, as persisted on disk.
struct CacheRecord {
  std::string key;
  CompletionRequest request;
  std::string text;
  std::string provider_meta;
  std::optional<TokenUsage> usage;
  std::int64_t latency_ms = 0;
  std::string created_at;  // ISO-8601 UTC
};

// Content-addressed store: records/<k0k1>/<key>.jsonl holds a single JSON
// line per key, and index.jsonl lists every stored key. Records are written
// to a temporary file and renamed into place, so readers never see a
// partial record and need no lock.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<CacheRecord> lookup(const std::string& key) const;
  void store(const CacheRecord& record);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path record_path(const std::string& key) const;

 private:
  std::filesystem::path dir_;
  std::mutex index_mu_;
};

std::string utc_timestamp();

}  // namespace concise::gateway

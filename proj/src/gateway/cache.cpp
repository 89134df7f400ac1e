#include "concise/cache.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

namespace concise::gateway {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const CacheRecord& r) {
  json request = {
      {"model", r.request.model},
      {"prompt", r.request.prompt},
      {"temperature", r.request.temperature},
      {"max_output", r.request.max_output},
      {"seed_hint", r.request.seed_hint ? json(*r.request.seed_hint) : json()},
      {"template_version", r.request.template_version},
  };
  json usage = r.usage ? json{{"input", r.usage->input}, {"output", r.usage->output}} : json();
  return {
      {"key", r.key},
      {"request", std::move(request)},
      {"response", {{"text", r.text}, {"provider_meta", r.provider_meta}, {"usage", usage}}},
      {"latency_ms", r.latency_ms},
      {"created_at", r.created_at},
      {"template_version", r.request.template_version},
  };
}

CacheRecord from_json(const json& j) {
  CacheRecord r;
  r.key = j.at("key").get<std::string>();
  const auto& req = j.at("request");
  r.request.model = req.at("model").get<std::string>();
  r.request.prompt = req.at("prompt").get<std::string>();
  r.request.temperature = req.at("temperature").get<double>();
  r.request.max_output = req.at("max_output").get<int>();
  if (!req.at("seed_hint").is_null()) r.request.seed_hint = req.at("seed_hint").get<std::int64_t>();
  r.request.template_version = req.at("template_version").get<std::string>();
  const auto& resp = j.at("response");
  r.text = resp.at("text").get<std::string>();
  r.provider_meta = resp.at("provider_meta").get<std::string>();
  if (!resp.at("usage").is_null()) {
    r.usage = TokenUsage{resp["usage"].at("input").get<std::int64_t>(),
                         resp["usage"].at("output").get<std::int64_t>()};
  }
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  r.created_at = j.value("created_at", std::string());
  return r;
}

std::string unique_suffix() {
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream ss;
  ss << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.' << counter++;
  return ss.str();
}

}  // namespace

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "records", ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

fs::path ResponseCache::record_path(const std::string& key) const {
  return dir_ / "records" / key.substr(0, 2) / (key + ".jsonl");
}

std::optional<CacheRecord> ResponseCache::lookup(const std::string& key) const {
  std::ifstream in(record_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  try {
    CacheRecord record = from_json(json::parse(line));
    // A record stored under a different key is treated as a miss.
    if (record.key != key || cache_key(record.request) != key) return std::nullopt;
    return record;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void ResponseCache::store(const CacheRecord& record) {
  const fs::path target = record_path(record.key);
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw IoError("cannot create " + target.parent_path().string() + ": " + ec.message());

  const fs::path tmp = target.parent_path() / (record.key + ".tmp." + unique_suffix());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache record " + tmp.string());
    out << to_json(record).dump() << '\n';
    if (!out.flush()) throw IoError("cannot write cache record " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot publish cache record " + target.string());
  }

  const json index_entry = {{"key", record.key},
                            {"model", record.request.model},
                            {"template_version", record.request.template_version},
                            {"created_at", record.created_at}};
  std::lock_guard lock(index_mu_);
  std::ofstream index(dir_ / "index.jsonl", std::ios::binary | std::ios::app);
  if (!index) throw IoError("cannot append to cache index in " + dir_.string());
  index << index_entry.dump() << '\n';
}

}  // namespace concise::gateway

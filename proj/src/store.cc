/*
 * Copyright 2026 The FairAudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fairaudit/store.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "fairaudit/audit.h"
#include "fairaudit/audit_json.h"
#include "fairaudit/error.h"

namespace fairaudit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kSlashEscape = "%2F";

std::string EncodeModelId(const std::string& model_id) {
  std::string out;
  for (char c : model_id) {
    if (c == '/') {
      out += kSlashEscape;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string DecodeModelId(const std::string& dir_name) {
  std::string out;
  for (size_t i = 0; i < dir_name.size(); ++i) {
    if (dir_name.compare(i, kSlashEscape.size(), kSlashEscape) == 0) {
      out.push_back('/');
      i += kSlashEscape.size() - 1;
    } else {
      out.push_back(dir_name[i]);
    }
  }
  return out;
}

// "<digits>.json" -> version, otherwise nullopt.
std::optional<int> ParseVersionFile(const fs::path& path) {
  if (path.extension() != ".json") return std::nullopt;
  const std::string stem = path.stem().string();
  if (stem.empty() || stem.size() > 9 ||
      !std::all_of(stem.begin(), stem.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoi(stem);
}

std::string ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json EntryToJson(const LeaderboardEntry& e) {
  json doc = {{"model_id", e.model_id},
              {"faas", nullptr},
              {"faas_status", FaasStatusName(e.faas.status)},
              {"wer", e.wer},
              {"overall_score", e.overall_score},
              {"tier", TierLabel(e.tier)},
              {"created_at", e.created_at},
              {"version", e.version}};
  if (e.faas.finite()) doc["faas"] = e.faas.value;
  return doc;
}

LeaderboardEntry EntryFromJson(const json& doc) {
  LeaderboardEntry e;
  e.model_id = doc.at("model_id").get<std::string>();
  e.faas.status = ParseFaasStatus(doc.at("faas_status").get<std::string>());
  if (e.faas.finite()) {
    e.faas.value = doc.at("faas").get<double>();
  } else {
    e.faas.value = e.faas.status == FaasStatus::kPerfectAccuracy
                       ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
  }
  e.wer = doc.at("wer").get<double>();
  e.overall_score = doc.at("overall_score").get<double>();
  e.tier = ParseTier(doc.at("tier").get<std::string>());
  e.created_at = doc.at("created_at").get<std::string>();
  e.version = doc.at("version").get<int>();
  return e;
}

// "name@3" -> ("name", 3); a plain id -> (id, nullopt). '@' never occurs in
// a valid model id.
std::pair<std::string, std::optional<int>> SplitModelRef(const std::string& ref) {
  const auto at = ref.rfind('@');
  if (at == std::string::npos) return {ref, std::nullopt};
  const std::string digits = ref.substr(at + 1);
  if (digits.empty() || digits.size() > 9 ||
      !std::all_of(digits.begin(), digits.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::kNotFound, "bad version suffix in '" + ref + "'");
  }
  return {ref.substr(0, at), std::stoi(digits)};
}

}  // namespace

bool RanksBefore(const LeaderboardEntry& a, const LeaderboardEntry& b) {
  if (a.faas.value != b.faas.value) return a.faas.value > b.faas.value;
  if (a.wer != b.wer) return a.wer < b.wer;
  return a.model_id < b.model_id;
}

LeaderboardEntry EntryFor(const AuditResult& result, int version) {
  LeaderboardEntry e;
  e.model_id = result.model_id;
  e.faas = result.faas;
  e.wer = result.corpus_wer;
  e.overall_score = result.overall_score;
  e.tier = result.tier;
  e.created_at = result.created_at;
  e.version = version;
  return e;
}

json LeaderboardToJson(const std::vector<LeaderboardEntry>& entries) {
  json doc = json::array();
  for (const auto& e : entries) doc.push_back(EntryToJson(e));
  return doc;
}

std::vector<LeaderboardEntry> ParseLeaderboard(std::string_view index_bytes) {
  std::vector<LeaderboardEntry> entries;
  try {
    for (const auto& e : json::parse(index_bytes)) {
      entries.push_back(EntryFromJson(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoFailure, std::string("corrupt index: ") + e.what());
  }
  std::sort(entries.begin(), entries.end(), RanksBefore);
  return entries;
}

std::string EtagFor(std::string_view bytes) {
  uint64_t hash = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "\"%016llx\"",
                static_cast<unsigned long long>(hash));
  return buf;
}

AuditStore::RwLock::RwLock() {
  pthread_rwlockattr_t attr;
  pthread_rwlockattr_init(&attr);
  pthread_rwlockattr_setkind_np(&attr, PTHREAD_RWLOCK_PREFER_WRITER_NONRECURSIVE_NP);
  pthread_rwlock_init(&lock_, &attr);
  pthread_rwlockattr_destroy(&attr);
}

AuditStore::RwLock::~RwLock() { pthread_rwlock_destroy(&lock_); }
void AuditStore::RwLock::lock() { pthread_rwlock_wrlock(&lock_); }
void AuditStore::RwLock::unlock() { pthread_rwlock_unlock(&lock_); }
void AuditStore::RwLock::lock_shared() { pthread_rwlock_rdlock(&lock_); }
void AuditStore::RwLock::unlock_shared() { pthread_rwlock_unlock(&lock_); }

AuditStore::AuditStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "audits", ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot create store at " + root_.string() + ": " + ec.message());
  }
}

fs::path AuditStore::ModelDir(const std::string& model_id) const {
  return root_ / "audits" / EncodeModelId(model_id);
}

void AuditStore::SetBeforeRenameHookForTesting(
    std::function<void(const fs::path&)> hook) {
  std::unique_lock lock(mutex_);
  before_rename_hook_ = std::move(hook);
}

void AuditStore::WriteAtomically(const fs::path& target, const std::string& bytes) {
  fs::path temp = target;
  temp += ".tmp";
  try {
    {
      std::ofstream out(temp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + temp.string());
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      out.flush();
      if (!out) throw Error(ErrorCode::kIoFailure, "short write to " + temp.string());
    }
    if (before_rename_hook_) before_rename_hook_(temp);
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
      throw Error(ErrorCode::kIoFailure,
                  "cannot rename " + temp.string() + ": " + ec.message());
    }
  } catch (const Error&) {
    std::error_code ignored;
    fs::remove(temp, ignored);
    throw;
  } catch (const std::exception& e) {
    std::error_code ignored;
    fs::remove(temp, ignored);
    throw Error(ErrorCode::kIoFailure, std::string("write interrupted: ") + e.what());
  }
}

std::vector<int> AuditStore::VersionsLocked(const std::string& model_id) const {
  std::vector<int> versions;
  const fs::path dir = ModelDir(model_id);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return versions;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (auto v = ParseVersionFile(entry.path()); v && entry.is_regular_file()) {
      versions.push_back(*v);
    }
  }
  std::sort(versions.begin(), versions.end());
  return versions;
}

std::vector<int> AuditStore::ListVersions(const std::string& model_id) const {
  std::shared_lock lock(mutex_);
  return VersionsLocked(model_id);
}

StoredAudit AuditStore::Save(const AuditResult& result) {
  if (!IsValidModelId(result.model_id)) {
    throw Error(ErrorCode::kInvalidModelId,
                "model_id '" + result.model_id + "' is not storable");
  }
  const std::string bytes = SerializeAudit(result);

  std::unique_lock lock(mutex_);
  const fs::path dir = ModelDir(result.model_id);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot create " + dir.string() + ": " + ec.message());
  }
  const std::vector<int> versions = VersionsLocked(result.model_id);
  const int version = versions.empty() ? 1 : versions.back() + 1;
  const fs::path target = dir / (std::to_string(version) + ".json");
  WriteAtomically(target, bytes);
  try {
    WriteIndexLocked();
  } catch (const Error&) {
    // Keep document and index consistent: without a new index the new
    // version must not exist either.
    fs::remove(target, ec);
    throw;
  }
  return {result.model_id, version, target};
}

std::vector<LeaderboardEntry> AuditStore::ScanEntriesLocked() const {
  std::vector<LeaderboardEntry> entries;
  std::error_code ec;
  const fs::path audits = root_ / "audits";
  if (!fs::is_directory(audits, ec)) return entries;
  for (const auto& dir : fs::directory_iterator(audits, ec)) {
    if (!dir.is_directory()) continue;
    const std::string model_id = DecodeModelId(dir.path().filename().string());
    const std::vector<int> versions = VersionsLocked(model_id);
    if (versions.empty()) continue;
    const AuditResult audit = ParseAudit(
        ReadBytes(ModelDir(model_id) / (std::to_string(versions.back()) + ".json")));
    entries.push_back(EntryFor(audit, versions.back()));
  }
  std::sort(entries.begin(), entries.end(), RanksBefore);
  return entries;
}

void AuditStore::WriteIndexLocked() {
  WriteAtomically(root_ / "index.json",
                  LeaderboardToJson(ScanEntriesLocked()).dump(2) + "\n");
}

void AuditStore::RebuildIndex() {
  std::unique_lock lock(mutex_);
  WriteIndexLocked();
}

std::string AuditStore::IndexBytes() const {
  std::shared_lock lock(mutex_);
  const fs::path index = root_ / "index.json";
  std::error_code ec;
  if (!fs::exists(index, ec)) return "[]\n";
  return ReadBytes(index);
}

std::string AuditStore::IndexEtag() const { return EtagFor(IndexBytes()); }

std::vector<LeaderboardEntry> AuditStore::ListLeaderboard() const {
  std::shared_lock lock(mutex_);
  const fs::path index = root_ / "index.json";
  std::error_code ec;
  if (!fs::exists(index, ec)) return ScanEntriesLocked();
  return ParseLeaderboard(ReadBytes(index));
}

std::string AuditStore::ReadDocumentLocked(const std::string& model_ref) const {
  auto [model_id, version] = SplitModelRef(model_ref);
  if (!IsValidModelId(model_id)) {
    throw Error(ErrorCode::kNotFound, "no audit for '" + model_ref + "'");
  }
  const std::vector<int> versions = VersionsLocked(model_id);
  if (versions.empty()) {
    throw Error(ErrorCode::kNotFound, "no audit for '" + model_id + "'");
  }
  const int wanted = version.value_or(versions.back());
  if (!std::binary_search(versions.begin(), versions.end(), wanted)) {
    throw Error(ErrorCode::kNotFound, "no version " + std::to_string(wanted) +
                                          " for '" + model_id + "'");
  }
  return ReadBytes(ModelDir(model_id) / (std::to_string(wanted) + ".json"));
}

std::string AuditStore::GetAuditJson(const std::string& model_ref) const {
  std::shared_lock lock(mutex_);
  return ReadDocumentLocked(model_ref);
}

AuditResult AuditStore::GetAudit(const std::string& model_ref) const {
  return ParseAudit(GetAuditJson(model_ref));
}

}  // namespace fairaudit

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

// File-backed audit store.
//
//   <root>/audits/<model_dir>/<version>.json   one document per audit
//   <root>/index.json                          derived leaderboard
//
// <model_dir> is the model id with '/' written as "%2F". Versions count
// from 1; the highest version is current and older ones are the archive.
// Every file is written to a temporary name and renamed into place. The
// index is always regenerable from the documents.
//
// Thread-safe within one process: saves take an exclusive lock, reads a
// shared one, and waiting saves block new readers. Not safe for several
// processes sharing a directory.

#ifndef FAIRAUDIT_STORE_H_
#define FAIRAUDIT_STORE_H_

#include <pthread.h>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fairaudit/fairness.h"

namespace fairaudit {

struct LeaderboardEntry {
  std::string model_id;
  FaasScore faas;
  double wer = 0.0;
  double overall_score = 0.0;
  Tier tier = Tier::kSeverelyBiased;
  std::string created_at;
  int version = 0;
};

// FAAS descending (perfect-accuracy sentinel first, zero-fairness last),
// then lower WER, then model_id.
bool RanksBefore(const LeaderboardEntry& a, const LeaderboardEntry& b);

LeaderboardEntry EntryFor(const AuditResult& result, int version);

struct StoredAudit {
  std::string model_id;
  int version = 0;
  std::filesystem::path path;
};

class AuditStore {
 public:
  explicit AuditStore(std::filesystem::path root);

  // Persists `result` as the next version of its model and refreshes the
  // index. Throws kInvalidModelId or kIoFailure; on failure the previous
  // state is untouched.
  StoredAudit Save(const AuditResult& result);

  std::vector<LeaderboardEntry> ListLeaderboard() const;

  // `model_ref` is "<model_id>" for the current version or
  // "<model_id>@<version>" for a specific one. Throws kNotFound.
  AuditResult GetAudit(const std::string& model_ref) const;
  std::string GetAuditJson(const std::string& model_ref) const;

  // Ascending; empty when the model is unknown.
  std::vector<int> ListVersions(const std::string& model_id) const;

  // Rewrites index.json from the audit documents.
  void RebuildIndex();

  // Raw bytes of index.json ("[]\n" when absent).
  std::string IndexBytes() const;
  // Strong validator for the current index contents.
  std::string IndexEtag() const;

  const std::filesystem::path& root() const { return root_; }

  // Called after a temporary file is fully written and before it is
  // renamed into place. Used to simulate crashes.
  void SetBeforeRenameHookForTesting(
      std::function<void(const std::filesystem::path& temp)> hook);

 private:
  // Reader-writer lock that favours writers (SharedMutex requirements).
  class RwLock {
   public:
    RwLock();
    ~RwLock();
    RwLock(const RwLock&) = delete;
    RwLock& operator=(const RwLock&) = delete;
    void lock();
    void unlock();
    void lock_shared();
    void unlock_shared();

   private:
    pthread_rwlock_t lock_;
  };

  std::filesystem::path ModelDir(const std::string& model_id) const;
  std::vector<int> VersionsLocked(const std::string& model_id) const;
  std::string ReadDocumentLocked(const std::string& model_ref) const;
  std::vector<LeaderboardEntry> ScanEntriesLocked() const;
  void WriteAtomically(const std::filesystem::path& target,
                       const std::string& bytes);
  void WriteIndexLocked();

  std::filesystem::path root_;
  mutable RwLock mutex_;
  std::function<void(const std::filesystem::path&)> before_rename_hook_;
};

nlohmann::json LeaderboardToJson(const std::vector<LeaderboardEntry>& entries);

// Parses index.json bytes back into ranked entries. Throws kIoFailure.
std::vector<LeaderboardEntry> ParseLeaderboard(std::string_view index_bytes);

// Quoted FNV-1a digest of `bytes`, usable as an HTTP entity tag.
std::string EtagFor(std::string_view bytes);

}  // namespace fairaudit

#endif  // FAIRAUDIT_STORE_H_

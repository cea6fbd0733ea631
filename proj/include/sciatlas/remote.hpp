#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sciatlas {

/// Client for an open citation API answering
///   GET <endpoint>?pmids=<id>,<id>,...
/// with {"data": [{"pmid": ..., "references": [...], "cited_by": [...]}]}.
struct FetchOptions {
  std::string endpoint;          // http(s)://host[:port]/path
  double rate_limit = 3.0;       // requests per second
  std::size_t batch_size = 500;
  int max_retries = 5;
  double backoff_seconds = 1.0;  // doubled after every failed attempt
  int timeout_seconds = 30;
  /// Completed batches; a rerun with the same ids skips them. Defaults to
  /// <output>.journal.
  std::filesystem::path journal;
};

struct FetchReport {
  std::size_t batches = 0;
  std::size_t resumed = 0;  // batches skipped thanks to the journal
  std::size_t requests = 0;
  std::size_t retries = 0;
  std::size_t edges = 0;
  std::size_t malformed = 0;  // response entries that could not be used
};

/// Appends `citing<TAB>cited` rows to output, one batch at a time.
FetchReport fetch_citations_remote(const std::vector<std::string>& ids, const FetchOptions& options,
                                   const std::filesystem::path& output, std::ostream* log = nullptr);

}  // namespace sciatlas

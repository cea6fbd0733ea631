#include "sciatlas/remote.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "sciatlas/util.hpp"

namespace sciatlas {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error("endpoint '" + url + "' needs an http:// or https:// prefix");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::optional<std::string> as_id(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  return std::nullopt;
}

std::string journal_header(const std::vector<std::string>& ids, std::size_t batch) {
  std::uint64_t h = fnv1a("");
  for (const auto& id : ids) h = fnv1a(id + "\n", h);
  return "# ids " + hex64(h) + " batch " + std::to_string(batch);
}

}  // namespace

FetchReport fetch_citations_remote(const std::vector<std::string>& ids, const FetchOptions& options,
                                   const std::filesystem::path& output, std::ostream* log) {
  FetchReport report;
  if (options.batch_size == 0) throw Error("batch size must be positive");
  if (ids.empty()) return report;
  if (!(options.rate_limit > 0)) throw Error("rate limit must be positive");
  const auto ep = split_endpoint(options.endpoint);
  const auto journal = options.journal.empty() ? std::filesystem::path(output.string() + ".journal") : options.journal;

  const auto header = journal_header(ids, options.batch_size);
  std::set<std::size_t> done;
  {
    std::ifstream in(journal);
    std::string line;
    if (in && std::getline(in, line) && line == header) {
      while (std::getline(in, line)) {
        if (line.starts_with("done ")) done.insert(std::stoul(line.substr(5)));
      }
    }
  }
  if (done.empty()) {
    std::ofstream(output, std::ios::trunc);
    std::ofstream j(journal, std::ios::trunc);
    j << header << '\n';
  }
  std::ofstream out(output, std::ios::app | std::ios::binary);
  std::ofstream jout(journal, std::ios::app);
  if (!out || !jout) throw Error("cannot write " + output.string() + " or its journal");

  httplib::Client client(ep.origin);
  client.set_connection_timeout(options.timeout_seconds);
  client.set_read_timeout(options.timeout_seconds);
  const auto interval = std::chrono::duration<double>(1.0 / options.rate_limit);
  auto last = std::chrono::steady_clock::now() - std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);

  report.batches = (ids.size() + options.batch_size - 1) / options.batch_size;
  for (std::size_t b = 0; b < report.batches; ++b) {
    if (done.contains(b)) {
      ++report.resumed;
      continue;
    }
    const auto lo = b * options.batch_size;
    const auto hi = std::min(ids.size(), lo + options.batch_size);
    std::string list;
    for (auto i = lo; i < hi; ++i) {
      if (i > lo) list += ',';
      list += ids[i];
    }
    const auto target = ep.path + (ep.path.find('?') == std::string::npos ? "?" : "&") + "pmids=" + list;

    std::string body;
    for (int attempt = 0;; ++attempt) {
      std::this_thread::sleep_until(last + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval));
      last = std::chrono::steady_clock::now();
      ++report.requests;
      auto res = client.Get(target);
      double wait = options.backoff_seconds * static_cast<double>(1u << std::min(attempt, 16));
      std::string why;
      if (!res) {
        why = "connection failed (" + httplib::to_string(res.error()) + ")";
      } else if (res->status == 200) {
        body = res->body;
        break;
      } else if (res->status == 429 || res->status >= 500) {
        why = "HTTP " + std::to_string(res->status);
        if (res->has_header("Retry-After")) {
          try {
            wait = std::max(wait, std::stod(res->get_header_value("Retry-After")));
          } catch (const std::exception&) {
          }
        }
      } else {
        throw Error("batch " + std::to_string(b + 1) + ": HTTP " + std::to_string(res->status) + " from " +
                    options.endpoint);
      }
      if (attempt >= options.max_retries) {
        throw Error("batch " + std::to_string(b + 1) + ": giving up after " + std::to_string(attempt + 1) +
                    " attempts, last error " + why);
      }
      ++report.retries;
      if (log) *log << "[fetch] batch " << b + 1 << ": " << why << ", retrying in " << wait << " s\n";
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      ++report.malformed;
      if (log) *log << "[fetch] batch " << b + 1 << ": response is not JSON, skipped\n";
      jout << "done " << b << '\n';
      continue;
    }
    if (!doc.is_object() || !doc.contains("data") || !doc["data"].is_array()) {
      ++report.malformed;
      if (log) *log << "[fetch] batch " << b + 1 << ": response has no data array, skipped\n";
      jout << "done " << b << '\n';
      continue;
    }
    for (const auto& entry : doc["data"]) {
      const auto id = entry.is_object() && entry.contains("pmid") ? as_id(entry["pmid"]) : std::nullopt;
      if (!id) {
        ++report.malformed;
        continue;
      }
      for (const char* key : {"references", "cited_by"}) {
        if (!entry.contains(key) || entry[key].is_null()) continue;
        if (!entry[key].is_array()) {
          ++report.malformed;
          continue;
        }
        for (const auto& other : entry[key]) {
          const auto o = as_id(other);
          if (!o) {
            ++report.malformed;
            continue;
          }
          if (std::string_view(key) == "references") {
            out << *id << '\t' << *o << '\n';
          } else {
            out << *o << '\t' << *id << '\n';
          }
          ++report.edges;
        }
      }
    }
    out.flush();
    if (!out) throw Error("write failed: " + output.string());
    jout << "done " << b << '\n';
    jout.flush();
    if (log) *log << "[fetch] batch " << b + 1 << "/" << report.batches << " done\n";
  }
  return report;
}

}  // namespace sciatlas

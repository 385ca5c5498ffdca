#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "screening/corpus.hpp"

namespace screening {

struct FetchRecord {
  std::string id;
  std::string title;
  /// Empty when the record has no abstract.
  std::string abstract;
  /// Verbatim PublicationType strings.
  std::vector<std::string> pt_tags;
  std::chrono::system_clock::time_point fetched_at;

  bool operator==(const FetchRecord&) const = default;
};

struct FetchFailure {
  std::string id;
  std::string reason;
};

struct FetchResult {
  std::vector<FetchRecord> records;
  std::vector<FetchFailure> failures;
};

struct HttpResponse {
  long status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws FetchError on transport failure.
  virtual HttpResponse get(const std::string& url) = 0;
};

/// libcurl-backed transport.
class CurlTransport : public HttpTransport {
 public:
  explicit CurlTransport(std::chrono::seconds timeout = std::chrono::seconds(60));
  HttpResponse get(const std::string& url) override;

 private:
  std::chrono::seconds timeout_;
};

struct LiveMode {
  std::string base_url = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/efetch.fcgi";
  std::optional<std::string> api_key;
  std::size_t batch_size = 200;
  /// Without an API key the service allows 3 requests per second.
  double requests_per_second = 3.0;
};

struct FixtureMode {
  /// Holds one <PMID>.xml response per id.
  std::filesystem::path dir;
};

using FetchMode = std::variant<LiveMode, FixtureMode>;

/// 1 to 9 decimal digits.
bool valid_pmid(std::string_view id) noexcept;

/// Parses an efetch PubmedArticleSet document. fetched_at is left at the
/// epoch. Throws FetchError on malformed XML.
std::vector<FetchRecord> parse_pubmed_xml(std::string_view xml);

/// Fetches records in live or fixture mode. Rate limiting is shared by all
/// callers of one client; fetch() may be called from several threads.
class PubmedClient {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  explicit PubmedClient(FetchMode mode, std::shared_ptr<HttpTransport> transport = nullptr, Clock clock = {});

  /// One record per resolvable id in request order; the rest are failures.
  /// Throws FetchError if `ids` is empty.
  FetchResult fetch(std::span<const std::string> ids);

  std::string efetch_url(std::span<const std::string> ids) const;

 private:
  void wait_for_slot();
  FetchResult fetch_fixtures(std::span<const std::string> ids);
  FetchResult fetch_live(std::span<const std::string> ids);

  FetchMode mode_;
  std::shared_ptr<HttpTransport> transport_;
  Clock clock_;
  std::mutex rate_mutex_;
  std::optional<std::chrono::steady_clock::time_point> last_request_;
};

/// Reads PMIDs, one per line; blank lines and '#' comments are skipped.
std::vector<std::string> read_id_list(const std::filesystem::path& path);

/// JSON lines {"id": ..., "format": ..., "hhc": ..., "purpose": ..., "rigor": ...};
/// missing criteria are Unrated.
std::map<std::string, CriterionRatings> load_ratings_sidecar(const std::filesystem::path& path,
                                                             const StopRule& stop_rule);

struct ConversionResult {
  std::vector<Article> articles;
  std::vector<FetchFailure> rejected;
};

/// Articles carry sidecar ratings, or all-Unrated ratings for ids the sidecar
/// lacks. Records with empty titles are rejected. Throws CorpusError if the
/// sidecar names an id that is neither among the records nor in `ignore`.
ConversionResult records_to_articles(std::span<const FetchRecord> records,
                                     const std::optional<std::map<std::string, CriterionRatings>>& sidecar,
                                     std::span<const std::string> ignore = {});

}  // namespace screening

#include "screening/pubmed.hpp"

#include <curl/curl.h>

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

namespace screening {

namespace {

namespace ptree = boost::property_tree;

// Text of an element in document order, including nested inline markup.
void collect_text(const ptree::ptree& node, std::string& out) {
  out += node.data();
  for (const auto& [key, child] : node) {
    if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
    collect_text(child, out);
  }
}

std::string normalize_space(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

std::string element_text(const ptree::ptree& node) {
  std::string raw;
  collect_text(node, raw);
  return normalize_space(raw);
}

FetchRecord parse_article(const ptree::ptree& pubmed_article) {
  FetchRecord r;
  const auto& citation = pubmed_article.get_child("MedlineCitation");
  r.id = element_text(citation.get_child("PMID"));
  const auto& article = citation.get_child("Article");
  if (auto title = article.get_child_optional("ArticleTitle")) r.title = element_text(*title);
  if (auto abstract = article.get_child_optional("Abstract")) {
    std::vector<std::string> parts;
    for (const auto& [key, child] : *abstract)
      if (key == "AbstractText") {
        auto text = element_text(child);
        if (!text.empty()) parts.push_back(std::move(text));
      }
    for (std::size_t i = 0; i < parts.size(); ++i) r.abstract += (i ? " " : "") + parts[i];
  }
  if (auto types = article.get_child_optional("PublicationTypeList"))
    for (const auto& [key, child] : *types)
      if (key == "PublicationType") r.pt_tags.push_back(element_text(child));
  return r;
}

std::once_flag curl_init_flag;

std::size_t write_body(char* data, std::size_t size, std::size_t count, void* user) {
  static_cast<std::string*>(user)->append(data, size * count);
  return size * count;
}

}  // namespace

bool valid_pmid(std::string_view id) noexcept {
  return !id.empty() && id.size() <= 9 &&
         std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<FetchRecord> parse_pubmed_xml(std::string_view xml) {
  ptree::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    ptree::read_xml(in, tree, ptree::xml_parser::no_concat_text);
  } catch (const ptree::xml_parser_error& e) {
    throw FetchError(std::string("malformed XML: ") + e.what());
  }
  auto set = tree.get_child_optional("PubmedArticleSet");
  if (!set) throw FetchError("malformed XML: no PubmedArticleSet element");
  std::vector<FetchRecord> out;
  for (const auto& [key, child] : *set) {
    if (key != "PubmedArticle") continue;
    try {
      out.push_back(parse_article(child));
    } catch (const ptree::ptree_error& e) {
      throw FetchError(std::string("malformed PubmedArticle: ") + e.what());
    }
  }
  return out;
}

CurlTransport::CurlTransport(std::chrono::seconds timeout) : timeout_(timeout) {
  std::call_once(curl_init_flag, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

HttpResponse CurlTransport::get(const std::string& url) {
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> handle(curl_easy_init(), &curl_easy_cleanup);
  if (!handle) throw FetchError("curl_easy_init failed");
  HttpResponse response;
  curl_easy_setopt(handle.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(handle.get(), CURLOPT_WRITEFUNCTION, &write_body);
  curl_easy_setopt(handle.get(), CURLOPT_WRITEDATA, &response.body);
  curl_easy_setopt(handle.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(handle.get(), CURLOPT_TIMEOUT, static_cast<long>(timeout_.count()));
  curl_easy_setopt(handle.get(), CURLOPT_NOSIGNAL, 1L);
  const CURLcode rc = curl_easy_perform(handle.get());
  if (rc != CURLE_OK) throw FetchError(std::string("network failure: ") + curl_easy_strerror(rc));
  curl_easy_getinfo(handle.get(), CURLINFO_RESPONSE_CODE, &response.status);
  return response;
}

PubmedClient::PubmedClient(FetchMode mode, std::shared_ptr<HttpTransport> transport, Clock clock)
    : mode_(std::move(mode)), transport_(std::move(transport)), clock_(std::move(clock)) {
  if (!clock_) clock_ = [] { return std::chrono::system_clock::now(); };
  if (const auto* live = std::get_if<LiveMode>(&mode_)) {
    if (live->batch_size == 0) throw ConfigError("batch size must be positive");
    if (!(live->requests_per_second > 0)) throw ConfigError("request rate must be positive");
    if (!transport_) transport_ = std::make_shared<CurlTransport>();
  }
}

FetchResult PubmedClient::fetch(std::span<const std::string> ids) {
  if (ids.empty()) throw FetchError("no ids to fetch");
  return std::holds_alternative<FixtureMode>(mode_) ? fetch_fixtures(ids) : fetch_live(ids);
}

std::string PubmedClient::efetch_url(std::span<const std::string> ids) const {
  const auto* live = std::get_if<LiveMode>(&mode_);
  if (!live) throw ConfigError("efetch URL requires live mode");
  std::string url = live->base_url + "?db=pubmed&retmode=xml&id=";
  for (std::size_t i = 0; i < ids.size(); ++i) url += (i ? "," : "") + ids[i];
  if (live->api_key) url += "&api_key=" + *live->api_key;
  return url;
}

void PubmedClient::wait_for_slot() {
  const auto& live = std::get<LiveMode>(mode_);
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / live.requests_per_second));
  std::lock_guard lock(rate_mutex_);
  const auto now = std::chrono::steady_clock::now();
  if (last_request_ && now < *last_request_ + interval) std::this_thread::sleep_until(*last_request_ + interval);
  last_request_ = std::chrono::steady_clock::now();
}

FetchResult PubmedClient::fetch_fixtures(std::span<const std::string> ids) {
  const auto& dir = std::get<FixtureMode>(mode_).dir;
  FetchResult result;
  for (const auto& id : ids) {
    if (!valid_pmid(id)) {
      result.failures.push_back({id, "invalid PMID"});
      continue;
    }
    const auto path = dir / (id + ".xml");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      result.failures.push_back({id, "no fixture " + path.string()});
      continue;
    }
    std::ostringstream body;
    body << in.rdbuf();
    try {
      auto records = parse_pubmed_xml(body.str());
      auto it = std::find_if(records.begin(), records.end(), [&](const FetchRecord& r) { return r.id == id; });
      if (it == records.end()) {
        result.failures.push_back({id, "id absent from response"});
        continue;
      }
      it->fetched_at = clock_();
      result.records.push_back(std::move(*it));
    } catch (const FetchError& e) {
      result.failures.push_back({id, e.what()});
    }
  }
  return result;
}

FetchResult PubmedClient::fetch_live(std::span<const std::string> ids) {
  const auto& live = std::get<LiveMode>(mode_);
  FetchResult result;
  std::vector<std::string> valid;
  for (const auto& id : ids) {
    if (valid_pmid(id)) valid.push_back(id);
    else result.failures.push_back({id, "invalid PMID"});
  }
  for (std::size_t start = 0; start < valid.size(); start += live.batch_size) {
    const std::span<const std::string> batch(valid.data() + start, std::min(live.batch_size, valid.size() - start));
    std::vector<FetchRecord> records;
    std::string batch_error;
    try {
      wait_for_slot();
      const auto response = transport_->get(efetch_url(batch));
      if (response.status != 200) throw FetchError("HTTP status " + std::to_string(response.status));
      records = parse_pubmed_xml(response.body);
    } catch (const FetchError& e) {
      batch_error = e.what();
    }
    const auto now = clock_();
    for (const auto& id : batch) {
      if (!batch_error.empty()) {
        result.failures.push_back({id, batch_error});
        continue;
      }
      auto it = std::find_if(records.begin(), records.end(), [&](const FetchRecord& r) { return r.id == id; });
      if (it == records.end()) {
        result.failures.push_back({id, "id absent from response"});
        continue;
      }
      it->fetched_at = now;
      result.records.push_back(*it);
    }
  }
  return result;
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = normalize_space(line);
    if (text.empty() || text.front() == '#') continue;
    ids.push_back(text);
  }
  return ids;
}

std::map<std::string, CriterionRatings> load_ratings_sidecar(const std::filesystem::path& path,
                                                             const StopRule& stop_rule) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::map<std::string, CriterionRatings> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_space(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusError(where + "malformed JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) throw CorpusError(where + "missing string id");
    CriterionRatings r;
    for (auto c : kCriteria) {
      const std::string key(criterion_name(c));
      if (!j.contains(key)) continue;
      if (!j[key].is_string()) throw CorpusError(where + "field \"" + key + "\" is not a string");
      const auto code = parse_value(c, j[key].get<std::string>());
      if (!code) throw CorpusError(where + "unknown " + key + " value \"" + j[key].get<std::string>() + "\"");
      r.set_code(c, *code);
    }
    if (auto why = stop_rule.violation(r)) throw CorpusError(where + "stop-early violation: " + *why);
    const auto id = j["id"].get<std::string>();
    if (!out.emplace(id, r).second) throw CorpusError(where + "duplicate id " + id);
  }
  return out;
}

ConversionResult records_to_articles(std::span<const FetchRecord> records,
                                     const std::optional<std::map<std::string, CriterionRatings>>& sidecar,
                                     std::span<const std::string> ignore) {
  if (sidecar) {
    std::set<std::string> known(ignore.begin(), ignore.end());
    for (const auto& r : records) known.insert(r.id);
    for (const auto& [id, ratings] : *sidecar)
      if (!known.count(id)) throw CorpusError("sidecar id " + id + " matches no fetched record");
  }
  ConversionResult out;
  for (const auto& r : records) {
    if (r.title.empty()) {
      out.rejected.push_back({r.id, "empty title"});
      continue;
    }
    Article a{r.id, r.title, r.abstract, r.pt_tags, {}};
    if (sidecar)
      if (auto it = sidecar->find(r.id); it != sidecar->end()) a.ratings = it->second;
    out.articles.push_back(std::move(a));
  }
  return out;
}

}  // namespace screening

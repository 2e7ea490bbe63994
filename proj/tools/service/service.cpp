#include "service.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <deque>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

// Eigen must precede httplib: <resolv.h> defines a macro that clashes with Eigen identifiers.
#include "survcontour/contour.hpp"
#include "survcontour/error.hpp"
#include "survcontour/json.hpp"
#include "survcontour/metrics.hpp"
#include "survcontour/nonparametric.hpp"
#include "survcontour/registry.hpp"

#include <httplib.h>
#include <openssl/evp.h>

namespace survcontour::service {

namespace fs = std::filesystem;

namespace {

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& message, std::vector<Violation> violations = {})
      : std::runtime_error(message), status(status), violations(std::move(violations)) {}
  int status;
  std::vector<Violation> violations;
};

enum class JobState { queued, running, done, failed };

const char* to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "failed";
}

JobState parse_state(const std::string& s) {
  if (s == "queued") return JobState::queued;
  if (s == "running") return JobState::running;
  if (s == "done") return JobState::done;
  return JobState::failed;
}

struct DatasetRecord {
  std::string id;
  std::shared_ptr<const SurvivalDataset> data;
  IngestReport report;
};

struct JobRecord {
  std::string id;
  std::string dataset_id;
  ModelSpec spec;
  JobState state = JobState::queued;
  std::string created;
  std::string finished;
  std::string error;
  std::shared_ptr<const SurvivalModel> model;
};

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

Json error_body(int status, const std::string& message, const std::vector<Violation>& violations) {
  Json v = Json::array();
  for (const auto& item : violations) v.push_back({{"field", item.field}, {"message", item.message}});
  return Json{{"error", {{"status", status}, {"message", message}, {"violations", std::move(v)}}}};
}

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::vector<Violation>& violations = {}) {
  send_json(res, status, dump(error_body(status, message, violations)));
}

template <class Handler>
void guarded(httplib::Response& res, Handler&& handler) {
  try {
    handler();
  } catch (const HttpError& e) {
    send_error(res, e.status, e.what(), e.violations);
  } catch (const SpecViolationError& e) {
    send_error(res, 400, e.what(), e.violations());
  } catch (const Json::exception& e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const UnsupportedError& e) {
    send_error(res, 422, e.what());
  } catch (const NonconvergenceError& e) {
    send_error(res, 422, e.what());
  } catch (const ValidationError& e) {
    send_error(res, 422, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

Json parse_json(const std::string& text, const std::string& field) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    throw HttpError(400, "malformed JSON", {{field, "is not valid JSON"}});
  }
}

IngestOptions decode_ingest_options(const Json& j) {
  IngestOptions o;
  if (j.is_null()) return o;
  std::vector<Violation> v;
  if (!j.is_object()) throw HttpError(400, "invalid ingestion options", {{"options", "must be an object"}});
  for (const auto& [key, value] : j.items()) {
    if (key == "strict") {
      if (value.is_boolean()) o.strict = value.get<bool>();
      else v.push_back({"options.strict", "must be a boolean"});
    } else if (key == "categorical") {
      if (value.is_array() && std::all_of(value.begin(), value.end(), [](const Json& e) { return e.is_string(); })) {
        o.categorical = value.get<std::vector<std::string>>();
      } else {
        v.push_back({"options.categorical", "must be an array of column names"});
      }
    } else {
      v.push_back({"options." + key, "unknown field"});
    }
  }
  if (!v.empty()) throw HttpError(400, "invalid ingestion options", std::move(v));
  return o;
}

Json encode_ingest_options(const IngestOptions& o) { return Json{{"strict", o.strict}, {"categorical", o.categorical}}; }

struct Query {
  SurfaceOptions surface;
  CovariateValues overrides;
  std::optional<double> tau;
  std::string key;  // canonical form for caching
};

Query parse_query(const httplib::Request& req) {
  Query q;
  std::vector<Violation> v;
  auto integer = [&](const char* name, std::size_t& target, std::size_t min) {
    if (!req.has_param(name)) return;
    const auto text = req.get_param_value(name);
    const auto value = parse_number(text);
    if (!value || *value != std::floor(*value) || *value < static_cast<double>(min) || *value > 1e6) {
      v.push_back({name, "must be an integer >= " + std::to_string(min)});
      return;
    }
    target = static_cast<std::size_t>(*value);
  };
  integer("n_pred", q.surface.n_pred, 2);
  integer("n_time", q.surface.n_time, 2);
  integer("bins", q.surface.bins, 1);
  if (req.has_param("ci")) {
    const auto text = req.get_param_value("ci");
    if (text == "true" || text == "1") q.surface.ci = true;
    else if (text == "false" || text == "0") q.surface.ci = false;
    else v.push_back({"ci", "must be true or false"});
  }
  if (req.has_param("tau")) {
    const auto value = parse_number(req.get_param_value("tau"));
    if (!value || *value <= 0.0) v.push_back({"tau", "must be a positive number"});
    else q.tau = *value;
  }
  if (req.has_param("adjusters")) {
    try {
      q.overrides = decode_overrides(Json::parse(req.get_param_value("adjusters")));
    } catch (const Json::parse_error&) {
      v.push_back({"adjusters", "must be a JSON object"});
    } catch (const SpecViolationError& e) {
      v.insert(v.end(), e.violations().begin(), e.violations().end());
    }
  }
  if (!v.empty()) throw HttpError(400, "invalid query parameters", std::move(v));

  Json key{{"n_pred", q.surface.n_pred}, {"n_time", q.surface.n_time}, {"bins", q.surface.bins},
           {"ci", q.surface.ci}, {"tau", q.tau ? Json(*q.tau) : Json(nullptr)}};
  Json overrides = Json::object();
  for (const auto& [name, value] : q.overrides) {
    overrides[name] = std::holds_alternative<double>(value) ? Json(std::get<double>(value))
                                                            : Json(std::get<std::string>(value));
  }
  key["adjusters"] = std::move(overrides);
  q.key = dump(key);
  return q;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

Config Config::from_env() {
  Config c;
  auto env_int = [](const char* name, long fallback) {
    const char* value = std::getenv(name);
    if (!value || !*value) return fallback;
    char* end = nullptr;
    const long parsed = std::strtol(value, &end, 10);
    if (*end != '\0' || parsed < 0) throw std::runtime_error(std::string("invalid ") + name + " '" + value + "'");
    return parsed;
  };
  c.port = static_cast<int>(env_int("PORT", c.port));
  c.workers = static_cast<int>(std::max(1L, env_int("WORKERS", c.workers)));
  c.max_upload_mb = static_cast<std::size_t>(env_int("MAX_UPLOAD_MB", static_cast<long>(c.max_upload_mb)));
  if (const char* dir = std::getenv("DATA_DIR"); dir && *dir) c.data_dir = dir;
  return c;
}

struct Service::Impl {
  Config config;
  httplib::Server server;
  std::thread listener;
  int bound_port = -1;

  std::mutex mutex;  // guards datasets, jobs, queue, cache and mutable job fields
  std::condition_variable work_ready;
  std::map<std::string, DatasetRecord> datasets;
  std::map<std::string, JobRecord> jobs;
  std::deque<std::string> queue;
  std::map<std::string, std::string> cache;
  bool stopping = false;
  std::vector<std::thread> workers;
  std::mutex refit_mutex;

  explicit Impl(Config c) : config(std::move(c)) {
    fs::create_directories(config.data_dir / "datasets");
    fs::create_directories(config.data_dir / "jobs");
    load();
    routes();
    for (int w = 0; w < std::max(1, config.workers); ++w) workers.emplace_back([this] { work(); });
  }

  ~Impl() {
    {
      std::lock_guard lock(mutex);
      stopping = true;
    }
    work_ready.notify_all();
    for (auto& w : workers) w.join();
  }

  // ---- persistence -------------------------------------------------------------------------

  fs::path dataset_dir(const std::string& id) const { return config.data_dir / "datasets" / id; }
  fs::path job_path(const std::string& id) const { return config.data_dir / "jobs" / (id + ".json"); }

  static Json encode_job(const JobRecord& job) {
    return Json{{"id", job.id},           {"dataset_id", job.dataset_id}, {"spec", encode(job.spec)},
                {"state", to_string(job.state)}, {"created", job.created}, {"finished", job.finished},
                {"error", job.error}};
  }

  void persist_job(const JobRecord& job) { write_file_atomic(job_path(job.id), dump(encode_job(job))); }

  void load() {
    for (const auto& entry : fs::directory_iterator(config.data_dir / "datasets")) {
      if (!entry.is_directory()) continue;
      try {
        const Json meta = Json::parse(read_file(entry.path() / "meta.json"));
        const std::string csv = read_file(entry.path() / "data.csv");
        auto result = ingest_csv(csv, decode_roles(meta.at("roles")), decode_ingest_options(meta.at("options")));
        const std::string id = entry.path().filename().string();
        datasets[id] = {id, std::make_shared<const SurvivalDataset>(std::move(result.data)), result.report};
      } catch (const std::exception&) {
        // unreadable entries are skipped
      }
    }
    for (const auto& entry : fs::directory_iterator(config.data_dir / "jobs")) {
      if (entry.path().extension() != ".json") continue;
      try {
        const Json j = Json::parse(read_file(entry.path()));
        JobRecord job;
        job.id = j.at("id").get<std::string>();
        job.dataset_id = j.at("dataset_id").get<std::string>();
        job.spec = decode_spec(j.at("spec"));
        job.state = parse_state(j.at("state").get<std::string>());
        job.created = j.at("created").get<std::string>();
        job.finished = j.at("finished").get<std::string>();
        job.error = j.at("error").get<std::string>();
        if (!datasets.contains(job.dataset_id)) continue;
        // Interrupted work restarts from scratch.
        if (job.state == JobState::running) job.state = JobState::queued;
        if (job.state == JobState::queued) queue.push_back(job.id);
        jobs[job.id] = std::move(job);
      } catch (const std::exception&) {
      }
    }
  }

  // ---- jobs -------------------------------------------------------------------------------

  void work() {
    for (;;) {
      std::string id;
      ModelSpec spec;
      std::shared_ptr<const SurvivalDataset> data;
      {
        std::unique_lock lock(mutex);
        work_ready.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        id = queue.front();
        queue.pop_front();
        JobRecord& job = jobs.at(id);
        job.state = JobState::running;
        spec = job.spec;
        data = datasets.at(job.dataset_id).data;
        persist_job(job);
      }
      std::shared_ptr<const SurvivalModel> model;
      std::string error;
      try {
        model = fit(spec, *data);
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(mutex);
      JobRecord& job = jobs.at(id);
      job.finished = now_utc();
      if (model) {
        job.model = std::move(model);
        job.state = JobState::done;
      } else {
        job.state = JobState::failed;
        job.error = error;
      }
      persist_job(job);
    }
  }

  struct DoneJob {
    std::shared_ptr<const SurvivalModel> model;
    std::shared_ptr<const SurvivalDataset> data;
    ModelSpec spec;
  };

  DoneJob done_job(const std::string& id) {
    std::shared_ptr<const SurvivalDataset> data;
    ModelSpec spec;
    {
      std::lock_guard lock(mutex);
      auto it = jobs.find(id);
      if (it == jobs.end()) throw HttpError(404, "unknown model '" + id + "'");
      const JobRecord& job = it->second;
      if (job.state != JobState::done) {
        throw HttpError(409, std::string("model is not ready (state: ") + to_string(job.state) + ")");
      }
      data = datasets.at(job.dataset_id).data;
      spec = job.spec;
      if (job.model) return {job.model, data, spec};
    }
    // Restored after a restart: fits are deterministic, so refitting reproduces the model.
    std::lock_guard refit_lock(refit_mutex);
    {
      std::lock_guard lock(mutex);
      if (const auto& m = jobs.at(id).model) return {m, data, spec};
    }
    std::shared_ptr<const SurvivalModel> model = fit(spec, *data);
    std::lock_guard lock(mutex);
    jobs.at(id).model = model;
    return {model, data, spec};
  }

  // ---- payloads ----------------------------------------------------------------------------

  template <class Make>
  std::string cached(const std::string& key, Make&& make) {
    {
      std::lock_guard lock(mutex);
      if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    std::string body = make();
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(body)).first->second;
  }

  static SurvivalDataset relabel(const DoneJob& job) { return with_roles(*job.data, job.spec.roles); }

  static AdjusterProfile profile_for(const DoneJob& job, const SurvivalDataset& data, const Query& q) {
    try {
      return apply_overrides(default_adjuster_profile(data, job.spec.roles), q.overrides, data);
    } catch (const ValidationError& e) {
      throw HttpError(400, "invalid adjuster override", {{"adjusters", e.what()}});
    }
  }

  void routes() {
    server.set_payload_max_length(config.max_upload_mb * 1024 * 1024);
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, R"({"status":"ok"})");
    });

    server.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { post_dataset(req, res); });
    });
    server.Get(R"(/datasets/([^/]+)/summary)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::shared_ptr<const SurvivalDataset> data;
        {
          std::lock_guard lock(mutex);
          auto it = datasets.find(req.matches[1]);
          if (it == datasets.end()) throw HttpError(404, "unknown dataset '" + std::string(req.matches[1]) + "'");
          data = it->second.data;
        }
        Json j = encode(summarize(*data));
        j["dataset_id"] = std::string(req.matches[1]);
        j["roles"] = encode(data->roles());
        send_json(res, 200, dump(j));
      });
    });
    server.Post("/recommend", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { post_recommend(req, res); });
    });
    server.Post("/models", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { post_model(req, res); });
    });
    server.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::lock_guard lock(mutex);
        auto it = jobs.find(req.matches[1]);
        if (it == jobs.end()) throw HttpError(404, "unknown job '" + std::string(req.matches[1]) + "'");
        send_json(res, 200, dump(encode_job(it->second)));
      });
    });

    auto model_route = [this](const char* name, auto make) {
      server.Get(std::string(R"(/models/([^/]+)/)") + name,
                 [this, name, make](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                     const std::string id = req.matches[1];
                     const Query q = parse_query(req);
                     const DoneJob job = done_job(id);
                     send_json(res, 200, cached(id + "/" + name + "?" + q.key, [&] { return make(job, q); }));
                   });
                 });
    };
    model_route("contour", [](const DoneJob& job, const Query& q) {
      const SurvivalDataset data = relabel(job);
      SurfaceOptions o = q.surface;
      o.bootstrap = bootstrap_options(job.spec);
      return dump(encode(build_surface(*job.model, data, profile_for(job, data, q), o)));
    });
    model_route("quantile-curves", [](const DoneJob& job, const Query& q) {
      const SurvivalDataset data = relabel(job);
      SurfaceOptions o = q.surface;
      o.bootstrap = bootstrap_options(job.spec);
      return dump(encode(build_quantile_curves(*job.model, data, profile_for(job, data, q), o)));
    });
    model_route("surface3d", [](const DoneJob& job, const Query& q) {
      const SurvivalDataset data = relabel(job);
      SurfaceOptions o = q.surface;
      o.bootstrap = bootstrap_options(job.spec);
      return dump(encode(to_surface3d(build_surface(*job.model, data, profile_for(job, data, q), o))));
    });
    model_route("metrics", [](const DoneJob& job, const Query& q) {
      MetricsOptions o;
      o.tau = q.tau;
      return dump(encode(evaluate_model(*job.model, relabel(job), o)));
    });
    model_route("km-split", [](const DoneJob& job, const Query&) {
      const SurvivalDataset data = relabel(job);
      return dump(encode(median_split_km(data, job.spec.roles)));
    });
  }

  void post_dataset(const httplib::Request& req, httplib::Response& res) {
    std::string csv;
    Json roles_json;
    Json options_json;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) throw HttpError(400, "missing CSV", {{"file", "is required"}});
      if (!req.has_file("roles")) throw HttpError(400, "missing roles", {{"roles", "is required"}});
      csv = req.get_file_value("file").content;
      roles_json = parse_json(req.get_file_value("roles").content, "roles");
      if (req.has_file("options")) options_json = parse_json(req.get_file_value("options").content, "options");
    } else {
      const Json body = parse_json(req.body, "body");
      if (!body.is_object()) throw HttpError(400, "invalid body", {{"body", "must be a JSON object"}});
      if (!body.contains("csv") || !body.at("csv").is_string()) {
        throw HttpError(400, "missing CSV", {{"csv", "is required and must be a string"}});
      }
      if (!body.contains("roles")) throw HttpError(400, "missing roles", {{"roles", "is required"}});
      csv = body.at("csv").get<std::string>();
      roles_json = body.at("roles");
      if (body.contains("options")) options_json = body.at("options");
    }
    const ColumnRoles roles = decode_roles(roles_json);
    const IngestOptions options = decode_ingest_options(options_json);
    auto result = ingest_csv(csv, roles, options);

    const std::string id =
        sha256_hex(dump(encode(roles)) + "\n" + dump(encode_ingest_options(options)) + "\n" + csv).substr(0, 32);
    {
      std::lock_guard lock(mutex);
      if (!datasets.contains(id)) {
        const fs::path dir = dataset_dir(id);
        write_file_atomic(dir / "data.csv", csv);
        write_file_atomic(dir / "meta.json",
                          dump(Json{{"roles", encode(roles)}, {"options", encode_ingest_options(options)}}));
        datasets[id] = {id, std::make_shared<const SurvivalDataset>(std::move(result.data)), result.report};
      }
    }
    send_json(res, 201, dump(Json{{"dataset_id", id}, {"report", encode(result.report)}}));
  }

  void post_recommend(const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_json(req.body, "body");
    if (!body.is_object()) throw HttpError(400, "invalid body", {{"body", "must be a JSON object"}});
    SelectionAnswers answers;
    std::vector<Violation> v;
    const Json answers_json = body.value("answers", Json::object());
    for (const auto& [key, flag] : std::initializer_list<std::pair<const char*, bool*>>{
             {"competing_risks", &answers.competing_risks},
             {"wants_inference", &answers.wants_inference},
             {"wants_flexibility", &answers.wants_flexibility},
             {"has_strata", &answers.has_strata}}) {
      if (!answers_json.contains(key)) continue;
      if (answers_json.at(key).is_boolean()) *flag = answers_json.at(key).get<bool>();
      else v.push_back({std::string("answers.") + key, "must be a boolean"});
    }
    if (!v.empty()) throw HttpError(400, "invalid answers", std::move(v));
    DatasetSummary summary;
    if (body.contains("dataset_id")) {
      std::lock_guard lock(mutex);
      auto it = datasets.find(body.at("dataset_id").get<std::string>());
      if (it == datasets.end()) throw HttpError(404, "unknown dataset");
      summary = summarize(*it->second.data);
    }
    send_json(res, 200, dump(encode(recommend(summary, answers))));
  }

  void post_model(const httplib::Request& req, httplib::Response& res) {
    Json body = parse_json(req.body, "body");
    if (!body.is_object()) throw HttpError(400, "invalid body", {{"body", "must be a JSON object"}});
    if (!body.contains("dataset_id") || !body.at("dataset_id").is_string()) {
      throw HttpError(400, "missing dataset_id", {{"dataset_id", "is required and must be a string"}});
    }
    const std::string dataset_id = body.at("dataset_id").get<std::string>();
    std::shared_ptr<const SurvivalDataset> data;
    {
      std::lock_guard lock(mutex);
      auto it = datasets.find(dataset_id);
      if (it == datasets.end()) throw HttpError(404, "unknown dataset '" + dataset_id + "'");
      data = it->second.data;
    }
    if (!body.contains("roles")) body["roles"] = encode(data->roles());
    const ModelSpec spec = decode_spec(body);
    if (auto violations = validate(spec, *data); !violations.empty()) {
      throw HttpError(422, "model specification does not fit the data", std::move(violations));
    }

    const std::string id = sha256_hex(dataset_id + "\n" + dump(encode(spec))).substr(0, 32);
    std::string state;
    {
      std::lock_guard lock(mutex);
      auto it = jobs.find(id);
      if (it == jobs.end()) {
        JobRecord job;
        job.id = id;
        job.dataset_id = dataset_id;
        job.spec = spec;
        job.created = now_utc();
        persist_job(job);
        jobs[id] = std::move(job);
        queue.push_back(id);
        work_ready.notify_one();
        it = jobs.find(id);
      }
      state = to_string(it->second.state);
    }
    send_json(res, 202, dump(Json{{"job_id", id}, {"model_id", id}, {"state", state}}));
  }
};

Service::Service(Config config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::start() {
  Impl& s = *impl_;
  s.bound_port = s.config.port == 0 ? s.server.bind_to_any_port(s.config.host)
                                    : (s.server.bind_to_port(s.config.host, s.config.port) ? s.config.port : -1);
  if (s.bound_port < 0) throw std::runtime_error("cannot bind " + s.config.host + ":" + std::to_string(s.config.port));
  s.listener = std::thread([&s] { s.server.listen_after_bind(); });
  s.server.wait_until_ready();
  return s.bound_port;
}

void Service::run() {
  Impl& s = *impl_;
  if (!s.server.listen(s.config.host, s.config.port)) {
    throw std::runtime_error("cannot listen on " + s.config.host + ":" + std::to_string(s.config.port));
  }
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

}  // namespace survcontour::service

#include "gpdiag/service.hpp"

#include "gpdiag/errors.hpp"
#include "gpdiag/parallel.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace gpdiag {

namespace {

namespace fs = std::filesystem;

struct RequestError {
  int status;
  std::string message;
  std::string kind;
};

[[noreturn]] void reject(int status, const std::string& message, const std::string& kind = "request") {
  throw RequestError{status, message, kind};
}

int status_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::schema:
    case ErrorKind::parse:
    case ErrorKind::validation:
    case ErrorKind::parameter:
    case ErrorKind::dimension: return 400;
    default: return 422;
  }
}

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string url_decode(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
               std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) parts.push_back(url_decode(part));
  }
  return parts;
}

std::map<std::string, std::string> parse_query(const std::string& q) {
  std::map<std::string, std::string> out;
  std::stringstream ss(q);
  std::string kv;
  while (std::getline(ss, kv, '&')) {
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      out[url_decode(kv)] = "";
    } else {
      out[url_decode(kv.substr(0, eq))] = url_decode(kv.substr(eq + 1));
    }
  }
  return out;
}

std::vector<std::string> covariates_of(const FitResult& f) {
  std::vector<std::string> out;
  for (const auto& n : f.beta.names) {
    if (n != kInterceptName) out.push_back(n);
  }
  return out;
}

const std::vector<std::string> kSynthetic{"ns_linear", "ns_quadratic", "ew_linear", "ew_quadratic"};

struct FitJob {
  std::string status = "running";  // running, done, failed
  json error;
  int history_index = -1;
};

struct SessionState {
  Dataset raw;
  std::optional<GriddedData> grid;
  std::shared_ptr<const SpectralBasis> basis;
  std::vector<std::string> design;
  std::vector<json> history;
  std::optional<FitResult> fit;
  std::string created;
  std::string updated;

  const Dataset& data() const { return grid ? grid->data : raw; }
};

struct Session {
  std::string id;
  std::mutex m;
  std::shared_ptr<const SessionState> state;
  bool fitting = false;
  int next_token = 1;
  std::map<std::string, FitJob> jobs;

  std::shared_ptr<const SessionState> snapshot() {
    std::lock_guard lock(m);
    return state;
  }
};

struct Params {
  std::vector<std::string> path;
  std::map<std::string, std::string> query;
  json body;
};

}  // namespace

struct Service::Impl {
  using Handler = HttpResponse (Impl::*)(const Params&);
  struct Route {
    std::string method;
    std::string pattern;
    std::string summary;
    std::vector<int> statuses;
    Handler handler;
    bool mutating;
  };

  ServiceConfig config;
  fs::path log_path;
  std::mutex map_m;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  int next_session = 1;
  bool replaying = false;
  std::mutex log_m;

  // Worker pool for fits.
  std::mutex pool_m;
  std::condition_variable pool_cv, idle_cv;
  std::deque<std::function<void()>> queue;
  int active = 0;
  bool stopping = false;
  std::vector<std::thread> workers;

  std::vector<Route> routes;

  explicit Impl(ServiceConfig c) : config(std::move(c)) {
    routes = {
        {"POST", "/sessions", "Create a session from CSV text and a column schema", {201, 400}, &Impl::create_session, true},
        {"GET", "/sessions/{id}", "Session summary", {200, 404}, &Impl::get_session, false},
        {"POST", "/sessions/{id}/grid", "IDW-smooth the session data onto a lattice", {200, 400, 404, 409, 422}, &Impl::post_grid, true},
        {"POST", "/sessions/{id}/fit", "Start a fit; returns a poll token", {202, 400, 404, 409, 422}, &Impl::post_fit, true},
        {"GET", "/sessions/{id}/fit/{token}", "Poll a fit", {200, 404, 422}, &Impl::get_fit, false},
        {"GET", "/sessions/{id}/diagnostics", "v_j^2 series of the latest fit", {200, 404, 409, 422}, &Impl::get_diagnostics, false},
        {"GET", "/sessions/{id}/avp", "Added variable plot (query: candidate, domain)", {200, 400, 404, 409, 422}, &Impl::get_avp, false},
        {"POST", "/sessions/{id}/covariates", "Add or remove model covariates, including synthetic trends", {200, 400, 404, 422}, &Impl::post_covariates, true},
        {"GET", "/sessions/{id}/history", "Fit history", {200, 404}, &Impl::get_history, false},
        {"GET", "/openapi.json", "This description", {200}, &Impl::get_openapi, false},
    };
    const int n = config.threads > 0 ? config.threads : thread_cap();
    for (int i = 0; i < n; ++i) workers.emplace_back([this] { work(); });
    fs::create_directories(config.data_dir);
    log_path = fs::path(config.data_dir) / "events.jsonl";
    replay();
  }

  ~Impl() {
    {
      std::lock_guard lock(pool_m);
      stopping = true;
    }
    pool_cv.notify_all();
    for (auto& t : workers) t.join();
  }

  void work() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(pool_m);
        pool_cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (queue.empty()) return;
        job = std::move(queue.front());
        queue.pop_front();
        ++active;
      }
      job();
      {
        std::lock_guard lock(pool_m);
        --active;
      }
      idle_cv.notify_all();
    }
  }

  void submit(std::function<void()> job) {
    {
      std::lock_guard lock(pool_m);
      queue.push_back(std::move(job));
    }
    pool_cv.notify_one();
  }

  void wait_idle() {
    std::unique_lock lock(pool_m);
    idle_cv.wait(lock, [&] { return queue.empty() && active == 0; });
  }

  void replay() {
    std::ifstream in(log_path);
    if (!in) return;
    replaying = true;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json e;
      try {
        e = json::parse(line);
      } catch (const json::exception&) {
        // A torn final line from a crash is dropped.
        continue;
      }
      dispatch(e.value("method", ""), e.value("target", ""), e.value("body", json::object()).dump());
      wait_idle();
    }
    replaying = false;
  }

  void record(const std::string& method, const std::string& target, const json& body) {
    if (replaying) return;
    std::lock_guard lock(log_m);
    std::ofstream out(log_path, std::ios::app);
    out << json{{"method", method}, {"target", target}, {"body", body}}.dump() << '\n';
    out.flush();
  }

  static bool match(const std::string& pattern, const std::vector<std::string>& parts) {
    const auto pat = split_path(pattern);
    if (pat.size() != parts.size()) return false;
    for (std::size_t i = 0; i < pat.size(); ++i) {
      if (pat[i].front() == '{') continue;
      if (pat[i] != parts[i]) return false;
    }
    return true;
  }

  HttpResponse dispatch(const std::string& method, const std::string& target, const std::string& body_text) {
    const auto qpos = target.find('?');
    Params p;
    p.path = split_path(target.substr(0, qpos));
    if (qpos != std::string::npos) p.query = parse_query(target.substr(qpos + 1));
    try {
      const Route* route = nullptr;
      bool path_known = false;
      for (const auto& r : routes) {
        if (!match(r.pattern, p.path)) continue;
        path_known = true;
        if (r.method == method) {
          route = &r;
          break;
        }
      }
      if (!route) reject(path_known ? 405 : 404, "no route for " + method + " " + target);
      if (body_text.empty()) {
        p.body = json::object();
      } else {
        try {
          p.body = json::parse(body_text);
        } catch (const json::exception& e) {
          reject(400, std::string("request body is not valid JSON: ") + e.what(), "schema");
        }
      }
      HttpResponse r = (this->*(route->handler))(p);
      if (route->mutating && r.status < 400) record(method, target, p.body);
      return r;
    } catch (const RequestError& e) {
      return {e.status, json{{"error", e.message}, {"kind", e.kind}}};
    } catch (const Error& e) {
      return {status_for(e.kind()), json{{"error", e.what()}, {"kind", to_string(e.kind())}}};
    } catch (const json::exception& e) {
      return {400, json{{"error", e.what()}, {"kind", "schema"}}};
    }
  }

  std::shared_ptr<Session> session(const Params& p) {
    std::lock_guard lock(map_m);
    const auto it = sessions.find(p.path.at(1));
    if (it == sessions.end()) reject(404, "unknown session '" + p.path.at(1) + "'", "not_found");
    return it->second;
  }

  static json summary(const std::string& id, const SessionState& s, bool fitting) {
    json j{{"id", id},
           {"n", s.data().size()},
           {"outcome", s.data().outcome_name()},
           {"is_grid", s.data().is_grid()},
           {"design", s.design},
           {"fits", s.history.size()},
           {"fitting", fitting},
           {"created", s.created},
           {"updated", s.updated}};
    json cols = json::array();
    for (const auto& c : s.data().covariates()) cols.push_back(c.name);
    j["columns"] = cols;
    if (s.grid) {
      j["grid"] = to_json(s.grid->spec);
      j["grid"]["unit"] = s.grid->unit;
    }
    return j;
  }

  static json fit_summary(int seq, const std::string& token, const std::vector<std::string>& design, const FitResult& f) {
    json j = to_json(f);
    j.erase("trace");
    return json{{"seq", seq}, {"token", token}, {"design", design}, {"fit", j}};
  }

  HttpResponse create_session(const Params& p) {
    if (!p.body.contains("schema")) reject(400, "body needs \"schema\"", "schema");
    const json& sj = p.body["schema"];
    Schema schema;
    schema.locations = sj.at("locations").get<std::vector<std::string>>();
    schema.outcome = sj.at("outcome").get<std::string>();
    if (sj.contains("covariates")) schema.covariates = sj["covariates"].get<std::vector<std::string>>();
    if (!p.body.contains("csv") && !p.body.contains("csv_path")) reject(400, "body needs \"csv\" or \"csv_path\"", "schema");
    Dataset data = p.body.contains("csv") ? parse_csv(p.body["csv"].get<std::string>(), schema)
                                          : ingest_csv(p.body["csv_path"].get<std::string>(), schema);
    auto st = std::make_shared<SessionState>(SessionState{std::move(data), std::nullopt, nullptr, {}, {}, std::nullopt, now_iso(), {}});
    st->updated = st->created;
    if (p.body.contains("design")) {
      st->design = p.body["design"].get<std::vector<std::string>>();
      make_design(st->raw, st->design);
    }
    if (st->raw.is_grid()) st->basis = std::make_shared<const SpectralBasis>(basis_for(st->raw));
    auto s = std::make_shared<Session>();
    {
      std::lock_guard lock(map_m);
      s->id = "s" + std::to_string(next_session++);
      s->state = st;
      sessions[s->id] = s;
    }
    return {201, summary(s->id, *st, false)};
  }

  HttpResponse get_session(const Params& p) {
    auto s = session(p);
    std::lock_guard lock(s->m);
    return {200, summary(s->id, *s->state, s->fitting)};
  }

  HttpResponse post_grid(const Params& p) {
    auto s = session(p);
    const auto snap = s->snapshot();
    if (snap->raw.dim() != 2) reject(422, "gridding needs 2-D locations", "precondition");
    GridSpec spec = make_grid_spec(snap->raw, p.body.at("M1").get<int>(), p.body.at("M2").get<int>(),
                                   p.body.value("lambda", 7.0));
    if (p.body.contains("covariate_lambda")) spec.covariate_lambda = p.body["covariate_lambda"].get<double>();
    GriddedData g = grid_dataset(snap->raw, spec);
    auto basis = std::make_shared<const SpectralBasis>(basis_for(g.data));
    std::lock_guard lock(s->m);
    if (s->fitting) reject(409, "a fit is in progress", "conflict");
    auto next = std::make_shared<SessionState>(*s->state);
    // Synthetic trends belong to the old lattice; drop them from the design.
    std::erase_if(next->design, [&](const std::string& n) { return !g.data.has_covariate(n); });
    next->grid = std::move(g);
    next->basis = std::move(basis);
    next->fit.reset();
    next->updated = now_iso();
    s->state = next;
    return {200, summary(s->id, *next, false)};
  }

  HttpResponse post_fit(const Params& p) {
    auto s = session(p);
    FitOptions opt;
    opt.method = method_from_string(p.body.value("method", std::string("exact")));
    if (p.body.contains("nu")) opt.nu = nu_from_json(p.body["nu"]);
    if (p.body.contains("seed")) opt.optimizer.seed = p.body["seed"].get<std::uint64_t>();
    if (p.body.contains("starts")) opt.optimizer.starts = p.body["starts"].get<int>();
    std::shared_ptr<const SessionState> snap;
    std::string token;
    {
      std::lock_guard lock(s->m);
      if (s->fitting) reject(409, "a fit is already in progress for this session", "conflict");
      snap = s->state;
      if (opt.method == Method::approximate && !snap->data().is_grid()) {
        reject(422, "approximate method requires grid (run `grid` first)", "precondition");
      }
      make_design(snap->data(), snap->design);
      s->fitting = true;
      token = "f" + std::to_string(s->next_token++);
      s->jobs[token] = FitJob{};
    }
    submit([this, s, snap, opt, token] {
      FitJob job;
      std::optional<FitResult> result;
      try {
        result = fit(snap->data(), make_design(snap->data(), snap->design), opt);
        job.status = "done";
      } catch (const Error& e) {
        job.status = "failed";
        job.error = json{{"error", e.what()}, {"kind", to_string(e.kind())}, {"design", snap->design},
                         {"method", to_string(opt.method)}};
      } catch (const std::exception& e) {
        job.status = "failed";
        job.error = json{{"error", e.what()}, {"kind", "internal"}};
      }
      std::lock_guard lock(s->m);
      if (result) {
        auto next = std::make_shared<SessionState>(*s->state);
        job.history_index = static_cast<int>(next->history.size());
        next->history.push_back(fit_summary(job.history_index + 1, token, snap->design, *result));
        // The data may have been regridded meanwhile only if no fit was running, so it is unchanged.
        next->fit = std::move(result);
        next->updated = now_iso();
        s->state = next;
      }
      s->jobs[token] = std::move(job);
      s->fitting = false;
    });
    return {202, json{{"token", token}, {"status", "running"}, {"poll", "/sessions/" + s->id + "/fit/" + token}}};
  }

  HttpResponse get_fit(const Params& p) {
    auto s = session(p);
    std::lock_guard lock(s->m);
    const auto it = s->jobs.find(p.path.at(3));
    if (it == s->jobs.end()) reject(404, "unknown fit token '" + p.path.at(3) + "'", "not_found");
    const FitJob& job = it->second;
    if (job.status == "failed") {
      json body = job.error;
      body["status"] = "failed";
      body["token"] = it->first;
      return {422, body};
    }
    json body{{"token", it->first}, {"status", job.status}};
    if (job.status == "done") body["result"] = s->state->history.at(static_cast<std::size_t>(job.history_index));
    return {200, body};
  }

  static const FitResult& require_fit(const SessionState& st) {
    if (!st.fit) reject(409, "no completed fit yet (POST /fit first)", "conflict");
    return *st.fit;
  }

  HttpResponse get_diagnostics(const Params& p) {
    auto s = session(p);
    const auto st = s->snapshot();
    const FitResult& f = require_fit(*st);
    if (!st->basis) reject(422, "v_j^2 diagnostics require grid (run `grid` first)", "precondition");
    const auto view = spectral_view(*st->basis, st->data(), make_design(st->data(), covariates_of(f)), f);
    Eigen::Index jmax = 0;
    view.v_sq.maxCoeff(&jmax);
    json body = to_json(vj_squared_series(view, "fit " + std::to_string(st->history.size())));
    body["focus_j"] = jmax + 1;
    body["basis_id"] = st->basis->id();
    return {200, body};
  }

  HttpResponse get_avp(const Params& p) {
    auto s = session(p);
    const auto st = s->snapshot();
    const auto it = p.query.find("candidate");
    if (it == p.query.end() || it->second.empty()) reject(400, "query parameter 'candidate' is required", "validation");
    const Domain domain = domain_from_string(p.query.count("domain") ? p.query.at("domain") : "spectral");
    const FitResult& f = require_fit(*st);
    const auto in_model = covariates_of(f);
    if (std::find(in_model.begin(), in_model.end(), it->second) != in_model.end()) {
      reject(422, "candidate '" + it->second + "' is already in model", "precondition");
    }
    const Dataset& data = st->data();
    if (!data.has_covariate(it->second)) reject(400, "unknown covariate '" + it->second + "'", "validation");
    const auto design = make_design(data, in_model);
    const Covariate c{it->second, data.covariate(it->second)};
    if (domain == Domain::spectral) {
      if (!st->basis) reject(422, "spectral AVPs require grid (run `grid` first)", "precondition");
      return {200, to_json(avp_spectral(data, *st->basis, design, c, spectral_view(*st->basis, data, design, f)))};
    }
    return {200, to_json(avp_observation(data, design, c, fitted_covariance(data, f, st->basis.get())))};
  }

  HttpResponse post_covariates(const Params& p) {
    auto s = session(p);
    const auto add = p.body.value("add", std::vector<std::string>{});
    const auto remove = p.body.value("remove", std::vector<std::string>{});
    if (add.empty() && remove.empty()) reject(400, "body needs \"add\" and/or \"remove\" lists", "schema");
    std::lock_guard lock(s->m);
    auto next = std::make_shared<SessionState>(*s->state);
    for (const auto& name : remove) {
      if (std::erase(next->design, name) == 0) reject(400, "'" + name + "' is not in the model", "validation");
    }
    for (const auto& name : add) {
      if (std::find(next->design.begin(), next->design.end(), name) != next->design.end()) {
        reject(400, "'" + name + "' is already in the model", "validation");
      }
      const bool synthetic = std::find(kSynthetic.begin(), kSynthetic.end(), name) != kSynthetic.end();
      if (synthetic && !next->data().has_covariate(name)) {
        if (!next->grid && !next->raw.is_grid()) {
          reject(422, "synthetic trend '" + name + "' needs a grid-tagged session (run `grid` first)", "precondition");
        }
        const Eigen::VectorXd col = synthetic_covariate(next->data(), name);
        if (next->grid) {
          next->grid->data = next->grid->data.with_covariate(name, col);
        } else {
          next->raw = next->raw.with_covariate(name, col);
        }
      }
      if (!next->data().has_covariate(name)) reject(400, "unknown covariate '" + name + "'", "validation");
      next->design.push_back(name);
    }
    make_design(next->data(), next->design);
    next->updated = now_iso();
    s->state = next;
    return {200, summary(s->id, *next, s->fitting)};
  }

  HttpResponse get_history(const Params& p) {
    auto s = session(p);
    const auto st = s->snapshot();
    return {200, json{{"id", s->id}, {"design", st->design}, {"fit_history", st->history}}};
  }

  HttpResponse get_openapi(const Params&) { return {200, openapi()}; }

  json openapi() const {
    json paths = json::object();
    for (const auto& r : routes) {
      json responses = json::object();
      for (int code : r.statuses) responses[std::to_string(code)] = {{"description", code < 400 ? "success" : "error"}};
      json op{{"summary", r.summary}, {"responses", responses}};
      json params = json::array();
      for (const auto& part : split_path(r.pattern)) {
        if (part.front() == '{') {
          params.push_back({{"name", part.substr(1, part.size() - 2)}, {"in", "path"}, {"required", true},
                            {"schema", {{"type", "string"}}}});
        }
      }
      if (r.pattern.ends_with("/avp")) {
        params.push_back({{"name", "candidate"}, {"in", "query"}, {"required", true}, {"schema", {{"type", "string"}}}});
        params.push_back({{"name", "domain"}, {"in", "query"}, {"required", false},
                          {"schema", {{"type", "string"}, {"enum", {"observation", "spectral"}}}}});
      }
      if (!params.empty()) op["parameters"] = params;
      if (r.method == "POST") op["requestBody"] = {{"content", {{"application/json", {{"schema", {{"type", "object"}}}}}}}};
      std::string m = r.method;
      std::transform(m.begin(), m.end(), m.begin(), [](unsigned char c) { return std::tolower(c); });
      paths[r.pattern][m] = op;
    }
    return json{{"openapi", "3.0.3"}, {"info", {{"title", "gpdiag session service"}, {"version", "1.0.0"}}}, {"paths", paths}};
  }
};

Eigen::VectorXd synthetic_covariate(const Dataset& grid_data, const std::string& kind) {
  if (std::find(kSynthetic.begin(), kSynthetic.end(), kind) == kSynthetic.end()) {
    fail(ErrorKind::parameter, "unknown synthetic trend '" + kind + "'");
  }
  if (!grid_data.is_grid()) fail(ErrorKind::precondition, "synthetic trends need grid data (run `grid` first)");
  const auto& g = *grid_data.grid();
  if (g.dims.size() != 2) fail(ErrorKind::precondition, "synthetic trends need a 2-D grid");
  const int axis = kind.rfind("ns_", 0) == 0 ? 1 : 0;
  Eigen::VectorXd s(static_cast<Eigen::Index>(grid_data.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = (grid_data.coords()(i, axis) - g.origin[static_cast<std::size_t>(axis)]) / g.spacing[static_cast<std::size_t>(axis)];
  }
  s.array() -= s.mean();
  if (kind.ends_with("_quadratic")) s = s.array().square();
  return standardize(s).values;
}

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Service::~Service() = default;

HttpResponse Service::handle(const std::string& method, const std::string& target, const std::string& body) {
  return impl_->dispatch(method, target, body);
}

void Service::wait_idle() { impl_->wait_idle(); }

json Service::openapi() const { return impl_->openapi(); }

}  // namespace gpdiag

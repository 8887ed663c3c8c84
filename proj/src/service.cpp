#include "scorealign/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <vector>

#include "scorealign/project.hpp"

namespace scorealign {
namespace {

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = path.find('/', start);
    const auto piece = path.substr(start, end == std::string_view::npos
                                              ? std::string_view::npos
                                              : end - start);
    if (!piece.empty()) parts.emplace_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

ServiceResponse json_response(int status, const Json& j) {
  return {status, "application/json", to_text(j)};
}

ServiceResponse error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}});
}

Json violations_json(const std::vector<JumpViolation>& violations) {
  Json list = Json::array();
  for (const auto& v : violations) {
    list.push_back({{"kind", to_string(v.kind)},
                    {"position", v.position},
                    {"from", v.jump.from_index},
                    {"to", v.jump.to_index},
                    {"order", v.jump.order},
                    {"message", v.message}});
  }
  return {{"violations", std::move(list)}};
}

bool valid_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
           c == '_' || c == '.';
  });
}

}  // namespace

LabelService::LabelService(std::filesystem::path root) : root_(std::move(root)) {}

LabelService::ProjectLocks& LabelService::locks_for(const std::string& id) {
  std::lock_guard guard(locks_mutex_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_unique<ProjectLocks>();
  return *slot;
}

bool LabelService::project_exists(const std::string& id) const {
  return valid_id(id) && std::filesystem::is_directory(root_ / id);
}

ServiceResponse LabelService::handle(std::string_view method,
                                     std::string_view path,
                                     const std::string& body) {
  const auto parts = split_path(path);
  if (parts.empty() || parts[0] != "projects") {
    return error_response(404, "no such resource");
  }
  try {
    if (parts.size() == 1) {
      if (method != "GET") return error_response(405, "method not allowed");
      return list_projects();
    }
    const auto& id = parts[1];
    if (!project_exists(id)) return error_response(404, "unknown project " + id);

    const auto route = parts.size() >= 3 ? parts[2] : std::string();
    if (route == "pages" && parts.size() == 4 && method == "GET") {
      return get_page(id, parts[3]);
    }
    if (parts.size() != 3) return error_response(404, "no such resource");
    if (route == "measures" && method == "GET") {
      return get_file(id, "measures.json");
    }
    if (route == "jumps" && method == "GET") return get_jumps(id);
    if (route == "jumps" && method == "PUT") return put_jumps(id, body);
    if (route == "logical-order" && method == "GET") return get_logical_order(id);
    if (route == "align" && method == "POST") return post_align(id, body);
    if (route == "alignment" && method == "GET") {
      return get_file(id, "alignment.json");
    }
    return error_response(404, "no such resource");
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ServiceResponse LabelService::list_projects() {
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && valid_id(name)) ids.push_back(name);
  }
  std::sort(ids.begin(), ids.end());
  Json out = Json::array();
  for (const auto& id : ids) {
    Json entry = {{"id", id}};
    std::shared_lock lock(locks_for(id).files);
    try {
      const auto score = load_physical_score(ProjectPaths{root_ / id});
      entry["page_count"] = score.page_count();
      entry["measure_count"] = score.measure_count();
    } catch (const ProjectError&) {
      entry["page_count"] = nullptr;
      entry["measure_count"] = nullptr;
    }
    out.push_back(std::move(entry));
  }
  return json_response(200, out);
}

ServiceResponse LabelService::get_page(const std::string& id,
                                       std::string_view page) {
  int index = -1;
  const auto [ptr, ec] =
      std::from_chars(page.data(), page.data() + page.size(), index);
  if (ec != std::errc() || ptr != page.data() + page.size() || index < 0 ||
      index > 999) {
    return error_response(404, "no such page");
  }
  const auto path = ProjectPaths{root_ / id}.page(index);
  std::shared_lock lock(locks_for(id).files);
  if (!std::filesystem::is_regular_file(path)) {
    return error_response(404, "no such page");
  }
  return {200, "image/png", read_file(path)};
}

ServiceResponse LabelService::get_file(const std::string& id,
                                       const std::string& name) {
  const auto path = root_ / id / name;
  std::shared_lock lock(locks_for(id).files);
  if (!std::filesystem::is_regular_file(path)) {
    return error_response(404, name + " not found");
  }
  return {200, "application/json", read_file(path)};
}

ServiceResponse LabelService::get_jumps(const std::string& id) {
  const ProjectPaths p{root_ / id};
  std::shared_lock lock(locks_for(id).files);
  if (!std::filesystem::exists(p.jumps())) {
    return {200, "application/json", to_text(Json::array())};
  }
  return {200, "application/json", read_file(p.jumps())};
}

ServiceResponse LabelService::put_jumps(const std::string& id,
                                        const std::string& body) {
  std::vector<JumpLabel> jumps;
  try {
    jumps = jumps_from_json(parse_text(body, "request body"));
  } catch (const FormatError& e) {
    return error_response(400, e.what());
  }
  const ProjectPaths p{root_ / id};
  std::unique_lock lock(locks_for(id).files);
  std::vector<MeasureRecord> measures;
  try {
    measures = load_measures(p);
  } catch (const ProjectError& e) {
    return error_response(409, e.what());
  }
  const int q = static_cast<int>(measures.size());
  const auto violations = validate_jumps(q, jumps);
  if (!violations.empty()) return json_response(422, violations_json(violations));

  const auto text = to_text(jumps_to_json(jumps));
  write_file(p.jumps(), text);
  write_file(p.logical_order(), to_text(logical_order_to_json(unroll(q, jumps))));
  return {200, "application/json", text};
}

ServiceResponse LabelService::get_logical_order(const std::string& id) {
  const ProjectPaths p{root_ / id};
  std::shared_lock lock(locks_for(id).files);
  try {
    const auto q = static_cast<int>(load_measures(p).size());
    const auto jumps = load_jumps(p);
    const auto violations = validate_jumps(q, jumps);
    if (!violations.empty()) {
      return json_response(422, violations_json(violations));
    }
    return {200, "application/json",
            to_text(logical_order_to_json(unroll(q, jumps)))};
  } catch (const ProjectError& e) {
    return error_response(409, e.what());
  }
}

ServiceResponse LabelService::post_align(const std::string& id,
                                         const std::string& body) {
  AlignSettings settings;
  try {
    if (!body.empty()) {
      const auto j = parse_text(body, "request body");
      if (j.contains("variant")) {
        settings.variant = parse_audio_variant(j.at("variant").get<std::string>());
      }
      if (j.contains("threshold")) settings.threshold = j.at("threshold").get<double>();
      if (!(settings.threshold >= 0.0 && settings.threshold <= 1.0)) {
        return error_response(400, "threshold must be in [0, 1]");
      }
    }
  } catch (const std::exception& e) {
    return error_response(400, e.what());
  }

  auto& locks = locks_for(id);
  std::lock_guard one_job(locks.align);
  const ProjectPaths p{root_ / id};
  std::optional<AlignInputs> inputs;
  {
    std::shared_lock lock(locks.files);
    try {
      const auto q = static_cast<int>(load_measures(p).size());
      const auto jumps = load_jumps(p);
      const auto violations = validate_jumps(q, jumps);
      if (!violations.empty()) {
        return json_response(422, violations_json(violations));
      }
      inputs = load_align_inputs(p, unroll(q, jumps), settings);
    } catch (const MissingInput& e) {
      return error_response(409, e.what());
    } catch (const ProjectError& e) {
      return error_response(400, e.what());
    }
  }

  AlignmentRecord record;
  try {
    record = compute_alignment(*inputs, settings);
  } catch (const ProjectError& e) {
    return error_response(400, e.what());
  }
  {
    std::unique_lock lock(locks.files);
    write_file(p.alignment(), to_text(alignment_to_json(record)));
  }
  return json_response(200, {{"M", record.measure_count},
                              {"duration_T", record.duration},
                              {"dtw_cost", record.dtw_cost},
                              {"variant", record.provenance.variant}});
}

struct HttpFrontend::Impl {
  explicit Impl(LabelService& s) : service(s) {}
  LabelService& service;
  httplib::Server server;
};

HttpFrontend::HttpFrontend(LabelService& service)
    : impl_(std::make_unique<Impl>(service)) {
  const auto forward = [this](const httplib::Request& req,
                              httplib::Response& res) {
    const auto r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
    res.set_header("Access-Control-Allow-Origin", "*");
  };
  auto& s = impl_->server;
  s.Get(R"(/projects.*)", forward);
  s.Put(R"(/projects.*)", forward);
  s.Post(R"(/projects.*)", forward);
  s.Options(R"(/projects.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpFrontend::run() { return impl_->server.listen_after_bind(); }

void HttpFrontend::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace scorealign

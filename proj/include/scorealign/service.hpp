#pragma once

// HTTP backend for the jump-labeling interface.
//
//   GET  /projects
//   GET  /projects/{id}/pages/{p}        page image bytes
//   GET  /projects/{id}/measures         measures.json
//   GET  /projects/{id}/jumps            jumps.json ([] if absent)
//   PUT  /projects/{id}/jumps            replace the whole ordered list
//   GET  /projects/{id}/logical-order    unroll of the current jumps
//   POST /projects/{id}/align            run the alignment pipeline
//   GET  /projects/{id}/alignment        alignment.json
//
// A project is a subdirectory of the service root. PUT answers 422 with the
// violation list when the jumps do not validate; align answers 409 when an
// input file is missing. Writes to a project are serialized, and an
// alignment run reads all of its inputs under one lock so a concurrent PUT
// cannot give it a half-updated view.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace scorealign {

struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

class LabelService {
 public:
  explicit LabelService(std::filesystem::path root);

  ServiceResponse handle(std::string_view method, std::string_view path,
                         const std::string& body);

 private:
  struct ProjectLocks {
    std::shared_mutex files;
    std::mutex align;
  };

  ProjectLocks& locks_for(const std::string& id);
  bool project_exists(const std::string& id) const;

  ServiceResponse list_projects();
  ServiceResponse get_page(const std::string& id, std::string_view page);
  ServiceResponse get_file(const std::string& id, const std::string& name);
  ServiceResponse get_jumps(const std::string& id);
  ServiceResponse put_jumps(const std::string& id, const std::string& body);
  ServiceResponse get_logical_order(const std::string& id);
  ServiceResponse post_align(const std::string& id, const std::string& body);

  std::filesystem::path root_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<ProjectLocks>> locks_;
};

// Serves a LabelService over HTTP.
class HttpFrontend {
 public:
  explicit HttpFrontend(LabelService& service);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Port 0 binds any free port. Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace scorealign

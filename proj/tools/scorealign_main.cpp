// scorealign: unroll jump labels, align score features to audio features,
// evaluate alignments and serve the labeling backend.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "scorealign/project.hpp"
#include "scorealign/service.hpp"

namespace {

scorealign::HttpFrontend* g_frontend = nullptr;

void on_signal(int) {
  if (g_frontend) g_frontend->stop();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace scorealign;

  CLI::App app{"Audio-to-score alignment with labeled jumps"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string project;
  app.add_option("--project", project, "Project directory (serve: root of projects)")
      ->required();

  auto* unroll_cmd = app.add_subcommand("unroll", "Write logical_order.json from jumps.json");

  auto* align_cmd = app.add_subcommand("align", "Align score and audio features");
  std::string variant = "onset_prob";
  double threshold = kDefaultThreshold;
  unsigned threads = 1;
  align_cmd->add_option("--variant", variant, "Audio representation")
      ->check(CLI::IsMember(
          {"onset_prob", "onset_pred", "frame_prob", "frame_pred", "midi"}));
  align_cmd->add_option("--threshold", threshold, "Binarization threshold")
      ->check(CLI::Range(0.0, 1.0));
  align_cmd->add_option("--threads", threads, "DTW cost workers (0 = all cores)");

  auto* eval_cmd = app.add_subcommand("eval", "Score alignment.json against gt.json");

  auto* serve_cmd = app.add_subcommand("serve", "Run the labeling HTTP backend");
  int port = 8080;
  std::string host = "127.0.0.1";
  serve_cmd->add_option("--port", port, "Listen port");
  serve_cmd->add_option("--host", host, "Listen address");

  CLI11_PARSE(app, argc, argv);

  const ProjectPaths paths{project};
  if (*unroll_cmd) return run_unroll(paths, std::cout, std::cerr);
  if (*align_cmd) {
    AlignSettings settings;
    settings.variant = parse_audio_variant(variant);
    settings.threshold = threshold;
    settings.threads = threads;
    return run_align(paths, settings, std::cout, std::cerr);
  }
  if (*eval_cmd) return run_eval(paths, std::cout, std::cerr);
  if (*serve_cmd) {
    if (!fs::is_directory(paths.dir)) {
      std::cerr << "error: " << paths.dir << " is not a directory\n";
      return kExitInput;
    }
    LabelService service(paths.dir);
    HttpFrontend frontend(service);
    if (frontend.bind(host, port) < 0) {
      std::cerr << "error: cannot listen on " << host << ":" << port << '\n';
      return kExitInput;
    }
    g_frontend = &frontend;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "serving " << paths.dir << " on http://" << host << ":" << port
              << std::endl;
    frontend.run();
    g_frontend = nullptr;
  }
  return kExitOk;
}

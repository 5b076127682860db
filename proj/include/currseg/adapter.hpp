#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <thread>

#include <json.hpp>

#include "currseg/png_io.hpp"
#include "currseg/segmenter.hpp"

namespace currseg {

// Exchange protocol with an external segmenter (a real promptable model
// wrapped in a small script): the prompts and the image land on disk, the
// adapter runs as a subprocess taking the prompt-document path as its sole
// argument, and prints the path of the produced mask PNG on stdout.
// Masks are single-channel 8-bit, 0 = background, 255 = foreground.
struct AdapterConfig {
  std::string command;                  // executable (run via /bin/sh)
  std::filesystem::path exchange_dir;   // defaults to a temp directory
  double timeout_seconds = 30.0;
};

namespace detail {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string stdout_text;
};

inline ProcessResult run_with_timeout(const std::string& shell_command,
                                      double timeout_seconds) {
  int fds[2];
  if (pipe(fds) != 0) throw AdapterLaunchError("pipe() failed");
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw AdapterLaunchError("fork() failed");
  }
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    execl("/bin/sh", "sh", "-c", shell_command.c_str(),
          static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  // Non-blocking read loop with a deadline; SIGKILL on expiry.
  fcntl(fds[0], F_SETFL, O_NONBLOCK);
  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_seconds);
  int status = 0;
  bool exited = false;
  char buf[4096];
  while (true) {
    ssize_t got;
    while ((got = read(fds[0], buf, sizeof(buf))) > 0)
      result.stdout_text.append(buf, static_cast<std::size_t>(got));
    if (!exited) {
      const pid_t w = waitpid(pid, &status, WNOHANG);
      if (w == pid) exited = true;
    }
    if (exited && (got == 0 || (got < 0 && errno != EAGAIN))) break;
    if (!exited && std::chrono::steady_clock::now() > deadline) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  close(fds[0]);
  if (!result.timed_out)
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

inline std::string last_nonempty_line(const std::string& text) {
  std::size_t end = text.find_last_not_of(" \t\r\n");
  if (end == std::string::npos) return {};
  std::size_t start = text.find_last_of('\n', end);
  start = (start == std::string::npos) ? 0 : start + 1;
  std::string line = text.substr(start, end - start + 1);
  const std::size_t first = line.find_first_not_of(" \t\r");
  return first == std::string::npos ? std::string() : line.substr(first);
}

inline std::filesystem::path fresh_exchange_dir(const AdapterConfig& cfg) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path base = cfg.exchange_dir.empty()
                                   ? std::filesystem::temp_directory_path()
                                   : cfg.exchange_dir;
  base /= "currseg_adapter_" + std::to_string(::getpid()) + "_" +
          std::to_string(counter.fetch_add(1));
  std::filesystem::create_directories(base);
  return base;
}

}  // namespace detail

// Runs one external segmentation call. The prompt document is JSON:
//   {"image": "<path>", "points": [{"x","y","label"}, ...],
//    "boxes": [{"x1","y1","x2","y2","score"}, ...], "prior": "<path>"|null}
inline SegmentationResult external_segment(
    const std::filesystem::path& image_path, const PromptBundle& prompts,
    const AdapterConfig& cfg, double threshold_value = 0.5) {
  if (cfg.command.empty())
    throw AdapterLaunchError("adapter command not configured");
  const Image image = load_image_png(image_path);
  validate_bundle(prompts, image.width, image.height);

  const auto dir = detail::fresh_exchange_dir(cfg);
  nlohmann::json doc;
  doc["image"] = std::filesystem::absolute(image_path).string();
  doc["points"] = nlohmann::json::array();
  for (const auto& p : prompts.points)
    doc["points"].push_back({{"x", p.x}, {"y", p.y}, {"label", p.label}});
  doc["boxes"] = nlohmann::json::array();
  for (const auto& b : prompts.boxes)
    doc["boxes"].push_back({{"x1", b.x1},
                            {"y1", b.y1},
                            {"x2", b.x2},
                            {"y2", b.y2},
                            {"score", b.score}});
  if (prompts.dense_prior) {
    const auto prior_path = dir / "prior.png";
    save_soft_png(prior_path, *prompts.dense_prior);
    doc["prior"] = prior_path.string();
  } else {
    doc["prior"] = nullptr;
  }
  const auto doc_path = dir / "prompts.json";
  {
    std::ofstream f(doc_path);
    f << doc.dump(2) << "\n";
    if (!f) throw DataError("cannot write prompt document: " + doc_path.string());
  }

  const std::string shell = cfg.command + " '" + doc_path.string() + "'";
  const auto proc = detail::run_with_timeout(shell, cfg.timeout_seconds);
  if (proc.timed_out)
    throw AdapterTimeoutError("adapter timed out after " +
                              std::to_string(cfg.timeout_seconds) +
                              "s: " + cfg.command);
  if (proc.exit_code != 0)
    throw AdapterLaunchError("adapter failed (exit " +
                             std::to_string(proc.exit_code) +
                             "): " + cfg.command);
  const std::string mask_path = detail::last_nonempty_line(proc.stdout_text);
  if (mask_path.empty())
    throw AdapterMaskError("adapter printed no mask path: " + cfg.command);

  png::Raster raster;
  try {
    raster = png::read_file(mask_path);
  } catch (const DataError& e) {
    throw AdapterMaskError(std::string("adapter mask unreadable: ") + e.what());
  }
  if (raster.channels != 1)
    throw AdapterMaskError("adapter mask must be single-channel: " + mask_path);
  if (raster.width != image.width || raster.height != image.height)
    throw AdapterMaskError(
        "adapter mask dimension mismatch: got " + std::to_string(raster.width) +
        "x" + std::to_string(raster.height) + ", expected " +
        std::to_string(image.width) + "x" + std::to_string(image.height));

  SegmentationResult result;
  result.soft.width = raster.width;
  result.soft.height = raster.height;
  result.soft.values.resize(raster.bytes.size());
  for (std::size_t i = 0; i < raster.bytes.size(); ++i)
    result.soft.values[i] = raster.bytes[i] / 255.0;
  result.binary = threshold(result.soft, threshold_value);
  return result;
}

// Segmenter facade over the adapter; set_image parks the image in the
// exchange directory so external_segment can reference it by path.
class ExternalSegmenter final : public Segmenter {
 public:
  explicit ExternalSegmenter(AdapterConfig cfg) : cfg_(std::move(cfg)) {}

  void set_image(const Image& image) override {
    dir_ = detail::fresh_exchange_dir(cfg_);
    image_path_ = dir_ / "image.png";
    save_image_png(image_path_, image);
  }

  SegmentationResult segment(const PromptBundle& prompts,
                             const StageProfile& profile) override {
    if (image_path_.empty())
      throw AdapterLaunchError("ExternalSegmenter: no image bound");
    return external_segment(image_path_, prompts, cfg_, profile.threshold);
  }

 private:
  AdapterConfig cfg_;
  std::filesystem::path dir_;
  std::filesystem::path image_path_;
};

}  // namespace currseg

#include "ta_gate/sandbox.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "ta_gate/text.hpp"

namespace ta_gate::sandbox {

using nlohmann::json;

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Pass:
      return "Pass";
    case Outcome::CompileError:
      return "CompileError";
    case Outcome::RuntimeException:
      return "RuntimeException";
    case Outcome::AssertFailure:
      return "AssertFailure";
    case Outcome::Timeout:
      return "Timeout";
  }
  return "RuntimeException";
}

Outcome outcome_from_string(std::string_view s) {
  for (auto o : {Outcome::Pass, Outcome::CompileError, Outcome::RuntimeException, Outcome::AssertFailure,
                 Outcome::Timeout}) {
    if (s == to_string(o)) return o;
  }
  throw Error("RecordSyntax", "unknown execution outcome: " + std::string(s));
}

const char* to_string(AssertStatus s) {
  switch (s) {
    case AssertStatus::Passed:
      return "passed";
    case AssertStatus::Failed:
      return "failed";
    case AssertStatus::Error:
      return "error";
    case AssertStatus::NotRun:
      return "not_run";
  }
  return "not_run";
}

AssertStatus assert_status_from_string(std::string_view s) {
  for (auto v : {AssertStatus::Passed, AssertStatus::Failed, AssertStatus::Error, AssertStatus::NotRun}) {
    if (s == to_string(v)) return v;
  }
  return AssertStatus::NotRun;
}

json to_json(const ExecutionReport& r) {
  json asserts = json::array();
  for (const auto& a : r.assert_results) asserts.push_back({{"source", a.source}, {"status", to_string(a.status)}});
  return json{{"outcome", to_string(r.outcome)},
              {"detail", r.detail},
              {"asserts_ok", r.asserts_ok},
              {"assert_results", asserts}};
}

ExecutionReport execution_from_json(const json& j) {
  ExecutionReport r;
  r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  r.detail = j.value("detail", "");
  r.asserts_ok = j.at("asserts_ok").get<bool>();
  if (j.contains("assert_results")) {
    for (const auto& a : j.at("assert_results"))
      r.assert_results.push_back(
          {a.at("source").get<std::string>(), assert_status_from_string(a.at("status").get<std::string>())});
  }
  return r;
}

std::string runner_source() {
  return R"PY(import json
import os
import sys

SCRATCH = os.path.realpath(os.getcwd())
SUBMISSION = os.path.join(SCRATCH, "submission.py")
ASSERTS = os.path.join(SCRATCH, "asserts.json")
RESULTS = os.path.join(SCRATCH, "results.json")

EXIT_PASS, EXIT_ASSERT, EXIT_RUNTIME, EXIT_SYNTAX, EXIT_HARNESS = 0, 1, 2, 3, 4


class SandboxDenied(RuntimeError):
    pass


def _inside(path):
    try:
        if isinstance(path, bytes):
            path = os.fsdecode(path)
        p = os.path.realpath(os.fspath(path))
    except Exception:
        return False
    return p == SCRATCH or p.startswith(SCRATCH + os.sep)


_PATH_EVENTS = {
    "os.remove", "os.rename", "os.rmdir", "os.mkdir", "os.chmod", "os.chown",
    "os.truncate", "os.symlink", "os.link", "os.utime", "shutil.rmtree",
    "shutil.copyfile", "shutil.move",
}
_PROCESS_EVENTS = {
    "subprocess.Popen", "os.system", "os.exec", "os.posix_spawn", "os.spawn",
    "os.fork", "os.forkpty", "pty.spawn", "os.kill", "os.killpg", "ctypes.dlopen",
}
_WRITE_FLAGS = os.O_WRONLY | os.O_RDWR | os.O_CREAT | os.O_APPEND | os.O_TRUNC


def _audit(event, args):
    if event.startswith("socket."):
        raise SandboxDenied("network access denied (%s)" % event)
    if event in _PROCESS_EVENTS:
        raise SandboxDenied("process control denied (%s)" % event)
    if event == "open":
        path, mode, flags = args
        if isinstance(path, int):
            return
        writing = bool((flags or 0) & _WRITE_FLAGS)
        if isinstance(mode, str) and any(c in mode for c in "wax+"):
            writing = True
        if writing and not _inside(path):
            raise SandboxDenied("write outside scratch denied (%r)" % (path,))
    elif event in _PATH_EVENTS:
        for arg in args[:2]:
            if isinstance(arg, (str, bytes, os.PathLike)) and not _inside(arg):
                raise SandboxDenied("filesystem change outside scratch denied (%s)" % event)


def _describe(exc):
    return "%s: %s" % (type(exc).__name__, exc)


def main():
    with open(SUBMISSION, "r", encoding="utf-8", errors="surrogateescape") as fh:
        source = fh.read()
    with open(ASSERTS, "r", encoding="utf-8") as fh:
        asserts = json.load(fh)
    status = ["not_run"] * len(asserts)
    write_results = open(RESULTS, "w", encoding="utf-8")

    def finish(code, message):
        json.dump({"status": status}, write_results)
        write_results.close()
        if message:
            sys.stderr.write(message + "\n")
        sys.stderr.flush()
        os._exit(code)

    sys.addaudithook(_audit)

    try:
        compiled = compile(source, "submission.py", "exec")
    except (SyntaxError, ValueError) as exc:
        finish(EXIT_SYNTAX, _describe(exc))

    namespace = {"__name__": "submission", "__builtins__": __builtins__}
    try:
        exec(compiled, namespace)
    except BaseException as exc:
        finish(EXIT_RUNTIME, "while loading submission: " + _describe(exc))

    for index, snippet in enumerate(asserts):
        try:
            check = compile(snippet, "<assert %d>" % (index + 1), "exec")
        except (SyntaxError, ValueError) as exc:
            status[index] = "error"
            finish(EXIT_HARNESS, "assert %d does not compile: %s" % (index + 1, _describe(exc)))
        try:
            exec(check, namespace)
        except AssertionError as exc:
            status[index] = "failed"
            finish(EXIT_ASSERT, "assert %d failed: %s" % (index + 1, snippet))
        except BaseException as exc:
            status[index] = "error"
            finish(EXIT_RUNTIME, "assert %d raised %s" % (index + 1, _describe(exc)))
        status[index] = "passed"
    finish(EXIT_PASS, "")


main()
)PY";
}

std::optional<std::string> resolve_interpreter(std::string_view configured) {
  std::string name(configured);
  if (name.empty()) {
    const char* env = std::getenv("TA_GATE_INTERPRETER");
    name = env != nullptr && *env != '\0' ? env : "python3";
  }
  if (name.find('/') != std::string::npos) {
    if (::access(name.c_str(), X_OK) == 0) return name;
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  std::string dirs = path != nullptr ? path : "/usr/local/bin:/usr/bin:/bin";
  std::size_t start = 0;
  while (start <= dirs.size()) {
    auto colon = dirs.find(':', start);
    auto dir = dirs.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    if (!dir.empty()) {
      auto candidate = dir + "/" + name;
      struct stat st {};
      if (::stat(candidate.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(candidate.c_str(), X_OK) == 0)
        return candidate;
    }
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  return std::nullopt;
}

namespace {

class ScratchDir {
 public:
  explicit ScratchDir(const std::filesystem::path& root) {
    auto pattern = (root / "ta-gate-XXXXXX").string();
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    if (::mkdtemp(buf.data()) == nullptr) throw Error("IoError", "cannot create scratch directory in " + root.string());
    path_ = buf.data();
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error("IoError", "cannot write " + path.string());
}

std::string read_tail(const std::filesystem::path& path, std::size_t max_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() > max_bytes) data = data.substr(data.size() - max_bytes);
  return std::string(text::trim(data));
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

struct ChildResult {
  bool timed_out = false;
  int status = 0;
};

ChildResult run_child(const std::string& interpreter, const std::filesystem::path& scratch, double timeout_s,
                      const SandboxConfig& cfg) {
  // Everything the child touches is prepared before fork().
  std::string dir = scratch.string();
  std::string stdout_path = (scratch / "stdout.txt").string();
  std::string stderr_path = (scratch / "stderr.txt").string();
  std::string runner = (scratch / "runner.py").string();
  std::vector<std::string> args = {interpreter, "-s", "-B", runner};
  std::vector<std::string> env = {"PATH=/usr/local/bin:/usr/bin:/bin", "PYTHONHASHSEED=0",
                                  "PYTHONDONTWRITEBYTECODE=1", "PYTHONIOENCODING=utf-8", "HOME=" + dir,
                                  "TMPDIR=" + dir, "LC_ALL=C.UTF-8"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::vector<char*> envp;
  for (auto& e : env) envp.push_back(e.data());
  envp.push_back(nullptr);
  rlimit fsize{static_cast<rlim_t>(cfg.max_file_bytes), static_cast<rlim_t>(cfg.max_file_bytes)};
  rlimit as{static_cast<rlim_t>(cfg.max_memory_bytes), static_cast<rlim_t>(cfg.max_memory_bytes)};
  rlimit core{0, 0};

  pid_t pid = ::fork();
  if (pid < 0) throw Error("IoError", "fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    if (::chdir(dir.c_str()) != 0) ::_exit(126);
    int in = ::open("/dev/null", O_RDONLY);
    int out = ::open(stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    int err = ::open(stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (in < 0 || out < 0 || err < 0) ::_exit(126);
    ::dup2(in, 0);
    ::dup2(out, 1);
    ::dup2(err, 2);
    ::setrlimit(RLIMIT_FSIZE, &fsize);
    ::setrlimit(RLIMIT_AS, &as);
    ::setrlimit(RLIMIT_CORE, &core);
    ::execve(argv[0], argv.data(), envp.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);

  using clock = std::chrono::steady_clock;
  auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(timeout_s));
  auto nap = std::chrono::microseconds(500);
  ChildResult result;
  while (true) {
    pid_t r = ::waitpid(pid, &result.status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) throw Error("IoError", "waitpid failed");
    if (clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      while (::waitpid(pid, &result.status, 0) < 0 && errno == EINTR) {
      }
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(nap);
    nap = std::min(nap * 2, std::chrono::microseconds(10000));
  }
  ::kill(-pid, SIGKILL);  // stray grandchildren, if any
  return result;
}

}  // namespace

Sandbox::Sandbox(SandboxConfig config)
    : config_(std::move(config)),
      interpreter_(resolve_interpreter(config_.interpreter)),
      slots_(std::make_shared<std::counting_semaphore<>>(std::max<std::ptrdiff_t>(1, config_.max_workers))) {
  if (config_.scratch_root.empty()) config_.scratch_root = std::filesystem::temp_directory_path();
}

ExecutionReport Sandbox::execute(std::string_view code, const corpus::ProblemSpec& problem) const {
  if (!interpreter_) {
    throw SandboxUnavailable("interpreter not found: " +
                             (config_.interpreter.empty() ? std::string("$TA_GATE_INTERPRETER or python3")
                                                          : config_.interpreter));
  }
  SlotGuard slot(*slots_);
  ScratchDir scratch(config_.scratch_root);
  write_text(scratch.path() / "runner.py", runner_source());
  write_text(scratch.path() / "submission.py", text::normalize_newlines(code));
  write_text(scratch.path() / "asserts.json", json(problem.asserts).dump());

  auto child = run_child(*interpreter_, scratch.path(), problem.timeout_seconds, config_);

  ExecutionReport report;
  for (const auto& a : problem.asserts) report.assert_results.push_back({a, AssertStatus::NotRun});
  try {
    std::ifstream in(scratch.path() / "results.json");
    if (in) {
      auto results = json::parse(in);
      const auto& status = results.at("status");
      for (std::size_t i = 0; i < status.size() && i < report.assert_results.size(); ++i)
        report.assert_results[i].status = assert_status_from_string(status[i].get<std::string>());
    }
  } catch (const std::exception&) {
    // results.json is written by the child; a corrupt file leaves asserts NotRun
  }
  std::string stderr_tail = read_tail(scratch.path() / "stderr.txt", 2000);

  if (child.timed_out) {
    report.outcome = Outcome::Timeout;
    report.detail = "timed out after " + std::to_string(problem.timeout_seconds) + " s";
  } else if (WIFEXITED(child.status)) {
    switch (WEXITSTATUS(child.status)) {
      case 0:
        report.outcome = Outcome::Pass;
        break;
      case 1:
        report.outcome = Outcome::AssertFailure;
        break;
      case 2:
        report.outcome = Outcome::RuntimeException;
        break;
      case 3:
        report.outcome = Outcome::CompileError;
        break;
      case 4:
        report.outcome = Outcome::RuntimeException;
        stderr_tail = "malformed assert: " + stderr_tail;
        break;
      case 127:
        throw SandboxUnavailable("cannot exec interpreter " + *interpreter_);
      default:
        report.outcome = Outcome::RuntimeException;
        stderr_tail = "interpreter exited with status " + std::to_string(WEXITSTATUS(child.status)) + ": " +
                      stderr_tail;
    }
    report.detail = stderr_tail;
  } else {
    report.outcome = Outcome::RuntimeException;
    report.detail = "terminated by signal " + std::to_string(WTERMSIG(child.status));
  }
  report.asserts_ok = report.outcome == Outcome::Pass;
  return report;
}

}  // namespace ta_gate::sandbox

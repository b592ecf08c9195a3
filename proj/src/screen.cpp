#include "ftg/screen.hpp"

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <fcntl.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include "ftg/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ftg {

namespace {

namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::uint8_t> random_input(std::mt19937_64& rng, std::size_t max_len) {
    std::size_t len = static_cast<std::size_t>(rng() % (max_len + 1));
    std::vector<std::uint8_t> buf(len);
    for (std::size_t i = 0; i < len; ++i) buf[i] = static_cast<std::uint8_t>(rng() & 0xff);
    return buf;
}

void write_seed(const fs::path& dir, std::size_t index, const std::vector<std::uint8_t>& input) {
    fs::create_directories(dir);
    std::ofstream out(dir / (std::to_string(index) + ".bin"), std::ios::binary);
    out.write(reinterpret_cast<const char*>(input.data()),
              static_cast<std::streamsize>(input.size()));
}

}  // namespace

int execute_with_input(const std::string& exe_path, const std::vector<std::uint8_t>& input) {
    int fds[2];
    if (pipe(fds) != 0) return -1;

    pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        return -1;
    }
    if (pid == 0) {
        dup2(fds[0], STDIN_FILENO);
        close(fds[0]);
        close(fds[1]);
        // Keep target chatter out of the screening report.
        int devnull = open("/dev/null", O_WRONLY);
        if (devnull >= 0) {
            dup2(devnull, STDOUT_FILENO);
            dup2(devnull, STDERR_FILENO);
            close(devnull);
        }
        execl(exe_path.c_str(), exe_path.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(fds[0]);
    // The child may exit without draining stdin; EPIPE is fine then.
    signal(SIGPIPE, SIG_IGN);
    std::size_t written = 0;
    while (written < input.size()) {
        ssize_t n = write(fds[1], input.data() + written, input.size() - written);
        if (n <= 0) break;
        written += static_cast<std::size_t>(n);
    }
    close(fds[1]);

    int status = 0;
    if (waitpid(pid, &status, 0) != pid) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 1);
}

ScreenReport run_screen(const std::string& targets_dir, const ScreenConfig& config) {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(targets_dir, ec)) {
        if (!entry.is_regular_file()) continue;
        auto perms = entry.status().permissions();
        if ((perms & fs::perms::owner_exec) == fs::perms::none) continue;
        names.push_back(entry.path().filename().string());
    }
    if (ec) throw ScreenSetupError("cannot read targets directory: " + targets_dir);
    if (names.empty())
        throw ScreenSetupError("no built targets found in " + targets_dir +
                               " (build the rendered sources with the subject toolchain first)");
    std::sort(names.begin(), names.end());

    ScreenReport report;
    report.targets.resize(names.size());

    const long n = static_cast<long>(names.size());
#ifdef _OPENMP
    int jobs = std::max(1, config.jobs);
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
#endif
    for (long ti = 0; ti < n; ++ti) {
        const std::string& name = names[static_cast<std::size_t>(ti)];
        TargetScreenResult result;
        result.name = name;
        std::string exe = targets_dir + "/" + name;
        std::mt19937_64 rng(config.rng_seed ^ fnv1a(name));
        for (std::size_t i = 0; i < config.n_inputs; ++i) {
            std::vector<std::uint8_t> input = random_input(rng, config.max_input_len);
            int code = execute_with_input(exe, input);
            if (code == 0) {
                ++result.clean;
                if (config.keep_seeds)
                    write_seed(fs::path(targets_dir) / "seeds" / name, i, input);
            } else {
                ++result.crashed;
            }
        }
        result.valid = result.clean > 0;
        report.targets[static_cast<std::size_t>(ti)] = std::move(result);
    }

    for (const TargetScreenResult& r : report.targets) {
        if (r.valid)
            ++report.valid_count;
        else
            ++report.invalid_count;
    }
    return report;
}

std::string format_screen_report(const ScreenReport& report) {
    std::ostringstream out;
    for (const TargetScreenResult& r : report.targets) {
        out << r.name << ": " << (r.valid ? "valid" : "invalid") << " (" << r.clean << "/"
            << (r.clean + r.crashed) << " clean)\n";
    }
    out << "# screened " << report.targets.size() << " targets: " << report.valid_count
        << " valid, " << report.invalid_count << " invalid\n";
    return out.str();
}

}  // namespace ftg

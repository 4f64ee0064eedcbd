#include "nsv/errors.hpp"
#include "nsv/json_io.hpp"
#include "nsv/network.hpp"
#include "nsv/verifier.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

namespace nsv {

namespace {

namespace fs = std::filesystem;

std::string shell_quote(const std::string& s)
{
    std::string quoted = "'";
    for (char c : s) {
        if (c == '\'')
            quoted += "'\\''";
        else
            quoted += c;
    }
    quoted += "'";
    return quoted;
}

fs::path make_scratch_dir()
{
    std::random_device rd;
    std::uniform_int_distribution<unsigned long long> dist;
    for (int attempt = 0; attempt < 16; ++attempt) {
        fs::path dir = fs::temp_directory_path() /
                       ("nsv-adapter-" + std::to_string(dist(rd)));
        std::error_code ec;
        if (fs::create_directory(dir, ec))
            return dir;
    }
    throw Error("cannot create adapter scratch directory");
}

struct ScratchDir {
    fs::path path;
    bool owned = false;

    ~ScratchDir()
    {
        if (owned) {
            std::error_code ec;
            fs::remove_all(path, ec);
        }
    }
};

} // namespace

Verdict external_verify(const VerificationQuery& query,
                        const ExternalAdapterConfig& adapter)
{
    if (query.network == nullptr)
        throw Error("verification query carries no network");
    if (adapter.executable.empty())
        throw Error("external adapter: no executable configured");

    const auto start = std::chrono::steady_clock::now();

    ScratchDir scratch;
    if (adapter.work_dir.empty()) {
        scratch.path = make_scratch_dir();
        scratch.owned = true;
    } else {
        scratch.path = adapter.work_dir;
        fs::create_directories(scratch.path);
    }

    const fs::path nnet_path = scratch.path / "network.nnet";
    const fs::path query_path = scratch.path / "query.json";
    const fs::path verdict_path = scratch.path / "verdict.json";
    save_nnet(*query.network, nnet_path);
    save_json(adapter_query_to_json(nnet_path.string(), query.box, query.condition,
                                    query.timeout_s),
              query_path);
    std::error_code ec;
    fs::remove(verdict_path, ec);

    const std::string cmd = shell_quote(adapter.executable.string()) + " " +
                            shell_quote(query_path.string()) + " " +
                            shell_quote(verdict_path.string());
    const int rc = std::system(cmd.c_str());
    if (rc == -1)
        throw Error("external adapter: failed to launch " +
                    adapter.executable.string());
    if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0)
        throw Error("external adapter: " + adapter.executable.string() +
                    " exited with status " +
                    std::to_string(WIFEXITED(rc) ? WEXITSTATUS(rc) : -1));

    if (!fs::exists(verdict_path))
        throw ProtocolError("external adapter: no verdict file produced");

    Json verdict_json;
    try {
        verdict_json = load_json(verdict_path);
    } catch (const Error& e) {
        throw ProtocolError(std::string("external adapter: un| verdict file: ") +
                            e.what());
    }

    Verdict verdict = verdict_file_from_json(verdict_json);
    verdict.backend = "external:" + adapter.executable.filename().string();
    verdict.stats.time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (verdict.status == Status::Sat) {
        // Never trust a remote witness: re-check in-box membership and the
        // condition against our own forward evaluation.
        if (static_cast<std::size_t>(verdict.witness->size()) !=
            query.network->input_dim())
            throw ProtocolError("external adapter: witness length does not match "
                                "the network input dimension");
        if (!check_witness(*query.network, query.box, query.condition,
                           *verdict.witness, kWitnessSlack))
            throw ProtocolError("external adapter: witness fails the in-box or "
                                "condition check");
    }
    return verdict;
}

} // namespace nsv

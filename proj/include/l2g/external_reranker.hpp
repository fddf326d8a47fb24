#pragma once

#include <csignal>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"
#include "l2g/rerankers.hpp"

namespace l2g {

// Bridge to an out-of-process listwise reranker speaking newline-delimited
// JSON over its standard streams. One request, one response, in order:
//   request  {"qid": str, "query": str|null, "docids": [str, ...]}
//   response {"docids": [str, ...]}   (a permutation of the request ids)
// Any protocol violation or timeout aborts the run; there is no fallback.
class ExternalReranker final : public Reranker {
public:
    ExternalReranker(std::string command, const Interner& docs,
                     std::uint64_t timeout_ms = 60000)
        : command_(std::move(command)), docs_(docs), timeout_ms_(timeout_ms) {
        spawn();
    }

    ~ExternalReranker() override { shutdown(); }

    ExternalReranker(const ExternalReranker&) = delete;
    ExternalReranker& operator=(const ExternalReranker&) = delete;

private:
    std::vector<DocRef> rerank_window(const QueryRecord& query,
                                      std::span<const DocRef> window) override {
        nlohmann::json request;
        request["qid"] = query.qid;
        if (query.text)
            request["query"] = *query.text;
        else
            request["query"] = nullptr;
        auto& ids = request["docids"] = nlohmann::json::array();
        for (const auto& d : window)
            ids.push_back(docs_.external_id(d));

        send_line(request.dump());
        std::string line = read_line();

        nlohmann::json response;
        try {
            response = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw RerankerError(std::string("external reranker sent invalid JSON: ") +
                                e.what());
        }
        if (!response.contains("docids") || !response["docids"].is_array())
            throw RerankerError("external reranker response lacks a docids array");

        std::vector<DocRef> out;
        out.reserve(window.size());
        for (const auto& id : response["docids"]) {
            if (!id.is_string())
                throw RerankerError("external reranker returned a non-string docid");
            auto d = docs_.find(id.get<std::string>());
            if (!d)
                throw RerankerError("external reranker returned unknown docid '" +
                                    id.get<std::string>() + "'");
            out.push_back(*d);
        }
        // The base class re-checks the permutation contract and raises the
        // missing/extra-id violations.
        return out;
    }

    void spawn() {
        int to_child[2];
        int from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw RerankerError("failed to create pipes for external reranker");
        pid_ = fork();
        if (pid_ < 0)
            throw RerankerError("failed to fork external reranker");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
        signal(SIGPIPE, SIG_IGN);
    }

    void send_line(const std::string& payload) {
        std::string line = payload + "\n";
        std::size_t off = 0;
        while (off < line.size()) {
            ssize_t n = ::write(write_fd_, line.data() + off, line.size() - off);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw RerankerError(std::string("external reranker write failed: ") +
                                    std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line() {
        while (true) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            pollfd pfd{read_fd_, POLLIN, 0};
            int ready = poll(&pfd, 1, static_cast<int>(timeout_ms_));
            if (ready == 0)
                throw RerankerError("external reranker timed out after " +
                                    std::to_string(timeout_ms_) + " ms");
            if (ready < 0) {
                if (errno == EINTR)
                    continue;
                throw RerankerError(std::string("external reranker poll failed: ") +
                                    std::strerror(errno));
            }
            char chunk[4096];
            ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw RerankerError(std::string("external reranker read failed: ") +
                                    std::strerror(errno));
            }
            if (n == 0)
                throw RerankerError("external reranker closed its output stream");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void shutdown() {
        if (write_fd_ >= 0)
            close(write_fd_);
        if (read_fd_ >= 0)
            close(read_fd_);
        if (pid_ > 0) {
            int status = 0;
            for (int grace = 0; grace < 50; ++grace) {
                if (waitpid(pid_, &status, WNOHANG) == pid_)
                    return;
                usleep(10000);
            }
            kill(pid_, SIGKILL);
            waitpid(pid_, &status, 0);
        }
    }

    std::string command_;
    const Interner& docs_;
    std::uint64_t timeout_ms_;
    std::string buffer_;
    pid_t pid_ = -1;
    int write_fd_ = -1;
    int read_fd_ = -1;
};

} // namespace l2g

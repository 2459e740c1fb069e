// Copyright 2026 The vtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vtrack/event_store.h"

#include "vtrack/error.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vtrack {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_error(const std::string& what, int err)
{
    auto code = (err == ENOSPC || err == EDQUOT) ? ErrorCode::StorageFull : ErrorCode::IoFailure;
    throw Error(code, what + ": " + std::strerror(err));
}

class PosixAppendFile : public AppendFile {
public:
    PosixAppendFile(std::string path, int fd) : path_(std::move(path)), fd_(fd) {}
    ~PosixAppendFile() override { ::close(fd_); }

    void write(std::string_view data) override
    {
        while (!data.empty()) {
            ssize_t n = ::write(fd_, data.data(), data.size());
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                io_error("write " + path_, errno);
            }
            data.remove_prefix(static_cast<std::size_t>(n));
        }
    }

    void sync() override
    {
        if (::fdatasync(fd_) != 0) {
            io_error("fdatasync " + path_, errno);
        }
    }

    void truncate(std::uint64_t size) override
    {
        if (::ftruncate(fd_, static_cast<off_t>(size)) != 0) {
            io_error("truncate " + path_, errno);
        }
    }

private:
    std::string path_;
    int fd_;
};

void sync_dir(const std::string& dir)
{
    int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) {
        io_error("open " + dir, errno);
    }
    int rc = ::fsync(fd);
    int err = errno;
    ::close(fd);
    if (rc != 0) {
        io_error("fsync " + dir, err);
    }
}

class PosixStorage : public Storage {
public:
    void make_dirs(const std::string& dir) override
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            io_error("mkdir " + dir, ec.value());
        }
    }

    std::vector<std::string> list(const std::string& dir) override
    {
        std::vector<std::string> out;
        std::error_code ec;
        for (const auto& e : fs::directory_iterator(dir, ec)) {
            if (e.is_regular_file()) {
                out.push_back(e.path().filename().string());
            }
        }
        if (ec) {
            io_error("list " + dir, ec.value());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::string read_file(const std::string& path) override
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            io_error("open " + path, errno ? errno : ENOENT);
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::uint64_t file_size(const std::string& path) override
    {
        std::error_code ec;
        auto n = fs::file_size(path, ec);
        if (ec) {
            io_error("stat " + path, ec.value());
        }
        return n;
    }

    std::unique_ptr<AppendFile> open_append(const std::string& path) override
    {
        int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (fd < 0) {
            io_error("open " + path, errno);
        }
        return std::make_unique<PosixAppendFile>(path, fd);
    }

    void write_atomic(const std::string& path, std::string_view data) override
    {
        std::string tmp = path + ".tmp";
        {
            int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
            if (fd < 0) {
                io_error("open " + tmp, errno);
            }
            PosixAppendFile f(tmp, fd);
            f.write(data);
            f.sync();
        }
        if (::rename(tmp.c_str(), path.c_str()) != 0) {
            io_error("rename " + tmp, errno);
        }
        sync_dir(fs::path(path).parent_path().string());
    }

    void truncate(const std::string& path, std::uint64_t size) override
    {
        if (::truncate(path.c_str(), static_cast<off_t>(size)) != 0) {
            io_error("truncate " + path, errno);
        }
    }

    void remove(const std::string& path) override
    {
        if (::unlink(path.c_str()) != 0 && errno != ENOENT) {
            io_error("unlink " + path, errno);
        }
    }
};

// Parses "<prefix><digits><suffix>".
std::optional<std::uint64_t> numbered(std::string_view name, std::string_view prefix, std::string_view suffix)
{
    if (name.size() <= prefix.size() + suffix.size() || name.substr(0, prefix.size()) != prefix
        || name.substr(name.size() - suffix.size()) != suffix) {
        return std::nullopt;
    }
    auto digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || p != digits.data() + digits.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace

std::shared_ptr<Storage> posix_storage() { return std::make_shared<PosixStorage>(); }

EventStore::EventStore(StoreOptions options, std::shared_ptr<Storage> storage)
: options_(std::move(options))
, storage_(std::move(storage))
{
}

std::string EventStore::segment_path(std::uint64_t first_seq) const
{
    return options_.dir + "/events-" + std::to_string(first_seq) + ".log";
}

std::string EventStore::snapshot_path(std::uint64_t seq) const
{
    return options_.dir + "/state-" + std::to_string(seq) + ".snap";
}

std::unique_ptr<EventStore> EventStore::open(StoreOptions options, std::shared_ptr<Storage> storage)
{
    if (options.dir.empty()) {
        throw Error(ErrorCode::InvalidConfig, "store directory is empty");
    }
    if (options.segment_bytes == 0) {
        throw Error(ErrorCode::InvalidConfig, "segment size must be positive");
    }
    std::unique_ptr<EventStore> store(new EventStore(std::move(options), std::move(storage)));
    store->storage_->make_dirs(store->options_.dir);
    store->scan();
    return store;
}

void EventStore::scan()
{
    std::vector<std::uint64_t> firsts;
    for (const auto& name : storage_->list(options_.dir)) {
        if (name.size() > 4 && name.substr(name.size() - 4) == ".tmp") {
            storage_->remove(options_.dir + "/" + name);
            report_.removed_temp_files.push_back(name);
        }
        else if (auto first = numbered(name, "events-", ".log")) {
            firsts.push_back(*first);
        }
    }
    std::sort(firsts.begin(), firsts.end());

    std::uint64_t expect = 1;
    for (std::size_t i = 0; i < firsts.size(); ++i) {
        const bool last_segment = i + 1 == firsts.size();
        SegmentInfo seg{segment_path(firsts[i]), firsts[i], firsts[i] - 1, 0};
        if (firsts[i] != expect) {
            throw CorruptLogError(expect, "segment " + seg.path + " does not continue the log");
        }
        std::string text = storage_->read_file(seg.path);
        std::size_t keep = text.size();
        if (last_segment) {
            std::size_t nl = text.rfind('\n');
            keep = nl == std::string::npos ? 0 : nl + 1;
        }
        else if (!text.empty() && text.back() != '\n') {
            throw CorruptLogError(expect + std::count(text.begin(), text.end(), '\n'), "truncated record in sealed segment");
        }

        std::size_t pos = 0;
        std::size_t group_start = 0;
        std::uint64_t group_left = 0;
        std::uint64_t group_first_seq = 0;
        while (pos < keep) {
            std::size_t nl = text.find('\n', pos);
            LogRecord rec = decode_record(std::string_view(text).substr(pos, nl - pos), expect);
            if (group_left > 0) {
                --group_left;
            }
            else if (auto* b = std::get_if<record::Batch>(&rec.body); b && b->count > 0) {
                group_start = pos;
                group_left = b->count;
                group_first_seq = expect;
            }
            ++expect;
            pos = nl + 1;
        }
        if (group_left > 0) {
            if (!last_segment) {
                throw CorruptLogError(expect, "record group cut short in sealed segment");
            }
            keep = group_start;
            expect = group_first_seq;
        }
        if (keep < text.size()) {
            storage_->truncate(seg.path, keep);
            report_.repaired_bytes += text.size() - keep;
        }
        seg.last_seq = expect - 1;
        seg.bytes = keep;
        segments_.push_back(seg);
    }
    last_seq_ = expect - 1;
}

std::uint64_t EventStore::append(const RecordBody& body) { return append_batch({body}); }

std::uint64_t EventStore::append_batch(const std::vector<RecordBody>& bodies)
{
    std::lock_guard lock(mu_);
    if (failed_) {
        throw Error(ErrorCode::IoFailure, "event store halted after an earlier storage failure");
    }
    if (bodies.empty()) {
        return last_seq_ + 1;
    }
    return write_lines(bodies);
}

std::uint64_t EventStore::write_lines(const std::vector<RecordBody>& bodies)
{
    const std::uint64_t first = last_seq_ + 1;
    std::string data;
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        data += encode_record(LogRecord{first + i, bodies[i]});
        data += '\n';
    }
    try {
        if (segments_.empty() || (segments_.back().bytes > 0 && segments_.back().bytes + data.size() > options_.segment_bytes)) {
            tail_.reset();
            segments_.push_back(SegmentInfo{segment_path(first), first, first - 1, 0});
        }
        if (!tail_) {
            tail_ = storage_->open_append(segments_.back().path);
        }
    }
    catch (const Error&) {
        failed_ = true;
        throw;
    }
    SegmentInfo& seg = segments_.back();
    try {
        tail_->write(data);
        if (options_.sync) {
            tail_->sync();
        }
    }
    catch (const Error&) {
        failed_ = true;
        try {
            tail_->truncate(seg.bytes);
        }
        catch (const Error&) {
            // Left for the torn-tail repair on the next open.
        }
        throw;
    }
    seg.bytes += data.size();
    seg.last_seq = first + bodies.size() - 1;
    last_seq_ = seg.last_seq;
    return first;
}

std::uint64_t EventStore::last_seq() const
{
    std::lock_guard lock(mu_);
    return last_seq_;
}

bool EventStore::failed() const
{
    std::lock_guard lock(mu_);
    return failed_;
}

std::vector<SegmentInfo> EventStore::segments() const
{
    std::lock_guard lock(mu_);
    return segments_;
}

void EventStore::for_each_from(std::uint64_t seq, const std::function<void(const LogRecord&)>& fn) const
{
    std::vector<SegmentInfo> segs;
    std::uint64_t last = 0;
    {
        std::lock_guard lock(mu_);
        segs = segments_;
        last = last_seq_;
    }
    if (seq < 1 || seq > last + 1) {
        throw Error(ErrorCode::SeqOutOfRange,
                    "seq " + std::to_string(seq) + " outside 1.." + std::to_string(last + 1));
    }
    for (const auto& seg : segs) {
        if (seg.last_seq < seq || seg.first_seq > last) {
            continue;
        }
        std::string text = storage_->read_file(seg.path);
        std::uint64_t expect = seg.first_seq;
        std::size_t pos = 0;
        while (expect <= std::min(seg.last_seq, last)) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string::npos) {
                throw CorruptLogError(expect, "record missing from " + seg.path);
            }
            if (expect >= seq) {
                fn(decode_record(std::string_view(text).substr(pos, nl - pos), expect));
            }
            else if (text.compare(pos, std::to_string(expect).size() + 1, std::to_string(expect) + "\t") != 0) {
                throw CorruptLogError(expect, "sequence gap in " + seg.path);
            }
            ++expect;
            pos = nl + 1;
        }
    }
}

std::vector<LogRecord> EventStore::read_from(std::uint64_t seq) const
{
    std::vector<LogRecord> out;
    for_each_from(seq, [&](const LogRecord& r) { out.push_back(r); });
    return out;
}

void EventStore::write_snapshot(const TrackingState& state) { write_snapshot(state.last_seq(), state.serialize()); }

void EventStore::write_snapshot(std::uint64_t seq, std::string_view text)
{
    storage_->write_atomic(snapshot_path(seq), text);
    auto seqs = snapshot_seqs();
    for (std::size_t i = options_.keep_snapshots; i < seqs.size(); ++i) {
        storage_->remove(snapshot_path(seqs[i]));
    }
}

std::vector<std::uint64_t> EventStore::snapshot_seqs() const
{
    std::vector<std::uint64_t> out;
    for (const auto& name : storage_->list(options_.dir)) {
        if (auto seq = numbered(name, "state-", ".snap")) {
            out.push_back(*seq);
        }
    }
    std::sort(out.rbegin(), out.rend());
    return out;
}

std::string EventStore::read_snapshot(std::uint64_t seq) const
{
    try {
        return storage_->read_file(snapshot_path(seq));
    }
    catch (const Error& e) {
        throw Error(ErrorCode::CorruptSnapshot, e.what());
    }
}

std::uint64_t EventStore::disk_bytes() const
{
    std::uint64_t total = 0;
    for (const auto& name : storage_->list(options_.dir)) {
        total += storage_->file_size(options_.dir + "/" + name);
    }
    return total;
}

RestoreResult restore(const EventStore& store, std::shared_ptr<const BuildingGraph> graph, EngineConfig config)
{
    std::vector<std::string> warnings;
    const std::uint64_t last = store.last_seq();
    for (std::uint64_t seq : store.snapshot_seqs()) {
        if (seq > last) {
            warnings.push_back("snapshot state-" + std::to_string(seq) + " is ahead of the log; ignored");
            continue;
        }
        std::optional<TrackingState> state;
        try {
            state.emplace(TrackingState::deserialize(graph, config, store.read_snapshot(seq)));
            if (state->last_seq() != seq) {
                throw Error(ErrorCode::CorruptSnapshot, "file name and content disagree on seq");
            }
        }
        catch (const Error& e) {
            if (e.code() != ErrorCode::CorruptSnapshot) {
                throw;
            }
            warnings.push_back("snapshot state-" + std::to_string(seq) + " unusable (" + e.what()
                               + "); falling back");
            continue;
        }
        store.for_each_from(seq + 1, [&](const LogRecord& r) { state->apply(r); });
        return RestoreResult{std::move(*state), seq, std::move(warnings)};
    }
    TrackingState state(std::move(graph), config);
    store.for_each_from(1, [&](const LogRecord& r) { state.apply(r); });
    return RestoreResult{std::move(state), 0, std::move(warnings)};
}

} // namespace vtrack

#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "airshadow/core.hpp"

namespace airshadow {

struct CollectorConfig {
    std::string bind_address = "0.0.0.0";
    std::uint16_t port = 7007; // 0 picks a free port
    std::filesystem::path data_dir = "data";
    std::size_t max_line = 4096;
    bool strict = false;
    std::size_t fsync_records = 100;
    std::chrono::milliseconds fsync_interval{1000};
    bool handle_signals = false; // stop on SIGINT/SIGTERM

    /// Applies AIR_DATA_DIR when set.
    void apply_environment();
};

/// Parses `host:port`. Throws Error(ConfigMismatch).
std::pair<std::string, std::uint16_t> parse_bind(std::string_view text);

struct Ack {
    bool ok = true;
    std::string reason; // empty iff ok

    static Ack success() { return {}; }
    static Ack error(std::string reason) { return {false, std::move(reason)}; }
    /// `OK` or `ERR <reason>`, without the newline.
    std::string to_line() const;
    bool operator==(const Ack&) const = default;
};

struct RecordOffset {
    std::string date; // YYYY-MM-DD of the file
    std::uint64_t offset = 0; // byte offset of the record within it

    auto operator<=>(const RecordOffset&) const = default;
};

/// YYYY-MM-DD of a unix timestamp in UTC.
std::string utc_date(double ts);

/// Append-only store of `<dir>/<device>/<date>.ndjson` files, one writer per
/// device. A device never moves back to an earlier date, so offsets grow
/// strictly even when timestamps arrive out of order. Thread-safe.
class SampleStore {
public:
    /// Creates `dir` if needed. Throws Error(StorageFailure).
    explicit SampleStore(std::filesystem::path dir, std::size_t fsync_records = 100,
                         std::chrono::milliseconds fsync_interval = std::chrono::milliseconds(1000));
    ~SampleStore();
    SampleStore(const SampleStore&) = delete;
    SampleStore& operator=(const SampleStore&) = delete;

    /// Throws Error(StorageFailure).
    RecordOffset append(const PollutantSample& s);
    /// fsyncs writers whose last sync is older than the interval.
    void sync_due();
    /// fsyncs everything.
    void flush();

    std::size_t records() const;
    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    struct Writer;
    Writer& writer_for(const std::string& device);

    std::filesystem::path dir_;
    std::size_t fsync_records_;
    std::chrono::milliseconds fsync_interval_;
    mutable std::mutex map_mutex_;
    std::map<std::string, std::unique_ptr<Writer>> writers_;
};

/// Handles one protocol line (without its terminator). Reasons:
/// `parse_error`, `validation_error(<field>)`, `line_too_long`, `storage`.
/// Outside strict mode invalid readings are dropped and the rest stored.
Ack ingest_line(std::string_view line, SampleStore& store, const CollectorConfig& cfg);

/// TCP line server. The constructor binds and opens the store; run() serves
/// until stop() is called from any thread.
class Collector {
public:
    /// Throws Error(BindFailure | StorageFailure).
    explicit Collector(CollectorConfig cfg);
    ~Collector();

    std::uint16_t port() const;
    std::string address() const;
    SampleStore& store();

    void run();
    void stop();

    std::size_t acks_ok() const;
    std::size_t acks_err() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace airshadow

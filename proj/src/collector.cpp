#include "airshadow/collector.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <set>
#include <thread>
#include <vector>

#include <boost/asio.hpp>

#include "airshadow/ingest.hpp"

namespace airshadow {

namespace asio = boost::asio;
using asio::ip::tcp;

void CollectorConfig::apply_environment() {
    if (const char* env = std::getenv("AIR_DATA_DIR"); env != nullptr && *env != '\0') data_dir = env;
}

std::pair<std::string, std::uint16_t> parse_bind(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) throw Error(ErrorKind::ConfigMismatch, "bind", "expected host:port");
    std::string host(text.substr(0, colon));
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    auto port = parse_real(text.substr(colon + 1));
    if (!port || *port < 0 || *port > 65535 || *port != std::floor(*port) || host.empty())
        throw Error(ErrorKind::ConfigMismatch, "bind", "bad host:port '" + std::string(text) + "'");
    return {host, static_cast<std::uint16_t>(*port)};
}

std::string Ack::to_line() const { return ok ? "OK" : "ERR " + reason; }

std::string utc_date(double ts) {
    using namespace std::chrono;
    const auto days = static_cast<long>(std::floor(ts / 86400.0));
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

struct SampleStore::Writer {
    std::mutex m;
    int fd = -1;
    std::string date;
    std::uint64_t offset = 0;
    std::size_t unsynced = 0;
    std::size_t count = 0;
    std::chrono::steady_clock::time_point last_sync = std::chrono::steady_clock::now();

    ~Writer() {
        if (fd >= 0) {
            ::fsync(fd);
            ::close(fd);
        }
    }

    void sync() {
        if (fd >= 0 && unsynced > 0 && ::fsync(fd) != 0)
            throw Error(ErrorKind::StorageFailure, date, std::strerror(errno));
        unsynced = 0;
        last_sync = std::chrono::steady_clock::now();
    }
};

SampleStore::SampleStore(std::filesystem::path dir, std::size_t fsync_records, std::chrono::milliseconds fsync_interval)
    : dir_(std::move(dir)), fsync_records_(std::max<std::size_t>(fsync_records, 1)), fsync_interval_(fsync_interval) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw Error(ErrorKind::StorageFailure, dir_.string(), ec ? ec.message() : "not a directory");
    if (::access(dir_.c_str(), W_OK) != 0) throw Error(ErrorKind::StorageFailure, dir_.string(), "not writable");
}

SampleStore::~SampleStore() = default;

SampleStore::Writer& SampleStore::writer_for(const std::string& device) {
    std::lock_guard lock(map_mutex_);
    auto& slot = writers_[device];
    if (!slot) slot = std::make_unique<Writer>();
    return *slot;
}

RecordOffset SampleStore::append(const PollutantSample& s) {
    Writer& w = writer_for(s.device.str());
    std::lock_guard lock(w.m);
    std::string date = utc_date(s.ts);
    if (date < w.date) date = w.date;
    if (w.fd < 0 || date != w.date) {
        if (w.fd >= 0) {
            w.sync();
            ::close(w.fd);
            w.fd = -1;
        }
        const auto device_dir = dir_ / s.device.str();
        std::error_code ec;
        std::filesystem::create_directories(device_dir, ec);
        if (ec) throw Error(ErrorKind::StorageFailure, device_dir.string(), ec.message());
        const auto path = device_dir / (date + ".ndjson");
        const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (fd < 0) throw Error(ErrorKind::StorageFailure, path.string(), std::strerror(errno));
        struct stat st {};
        if (::fstat(fd, &st) != 0) {
            ::close(fd);
            throw Error(ErrorKind::StorageFailure, path.string(), std::strerror(errno));
        }
        w.fd = fd;
        w.date = date;
        w.offset = static_cast<std::uint64_t>(st.st_size);
    }
    const std::string line = to_ndjson(s) + "\n";
    const RecordOffset at{w.date, w.offset};
    std::size_t done = 0;
    while (done < line.size()) {
        const auto n = ::write(w.fd, line.data() + done, line.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorKind::StorageFailure, w.date, std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
    w.offset += line.size();
    ++w.unsynced;
    ++w.count;
    if (w.unsynced >= fsync_records_ || std::chrono::steady_clock::now() - w.last_sync >= fsync_interval_) w.sync();
    return at;
}

void SampleStore::sync_due() {
    std::vector<Writer*> all;
    {
        std::lock_guard lock(map_mutex_);
        for (auto& [_, w] : writers_) all.push_back(w.get());
    }
    const auto now = std::chrono::steady_clock::now();
    for (Writer* w : all) {
        std::lock_guard lock(w->m);
        if (w->unsynced > 0 && now - w->last_sync >= fsync_interval_) w->sync();
    }
}

void SampleStore::flush() {
    std::lock_guard lock(map_mutex_);
    for (auto& [_, w] : writers_) {
        std::lock_guard wl(w->m);
        w->sync();
    }
}

std::size_t SampleStore::records() const {
    std::size_t n = 0;
    std::lock_guard lock(map_mutex_);
    for (const auto& [_, w] : writers_) {
        std::lock_guard wl(w->m);
        n += w->count;
    }
    return n;
}

Ack ingest_line(std::string_view line, SampleStore& store, const CollectorConfig& cfg) {
    if (line.size() > cfg.max_line) return Ack::error("line_too_long");
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    PollutantSample s;
    try {
        s = parse_sample_json(line);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidDevice) return Ack::error("validation_error(dev)");
        return Ack::error("parse_error");
    }
    if (!std::isfinite(s.ts)) return Ack::error("validation_error(ts)");
    if (cfg.strict) {
        if (auto err = check_sample(s)) {
            const bool per_field = err->kind() != ErrorKind::EmptyReadings;
            return Ack::error("validation_error(" + (per_field ? err->subject() : std::string("readings")) + ")");
        }
    } else {
        std::string first_bad;
        for (auto p : kAllPollutants) {
            if (!s.readings[p]) continue;
            PollutantSample probe{s.ts, s.device, {}};
            probe.readings[p] = s.readings[p];
            if (check_sample(probe)) {
                if (first_bad.empty()) first_bad = token(p);
                s.readings[p].reset();
            }
        }
        if (s.readings.count() == 0)
            return Ack::error("validation_error(" + (first_bad.empty() ? std::string("readings") : first_bad) + ")");
    }
    try {
        store.append(s);
    } catch (const Error&) {
        return Ack::error("storage");
    }
    return Ack::success();
}

namespace {

class Session : public std::enable_shared_from_this<Session> {
public:
    Session(tcp::socket socket, SampleStore& store, const CollectorConfig& cfg, std::atomic<std::size_t>& ok,
            std::atomic<std::size_t>& err)
        : socket_(std::move(socket)), store_(store), cfg_(cfg), ok_(ok), err_(err) {}

    void start() { read(); }

    void close() {
        auto self = shared_from_this();
        asio::post(socket_.get_executor(), [self] {
            boost::system::error_code ec;
            self->socket_.shutdown(tcp::socket::shutdown_both, ec);
            self->socket_.close(ec);
        });
    }

private:
    void read() {
        auto self = shared_from_this();
        socket_.async_read_some(asio::buffer(buf_), [self](boost::system::error_code ec, std::size_t n) {
            if (ec) return;
            self->consume(std::string_view(self->buf_.data(), n));
        });
    }

    void consume(std::string_view chunk) {
        out_.clear();
        for (char c : chunk) {
            if (c != '\n') {
                if (line_.size() <= cfg_.max_line)
                    line_.push_back(c);
                else
                    overflow_ = true;
                continue;
            }
            const Ack ack = overflow_ ? Ack::error("line_too_long") : ingest_line(line_, store_, cfg_);
            (ack.ok ? ok_ : err_).fetch_add(1, std::memory_order_relaxed);
            out_ += ack.to_line();
            out_ += '\n';
            line_.clear();
            overflow_ = false;
        }
        if (out_.empty()) {
            read();
            return;
        }
        auto self = shared_from_this();
        asio::async_write(socket_, asio::buffer(out_), [self](boost::system::error_code ec, std::size_t) {
            if (!ec) self->read();
        });
    }

    tcp::socket socket_;
    SampleStore& store_;
    const CollectorConfig& cfg_;
    std::atomic<std::size_t>& ok_;
    std::atomic<std::size_t>& err_;
    std::array<char, 4096> buf_{};
    std::string line_;
    bool overflow_ = false;
    std::string out_;
};

} // namespace

struct Collector::Impl {
    CollectorConfig cfg;
    SampleStore store;
    asio::io_context io;
    tcp::acceptor acceptor{io};
    asio::steady_timer sync_timer{io};
    asio::signal_set signals{io};
    std::mutex sessions_mutex;
    std::vector<std::weak_ptr<Session>> sessions;
    std::atomic<std::size_t> ok{0};
    std::atomic<std::size_t> err{0};
    std::atomic<bool> stopping{false};

    explicit Impl(CollectorConfig c)
        : cfg(std::move(c)), store(cfg.data_dir, cfg.fsync_records, cfg.fsync_interval) {
        boost::system::error_code ec;
        const auto addr = asio::ip::make_address(cfg.bind_address, ec);
        if (ec) throw Error(ErrorKind::BindFailure, cfg.bind_address, ec.message());
        const tcp::endpoint ep(addr, cfg.port);
        const std::string where = cfg.bind_address + ":" + std::to_string(cfg.port);
        acceptor.open(ep.protocol(), ec);
        if (!ec) acceptor.set_option(tcp::acceptor::reuse_address(true), ec);
        if (!ec) acceptor.bind(ep, ec);
        if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
        if (ec) throw Error(ErrorKind::BindFailure, where, ec.message());
    }

    void accept() {
        acceptor.async_accept(asio::make_strand(io), [this](boost::system::error_code ec, tcp::socket socket) {
            if (ec) {
                if (stopping) return;
                accept();
                return;
            }
            auto s = std::make_shared<Session>(std::move(socket), store, cfg, ok, err);
            {
                std::lock_guard lock(sessions_mutex);
                std::erase_if(sessions, [](const auto& w) { return w.expired(); });
                sessions.push_back(s);
            }
            s->start();
            accept();
        });
    }

    void schedule_sync() {
        sync_timer.expires_after(std::max(cfg.fsync_interval / 4, std::chrono::milliseconds(10)));
        sync_timer.async_wait([this](boost::system::error_code ec) {
            if (ec || stopping) return;
            try {
                store.sync_due();
            } catch (const Error&) {
                // surfaced to clients on their next append
            }
            schedule_sync();
        });
    }

    void shutdown() {
        if (stopping.exchange(true)) return;
        asio::post(io, [this] {
            boost::system::error_code ec;
            acceptor.close(ec);
            sync_timer.cancel();
            signals.cancel(ec);
            std::lock_guard lock(sessions_mutex);
            for (auto& w : sessions)
                if (auto s = w.lock()) s->close();
        });
    }
};

Collector::Collector(CollectorConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}

Collector::~Collector() {
    stop();
    try {
        impl_->store.flush();
    } catch (const Error&) {
    }
}

std::uint16_t Collector::port() const { return impl_->acceptor.local_endpoint().port(); }

std::string Collector::address() const {
    const auto ep = impl_->acceptor.local_endpoint();
    return ep.address().to_string() + ":" + std::to_string(ep.port());
}

SampleStore& Collector::store() { return impl_->store; }

void Collector::run() {
    if (impl_->cfg.handle_signals) {
        impl_->signals.add(SIGINT);
        impl_->signals.add(SIGTERM);
        impl_->signals.async_wait([this](boost::system::error_code ec, int) {
            if (!ec) stop();
        });
    }
    impl_->accept();
    impl_->schedule_sync();
    const unsigned extra = std::max(1u, std::thread::hardware_concurrency()) - 1;
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < std::min(extra, 3u); ++i) pool.emplace_back([this] { impl_->io.run(); });
    impl_->io.run();
    for (auto& t : pool) t.join();
    impl_->store.flush();
}

void Collector::stop() { impl_->shutdown(); }

std::size_t Collector::acks_ok() const { return impl_->ok.load(); }
std::size_t Collector::acks_err() const { return impl_->err.load(); }

} // namespace airshadow

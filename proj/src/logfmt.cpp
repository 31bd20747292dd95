#include "nearnote/logfmt.hpp"

#include <algorithm>

#include "nearnote/errors.hpp"

namespace nearnote {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

std::optional<LogLine> parse_one(const std::vector<std::string_view>& tok,
                                 std::string& reason) {
    LogLine out;
    std::size_t i = 0;
    if (tok.size() < 8) {
        reason = "too few fields";
        return std::nullopt;
    }
    if (tok[i] == "Entrou") {
        out.direction = PresenceDirection::Entered;
    } else if (tok[i] == "Saiu") {
        out.direction = PresenceDirection::Exited;
    } else {
        reason = "expected 'Entrou' or 'Saiu'";
        return std::nullopt;
    }
    ++i;
    if (tok[i] == "conhecido") {
        out.known = true;
    } else if (tok[i] == "desconhecido") {
        out.known = false;
    } else {
        reason = "expected 'conhecido' or 'desconhecido'";
        return std::nullopt;
    }
    ++i;
    if (tok[i] != "-") {
        reason = "expected '-' separator";
        return std::nullopt;
    }
    ++i;
    // Name tokens run until the MAC-shaped token.
    std::string name;
    std::optional<DeviceId> device;
    for (; i < tok.size(); ++i) {
        if (auto id = DeviceId::try_parse(tok[i])) {
            device = std::move(id);
            ++i;
            break;
        }
        if (tok[i] == "Time:") break;
        if (!name.empty()) name.push_back(' ');
        name += std::string(tok[i]);
    }
    if (!device) {
        reason = "missing device id";
        return std::nullopt;
    }
    out.device = *device;
    if (!name.empty()) out.name = name;

    if (i + 2 >= tok.size() || tok[i] != "Time:") {
        reason = "missing 'Time:' field";
        return std::nullopt;
    }
    const auto at = parse_datetime(tok[i + 1], tok[i + 2]);
    if (!at) {
        reason = "bad date/time";
        return std::nullopt;
    }
    out.at = *at;
    i += 3;

    if (i + 1 >= tok.size() || tok[i] != "Coord:") {
        reason = "missing 'Coord:' field";
        return std::nullopt;
    }
    const std::string_view coord = tok[i + 1];
    const auto semi = coord.find(';');
    if (semi == std::string_view::npos) {
        reason = "coordinate missing ';'";
        return std::nullopt;
    }
    const auto lat = parse_coord(coord.substr(0, semi));
    const auto lon = parse_coord(coord.substr(semi + 1));
    if (!lat || !lon) {
        reason = "unparseable coordinate";
        return std::nullopt;
    }
    if (*lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
        reason = "coordinate out of bounds";
        return std::nullopt;
    }
    out.coord = GeoPoint{*lat, *lon};
    i += 2;

    if (i != tok.size()) {
        reason = "trailing fields";
        return std::nullopt;
    }
    return out;
}

}  // namespace

std::string render_log_line(const LogLine& line) {
    std::string out;
    out += line.direction == PresenceDirection::Entered ? "Entrou" : "Saiu";
    out += line.known ? " conhecido - " : " desconhecido - ";
    if (line.name && !line.name->empty()) {
        out += *line.name;
        out.push_back(' ');
    }
    out += line.device.str();
    out += "\tTime: ";
    out += render_datetime(line.at);
    out += "\tCoord: ";
    out += render_coord(line.coord.lat);
    out.push_back(';');
    out += render_coord(line.coord.lon);
    return out;
}

LogLine log_line_from_event(const PresenceEvent& event) {
    LogLine line;
    line.direction = event.kind;
    line.known = event.known;
    line.name = event.advertised_name;
    line.device = event.device;
    line.at = event.at;
    line.coord = event.coord;
    return line;
}

ParsedLog parse_log(std::string_view text) {
    ParsedLog out;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                          : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        std::string reason;
        if (auto parsed = parse_one(tokens, reason)) {
            out.lines.push_back(std::move(*parsed));
        } else {
            out.issues.push_back(LineIssue{lineno, reason});
        }
    }
    return out;
}

std::vector<LogLine> parse_log_strict(std::string_view text) {
    ParsedLog parsed = parse_log(text);
    if (!parsed.issues.empty()) {
        throw MalformedLine(parsed.issues.front().lineno, parsed.issues.front().reason);
    }
    return std::move(parsed.lines);
}

ReconstructionResult reconstruct_sessions(std::vector<LogLine> lines,
                                          TimestampMs scan_period_ms) {
    std::stable_sort(lines.begin(), lines.end(),
                     [](const LogLine& a, const LogLine& b) { return a.at < b.at; });

    ReconstructionResult out;
    out.stats.total_lines = lines.size();

    struct Open {
        TimestampMs entered_at;
        bool known;
    };
    std::map<DeviceId, Open> open;
    std::map<DeviceId, TimestampMs> last_exit;

    for (const LogLine& line : lines) {
        out.stats.detections_per_hour[civil_from_ms(line.at).hour]++;
        if (line.direction == PresenceDirection::Entered) {
            if (auto it = open.find(line.device); it != open.end()) {
                out.warnings.push_back("double Entrou for " + line.device.str() +
                                       " at " + render_datetime(line.at) +
                                       "; closing previous session");
                out.sessions.push_back(PresenceSession{
                    line.device, it->second.entered_at, line.at, it->second.known});
                open.erase(it);
            }
            if (auto it = last_exit.find(line.device); it != last_exit.end()) {
                const TimestampMs gap = line.at - it->second;
                if (gap < scan_period_ms) {
                    out.stats.flap_candidates.push_back(
                        FlapCandidate{line.device, it->second, line.at, gap});
                }
            }
            open.emplace(line.device, Open{line.at, line.known});
        } else {
            if (auto it = open.find(line.device); it != open.end()) {
                out.sessions.push_back(PresenceSession{
                    line.device, it->second.entered_at, line.at, it->second.known});
                open.erase(it);
            } else {
                out.warnings.push_back("Saiu without Entrou for " + line.device.str() +
                                       " at " + render_datetime(line.at) +
                                       "; synthesizing point session");
                out.sessions.push_back(
                    PresenceSession{line.device, line.at, line.at, line.known});
            }
            last_exit[line.device] = line.at;
        }
    }
    for (const auto& [device, o] : open) {
        out.sessions.push_back(
            PresenceSession{device, o.entered_at, std::nullopt, o.known});
    }
    std::sort(out.sessions.begin(), out.sessions.end(),
              [](const PresenceSession& a, const PresenceSession& b) {
                  if (a.entered_at != b.entered_at) return a.entered_at < b.entered_at;
                  return a.device < b.device;
              });

    // Distinct devices and peak co-presence.
    std::map<DeviceId, bool> seen;
    for (const LogLine& line : lines) seen.emplace(line.device, true);
    out.stats.distinct_devices = seen.size();

    // Sweep with half-open [entered, exited) intervals: exits first at ties.
    struct Edge {
        TimestampMs at;
        int delta;
    };
    std::vector<Edge> edges;
    for (const auto& s : out.sessions) {
        if (s.exited_at && *s.exited_at == s.entered_at) {
            continue;  // synthetic point session, empty as a half-open interval
        }
        edges.push_back(Edge{s.entered_at, +1});
        if (s.exited_at) edges.push_back(Edge{*s.exited_at, -1});
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.at != b.at) return a.at < b.at;
        return a.delta < b.delta;
    });
    std::size_t current = 0;
    for (const Edge& e : edges) {
        if (e.delta > 0) {
            ++current;
            out.stats.max_simultaneous = std::max(out.stats.max_simultaneous, current);
        } else if (current > 0) {
            --current;
        }
    }
    return out;
}

}  // namespace nearnote

#pragma once

// File ingestion and persistence.
//
//   weather CSV   header "timestamp,temp_c", ISO-8601 hourly timestamps, LF
//   trace CSV     one row per hour, doubles at full round-trip precision
//   scenario file sectioned key = value text ([scenario] [tariff] [building]
//                 [pcm]) with exhaustive schema validation
//
// A deterministic synthetic generator provides four seasonal weeks (sinusoidal
// daily cycle with per-season mean/amplitude) so everything runs without
// external weather data.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hemdp/errors.hpp"
#include "hemdp/hem_mdp.hpp"
#include "hemdp/trace.hpp"

namespace hemdp {

// ---------------------------------------------------------------------------
// small formatting/parsing helpers
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, std::size_t line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0'))
        throw ParseError("not a number: '" + s + "'", line);
    return v;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// ---------------------------------------------------------------------------
// calendar arithmetic (proleptic Gregorian, no timezone handling)
// ---------------------------------------------------------------------------

inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

// Hours since the civil epoch for "YYYY-MM-DDTHH:MM:SS" (optional trailing Z).
// Minutes and seconds must be zero for hourly series.
inline std::int64_t parse_iso_hour(const std::string& ts, std::size_t line) {
    std::string s = ts;
    if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
    int y, mo, d, h, mi, se;
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &se) != 6)
        throw ParseError("bad ISO-8601 timestamp: '" + ts + "'", line);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23)
        throw ParseError("timestamp field out of range: '" + ts + "'", line);
    if (mi != 0 || se != 0)
        throw ParseError("timestamps must be on the hour: '" + ts + "'", line);
    return days_from_civil(y, mo, d) * 24 + h;
}

inline std::string format_iso_hour(std::int64_t epoch_hour) {
    std::int64_t days = epoch_hour / 24;
    int h = static_cast<int>(epoch_hour % 24);
    if (h < 0) {
        h += 24;
        --days;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00Z", y, m, d, h);
    return buf;
}

// ---------------------------------------------------------------------------
// weather series
// ---------------------------------------------------------------------------

struct WeatherSeries {
    std::int64_t start_epoch_hour = 0;
    std::vector<double> temp_c;
};

inline WeatherSeries load_weather(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open weather file: " + path);
    std::string lineText;
    std::size_t lineNo = 0;
    if (!std::getline(in, lineText)) throw ParseError("empty weather file: " + path, 1);
    ++lineNo;
    if (trim(lineText) != "timestamp,temp_c")
        throw ParseError("expected header 'timestamp,temp_c' in " + path, lineNo);
    WeatherSeries series;
    std::int64_t prev = 0;
    bool haveFirst = false;
    while (std::getline(in, lineText)) {
        ++lineNo;
        const std::string row = trim(lineText);
        if (row.empty()) continue;
        const auto cells = split(row, ',');
        if (cells.size() != 2) throw ParseError("expected 2 columns", lineNo);
        const std::int64_t hour = parse_iso_hour(trim(cells[0]), lineNo);
        const double temp = parse_double(trim(cells[1]), lineNo);
        if (!std::isfinite(temp)) throw ParseError("temperature must be finite", lineNo);
        if (!haveFirst) {
            series.start_epoch_hour = hour;
            haveFirst = true;
        } else {
            if (hour <= prev)
                throw ParseError("timestamps must be strictly increasing", lineNo);
            if (hour != prev + 1) {
                std::string missing;
                for (std::int64_t h = prev + 1; h < hour; ++h) {
                    if (!missing.empty()) missing += ", ";
                    missing += format_iso_hour(h);
                }
                throw ParseError("gap in hourly series; missing: " + missing, lineNo);
            }
        }
        series.temp_c.push_back(temp);
        prev = hour;
    }
    if (series.temp_c.empty()) throw ParseError("weather file has no data rows: " + path);
    return series;
}

inline void save_weather(const WeatherSeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write weather file: " + path);
    out << "timestamp,temp_c\n";
    for (std::size_t i = 0; i < series.temp_c.size(); ++i)
        out << format_iso_hour(series.start_epoch_hour + static_cast<std::int64_t>(i)) << ','
            << format_double(series.temp_c[i]) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// synthetic seasonal weather
// ---------------------------------------------------------------------------

enum class Season { Spring, Summer, Autumn, Winter };

struct SeasonPreset {
    double mean_c;
    double amplitude_c;
    int start_year, start_month, start_day;
};

// Sinusoidal daily cycle peaking mid-afternoon; one preset week per season.
inline SeasonPreset season_preset(Season s) {
    switch (s) {
        case Season::Spring: return {15.0, 5.0, 2019, 10, 16};
        case Season::Summer: return {26.0, 5.0, 2019, 1, 16};
        case Season::Autumn: return {24.0, 4.0, 2019, 4, 1};
        case Season::Winter: return {11.0, 4.0, 2019, 7, 25};
    }
    throw std::invalid_argument("unknown season");
}

inline WeatherSeries synthetic_weather(Season season, int hours,
                                       std::optional<double> mean_c = std::nullopt,
                                       std::optional<double> amplitude_c = std::nullopt) {
    if (hours < 1) throw std::invalid_argument("synthetic_weather: hours must be >= 1");
    const SeasonPreset p = season_preset(season);
    const double mean = mean_c.value_or(p.mean_c);
    const double amp = amplitude_c.value_or(p.amplitude_c);
    WeatherSeries series;
    series.start_epoch_hour = days_from_civil(p.start_year, p.start_month, p.start_day) * 24;
    series.temp_c.reserve(hours);
    for (int h = 0; h < hours; ++h) {
        const double phase = 2.0 * M_PI * ((h % 24) - 10) / 24.0;
        series.temp_c.push_back(mean + amp * std::sin(phase));
    }
    return series;
}

inline std::optional<Season> season_from_name(const std::string& name) {
    if (name == "spring") return Season::Spring;
    if (name == "summer") return Season::Summer;
    if (name == "autumn") return Season::Autumn;
    if (name == "winter") return Season::Winter;
    return std::nullopt;
}

inline const char* season_name(Season s) {
    switch (s) {
        case Season::Spring: return "spring";
        case Season::Summer: return "summer";
        case Season::Autumn: return "autumn";
        case Season::Winter: return "winter";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// policy trace persistence
// ---------------------------------------------------------------------------

inline constexpr const char* kTraceHeader =
    "hour,action,t_in_c,t_e_c,t_out_c,electricity_cents,discomfort_c,cumulative_weighted";

inline void save_trace(const PolicyTrace& trace, const std::string& path) {
    if (trace.rows.empty()) throw std::invalid_argument("save_trace: empty trace");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace file: " + path);
    out << kTraceHeader << '\n';
    for (const auto& r : trace.rows) {
        out << r.hour << ',' << format_double(r.action) << ',' << format_double(r.t_in_c) << ','
            << format_double(r.t_e_c) << ',' << format_double(r.t_out_c) << ','
            << format_double(r.electricity_cents) << ',' << format_double(r.discomfort_c) << ','
            << format_double(r.cumulative_weighted) << '\n';
    }
    if (trace.out_of_band) out << "# out_of_band=1\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline PolicyTrace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace file: " + path);
    std::string lineText;
    std::size_t lineNo = 0;
    if (!std::getline(in, lineText)) throw ParseError("empty trace file: " + path, 1);
    ++lineNo;
    if (trim(lineText) != kTraceHeader)
        throw ParseError("trace header mismatch in " + path, lineNo);
    PolicyTrace trace;
    while (std::getline(in, lineText)) {
        ++lineNo;
        const std::string row = trim(lineText);
        if (row.empty()) continue;
        if (row[0] == '#') {
            if (row.find("out_of_band=1") != std::string::npos) trace.out_of_band = true;
            continue;
        }
        const auto cells = split(row, ',');
        if (cells.size() != 8) throw ParseError("expected 8 columns", lineNo);
        TraceRow r;
        r.hour = static_cast<int>(parse_double(trim(cells[0]), lineNo));
        r.action = parse_double(trim(cells[1]), lineNo);
        r.t_in_c = parse_double(trim(cells[2]), lineNo);
        r.t_e_c = parse_double(trim(cells[3]), lineNo);
        r.t_out_c = parse_double(trim(cells[4]), lineNo);
        r.electricity_cents = parse_double(trim(cells[5]), lineNo);
        r.discomfort_c = parse_double(trim(cells[6]), lineNo);
        r.cumulative_weighted = parse_double(trim(cells[7]), lineNo);
        trace.rows.push_back(r);
    }
    if (trace.rows.empty()) throw ParseError("trace file has no rows: " + path);
    return trace;
}

// ---------------------------------------------------------------------------
// scenario files
// ---------------------------------------------------------------------------

struct ScenarioFile {
    Scenario scenario;
    BuildingThermalParams params;
    std::string weather_source; // "csv:<path>" or "season:<name>"
};

namespace detail {

struct KeyValue {
    std::string value;
    std::size_t line;
    bool used = false;
};

struct SectionedFile {
    // section -> key -> value (tariff bands accumulate separately)
    std::map<std::string, std::map<std::string, KeyValue>> sections;
    std::vector<std::pair<std::string, std::size_t>> tariff_bands;
};

inline SectionedFile parse_sectioned(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    SectionedFile file;
    std::string lineText, section;
    std::size_t lineNo = 0;
    while (std::getline(in, lineText)) {
        ++lineNo;
        std::string row = trim(lineText);
        if (row.empty() || row[0] == '#') continue;
        if (row.front() == '[') {
            if (row.back() != ']') throw ParseError("unterminated section header", lineNo);
            section = trim(row.substr(1, row.size() - 2));
            if (section != "scenario" && section != "tariff" && section != "building" &&
                section != "pcm")
                throw ValidationError(section, "unknown section (line " + std::to_string(lineNo) + ")");
            file.sections[section];
            continue;
        }
        const std::size_t eq = row.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineNo);
        if (section.empty()) throw ParseError("key outside any [section]", lineNo);
        const std::string key = trim(row.substr(0, eq));
        const std::string value = trim(row.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineNo);
        if (section == "tariff" && key == "band") {
            file.tariff_bands.emplace_back(value, lineNo);
            continue;
        }
        auto& sec = file.sections[section];
        if (sec.count(key))
            throw ValidationError(section + "." + key,
                                  "duplicate key (line " + std::to_string(lineNo) + ")");
        sec[key] = {value, lineNo, false};
    }
    return file;
}

class SectionReader {
public:
    SectionReader(SectionedFile& file, std::string section)
        : file_(file), section_(std::move(section)) {}

    std::optional<std::string> get(const std::string& key) {
        auto sit = file_.sections.find(section_);
        if (sit == file_.sections.end()) return std::nullopt;
        auto it = sit->second.find(key);
        if (it == sit->second.end()) return std::nullopt;
        it->second.used = true;
        return it->second.value;
    }

    double number(const std::string& key, double fallback) {
        auto v = get(key);
        if (!v) return fallback;
        try {
            return parse_double(*v, 0);
        } catch (const ParseError&) {
            throw ValidationError(section_ + "." + key, "not a number: '" + *v + "'");
        }
    }

    int integer(const std::string& key, int fallback) {
        const double v = number(key, fallback);
        if (v != std::floor(v)) throw ValidationError(section_ + "." + key, "must be an integer");
        return static_cast<int>(v);
    }

private:
    SectionedFile& file_;
    std::string section_;
};

inline void reject_unused(const SectionedFile& file) {
    for (const auto& [section, keys] : file.sections)
        for (const auto& [key, kv] : keys)
            if (!kv.used)
                throw ValidationError(section + "." + key,
                                      "unknown key (line " + std::to_string(kv.line) + ")");
}

inline std::string directory_of(const std::string& path) {
    const std::size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

} // namespace detail

inline ScenarioFile load_scenario(const std::string& path) {
    detail::SectionedFile file = detail::parse_sectioned(path);
    ScenarioFile out;
    detail::SectionReader sc(file, "scenario");
    detail::SectionReader bd(file, "building");
    detail::SectionReader pc(file, "pcm");

    Scenario& s = out.scenario;
    if (auto mode = sc.get("mode")) {
        if (*mode == "heating") s.mode = HvacMode::Heating;
        else if (*mode == "cooling") s.mode = HvacMode::Cooling;
        else throw ValidationError("scenario.mode", "must be 'heating' or 'cooling'");
    }
    s.horizon_hours = sc.integer("horizon_hours", s.horizon_hours);
    s.lambda = sc.number("lambda", s.lambda);
    s.setpoint_c = sc.number("setpoint_c", s.mode == HvacMode::Heating ? 20.0 : 23.0);
    s.comfort_low_c = sc.number("comfort_low_c", s.comfort_low_c);
    s.comfort_high_c = sc.number("comfort_high_c", s.comfort_high_c);
    s.discretization_c = sc.number("discretization_c", s.discretization_c);
    s.block_length = sc.integer("block_length", s.block_length);
    s.out_of_band_penalty = sc.number("out_of_band_penalty", s.out_of_band_penalty);
    s.initial_t_in_c = sc.number("initial_t_in_c", s.initial_t_in_c);
    s.initial_t_e_c = sc.number("initial_t_e_c", s.initial_t_in_c);
    s.substeps_per_hour = sc.integer("substeps_per_hour", s.substeps_per_hour);
    if (auto fr = sc.get("macro_fractions")) {
        s.macro_fractions.clear();
        for (const auto& piece : split(*fr, ',')) {
            const std::string item = trim(piece);
            if (item.empty()) continue;
            try {
                s.macro_fractions.push_back(parse_double(item, 0));
            } catch (const ParseError&) {
                throw ValidationError("scenario.macro_fractions", "not a number: '" + item + "'");
            }
        }
    }

    const auto csv = sc.get("weather_csv");
    const auto season = sc.get("weather_season");
    if (csv && season)
        throw ValidationError("scenario.weather_csv",
                              "give either weather_csv or weather_season, not both");
    if (csv) {
        std::string wpath = *csv;
        if (!wpath.empty() && wpath.front() != '/')
            wpath = detail::directory_of(path) + "/" + wpath;
        out.scenario.weather_c = load_weather(wpath).temp_c;
        out.weather_source = "csv:" + *csv;
    } else if (season) {
        const auto se = season_from_name(*season);
        if (!se)
            throw ValidationError("scenario.weather_season",
                                  "must be spring, summer, autumn or winter");
        std::optional<double> mean, amp;
        if (auto m = sc.get("weather_mean_c")) mean = parse_double(*m, 0);
        if (auto a = sc.get("weather_amplitude_c")) amp = parse_double(*a, 0);
        out.scenario.weather_c = synthetic_weather(*se, s.horizon_hours + 1, mean, amp).temp_c;
        out.weather_source = "season:" + *season;
    } else {
        throw ValidationError("scenario.weather_csv",
                              "scenario needs weather_csv or weather_season");
    }

    if (!file.tariff_bands.empty()) {
        std::vector<TariffBand> bands;
        for (const auto& [value, lineNo] : file.tariff_bands) {
            const auto cells = split(value, ',');
            if (cells.size() != 3)
                throw ParseError("tariff band needs 'start, end, cents_per_kwh'", lineNo);
            TariffBand b;
            b.start_hour = static_cast<int>(parse_double(trim(cells[0]), lineNo));
            b.end_hour = static_cast<int>(parse_double(trim(cells[1]), lineNo));
            b.cents_per_kwh = parse_double(trim(cells[2]), lineNo);
            bands.push_back(b);
        }
        s.tariff = Tariff(bands);
    }

    BuildingThermalParams& b = out.params;
    b.r_dw_k_per_w = bd.number("r_dw_k_per_w", b.r_dw_k_per_w);
    b.r_in_k_per_w = bd.number("r_in_k_per_w", b.r_in_k_per_w);
    b.r_out_k_per_w = bd.number("r_out_k_per_w", b.r_out_k_per_w);
    b.c_envelope_j_per_k = bd.number("c_envelope_j_per_k", b.c_envelope_j_per_k);
    b.c_pcm_mass_kg = bd.number("c_pcm_mass_kg", b.c_pcm_mass_kg);
    b.air_heat_capacity_j_per_k = bd.number("air_heat_capacity_j_per_k", b.air_heat_capacity_j_per_k);
    b.hvac_rated_electrical_kw = bd.number("hvac_rated_electrical_kw", b.hvac_rated_electrical_kw);
    b.hvac_cop = bd.number("hvac_cop", b.hvac_cop);
    b.infiltration_ach = bd.number("infiltration_ach", b.infiltration_ach);
    b.zone_volume_m3 = bd.number("zone_volume_m3", b.zone_volume_m3);

    PcmCurveParams& p = b.pcm;
    p.melting_point_c = pc.number("melting_point_c", p.melting_point_c);
    p.base_solid = pc.number("base_solid", p.base_solid);
    p.amp_solid = pc.number("amp_solid", p.amp_solid);
    p.solid_decay_c = pc.number("solid_decay_c", p.solid_decay_c);
    p.base_liquid = pc.number("base_liquid", p.base_liquid);
    p.amp_liquid = pc.number("amp_liquid", p.amp_liquid);
    p.liquid_width = pc.number("liquid_width", p.liquid_width);
    if (auto sm = pc.get("smoothing")) {
        if (*sm == "blend") p.smoothing.kind = PcmSmoothing::Kind::BlendWindow;
        else if (*sm == "polyfit") p.smoothing.kind = PcmSmoothing::Kind::PolyFit;
        else throw ValidationError("pcm.smoothing", "must be 'blend' or 'polyfit'");
    }
    p.smoothing.blend_half_width_c = pc.number("blend_half_width_c", p.smoothing.blend_half_width_c);
    p.smoothing.polyfit_degree = pc.integer("polyfit_degree", p.smoothing.polyfit_degree);
    p.smoothing.fit_low_c = pc.number("polyfit_low_c", p.smoothing.fit_low_c);
    p.smoothing.fit_high_c = pc.number("polyfit_high_c", p.smoothing.fit_high_c);

    detail::reject_unused(file);
    out.scenario.validate();
    out.params.validate();
    ThermalModel probe(out.params); // surfaces PCM curve validation errors
    (void)probe;
    return out;
}

// ---------------------------------------------------------------------------
// key-value report files
// ---------------------------------------------------------------------------

inline void write_key_value_report(const std::vector<std::pair<std::string, std::string>>& fields,
                                   const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report file: " + path);
    for (const auto& [k, v] : fields) out << k << " = " << v << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace hemdp

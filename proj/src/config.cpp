// SPDX-License-Identifier: Apache-2.0
#include "isac/config.hpp"
#include "isac/ofdm.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace isac
{
namespace
{
std::string trim(const std::string &s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string &line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        if (line[i] == '"')
            quoted = !quoted;
        else if (line[i] == '#' && !quoted)
            return line.substr(0, i);
    }
    return line;
}

std::string unquote(const std::string &s, int line)
{
    if (s.size() < 2 || s.front() != '"' || s.back() != '"')
        throw ConfigError("line " + std::to_string(line) + ": malformed string " + s);
    return s.substr(1, s.size() - 2);
}

double to_number(const std::string &s, int line)
{
    std::string t;
    for (char c : s)
        if (c != '_')
            t.push_back(c);
    std::size_t used = 0;
    double v = 0.0;
    try
    {
        v = std::stod(t, &used);
    }
    catch (const std::exception &)
    {
        used = 0;
    }
    if (used != t.size() || t.empty())
        throw ConfigError("line " + std::to_string(line) + ": not a number: " + s);
    return v;
}

ConfigValue parse_value(const std::string &raw, int line)
{
    const std::string s = trim(raw);
    if (s.empty())
        throw ConfigError("line " + std::to_string(line) + ": missing value");
    if (s == "true")
        return true;
    if (s == "false")
        return false;
    if (s.front() == '"')
        return unquote(s, line);
    if (s.front() == '[')
    {
        if (s.back() != ']')
            throw ConfigError("line " + std::to_string(line) + ": unterminated array");
        std::vector<std::string> items;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 1; i + 1 < s.size(); ++i)
        {
            const char c = s[i];
            if (c == '"')
                quoted = !quoted;
            if (c == ',' && !quoted)
            {
                items.push_back(trim(cur));
                cur.clear();
            }
            else
                cur.push_back(c);
        }
        if (!trim(cur).empty())
            items.push_back(trim(cur));
        if (!items.empty() && items.front().front() == '"')
        {
            std::vector<std::string> out;
            for (const auto &it : items)
                out.push_back(unquote(it, line));
            return out;
        }
        std::vector<double> out;
        for (const auto &it : items)
            out.push_back(to_number(it, line));
        return out;
    }
    return to_number(s, line);
}

template <class T> const T *get(const std::map<std::string, ConfigValue> &m, const std::string &key)
{
    auto it = m.find(key);
    if (it == m.end())
        return nullptr;
    const T *p = std::get_if<T>(&it->second);
    if (!p)
        throw ConfigError("key '" + key + "' has the wrong type");
    return p;
}
} // namespace

double ConfigTable::number(const std::string &key, double fallback) const
{
    const double *p = get<double>(values_, key);
    return p ? *p : fallback;
}

std::string ConfigTable::string(const std::string &key, const std::string &fallback) const
{
    const std::string *p = get<std::string>(values_, key);
    return p ? *p : fallback;
}

bool ConfigTable::boolean(const std::string &key, bool fallback) const
{
    const bool *p = get<bool>(values_, key);
    return p ? *p : fallback;
}

std::vector<double> ConfigTable::numbers(const std::string &key, const std::vector<double> &fallback) const
{
    if (!has(key))
        return fallback;
    if (const double *d = std::get_if<double>(&values_.at(key)))
        return {*d};
    // an empty array parses as numbers
    const auto *p = get<std::vector<double>>(values_, key);
    return *p;
}

std::vector<std::string> ConfigTable::strings(const std::string &key, const std::vector<std::string> &fallback) const
{
    if (!has(key))
        return fallback;
    if (const auto *s = std::get_if<std::string>(&values_.at(key)))
        return {*s};
    if (const auto *e = std::get_if<std::vector<double>>(&values_.at(key)); e && e->empty())
        return {};
    return *get<std::vector<std::string>>(values_, key);
}

const ConfigTable &ConfigDocument::table(const std::string &name) const
{
    static const ConfigTable empty;
    auto it = tables.find(name);
    return it == tables.end() ? empty : it->second;
}

ConfigDocument parse_config(const std::string &text)
{
    ConfigDocument doc;
    ConfigTable *cur = &doc.tables[""];
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        const std::string s = trim(strip_comment(raw));
        if (s.empty())
            continue;
        if (s.rfind("[[", 0) == 0)
        {
            if (s.size() < 5 || s.substr(s.size() - 2) != "]]")
                throw ConfigError("line " + std::to_string(line) + ": malformed array header");
            auto &arr = doc.arrays[trim(s.substr(2, s.size() - 4))];
            arr.emplace_back();
            cur = &arr.back();
            continue;
        }
        if (s.front() == '[')
        {
            if (s.back() != ']')
                throw ConfigError("line " + std::to_string(line) + ": malformed table header");
            const std::string name = trim(s.substr(1, s.size() - 2));
            if (doc.tables.count(name) && name != "")
                throw ConfigError("line " + std::to_string(line) + ": duplicate table [" + name + "]");
            cur = &doc.tables[name];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty key");
        cur->set(key, parse_value(s.substr(eq + 1), line));
    }
    return doc;
}

ConfigDocument load_config(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

ArrayReference parse_reference(const std::string &s)
{
    if (s == "first")
        return ArrayReference::FirstElement;
    if (s == "center" || s == "centre")
        return ArrayReference::CenterElement;
    throw ConfigError("unknown array reference '" + s + "'");
}

SteeringKind parse_model(const std::string &s)
{
    if (s == "far")
        return SteeringKind::FarField;
    if (s == "near" || s == "near-exact")
        return SteeringKind::NearFieldExact;
    if (s == "fresnel")
        return SteeringKind::NearFieldFresnel;
    throw ConfigError("unknown steering model '" + s + "'");
}

const char *model_name(SteeringKind k)
{
    switch (k)
    {
    case SteeringKind::FarField:
        return "far";
    case SteeringKind::NearFieldExact:
        return "near-exact";
    case SteeringKind::NearFieldFresnel:
        return "fresnel";
    }
    return "?";
}

AxisKind parse_axis(const std::string &s)
{
    for (AxisKind k : {AxisKind::Angle, AxisKind::Delay, AxisKind::Doppler})
        if (s == axis_name(k))
            return k;
    throw ConfigError("unknown axis '" + s + "'");
}

Scene scene_from_config(const ConfigDocument &doc)
{
    Scene s = reference_scene();
    const ConfigTable &t = doc.table("scene");
    s.array.num_elements = static_cast<std::size_t>(t.number("num_elements", static_cast<double>(s.array.num_elements)));
    s.array.spacing_wavelengths = t.number("spacing_wavelengths", s.array.spacing_wavelengths);
    if (t.has("reference"))
        s.array.reference = parse_reference(t.string("reference", "first"));
    s.carrier.frequency_hz = t.number("carrier_hz", s.carrier.frequency_hz);
    auto it = doc.arrays.find("target");
    if (it != doc.arrays.end())
    {
        s.targets.clear();
        for (const ConfigTable &tt : it->second)
        {
            Target tg;
            tg.angle_deg = tt.number("angle_deg", 0.0);
            tg.range_m = tt.number("range_m", 1.0);
            tg.velocity_mps = tt.number("velocity_mps", 0.0);
            tg.gain = cd(tt.number("gain_re", 1.0), tt.number("gain_im", 0.0));
            s.targets.push_back(tg);
        }
    }
    s.array.validate();
    s.carrier.validate();
    return s;
}

OfdmConfig ofdm_from_config(const ConfigDocument &doc)
{
    OfdmConfig o = reference_ofdm();
    const ConfigTable &t = doc.table("ofdm");
    o.num_subcarriers = static_cast<std::size_t>(t.number("num_subcarriers", static_cast<double>(o.num_subcarriers)));
    o.num_symbols = static_cast<std::size_t>(t.number("num_symbols", static_cast<double>(o.num_symbols)));
    o.subcarrier_spacing_hz = t.number("subcarrier_spacing_hz", o.subcarrier_spacing_hz);
    o.cp_ratio = t.number("cp_ratio", o.cp_ratio);
    o.validate();
    return o;
}

std::optional<double> snr_from_config(const ConfigDocument &doc)
{
    const ConfigTable &t = doc.table("ofdm");
    if (!t.has("snr_db"))
        return std::nullopt;
    return t.number("snr_db", 0.0);
}

std::uint64_t seed_from_config(const ConfigDocument &doc, std::uint64_t fallback)
{
    return static_cast<std::uint64_t>(doc.table("ofdm").number("seed", static_cast<double>(fallback)));
}

FrameworkConfig framework_from_config(const ConfigDocument &doc)
{
    FrameworkConfig c;
    const ConfigTable &t = doc.table("framework");
    if (t.has("framework"))
        c.framework = parse_framework(t.string("framework", ""));
    const char *keys[3] = {"angle_alg", "delay_alg", "doppler_alg"};
    if (t.has("algorithm"))
        c.algorithms.fill(parse_algorithm(t.string("algorithm", "")));
    for (int i = 0; i < 3; ++i)
        if (t.has(keys[i]))
            c.algorithms[static_cast<std::size_t>(i)] = parse_algorithm(t.string(keys[i], ""));
    if (t.has("joint_alg"))
        c.joint_algorithm = parse_joint_algorithm(t.string("joint_alg", ""));
    if (t.has("grouping"))
        c.grouping = parse_grouping(t.string("grouping", ""));
    if (t.has("beamformer"))
        c.beamformer = parse_beamformer(t.string("beamformer", ""));
    if (t.has("stage_order"))
    {
        const auto v = t.strings("stage_order", {});
        if (v.size() != 3)
            throw ConfigError("stage_order needs three axes");
        for (std::size_t i = 0; i < 3; ++i)
            c.stage_order[i] = parse_axis(v[i]);
    }
    c.detection_threshold = t.number("detection_threshold", c.detection_threshold);
    for (double b : t.numbers("branch_counts", {}))
        c.branch_counts.push_back(static_cast<Eigen::Index>(b));
    const auto w2 = t.numbers("window2d", {});
    if (w2.size() == 2)
    {
        c.window2d.n_sub = static_cast<Eigen::Index>(w2[0]);
        c.window2d.p_sub = static_cast<Eigen::Index>(w2[1]);
    }
    const auto w3 = t.numbers("window3d", {});
    if (w3.size() == 3)
    {
        c.window3d.m_sub = static_cast<Eigen::Index>(w3[0]);
        c.window3d.n_sub = static_cast<Eigen::Index>(w3[1]);
        c.window3d.p_sub = static_cast<Eigen::Index>(w3[2]);
    }
    const auto nf = t.numbers("n_fft", {});
    if (nf.size() == 3)
        for (std::size_t i = 0; i < 3; ++i)
            c.n_fft[i] = static_cast<Eigen::Index>(nf[i]);
    c.validate();
    return c;
}
} // namespace isac

#include "ellipflow/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ellipflow {

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

using RawSection = std::map<std::string, RawEntry>;
using RawConfig = std::map<std::string, std::pair<RawSection, int /*line*/>>;

[[noreturn]] void fail(int line, const std::string& what) {
    throw config_error("config line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

RawConfig tokenize(const std::string& text) {
    RawConfig out;
    std::istringstream in(text);
    std::string line, section;
    int section_line = 0;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(lineno, "empty section name");
            if (out.count(section)) fail(lineno, "duplicate section [" + section + "]");
            out[section] = {{}, lineno};
            section_line = lineno;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key = value");
        if (section.empty()) fail(lineno, "key before any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(lineno, "empty key");
        auto& sec = out[section].first;
        if (sec.count(key)) fail(lineno, "duplicate key '" + key + "'");
        sec[key] = {value, lineno, false};
    }
    (void)section_line;
    return out;
}

std::vector<std::string> tokens(const std::string& value) {
    std::vector<std::string> out;
    std::istringstream in(value);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& tok, int line) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || tok.empty())
        fail(line, "'" + tok + "' is not a number");
    return v;
}

long long to_int(const std::string& tok, int line) {
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size() || tok.empty())
        fail(line, "'" + tok + "' is not an integer");
    return v;
}

// Typed readers bound to one section; records key usage for strictness.
struct SectionReader {
    RawSection* sec;
    std::string name;

    const RawEntry* find(const std::string& key) const {
        if (!sec) return nullptr;
        auto it = sec->find(key);
        if (it == sec->end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }
    bool has(const std::string& key) const { return find(key) != nullptr; }

    double number(const std::string& key, std::optional<double> def = {}) const {
        const RawEntry* e = find(key);
        if (!e) {
            if (def) return *def;
            throw config_error("config section [" + name + "]: missing key '" + key + "'");
        }
        const auto ts = tokens(e->value);
        if (ts.size() != 1) fail(e->line, "expected a single number for '" + key + "'");
        return to_double(ts[0], e->line);
    }
    long long integer(const std::string& key, std::optional<long long> def = {}) const {
        const RawEntry* e = find(key);
        if (!e) {
            if (def) return *def;
            throw config_error("config section [" + name + "]: missing key '" + key + "'");
        }
        const auto ts = tokens(e->value);
        if (ts.size() != 1) fail(e->line, "expected a single integer for '" + key + "'");
        return to_int(ts[0], e->line);
    }
    bool boolean(const std::string& key, bool def) const {
        const RawEntry* e = find(key);
        if (!e) return def;
        if (e->value == "true") return true;
        if (e->value == "false") return false;
        fail(e->line, "expected true/false for '" + key + "'");
    }
    std::string word(const std::string& key, const std::string& def) const {
        const RawEntry* e = find(key);
        if (!e) return def;
        const auto ts = tokens(e->value);
        if (ts.size() != 1) fail(e->line, "expected a single word for '" + key + "'");
        return ts[0];
    }
    std::vector<double> numbers(const std::string& key,
                                std::optional<std::vector<double>> def = {}) const {
        const RawEntry* e = find(key);
        if (!e) {
            if (def) return *def;
            throw config_error("config section [" + name + "]: missing key '" + key + "'");
        }
        std::vector<double> out;
        for (const auto& t : tokens(e->value)) out.push_back(to_double(t, e->line));
        if (out.empty()) fail(e->line, "empty list for '" + key + "'");
        return out;
    }
    std::vector<int> integers(const std::string& key, std::optional<std::vector<int>> def = {}) const {
        const RawEntry* e = find(key);
        if (!e) {
            if (def) return *def;
            throw config_error("config section [" + name + "]: missing key '" + key + "'");
        }
        std::vector<int> out;
        for (const auto& t : tokens(e->value)) out.push_back(static_cast<int>(to_int(t, e->line)));
        if (out.empty()) fail(e->line, "empty list for '" + key + "'");
        return out;
    }
};

const std::map<std::string, std::set<std::string>> kSchema = {
    {"model", {"n", "gamma", "k", "mu", "xi", "alpha", "d"}},
    {"init", {"a0", "a1"}},
    {"run", {"out", "seed", "threads"}},
    {"integrate", {"t_end", "rel_tol", "abs_tol", "touch_threshold"}},
    {"classify", {"horizon"}},
    {"sweep", {"gamma", "xi"}},
    {"field", {"t", "lo", "hi", "counts"}},
    {"residual", {"points", "h0", "levels", "t"}},
    {"mass", {"times", "nodes", "radius"}},
    {"crosscheck",
     {"lo", "hi", "levels", "cfl", "t_end", "ghost", "reconstruction", "rho_floor", "snapshots"}},
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_numbers(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += fmt17(v[i]);
    }
    return out;
}

std::string join_integers(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

RunConfig RunConfig::parse_string(const std::string& text) {
    RawConfig raw = tokenize(text);

    for (const auto& [name, sec] : raw) {
        auto it = kSchema.find(name);
        if (it == kSchema.end()) fail(sec.second, "unknown section [" + name + "]");
        for (const auto& [key, entry] : sec.first)
            if (!it->second.count(key)) fail(entry.line, "unknown key '" + key + "' in [" + name + "]");
    }

    auto reader = [&raw](const std::string& name) -> SectionReader {
        auto it = raw.find(name);
        return SectionReader{it == raw.end() ? nullptr : &it->second.first, name};
    };

    RunConfig cfg;

    if (!raw.count("model")) throw config_error("config: missing required section [model]");
    if (!raw.count("init")) throw config_error("config: missing required section [init]");

    {
        SectionReader m = reader("model");
        cfg.model.n = static_cast<int>(m.integer("n"));
        cfg.model.gamma = m.number("gamma");
        cfg.model.k_pressure = m.number("k", 1.0);
        cfg.model.mu = m.number("mu", 0.0);
        cfg.model.xi = m.number("xi");
        cfg.model.alpha = m.number("alpha", 1.0);
        cfg.model.d = m.has("d") ? m.numbers("d")
                                 : std::vector<double>(static_cast<size_t>(std::max(cfg.model.n, 0)), 0.0);
        cfg.model.validate();
    }
    {
        SectionReader s = reader("init");
        cfg.init.t = 0.0;
        cfg.init.a = s.numbers("a0");
        cfg.init.a_dot = s.has("a1") ? s.numbers("a1")
                                     : std::vector<double>(cfg.init.a.size(), 0.0);
        cfg.init.validate(cfg.model);
    }
    if (raw.count("run")) {
        SectionReader s = reader("run");
        cfg.out = s.word("out", "");
        cfg.seed = static_cast<unsigned long long>(s.integer("seed", 0));
        cfg.threads = static_cast<int>(s.integer("threads", 1));
        if (cfg.threads < 1) throw config_error("config: threads must be >= 1");
    }
    if (raw.count("integrate")) {
        SectionReader s = reader("integrate");
        Integrate v;
        v.t_end = s.number("t_end");
        v.rel_tol = s.number("rel_tol", 1e-10);
        v.abs_tol = s.number("abs_tol", 1e-12);
        v.touch_threshold = s.number("touch_threshold", 0.0);
        if (!(v.t_end > 0.0)) throw config_error("config: [integrate] t_end must be positive");
        if (!(v.rel_tol > 0.0) || !(v.abs_tol > 0.0))
            throw config_error("config: [integrate] tolerances must be positive");
        cfg.integrate = v;
    }
    if (raw.count("classify")) {
        SectionReader s = reader("classify");
        Classify v;
        v.horizon = s.number("horizon", 10.0);
        if (!(v.horizon > 0.0)) throw config_error("config: [classify] horizon must be positive");
        cfg.classify = v;
    }
    if (raw.count("sweep")) {
        SectionReader s = reader("sweep");
        Sweep v;
        v.gamma = s.numbers("gamma", std::vector<double>{cfg.model.gamma});
        v.xi = s.numbers("xi", std::vector<double>{cfg.model.xi});
        cfg.sweep = v;
    }
    if (raw.count("field")) {
        SectionReader s = reader("field");
        Field v;
        v.t = s.number("t", 0.0);
        v.lo = s.numbers("lo");
        v.hi = s.numbers("hi");
        v.counts = s.integers("counts");
        const auto n = static_cast<size_t>(cfg.model.n);
        if (v.lo.size() != n || v.hi.size() != n || v.counts.size() != n)
            throw config_error("config: [field] lo/hi/counts must have one entry per dimension");
        for (size_t i = 0; i < n; ++i)
            if (!(v.hi[i] > v.lo[i]) || v.counts[i] < 1)
                throw config_error("config: [field] invalid sample box");
        if (v.t < 0.0) throw config_error("config: [field] t must be >= 0");
        cfg.field = v;
    }
    if (raw.count("residual")) {
        SectionReader s = reader("residual");
        Residual v;
        v.points = static_cast<int>(s.integer("points", 10));
        v.h0 = s.number("h0", 0.01);
        v.levels = static_cast<int>(s.integer("levels", 5));
        v.t = s.number("t", 0.5);
        if (v.points < 1 || v.levels < 3 || !(v.h0 > 0.0) || !(v.t > v.h0))
            throw config_error("config: [residual] needs points >= 1, levels >= 3, 0 < h0 < t");
        cfg.residual = v;
    }
    if (raw.count("mass")) {
        SectionReader s = reader("mass");
        Mass v;
        v.times = s.numbers("times", std::vector<double>{0.0});
        v.nodes = static_cast<int>(s.integer("nodes", 0));
        v.radius = s.number("radius", 10.0);
        for (double t : v.times)
            if (t < 0.0) throw config_error("config: [mass] times must be >= 0");
        if (!(v.radius > 0.0)) throw config_error("config: [mass] radius must be positive");
        cfg.mass = v;
    }
    if (raw.count("crosscheck")) {
        SectionReader s = reader("crosscheck");
        Crosscheck v;
        const auto lo = s.numbers("lo");
        const auto hi = s.numbers("hi");
        const auto n = static_cast<size_t>(cfg.model.n);
        if (cfg.model.n > 2) throw config_error("config: [crosscheck] supports 1D and 2D only");
        if (lo.size() != n || hi.size() != n)
            throw config_error("config: [crosscheck] lo/hi must have one entry per dimension");
        for (size_t i = 0; i < n; ++i) {
            v.lo[i] = lo[i];
            v.hi[i] = hi[i];
            if (!(hi[i] > lo[i])) throw config_error("config: [crosscheck] invalid domain box");
        }
        v.levels = s.integers("levels");
        if (v.levels.size() < 3)
            throw config_error("config: [crosscheck] needs at least three refinement levels");
        v.cfl = s.number("cfl", 0.45);
        v.t_end = s.number("t_end", 0.3);
        const std::string ghost = s.word("ghost", "exact");
        if (ghost == "exact") v.ghost = GhostPolicy::Exact;
        else if (ghost == "periodic") v.ghost = GhostPolicy::Periodic;
        else throw config_error("config: [crosscheck] ghost must be exact or periodic");
        const std::string rec = s.word("reconstruction", "muscl");
        if (rec == "muscl") v.muscl = true;
        else if (rec == "constant") v.muscl = false;
        else throw config_error("config: [crosscheck] reconstruction must be muscl or constant");
        v.rho_floor = s.number("rho_floor", 1e-10);
        v.snapshots = s.boolean("snapshots", false);
        if (!(v.cfl > 0.0 && v.cfl < 1.0) || !(v.t_end > 0.0) || !(v.rho_floor > 0.0))
            throw config_error("config: [crosscheck] invalid cfl, t_end or rho_floor");
        cfg.crosscheck = v;
    }
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    os << "[model]\n";
    os << "n = " << model.n << "\n";
    os << "gamma = " << fmt17(model.gamma) << "\n";
    os << "k = " << fmt17(model.k_pressure) << "\n";
    os << "mu = " << fmt17(model.mu) << "\n";
    os << "xi = " << fmt17(model.xi) << "\n";
    os << "alpha = " << fmt17(model.alpha) << "\n";
    os << "d = "
       << join_numbers(model.d.empty() ? std::vector<double>(static_cast<size_t>(model.n), 0.0)
                                       : model.d)
       << "\n";
    os << "\n[init]\n";
    os << "a0 = " << join_numbers(init.a) << "\n";
    os << "a1 = " << join_numbers(init.a_dot) << "\n";
    os << "\n[run]\n";
    if (!out.empty()) os << "out = " << out << "\n";
    os << "seed = " << seed << "\n";
    os << "threads = " << threads << "\n";
    if (integrate) {
        os << "\n[integrate]\n";
        os << "t_end = " << fmt17(integrate->t_end) << "\n";
        os << "rel_tol = " << fmt17(integrate->rel_tol) << "\n";
        os << "abs_tol = " << fmt17(integrate->abs_tol) << "\n";
        os << "touch_threshold = " << fmt17(integrate->touch_threshold) << "\n";
    }
    if (classify) {
        os << "\n[classify]\n";
        os << "horizon = " << fmt17(classify->horizon) << "\n";
    }
    if (sweep) {
        os << "\n[sweep]\n";
        os << "gamma = " << join_numbers(sweep->gamma) << "\n";
        os << "xi = " << join_numbers(sweep->xi) << "\n";
    }
    if (field) {
        os << "\n[field]\n";
        os << "t = " << fmt17(field->t) << "\n";
        os << "lo = " << join_numbers(field->lo) << "\n";
        os << "hi = " << join_numbers(field->hi) << "\n";
        os << "counts = " << join_integers(field->counts) << "\n";
    }
    if (residual) {
        os << "\n[residual]\n";
        os << "points = " << residual->points << "\n";
        os << "h0 = " << fmt17(residual->h0) << "\n";
        os << "levels = " << residual->levels << "\n";
        os << "t = " << fmt17(residual->t) << "\n";
    }
    if (mass) {
        os << "\n[mass]\n";
        os << "times = " << join_numbers(mass->times) << "\n";
        os << "nodes = " << mass->nodes << "\n";
        os << "radius = " << fmt17(mass->radius) << "\n";
    }
    if (crosscheck) {
        const auto n = static_cast<size_t>(model.n);
        os << "\n[crosscheck]\n";
        os << "lo = " << join_numbers({crosscheck->lo.begin(), crosscheck->lo.begin() + n}) << "\n";
        os << "hi = " << join_numbers({crosscheck->hi.begin(), crosscheck->hi.begin() + n}) << "\n";
        os << "levels = " << join_integers(crosscheck->levels) << "\n";
        os << "cfl = " << fmt17(crosscheck->cfl) << "\n";
        os << "t_end = " << fmt17(crosscheck->t_end) << "\n";
        os << "ghost = " << (crosscheck->ghost == GhostPolicy::Exact ? "exact" : "periodic") << "\n";
        os << "reconstruction = " << (crosscheck->muscl ? "muscl" : "constant") << "\n";
        os << "rho_floor = " << fmt17(crosscheck->rho_floor) << "\n";
        os << "snapshots = " << (crosscheck->snapshots ? "true" : "false") << "\n";
    }
    return os.str();
}

}  // namespace ellipflow

#include "jmlmc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "jmlmc/error.hpp"

namespace jmlmc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class Reader {
public:
    Reader(std::string origin, int line, std::string key, std::string value)
        : origin_(std::move(origin)), line_(line), key_(std::move(key)), value_(std::move(value)) {}

    [[noreturn]] void fail(const std::string& what) const {
        const std::string where = line_ > 0 ? origin_ + ":" + std::to_string(line_) : origin_;
        throw ConfigError(where + ": key '" + key_ + "': " + what);
    }

    double number() const { return number(value_); }

    double number(const std::string& text) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(text, &pos);
            if (pos != text.size() || !std::isfinite(v)) {
                fail("'" + text + "' is not a finite number");
            }
            return v;
        } catch (const std::logic_error&) {
            fail("'" + text + "' is not a number");
        }
    }

    long long integer(const std::string& text) const {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(text, &pos);
            if (pos != text.size()) {
                fail("'" + text + "' is not an integer");
            }
            return v;
        } catch (const std::logic_error&) {
            fail("'" + text + "' is not an integer");
        }
    }

    int integer() const { return static_cast<int>(integer(value_)); }

    std::uint64_t unsigned_integer() const {
        try {
            std::size_t pos = 0;
            if (value_.empty() || value_[0] == '-') {
                fail("expected a non-negative integer");
            }
            const unsigned long long v = std::stoull(value_, &pos);
            if (pos != value_.size()) {
                fail("'" + value_ + "' is not an integer");
            }
            return v;
        } catch (const std::logic_error&) {
            fail("'" + value_ + "' is not an integer");
        }
    }

    bool boolean() const {
        if (value_ == "true" || value_ == "1") {
            return true;
        }
        if (value_ == "false" || value_ == "0") {
            return false;
        }
        fail("expected true or false");
    }

    Expression expression() const {
        try {
            return Expression::parse(value_);
        } catch (const ConfigError& e) {
            fail(e.what());
        }
    }

    template <typename F>
    auto wrap(F&& fn) const -> decltype(fn()) {
        try {
            return fn();
        } catch (const ConfigError& e) {
            fail(e.what());
        }
    }

    const std::string& value() const { return value_; }

private:
    std::string origin_;
    int line_;
    std::string key_;
    std::string value_;
};

void apply(Config& c, const std::string& section, const std::string& key, const Reader& r) {
    ProblemConfig& p = c.problem;
    StudyConfig& s = c.study;
    const std::string k = section + "." + key;
    if (k == "problem.T") {
        p.T = r.number();
    } else if (k == "problem.u0") {
        p.u0 = r.expression();
    } else if (k == "problem.f") {
        p.f = r.expression();
    } else if (k == "problem.a_bar") {
        p.coefficients.a_bar = r.expression();
    } else if (k == "problem.b1") {
        p.coefficients.b1 = r.expression();
    } else if (k == "problem.b2") {
        p.coefficients.b2 = r.expression();
    } else if (k == "problem.clamp") {
        if (r.value() == "max") {
            p.coefficients.clamp = ClampMode::max;
        } else if (r.value() == "min") {
            p.coefficients.clamp = ClampMode::min;
        } else {
            r.fail("expected min or max");
        }
    } else if (k == "problem.zero_field") {
        p.zero_field = r.boolean();
    } else if (k == "field.nu") {
        p.covariance.nu = r.number();
    } else if (k == "field.sigma") {
        const double sigma = r.number();
        if (!(sigma > 0.0)) {
            r.fail("must be positive");
        }
        p.covariance.sigma2 = sigma * sigma;
    } else if (k == "field.sigma2") {
        p.covariance.sigma2 = r.number();
    } else if (k == "field.chi") {
        p.covariance.chi = r.number();
    } else if (k == "jumps.laws") {
        p.jumps.laws.clear();
        for (const std::string& item : split(r.value(), ',')) {
            const auto parts = split(item, ':');
            if (parts.size() != 2) {
                r.fail("law '" + item + "' must be written lo:hi");
            }
            p.jumps.laws.push_back({r.number(parts[0]), r.number(parts[1])});
        }
    } else if (k == "jumps.regions") {
        p.jumps.region_law.clear();
        for (const std::string& item : split(r.value(), ',')) {
            p.jumps.region_law.push_back(static_cast<int>(r.integer(item)));
        }
    } else if (k == "qoi.weight") {
        p.qoi.weight = r.expression();
    } else if (k == "qoi.time_rule") {
        if (r.value() == "terminal") {
            p.qoi.time_rule = TimeRule::terminal;
        } else if (r.value() == "time-integral") {
            p.qoi.time_rule = TimeRule::time_integral;
        } else {
            r.fail("expected terminal or time-integral");
        }
    } else if (k == "solver.kind") {
        p.solver = r.wrap([&] { return solver_from_string(r.value()); });
    } else if (k == "study.methods") {
        s.methods.clear();
        for (const std::string& item : split(r.value(), ',')) {
            s.methods.push_back(r.wrap([&] { return StudyMethod::parse(item); }));
        }
    } else if (k == "study.levels") {
        const auto dots = r.value().find("..");
        if (dots == std::string::npos) {
            s.level_min = s.level_max = r.integer();
        } else {
            s.level_min = static_cast<int>(r.integer(trim(r.value().substr(0, dots))));
            s.level_max = static_cast<int>(r.integer(trim(r.value().substr(dots + 2))));
        }
    } else if (k == "study.reps") {
        s.reps = r.integer();
    } else if (k == "study.ref_level") {
        s.ref_level = r.integer();
    } else if (k == "study.kappa") {
        s.kappa = r.number();
    } else if (k == "study.seed") {
        s.seed = r.unsigned_integer();
    } else if (k == "study.threads") {
        s.threads = r.integer();
    } else {
        r.fail("unknown key in section [" + section + "]");
    }
}

}  // namespace

void ProblemConfig::validate() const {
    std::vector<std::string> problems;
    if (!(T > 0.0) || !std::isfinite(T)) {
        problems.push_back("problem.T must be positive");
    }
    try {
        covariance.validate();
    } catch (const ConfigError& e) {
        problems.push_back(e.what());
    }
    try {
        jumps.validate();
    } catch (const ConfigError& e) {
        problems.push_back(e.what());
    }
    if (!problems.empty()) {
        std::string msg = "invalid problem configuration:";
        for (const auto& p : problems) {
            msg += "\n  - " + p;
        }
        throw ConfigError(msg);
    }
}

void StudyConfig::validate() const {
    std::vector<std::string> problems;
    if (methods.empty()) {
        problems.push_back("study.methods must not be empty");
    }
    if (level_min < 0 || level_max < level_min) {
        problems.push_back("study.levels must be a range lo..hi with 0 <= lo <= hi");
    }
    if (reps < 1) {
        problems.push_back("study.reps must be at least 1");
    }
    if (ref_level <= level_max) {
        problems.push_back("study.ref_level must exceed every studied level");
    }
    if (!(kappa > 0.5 && kappa <= 1.0)) {
        problems.push_back("study.kappa must lie in (1/2, 1]");
    }
    if (threads < 0) {
        problems.push_back("study.threads must be non-negative");
    }
    if (!problems.empty()) {
        std::string msg = "invalid study configuration:";
        for (const auto& p : problems) {
            msg += "\n  - " + p;
        }
        throw ConfigError(msg);
    }
}

Config parse_config(const std::string& text, const std::string& origin) {
    static const std::set<std::string> sections{"problem", "field", "jumps", "qoi", "solver", "study"};
    Config c;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    std::set<std::string> seen;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (content.empty()) {
            continue;
        }
        if (content.front() == '[') {
            if (content.back() != ']') {
                throw ConfigError(origin + ":" + std::to_string(line) + ": malformed section header");
            }
            section = trim(content.substr(1, content.size() - 2));
            if (!sections.contains(section)) {
                throw ConfigError(origin + ":" + std::to_string(line) + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line) + ": expected 'key = value'");
        }
        if (section.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line) + ": key outside of any section");
        }
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        const Reader reader(origin, line, section + "." + key, value);
        if (!seen.insert(section + "." + key).second) {
            reader.fail("set twice");
        }
        if (value.empty()) {
            reader.fail("empty value");
        }
        apply(c, section, key, reader);
    }
    c.problem.validate();
    c.study.validate();
    return c;
}

void override_config(Config& config, const std::string& key, const std::string& value, const std::string& origin) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
        throw ConfigError(origin + ": expected section.key, got '" + key + "'");
    }
    const Reader reader(origin, 0, key, trim(value));
    if (reader.value().empty()) {
        reader.fail("empty value");
    }
    apply(config, key.substr(0, dot), key.substr(dot + 1), reader);
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string serialize_problem(const ProblemConfig& p) {
    std::ostringstream os;
    os << "[problem]\n"
       << "T = " << fmt(p.T) << "\n"
       << "u0 = " << p.u0.text() << "\n"
       << "f = " << p.f.text() << "\n"
       << "a_bar = " << p.coefficients.a_bar.text() << "\n"
       << "b1 = " << p.coefficients.b1.text() << "\n"
       << "b2 = " << p.coefficients.b2.text() << "\n"
       << "clamp = " << (p.coefficients.clamp == ClampMode::max ? "max" : "min") << "\n"
       << "zero_field = " << (p.zero_field ? "true" : "false") << "\n\n";
    os << "[field]\n"
       << "nu = " << fmt(p.covariance.nu) << "\n"
       << "sigma2 = " << fmt(p.covariance.sigma2) << "\n"
       << "chi = " << fmt(p.covariance.chi) << "\n\n";
    os << "[jumps]\nlaws = ";
    for (std::size_t i = 0; i < p.jumps.laws.size(); ++i) {
        os << (i ? ", " : "") << fmt(p.jumps.laws[i].lo) << ":" << fmt(p.jumps.laws[i].hi);
    }
    os << "\nregions = ";
    for (std::size_t i = 0; i < p.jumps.region_law.size(); ++i) {
        os << (i ? ", " : "") << p.jumps.region_law[i];
    }
    os << "\n\n[qoi]\n"
       << "weight = " << p.qoi.weight.text() << "\n"
       << "time_rule = " << (p.qoi.time_rule == TimeRule::terminal ? "terminal" : "time-integral") << "\n\n";
    os << "[solver]\nkind = " << to_string(p.solver) << "\n";
    return os.str();
}

std::string serialize_config(const Config& c) {
    std::ostringstream os;
    os << serialize_problem(c.problem) << "\n[study]\nmethods = ";
    for (std::size_t i = 0; i < c.study.methods.size(); ++i) {
        os << (i ? ", " : "") << c.study.methods[i].label();
    }
    os << "\nlevels = " << c.study.level_min << ".." << c.study.level_max << "\n"
       << "reps = " << c.study.reps << "\n"
       << "ref_level = " << c.study.ref_level << "\n"
       << "kappa = " << fmt(c.study.kappa) << "\n"
       << "seed = " << c.study.seed << "\n"
       << "threads = " << c.study.threads << "\n";
    return os.str();
}

bool operator==(const ProblemConfig& a, const ProblemConfig& b) {
    return serialize_problem(a) == serialize_problem(b);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace jmlmc

#include "seqsense/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "seqsense/error.hpp"

namespace seqsense {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::optional<double> to_double(std::string_view s) {
    const std::string t = lower(trim(s));
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t[0] == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
}

// Recursive-descent reader for distribution expressions.
class DistParser {
public:
    explicit DistParser(std::string_view text) : s_(text) {}

    DistributionSpec parse_all() {
        DistributionSpec d = parse_dist();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing text");
        return d;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("distribution '" + std::string(s_) + "': " + what + " at offset " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    std::string ident() {
        skip();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (b == pos_) fail("expected a name");
        return lower(std::string(s_.substr(b, pos_ - b)));
    }

    double number() {
        skip();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ')' && s_[pos_] != '*' &&
               !std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        const auto v = to_double(s_.substr(b, pos_ - b));
        if (!v) {
            pos_ = b;
            fail("expected a number");
        }
        return *v;
    }

    // key=value pairs with numeric values, applied through `set`.
    template <typename Set>
    void numeric_args(Set set) {
        expect('(');
        if (accept(')')) return;
        do {
            const std::string key = ident();
            expect('=');
            if (!set(key, number())) fail("unknown parameter '" + key + "'");
        } while (accept(','));
        expect(')');
    }

    DistributionSpec parse_dist() {
        const std::string kind = ident();
        if (kind == "gaussian" || kind == "normal") {
            Gaussian g;
            numeric_args([&](const std::string& k, double v) {
                if (k == "mean") g.mean = v;
                else if (k == "var") g.variance = v;
                else return false;
                return true;
            });
            return g;
        }
        if (kind == "stable") {
            AlphaStable a;
            numeric_args([&](const std::string& k, double v) {
                if (k == "alpha") a.alpha = v;
                else if (k == "scale") a.scale = v;
                else if (k == "skew") a.skew = v;
                else if (k == "loc") a.location = v;
                else return false;
                return true;
            });
            return a;
        }
        if (kind == "rayleigh") {
            Rayleigh r;
            numeric_args([&](const std::string& k, double v) {
                if (k == "scale") r.scale = v;
                else return false;
                return true;
            });
            return r;
        }
        if (kind == "lognormal") {
            LogNormal l;
            numeric_args([&](const std::string& k, double v) {
                if (k == "mu") l.log_mean = v;
                else if (k == "var") l.log_variance = v;
                else return false;
                return true;
            });
            return l;
        }
        if (kind == "mixture") {
            GaussianMixture m;
            expect('(');
            do {
                const double w = number();
                expect('*');
                const DistributionSpec c = parse_dist();
                const auto* g = c.get_if<Gaussian>();
                if (!g) fail("mixture components must be gaussian");
                m.components.push_back({w, g->mean, g->variance});
            } while (accept(','));
            expect(')');
            return m;
        }
        if (kind == "contaminated") {
            std::optional<DistributionSpec> base, outlier;
            double eps = 0.0;
            expect('(');
            do {
                const std::string key = ident();
                expect('=');
                if (key == "base") base = parse_dist();
                else if (key == "outlier") outlier = parse_dist();
                else if (key == "eps") eps = number();
                else fail("unknown parameter '" + key + "'");
            } while (accept(','));
            expect(')');
            if (!base || !outlier) fail("contaminated needs base and outlier");
            return contaminated(*base, *outlier, eps);
        }
        fail("unknown distribution '" + kind + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

class Reader {
public:
    explicit Reader(std::string_view text) {
        std::string current;
        int line_no = 0;
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            std::string_view raw = text.substr(start, end - start);
            start = end + 1;
            ++line_no;
            if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
            const std::string line = trim(raw);
            if (line.empty() || line[0] == ';') {
                if (end == text.size()) break;
                continue;
            }
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
                current = lower(trim(std::string_view(line).substr(1, line.size() - 2)));
                if (!known_section(current))
                    throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + current + "]");
                sections_[current];
                section_lines_[current] = line_no;
            } else {
                const auto eq = line.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
                if (current.empty())
                    throw ConfigError("line " + std::to_string(line_no) + ": key outside of any section");
                const std::string key = lower(trim(std::string_view(line).substr(0, eq)));
                auto& sec = sections_[current];
                if (sec.count(key))
                    throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + current + "." + key);
                sec[key] = Entry{trim(std::string_view(line).substr(eq + 1)), line_no, false};
            }
            if (end == text.size()) break;
        }
    }

    Entry* find(const std::string& section, const std::string& key) {
        auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        auto e = s->second.find(key);
        if (e == s->second.end()) return nullptr;
        e->second.used = true;
        return &e->second;
    }

    // Node override first, then the shared section.
    Entry* find_node(int node, const std::string& shared, const std::string& key) {
        Entry* own = find("node." + std::to_string(node), key);
        Entry* common = find(shared, key);
        return own ? own : common;
    }

    std::vector<int> node_sections() const {
        std::vector<int> out;
        for (const auto& [name, _] : sections_) {
            if (name.rfind("node.", 0) == 0) out.push_back(std::stoi(name.substr(5)));
        }
        return out;
    }

    int section_line(const std::string& name) const {
        auto it = section_lines_.find(name);
        return it == section_lines_.end() ? 0 : it->second;
    }

    void reject_unused() const {
        for (const auto& [sname, sec] : sections_)
            for (const auto& [key, e] : sec)
                if (!e.used)
                    throw ConfigError("line " + std::to_string(e.line) + ": unknown key " + sname + "." + key);
    }

private:
    static bool known_section(const std::string& s) {
        if (s == "system" || s == "signal" || s == "node_test" || s == "fc" || s == "run") return true;
        if (s.rfind("node.", 0) != 0 || s.size() == 5) return false;
        return std::all_of(s.begin() + 5, s.end(), [](unsigned char c) { return std::isdigit(c); });
    }

    std::map<std::string, Section> sections_;
    std::map<std::string, int> section_lines_;
};

[[noreturn]] void bad(const Entry& e, const std::string& field, const std::string& what) {
    throw ConfigError("line " + std::to_string(e.line) + ": " + field + ": " + what);
}

double as_double(const Entry& e, const std::string& field) {
    const auto v = to_double(e.value);
    if (!v) bad(e, field, "expected a number, got '" + e.value + "'");
    return *v;
}

std::int64_t as_int(const Entry& e, const std::string& field) {
    const std::string t = trim(e.value);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        bad(e, field, "expected an integer, got '" + e.value + "'");
    return v;
}

std::uint64_t as_uint(const Entry& e, const std::string& field) {
    const std::string t = trim(e.value);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        bad(e, field, "expected a non-negative integer, got '" + e.value + "'");
    return v;
}

bool as_bool(const Entry& e, const std::string& field) {
    const std::string t = lower(e.value);
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    bad(e, field, "expected true or false");
}

DistributionSpec as_dist(const Entry& e, const std::string& field) {
    try {
        DistributionSpec d = parse_distribution(e.value);
        validate(d);
        return d;
    } catch (const ConfigError& err) {
        bad(e, field, err.what());
    }
}

std::optional<DistributionSpec> as_optional_dist(const Entry& e, const std::string& field) {
    if (lower(e.value) == "none") return std::nullopt;
    return as_dist(e, field);
}

FadingMode as_fading(const Entry& e, const std::string& field) {
    const std::string t = lower(e.value);
    if (t == "none") return FadingMode::None;
    if (t == "slow") return FadingMode::Slow;
    if (t == "fast") return FadingMode::Fast;
    bad(e, field, "expected none, slow or fast");
}

std::vector<Symbol> as_alphabet(const Entry& e, const std::string& field) {
    std::vector<Symbol> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) bad(e, field, "expected value:probability pairs");
        const auto v = to_double(item.substr(0, colon));
        const auto p = to_double(item.substr(colon + 1));
        if (!v || !p) bad(e, field, "malformed symbol '" + trim(item) + "'");
        out.push_back({*v, *p});
    }
    if (out.empty()) bad(e, field, "alphabet is empty");
    return out;
}

std::string fading_name(FadingMode m) {
    switch (m) {
        case FadingMode::None: return "none";
        case FadingMode::Slow: return "slow";
        case FadingMode::Fast: return "fast";
    }
    return "none";
}

// Reads the noise/EMI/outlier keys into `model` for the given lookup.
template <typename Find>
void read_noise(NoiseModel& model, Find find, const std::string& prefix, OutlierPlacement default_under) {
    if (Entry* e = find("noise")) model.noise = as_dist(*e, prefix + "noise");
    if (Entry* e = find("emi")) model.emi = as_optional_dist(*e, prefix + "emi");
    std::optional<DistributionSpec> outlier_law;
    bool has_outlier = false;
    if (Entry* e = find("outlier")) {
        outlier_law = as_optional_dist(*e, prefix + "outlier");
        has_outlier = outlier_law.has_value();
    }
    OutlierModel om;
    om.applies_under = default_under;
    if (Entry* e = find("outlier_eps")) om.epsilon = as_double(*e, prefix + "outlier_eps");
    if (Entry* e = find("outlier_under")) {
        const std::string t = lower(e->value);
        if (t == "h1") om.applies_under = OutlierPlacement::H1Only;
        else if (t == "both") om.applies_under = OutlierPlacement::Both;
        else bad(*e, prefix + "outlier_under", "expected h1 or both");
    }
    if (has_outlier) {
        om.law = *outlier_law;
        model.outlier = om;
    } else {
        model.outlier.reset();
    }
}

// Reads kind/centers/clips/thresholds; returns true when centers are "auto".
template <typename Find>
bool read_test(TestSpec& spec, Find find, const std::string& prefix, double mu0_default, double mu1_default,
               bool allow_auto, const char* lo_key, const char* hi_key) {
    TestKind kind = TestKind::M2RandomWalk;
    if (Entry* e = find("kind")) {
        try {
            kind = parse_test_kind(lower(e->value));
        } catch (const ConfigError& err) {
            bad(*e, prefix + "kind", err.what());
        }
    }
    spec = make_test_spec(kind, mu0_default, mu1_default, 1.0, 1.0);
    bool auto0 = allow_auto, auto1 = allow_auto;
    Entry* e0 = find("mu0");
    Entry* e1 = find("mu1");
    if (e0) {
        if (allow_auto && lower(e0->value) == "auto") auto0 = true;
        else {
            spec.mu0 = as_double(*e0, prefix + "mu0");
            auto0 = false;
        }
    }
    if (e1) {
        if (allow_auto && lower(e1->value) == "auto") auto1 = true;
        else {
            spec.mu1 = as_double(*e1, prefix + "mu1");
            auto1 = false;
        }
    }
    if (auto0 != auto1) {
        const Entry& at = e0 ? *e0 : *e1;
        bad(at, prefix + "mu0", "mu0 and mu1 must both be auto or both be numbers");
    }
    if (Entry* e = find("clip")) spec.clip = as_double(*e, prefix + "clip");
    if (Entry* e = find("inner_clip")) spec.inner_clip = as_double(*e, prefix + "inner_clip");
    if (Entry* e = find("min_samples")) spec.min_samples = static_cast<int>(as_int(*e, prefix + "min_samples"));
    if (Entry* e = find(lo_key)) spec.gamma0 = as_double(*e, prefix + lo_key);
    if (Entry* e = find(hi_key)) spec.gamma1 = as_double(*e, prefix + hi_key);
    return auto0;
}

void write_noise(std::ostringstream& out, const NoiseModel& m, OutlierPlacement default_under) {
    out << "noise = " << format_distribution(m.noise) << "\n";
    out << "emi = " << (m.emi ? format_distribution(*m.emi) : "none") << "\n";
    if (m.outlier) {
        out << "outlier = " << format_distribution(m.outlier->law) << "\n";
        out << "outlier_eps = " << format_double(m.outlier->epsilon) << "\n";
        out << "outlier_under = " << (m.outlier->applies_under == OutlierPlacement::Both ? "both" : "h1") << "\n";
    } else {
        out << "outlier = none\n";
        (void)default_under;
    }
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

DistributionSpec parse_distribution(std::string_view text) { return DistParser(text).parse_all(); }

std::string format_distribution(const DistributionSpec& spec) {
    struct V {
        std::string operator()(const Gaussian& g) const {
            return "gaussian(mean=" + format_double(g.mean) + ",var=" + format_double(g.variance) + ")";
        }
        std::string operator()(const AlphaStable& a) const {
            return "stable(alpha=" + format_double(a.alpha) + ",scale=" + format_double(a.scale) +
                   ",skew=" + format_double(a.skew) + ",loc=" + format_double(a.location) + ")";
        }
        std::string operator()(const GaussianMixture& m) const {
            std::string s = "mixture(";
            for (std::size_t i = 0; i < m.components.size(); ++i) {
                if (i) s += ",";
                const auto& c = m.components[i];
                s += format_double(c.weight) + "*" + (*this)(Gaussian{c.mean, c.variance});
            }
            return s + ")";
        }
        std::string operator()(const Rayleigh& r) const { return "rayleigh(scale=" + format_double(r.scale) + ")"; }
        std::string operator()(const LogNormal& l) const {
            return "lognormal(mu=" + format_double(l.log_mean) + ",var=" + format_double(l.log_variance) + ")";
        }
        std::string operator()(const Contaminated& c) const {
            return "contaminated(base=" + format_distribution(*c.base) + ",outlier=" +
                   format_distribution(*c.outlier) + ",eps=" + format_double(c.epsilon) + ")";
        }
    };
    return std::visit(V{}, spec.law());
}

ExperimentConfig parse_config(std::string_view text) {
    Reader r(text);
    ExperimentConfig cfg;
    SystemConfig& sys = cfg.system;

    auto sysf = [&](const char* key) { return r.find("system", key); };
    Entry* nodes = sysf("nodes");
    if (!nodes) throw ConfigError("missing required field system.nodes (number of local nodes L)");
    sys.nodes = static_cast<int>(as_int(*nodes, "system.nodes"));
    if (sys.nodes < 1) bad(*nodes, "system.nodes", "must be >= 1");
    if (Entry* e = sysf("topology")) {
        const std::string t = lower(e->value);
        if (t == "distributed") sys.topology = Topology::Distributed;
        else if (t == "single") sys.topology = Topology::SingleNode;
        else bad(*e, "system.topology", "expected distributed or single");
    }
    if (Entry* e = sysf("b0")) sys.b0 = as_double(*e, "system.b0");
    if (Entry* e = sysf("b1")) sys.b1 = as_double(*e, "system.b1");
    if (Entry* e = sysf("block_length")) sys.energy.block_length = static_cast<int>(as_int(*e, "system.block_length"));
    if (Entry* e = sysf("exponent")) sys.energy.exponent = as_double(*e, "system.exponent");
    if (Entry* e = sysf("detector")) {
        const std::string t = lower(e->value);
        if (t == "energy") sys.detector = Detector::Energy;
        else if (t == "mean") sys.detector = Detector::Mean;
        else bad(*e, "system.detector", "expected energy or mean");
    }
    if (Entry* e = sysf("delta")) sys.delta = as_double(*e, "system.delta");
    if (Entry* e = sysf("partial_coherence")) sys.partial_coherence = as_bool(*e, "system.partial_coherence");
    if (Entry* e = sysf("coherent_centers")) sys.coherent_centers = as_bool(*e, "system.coherent_centers");
    if (Entry* e = sysf("fading")) sys.node_fading.mode = as_fading(*e, "system.fading");
    if (Entry* e = sysf("multipath")) sys.node_fading.multipath = as_dist(*e, "system.multipath");
    if (Entry* e = sysf("shadow")) sys.node_fading.shadow = as_optional_dist(*e, "system.shadow");
    if (Entry* e = sysf("mac_fading")) {
        FadingModel mac;
        mac.mode = as_fading(*e, "system.mac_fading");
        if (Entry* m = sysf("mac_multipath")) mac.multipath = as_dist(*m, "system.mac_multipath");
        if (Entry* m = sysf("mac_shadow")) mac.shadow = as_optional_dist(*m, "system.mac_shadow");
        if (mac.mode != FadingMode::None) sys.mac_fading = mac;
    } else if (Entry* m = sysf("mac_multipath")) {
        bad(*m, "system.mac_multipath", "requires system.mac_fading");
    } else if (Entry* m2 = sysf("mac_shadow")) {
        bad(*m2, "system.mac_shadow", "requires system.mac_fading");
    }
    if (Entry* e = sysf("max_slots")) sys.max_slots = as_int(*e, "system.max_slots");

    for (int n : r.node_sections())
        if (n < 1 || n > sys.nodes)
            throw ConfigError("line " + std::to_string(r.section_line("node." + std::to_string(n))) +
                              ": [node." + std::to_string(n) + "] is outside 1.." + std::to_string(sys.nodes));

    sys.node_signals.assign(static_cast<std::size_t>(sys.nodes), SignalModel{});
    sys.node_tests.assign(static_cast<std::size_t>(sys.nodes), TestSpec{});
    cfg.auto_centers.assign(static_cast<std::size_t>(sys.nodes), true);
    for (int l = 1; l <= sys.nodes; ++l) {
        SignalModel& sig = sys.node_signals[static_cast<std::size_t>(l - 1)];
        const std::string prefix = "node." + std::to_string(l) + ".";
        auto sigf = [&](const char* key) { return r.find_node(l, "signal", key); };
        if (Entry* e = sigf("amplitude")) sig.amplitude = as_double(*e, prefix + "amplitude");
        if (Entry* e = sigf("alphabet")) sig.alphabet = as_alphabet(*e, prefix + "alphabet");
        read_noise(sig.noise, sigf, prefix, OutlierPlacement::H1Only);
        auto testf = [&](const char* key) { return r.find_node(l, "node_test", key); };
        cfg.auto_centers[static_cast<std::size_t>(l - 1)] =
            read_test(sys.node_tests[static_cast<std::size_t>(l - 1)], testf, prefix, 0.0, 1.0, true, "gamma0", "gamma1");
    }

    auto fcf = [&](const char* key) { return r.find("fc", key); };
    sys.fc_noise.noise = Gaussian{0.0, 5.0};
    read_noise(sys.fc_noise, fcf, "fc.", OutlierPlacement::Both);
    read_test(sys.fc_test, fcf, "fc.", -sys.b0, sys.b1, false, "beta0", "beta1");

    auto runf = [&](const char* key) { return r.find("run", key); };
    if (Entry* e = runf("trials")) cfg.trials = as_int(*e, "run.trials");
    if (Entry* e = runf("seed")) cfg.seed = as_uint(*e, "run.seed");
    if (Entry* e = runf("mean_samples")) cfg.mean_samples = as_int(*e, "run.mean_samples");
    if (Entry* e = runf("schedule")) cfg.use_schedule = as_bool(*e, "run.schedule");
    if (Entry* e = runf("sweep")) {
        cfg.sweep.clear();
        std::stringstream ss(e->value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto v = to_double(item);
            if (!v || !(*v > 0.0 && *v <= 1.0)) bad(*e, "run.sweep", "values must lie in (0, 1]");
            cfg.sweep.push_back(*v);
        }
        if (cfg.sweep.empty()) bad(*e, "run.sweep", "needs at least one value");
    }
    if (cfg.trials < 1) throw ConfigError("run.trials must be >= 1");
    if (cfg.mean_samples < 10'000) throw ConfigError("run.mean_samples must be >= 10000");

    r.reject_unused();
    try {
        // Auto centers are placeholders until the pre-run fills them in.
        validate(sys);
    } catch (const ConfigError& err) {
        throw ConfigError(std::string("invalid system: ") + err.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize(const ExperimentConfig& cfg) {
    const SystemConfig& sys = cfg.system;
    std::ostringstream out;
    out << "[system]\n";
    out << "topology = " << (sys.topology == Topology::Distributed ? "distributed" : "single") << "\n";
    out << "nodes = " << sys.nodes << "\n";
    out << "b0 = " << format_double(sys.b0) << "\n";
    out << "b1 = " << format_double(sys.b1) << "\n";
    out << "block_length = " << sys.energy.block_length << "\n";
    out << "exponent = " << format_double(sys.energy.exponent) << "\n";
    out << "detector = " << (sys.detector == Detector::Energy ? "energy" : "mean") << "\n";
    out << "delta = " << format_double(sys.delta) << "\n";
    out << "partial_coherence = " << (sys.partial_coherence ? "true" : "false") << "\n";
    out << "coherent_centers = " << (sys.coherent_centers ? "true" : "false") << "\n";
    out << "fading = " << fading_name(sys.node_fading.mode) << "\n";
    out << "multipath = " << format_distribution(sys.node_fading.multipath) << "\n";
    out << "shadow = " << (sys.node_fading.shadow ? format_distribution(*sys.node_fading.shadow) : "none") << "\n";
    if (sys.mac_fading) {
        out << "mac_fading = " << fading_name(sys.mac_fading->mode) << "\n";
        out << "mac_multipath = " << format_distribution(sys.mac_fading->multipath) << "\n";
        out << "mac_shadow = "
            << (sys.mac_fading->shadow ? format_distribution(*sys.mac_fading->shadow) : "none") << "\n";
    } else {
        out << "mac_fading = none\n";
    }
    out << "max_slots = " << sys.max_slots << "\n";

    for (int l = 0; l < sys.nodes; ++l) {
        const SignalModel& sig = sys.node_signals[static_cast<std::size_t>(l)];
        const TestSpec& t = sys.node_tests[static_cast<std::size_t>(l)];
        const bool autoc = static_cast<std::size_t>(l) < cfg.auto_centers.size() && cfg.auto_centers[static_cast<std::size_t>(l)];
        out << "\n[node." << (l + 1) << "]\n";
        out << "amplitude = " << format_double(sig.amplitude) << "\n";
        out << "alphabet = ";
        for (std::size_t i = 0; i < sig.alphabet.size(); ++i) {
            if (i) out << ", ";
            out << format_double(sig.alphabet[i].value) << ":" << format_double(sig.alphabet[i].probability);
        }
        out << "\n";
        write_noise(out, sig.noise, OutlierPlacement::H1Only);
        out << "kind = " << to_string(t.kind) << "\n";
        out << "mu0 = " << (autoc ? "auto" : format_double(t.mu0)) << "\n";
        out << "mu1 = " << (autoc ? "auto" : format_double(t.mu1)) << "\n";
        out << "clip = " << format_double(t.clip) << "\n";
        out << "inner_clip = " << format_double(t.inner_clip) << "\n";
        out << "min_samples = " << t.min_samples << "\n";
        out << "gamma0 = " << format_double(t.gamma0) << "\n";
        out << "gamma1 = " << format_double(t.gamma1) << "\n";
    }

    out << "\n[fc]\n";
    write_noise(out, sys.fc_noise, OutlierPlacement::Both);
    out << "kind = " << to_string(sys.fc_test.kind) << "\n";
    out << "mu0 = " << format_double(sys.fc_test.mu0) << "\n";
    out << "mu1 = " << format_double(sys.fc_test.mu1) << "\n";
    out << "clip = " << format_double(sys.fc_test.clip) << "\n";
    out << "inner_clip = " << format_double(sys.fc_test.inner_clip) << "\n";
    out << "min_samples = " << sys.fc_test.min_samples << "\n";
    out << "beta0 = " << format_double(sys.fc_test.gamma0) << "\n";
    out << "beta1 = " << format_double(sys.fc_test.gamma1) << "\n";

    out << "\n[run]\n";
    out << "trials = " << cfg.trials << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "mean_samples = " << cfg.mean_samples << "\n";
    out << "schedule = " << (cfg.use_schedule ? "true" : "false") << "\n";
    out << "sweep = ";
    for (std::size_t i = 0; i < cfg.sweep.size(); ++i) {
        if (i) out << ", ";
        out << format_double(cfg.sweep[i]);
    }
    out << "\n";
    return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace seqsense

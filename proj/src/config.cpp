#include "nrcas/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "nrcas/errors.hpp"

namespace nrcas {

namespace {

class TomlParser {
  public:
    explicit TomlParser(const std::string &text) : s_(text) {}

    TomlTable parse() {
        TomlTable table;
        std::string section;
        std::set<std::string> headers;
        table[section];
        while (true) {
            skip_ws_and_comments(true);
            if (eof()) break;
            if (peek() == '[') {
                ++pos_;
                std::string name;
                while (!eof() && peek() != ']' && peek() != '\n') name.push_back(s_[pos_++]);
                if (eof() || peek() != ']') fail("unterminated section header");
                ++pos_;
                section = trim(name);
                if (section.empty()) fail("empty section name");
                if (!headers.insert(section).second) fail("duplicate section [" + section + "]");
                table[section];
            } else {
                std::string key = parse_key();
                skip_ws_and_comments(false);
                if (eof() || peek() != '=') fail("expected '=' after key '" + key + "'");
                ++pos_;
                skip_ws_and_comments(false);
                TomlValue v = parse_value();
                if (!table[section].emplace(key, std::move(v)).second) fail("duplicate key '" + key + "'");
            }
            skip_ws_and_comments(false);
            if (!eof() && peek() != '\n') fail("unexpected trailing content");
        }
        return table;
    }

  private:
    const std::string &s_;
    std::size_t pos_ = 0;

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }

    [[noreturn]] void fail(const std::string &msg) const {
        std::size_t line = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
        throw ConfigError("config line " + std::to_string(line) + ": " + msg);
    }

    static std::string trim(const std::string &t) {
        auto b = t.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        return t.substr(b, t.find_last_not_of(" \t\r") - b + 1);
    }

    void skip_ws_and_comments(bool newlines) {
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
                ++pos_;
            } else if (c == '#') {
                while (!eof() && peek() != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string parse_key() {
        std::string key;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
            key.push_back(s_[pos_++]);
        if (key.empty()) fail("expected a key");
        return key;
    }

    TomlValue parse_value() {
        if (eof()) fail("missing value");
        char c = peek();
        if (c == '"') return {parse_string()};
        if (c == '[') {
            ++pos_;
            TomlArray arr;
            while (true) {
                skip_ws_and_comments(true);
                if (eof()) fail("unterminated array");
                if (peek() == ']') {
                    ++pos_;
                    break;
                }
                arr.push_back(parse_value());
                skip_ws_and_comments(true);
                if (!eof() && peek() == ',') {
                    ++pos_;
                } else if (eof() || peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
            return {std::move(arr)};
        }
        std::string tok;
        while (!eof() && peek() != ',' && peek() != ']' && peek() != '\n' && peek() != '#' && peek() != ' ' &&
               peek() != '\t' && peek() != '\r')
            tok.push_back(s_[pos_++]);
        if (tok == "true") return {true};
        if (tok == "false") return {false};
        if (tok.empty()) fail("missing value");
        std::string num;
        for (char ch : tok)
            if (ch != '_') num.push_back(ch);
        const bool is_float = num.find_first_of(".eE") != std::string::npos || num == "inf" || num == "+inf" ||
                              num == "-inf" || num == "nan";
        char *end = nullptr;
        if (!is_float) {
            long long v = std::strtoll(num.c_str(), &end, 10);
            if (end == num.c_str() + num.size()) return {static_cast<std::int64_t>(v)};
        } else {
            double v = std::strtod(num.c_str(), &end);
            if (end == num.c_str() + num.size()) return {v};
        }
        fail("cannot parse value '" + tok + "'");
    }

    std::string parse_string() {
        ++pos_;
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = s_[pos_++];
            if (c == '"') break;
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                char e = s_[pos_++];
                switch (e) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out.push_back(c);
            }
        }
        return out;
    }
};

// Typed, consuming access to one section; leftover keys are reported as unknown.
class Section {
  public:
    Section(std::string name, std::map<std::string, TomlValue> entries)
        : name_(std::move(name)), entries_(std::move(entries)) {}

    bool has(const std::string &key) const { return entries_.count(key) > 0; }

    double number(const std::string &key, double def) { return take_number(key).value_or(def); }

    std::optional<double> take_number(const std::string &key) {
        auto v = take(key);
        if (!v) return std::nullopt;
        if (auto *d = std::get_if<double>(&v->data)) return *d;
        if (auto *i = std::get_if<std::int64_t>(&v->data)) return static_cast<double>(*i);
        wrong(key, "a number");
    }

    std::int64_t integer(const std::string &key, std::int64_t def) {
        auto v = take(key);
        if (!v) return def;
        if (auto *i = std::get_if<std::int64_t>(&v->data)) return *i;
        wrong(key, "an integer");
    }

    std::size_t count(const std::string &key, std::size_t def) {
        auto i = integer(key, static_cast<std::int64_t>(def));
        if (i < 0) throw ConfigError("[" + name_ + "] " + key + " must be non-negative");
        return static_cast<std::size_t>(i);
    }

    std::string string(const std::string &key, const std::string &def) {
        auto v = take(key);
        if (!v) return def;
        if (auto *s = std::get_if<std::string>(&v->data)) return *s;
        wrong(key, "a string");
    }

    std::vector<double> numbers(const std::string &key) {
        auto v = take(key);
        if (!v) return {};
        auto *arr = std::get_if<TomlArray>(&v->data);
        if (!arr) wrong(key, "an array of numbers");
        std::vector<double> out;
        for (const auto &e : *arr) {
            if (auto *d = std::get_if<double>(&e.data))
                out.push_back(*d);
            else if (auto *i = std::get_if<std::int64_t>(&e.data))
                out.push_back(static_cast<double>(*i));
            else
                wrong(key, "an array of numbers");
        }
        return out;
    }

    std::vector<std::size_t> counts(const std::string &key) {
        std::vector<std::size_t> out;
        for (double d : numbers(key)) {
            if (d < 0 || d != std::floor(d)) wrong(key, "an array of non-negative integers");
            out.push_back(static_cast<std::size_t>(d));
        }
        return out;
    }

    void finish() const {
        if (!entries_.empty()) throw ConfigError("unknown key '" + entries_.begin()->first + "' in [" + name_ + "]");
    }

  private:
    std::string name_;
    std::map<std::string, TomlValue> entries_;

    std::optional<TomlValue> take(const std::string &key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        TomlValue v = std::move(it->second);
        entries_.erase(it);
        return v;
    }

    [[noreturn]] void wrong(const std::string &key, const char *what) const {
        throw ConfigError("[" + name_ + "] " + key + " must be " + what);
    }
};

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string quote(const std::string &s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    return out + "\"";
}

template <class T, class F> std::string list(const std::vector<T> &v, F f) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f(v[i]);
    return out + "]";
}

std::string resolve(const std::string &p, const std::filesystem::path &base) {
    if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
}

const char *kind_name(MaskKind k) { return k == MaskKind::cosecant_squared ? "cosecant_squared" : "flat_top"; }

} // namespace

TomlTable parse_toml(const std::string &text) { return TomlParser(text).parse(); }

ScenarioConfig parse_config(const std::string &text, const std::filesystem::path &base_dir) {
    TomlTable table = parse_toml(text);
    static const std::set<std::string> known = {"",      "scenario",   "geometry", "grid", "mask",
                                                "reference", "operator", "constraint", "pso",  "output"};
    for (const auto &[name, entries] : table)
        if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");
    auto section = [&](const std::string &name) { return Section(name, table[name]); };

    ScenarioConfig cfg;
    {
        auto top = section("");
        top.finish();
    }
    {
        auto s = section("scenario");
        cfg.name = s.string("name", cfg.name);
        s.finish();
    }
    {
        auto s = section("geometry");
        auto &g = cfg.geometry;
        g.kind = s.string("kind", g.kind);
        g.n = static_cast<int>(s.integer("n", g.n));
        g.nx = static_cast<int>(s.integer("nx", g.nx));
        g.ny = static_cast<int>(s.integer("ny", g.ny));
        g.spacing = s.number("spacing", g.spacing);
        auto axis = s.string("axis", g.axis == Axis::x ? "x" : "y");
        if (axis != "x" && axis != "y") throw ConfigError("[geometry] axis must be \"x\" or \"y\"");
        g.axis = axis == "x" ? Axis::x : Axis::y;
        g.path = resolve(s.string("path", g.path), base_dir);
        s.finish();
        if (g.kind != "linear" && g.kind != "planar" && g.kind != "file")
            throw ConfigError("[geometry] kind must be linear, planar or file");
        if (g.kind == "file" && g.path.empty()) throw ConfigError("[geometry] kind = \"file\" needs a path");
    }
    {
        auto s = section("grid");
        cfg.grid.oversampling = s.count("oversampling", cfg.grid.oversampling);
        cfg.grid.samples = s.count("samples", cfg.grid.samples);
        cfg.grid.n_theta = s.count("n_theta", cfg.grid.n_theta);
        cfg.grid.n_phi = s.count("n_phi", cfg.grid.n_phi);
        s.finish();
        if (cfg.grid.oversampling < 1) throw ConfigError("[grid] oversampling must be positive");
        if ((cfg.grid.n_theta == 0) != (cfg.grid.n_phi == 0))
            throw ConfigError("[grid] n_theta and n_phi must be given together");
    }
    {
        auto s = section("mask");
        auto &m = cfg.mask;
        auto kind = s.string("kind", kind_name(m.kind));
        if (kind == "cosecant_squared")
            m.kind = MaskKind::cosecant_squared;
        else if (kind == "flat_top")
            m.kind = MaskKind::flat_top;
        else
            throw ConfigError("[mask] kind must be cosecant_squared or flat_top");
        m.sll_db = s.number("sll_db", m.sll_db);
        m.rpe_db = s.number("rpe_db", m.rpe_db);
        m.fnbw_deg = s.number("fnbw_deg", m.fnbw_deg);
        m.fnbw_x_deg = s.take_number("fnbw_x_deg");
        m.fnbw_y_deg = s.take_number("fnbw_y_deg");
        m.transition_deg = s.number("transition_deg", m.transition_deg);
        m.lobe_start_deg = s.take_number("lobe_start_deg");
        m.csc_start_deg = s.number("csc_start_deg", m.csc_start_deg);
        m.sll_alt_db = s.take_number("sll_alt_db");
        s.finish();
        try {
            validate(m);
        } catch (const InvalidArgument &e) {
            throw ConfigError(std::string("[mask] ") + e.what());
        }
    }
    {
        auto s = section("operator");
        cfg.chi = s.number("chi", cfg.chi);
        s.finish();
        if (!(cfg.chi > 0 && cfg.chi < 1)) throw ConfigError("[operator] chi must lie in (0, 1)");
    }
    {
        auto s = section("reference");
        auto &r = cfg.reference;
        r.source = s.string("source", r.source);
        r.path = resolve(s.string("path", r.path), base_dir);
        auto &p = r.projection;
        p.max_iters = s.count("max_iters", p.max_iters);
        p.seed = static_cast<std::uint64_t>(s.count("seed", p.seed));
        p.restarts = s.count("restarts", p.restarts);
        p.tolerance = s.number("tolerance", p.tolerance);
        p.lobe_margin_db = s.number("lobe_margin_db", p.lobe_margin_db);
        p.sidelobe_margin_db = s.number("sidelobe_margin_db", p.sidelobe_margin_db);
        r.chi = s.take_number("chi");
        s.finish();
        if (r.source != "projection" && r.source != "file")
            throw ConfigError("[reference] source must be projection or file");
        if (r.source == "file" && r.path.empty()) throw ConfigError("[reference] source = \"file\" needs a path");
        if (p.max_iters < 1) throw ConfigError("[reference] max_iters must be at least 1");
        if (r.chi && !(*r.chi > 0 && *r.chi < 1)) throw ConfigError("[reference] chi must lie in (0, 1)");
        p.chi = r.chi.value_or(cfg.chi);
    }
    {
        auto s = section("constraint");
        auto kind = s.string("kind", "drr");
        try {
            if (kind == "drr") {
                cfg.constraint = DrrConstraint{};
            } else if (kind == "forbidden") {
                auto region = s.string("region", "rectangle");
                if (region == "rectangle") {
                    cfg.constraint = ForbiddenConstraint{ApertureRegion::rectangle(
                        s.number("x_min", NAN), s.number("x_max", NAN), s.number("y_min", NAN), s.number("y_max", NAN))};
                } else if (region == "circle") {
                    cfg.constraint = ForbiddenConstraint{
                        ApertureRegion::circle(s.number("x_c", NAN), s.number("y_c", NAN), s.number("radius", NAN))};
                } else if (region == "indices") {
                    cfg.constraint = ForbiddenConstraint{ApertureRegion::index_set(s.counts("indices"))};
                } else {
                    throw ConfigError("[constraint] region must be rectangle, circle or indices");
                }
            } else if (kind == "quantized") {
                if (s.has("bits") && s.has("levels"))
                    throw ConfigError("[constraint] give either bits or levels, not both");
                QuantizedConstraint q;
                if (s.has("bits"))
                    q = QuantizedConstraint::from_bits(static_cast<int>(s.integer("bits", 0)));
                else
                    q.levels = s.numbers("levels");
                cost_quantized(ExcitationVector(Eigen::VectorXcd::Zero(1)), q.levels); // validates the levels
                cfg.constraint = q;
            } else {
                throw ConfigError("[constraint] kind must be drr, forbidden or quantized");
            }
        } catch (const InvalidArgument &e) {
            throw ConfigError(std::string("[constraint] ") + e.what());
        }
        s.finish();
    }
    {
        auto s = section("pso");
        auto &p = cfg.pso;
        p.swarm_size = s.count("swarm_size", p.swarm_size);
        p.inertia = s.number("inertia", p.inertia);
        p.cognitive = s.number("cognitive", p.cognitive);
        p.social = s.number("social", p.social);
        p.max_iters = s.count("max_iters", p.max_iters);
        p.target_cost = s.number("target_cost", p.target_cost);
        p.seed = static_cast<std::uint64_t>(s.count("seed", p.seed));
        p.search_bound = s.number("search_bound", p.search_bound);
        p.search_bound_factor = s.number("search_bound_factor", p.search_bound_factor);
        p.velocity_clamp = s.number("velocity_clamp", p.velocity_clamp);
        p.snapshot_iterations = s.counts("snapshots");
        s.finish();
        try {
            validate(p);
        } catch (const InvalidArgument &e) {
            throw ConfigError(std::string("[pso] ") + e.what());
        }
    }
    {
        auto s = section("output");
        auto &o = cfg.output;
        o.directory = resolve(s.string("directory", o.directory), base_dir);
        o.phi_cuts = s.numbers("phi_cuts");
        o.cut_step_deg = s.number("cut_step_deg", o.cut_step_deg);
        o.hard_zero_threshold = s.number("hard_zero_threshold", o.hard_zero_threshold);
        s.finish();
        if (!(o.cut_step_deg > 0 && o.cut_step_deg <= 90)) throw ConfigError("[output] cut_step_deg must lie in (0, 90]");
        if (!(o.hard_zero_threshold >= 0)) throw ConfigError("[output] hard_zero_threshold must be non-negative");
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string serialize_config(const ScenarioConfig &cfg) {
    std::ostringstream o;
    o << "[scenario]\nname = " << quote(cfg.name) << "\n\n";

    const auto &g = cfg.geometry;
    o << "[geometry]\nkind = " << quote(g.kind) << "\nn = " << g.n << "\nnx = " << g.nx << "\nny = " << g.ny
      << "\nspacing = " << num(g.spacing) << "\naxis = " << quote(g.axis == Axis::x ? "x" : "y")
      << "\npath = " << quote(g.path) << "\n\n";

    o << "[grid]\noversampling = " << cfg.grid.oversampling << "\nsamples = " << cfg.grid.samples
      << "\nn_theta = " << cfg.grid.n_theta << "\nn_phi = " << cfg.grid.n_phi << "\n\n";

    const auto &m = cfg.mask;
    o << "[mask]\nkind = " << quote(kind_name(m.kind)) << "\nsll_db = " << num(m.sll_db) << "\nrpe_db = "
      << num(m.rpe_db) << "\nfnbw_deg = " << num(m.fnbw_deg) << "\ntransition_deg = " << num(m.transition_deg)
      << "\ncsc_start_deg = " << num(m.csc_start_deg) << '\n';
    if (m.fnbw_x_deg) o << "fnbw_x_deg = " << num(*m.fnbw_x_deg) << '\n';
    if (m.fnbw_y_deg) o << "fnbw_y_deg = " << num(*m.fnbw_y_deg) << '\n';
    if (m.lobe_start_deg) o << "lobe_start_deg = " << num(*m.lobe_start_deg) << '\n';
    if (m.sll_alt_db) o << "sll_alt_db = " << num(*m.sll_alt_db) << '\n';
    o << '\n';

    o << "[operator]\nchi = " << num(cfg.chi) << "\n\n";

    const auto &r = cfg.reference;
    const auto &p = r.projection;
    o << "[reference]\nsource = " << quote(r.source) << "\npath = " << quote(r.path) << "\nmax_iters = " << p.max_iters
      << "\nseed = " << p.seed << "\nrestarts = " << p.restarts << "\ntolerance = " << num(p.tolerance)
      << "\nlobe_margin_db = " << num(p.lobe_margin_db) << "\nsidelobe_margin_db = " << num(p.sidelobe_margin_db)
      << '\n';
    if (r.chi) o << "chi = " << num(*r.chi) << '\n';
    o << '\n';

    o << "[constraint]\n";
    if (std::holds_alternative<DrrConstraint>(cfg.constraint)) {
        o << "kind = \"drr\"\n";
    } else if (auto *f = std::get_if<ForbiddenConstraint>(&cfg.constraint)) {
        o << "kind = \"forbidden\"\n";
        const auto &shape = f->region.shape();
        if (auto *rc = std::get_if<Rectangle>(&shape))
            o << "region = \"rectangle\"\nx_min = " << num(rc->x_min) << "\nx_max = " << num(rc->x_max)
              << "\ny_min = " << num(rc->y_min) << "\ny_max = " << num(rc->y_max) << '\n';
        else if (auto *c = std::get_if<Circle>(&shape))
            o << "region = \"circle\"\nx_c = " << num(c->x_c) << "\ny_c = " << num(c->y_c) << "\nradius = "
              << num(c->radius) << '\n';
        else
            o << "region = \"indices\"\nindices = "
              << list(std::get<IndexSet>(shape).indices, [](std::size_t i) { return std::to_string(i); }) << '\n';
    } else {
        o << "kind = \"quantized\"\nlevels = "
          << list(std::get<QuantizedConstraint>(cfg.constraint).levels, [](double d) { return num(d); }) << '\n';
    }
    o << '\n';

    const auto &s = cfg.pso;
    o << "[pso]\nswarm_size = " << s.swarm_size << "\ninertia = " << num(s.inertia) << "\ncognitive = "
      << num(s.cognitive) << "\nsocial = " << num(s.social) << "\nmax_iters = " << s.max_iters
      << "\ntarget_cost = " << num(s.target_cost) << "\nseed = " << s.seed << "\nsearch_bound = "
      << num(s.search_bound) << "\nsearch_bound_factor = " << num(s.search_bound_factor)
      << "\nvelocity_clamp = " << num(s.velocity_clamp) << "\nsnapshots = "
      << list(s.snapshot_iterations, [](std::size_t i) { return std::to_string(i); }) << "\n\n";

    const auto &out = cfg.output;
    o << "[output]\ndirectory = " << quote(out.directory) << "\nphi_cuts = "
      << list(out.phi_cuts, [](double d) { return num(d); }) << "\ncut_step_deg = " << num(out.cut_step_deg)
      << "\nhard_zero_threshold = " << num(out.hard_zero_threshold) << '\n';
    return o.str();
}

} // namespace nrcas

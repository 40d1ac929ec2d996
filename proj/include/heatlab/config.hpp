#pragma once

// Plain-text key=value configuration. Lines are `key = value`, '#' starts a
// comment. Every key must be consumed by the subcommand that reads the
// config; leftovers are a parse error, so typos fail loudly.

#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "heatlab/errors.hpp"
#include "heatlab/geometry.hpp"
#include "heatlab/solver.hpp"

namespace heatlab::config {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

class Config {
  public:
    static Config parse(std::istream& in) {
        Config cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ParseError("duplicate key '" + key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config parse_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    // flags override config keys one-to-one
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) throw ParseError("missing required key '" + key + "'");
        consumed_.insert(key);
        return it->second;
    }

    std::optional<std::string> get_optional_string(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return get_string(key);
    }

    double get_double(const std::string& key) { return to_double(key, get_string(key)); }

    double get_double_or(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return get_double(key);
    }

    std::optional<double> get_optional_double(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return get_double(key);
    }

    int get_int(const std::string& key) {
        double v = get_double(key);
        int i = static_cast<int>(std::llround(v));
        if (std::abs(v - i) > 1e-9) throw ParseError("key '" + key + "' must be an integer");
        return i;
    }

    int get_int_or(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        return get_int(key);
    }

    std::vector<double> get_list(const std::string& key) {
        std::string raw = get_string(key);
        std::vector<double> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(to_double(key, item));
        }
        if (out.empty()) throw ParseError("key '" + key + "' must be a comma-separated list");
        return out;
    }

    // every key must have been read by now
    void reject_unconsumed() const {
        for (const auto& [k, v] : values_)
            if (!consumed_.count(k)) throw ParseError("unknown key '" + k + "'");
    }

  private:
    double to_double(const std::string& key, const std::string& raw) const {
        try {
            std::size_t pos = 0;
            double v = std::stod(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ParseError("key '" + key + "': cannot parse number '" + raw + "'");
        }
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

// arcs = [center,half_width];[center,half_width]...
inline std::vector<geometry::ArcRegion> parse_arcs(const std::string& raw) {
    std::vector<geometry::ArcRegion> arcs;
    std::stringstream ss(raw);
    std::string piece;
    while (std::getline(ss, piece, ';')) {
        piece = trim(piece);
        if (piece.empty()) continue;
        if (piece.front() != '[' || piece.back() != ']')
            throw ParseError("arc entry must look like [center,half_width]");
        piece = piece.substr(1, piece.size() - 2);
        auto comma = piece.find(',');
        if (comma == std::string::npos) throw ParseError("arc entry needs two numbers");
        try {
            double c = std::stod(trim(piece.substr(0, comma)));
            double w = std::stod(trim(piece.substr(comma + 1)));
            arcs.emplace_back(geometry::Direction(c), w);
        } catch (const InvalidSpec&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("arc entry needs two numbers");
        }
    }
    if (arcs.empty()) throw ParseError("arcs list is empty");
    return arcs;
}

inline std::string format_arcs(const std::vector<geometry::ArcRegion>& arcs) {
    std::string out;
    char buf[96];
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "[%.17g,%.17g]", arcs[i].center.angle(),
                      arcs[i].half_width);
        if (i) out += ';';
        out += buf;
    }
    return out;
}

// probes = x,y;x,y...
inline std::vector<geometry::Point2> parse_points(const std::string& raw) {
    std::vector<geometry::Point2> pts;
    std::stringstream ss(raw);
    std::string piece;
    while (std::getline(ss, piece, ';')) {
        piece = trim(piece);
        if (piece.empty()) continue;
        auto comma = piece.find(',');
        if (comma == std::string::npos) throw ParseError("point entry must be x,y");
        try {
            pts.push_back({std::stod(trim(piece.substr(0, comma))),
                           std::stod(trim(piece.substr(comma + 1)))});
        } catch (const std::exception&) {
            throw ParseError("point entry must be x,y");
        }
    }
    if (pts.empty()) throw ParseError("point list is empty");
    return pts;
}

// Structured, serializable description of a phase domain. The sandwich
// omega is the translated cone, optionally with a ball bump on its boundary.
struct DomainSpec {
    std::string kind; // cone | sandwich | oscillatory | halfplane | disk | all | none
    std::vector<geometry::ArcRegion> arcs; // cone/sandwich base; oscillatory: [A, B]
    double p = 0.0;                        // apex direction (sandwich)
    double h = 0.0;                        // sandwich offset
    double omega_shift = 0.0;              // translate of the cone used as omega; default h/2
    std::optional<geometry::Point2> bump_center;
    double bump_radius = 0.0;
    double delta = 0.0, R = 0.0;           // oscillatory
    std::optional<int> n_max;
    double disk_radius = 1.0;

    static DomainSpec from_config(Config& cfg) {
        DomainSpec d;
        d.kind = cfg.get_string("kind");
        if (d.kind == "cone") {
            d.arcs = parse_arcs(cfg.get_string("arcs"));
        } else if (d.kind == "sandwich") {
            d.arcs = parse_arcs(cfg.get_string("arcs"));
            d.p = cfg.get_double("p");
            d.h = cfg.get_double("h");
            d.omega_shift = cfg.get_double_or("omega_shift", 0.5 * d.h);
            if (cfg.has("bump_radius")) {
                d.bump_radius = cfg.get_double("bump_radius");
                d.bump_center = geometry::Point2{cfg.get_double("bump_x"), cfg.get_double("bump_y")};
            }
        } else if (d.kind == "oscillatory") {
            d.arcs = parse_arcs(cfg.get_string("arcs"));
            if (d.arcs.size() != 2)
                throw ParseError("oscillatory kind needs arcs = [A];[B]");
            d.delta = cfg.get_double_or("delta", 0.0); // 0 = derive from epsilon
            d.R = cfg.get_double("R");
            // n_max = 0 requests the unbounded family (truncated with a warning)
            int nm = cfg.get_int_or("n_max", geometry::OscillatoryDomainSpec::default_cap);
            d.n_max = (nm == 0) ? std::nullopt : std::optional<int>(nm);
        } else if (d.kind == "disk") {
            d.disk_radius = cfg.get_double("radius");
        } else if (d.kind == "halfplane" || d.kind == "all" || d.kind == "none") {
            // no parameters
        } else {
            throw ParseError("unknown domain kind '" + d.kind + "'");
        }
        return d;
    }

    std::string to_text() const {
        std::ostringstream os;
        char buf[64];
        os << "kind = " << kind << "\n";
        if (kind == "cone" || kind == "sandwich" || kind == "oscillatory")
            os << "arcs = " << format_arcs(arcs) << "\n";
        auto emit = [&](const char* key, double v) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << key << " = " << buf << "\n";
        };
        if (kind == "sandwich") {
            emit("p", p);
            emit("h", h);
            emit("omega_shift", omega_shift);
            if (bump_center) {
                emit("bump_x", bump_center->x);
                emit("bump_y", bump_center->y);
                emit("bump_radius", bump_radius);
            }
        }
        if (kind == "oscillatory") {
            emit("delta", delta);
            emit("R", R);
            if (n_max) os << "n_max = " << *n_max << "\n";
        }
        if (kind == "disk") emit("radius", disk_radius);
        return os.str();
    }

    geometry::SandwichSpec build_sandwich() const {
        geometry::RegionSet base(arcs);
        geometry::ConeDomain cone(base);
        geometry::Point2 shift = omega_shift * geometry::Direction(p).unit();
        std::optional<geometry::Point2> bc = bump_center;
        double br = bump_radius;
        auto omega = [cone, shift, bc, br](geometry::Point2 x) {
            if (cone.indicator(x + shift)) return true; // x in Omega_A - shift*p
            if (bc) {
                double dx = x.x - bc->x, dy = x.y - bc->y;
                if (dx * dx + dy * dy < br * br) return true;
            }
            return false;
        };
        return geometry::SandwichSpec{base, geometry::Direction(p), h, omega};
    }

    geometry::OscillatoryDomainSpec build_oscillatory() const {
        return geometry::OscillatoryDomainSpec(arcs[0], arcs[1], delta, R, n_max);
    }

    geometry::PhaseDomain build() const {
        using geometry::PhaseDomain;
        using geometry::Point2;
        if (kind == "cone")
            return PhaseDomain::from_cone(geometry::ConeDomain(geometry::RegionSet(arcs)));
        if (kind == "sandwich") return PhaseDomain::from_sandwich(build_sandwich());
        if (kind == "oscillatory") return PhaseDomain::from_oscillatory(build_oscillatory());
        if (kind == "halfplane") return PhaseDomain::custom([](Point2 x) { return x.x > 0.0; });
        if (kind == "disk") {
            double r = disk_radius;
            return PhaseDomain::custom([r](Point2 x) { return x.x * x.x + x.y * x.y < r * r; }, r);
        }
        if (kind == "all") return PhaseDomain::custom([](Point2) { return true; });
        if (kind == "none")
            return PhaseDomain::custom([](Point2) { return false; }, 0.0);
        throw ParseError("unknown domain kind '" + kind + "'");
    }
};

inline solver::GridSpec parse_grid(Config& cfg) {
    return solver::GridSpec(cfg.get_double("grid_L"), cfg.get_double("grid_h"));
}

inline solver::RunOptions parse_run_options(Config& cfg) {
    solver::RunOptions opts;
    opts.step.theta = cfg.get_double_or("theta", 1.0);
    opts.step.cg_tol = cfg.get_double_or("cg_tol", 1e-10);
    opts.step.cg_maxiter = cfg.get_int_or("cg_maxiter", 20000);
    opts.rate = cfg.get_double_or("rate", 24.0);
    opts.budget_tol = cfg.get_double_or("tol", 0.25);
    return opts;
}

} // namespace heatlab::config

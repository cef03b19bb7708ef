#include "plattice/process.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace plattice {

namespace {

struct SiteLayerHash {
    std::size_t operator()(const SiteLayer& sl) const {
        return SiteHash{}(sl.site) * 1315423911u ^ std::size_t(sl.layer);
    }
};

using DeletedSet = std::unordered_set<SiteLayer, SiteLayerHash>;

// Lexicographic odometer over [-half, half]^d.
class BoxIter {
public:
    BoxIter(int dim, std::int64_t half) : dim_(dim), half_(half) {
        site_.d = dim;
        for (int i = 0; i < dim; ++i) site_.c[i] = std::int32_t(-half);
        done_ = half < 0;
    }
    bool done() const { return done_; }
    const Site& site() const { return site_; }
    void next() {
        for (int i = dim_ - 1; i >= 0; --i) {
            if (site_.c[i] < half_) {
                ++site_.c[i];
                for (int j = i + 1; j < dim_; ++j) site_.c[j] = std::int32_t(-half_);
                return;
            }
        }
        done_ = true;
    }

private:
    int dim_;
    std::int64_t half_;
    Site site_;
    bool done_ = false;
};

bool inside_box(const double* p, int d, double r) {
    for (int i = 0; i < d; ++i)
        if (p[i] < -r || p[i] > r) return false;
    return true;
}

void push_point(PointConfiguration& cfg, const double* p, const Site& site, std::int8_t layer) {
    cfg.coords.insert(cfg.coords.end(), p, p + cfg.dim);
    cfg.prov_site.push_back(site);
    cfg.prov_layer.push_back(layer);
}

}  // namespace

void Window::validate() const {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("window dim outside range");
    if (radius < 1) throw ConfigError("window radius must be >= 1");
    if (margin < 0) throw ConfigError("window margin must be >= 0");
}

std::uint64_t Window::site_count_checked() const {
    validate();
    const std::uint64_t side = std::uint64_t(2 * (radius + margin) + 1);
    std::uint64_t n = 1;
    for (int i = 0; i < dim; ++i) {
        if (n > site_budget / side + 1) throw ResourceError("window site count exceeds budget");
        n *= side;
    }
    if (n > site_budget)
        throw ResourceError("window site count " + std::to_string(n) + " exceeds budget " +
                            std::to_string(site_budget));
    return n;
}

MarginChoice margin_by_quantile(const PerturbationLaw& law, std::int64_t radius, int dim,
                                double p, std::uint64_t site_budget) {
    // Largest margin that keeps the site box within budget.
    const double side_cap = std::pow(double(site_budget), 1.0 / dim);
    std::int64_t cap = std::int64_t((side_cap - 1.0) / 2.0) - radius;
    if (cap < 0) cap = 0;

    // tail_linf is monotone decreasing; binary search the quantile margin.
    std::int64_t lo = 0, hi = 1;
    while (tail_linf(law, double(hi)) > p && hi < (1ll << 50)) hi <<= 1;
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (tail_linf(law, double(mid)) <= p)
            hi = mid;
        else
            lo = mid + 1;
    }
    MarginChoice choice;
    choice.margin = lo;
    if (choice.margin > cap) {
        choice.margin = cap;
        choice.truncated = true;
    }
    choice.tail_p = tail_linf(law, double(choice.margin));
    return choice;
}

void ProcessSpec::validate() const {
    law.validate();
    if (doubled) {
        if (!(doubled->delta > 0.0 && doubled->delta < doubled->sigma))
            throw ConfigError("doubled process requires 0 < delta < sigma");
        for (const auto& sl : deleted_sites)
            if (sl.layer != 1 && sl.layer != 2)
                throw ConfigError("doubled deletions must name layer 1 or 2");
    } else {
        for (const auto& sl : deleted_sites)
            if (sl.layer != 0) throw ConfigError("single-layer deletions must have layer 0");
    }
    for (const auto& v : inserted_points)
        if (int(v.size()) != law.dim) throw ConfigError("inserted point dimension mismatch");
}

ProcessSpec delete_sites(ProcessSpec spec, const std::vector<Site>& s) {
    for (const auto& x : s) {
        SiteLayer sl{x, 0};
        bool dup = false;
        for (const auto& e : spec.deleted_sites) dup = dup || e == sl;
        if (!dup) spec.deleted_sites.push_back(sl);
    }
    return spec;
}

ProcessSpec delete_doubled(ProcessSpec spec, const Site& site, int layer) {
    SiteLayer sl{site, layer};
    for (const auto& e : spec.deleted_sites)
        if (e == sl) return spec;
    spec.deleted_sites.push_back(sl);
    return spec;
}

PointConfiguration PointConfiguration::blind() const {
    PointConfiguration b;
    b.dim = dim;
    b.radius = radius;
    b.coords = coords;
    b.blinded = true;
    return b;
}

PointConfiguration realize(const ProcessSpec& spec, const Window& window, const SiteRng& rng) {
    spec.validate();
    window.validate();
    if (window.dim != spec.dim()) throw ConfigError("realize: window/law dimension mismatch");
    window.site_count_checked();

    if (spec.doubled) {
        auto cfg = realize_doubled(spec.doubled->sigma, spec.doubled->delta, window, rng,
                                   spec.deleted_sites);
        for (const auto& v : spec.inserted_points) push_point(cfg, v.data(), Site::zero(cfg.dim), -1);
        return cfg;
    }

    const int d = spec.dim();
    PointConfiguration cfg;
    cfg.dim = d;
    cfg.radius = double(window.radius) + 0.5;  // half-cell padding: the window of sites [-R..R]

    DeletedSet deleted(spec.deleted_sites.begin(), spec.deleted_sites.end());
    double p[kMaxDim];
    for (BoxIter it(d, window.radius + window.margin); !it.done(); it.next()) {
        const Site& x = it.site();
        if (!deleted.empty() && deleted.count(SiteLayer{x, 0})) continue;
        const Vec y = sample(spec.law, x, rng);
        for (int i = 0; i < d; ++i) p[i] = double(x.c[i]) + y[i];
        if (inside_box(p, d, cfg.radius)) push_point(cfg, p, x, 0);
    }
    for (const auto& v : spec.inserted_points) push_point(cfg, v.data(), Site::zero(d), -1);
    return cfg;
}

PointConfiguration realize_doubled(double sigma, double delta, const Window& window,
                                   const SiteRng& rng, const std::vector<SiteLayer>& deleted) {
    if (!(delta > 0.0 && delta < sigma)) throw ConfigError("realize_doubled: need 0 < delta < sigma");
    window.validate();
    window.site_count_checked();
    const int d = window.dim;

    const double shared_sd = std::sqrt(sigma * sigma - delta * delta);
    const PerturbationLaw shared = PerturbationLaw::make_gaussian(shared_sd, d);
    const PerturbationLaw layer = PerturbationLaw::make_gaussian(delta, d);
    const SiteRng rng_shared = rng;
    const SiteRng rng_l1 = rng.with_stream(rng.stream + 1);
    const SiteRng rng_l2 = rng.with_stream(rng.stream + 2);

    DeletedSet del(deleted.begin(), deleted.end());

    PointConfiguration cfg;
    cfg.dim = d;
    cfg.radius = double(window.radius) + 0.5;  // half-cell padding: the window of sites [-R..R]
    double p[kMaxDim];
    for (BoxIter it(d, window.radius + window.margin); !it.done(); it.next()) {
        const Site& x = it.site();
        const Vec y = sample(shared, x, rng_shared);
        for (int l = 1; l <= 2; ++l) {
            if (!del.empty() && del.count(SiteLayer{x, l})) continue;
            const Vec yp = sample(layer, x, l == 1 ? rng_l1 : rng_l2);
            for (int i = 0; i < d; ++i) p[i] = double(x.c[i]) + y[i] + yp[i];
            if (inside_box(p, d, cfg.radius)) push_point(cfg, p, x, std::int8_t(l));
        }
    }
    return cfg;
}

PointConfiguration insert_uniform(PointConfiguration config, const Box& v, int k,
                                  const SiteRng& rng) {
    const int d = config.dim;
    if (int(v.lo.size()) != d || int(v.hi.size()) != d)
        throw ConfigError("insert_uniform: box dimension mismatch");
    for (int i = 0; i < d; ++i) {
        if (!(v.hi[i] > v.lo[i])) throw ConfigError("insert_uniform: degenerate box");
        if (v.lo[i] < -config.radius || v.hi[i] > config.radius)
            throw ConfigError("insert_uniform: box leaves the window");
    }
    if (k < 0) throw ConfigError("insert_uniform: negative count");

    // Insertion uniforms get their own stream; index sites would otherwise
    // collide with lattice sites of the realization field.
    const SiteRng irng = rng.with_stream(rng.stream + 5);
    double p[kMaxDim];
    for (int j = 0; j < k; ++j) {
        Site ix = Site::zero(d);
        ix.c[0] = std::int32_t(j);
        for (int i = 0; i < d; ++i) {
            double u1, u2;
            irng.uniform_pair(ix, std::uint32_t(i / 2), u1, u2);
            const double u = (i % 2 == 0) ? u1 : u2;
            p[i] = v.lo[i] + u * (v.hi[i] - v.lo[i]);
        }
        if (!config.blinded) {
            push_point(config, p, Site::zero(d), -1);
        } else {
            config.coords.insert(config.coords.end(), p, p + d);
        }
    }
    return config;
}

std::string to_jsonl(const PointConfiguration& config) {
    std::string out;
    out.reserve(config.size() * 32);
    for (std::size_t i = 0; i < config.size(); ++i) {
        nlohmann::json line;
        const double* p = config.point(i);
        line["coords"] = std::vector<double>(p, p + config.dim);
        if (!config.blinded) {
            const std::int8_t layer = config.prov_layer[i];
            if (layer >= 0) {
                const Site& s = config.prov_site[i];
                line["site"] = std::vector<int>(s.c, s.c + config.dim);
                if (layer > 0) line["layer"] = int(layer);
            }
        }
        out += line.dump();
        out += '\n';
    }
    return out;
}

PointConfiguration from_jsonl(const std::string& text, int dim, double radius) {
    PointConfiguration cfg;
    cfg.dim = dim;
    cfg.radius = radius;
    bool any_provenance = false;
    std::istringstream in(text);
    std::string line;
    std::vector<bool> has_site;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        const auto coords = j.at("coords").get<std::vector<double>>();
        if (int(coords.size()) != dim) throw ConfigError("from_jsonl: coords dimension mismatch");
        cfg.coords.insert(cfg.coords.end(), coords.begin(), coords.end());
        Site s = Site::zero(dim);
        std::int8_t layer = -1;
        if (j.contains("site")) {
            const auto sv = j.at("site").get<std::vector<int>>();
            for (int i = 0; i < dim; ++i) s.c[i] = sv[i];
            layer = std::int8_t(j.value("layer", 0));
            any_provenance = true;
        }
        cfg.prov_site.push_back(s);
        cfg.prov_layer.push_back(layer);
    }
    if (!any_provenance) {
        cfg.prov_site.clear();
        cfg.prov_layer.clear();
        cfg.blinded = true;
    }
    return cfg;
}

}  // namespace plattice

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "casim/errors.hpp"
#include "casim/rng.hpp"

namespace casim::packing {

enum class WallRule { reflect, drain };

/// Lateral overflow kernel between packing units.
///  - calibrated3: 3-cell fan-out with the side probability chosen so the
///    lateral variance gained per layer is exactly a^2 (the spreading law of
///    the analytic image formula). Default.
///  - fixed3: the plain (1/4, 1/2, 1/4) fan-out.
enum class KernelKind { calibrated3, fixed3 };

/// Regular packing as a lateral lattice of unit cells. Nodes 0..M span the
/// column diameter; wall nodes are half-width cells. One lattice level per
/// packing layer of height h.
struct PackingGeometry {
    double column_diameter = 0.0; // D [m]
    double unit_radius = 0.0;     // a [m]
    double layer_height = 0.0;    // h [m]
    int levels = 0;               // packing layers simulated
    int lateral_cells = 0;        // nodes across the diameter (derived)
    WallRule wall_rule = WallRule::reflect;
    KernelKind kernel = KernelKind::calibrated3;
    double pitch = 0.0;           // node spacing [m] (derived)
    double p_side = 0.0;          // per-hop side probability (derived)

    void validate() const
    {
        if (!(column_diameter > 2.0 * unit_radius) || !(unit_radius > 0.0))
            throw validation_error("PackingGeometry: need D > 2a > 0");
        if (!(layer_height > 0.0)) throw validation_error("PackingGeometry: need h > 0");
        if (levels < 1) throw validation_error("PackingGeometry: need at least 1 level");
        if (lateral_cells < 3) throw validation_error("PackingGeometry: need >= 3 lateral cells");
        if (!(p_side > 0.0) || p_side > 0.5)
            throw validation_error("PackingGeometry: side probability out of (0, 0.5]");
    }
};

inline PackingGeometry make_geometry(double column_diameter, double unit_radius,
                                     double layer_height, int levels,
                                     WallRule wall_rule = WallRule::reflect,
                                     KernelKind kernel = KernelKind::calibrated3)
{
    PackingGeometry g;
    g.column_diameter = column_diameter;
    g.unit_radius = unit_radius;
    g.layer_height = layer_height;
    g.levels = levels;
    g.wall_rule = wall_rule;
    g.kernel = kernel;
    if (!(column_diameter > 2.0 * unit_radius) || !(unit_radius > 0.0))
        throw validation_error("make_geometry: need D > 2a > 0");
    const double target_pitch = kernel == KernelKind::fixed3 ? unit_radius * std::sqrt(2.0)
                                                             : unit_radius * std::sqrt(3.0);
    int m = static_cast<int>(std::lround(column_diameter / target_pitch));
    // keep the calibrated side probability within (0, 1/2]
    const int m_max = static_cast<int>(std::floor(column_diameter / unit_radius));
    m = std::clamp(m, 2, std::max(2, m_max));
    g.lateral_cells = m + 1;
    g.pitch = column_diameter / m;
    g.p_side = kernel == KernelKind::fixed3
                   ? 0.25
                   : unit_radius * unit_radius / (2.0 * g.pitch * g.pitch);
    g.validate();
    return g;
}

struct IrrigationLayout {
    struct Source {
        double position; // lateral coordinate in [0, D] [m]
        double flow;     // I [m^3/s]
    };
    std::vector<Source> sources;
    double sources_per_area = 0.0; // n, point sources per unit cross-section
    double total_flow = 0.0;       // J [m^3/s]

    void validate(const PackingGeometry& g) const
    {
        if (sources.empty()) throw validation_error("IrrigationLayout: no sources");
        double sum = 0.0;
        for (const auto& s : sources) {
            if (s.position < 0.0 || s.position > g.column_diameter)
                throw validation_error("IrrigationLayout: source outside the column");
            if (!(s.flow > 0.0)) throw validation_error("IrrigationLayout: flows must be > 0");
            sum += s.flow;
        }
        if (std::abs(sum - total_flow) > 1e-9 * std::max(sum, total_flow))
            throw validation_error("IrrigationLayout: total_flow inconsistent with source flows");
        if (sources_per_area > 0.0) {
            const double count = static_cast<double>(sources.size());
            if (std::abs(sources_per_area - count) > 0.05 * count)
                throw validation_error("IrrigationLayout: n inconsistent with source count (>5%)");
        }
    }
};

/// n point sources per cross-section, placed on the interior nodes of a
/// uniform grid: x_i = i * D/(n+1). The step between sources and the wall
/// standoff both equal d0 = D/(n+1), so raising n tightens the step.
inline IrrigationLayout make_interior_grid_layout(const PackingGeometry& g, int n,
                                                  double total_flow)
{
    if (n < 1) throw validation_error("make_interior_grid_layout: need n >= 1");
    if (!(total_flow > 0.0)) throw validation_error("make_interior_grid_layout: need J > 0");
    IrrigationLayout layout;
    const double step = g.column_diameter / (n + 1);
    for (int i = 1; i <= n; ++i)
        layout.sources.push_back({i * step, total_flow / n});
    layout.sources_per_area = n;
    layout.total_flow = total_flow;
    return layout;
}

inline IrrigationLayout make_centered_layout(const PackingGeometry& g, double flow)
{
    IrrigationLayout layout;
    layout.sources.push_back({g.column_diameter / 2.0, flow});
    layout.sources_per_area = 1.0;
    layout.total_flow = flow;
    return layout;
}

/// Per-level, per-cell local specific liquid flow intensities.
/// Row 0 is the irrigated cross-section (before the first layer); row l is
/// the distribution after l layers, i.e. depth z = l * h.
class IntensityField {
public:
    IntensityField(const PackingGeometry& g, std::vector<double> data)
        : levels_(g.levels + 1), cells_(g.lateral_cells), pitch_(g.pitch),
          layer_height_(g.layer_height), diameter_(g.column_diameter),
          data_(std::move(data))
    {
        if (data_.size() != static_cast<std::size_t>(levels_) * cells_)
            throw validation_error("IntensityField: data size mismatch");
    }

    int levels() const { return levels_; }          // rows, = layers + 1
    int cells() const { return cells_; }
    double pitch() const { return pitch_; }
    double layer_height() const { return layer_height_; }
    double diameter() const { return diameter_; }
    double cell_width(int c) const { return (c == 0 || c == cells_ - 1) ? 0.5 * pitch_ : pitch_; }
    double cell_position(int c) const { return c * pitch_; }
    double depth(int level) const { return level * layer_height_; }

    std::span<const double> row(int level) const
    {
        return {data_.data() + static_cast<std::size_t>(level) * cells_,
                static_cast<std::size_t>(cells_)};
    }

    /// Total flow crossing one level [m^3/s] (unit out-of-plane depth).
    double level_flow(int level) const
    {
        double f = 0.0;
        for (int c = 0; c < cells_; ++c) f += row(level)[c] * cell_width(c);
        return f;
    }

    const std::vector<double>& raw() const { return data_; }

private:
    int levels_, cells_;
    double pitch_, layer_height_, diameter_;
    std::vector<double> data_;
};

struct WalkOptions {
    std::uint64_t min_walkers = 10'000;
    std::uint64_t batch_size = 1u << 16;
    unsigned threads = 0; // 0 = hardware_concurrency
};

namespace detail {

/// Deterministic largest-remainder apportionment of `total` walkers over
/// weights.
inline std::vector<std::uint64_t> apportion(const std::vector<double>& weights,
                                            std::uint64_t total)
{
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::uint64_t> counts(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> rem;
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double share = weights[i] / wsum * static_cast<double>(total);
        counts[i] = static_cast<std::uint64_t>(std::floor(share));
        assigned += counts[i];
        rem.emplace_back(share - static_cast<double>(counts[i]), i);
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; assigned < total; ++j, ++assigned)
        ++counts[rem[j % rem.size()].second];
    return counts;
}

} // namespace detail

/// Flow-weighted random walk of liquid parcels down the packing lattice.
/// Deterministic for a fixed seed: walkers are split into fixed-size batches,
/// each batch draws from its own stream derived from the master seed, and the
/// per-batch tallies are merged in batch order.
inline IntensityField random_walk_simulate(const PackingGeometry& geometry,
                                           const IrrigationLayout& layout,
                                           std::uint64_t walkers, std::uint64_t seed,
                                           const WalkOptions& options = {})
{
    geometry.validate();
    layout.validate(geometry);
    if (walkers < options.min_walkers)
        throw validation_error("random_walk_simulate: walker count below the configured floor of " +
                               std::to_string(options.min_walkers));

    const int m = geometry.lateral_cells - 1;
    const int rows = geometry.levels + 1;
    const int cells = geometry.lateral_cells;

    // source deposition: linear split between the two bracketing nodes
    std::vector<double> deposit(cells, 0.0);
    for (const auto& s : layout.sources) {
        const double u = std::clamp(s.position / geometry.pitch, 0.0, static_cast<double>(m));
        const int i = std::min(static_cast<int>(u), m - 1);
        const double frac = u - i;
        deposit[i] += s.flow * (1.0 - frac);
        deposit[i + 1] += s.flow * frac;
    }
    const auto start_counts = detail::apportion(deposit, walkers);
    std::vector<std::uint64_t> start_prefix(cells + 1, 0);
    for (int c = 0; c < cells; ++c) start_prefix[c + 1] = start_prefix[c] + start_counts[c];

    const std::uint64_t batch = std::max<std::uint64_t>(1, options.batch_size);
    const std::uint64_t n_batches = (walkers + batch - 1) / batch;
    const bool drain = geometry.wall_rule == WallRule::drain;
    const double p_side = geometry.p_side;

    auto run_batch = [&](std::uint64_t b) {
        std::vector<std::uint64_t> counts(static_cast<std::size_t>(rows) * cells, 0);
        std::uint64_t state = seed;
        std::uint64_t stream_seed = 0;
        for (std::uint64_t i = 0; i <= b; ++i) stream_seed = casim::detail::splitmix64(state);
        casim::detail::Xoshiro256 rng(stream_seed);
        const std::uint64_t lo = b * batch;
        const std::uint64_t hi = std::min(walkers, lo + batch);
        int cell_cursor = 0;
        for (std::uint64_t g = lo; g < hi; ++g) {
            while (g >= start_prefix[cell_cursor + 1]) ++cell_cursor;
            int pos = cell_cursor;
            ++counts[pos];
            for (int level = 1; level < rows; ++level) {
                if (drain && (pos == 0 || pos == m)) {
                    for (int l2 = level; l2 < rows; ++l2)
                        ++counts[static_cast<std::size_t>(l2) * cells + pos];
                    break;
                }
                const double u = rng.uniform();
                if (u < p_side) --pos;
                else if (u < 2.0 * p_side) ++pos;
                if (pos < 0) pos = 1;
                else if (pos > m) pos = m - 1;
                ++counts[static_cast<std::size_t>(level) * cells + pos];
            }
        }
        return counts;
    };

    unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_batches)));

    std::vector<std::vector<std::uint64_t>> partials(n_batches);
    if (threads <= 1) {
        for (std::uint64_t b = 0; b < n_batches; ++b) partials[b] = run_batch(b);
    } else {
        std::vector<std::future<void>> futures;
        std::atomic<std::uint64_t> next{0};
        for (unsigned t = 0; t < threads; ++t)
            futures.push_back(std::async(std::launch::async, [&] {
                for (std::uint64_t b = next.fetch_add(1); b < n_batches; b = next.fetch_add(1))
                    partials[b] = run_batch(b);
            }));
        for (auto& f : futures) f.get();
    }

    std::vector<std::uint64_t> totals(static_cast<std::size_t>(rows) * cells, 0);
    for (std::uint64_t b = 0; b < n_batches; ++b)
        for (std::size_t i = 0; i < totals.size(); ++i) totals[i] += partials[b][i];

    const double weight = layout.total_flow / static_cast<double>(walkers);
    std::vector<double> intensity(totals.size());
    for (int level = 0; level < rows; ++level)
        for (int c = 0; c < cells; ++c) {
            const std::size_t idx = static_cast<std::size_t>(level) * cells + c;
            const double width = (c == 0 || c == m) ? 0.5 * geometry.pitch : geometry.pitch;
            intensity[idx] = static_cast<double>(totals[idx]) * weight / width;
        }
    return IntensityField(geometry, std::move(intensity));
}

/// Unevenness of one level: max/min of the local intensities (primary), with
/// the axis-to-wall ratio of the analytic definition reported alongside.
struct Unevenness {
    double max_over_min = 0.0;
    bool dry = false; // some cell has zero intensity; max_over_min is +inf
    double axis_over_wall = 0.0;
};

inline Unevenness unevenness_coefficient(const IntensityField& field, int level)
{
    if (level < 0 || level >= field.levels())
        throw validation_error("unevenness_coefficient: level out of range");
    const auto r = field.row(level);
    const double mx = *std::max_element(r.begin(), r.end());
    const double mn = *std::min_element(r.begin(), r.end());
    Unevenness u;
    const int last = field.cells() - 1;
    const double wall = std::min(r[0], r[last]);
    const int mid = field.cells() / 2;
    const double axis = field.cells() % 2 ? r[mid] : 0.5 * (r[mid - 1] + r[mid]);
    u.axis_over_wall = wall > 0.0 ? axis / wall : std::numeric_limits<double>::infinity();
    if (mn <= 0.0) {
        u.dry = true;
        u.max_over_min = std::numeric_limits<double>::infinity();
        return u;
    }
    u.max_over_min = mx / mn;
    return u;
}

struct SpreadingZone {
    double height = 0.0;     // H_s [m]
    bool reached = false;
    double deepest_k_u = 0.0; // k_u at the deepest simulated level when not reached
};

/// Depth at which the unevenness coefficient first reaches the target on an
/// already simulated field. The crossing is interpolated linearly in k_u
/// between bracketing levels.
inline SpreadingZone spreading_zone_from_field(const IntensityField& field, double k_u_target)
{
    if (!(k_u_target >= 1.0))
        throw validation_error("spreading_zone: k_u target must be >= 1");
    SpreadingZone out;
    double prev = std::numeric_limits<double>::infinity();
    for (int level = 0; level < field.levels(); ++level) {
        const auto u = unevenness_coefficient(field, level);
        const double k = u.max_over_min;
        if (k <= k_u_target) {
            out.reached = true;
            if (level == 0 || !std::isfinite(prev)) {
                out.height = field.depth(level);
            } else {
                const double frac = (prev - k_u_target) / (prev - k);
                out.height = (static_cast<double>(level - 1) + frac) * field.layer_height();
            }
            out.deepest_k_u = k;
            return out;
        }
        prev = k;
    }
    out.reached = false;
    out.deepest_k_u = prev;
    return out;
}

inline SpreadingZone spreading_zone_height(const PackingGeometry& geometry,
                                           const IrrigationLayout& layout,
                                           double k_u_target, std::uint64_t walkers,
                                           std::uint64_t seed,
                                           const WalkOptions& options = {})
{
    const IntensityField field = random_walk_simulate(geometry, layout, walkers, seed, options);
    return spreading_zone_from_field(field, k_u_target);
}

/// Local specific intensity of one axis-symmetric source (direct Gaussian
/// plus the two first wall images):
/// i(r, z) = I (2h/(pi z)) { e^{-h r^2/(2 a^2 z)} + e^{-h (D-r)^2/(2 a^2 z)}
///                          + e^{-h (D+r)^2/(2 a^2 z)} }.
inline double analytic_intensity(double r, double z, double source_flow, double h,
                                 double a, double d)
{
    if (!(z > 0.0)) throw domain_error("analytic_intensity: z must be > 0");
    if (r < 0.0 || r > d / 2.0)
        throw domain_error("analytic_intensity: r must lie in [0, D/2]");
    const double c = h / (2.0 * a * a * z);
    return source_flow * (2.0 * h / (M_PI * z)) *
           (std::exp(-c * r * r) + std::exp(-c * (d - r) * (d - r)) +
            std::exp(-c * (d + r) * (d + r)));
}

/// Superposition of all layout sources (each with its own wall image pair),
/// sampled at every lattice node of the geometry.
inline std::vector<double> superpose_sources(const IrrigationLayout& layout,
                                             const PackingGeometry& geometry, double z)
{
    if (!(z > 0.0)) throw domain_error("superpose_sources: z must be > 0");
    layout.validate(geometry);
    const double d = geometry.column_diameter;
    const double c = geometry.layer_height / (2.0 * geometry.unit_radius * geometry.unit_radius * z);
    const double pref = 2.0 * geometry.layer_height / (M_PI * z);
    std::vector<double> profile(geometry.lateral_cells, 0.0);
    for (int node = 0; node < geometry.lateral_cells; ++node) {
        const double x = node * geometry.pitch;
        double acc = 0.0;
        for (const auto& s : layout.sources) {
            const double direct = x - s.position;
            const double img_lo = x + s.position;          // mirror across the x = 0 wall
            const double img_hi = 2.0 * d - s.position - x; // mirror across the x = D wall
            acc += s.flow * (std::exp(-c * direct * direct) + std::exp(-c * img_lo * img_lo) +
                             std::exp(-c * img_hi * img_hi));
        }
        profile[node] = pref * acc;
    }
    return profile;
}

/// H_s/h = (D/a)^2 / (4.64 + 1.76 n).
inline double spreading_zone_approx(double d, double a, double n)
{
    if (!(d > 0.0) || !(a > 0.0))
        throw domain_error("spreading_zone_approx: D and a must be > 0");
    if (n < 0.0) throw domain_error("spreading_zone_approx: n must be >= 0");
    const double ratio = d / a;
    return ratio * ratio / (4.64 + 1.76 * n);
}

/// R_S = sqrt( (a D / 2) ln(4 D / (pi a)) ).
inline double characteristic_radius(double d, double a)
{
    if (!(d > 0.0) || !(a > 0.0))
        throw domain_error("characteristic_radius: D and a must be > 0");
    const double arg = 4.0 * d / (M_PI * a);
    if (arg <= 1.0)
        throw domain_error("characteristic_radius: 4D/(pi a) <= 1, outside model validity");
    return std::sqrt(a * d / 2.0 * std::log(arg));
}

/// Mean intensity at the end of the spreading zone,
/// j = J sqrt(2h/H_S) exp(-h R_S^2 / (2 a^2 H_S)).
inline double mean_intensity(double total_flow, double h, double h_s, double a, double r_s)
{
    if (!(h_s > 0.0) || !(a > 0.0) || !(h > 0.0))
        throw domain_error("mean_intensity: h, H_S and a must be > 0");
    return total_flow * std::sqrt(2.0 * h / h_s) *
           std::exp(-h * r_s * r_s / (2.0 * a * a * h_s));
}

struct StabilizedRadius {
    double r_a = 0.0;  // [m]
    double h_a = 0.0;  // [m]
    bool stabilized = false;
    bool degenerate = false; // uniform field: every radius qualifies
    int skipped_levels = 0;  // levels without a crossing
};

/// Radius at which the local intensity equals the cross-section average, and
/// the depth beyond which that radius varies by less than 2% per level.
inline StabilizedRadius stabilized_radius_empirical(const IntensityField& field)
{
    const int cells = field.cells();
    const double d = field.diameter();
    StabilizedRadius out;
    std::vector<double> radius_series;
    std::vector<int> level_of;
    bool any_contrast = false;
    for (int level = 1; level < field.levels(); ++level) {
        const auto r = field.row(level);
        const double mean = field.level_flow(level) / d;
        // fold the profile about the axis and look for the crossing
        std::vector<std::pair<double, double>> folded;
        for (int c = 0; c < cells; ++c)
            folded.emplace_back(std::abs(field.cell_position(c) - d / 2.0), r[c]);
        std::sort(folded.begin(), folded.end());
        double cross = -1.0;
        for (std::size_t j = 0; j + 1 < folded.size(); ++j) {
            const double a0 = folded[j].second - mean;
            const double a1 = folded[j + 1].second - mean;
            if (a0 != a1) any_contrast = true;
            if (a0 == 0.0 && a1 == 0.0) continue;
            if (a0 * a1 <= 0.0 && a0 != a1) {
                const double t = a0 / (a0 - a1);
                cross = folded[j].first + t * (folded[j + 1].first - folded[j].first);
                break;
            }
        }
        if (cross < 0.0) {
            ++out.skipped_levels;
            continue;
        }
        radius_series.push_back(cross);
        level_of.push_back(level);
    }
    if (!any_contrast || radius_series.empty()) {
        out.degenerate = true;
        return out;
    }
    // smallest level index from which the per-level variation stays < 2%
    std::size_t start = radius_series.size();
    for (std::size_t j = radius_series.size(); j-- > 1;) {
        const double rel = std::abs(radius_series[j] - radius_series[j - 1]) /
                           std::max(radius_series[j - 1], 1e-300);
        if (rel < 0.02) start = j;
        else break;
    }
    if (start >= radius_series.size()) {
        out.stabilized = false;
        out.r_a = radius_series.back();
        out.h_a = field.depth(level_of.back());
        return out;
    }
    out.stabilized = true;
    out.h_a = field.depth(level_of[start]);
    double acc = 0.0;
    for (std::size_t j = start; j < radius_series.size(); ++j) acc += radius_series[j];
    out.r_a = acc / static_cast<double>(radius_series.size() - start);
    return out;
}

/// Watered-volume fraction of the spreading zone: the geometric reading of
/// the worsening coefficient. Cells with intensity above the threshold count
/// as watered; widths weight the volume.
inline double watered_volume_fraction(const IntensityField& field, int zone_levels,
                                      double intensity_threshold)
{
    if (zone_levels < 1 || zone_levels >= field.levels())
        throw validation_error("watered_volume_fraction: zone level count out of range");
    double wet = 0.0, total = 0.0;
    for (int level = 0; level <= zone_levels; ++level)
        for (int c = 0; c < field.cells(); ++c) {
            const double w = field.cell_width(c);
            total += w;
            if (field.row(level)[c] > intensity_threshold) wet += w;
        }
    return wet / total;
}

} // namespace casim::packing
